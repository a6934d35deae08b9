"""Random block Toeplitz band matrices: exact moments, limiting densities and
a band eigensolver for Monte Carlo checks of their spectra."""

__version__ = "0.1.0"

from .densities import (
    DensityModel,
    WaveFunctionTable,
    density_cdf,
    density_moment,
    goe_density,
    gue_density,
    hermite,
    wave_function,
    wave_functions,
)
from .eigen import (
    SpectralSample,
    eigenvalues_band,
    eigenvalues_dense,
    empirical_moments,
    ks_distance,
    spectrum,
    tridiagonal_eigenvalues,
)
from .ensemble import (
    BandwidthSchedule,
    BlockToeplitzMatrix,
    EnsembleSpec,
    build_matrix,
    entry_distribution_moments,
    resolve_bandwidth,
    sample_block_family,
)
from .errors import (
    BandToeplitzError,
    DegreeLimitError,
    MemoryBudgetError,
    QuadratureError,
    SchemaError,
    SizeLimitError,
    SolverError,
)
from .harness import (
    ExperimentConfig,
    expected_second_moment,
    run_esd_experiment,
    run_experiment,
    run_mixed_trace_experiment,
    run_moment_experiment,
    verify_report,
)
from .pairings import (
    PairPartition,
    TraceWord,
    catalan_limit_check,
    enumerate_pair_partitions,
    free_index_count,
    goe_moment,
    gue_moment,
    mixed_trace_gue,
    orbit_count,
)
from .report import ExperimentReport, load_report, persist_report
