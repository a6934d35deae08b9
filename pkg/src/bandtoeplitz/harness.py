"""Monte Carlo experiments against the exact and analytic references.

Every sample is one independent task: it builds the ``GueScaled`` matrix,
solves it on the band path and returns its sorted spectrum.  All statistics
are derived from those spectra (the ``TraceScaled`` spectrum is ``sqrt(m)``
times the ``GueScaled`` one), and aggregation walks samples in index order,
so a report does not depend on how the tasks were scheduled.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .densities import DensityModel
from .eigen import ks_distance, spectrum
from .ensemble import EnsembleSpec, build_matrix, derive_seed
from .errors import SchemaError, SolverError
from .pairings import TraceWord, goe_moment, gue_moment, mixed_trace_gue
from .report import ExperimentReport, persist_report

log = logging.getLogger(__name__)

STATISTICS = ("esd_histogram", "ks", "trace_moments", "mixed_traces")
REFERENCES = ("analytic_density", "combinatorial_moments", "direct_goe_sampler")
MAX_WORD_LETTERS = 12


@dataclass
class ExperimentConfig:
    ensemble: EnsembleSpec
    N_values: list
    samples: int = 30
    statistics: list = field(default_factory=lambda: ["esd_histogram", "ks", "trace_moments"])
    k_max: int = 4
    words: list = field(default_factory=list)
    reference: str = "analytic_density"
    name: str = "experiment"
    master_seed: int = 0
    threads: int = 1
    bins: int = 81
    hist_range: tuple = (-4.0, 4.0)
    bias_budget: dict = field(default_factory=lambda: {"default": 0.1})
    relative_budget: float = 0.1
    ks_threshold: float | None = None
    direct_samples: int = 20000
    output: str | None = None
    record_timing: bool = False

    def __post_init__(self):
        if isinstance(self.ensemble, dict):
            self.ensemble = EnsembleSpec.from_dict(self.ensemble)
        self.N_values = [int(n) for n in self.N_values]
        if not self.N_values:
            raise ValueError("N_values must not be empty")
        if self.samples < 2:
            raise ValueError("at least two samples per N are needed for standard errors")
        unknown = set(self.statistics) - set(STATISTICS)
        if unknown:
            raise ValueError(f"unknown statistics {sorted(unknown)}")
        if self.reference not in REFERENCES:
            raise ValueError(f"unknown reference {self.reference!r}")
        self.words = [str(TraceWord.parse(w) if isinstance(w, str) else TraceWord(tuple(w))) for w in self.words]
        for w in self.words:
            if TraceWord.parse(w).letters > MAX_WORD_LETTERS:
                raise ValueError(f"trace word {w} has more than {MAX_WORD_LETTERS} letters")
        if "mixed_traces" in self.statistics and self.ensemble.symmetry_class != "TransposeCoupled":
            raise ValueError("mixed traces are defined for the TransposeCoupled class only")
        self.hist_range = tuple(float(v) for v in self.hist_range)
        self.bias_budget = {str(k): float(v) for k, v in self.bias_budget.items()}

    @property
    def is_goe(self):
        return self.ensemble.symmetry_class == "SymmetricBlocks"

    def budget(self, k):
        if k % 2:
            return 0.0
        return self.bias_budget.get(str(k), self.bias_budget.get("default", 0.0))

    def to_dict(self):
        d = asdict(self)
        d["ensemble"] = self.ensemble.to_dict()
        d["hist_range"] = list(self.hist_range)
        return d

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(**data)
        except TypeError as exc:
            raise SchemaError(f"malformed experiment config: {exc}") from exc


def sample_seed(config, N, index):
    return derive_seed(config.master_seed, config.name, N, index)


def _solve_sample(args):
    spec_dict, N, seed = args
    spec = EnsembleSpec.from_dict(spec_dict).replace(N=N, seed=seed)
    sample = spectrum(build_matrix(spec, "GueScaled"))
    d = sample.diagnostics
    return sample.eigenvalues, {
        "sweeps": d.get("sweeps", 0),
        "rotations": d.get("rotations", 0),
        "trace_residual": d.get("trace_residual", 0.0),
        "frobenius_residual": d.get("frobenius_residual", 0.0),
    }


def _run_samples(config, N):
    tasks = [(config.ensemble.to_dict(), N, sample_seed(config, N, i)) for i in range(config.samples)]
    if config.threads > 1:
        with ProcessPoolExecutor(max_workers=config.threads) as pool:
            return list(pool.map(_solve_sample, tasks))
    return [_solve_sample(t) for t in tasks]


def _mean_se(values):
    values = np.asarray(values, dtype=float)
    mean = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(values.size))
    return mean, se


def _zscore(gap, se):
    return gap / se if se > 0 else None


def _fraction_entry(value):
    value = Fraction(value)
    return {"exact": f"{value.numerator}/{value.denominator}" if value.denominator != 1 else str(value.numerator), "value": float(value)}


# -- references ---------------------------------------------------------------------


def sample_direct_goe(m, count, seed):
    """Pooled eigenvalues of ``H / sqrt(m)`` for ``count`` GOE matrices of order ``m``.

    ``H = (Z + Z^T) / sqrt(2)`` with standard normal ``Z``: off-diagonal
    variance 1, diagonal variance 2.
    """
    if not 1 <= m <= 64:
        raise ValueError(f"m must lie in [1, 64], got {m}")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    z = rng.standard_normal((count, m, m))
    h = (z + np.swapaxes(z, 1, 2)) / math.sqrt(2.0)
    return np.linalg.eigvalsh(h).ravel() / math.sqrt(m)


def ks_two_sample(a, b):
    a = np.sort(np.asarray(a, float))
    b = np.sort(np.asarray(b, float))
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def goe_formula_check(m, k_max=4, tol=1e-6):
    """Compare the GOE density expression against exact GOE moments.

    Reports mass and even moments of the expression as written and with the
    sign-kernel coefficient scaled by ``1/sqrt(2)``.
    """
    exact = {str(k): float(goe_moment(m, k)) for k in range(0, k_max + 1, 2)}
    out = {"m": m, "exact_moments": exact}
    for label, scale in (("as_written", 1.0), ("unit_mass_variant", 1.0 / math.sqrt(2.0))):
        model = DensityModel(m, "GOE", cross_scale=scale)
        quad = {str(k): model.moment(k) for k in range(0, k_max + 1, 2)}
        gap = max(abs(quad[k] - exact[k]) for k in exact)
        out[label] = {"moments": quad, "max_gap": gap, "agrees": bool(gap <= tol)}
    return out


def expected_second_moment(spec):
    """Exact ``E[(1/mN) tr X**2]`` for the ``GueScaled`` matrix at finite ``N``.

    Counts the nonzero blocks, ``N(2b+1) - b(b+1)``, each carrying total
    entry variance ``m**2`` (``m**2 + m`` for symmetric blocks).
    """
    N, m, b = spec.N, spec.m, spec.b
    per_block = m * m + (m if spec.symmetry_class == "SymmetricBlocks" else 0)
    blocks = N * (2 * b + 1) - b * (b + 1)
    return Fraction(blocks * per_block, 2 * m * b * m * N)


def _reference_model(config):
    if config.reference == "analytic_density" and not config.is_goe:
        return DensityModel(config.ensemble.m, "GUE")
    if config.reference == "analytic_density":
        return DensityModel(config.ensemble.m, "GOE")
    return None


def _direct_reference(config):
    if not config.is_goe:
        raise ValueError("the direct GOE sampler reference needs SymmetricBlocks")
    seed = derive_seed(config.master_seed, config.name, "direct-goe")
    return sample_direct_goe(config.ensemble.m, config.direct_samples, seed)


def _moment_reference(config, k):
    m = config.ensemble.m
    return goe_moment(m, k) if config.is_goe else gue_moment(m, k)


def _histogram(values, config):
    lo, hi = config.hist_range
    counts, edges = np.histogram(values, bins=config.bins, range=(lo, hi))
    below = int(np.count_nonzero(values < lo))
    above = int(np.count_nonzero(values > hi))
    return counts, edges, below, above


def _reference_bin_density(config, model, direct, edges):
    if model is not None:
        mass = np.diff(np.asarray(model.cdf(edges)))
    else:
        counts, _ = np.histogram(direct, bins=edges)
        mass = counts / direct.size
    return mass / np.diff(edges)


# -- experiment ---------------------------------------------------------------------


def _add_check(report, name, passed, hard, detail):
    report.checks.append({"name": name, "passed": bool(passed), "hard": bool(hard), "detail": detail})


def run_experiment(config):
    """Run every statistic in ``config`` over its ``N`` ladder and return the report."""
    m = config.ensemble.m
    stats = set(config.statistics)
    report = ExperimentReport(config=config.to_dict())
    timing = {} if config.record_timing else None

    model = direct = None
    if stats & {"esd_histogram", "ks"}:
        if config.reference == "direct_goe_sampler":
            direct = _direct_reference(config)
            report.references["direct_goe_sampler"] = {
                "source": "direct-sampler",
                "count": config.direct_samples,
                "pooled_size": int(direct.size),
            }
        else:
            model = _reference_model(config)
            report.references["density"] = {
                "source": "quadrature",
                "ensemble": model.ensemble,
                "total_mass": model.total_mass,
            }
        if config.is_goe:
            report.references["goe_formula_check"] = {"source": "quadrature", **goe_formula_check(m)}
    if "trace_moments" in stats:
        report.references["moments"] = {
            "source": "enumeration",
            "values": {str(k): _fraction_entry(_moment_reference(config, k)) for k in range(1, config.k_max + 1)},
        }
    if "mixed_traces" in stats:
        report.references["mixed_traces"] = {
            "source": "enumeration",
            "values": {w: _fraction_entry(mixed_trace_gue(m, TraceWord.parse(w))) for w in config.words},
        }

    for N in config.N_values:
        started = time.perf_counter()
        try:
            solved = _run_samples(config, N)
        except SolverError as exc:
            report.complete = False
            report.errors.append({"N": N, "error": str(exc), "diagnostics": exc.diagnostics})
            continue
        spectra = [ev for ev, _ in solved]
        diags = [d for _, d in solved]
        spec = config.ensemble.replace(N=N)
        entry = {
            "N": N,
            "b": spec.b,
            "size": spec.size,
            "samples": config.samples,
            "solver": {
                "sweeps": int(sum(d["sweeps"] for d in diags)),
                "rotations": int(sum(d["rotations"] for d in diags)),
                "max_trace_residual": max(d["trace_residual"] for d in diags),
                "max_frobenius_residual": max(d["frobenius_residual"] for d in diags),
            },
        }
        pooled = np.concatenate(spectra)
        if "esd_histogram" in stats:
            counts, edges, below, above = _histogram(pooled, config)
            entry["histogram"] = {
                "edges": edges.tolist(),
                "counts": counts.tolist(),
                "below": below,
                "above": above,
                "reference_density": _reference_bin_density(config, model, direct, edges).tolist(),
            }
        if "ks" in stats:
            if model is not None:
                per_sample = [ks_distance(ev, model) for ev in spectra]
                pooled_ks = ks_distance(pooled, model)
            else:
                per_sample = [ks_two_sample(ev, direct) for ev in spectra]
                pooled_ks = ks_two_sample(pooled, direct)
            entry["ks"] = {
                "pooled": pooled_ks,
                "median": float(np.median(per_sample)),
                "per_sample": per_sample,
            }
        if "trace_moments" in stats:
            moments = {}
            for k in range(1, config.k_max + 1):
                vals = [float(np.mean(ev**k)) for ev in spectra]
                mean, se = _mean_se(vals)
                ref = report.references["moments"]["values"][str(k)]["value"]
                gap = mean - ref
                moments[str(k)] = {"mean": mean, "se": se, "reference": ref, "gap": gap, "z": _zscore(gap, se)}
            entry["moments"] = moments
        if "mixed_traces" in stats:
            root = math.sqrt(m)
            mixed = {}
            for w in config.words:
                word = TraceWord.parse(w)
                vals = []
                for ev in spectra:
                    y = root * ev
                    prod = 1.0
                    for i, nu in enumerate(word.exponents, start=1):
                        prod *= float(np.sum(y**i)) ** nu
                    vals.append(prod / N**word.total)
                mean, se = _mean_se(vals)
                ref = report.references["mixed_traces"]["values"][w]["value"]
                mixed[w] = {"mean": mean, "se": se, "reference": ref, "gap": mean - ref, "z": _zscore(mean - ref, se)}
            entry["mixed_traces"] = mixed
        report.results.append(entry)
        if timing is not None:
            timing[str(N)] = time.perf_counter() - started

    _evaluate(config, report)
    report.timing = timing
    if config.output:
        write_outputs(report, config.output)
    return report


def _evaluate(config, report):
    if not report.results:
        report.trend = {"status": "not_applicable"}
        return
    last = report.results[-1]
    if "ks" in last:
        if config.ks_threshold is not None:
            val = last["ks"]["pooled"]
            _add_check(
                report, f"ks_pooled_N{last['N']}", val <= config.ks_threshold, True,
                f"pooled KS {val:.4f} vs threshold {config.ks_threshold}",
            )
        medians = [r["ks"]["median"] for r in report.results]
        if len(medians) < 2:
            report.trend = {"status": "not_applicable", "median_ks": medians}
        else:
            ok = all(b <= a for a, b in zip(medians, medians[1:]))
            report.trend = {"status": "nonincreasing" if ok else "violated", "median_ks": medians}
            _add_check(report, "ks_trend", ok, False, "median KS along N: " + ", ".join(f"{v:.4f}" for v in medians))
    for entry in report.results:
        for k, mo in entry.get("moments", {}).items():
            allowed = 3.0 * mo["se"] + config.budget(int(k))
            _add_check(
                report, f"moment{k}_N{entry['N']}", abs(mo["gap"]) <= allowed, True,
                f"mean {mo['mean']:.6g} vs {mo['reference']:.6g} (|gap| {abs(mo['gap']):.4g}, allowed {allowed:.4g})",
            )
        for w, mt in entry.get("mixed_traces", {}).items():
            allowed = 3.0 * mt["se"] + config.relative_budget * abs(mt["reference"])
            _add_check(
                report, f"mixed[{w}]_N{entry['N']}", abs(mt["gap"]) <= allowed, True,
                f"mean {mt['mean']:.6g} vs {mt['reference']:.6g} (|gap| {abs(mt['gap']):.4g}, allowed {allowed:.4g})",
            )


def run_esd_experiment(config):
    if config.reference == "combinatorial_moments":
        raise ValueError("an ESD experiment needs a density or direct-sampler reference")
    config.statistics = sorted(set(config.statistics) | {"esd_histogram", "ks"})
    return run_experiment(config)


def run_moment_experiment(config):
    config.statistics = ["trace_moments"]
    return run_experiment(config)


def run_mixed_trace_experiment(config):
    config.statistics = ["mixed_traces"]
    return run_experiment(config)


# -- outputs ------------------------------------------------------------------------


def histogram_rows(entry):
    hist = entry["histogram"]
    counts = np.asarray(hist["counts"], dtype=float)
    edges = np.asarray(hist["edges"])
    total = counts.sum() + hist["below"] + hist["above"]
    density = counts / (total * np.diff(edges)) if total else counts
    for i in range(counts.size):
        yield edges[i], edges[i + 1], int(counts[i]), float(density[i]), hist["reference_density"][i]


def write_histogram_csv(entry, path):
    with open(path, "w", newline="\n") as fh:
        fh.write("bin_left,bin_right,count,empirical_density,reference_density\n")
        for row in histogram_rows(entry):
            fh.write(",".join(repr(float(v)) if isinstance(v, float) else str(v) for v in row) + "\n")


def write_outputs(report, path):
    persist_report(report, path)
    stem = str(path)[:-5] if str(path).endswith(".json") else str(path)
    for entry in report.results:
        if "histogram" in entry:
            write_histogram_csv(entry, f"{stem}_hist_N{entry['N']}.csv")


# -- verification -------------------------------------------------------------------


def verify_report(report, rtol=1e-12):
    """Recompute every reference value in ``report``; return a list of differences."""
    config = ExperimentConfig.from_dict(report.config)
    m = config.ensemble.m
    diffs = []

    def compare(label, stored, fresh):
        if isinstance(stored, str) or isinstance(fresh, str):
            same = stored == fresh
        else:
            same = abs(stored - fresh) <= rtol * max(1.0, abs(fresh))
        if not same:
            diffs.append({"field": label, "stored": stored, "recomputed": fresh})

    refs = report.references
    if "moments" in refs:
        for k, stored in refs["moments"]["values"].items():
            fresh = _fraction_entry(_moment_reference(config, int(k)))
            compare(f"references.moments.{k}", stored["exact"], fresh["exact"])
        for entry in report.results:
            for k, mo in entry.get("moments", {}).items():
                compare(f"results[N={entry['N']}].moments.{k}.reference", mo["reference"],
                        float(_moment_reference(config, int(k))))
    if "mixed_traces" in refs:
        for w, stored in refs["mixed_traces"]["values"].items():
            fresh = _fraction_entry(mixed_trace_gue(m, TraceWord.parse(w)))
            compare(f"references.mixed_traces.{w}", stored["exact"], fresh["exact"])
    if "goe_formula_check" in refs:
        fresh = goe_formula_check(m)
        for label in ("as_written", "unit_mass_variant"):
            for k, v in refs["goe_formula_check"][label]["moments"].items():
                compare(f"references.goe_formula_check.{label}.{k}", v, fresh[label]["moments"][k])
    hist_entries = [e for e in report.results if "histogram" in e]
    if hist_entries:
        model = _reference_model(config) if config.reference != "direct_goe_sampler" else None
        direct = _direct_reference(config) if model is None else None
        if "density" in refs:
            compare("references.density.total_mass", refs["density"]["total_mass"], model.total_mass)
        for entry in hist_entries:
            edges = np.asarray(entry["histogram"]["edges"])
            fresh = _reference_bin_density(config, model, direct, edges)
            for i, (s, f) in enumerate(zip(entry["histogram"]["reference_density"], fresh)):
                compare(f"results[N={entry['N']}].histogram.reference_density[{i}]", s, float(f))
    return diffs
