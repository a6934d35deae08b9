import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bandtoeplitz.ensemble import (
    BandwidthSchedule,
    EnsembleSpec,
    block_stream,
    build_matrix,
    derive_seed,
    draw_entries,
    entry_distribution_moments,
    normalization_scale,
    resolve_bandwidth,
    sample_block_family,
)
from bandtoeplitz.errors import MemoryBudgetError, SchemaError


def test_bandwidth_schedules():
    assert resolve_bandwidth(BandwidthSchedule("PowerLaw", 0.7), 400) == 67
    assert resolve_bandwidth(BandwidthSchedule("PowerLaw", 0.5), 100) == 10
    assert resolve_bandwidth(BandwidthSchedule("Logarithmic", 2.0), 100) == math.ceil(2 * math.log(100))
    assert resolve_bandwidth(BandwidthSchedule("Fixed", 30), 300) == 30
    assert resolve_bandwidth(BandwidthSchedule("Fixed", 30), 10) == 9
    assert BandwidthSchedule("PowerLaw", 0.7).almost_sure
    assert not BandwidthSchedule("PowerLaw", 0.5).almost_sure
    assert not BandwidthSchedule("Logarithmic", 3.0).almost_sure
    with pytest.raises(ValueError):
        BandwidthSchedule("PowerLaw", 1.0)
    with pytest.raises(ValueError):
        BandwidthSchedule("Fixed", 2.5)
    with pytest.raises(ValueError):
        BandwidthSchedule("Cubic", 1)


@given(N=st.integers(2, 10**6), alpha=st.floats(0.05, 0.95))
def test_bandwidth_in_range(N, alpha):
    b = resolve_bandwidth(BandwidthSchedule("PowerLaw", alpha), N)
    assert 1 <= b <= N - 1


def test_spec_defaults_and_roundtrip(tmp_path):
    spec = EnsembleSpec(N=50, m=2, bandwidth={"kind": "powerlaw", "param": 0.7}, symmetry_class="symmetricblocks")
    assert spec.bandwidth.kind == "PowerLaw"
    assert spec.symmetry_class == "SymmetricBlocks"
    assert spec.distribution == "Rademacher"
    assert spec.size == 100
    assert spec.half_bandwidth == 2 * spec.b + 1
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec.to_dict()))
    assert EnsembleSpec.load(path) == spec
    assert spec.fingerprint() == EnsembleSpec.from_dict(spec.to_dict()).fingerprint()
    assert spec.replace(seed=1).fingerprint() != spec.fingerprint()
    assert EnsembleSpec(N=1).b == 0


def test_spec_errors(tmp_path):
    with pytest.raises(ValueError):
        EnsembleSpec(N=0)
    with pytest.raises(ValueError):
        EnsembleSpec(N=4, seed=-1)
    with pytest.raises(ValueError):
        EnsembleSpec(N=4, distribution="Cauchy")
    with pytest.raises(SchemaError):
        EnsembleSpec.from_dict({"m": 2})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(SchemaError):
        EnsembleSpec.load(bad)


def test_derive_seed_stable():
    assert derive_seed(1, "a", 3) == derive_seed(1, "a", 3)
    assert derive_seed(1, "a", 3) != derive_seed(1, "a", 4)
    assert derive_seed(1, "a") != derive_seed(1, "b")
    assert 0 <= derive_seed(2**63, "x") < 2**64


def test_blocks_are_pure_functions_of_seed_and_offset():
    spec = EnsembleSpec(N=30, m=3, bandwidth=5, seed=11)
    a = sample_block_family(spec)
    b = sample_block_family(spec.replace(N=60))
    # a larger N resolves to the same fixed b, so the same blocks come back
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)
    c = sample_block_family(spec.replace(bandwidth=8))
    for x, y in zip(a, c):
        np.testing.assert_array_equal(x, y)


def test_block_structure():
    spec = EnsembleSpec(N=20, m=4, bandwidth=3, symmetry_class="TransposeCoupled", distribution="Gaussian", seed=5)
    blocks = sample_block_family(spec)
    np.testing.assert_array_equal(blocks[0], blocks[0].T)
    assert not np.allclose(blocks[1], blocks[1].T)
    gspec = spec.replace(symmetry_class="SymmetricBlocks")
    for blk in sample_block_family(gspec):
        np.testing.assert_array_equal(blk, blk.T)


@pytest.mark.parametrize("dist", ["Rademacher", "Gaussian", "UniformScaled"])
def test_entry_variance_audit(dist):
    rng = block_stream(123, 0)
    x = draw_entries(rng, dist, 10**5)
    n = x.size
    m2 = float(entry_distribution_moments(dist, 2))
    m4 = float(entry_distribution_moments(dist, 4))
    assert abs(x.mean()) <= 3 * math.sqrt(1 / n) + 1e-12
    se = math.sqrt((m4 - m2 * m2) / n)
    assert abs(np.mean(x * x) - m2) <= 3 * se + 1e-12


def test_distribution_moments():
    assert entry_distribution_moments("Gaussian", 4) == 3
    assert entry_distribution_moments("UniformScaled", 4) == Fraction(9, 5)
    assert entry_distribution_moments("Rademacher", 6) == 1
    assert entry_distribution_moments("Gaussian", 3) == 0
    assert entry_distribution_moments("Gaussian", 1, absolute=True) == pytest.approx(math.sqrt(2 / math.pi))
    with pytest.raises(ValueError):
        entry_distribution_moments("Gaussian", 9)


def test_goe_class_diagonal_variance_audit():
    # 10^5 diagonal draws: variance 2 on the diagonal, 1 off it
    spec = EnsembleSpec(N=2, m=2, bandwidth=1, symmetry_class="SymmetricBlocks", distribution="Gaussian")
    diag, off = [], []
    for seed in range(25000):
        for blk in sample_block_family(spec, seed=seed):
            diag.extend(np.diag(blk))
            off.append(blk[0, 1])
    diag, off = np.array(diag), np.array(off)
    assert abs(np.var(diag) - 2) <= 3 * math.sqrt(2 * 4 / diag.size)
    assert abs(np.var(off) - 1) <= 3 * math.sqrt(2 / off.size)


def test_independence_spot_check():
    spec = EnsembleSpec(N=2, m=2, bandwidth=1, distribution="Gaussian")
    pairs = np.array([[b[1][0, 1], b[1][1, 0]] for b in (sample_block_family(spec, seed=s) for s in range(20000))])
    r = np.corrcoef(pairs.T)[0, 1]
    assert abs(r) <= 3 / math.sqrt(len(pairs))


def test_build_matrix_layout_and_dense():
    spec = EnsembleSpec(N=7, m=3, bandwidth=2, distribution="Gaussian", seed=9)
    blocks = sample_block_family(spec)
    mat = build_matrix(spec, "Raw")
    dense = mat.dense()
    ref = np.zeros((21, 21))
    for i in range(7):
        for j in range(7):
            s = i - j
            if abs(s) <= 2:
                ref[3 * i : 3 * i + 3, 3 * j : 3 * j + 3] = blocks[s] if s >= 0 else blocks[-s].T
    np.testing.assert_array_equal(dense, ref)
    assert mat.entry(5, 2) == ref[5, 2] == mat.entry(2, 5)
    assert mat.entry(20, 0) == 0.0
    assert mat.trace() == pytest.approx(np.trace(ref))
    assert mat.frobenius2() == pytest.approx(np.sum(ref * ref))
    assert not mat.band.flags.writeable


@given(N=st.integers(1, 12), m=st.integers(1, 4), b=st.integers(1, 6), sym=st.sampled_from(["TransposeCoupled", "SymmetricBlocks"]))
@settings(max_examples=40, deadline=None)
def test_matrix_symmetric_and_banded(N, m, b, sym):
    spec = EnsembleSpec(N=N, m=m, bandwidth=b, symmetry_class=sym)
    dense = build_matrix(spec, "Raw").dense()
    np.testing.assert_array_equal(dense, dense.T)
    i, j = np.indices(dense.shape)
    assert np.all(dense[np.abs(i // m - j // m) > spec.b] == 0)


def test_normalizations():
    spec = EnsembleSpec(N=40, m=2, bandwidth=5)
    assert normalization_scale(spec, "Raw") == 1.0
    assert normalization_scale(spec, "GueScaled") == pytest.approx(1 / math.sqrt(20))
    assert normalization_scale(spec, "TraceScaled") == pytest.approx(1 / math.sqrt(10))
    raw = build_matrix(spec, "Raw").band
    np.testing.assert_allclose(build_matrix(spec, "GueScaled").band, raw / math.sqrt(20))


def test_memory_cap():
    spec = EnsembleSpec(N=1000, m=4, bandwidth=100)
    with pytest.raises(MemoryBudgetError):
        build_matrix(spec, memory_cap=1000)


def test_triplets(tmp_path):
    import io

    mat = build_matrix(EnsembleSpec(N=2, m=1, bandwidth=1, seed=7))
    buf = io.StringIO()
    mat.write_triplets(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "row,col,value"
    assert len(lines) == 4
    assert {abs(float(l.split(",")[2])) for l in lines[1:]} == {1 / math.sqrt(2)}
