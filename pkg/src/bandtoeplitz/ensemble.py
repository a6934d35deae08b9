"""Random block Toeplitz band matrices.

The ``mN x mN`` matrix has block ``(i, j)`` equal to ``A_{i-j}`` and zero
blocks for ``|i - j| > b``.  Two symmetry classes are supported:

``TransposeCoupled``
    ``A_{-s} = A_s^T``; ``A_s`` (``s >= 1``) has independent entries and
    ``A_0`` is symmetric.  All variances are 1.
``SymmetricBlocks``
    ``A_{-s} = A_s = A_s^T``; off-diagonal variance 1, diagonal variance 2.

Randomness is counter-based: block ``A_s`` is drawn from a Philox stream
keyed by ``(seed, s)`` and entry ``(i, j)`` always reads the same offset of
that stream, so a matrix is a pure function of its spec.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .errors import MemoryBudgetError, SchemaError

SYMMETRY_CLASSES = ("TransposeCoupled", "SymmetricBlocks")
DISTRIBUTIONS = ("Rademacher", "Gaussian", "UniformScaled")
SCHEDULE_KINDS = ("PowerLaw", "Logarithmic", "Fixed")
NORMALIZATIONS = ("Raw", "GueScaled", "TraceScaled")

#: default cap on band storage, bytes
MEMORY_CAP = 1 << 30


def _canonical(name, choices, what):
    for c in choices:
        if str(name).lower() == c.lower():
            return c
    raise ValueError(f"unknown {what} {name!r}; expected one of {', '.join(choices)}")


@dataclass(frozen=True)
class BandwidthSchedule:
    """``b_N`` as ``ceil(N**alpha)``, ``ceil(c log N)`` or a fixed ``b``, clamped to ``[1, N-1]``."""

    kind: str = "PowerLaw"
    param: float = 0.5

    def __post_init__(self):
        kind = _canonical(self.kind, SCHEDULE_KINDS, "bandwidth kind")
        object.__setattr__(self, "kind", kind)
        if kind == "PowerLaw" and not 0 < self.param < 1:
            raise ValueError(f"PowerLaw exponent must lie in (0, 1), got {self.param}")
        if kind == "Logarithmic" and not self.param > 0:
            raise ValueError(f"Logarithmic factor must be positive, got {self.param}")
        if kind == "Fixed":
            if int(self.param) != self.param or self.param < 1:
                raise ValueError(f"Fixed bandwidth must be a positive integer, got {self.param}")
            object.__setattr__(self, "param", int(self.param))

    @property
    def almost_sure(self):
        """True iff ``sum_N b_N**-2`` converges along the schedule."""
        return self.kind == "PowerLaw" and self.param > 0.5

    def resolve(self, N):
        return resolve_bandwidth(self, N)


def resolve_bandwidth(schedule, N):
    if N < 2:
        raise ValueError(f"bandwidth needs N >= 2, got {N}")
    if schedule.kind == "PowerLaw":
        # round first so that exact powers (100**0.5) are not bumped up by float noise
        raw = math.ceil(round(N**schedule.param, 9))
    elif schedule.kind == "Logarithmic":
        raw = math.ceil(round(schedule.param * math.log(N), 9))
    else:
        raw = int(schedule.param)
    return min(max(raw, 1), N - 1)


@dataclass(frozen=True)
class EnsembleSpec:
    N: int
    m: int = 1
    bandwidth: BandwidthSchedule = field(default_factory=BandwidthSchedule)
    symmetry_class: str = "TransposeCoupled"
    distribution: str = "Rademacher"
    seed: int = 0

    def __post_init__(self):
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if isinstance(self.bandwidth, dict):
            object.__setattr__(self, "bandwidth", BandwidthSchedule(**self.bandwidth))
        elif isinstance(self.bandwidth, int):
            object.__setattr__(self, "bandwidth", BandwidthSchedule("Fixed", self.bandwidth))
        object.__setattr__(
            self, "symmetry_class", _canonical(self.symmetry_class, SYMMETRY_CLASSES, "symmetry class")
        )
        object.__setattr__(
            self, "distribution", _canonical(self.distribution, DISTRIBUTIONS, "distribution")
        )

    @property
    def b(self):
        """Resolved bandwidth; ``N = 1`` has no off-diagonal blocks."""
        return 0 if self.N == 1 else resolve_bandwidth(self.bandwidth, self.N)

    @property
    def size(self):
        return self.m * self.N

    @property
    def half_bandwidth(self):
        return min(self.m * self.b + self.m - 1, self.size - 1)

    def replace(self, **changes):
        data = self.to_dict()
        data.update(changes)
        return EnsembleSpec.from_dict(data)

    def to_dict(self):
        d = asdict(self)
        d["bandwidth"] = {"kind": self.bandwidth.kind, "param": self.bandwidth.param}
        return d

    @classmethod
    def from_dict(cls, data):
        try:
            bw = data["bandwidth"]
            if isinstance(bw, dict):
                bw = BandwidthSchedule(bw["kind"], bw["param"])
            return cls(
                N=int(data["N"]),
                m=int(data.get("m", 1)),
                bandwidth=bw,
                symmetry_class=data.get("symmetry_class", "TransposeCoupled"),
                distribution=data.get("distribution", "Rademacher"),
                seed=int(data.get("seed", 0)),
            )
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed ensemble spec: {exc!r}") from exc

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
        return cls.from_dict(data)

    def fingerprint(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


# -- randomness -------------------------------------------------------------------


def derive_seed(*keys):
    """Deterministic 64-bit seed from integer or string keys."""
    words = []
    for key in keys:
        if isinstance(key, str):
            key = int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "little")
        words.append(int(key))
    state = np.random.SeedSequence(words).generate_state(2, np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


def block_stream(seed, s):
    """Philox generator dedicated to block ``A_s`` of the ensemble with ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(s,))))


def draw_entries(rng, distribution, shape):
    if distribution == "Gaussian":
        return rng.standard_normal(shape)
    if distribution == "Rademacher":
        return 2.0 * rng.integers(0, 2, size=shape) - 1.0
    if distribution == "UniformScaled":
        return rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), size=shape)
    raise ValueError(f"unknown distribution {distribution!r}")


def _symmetrize(raw):
    upper = np.triu(raw)
    return upper + np.triu(raw, 1).T


def sample_block_family(spec, seed=None):
    """Blocks ``A_0 .. A_b`` (the nonnegative offsets) as a list of ``m x m`` arrays."""
    seed = spec.seed if seed is None else seed
    m = spec.m
    blocks = []
    for s in range(spec.b + 1):
        raw = draw_entries(block_stream(seed, s), spec.distribution, (m, m))
        if spec.symmetry_class == "SymmetricBlocks":
            blk = _symmetrize(raw)
            blk[np.diag_indices(m)] *= math.sqrt(2.0)
        elif s == 0:
            blk = _symmetrize(raw)
        else:
            blk = raw
        blocks.append(blk)
    return blocks


def entry_distribution_moments(distribution, k, absolute=False):
    """Exact ``E[a**k]`` (or ``E[|a|**k]``) of a unit-variance entry law.

    Gaussian absolute odd moments are irrational and come back as floats;
    everything else is an exact :class:`Fraction`.
    """
    distribution = _canonical(distribution, DISTRIBUTIONS, "distribution")
    if not 0 <= k <= 8:
        raise ValueError(f"moment order must lie in [0, 8], got {k}")
    if k % 2 and not absolute:
        return Fraction(0)
    if distribution == "Rademacher":
        return Fraction(1)
    if distribution == "Gaussian":
        if k % 2 == 0:
            return Fraction(math.prod(range(k - 1, 0, -2)))
        return 2 ** (k / 2) * math.gamma((k + 1) / 2) / math.sqrt(math.pi)
    if k % 2 == 0:
        return Fraction(3 ** (k // 2), k + 1)
    return 3 ** (k / 2) / (k + 1)


# -- assembly ---------------------------------------------------------------------


def normalization_scale(spec, normalization):
    normalization = _canonical(normalization, NORMALIZATIONS, "normalization")
    if normalization == "Raw" or spec.b == 0:
        return 1.0
    if normalization == "GueScaled":
        return 1.0 / math.sqrt(2 * spec.m * spec.b)
    return 1.0 / math.sqrt(2 * spec.b)


@dataclass(frozen=True, eq=False)
class BlockToeplitzMatrix:
    """Symmetric ``mN x mN`` band matrix in LAPACK lower band layout.

    ``band[d, q] = T[q + d, q]`` for ``0 <= d <= half_bandwidth``; slots with
    ``q + d >= mN`` are zero.
    """

    spec: EnsembleSpec
    band: np.ndarray
    normalization: str
    scale: float

    @property
    def size(self):
        return self.spec.size

    @property
    def half_bandwidth(self):
        return self.band.shape[0] - 1

    def entry(self, p, q):
        if p < q:
            p, q = q, p
        d = p - q
        return float(self.band[d, q]) if d <= self.half_bandwidth else 0.0

    def dense(self):
        n, h = self.size, self.half_bandwidth
        out = np.zeros((n, n))
        for d in range(h + 1):
            vals = self.band[d, : n - d]
            idx = np.arange(n - d)
            out[idx + d, idx] = vals
            out[idx, idx + d] = vals
        return out

    def trace(self):
        return float(np.sum(self.band[0]))

    def frobenius2(self):
        return float(np.sum(self.band[0] ** 2) + 2.0 * np.sum(self.band[1:] ** 2))

    def triplets(self):
        """``(row, col, value)`` for every stored lower-band slot, column-major."""
        n = self.size
        for q in range(n):
            for d in range(min(self.half_bandwidth, n - 1 - q) + 1):
                yield q + d, q, float(self.band[d, q])

    def write_triplets(self, fh):
        fh.write("row,col,value\n")
        for p, q, v in self.triplets():
            fh.write(f"{p},{q},{v!r}\n")


def build_matrix(spec, normalization="GueScaled", memory_cap=MEMORY_CAP, blocks=None):
    """Assemble the scaled band matrix for ``spec``."""
    normalization = _canonical(normalization, NORMALIZATIONS, "normalization")
    n, m, b = spec.size, spec.m, spec.b
    h = spec.half_bandwidth
    nbytes = 8 * (h + 1) * n
    if nbytes > memory_cap:
        raise MemoryBudgetError(
            f"band storage needs {nbytes} bytes, cap is {memory_cap} (N={spec.N}, m={m}, b={b})"
        )
    if blocks is None:
        blocks = sample_block_family(spec)
    band = np.zeros((h + 1, n))
    for s, blk in enumerate(blocks):
        count = spec.N - s
        for r in range(m):
            for c in range(m):
                d = s * m + r - c
                if d < 0:
                    continue
                band[d, c : count * m : m] = blk[r, c]
    scale = normalization_scale(spec, normalization)
    if scale != 1.0:
        band *= scale
    band.setflags(write=False)
    return BlockToeplitzMatrix(spec, band, normalization, scale)
