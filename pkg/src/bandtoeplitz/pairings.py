"""Pair partitions and the exact GUE/GOE moment formulas.

Positions are 1-based in the public objects (``PairPartition.pairs``,
``build_f_map``) and 0-based in the cached numpy tables.  All moment
values are returned as :class:`fractions.Fraction` so comparisons against
independent oracles are exact.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import SizeLimitError

MAX_PAIRING_K = 8
MAX_MIXED_LETTERS = 12
MAX_GOE_FAST_K = 7
MAX_BRUTE_WORK = 10**8


def double_factorial(n):
    return math.prod(range(n, 0, -2)) if n > 0 else 1


def catalan(k):
    return math.comb(2 * k, k) // (k + 1)


@dataclass(frozen=True)
class PairPartition:
    """A Wick coupling of ``[2k]``: pairs ``(a_i, b_i)`` with ``a_1 < ... < a_k``, ``a_i < b_i``."""

    pairs: tuple

    def __post_init__(self):
        pairs = tuple((int(a), int(b)) for a, b in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        k = len(pairs)
        if k < 1:
            raise ValueError("a pair partition needs at least one pair")
        flat = sorted(x for p in pairs for x in p)
        if flat != list(range(1, 2 * k + 1)):
            raise ValueError(f"pairs {pairs} do not partition [1, {2 * k}]")
        if any(a >= b for a, b in pairs) or any(
            pairs[i][0] >= pairs[i + 1][0] for i in range(k - 1)
        ):
            raise ValueError(f"pairs {pairs} are not in canonical Wick order")

    @classmethod
    def from_pairs(cls, pairs):
        """Build from unordered pairs, canonicalizing the order."""
        return cls(tuple(sorted(tuple(sorted(p)) for p in pairs)))

    @property
    def k(self):
        return len(self.pairs)

    def partner(self):
        """1-based involution as a dict ``x -> pi(x)``."""
        out = {}
        for a, b in self.pairs:
            out[a], out[b] = b, a
        return out

    def is_noncrossing(self):
        return not any(
            a1 < a2 < b1 < b2 or a2 < a1 < b2 < b1
            for i, (a1, b1) in enumerate(self.pairs)
            for a2, b2 in self.pairs[i + 1 :]
        )

    def __str__(self):
        return "{" + ",".join(f"{{{a},{b}}}" for a, b in self.pairs) + "}"


def _check_k(k, cap=MAX_PAIRING_K):
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    if k > cap:
        raise SizeLimitError(f"k={k} exceeds the enumeration cap {cap}")


@lru_cache(maxsize=None)
def pairing_table(k):
    """All canonical pairings of ``[2k]`` as an int array of shape ``(M, k, 2)``.

    Rows are 0-based and sorted lexicographically by ``(a_1, b_1, a_2, ...)``;
    ``M = (2k-1)!!``.
    """
    _check_k(k)
    dtype = np.int8
    pairs = np.zeros((1, 0, 2), dtype=dtype)
    rem = np.arange(2 * k, dtype=dtype)[None, :]
    while rem.shape[1]:
        r = rem.shape[1]
        keep = np.array([[j for j in range(1, r) if j != c] for c in range(1, r)], dtype=np.intp)
        keep = keep.reshape(r - 1, r - 2)
        first = np.repeat(rem[:, :1], r - 1, axis=1)
        new = np.stack([first, rem[:, 1:]], axis=-1)
        pairs = np.concatenate(
            [np.repeat(pairs[:, None], r - 1, axis=1), new[:, :, None, :]], axis=2
        ).reshape(-1, pairs.shape[1] + 1, 2)
        rem = rem[:, keep].reshape(rem.shape[0] * (r - 1), r - 2)
    pairs.setflags(write=False)
    return pairs


@lru_cache(maxsize=None)
def partner_table(k):
    """``(M, 2k)`` array with ``partner[row, x]`` the 0-based mate of ``x``."""
    pairs = pairing_table(k)
    m_rows = pairs.shape[0]
    out = np.empty((m_rows, 2 * k), dtype=np.int8)
    rows = np.arange(m_rows)[:, None]
    out[rows, pairs[:, :, 0]] = pairs[:, :, 1]
    out[rows, pairs[:, :, 1]] = pairs[:, :, 0]
    out.setflags(write=False)
    return out


def enumerate_pair_partitions(k):
    """Yield every pair partition of ``[2k]`` in lexicographic order."""
    for row in pairing_table(k):
        yield PairPartition(tuple((int(a) + 1, int(b) + 1) for a, b in row))


def count_cycles(perm):
    """Number of cycles of each row permutation in an ``(M, n)`` array."""
    perm = np.asarray(perm, dtype=np.intp)
    n = perm.shape[-1]
    label = np.broadcast_to(np.arange(n), perm.shape).copy()
    step = perm.copy()
    reach = 1
    while reach < n:
        label = np.minimum(label, np.take_along_axis(label, step, axis=-1))
        step = np.take_along_axis(step, step, axis=-1)
        reach *= 2
    label = np.minimum(label, np.take_along_axis(label, step, axis=-1))
    return np.count_nonzero(label == np.arange(n), axis=-1)


def _compose_gamma_pi(partner, gamma_first):
    n = partner.shape[-1]
    gamma = (np.arange(n) + 1) % n
    if gamma_first:
        # pi o gamma: apply gamma, then pi
        return np.take_along_axis(partner, np.broadcast_to(gamma, partner.shape), axis=-1)
    return gamma[partner]


def _validate_composition_order():
    """Pick the order for ``gamma_0 o pi`` that gives ``g = k + 1`` on non-crossing pairings."""
    for gamma_first in (False, True):
        ok = True
        for k in range(1, 5):
            g = count_cycles(_compose_gamma_pi(partner_table(k), gamma_first))
            for row, pi in enumerate(enumerate_pair_partitions(k)):
                if pi.is_noncrossing() and g[row] != k + 1:
                    ok = False
        if ok:
            return gamma_first
    raise RuntimeError("no composition order normalizes non-crossing pairings")


GAMMA_FIRST = _validate_composition_order()


@lru_cache(maxsize=None)
def orbit_counts(k):
    """``g(pi)`` for every row of :func:`pairing_table`."""
    g = count_cycles(_compose_gamma_pi(partner_table(k), GAMMA_FIRST)).astype(np.int8)
    g.setflags(write=False)
    return g


def orbit_count(pi):
    """Number of orbits of ``gamma_0 o pi`` with ``gamma_0 = (1 2 ... 2k)``."""
    n = 2 * pi.k
    mate = pi.partner()
    if GAMMA_FIRST:
        step = {x: mate[x % n + 1] for x in range(1, n + 1)}
    else:
        step = {x: mate[x] % n + 1 for x in range(1, n + 1)}
    seen, cycles = set(), 0
    for start in range(1, n + 1):
        if start in seen:
            continue
        cycles += 1
        x = start
        while x not in seen:
            seen.add(x)
            x = step[x]
    return cycles


@lru_cache(maxsize=None)
def genus_profile(k):
    """``{g: number of pairings with g(pi) = g}`` for pairings of ``[2k]``."""
    return dict(sorted(Counter(orbit_counts(k).tolist()).items()))


def _as_fraction_power(m, e):
    return Fraction(m) ** e


def gue_moment(m, n):
    """Exact ``n``-th moment of the GUE density ``f_m``.

    ``sum_{pi in P2(n)} m**(g(pi) - n/2 - 1)``; zero for odd ``n``.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if n % 2:
        return Fraction(0)
    k = n // 2
    if k == 0:
        return Fraction(1)
    _check_k(k)
    return sum(
        (c * _as_fraction_power(m, g - k - 1) for g, c in genus_profile(k).items()),
        Fraction(0),
    )


def catalan_limit_check(n):
    """Count of pairings of ``[n]`` with ``g(pi) = n/2 + 1`` (the non-crossing ones)."""
    if n % 2:
        raise ValueError(f"n must be even, got {n}")
    k = n // 2
    if k == 0:
        return 1
    return int(np.count_nonzero(orbit_counts(k) == k + 1))


# -- mixed traces ---------------------------------------------------------------


@dataclass(frozen=True)
class TraceWord:
    """Exponents ``(nu_1, ..., nu_r)`` of ``prod_i (tr H**i)**nu_i``."""

    exponents: tuple

    def __post_init__(self):
        exps = tuple(int(v) for v in self.exponents)
        if any(v < 0 for v in exps):
            raise ValueError(f"exponents must be nonnegative: {exps}")
        object.__setattr__(self, "exponents", exps)

    @classmethod
    def parse(cls, text):
        return cls(tuple(int(tok) for tok in str(text).split(",") if tok.strip()))

    @property
    def total(self):
        """Number of trace factors ``nu``."""
        return sum(self.exponents)

    @property
    def letters(self):
        """Letter count ``L = sum_i i * nu_i``."""
        return sum((i + 1) * v for i, v in enumerate(self.exponents))

    def __str__(self):
        return ",".join(map(str, self.exponents))


def build_f_map(word):
    """Successor map ``f`` on ``[L]`` (1-based dict).

    ``x`` closing a block of length ``s+1`` (``x = sum_{i<=s} i nu_i + (s+1) a``)
    maps back to the first position of that block; every other ``x`` maps to
    ``x + 1``.
    """
    nu = (0,) + word.exponents
    L = word.letters
    if L < 1:
        raise ValueError("trace word has no letters")
    f = {}
    for x in range(1, L + 1):
        image = x + 1
        offset = 0
        for s in range(len(nu) - 1):
            offset += s * nu[s]
            q, rem = divmod(x - offset, s + 1)
            if rem == 0 and 1 <= q <= nu[s + 1]:
                image = offset + (s + 1) * (q - 1) + 1
                break
        f[x] = image
    if sorted(f.values()) != list(range(1, L + 1)):
        raise AssertionError(f"f-map for {word} is not a bijection")
    return f


def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def _classes(n, edges):
    parent = list(range(n))
    for u, v in edges:
        ru, rv = _find(parent, u), _find(parent, v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    return sum(1 for x in range(n) if _find(parent, x) == x)


def free_index_count(pi, word, f=None):
    """``F(pi)``: equivalence classes of ``t_{a_i} = t_{f(b_i)}``, ``t_{b_i} = t_{f(a_i)}``."""
    L = word.letters
    if 2 * pi.k != L:
        raise ValueError(f"pairing of [{2 * pi.k}] does not match word with {L} letters")
    f = f or build_f_map(word)
    edges = []
    for a, b in pi.pairs:
        edges.append((a - 1, f[b] - 1))
        edges.append((b - 1, f[a] - 1))
    return _classes(L, edges)


@lru_cache(maxsize=None)
def mixed_trace_polynomial(word):
    """``{F: count}`` over all pairings of ``[L]``; empty for odd ``L``."""
    L = word.letters
    if L > MAX_MIXED_LETTERS:
        raise SizeLimitError(f"word {word} has {L} letters, cap is {MAX_MIXED_LETTERS}")
    if L % 2:
        return {}
    if L == 0:
        return {0: 1}
    f = build_f_map(word)
    counts = Counter(free_index_count(pi, word, f) for pi in enumerate_pair_partitions(L // 2))
    return dict(sorted(counts.items()))


def mixed_trace_gue(m, word):
    """Exact ``<prod_i (tr H**i)**nu_i>_GUE`` as ``sum_pi m**F(pi)``."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    return sum(c * m**e for e, c in mixed_trace_polynomial(word).items())


# -- GOE -------------------------------------------------------------------------


def _goe_brute_sum(m, k):
    n = 2 * k
    total = 0
    idx = np.arange(n)
    nxt = (idx + 1) % n
    chunk = max(1, 2**20 // n)
    space = m**n
    for pairs in pairing_table(k):
        a, b = pairs[:, 0].astype(np.intp), pairs[:, 1].astype(np.intp)
        for start in range(0, space, chunk):
            codes = np.arange(start, min(space, start + chunk), dtype=np.int64)
            t = (codes[:, None] // (m ** idx[::-1])[None, :]) % m
            ta, tb, ta1, tb1 = t[:, a], t[:, b], t[:, nxt[a]], t[:, nxt[b]]
            straight = (ta == tb) & (ta1 == tb1)
            twisted = (ta == tb1) & (tb == ta1)
            admissible = np.all(straight | twisted, axis=1)
            r = np.sum(straight & twisted, axis=1)
            total += int(np.sum(np.left_shift(1, r[admissible])))
    return total


def _label_classes(n_vars, edges):
    """Vectorized class count; ``edges`` has shape ``(M, E, 2)``."""
    rows = edges.shape[0]
    label = np.broadcast_to(np.arange(n_vars), (rows, n_vars)).copy()
    u, v = edges[..., 0], edges[..., 1]
    while True:
        lu = np.take_along_axis(label, u, axis=1)
        lv = np.take_along_axis(label, v, axis=1)
        low = np.minimum(lu, lv)
        new = label.copy()
        np.minimum.at(new, (np.arange(rows)[:, None], u), low)
        np.minimum.at(new, (np.arange(rows)[:, None], v), low)
        new = np.minimum(new, np.take_along_axis(new, new, axis=1))
        if np.array_equal(new, label):
            break
        label = new
    return np.count_nonzero(label == np.arange(n_vars), axis=1)


@lru_cache(maxsize=None)
def goe_moment_polynomial(k):
    """``{e: c}`` with ``sum_pi sum_{t in A(pi)} 2**r(pi,t) = sum_e c * m**e``.

    Uses ``[S or T] * 2**[S and T] = [S] + [T]`` per pair, so the weighted
    count over ``A(pi)`` splits into the ``2**k`` straight/twisted choices,
    each counted with ``m**classes``.
    """
    if k > MAX_GOE_FAST_K:
        raise SizeLimitError(f"k={k} exceeds the GOE fast-path cap {MAX_GOE_FAST_K}")
    if k == 0:
        return {0: 1}
    n = 2 * k
    pairs = pairing_table(k).astype(np.intp)
    a, b = pairs[:, :, 0], pairs[:, :, 1]
    a1, b1 = (a + 1) % n, (b + 1) % n
    counts = Counter()
    for mask in range(2**k):
        twist = np.array([(mask >> i) & 1 for i in range(k)], dtype=bool)[None, :]
        e1 = np.stack([a, np.where(twist, b1, b)], axis=-1)
        e2 = np.stack([np.where(twist, b, a1), np.where(twist, a1, b1)], axis=-1)
        classes = _label_classes(n, np.concatenate([e1, e2], axis=1))
        counts.update(classes.tolist())
    return dict(sorted(counts.items()))


def goe_moment(m, n, method="auto"):
    """Exact ``n``-th moment of ``(1/m) tr (H/sqrt(m))**n`` under GOE.

    ``method`` is ``"fast"`` (orientation expansion), ``"brute"`` (direct
    enumeration of ``t in [m]**n``) or ``"auto"``.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if n % 2:
        return Fraction(0)
    k = n // 2
    if k == 0:
        return Fraction(1)
    _check_k(k)
    brute_ok = m**n <= MAX_BRUTE_WORK
    if method == "auto":
        method = "fast" if k <= MAX_GOE_FAST_K else "brute"
    if method == "fast":
        total = sum(c * m**e for e, c in goe_moment_polynomial(k).items())
    elif method == "brute":
        if not brute_ok:
            raise SizeLimitError(f"m**n = {m**n} exceeds the brute-force cap {MAX_BRUTE_WORK}")
        total = _goe_brute_sum(m, k)
    else:
        raise ValueError(f"unknown method {method!r}")
    return Fraction(total, m ** (k + 1))
