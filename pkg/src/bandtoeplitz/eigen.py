"""Eigenvalues of real symmetric matrices, dense or band-stored.

Both paths reduce to tridiagonal form and finish with the same implicit QL
iteration (Wilkinson shift).  The dense path uses Householder reflections;
the band path chases Givens bulges down a lower band store, one diagonal at
a time, so its working memory stays ``O(n * h)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import SolverError

log = logging.getLogger(__name__)

EPS = np.finfo(float).eps
SWEEPS_PER_ROW = 30


@njit(cache=True)
def _householder_tridiagonal(a):
    n = a.shape[0]
    d = np.empty(n)
    e = np.zeros(n)
    v = np.empty(n)
    p = np.empty(n)
    for k in range(n - 2):
        m = n - k - 1
        norm2 = 0.0
        for i in range(m):
            v[i] = a[k + 1 + i, k]
            norm2 += v[i] * v[i]
        alpha = math.sqrt(norm2)
        if alpha == 0.0:
            e[k] = 0.0
            continue
        if v[0] > 0.0:
            alpha = -alpha
        v[0] -= alpha
        vv = 0.0
        for i in range(m):
            vv += v[i] * v[i]
        beta = 2.0 / vv
        kdot = 0.0
        for i in range(m):
            acc = 0.0
            for j in range(m):
                acc += a[k + 1 + i, k + 1 + j] * v[j]
            p[i] = beta * acc
            kdot += v[i] * p[i]
        kdot *= 0.5 * beta
        for i in range(m):
            p[i] -= kdot * v[i]
        for i in range(m):
            for j in range(m):
                a[k + 1 + i, k + 1 + j] -= v[i] * p[j] + p[i] * v[j]
        e[k] = alpha
    for i in range(n):
        d[i] = a[i, i]
    if n >= 2:
        e[n - 2] = a[n - 1, n - 2]
    return d, e


@njit(cache=True)
def _bget(w, i, j):
    if i < j:
        i, j = j, i
    dist = i - j
    if dist >= w.shape[0]:
        return 0.0
    return w[dist, j]


@njit(cache=True)
def _bset(w, i, j, val):
    if i < j:
        i, j = j, i
    dist = i - j
    if dist < w.shape[0]:
        w[dist, j] = val


@njit(cache=True)
def _band_tridiagonal(band):
    h = band.shape[0] - 1
    n = band.shape[1]
    # one spare diagonal holds the bulge
    w = np.zeros((h + 2, n))
    w[: h + 1, :] = band
    rotations = 0
    for k in range(h, 1, -1):
        for j in range(n - k):
            row = j + k
            col = j
            while row < n:
                bval = _bget(w, row, col)
                if bval == 0.0:
                    break
                p = row - 1
                q = row
                aval = _bget(w, p, col)
                r = math.hypot(aval, bval)
                c = aval / r
                s = bval / r
                lo = max(0, p - k)
                hi = min(n - 1, q + k)
                # window offsets never exceed k + 1 <= h + 1, so no bounds checks
                for t in range(lo, p):
                    x = w[p - t, t]
                    y = w[q - t, t]
                    w[p - t, t] = c * x + s * y
                    w[q - t, t] = c * y - s * x
                for t in range(q + 1, hi + 1):
                    x = w[t - p, p]
                    y = w[t - q, q]
                    w[t - p, p] = c * x + s * y
                    w[t - q, q] = c * y - s * x
                app = w[0, p]
                aqq = w[0, q]
                apq = w[1, p]
                w[0, p] = c * c * app + 2.0 * c * s * apq + s * s * aqq
                w[0, q] = s * s * app - 2.0 * c * s * apq + c * c * aqq
                w[1, p] = c * s * (aqq - app) + (c * c - s * s) * apq
                _bset(w, q, col, 0.0)
                rotations += 1
                col = p
                row = q + k
    d = w[0, :].copy()
    e = np.zeros(n)
    if h >= 1:
        e[: n - 1] = w[1, : n - 1]
    return d, e, rotations


@njit(cache=True)
def _implicit_ql(d, e, max_sweeps):
    """Eigenvalues of the tridiagonal ``(d, e)``; ``e[i]`` couples ``i`` and ``i+1``.

    Returns ``(sweeps, status)``; status 0 on success, 1 on non-convergence.
    """
    n = d.shape[0]
    sweeps = 0
    for l in range(n):
        while True:
            mm = n - 1
            for i in range(l, n - 1):
                if abs(e[i]) <= EPS * (abs(d[i]) + abs(d[i + 1])):
                    mm = i
                    break
            if mm == l:
                break
            sweeps += 1
            if sweeps > max_sweeps:
                return sweeps, 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[mm] - d[l] + e[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            deflated = False
            i = mm - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[mm] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[mm] = 0.0
    return sweeps, 0


def tridiagonal_eigenvalues(d, e, diagnostics=None):
    """Sorted eigenvalues of the symmetric tridiagonal matrix with diagonal ``d``
    and off-diagonal ``e`` (``len(e) >= len(d) - 1``)."""
    d = np.array(d, dtype=float)
    n = d.size
    work_e = np.zeros(n)
    work_e[: n - 1] = np.asarray(e, dtype=float)[: n - 1]
    sweeps, status = _implicit_ql(d, work_e, SWEEPS_PER_ROW * max(n, 1))
    if diagnostics is not None:
        diagnostics["sweeps"] = int(sweeps)
    if status:
        raise SolverError(
            f"implicit QL did not converge within {SWEEPS_PER_ROW * n} sweeps",
            diagnostics={"sweeps": int(sweeps), "n": n},
        )
    return np.sort(d, kind="stable")


def _check_symmetric(a, rtol):
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    asym = float(np.max(np.abs(a - a.T))) if a.size else 0.0
    if asym > rtol * max(scale, np.finfo(float).tiny):
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3e})")


def eigenvalues_dense(a, rtol=1e-12, diagnostics=None):
    """All eigenvalues of a dense symmetric matrix, ascending."""
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    _check_symmetric(a, rtol)
    a = np.ascontiguousarray(0.5 * (a + a.T))
    if a.shape[0] == 0:
        return np.empty(0)
    d, e = _householder_tridiagonal(a)
    return tridiagonal_eigenvalues(d, e, diagnostics)


def eigenvalues_band(band, diagnostics=None):
    """All eigenvalues of a symmetric matrix in lower band storage, ascending.

    ``band[d, j] = A[j + d, j]``; the half-bandwidth is ``band.shape[0] - 1``.
    """
    band = np.ascontiguousarray(band, dtype=float)
    if band.ndim != 2 or band.shape[0] < 1:
        raise ValueError(f"expected a (h+1, n) band array, got shape {band.shape}")
    if band.shape[0] == 1:
        d, e, rotations = band[0].copy(), np.zeros(band.shape[1]), 0
    else:
        d, e, rotations = _band_tridiagonal(band)
    if diagnostics is not None:
        diagnostics["rotations"] = int(rotations)
    return tridiagonal_eigenvalues(d, e, diagnostics)


@dataclass
class SpectralSample:
    """Sorted spectrum of one sampled matrix plus provenance."""

    eigenvalues: np.ndarray
    fingerprint: str = ""
    diagnostics: dict = field(default_factory=dict)

    @property
    def size(self):
        return int(self.eigenvalues.size)


def spectrum(matrix, method="band", check=True):
    """Solve a :class:`~bandtoeplitz.ensemble.BlockToeplitzMatrix`.

    The trace and Frobenius identities are checked on every solve; a
    violation is logged as a warning, never raised.
    """
    diag = {"method": method}
    if method == "band":
        ev = eigenvalues_band(matrix.band, diag)
    elif method == "dense":
        ev = eigenvalues_dense(matrix.dense(), diagnostics=diag)
    else:
        raise ValueError(f"unknown method {method!r}")
    if check:
        n = ev.size
        amax = float(np.max(np.abs(matrix.band))) if matrix.band.size else 0.0
        tr_res = abs(float(np.sum(ev)) - matrix.trace())
        fr_res = abs(float(np.sum(ev * ev)) - matrix.frobenius2())
        diag["trace_residual"] = tr_res
        diag["frobenius_residual"] = fr_res
        if tr_res > 1e-9 * n * amax or fr_res > 1e-9 * n * amax * amax:
            log.warning("spectral identities violated: trace %.3e, frobenius %.3e", tr_res, fr_res)
    return SpectralSample(ev, matrix.spec.fingerprint(), diag)


def _values(sample):
    return sample.eigenvalues if isinstance(sample, SpectralSample) else np.asarray(sample, float)


def empirical_moments(sample, k_max):
    """``[(1/n) sum lambda**k for k in 1..k_max]``."""
    if not 1 <= k_max <= 16:
        raise ValueError(f"k_max must lie in [1, 16], got {k_max}")
    ev = _values(sample)
    if ev.size == 0:
        raise ValueError("empty spectrum")
    powers = np.cumprod(np.broadcast_to(ev, (k_max, ev.size)), axis=0)
    return powers.mean(axis=1)


def ks_distance(sample, model):
    """Two-sided Kolmogorov-Smirnov distance between the spectrum and ``model.cdf``."""
    ev = np.sort(_values(sample), kind="stable")
    n = ev.size
    if n == 0:
        raise ValueError("KS distance needs at least one eigenvalue")
    cdf = np.asarray(model.cdf(ev), dtype=float)
    upper = np.arange(1, n + 1) / n - cdf
    lower = cdf - np.arange(n) / n
    return float(max(upper.max(), lower.max()))
