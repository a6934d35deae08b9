"""Hermite functions and the limiting spectral densities.

Conventions
-----------
``hermite`` is the probabilists' polynomial ``He_j`` (``He_2(x) = x**2 - 1``).
``wave_function`` is the oscillator function

    psi_j(x) = exp(-x**2 / 4) He_j(x) / sqrt(sqrt(2 pi) j!)

which is orthonormal in L2(R, dx).  The two limiting densities are

    f_m(x) = m**-0.5 * sum_{j<m} psi_j(sqrt(m) x)**2                 (GUE)
    g_m(x) = f_m(x)
             + sqrt(m/2) psi_{m-1}(sqrt(m) x) int eps(x-t) psi_m(sqrt(m) t) dt
             + alpha_m(x)                                          (GOE)

with ``eps(x) = sign(x) / 2`` and ``alpha_m`` nonzero only for odd ``m``.
The GOE expression is evaluated exactly as written, constants included;
use :func:`bandtoeplitz.harness.goe_formula_check` to compare its moments
against the exact combinatorial values.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import DegreeLimitError, QuadratureError

MAX_DEGREE = 200
MAX_BLOCK_ORDER = 64
MAX_MOMENT = 16

#: half-width of the integration window; exp(-16**2/4) ~ 1.6e-28
DEFAULT_RADIUS = 16.0
DEFAULT_NODES = 2048
GL_ORDER = 32
CDF_GRID_POINTS = 4001

ENSEMBLES = ("GUE", "GOE")


def _check_degree(j):
    if j < 0:
        raise ValueError(f"degree must be nonnegative, got {j}")
    if j > MAX_DEGREE:
        raise DegreeLimitError(f"degree {j} exceeds the cap {MAX_DEGREE}")


def _check_block_order(m):
    if m < 1:
        raise ValueError(f"block order must be >= 1, got {m}")
    if m > MAX_BLOCK_ORDER:
        raise DegreeLimitError(f"block order {m} exceeds the cap {MAX_BLOCK_ORDER}")


def hermite(j, x):
    """Probabilists' Hermite polynomial ``He_j(x)`` by three-term recurrence."""
    _check_degree(j)
    x = np.asarray(x, dtype=float)
    prev, cur = np.zeros_like(x), np.ones_like(x)
    for n in range(j):
        prev, cur = cur, x * cur - n * prev
    return cur if cur.ndim else float(cur)


def wave_functions(max_degree, x):
    """Evaluate ``psi_0 .. psi_max_degree`` at ``x``.

    Returns an array of shape ``(max_degree + 1,) + np.shape(x)``.  The
    recurrence runs on normalized values,

        psi_{j+1} = x / sqrt(j+1) * psi_j - sqrt(j / (j+1)) * psi_{j-1},

    so nothing passes through ``j!`` or raw ``He_j``.
    """
    _check_degree(max_degree)
    x = np.asarray(x, dtype=float)
    out = np.empty((max_degree + 1,) + x.shape)
    out[0] = np.exp(-0.25 * x * x) / (2.0 * np.pi) ** 0.25
    if max_degree >= 1:
        out[1] = x * out[0]
    for j in range(1, max_degree):
        out[j + 1] = x / math.sqrt(j + 1) * out[j] - math.sqrt(j / (j + 1)) * out[j - 1]
    return out


def wave_function(j, x):
    """Oscillator wave function ``psi_j(x)``."""
    val = wave_functions(j, x)[j]
    return val if val.ndim else float(val)


class WaveFunctionTable:
    """Callable bundle of ``psi_0 .. psi_max_degree``."""

    def __init__(self, max_degree):
        _check_degree(max_degree)
        self.max_degree = max_degree

    def __call__(self, x):
        return wave_functions(self.max_degree, x)

    def __repr__(self):
        return f"WaveFunctionTable(max_degree={self.max_degree})"


# -- quadrature ---------------------------------------------------------------


@lru_cache(maxsize=None)
def _gl_rule(order):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre_panels(lo, hi, panels, order=GL_ORDER):
    """Nodes and weights of a composite Gauss-Legendre rule on ``[lo, hi]``."""
    t, w = _gl_rule(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def integrate(func, lo, hi, nodes=DEFAULT_NODES, rtol=1e-11, atol=1e-13):
    """Integrate ``func`` on ``[lo, hi]`` with composite Gauss-Legendre panels.

    The rule is applied at ``nodes`` and ``2 * nodes`` points; the difference
    is the residual.  Raises :class:`QuadratureError` when it exceeds
    ``atol + rtol * |value|``.
    """
    panels = max(1, nodes // GL_ORDER)
    x1, w1 = gauss_legendre_panels(lo, hi, panels)
    x2, w2 = gauss_legendre_panels(lo, hi, 2 * panels)
    coarse = float(np.dot(w1, func(x1)))
    fine = float(np.dot(w2, func(x2)))
    residual = abs(fine - coarse)
    if not residual <= atol + rtol * abs(fine):
        raise QuadratureError(
            f"quadrature on [{lo}, {hi}] did not converge (residual {residual:.3e})",
            residual=residual,
        )
    return fine


def _cumulative_integral(func, points, lo, width=0.125, order=16):
    """``int_lo^p func`` for every entry ``p`` of ``points`` (any order).

    Consecutive sorted points are joined by Gauss-Legendre subpanels of width
    at most ``width``, then summed cumulatively.
    """
    points = np.asarray(points, dtype=float)
    flat = points.ravel()
    order_idx = np.argsort(flat, kind="stable")
    knots = np.concatenate(([lo], np.maximum(flat[order_idx], lo)))
    gaps = np.diff(knots)
    nsub = np.maximum(1, np.ceil(gaps / width).astype(int))
    t, w = _gl_rule(order)
    total_sub = int(nsub.sum())
    owner = np.repeat(np.arange(gaps.size), nsub)
    first = np.cumsum(nsub) - nsub
    local = np.arange(total_sub) - np.repeat(first, nsub)
    sub_w = gaps[owner] / nsub[owner]
    sub_lo = knots[owner] + local * sub_w
    xs = (sub_lo + 0.5 * sub_w)[:, None] + 0.5 * sub_w[:, None] * t[None, :]
    vals = func(xs.ravel()).reshape(xs.shape)
    sub_int = 0.5 * sub_w * (vals @ w)
    piece = np.bincount(owner, weights=sub_int, minlength=gaps.size)
    cum = np.cumsum(piece)
    out = np.empty_like(flat)
    out[order_idx] = cum
    return out.reshape(points.shape)


# -- densities ----------------------------------------------------------------


def gue_density(m, x):
    """GUE one-point density ``f_m`` at ``x`` (unit second moment)."""
    _check_block_order(m)
    x = np.asarray(x, dtype=float)
    psi = wave_functions(m - 1, math.sqrt(m) * x)
    val = np.sum(psi * psi, axis=0) / math.sqrt(m)
    return val if val.ndim else float(val)


def sign_kernel(x):
    """``eps(x) = sign(x) / 2`` with ``eps(0) = 0``."""
    return 0.5 * np.sign(x)


def _psi_scaled(j, m):
    root = math.sqrt(m)

    def f(t):
        return wave_functions(j, root * np.asarray(t))[j]

    return f


def eps_integral(m, x, radius=DEFAULT_RADIUS, tol=1e-10):
    """``int eps(x - t) psi_m(sqrt(m) t) dt`` on the window ``|t| <= radius``.

    Evaluated as ``(1/2) [int_{-R}^x - int_x^R]`` with the cumulative sums
    done twice at different panel widths; a disagreement above ``tol``
    raises :class:`QuadratureError`.
    """
    _check_block_order(m)
    integrand = _psi_scaled(m, m)
    x = np.clip(np.asarray(x, dtype=float), -radius, radius)
    probe = np.concatenate((x.ravel(), [radius]))
    coarse = _cumulative_integral(integrand, probe, -radius, width=0.25)
    fine = _cumulative_integral(integrand, probe, -radius, width=0.125)
    residual = float(np.max(np.abs(fine - coarse)))
    if residual > tol:
        raise QuadratureError(
            f"sign-kernel integral for m={m} did not converge (residual {residual:.3e})",
            residual=residual,
        )
    left, total = fine[:-1], fine[-1]
    val = (left - 0.5 * total).reshape(x.shape)
    return val if val.ndim else float(val)


@lru_cache(maxsize=None)
def _alpha_norm(m, radius):
    s = (m - 1) // 2
    return integrate(_psi_scaled(2 * s, m), -radius, radius)


def alpha_term(m, x, radius=DEFAULT_RADIUS):
    """Odd-order correction ``alpha_m(x)``; identically zero for even ``m``."""
    _check_block_order(m)
    x = np.asarray(x, dtype=float)
    if m % 2 == 0:
        val = np.zeros_like(x)
    else:
        s = (m - 1) // 2
        val = _psi_scaled(2 * s, m)(x) / _alpha_norm(m, radius) / m
    return val if val.ndim else float(val)


def goe_density(m, x, radius=DEFAULT_RADIUS, cross_scale=1.0):
    """GOE expression ``g_m`` at ``x``, all three terms as written.

    ``cross_scale`` multiplies the sign-kernel term.  The default keeps the
    written coefficient ``sqrt(m/2)``; ``1/sqrt(2)`` (coefficient
    ``sqrt(m)/2``) gives unit mass and the exact GOE moments.
    """
    _check_block_order(m)
    x = np.asarray(x, dtype=float)
    root = math.sqrt(m)
    psi = wave_functions(m, root * x)
    diag = np.sum(psi[:m] ** 2, axis=0) / root
    cross = cross_scale * math.sqrt(m / 2.0) * psi[m - 1] * eps_integral(m, x, radius)
    val = diag + cross + alpha_term(m, x, radius)
    return val if val.ndim else float(val)


def _limit_slopes(secant, slope):
    """Fritsch-Carlson limiter: keeps the cubic monotone wherever the data are."""
    slope = slope.copy()
    flat = secant == 0.0
    slope[:-1][flat] = 0.0
    slope[1:][flat] = 0.0
    safe = np.where(flat, 1.0, secant)
    a = slope[:-1] / safe
    b = slope[1:] / safe
    # opposite-sign slopes would overshoot; clamp them to zero
    slope[:-1][~flat & (a < 0)] = 0.0
    slope[1:][~flat & (b < 0)] = 0.0
    a = np.maximum(a, 0.0)
    b = np.maximum(b, 0.0)
    r = np.hypot(a, b)
    over = ~flat & (r > 3.0)
    tau = np.where(over, 3.0 / np.where(over, r, 1.0), 1.0)
    slope[:-1][over] = tau[over] * a[over] * secant[over]
    slope[1:][over] = tau[over] * b[over] * secant[over]
    return slope


@dataclass(frozen=True)
class DensityModel:
    """Evaluatable limiting density for block order ``m``.

    ``pdf`` is exact pointwise evaluation; ``cdf`` reads a cached cumulative
    grid of ``grid_points`` uniform points on ``[-radius, radius]`` with
    monotone cubic Hermite interpolation (slopes from ``pdf``).  Instances are immutable and safe to share.
    """

    m: int
    ensemble: str = "GUE"
    nodes: int = DEFAULT_NODES
    radius: float = DEFAULT_RADIUS
    grid_points: int = CDF_GRID_POINTS
    cross_scale: float = 1.0

    def __post_init__(self):
        _check_block_order(self.m)
        ens = self.ensemble.upper()
        if ens not in ENSEMBLES:
            raise ValueError(f"unknown ensemble {self.ensemble!r}")
        object.__setattr__(self, "ensemble", ens)

    def pdf(self, x):
        if self.ensemble == "GUE":
            return gue_density(self.m, x)
        return goe_density(self.m, x, self.radius, self.cross_scale)

    @cached_property
    def _cdf_grid(self):
        grid = np.linspace(-self.radius, self.radius, self.grid_points)
        cum = _cumulative_integral(self.pdf, grid, -self.radius, width=grid[1] - grid[0], order=8)
        slope = _limit_slopes(np.diff(cum) / np.diff(grid), np.asarray(self.pdf(grid), dtype=float))
        for arr in (grid, cum, slope):
            arr.setflags(write=False)
        return grid, cum, slope

    def cdf(self, x):
        """Piecewise cubic Hermite in the cached grid, slopes from ``pdf``."""
        grid, cum, slope = self._cdf_grid
        x = np.asarray(x, dtype=float)
        i = np.clip(np.searchsorted(grid, x, side="right") - 1, 0, grid.size - 2)
        h = grid[i + 1] - grid[i]
        t = (x - grid[i]) / h
        t2, t3 = t * t, t * t * t
        lo, hi = cum[i], cum[i + 1]
        # increment form, summed before the single rounding against lo
        inc = (3 * t2 - 2 * t3) * (hi - lo) + h * ((t3 - 2 * t2 + t) * slope[i] + (t3 - t2) * slope[i + 1])
        val = np.atleast_1d(lo + inc)
        val = np.clip(val, np.minimum(lo, hi), np.maximum(lo, hi))
        val[val < 1e-290] = 0.0
        val = np.where(x < grid[0], 0.0, np.where(x > grid[-1], cum[-1], val.reshape(x.shape)))
        return val if val.ndim else float(val)

    @property
    def total_mass(self):
        return float(self._cdf_grid[1][-1])

    def moment(self, k):
        return density_moment(self, k)

    def grid(self, lo, hi, n):
        x = np.linspace(lo, hi, n)
        return x, np.asarray(self.pdf(x)), np.asarray(self.cdf(x))


def density_cdf(model, x):
    return model.cdf(x)


def density_moment(model, k):
    """``int x**k pdf(x) dx`` over the model's window, by quadrature."""
    if not 0 <= k <= MAX_MOMENT:
        raise DegreeLimitError(f"moment order {k} outside [0, {MAX_MOMENT}]")
    return integrate(lambda x: x**k * model.pdf(x), -model.radius, model.radius, model.nodes)


def write_density_csv(path_or_file, x, pdf, cdf, header=None):
    """Dump a density grid with columns ``x, pdf, cdf``."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        for line in header or ():
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "pdf", "cdf"])
        for row in zip(x, pdf, cdf):
            writer.writerow([repr(float(v)) for v in row])
    finally:
        if own:
            fh.close()
