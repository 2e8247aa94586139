"""Sampling on the sphere and the orthogonal group, and the exact bilinear oracle.

Vectors and matrices are plain ``numpy`` arrays; :func:`is_unit_vector` and
:func:`is_orthogonal` check the invariants the rest of the package relies on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .rng import as_generator

NORM_TOL = 1e-10
ORTH_TOL = 1e-9


class DimensionError(ValueError):
    """Raised for a dimension below 2 or mismatched operand shapes."""


def check_dimension(n) -> int:
    if int(n) != n or n < 2:
        raise DimensionError(f"dimension must be an integer >= 2, got {n!r}")
    return int(n)


def is_unit_vector(v, tol: float = NORM_TOL) -> bool:
    v = np.asarray(v, dtype=float)
    return v.ndim == 1 and v.size >= 2 and abs(np.linalg.norm(v) - 1.0) <= tol


def is_orthogonal(B, tol: float = ORTH_TOL) -> bool:
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        return False
    return float(np.max(np.abs(B.T @ B - np.eye(B.shape[0])))) <= tol


def sample_unit_vectors(n: int, size: int, rng=None) -> np.ndarray:
    """``size`` independent uniform points on S^{n-1}, one per row."""
    n = check_dimension(n)
    g = as_generator(rng).standard_normal((size, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def sample_unit_vector(n: int, rng=None) -> np.ndarray:
    """A uniform point on S^{n-1} (normalized standard Gaussian)."""
    return sample_unit_vectors(n, 1, rng)[0]


def sample_haar_orthogonal(n: int, rng=None) -> np.ndarray:
    """Haar-distributed element of O(n).

    QR-factorizes a Gaussian matrix and flips column signs so that the
    triangular factor has a positive diagonal; without the sign fix the law
    is not Haar.
    """
    n = check_dimension(n)
    z = as_generator(rng).standard_normal((n, n))
    q, r = np.linalg.qr(z)
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d


@dataclass(frozen=True)
class PromiseInstance:
    """Inputs ``(a, B, c)`` with ``a = label * B c`` so that ``a^T B c = label``."""

    a: np.ndarray
    B: np.ndarray
    c: np.ndarray
    label: int

    @property
    def n(self) -> int:
        return self.c.size

    def stream(self) -> np.ndarray:
        """Flat stream order: c, then B row by row, then a."""
        return np.concatenate([self.c, self.B.ravel(), self.a])


def make_promise_instance(n: int, label: int, rng=None) -> PromiseInstance:
    if label not in (-1, 1):
        raise ValueError(f"label must be +1 or -1, got {label!r}")
    gen = as_generator(rng)
    c = sample_unit_vector(n, gen)
    B = sample_haar_orthogonal(n, gen)
    a = label * (B @ c)
    a /= np.linalg.norm(a)
    return PromiseInstance(a=a, B=B, c=c, label=int(label))


def exact_bilinear(a, B, c) -> float:
    """Ground truth ``sum_ij a_i B_ij c_j`` in double precision."""
    a = np.asarray(a, dtype=float)
    B = np.asarray(B, dtype=float)
    c = np.asarray(c, dtype=float)
    if B.ndim != 2 or a.shape != (B.shape[0],) or c.shape != (B.shape[1],):
        raise DimensionError(
            f"shapes do not compose: a{a.shape}, B{B.shape}, c{c.shape}")
    return float(a @ (B @ c))


def sample_on_equator(y, rng=None, size: int | None = None) -> np.ndarray:
    """Uniform point(s) on the great sphere S^{n-1} ∩ y^⊥.

    Returns a vector when ``size`` is None, else a ``(size, n)`` array.
    """
    y = np.asarray(y, dtype=float)
    n = check_dimension(y.size)
    y = y / np.linalg.norm(y)
    g = as_generator(rng).standard_normal((1 if size is None else size, n))
    g -= np.outer(g @ y, y)
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    # one re-projection pass keeps <x, y> at rounding level after normalizing
    g -= np.outer(g @ y, y)
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g[0] if size is None else g


# -- zonal integrals --------------------------------------------------------
#
# For a function of t = <x, v> only, the uniform average over S^{n-1} is a 1-D
# integral with weight (1 - t^2)^{(n-3)/2}.  Substituting t = cos(theta) turns
# the weight into sin(theta)^{n-2}, which is bounded for every n >= 2.

def _theta_log_integral(log_h, n: int, t_lo: float, t_hi: float) -> float:
    th_lo = math.acos(min(1.0, max(-1.0, t_hi)))
    th_hi = math.acos(min(1.0, max(-1.0, t_lo)))
    if th_hi <= th_lo:
        return -math.inf

    def log_integrand(theta):
        theta = np.asarray(theta, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            lw = (n - 2) * np.log(np.sin(theta)) if n > 2 else np.zeros_like(theta)
            return log_h(np.cos(theta)) + lw

    grid = np.linspace(th_lo, th_hi, 4097)
    vals = log_integrand(grid)
    finite = np.isfinite(vals)
    if not finite.any():
        return -math.inf
    peak = int(np.argmax(np.where(finite, vals, -np.inf)))
    shift = float(vals[peak])

    def f(theta):
        v = log_integrand(theta) - shift
        return float(np.exp(v)) if np.isfinite(v) else 0.0

    pts = [grid[peak]] if th_lo < grid[peak] < th_hi else None
    val, _ = integrate.quad(f, th_lo, th_hi, points=pts, epsabs=0.0,
                            epsrel=1e-10, limit=500)
    if val <= 0:
        return -math.inf
    return shift + math.log(val)


def zonal_log_mean(log_h, n: int, t_lo: float = -1.0, t_hi: float = 1.0) -> float:
    """``log E_x[h(<x, v>) 1{t_lo <= <x, v> <= t_hi}]`` for x uniform on S^{n-1}.

    ``log_h`` maps an array of t values to ``log h(t)`` (``-inf`` allowed).
    """
    n = check_dimension(n)
    num = _theta_log_integral(log_h, n, t_lo, t_hi)
    den = _theta_log_integral(lambda t: np.zeros_like(t), n, -1.0, 1.0)
    return num - den


def cap_measure(n: int, t0: float) -> float:
    """Normalized area of the cap {x : <x, v> >= t0} on S^{n-1}."""
    if t0 <= -1.0:
        return 1.0
    if t0 >= 1.0:
        return 0.0
    return math.exp(zonal_log_mean(lambda t: np.zeros_like(t), n, t0, 1.0))


def cap_height_for_measure(n: int, measure: float) -> float:
    """Inverse of :func:`cap_measure`: the t0 whose cap has the given area."""
    if not 0.0 < measure < 1.0:
        raise ValueError(f"cap measure must lie in (0, 1), got {measure}")
    return optimize.brentq(lambda t: cap_measure(n, t) - measure, -1.0, 1.0,
                           xtol=1e-14, rtol=1e-14)


def estimate_cap_mass(n: int, k: float, trials: int, rng=None,
                      chunk: int = 1 << 18) -> float:
    """Monte Carlo estimate of ``Pr[<v, w>^2 >= k/n]`` for w uniform on S^{n-1}.

    By rotation invariance v = e_1.  The first coordinate of a normalized
    Gaussian is drawn as ``g_1 / sqrt(g_1^2 + chi2_{n-1})``, which has exactly
    the law of ``w_1`` without materializing the other n - 1 coordinates.
    """
    n = check_dimension(n)
    if not 1 <= k <= n / 4:
        raise ValueError(f"k must satisfy 1 <= k <= n/4 (n={n}), got {k}")
    if trials < 1:
        raise ValueError("trials must be positive")
    gen = as_generator(rng)
    thresh = k / n
    hits = 0
    left = int(trials)
    while left:
        m = min(chunk, left)
        g1 = gen.standard_normal(m)
        rest = gen.chisquare(n - 1, m)
        w1sq = g1 * g1 / (g1 * g1 + rest)
        hits += int(np.count_nonzero(w1sq >= thresh))
        left -= m
    return hits / trials
