"""Rényi divergences of sphere densities against the uniform measure.

Exact values come from 1-D zonal quadrature; Monte Carlo estimates carry
delta-method standard errors.  The equator experiments restrict a density to
a random great sphere ``S^{n-1} ∩ y^⊥`` and compare the normalized
restriction with the full density.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ..linalg import (check_dimension, sample_on_equator, sample_unit_vector,
                      sample_unit_vectors, zonal_log_mean)
from ..rng import as_generator, as_rng

MAX_MC_ALPHA = 8.0
INF_PROXY_ALPHA = 64.0
MIN_D1_FOR_RATIO = 0.1


class DegenerateSampleError(ArithmeticError):
    """Every sampled density value was zero, so the estimate is undefined."""


@dataclass(frozen=True)
class DivergenceEstimate:
    alpha: float
    value: float
    stderr: float
    samples: int


def _check_alpha(alpha: float):
    if not alpha > 0:
        raise ValueError(f"order alpha must be positive, got {alpha}")


def exact_divergence(spec, alpha: float) -> float:
    """``D_alpha(f || unif)`` of a zonal density by quadrature, alpha in (0, inf]."""
    _check_alpha(alpha)
    n, lo = spec.n, spec.t_lo
    if math.isinf(alpha):
        t = np.linspace(lo, 1.0, 20001)
        return float(np.max(spec.log_profile(t)))
    if alpha == 1:
        def log_h(t):
            lp = spec.log_profile(t)
            # f ln f is negative where f < 1; integrate positive and negative parts apart
            return lp + np.log(np.abs(lp))
        pos = zonal_log_mean(lambda t: np.where(spec.log_profile(t) > 0, log_h(t), -np.inf), n, lo, 1.0)
        neg = zonal_log_mean(lambda t: np.where(spec.log_profile(t) < 0, log_h(t), -np.inf), n, lo, 1.0)
        return math.exp(pos) - math.exp(neg)
    return zonal_log_mean(lambda t: alpha * spec.log_profile(t), n, lo, 1.0) / (alpha - 1)


def _log_mean_exp(values: np.ndarray) -> tuple[float, float]:
    """``log mean exp(v)`` and its delta-method standard error."""
    if not np.isfinite(values).any():
        raise DegenerateSampleError("all sampled density values are zero")
    lm = float(logsumexp(values) - math.log(values.size))
    w = np.exp(values - lm)  # mean 1
    return lm, float(np.std(w, ddof=1) / math.sqrt(values.size)) if values.size > 1 else math.inf


def _uniform_log_density(spec, samples: int, gen, chunk: int = 1 << 15) -> np.ndarray:
    out = np.empty(samples)
    for lo in range(0, samples, chunk):
        m = min(chunk, samples - lo)
        out[lo:lo + m] = spec.log_density(sample_unit_vectors(spec.n, m, gen))
    return out


def renyi_mc(spec, alpha: float, samples: int, rng=None,
             allow_heavy: bool = False) -> DivergenceEstimate:
    """Monte Carlo ``D_alpha(f || unif)``.

    alpha != 1 uses uniform samples and ``(1/(alpha-1)) ln mean f^alpha``;
    alpha = 1 samples from f and averages ``ln f``; alpha = inf takes the
    largest ``ln f`` seen on samples from f (stderr 0).  Orders above 8, and
    von Mises-Fisher concentrations above n/4, are refused unless
    ``allow_heavy`` since the variance of ``f^alpha`` is then too large for
    the estimate to mean anything at ordinary sample sizes.
    """
    _check_alpha(alpha)
    if samples < 2:
        raise ValueError("need at least two samples")
    if not allow_heavy:
        if not math.isinf(alpha) and alpha > MAX_MC_ALPHA:
            raise ValueError(f"alpha={alpha} exceeds {MAX_MC_ALPHA}; pass allow_heavy=True")
        if getattr(spec, "kappa", 0) > spec.n / 4:
            raise ValueError("kappa exceeds n/4; pass allow_heavy=True")
    gen = as_generator(rng)
    if alpha == 1 or math.isinf(alpha):
        lf = spec.log_density(spec.sample(samples, gen))
        if math.isinf(alpha):
            return DivergenceEstimate(alpha, float(np.max(lf)), 0.0, samples)
        return DivergenceEstimate(1.0, float(lf.mean()),
                                  float(lf.std(ddof=1) / math.sqrt(samples)), samples)
    lm, se = _log_mean_exp(alpha * _uniform_log_density(spec, samples, gen))
    return DivergenceEstimate(alpha, lm / (alpha - 1), se / abs(alpha - 1), samples)


@dataclass(frozen=True)
class EquatorTrial:
    """One random equator.

    ``mass`` is the equator average of f; ``restricted`` estimates
    ``D_alpha`` of the normalized restriction; ``unnormalized`` is the same
    functional applied to the restriction before normalizing (computed from
    the same points, so the two are strongly correlated).
    """

    normal: np.ndarray
    mass: float
    mass_stderr: float
    restricted: DivergenceEstimate
    unnormalized: float
    degenerate: bool

    @property
    def renormalization_shift(self) -> float:
        return self.restricted.value - self.unnormalized


def equator_trial(spec, alpha: float, samples: int, rng=None, normal=None) -> EquatorTrial:
    """Restrict ``spec`` to the equator orthogonal to ``normal`` (uniform when None)."""
    _check_alpha(alpha)
    if math.isinf(alpha):
        raise ValueError("use a large finite alpha in place of infinity")
    n = check_dimension(spec.n)
    if n < 3:
        raise ValueError("equator experiments need n >= 3")
    gen = as_generator(rng)
    y = sample_unit_vector(n, gen) if normal is None else np.asarray(normal, dtype=float)
    lf = spec.log_density(sample_on_equator(y, gen, size=samples))
    f = np.exp(lf)
    mass = float(f.mean())
    mass_se = float(f.std(ddof=1) / math.sqrt(samples))
    if mass <= 0:
        nan = DivergenceEstimate(alpha, math.nan, math.nan, samples)
        return EquatorTrial(y, mass, mass_se, nan, math.nan, True)
    ln_mass = math.log(mass)
    if alpha == 1:
        flf = f * np.where(f > 0, lf, 0.0)
        C = float(flf.mean())
        value = C / mass - ln_mass
        # gradient of (C, M) -> C/M - ln M
        g = np.array([1 / mass, -C / mass**2 - 1 / mass])
        cov = np.cov(np.vstack([flf, f])) / samples
        unnorm = C
    else:
        la, _ = _log_mean_exp(alpha * lf)
        unnorm = la / (alpha - 1)
        value = unnorm - alpha / (alpha - 1) * ln_mass
        fa = np.exp(alpha * lf - la)  # f^alpha scaled to mean 1, so d(ln A) = d(fa)
        g = np.array([1.0, -alpha / mass]) / (alpha - 1)
        cov = np.cov(np.vstack([fa, f])) / samples
    se = float(math.sqrt(max(g @ cov @ g, 0.0)))
    return EquatorTrial(y, mass, mass_se, DivergenceEstimate(alpha, value, se, samples),
                        unnorm, False)


@dataclass(frozen=True)
class TailReport:
    alpha: float
    t: float
    trials: int
    tail_events: int
    degenerate: int
    full_divergence: float
    exponent: float
    records: tuple

    @property
    def tail_fraction(self) -> float:
        return self.tail_events / self.trials


def equator_tail_experiment(spec, alpha: float, t: float, trials: int, rng=None,
                            samples: int = 10_000, map_fn=map) -> TailReport:
    """Fraction of random equators whose normalized restriction is t-far from f.

    For alpha > 1 the event is ``|D_alpha(f_bar|H) - D_alpha(f)| >= t``; for
    alpha = 1 it is ``|D_1(f_bar|H) / D_1(f) - 1| >= t`` and requires
    ``D_1(f) >= 0.1``.  Degenerate equators (zero mass) count as tail events
    and are also reported on their own.  ``exponent`` is the rate appearing
    in the matching concentration bound, shown for context.

    Trial i draws from ``Rng.child(i)`` of ``rng``, so ``map_fn`` may be a
    parallel map without changing the result.
    """
    if not 0 < t < 1:
        raise ValueError(f"t must lie in (0, 1), got {t}")
    if alpha < 1:
        raise ValueError("tail experiments need alpha >= 1")
    if trials < 1:
        raise ValueError("trials must be positive")
    full = exact_divergence(spec, alpha)
    if alpha == 1:
        if full < MIN_D1_FOR_RATIO:
            raise ValueError(f"D_1(f) = {full:.4g} is below {MIN_D1_FOR_RATIO}; the ratio is not meaningful")
        exponent = spec.n * t / (exact_divergence(spec, 4.0) + 1)
    else:
        exponent = spec.n * t * (alpha - 1) / (alpha * (exact_divergence(spec, 2 * alpha) + 1))
    base = as_rng(rng)
    run = functools.partial(equator_trial, spec, alpha, samples)
    records = list(map_fn(run, [base.child(i) for i in range(trials)]))
    events = degenerate = 0
    for tr in records:
        if tr.degenerate:
            degenerate += 1
            events += 1
            continue
        v = tr.restricted.value
        dev = abs(v / full - 1) if alpha == 1 else abs(v - full)
        events += dev >= t
    return TailReport(alpha, t, trials, events, degenerate, full, exponent, tuple(records))
