"""Densities on S^{n-1} relative to the normalized uniform measure.

Both continuous families are zonal: the density depends on x only through
``t = <x, center>``.  :meth:`log_profile` gives ``log f`` as a function of t,
which is what the quadrature routines integrate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from ..linalg import (DimensionError, cap_height_for_measure, cap_measure,
                      check_dimension, is_unit_vector, sample_on_equator,
                      zonal_log_mean)
from ..rng import as_generator


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    check_dimension(v.size)
    if not is_unit_vector(v):
        raise ValueError("center must be a unit vector")
    return v


class ZonalDensity:
    center: np.ndarray
    t_lo: float = -1.0

    @property
    def n(self) -> int:
        return self.center.size

    def log_profile(self, t) -> np.ndarray:
        raise NotImplementedError

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n:
            raise DimensionError(f"point has dimension {x.shape[-1]}, density lives on S^{self.n - 1}")
        return x

    def log_density(self, x) -> np.ndarray:
        x = self._check(x)
        return self.log_profile(x @ self.center)

    def density(self, x) -> np.ndarray:
        return np.exp(self.log_density(x))

    def _lift(self, t: np.ndarray, gen) -> np.ndarray:
        """Points with ``<x, center> = t`` and uniform direction orthogonal to center."""
        u = sample_on_equator(self.center, gen, size=t.size)
        return t[:, None] * self.center + np.sqrt(np.clip(1 - t * t, 0, None))[:, None] * u


@dataclass(frozen=True, eq=False)
class CapUniform(ZonalDensity):
    """``1/sigma(S)`` on the cap ``S = {x : <x, center> >= t0}``, zero elsewhere."""

    center: np.ndarray
    t0: float
    measure: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "center", _unit(self.center))
        if not -1.0 < self.t0 < 1.0:
            raise ValueError(f"cap height must lie in (-1, 1), got {self.t0}")
        object.__setattr__(self, "measure", cap_measure(self.n, self.t0))

    @classmethod
    def with_measure(cls, center, measure: float) -> "CapUniform":
        center = _unit(center)
        return cls(center, cap_height_for_measure(center.size, measure))

    @property
    def t_lo(self) -> float:
        return self.t0

    def log_profile(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= self.t0, -math.log(self.measure), -np.inf)

    def sample(self, size: int, rng=None) -> np.ndarray:
        """Uniform points in the cap.

        Under the uniform measure ``(1 + t)/2`` is Beta((n-1)/2, (n-1)/2);
        t is drawn from that law truncated to ``t >= t0`` by inverse survival.
        """
        gen = as_generator(rng)
        beta = stats.beta((self.n - 1) / 2, (self.n - 1) / 2)
        tail = beta.sf((1 + self.t0) / 2)
        t = 2 * beta.isf(gen.random(size) * tail) - 1
        return self._lift(np.clip(t, self.t0, 1.0), gen)


@dataclass(frozen=True, eq=False)
class VonMisesFisher(ZonalDensity):
    """``exp(kappa <mu, x>) / Z`` with Z the uniform average of the numerator."""

    center: np.ndarray
    kappa: float
    log_z: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "center", _unit(self.center))
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        k = float(self.kappa)
        object.__setattr__(self, "log_z",
                           0.0 if k == 0 else zonal_log_mean(lambda t: k * t, self.n))

    @property
    def mu(self) -> np.ndarray:
        return self.center

    def log_profile(self, t):
        return self.kappa * np.asarray(t, dtype=float) - self.log_z

    def sample(self, size: int, rng=None) -> np.ndarray:
        """Wood's rejection sampler for the component along mu."""
        gen = as_generator(rng)
        p, k = self.n, float(self.kappa)
        b = (p - 1) / (2 * k + math.sqrt(4 * k * k + (p - 1) ** 2))
        x0 = (1 - b) / (1 + b)
        c = k * x0 + (p - 1) * math.log(1 - x0 * x0)
        out = np.empty(0)
        while out.size < size:
            m = 2 * (size - out.size) + 16
            z = gen.beta((p - 1) / 2, (p - 1) / 2, m)
            w = (1 - (1 + b) * z) / (1 - (1 - b) * z)
            u = gen.random(m)
            with np.errstate(divide="ignore"):
                ok = k * w + (p - 1) * np.log(1 - x0 * w) - c >= np.log(u)
            out = np.concatenate([out, w[ok]])
        return self._lift(out[:size], gen)


@dataclass(frozen=True, eq=False)
class DiscreteTable:
    """A probability vector on a finite set."""

    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1 or p.size == 0 or (p < 0).any():
            raise ValueError("probabilities must be a nonempty nonnegative vector")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {p.sum()}, not 1")
        object.__setattr__(self, "probabilities", p)

    @property
    def size(self) -> int:
        return self.probabilities.size


def density_eval(spec, x) -> float | np.ndarray:
    """Pointwise value of a continuous density (relative to the normalized uniform measure)."""
    d = spec.density(x)
    return float(d) if np.ndim(d) == 0 else d
