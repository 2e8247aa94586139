"""Exact Rényi divergences of finite distributions and the conditional-divergence checks.

Bipartite densities are ``|A| x |B|`` tables (rows indexed by a, columns by
b).  All checks enumerate exactly; the only slack is :data:`SLACK` for
floating-point rounding.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp, rel_entr

from ..rng import as_generator

SLACK = 1e-12
CLASSICAL_ORDERS = (0.5, 1.0, 2.0, 4.0)


def _as_pair(p, q) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(p, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    if p.shape != q.shape:
        raise ValueError(f"supports differ in size: {p.size} vs {q.size}")
    return p, q


def discrete_renyi(p, q, alpha: float) -> float:
    """``D_alpha(p || q)`` in nats, returning ``inf`` when p puts mass where q has none.

    alpha = 0 gives ``-ln q(supp p)``, alpha = 1 the Kullback-Leibler divergence,
    alpha = inf ``ln max p/q``.
    """
    p, q = _as_pair(p, q)
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    sp = p > 0
    if alpha == 0:
        return float(-math.log(q[sp].sum()))
    if alpha < 1:
        # support mismatch does not make alpha < 1 divergences infinite
        both = sp & (q > 0)
        if not both.any():
            return math.inf
        lp, lq = np.log(p[both]), np.log(q[both])
        return float(logsumexp(alpha * lp + (1 - alpha) * lq) / (alpha - 1))
    if (q[sp] == 0).any():
        return math.inf
    lp, lq = np.log(p[sp]), np.log(q[sp])
    if alpha == 1:
        return float(np.sum(p[sp] * (lp - lq)))
    if math.isinf(alpha):
        return float(np.max(lp - lq))
    return float(logsumexp(alpha * lp + (1 - alpha) * lq) / (alpha - 1))


def total_variation(p, q) -> float:
    p, q = _as_pair(p, q)
    return 0.5 * float(np.abs(p - q).sum())


def kl(p, q) -> float:
    """Kullback-Leibler divergence via ``scipy.special.rel_entr`` (independent of :func:`discrete_renyi`)."""
    p, q = _as_pair(p, q)
    return float(np.sum(rel_entr(p, q)))


def coarsen(p, labels) -> np.ndarray:
    """Push p forward along a partition given as one cell label per point."""
    p = np.asarray(p, dtype=float)
    labels = np.asarray(labels)
    _, cell = np.unique(labels, return_inverse=True)
    return np.bincount(cell, weights=p)


def random_partition(size: int, rng=None) -> np.ndarray:
    """A uniformly random number of cells, each point assigned a uniform cell."""
    gen = as_generator(rng)
    cells = int(gen.integers(1, size + 1))
    return gen.integers(0, cells, size)


def random_distribution(size: int, rng=None, concentration: float = 1.0) -> np.ndarray:
    return as_generator(rng).dirichlet(np.full(size, concentration))


def random_bipartite_pair(size_a: int, size_b: int, rng=None,
                          concentration: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    gen = as_generator(rng)
    f = gen.dirichlet(np.full(size_a * size_b, concentration)).reshape(size_a, size_b)
    g = gen.dirichlet(np.full(size_a * size_b, concentration)).reshape(size_a, size_b)
    return f, g


def _check_table(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if t.ndim != 2 or (t < 0).any() or abs(t.sum() - 1) > 1e-9:
        raise ValueError("bipartite density must be a nonnegative 2-D table summing to 1")
    if max(t.shape) > 12:
        raise ValueError("tables beyond 12 x 12 are not enumerated")
    return t


def conditional_divergences(f_ab, g_ab, alpha: float) -> np.ndarray:
    """``D_alpha(f_{A|b} || g_{A|b})`` per column b; NaN where ``f_B(b) = 0``."""
    f = _check_table(f_ab)
    g = _check_table(g_ab)
    fb, gb = f.sum(axis=0), g.sum(axis=0)
    out = np.full(f.shape[1], np.nan)
    for b in range(f.shape[1]):
        if fb[b] > 0:
            gcol = g[:, b] / gb[b] if gb[b] > 0 else g[:, b]
            out[b] = discrete_renyi(f[:, b] / fb[b], gcol, alpha)
    return out


@dataclass
class SuiteReport:
    checks: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def record(self, name: str, lhs: float, rhs: float, **context):
        self.checks += 1
        if not lhs <= rhs + SLACK:
            self.violations.append({"check": name, "lhs": lhs, "rhs": rhs, **context})

    def merge(self, other: "SuiteReport") -> "SuiteReport":
        self.checks += other.checks
        self.violations.extend(other.violations)
        return self


def conditional_divergence_suite(f_ab, g_ab, alpha: float, ell: float) -> SuiteReport:
    """Check, by exact enumeration over b and over every subset E of B:

    (i)   ``E_{b ~ f_B} D_alpha(f_{A|b} || g_{A|b}) <= D_alpha(f_AB || g_AB)``;
    (ii)  for each E with ``f_B(E) > 0``, the f-weighted mean of the conditional
          divergences over E is at most
          ``ln g_B(E) - alpha/(alpha-1) ln f_B(E) + D_alpha(f_AB || g_AB)``;
    (iii) ``E* = {b : D_alpha(cond) >= ell * D_alpha(joint)}`` has
          ``f_B(E*) <= exp(-((alpha-1)/alpha)(ell-1) D_alpha(joint))``.

    Columns with ``f_B(b) = 0`` have no conditional and are left out.
    """
    if not alpha > 1:
        raise ValueError("the conditional bounds need alpha > 1")
    if not ell > 1:
        raise ValueError("ell must exceed 1")
    f = _check_table(f_ab)
    g = _check_table(g_ab)
    if f.shape != g.shape:
        raise ValueError("tables differ in shape")
    fb, gb = f.sum(axis=0), g.sum(axis=0)
    joint = discrete_renyi(f, g, alpha)
    cond = conditional_divergences(f, g, alpha)
    live = fb > 0
    rep = SuiteReport()

    mean_cond = float(np.sum(fb[live] * cond[live]))
    rep.record("expected_conditional", mean_cond, joint)

    cols = np.flatnonzero(live)
    for r in range(1, cols.size + 1):
        for E in itertools.combinations(cols, r):
            E = list(E)
            fE, gE = float(fb[E].sum()), float(gb[E].sum())
            lhs = float(np.sum(fb[E] * cond[E]) / fE)
            rhs = (math.log(gE) if gE > 0 else -math.inf) - alpha / (alpha - 1) * math.log(fE) + joint
            rep.record("subset_bound", lhs, rhs, subset=tuple(int(b) for b in E))

    star = live & (cond >= ell * joint)
    mass = float(fb[star].sum())
    rep.record("tail_bound", mass, math.exp(-(alpha - 1) / alpha * (ell - 1) * joint),
               subset=tuple(int(b) for b in np.flatnonzero(star)))
    return rep


def _renyi_rows(P: np.ndarray, Q: np.ndarray, alpha: float) -> np.ndarray:
    """Row-wise :func:`discrete_renyi` for alpha in (0, inf), alpha != 0."""
    sp = P > 0
    if alpha < 1:
        sp = sp & (Q > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        lp = np.where(sp, np.log(np.where(sp, P, 1.0)), 0.0)
        lq = np.where(sp, np.log(np.where(sp & (Q > 0), Q, 1.0)), 0.0)
        if alpha == 1:
            out = np.sum(np.where(sp, P * (lp - lq), 0.0), axis=1)
        else:
            terms = np.where(sp, alpha * lp + (1 - alpha) * lq, -np.inf)
            out = logsumexp(terms, axis=1) / (alpha - 1)
    if alpha >= 1:
        out = np.where((sp & (Q == 0)).any(axis=1), np.inf, out)
    return out


def classical_inequality_suite(p, q, partitions=100, rng=None,
                               orders=CLASSICAL_ORDERS) -> SuiteReport:
    """Pinsker ``TV(p, q) <= sqrt(KL/2)`` and data processing under random partitions.

    ``partitions`` is a count of random partitions or an explicit list of
    label arrays (one cell label per point).
    """
    p, q = _as_pair(p, q)
    rep = SuiteReport()
    d1 = discrete_renyi(p, q, 1.0)
    rep.record("pinsker", total_variation(p, q), math.sqrt(d1 / 2))
    if isinstance(partitions, int):
        gen = as_generator(rng)
        parts = [random_partition(p.size, gen) for _ in range(partitions)]
    else:
        parts = list(partitions)
    if not parts:
        return rep
    cells = np.array([np.unique(np.asarray(l), return_inverse=True)[1] for l in parts])
    m, size = cells.shape
    flat = (cells + size * np.arange(m)[:, None]).ravel()
    pc = np.bincount(flat, weights=np.tile(p, m), minlength=m * size).reshape(m, size)
    qc = np.bincount(flat, weights=np.tile(q, m), minlength=m * size).reshape(m, size)
    for a in orders:
        full = discrete_renyi(p, q, a)
        coarse = _renyi_rows(pc, qc, a)
        for i in np.flatnonzero(~(coarse <= full + SLACK)):
            rep.violations.append({"check": "data_processing", "lhs": float(coarse[i]),
                                   "rhs": full, "alpha": a, "partition": i})
        rep.checks += m
    return rep
