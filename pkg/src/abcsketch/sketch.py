"""Streaming estimators for inner products and for the sign of a^T B c.

Three pieces live here:

* :class:`AmsBank`, the AMS median-of-means inner-product sketch built on
  4-wise independent signs;
* the naive triple-product estimator, kept to show its variance grows like n;
* :class:`AbcStreamer`, the O(sqrt(n) log n)-space decision algorithm.  While c
  streams it keeps the largest-magnitude coordinates; while B streams it forms
  (B c_bar)_i row by row and feeds an AMS bank; while a streams it feeds the
  other side of the same bank.  On promise inputs <a, B c_bar> equals
  label * alpha exactly, so the sign of the sketch estimate is the answer.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .hashing import SignFamilyBank, bits_for_domain, second_moment_matrix
from .linalg import DimensionError
from .rng import as_generator


class StreamError(ValueError):
    """Malformed stream: wrong phase order, too many values, or an early decision."""


class DuplicateIndexError(ValueError):
    pass


def median_of_means_shape(eps: float, delta: float) -> tuple[int, int]:
    """(groups, group_size) = (ceil(8 ln(1/delta)), ceil(8 / eps^2))."""
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return math.ceil(8 * math.log(1 / delta)), math.ceil(8 / eps**2 - 1e-9)


class AmsBank:
    """``groups * group_size`` pairs of running sums ``sum_i s(i) x_i``, ``sum_i s(i) y_i``.

    The estimate is the median over groups of the mean over the group of
    ``acc_x * acc_y``.
    """

    def __init__(self, n: int, groups: int, group_size: int, rng=None, k: int = 4):
        if groups < 1 or group_size < 1:
            raise ValueError("groups and group_size must be positive")
        self.n = n
        self.groups = groups
        self.group_size = group_size
        self.families = SignFamilyBank.draw(groups * group_size, k,
                                            bits_for_domain(n), rng)
        self.acc_x = np.zeros(groups * group_size)
        self.acc_y = np.zeros(groups * group_size)

    @classmethod
    def for_accuracy(cls, n: int, eps: float, delta: float, rng=None) -> "AmsBank":
        groups, size = median_of_means_shape(eps, delta)
        return cls(n, groups, size, rng)

    def _signed_sum(self, indices, values) -> np.ndarray:
        idx = np.atleast_1d(np.asarray(indices))
        vals = np.atleast_1d(np.asarray(values, dtype=float))
        if idx.size and (idx.min() < 0 or idx.max() >= self.n):
            raise IndexError(f"index outside [0, {self.n})")
        return self.families.signs(idx) @ vals

    def update_x(self, indices, values):
        self.acc_x += self._signed_sum(indices, values)

    def update_y(self, indices, values):
        self.acc_y += self._signed_sum(indices, values)

    def estimate(self) -> float:
        prods = (self.acc_x * self.acc_y).reshape(self.groups, self.group_size)
        return float(np.median(prods.mean(axis=1)))

    @property
    def stored_reals(self) -> int:
        return 2 * self.acc_x.size


def ams_inner_product(stream_x, stream_y, eps: float, delta: float, rng=None,
                      chunk: int = 256) -> float:
    """Estimate ``<x, y>`` from two streams with the AMS sketch.

    For unit x, y the error exceeds eps with probability at most delta.
    """
    x = np.asarray(stream_x, dtype=float)
    y = np.asarray(stream_y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionError(f"streams must have equal length, got {x.shape} and {y.shape}")
    bank = AmsBank.for_accuracy(x.size, eps, delta, rng)
    for lo in range(0, x.size, chunk):
        idx = np.arange(lo, min(lo + chunk, x.size))
        bank.update_x(idx, x[idx])
        bank.update_y(idx, y[idx])
    return bank.estimate()


# -- naive triple-product estimator ---------------------------------------

NAIVE_INDEPENDENCE = 8


def naive_bilinear_samples(a, B, c, draws: int, rng=None, chunk: int = 8192) -> np.ndarray:
    """``draws`` independent copies of ``(v.a)(v^T B w)(w.c)``.

    v and w come from two independent 8-wise independent sign families,
    each drawn fresh for every copy.
    """
    a = np.asarray(a, dtype=float)
    B = np.asarray(B, dtype=float)
    c = np.asarray(c, dtype=float)
    n = a.size
    if B.shape != (n, n) or c.shape != (n,):
        raise DimensionError(f"shapes do not compose: a{a.shape}, B{B.shape}, c{c.shape}")
    gen = as_generator(rng)
    m = bits_for_domain(n)
    idx = np.arange(n)
    out = np.empty(draws)
    for lo in range(0, draws, chunk):
        size = min(chunk, draws - lo)
        v = SignFamilyBank.draw(size, NAIVE_INDEPENDENCE, m, gen).signs(idx).astype(float)
        w = SignFamilyBank.draw(size, NAIVE_INDEPENDENCE, m, gen).signs(idx).astype(float)
        out[lo:lo + size] = (v @ a) * np.einsum("di,di->d", v @ B, w) * (w @ c)
    return out


def naive_bilinear_estimate(a, B, c, rng=None) -> float:
    """One draw of the naive estimator; unbiased for a^T B c, variance about n."""
    return float(naive_bilinear_samples(a, B, c, 1, rng)[0])


def naive_estimator_exact_mean(a, B, c, k: int = NAIVE_INDEPENDENCE) -> float:
    """Mean of the naive estimator over the entire joint seed space of (v, w).

    By independence of v and w the joint mean factors through the exact
    second-moment matrix ``M = E[s s^T]`` of one family: ``a^T M B M c``.
    M itself is computed by enumerating every seed, so this is exhaustive.
    """
    a = np.asarray(a, dtype=float)
    B = np.asarray(B, dtype=float)
    c = np.asarray(c, dtype=float)
    n = a.size
    M = second_moment_matrix(k, bits_for_domain(n), n)
    return float(a @ M @ B @ M @ c)


# -- heavy coordinates -------------------------------------------------------

@dataclass(frozen=True)
class SparseVector:
    n: int
    indices: np.ndarray
    values: np.ndarray

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.n)
        out[self.indices] = self.values
        return out

    def dot_dense(self, x) -> float:
        return float(np.asarray(x)[self.indices] @ self.values)


class HeavyCoords:
    """The ``capacity`` largest-magnitude coordinates seen so far.

    Indices must arrive in strictly increasing order (the streaming order),
    which is what lets a repeated index be detected without remembering
    every index.  Ties in magnitude keep the smaller index.
    """

    def __init__(self, capacity: int, n: int | None = None):
        if capacity < 1:
            raise ValueError("capacity must be at least 1")
        self.capacity = int(capacity)
        self.n = n
        self.indices = np.zeros(0, dtype=np.int64)
        self.values = np.zeros(0)
        self._next = 0
        self._seen = 0

    def update_many(self, start: int, values) -> "HeavyCoords":
        vals = np.atleast_1d(np.asarray(values, dtype=float))
        if start < self._next:
            raise DuplicateIndexError(
                f"index {start} already seen (next expected >= {self._next})")
        if self.n is not None and start + vals.size > self.n:
            raise IndexError(f"index {start + vals.size - 1} outside [0, {self.n})")
        idx = np.concatenate([self.indices, np.arange(start, start + vals.size)])
        allv = np.concatenate([self.values, vals])
        order = np.lexsort((idx, -np.abs(allv)))[: self.capacity]
        keep = np.sort(order)  # entries stay sorted by index
        self.indices, self.values = idx[keep], allv[keep]
        self._next = start + vals.size
        self._seen += vals.size
        return self

    def update(self, index: int, value: float) -> "HeavyCoords":
        return self.update_many(index, [value])

    @property
    def seen(self) -> int:
        return self._seen

    def finalize(self) -> tuple[SparseVector, float]:
        """Normalized sparse approximation ``c_bar`` and ``alpha = ||c_tilde||_2``."""
        if self._seen == 0:
            raise StreamError("no coordinates were streamed")
        alpha = float(np.linalg.norm(self.values))
        if alpha == 0.0:
            raise StreamError("all retained coordinates are zero")
        n = self.n if self.n is not None else self._next
        return SparseVector(n, self.indices.copy(), self.values / alpha), alpha


def heavy_update(state: HeavyCoords, index: int, value: float) -> HeavyCoords:
    return state.update(index, value)


def heavy_finalize(state: HeavyCoords) -> tuple[SparseVector, float]:
    return state.finalize()


# -- the decision algorithm --------------------------------------------------

class Phase(enum.Enum):
    READING_C = "reading_c"
    READING_B = "reading_b"
    READING_A = "reading_a"
    DONE = "done"


@dataclass(frozen=True)
class SpaceReport:
    n: int
    capacity: int
    heavy_stored: int
    groups: int
    group_size: int
    alpha: float
    stored_reals: int
    stored_indices: int
    seed_words: int

    def lines(self) -> list[str]:
        return [f"{name}={getattr(self, name)}" for name in self.__dataclass_fields__]


DEFAULT_CAPACITY_FACTOR = 100.0
DECISION_FAILURE = 0.1


def decision_shape(alpha: float, reps: int | None = None) -> tuple[int, int]:
    """Median-of-means shape targeting additive error alpha/3 with failure 1/10."""
    groups = math.ceil(8 * math.log(1 / DECISION_FAILURE))
    size = reps if reps is not None else math.ceil(72 / alpha**2 - 1e-9)
    return groups, size


class AbcStreamer:
    """Single-pass state machine for the promise problem ``a^T B c = +-1``.

    Values are fed in stream order (c, then B row-major, then a) through
    :meth:`feed`, in chunks of any size.  Stored state is the heavy
    coordinates of c, one partial row sum, and the AMS accumulators.
    Inputs that violate the promise are not detected; the output is then
    meaningless.
    """

    def __init__(self, n: int, capacity_factor: float = DEFAULT_CAPACITY_FACTOR,
                 reps: int | None = None, rng=None, k: int = 4):
        if n < 2:
            raise DimensionError(f"dimension must be >= 2, got {n}")
        if capacity_factor <= 0:
            raise ValueError("capacity_factor must be positive")
        self.n = n
        self.capacity = max(1, math.ceil(capacity_factor * math.sqrt(n) - 1e-9))
        self.reps = reps
        self.k = k
        self._gen = as_generator(rng)
        self.heavy = HeavyCoords(self.capacity, n)
        self.phase = Phase.READING_C
        self.pos = 0
        self.cbar: SparseVector | None = None
        self.alpha: float | None = None
        self.bank: AmsBank | None = None
        self._row_acc = 0.0

    @property
    def total_length(self) -> int:
        return self.n * self.n + 2 * self.n

    def feed(self, values) -> "AbcStreamer":
        vals = np.ravel(np.asarray(values, dtype=float))
        while vals.size:
            if self.phase is Phase.DONE:
                raise StreamError(f"stream longer than n^2 + 2n = {self.total_length}")
            if self.phase is Phase.READING_C:
                take = min(vals.size, self.n - self.pos)
                self.heavy.update_many(self.pos, vals[:take])
                self.pos += take
                if self.pos == self.n:
                    self._end_c()
            elif self.phase is Phase.READING_B:
                take = min(vals.size, self.n + self.n * self.n - self.pos)
                self._consume_b(vals[:take])
                self.pos += take
                if self.pos == self.n + self.n * self.n:
                    self.phase = Phase.READING_A
            else:
                off = self.pos - self.n - self.n * self.n
                take = min(vals.size, self.n - off)
                self.bank.update_x(np.arange(off, off + take), vals[:take])
                self.pos += take
                if self.pos == self.total_length:
                    self.phase = Phase.DONE
            vals = vals[take:]
        return self

    def _end_c(self):
        self.cbar, self.alpha = self.heavy.finalize()
        groups, size = decision_shape(self.alpha, self.reps)
        self.bank = AmsBank(self.n, groups, size, self._gen, self.k)
        self.phase = Phase.READING_B

    def _consume_b(self, chunk: np.ndarray):
        n = self.n
        flat = self.pos - n + np.arange(chunk.size)
        rows, cols = np.divmod(flat, n)
        hidx = self.cbar.indices
        slot = np.searchsorted(hidx, cols)
        hit = slot < hidx.size
        hit[hit] = hidx[slot[hit]] == cols[hit]
        first_row = int(rows[0])
        # bincount returns integers when nothing hits, hence the cast
        contrib = np.bincount(rows[hit] - first_row,
                              weights=chunk[hit] * self.cbar.values[slot[hit]],
                              minlength=int(rows[-1]) - first_row + 1).astype(float)
        contrib[0] += self._row_acc
        # a row is finished when its last column has arrived
        last_col = int(cols[-1])
        if last_col == n - 1:
            done = contrib
            self._row_acc = 0.0
        else:
            done = contrib[:-1]
            self._row_acc = float(contrib[-1])
        if done.size:
            self.bank.update_y(np.arange(first_row, first_row + done.size), done)

    def estimate(self) -> float:
        if self.phase is not Phase.DONE:
            raise StreamError(f"stream ended early in phase {self.phase.value}")
        return self.bank.estimate()

    def decide(self) -> tuple[int, SpaceReport]:
        est = self.estimate()
        return (1 if est >= 0 else -1), self.space_report()

    def space_report(self) -> SpaceReport:
        heavy = self.heavy.indices.size
        bank_reals = self.bank.stored_reals if self.bank else 0
        return SpaceReport(
            n=self.n,
            capacity=self.capacity,
            heavy_stored=heavy,
            groups=self.bank.groups if self.bank else 0,
            group_size=self.bank.group_size if self.bank else 0,
            alpha=float(self.alpha) if self.alpha is not None else float("nan"),
            # heavy values + accumulators + alpha + the open row sum
            stored_reals=heavy + bank_reals + 2,
            stored_indices=heavy,
            seed_words=len(self.bank.families) * self.k if self.bank else 0,
        )


def streaming_abc_decide(stream, n: int | None = None,
                         capacity_factor: float = DEFAULT_CAPACITY_FACTOR,
                         reps: int | None = None, rng=None,
                         chunk: int = 1 << 16) -> tuple[int, SpaceReport]:
    """Run :class:`AbcStreamer` over ``stream`` and return (decision, space report).

    ``stream`` is a flat array or an iterable of arrays/floats in stream
    order; ``n`` is inferred from the length when omitted.
    """
    if isinstance(stream, np.ndarray) or isinstance(stream, (list, tuple)):
        flat = np.ravel(np.asarray(stream, dtype=float))
        if n is None:
            n = round(math.sqrt(flat.size + 1)) - 1
        if flat.size != n * n + 2 * n:
            raise StreamError(f"stream length {flat.size} is not n^2 + 2n for n={n}")
        pieces = (flat[i:i + chunk] for i in range(0, flat.size, chunk))
    else:
        if n is None:
            raise ValueError("n is required for a streamed iterable")
        pieces = stream
    st = AbcStreamer(n, capacity_factor, reps, rng)
    for piece in pieces:
        st.feed(piece)
    return st.decide()
