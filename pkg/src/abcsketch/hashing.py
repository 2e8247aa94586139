"""k-wise independent random signs from polynomials over GF(2^m).

A family member is a polynomial ``h(x) = c_0 + c_1 x + ... + c_{k-1} x^{k-1}``
with coefficients drawn uniformly from GF(2^m).  For any k distinct points the
values ``h(x_1), ..., h(x_k)`` are uniform and independent (the Vandermonde
system is invertible), so any fixed output bit gives k-wise independent
fair signs.  We use the lowest bit: sign = 1 - 2 * (h(x) & 1).
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .rng import as_generator

# Primitive polynomials, written as the exponents of their nonzero terms.
_POLY_TERMS = {
    2: (2, 1, 0), 3: (3, 1, 0), 4: (4, 1, 0), 5: (5, 2, 0), 6: (6, 1, 0),
    7: (7, 1, 0), 8: (8, 4, 3, 2, 0), 9: (9, 4, 0), 10: (10, 3, 0),
    11: (11, 2, 0), 12: (12, 6, 4, 1, 0), 13: (13, 4, 3, 1, 0),
    14: (14, 10, 6, 1, 0), 15: (15, 1, 0), 16: (16, 12, 3, 1, 0),
    17: (17, 3, 0), 18: (18, 7, 0), 19: (19, 5, 2, 1, 0), 20: (20, 3, 0),
    21: (21, 2, 0), 22: (22, 1, 0), 23: (23, 5, 0), 24: (24, 7, 2, 1, 0),
    25: (25, 3, 0), 26: (26, 6, 2, 1, 0), 27: (27, 5, 2, 1, 0),
    28: (28, 3, 0), 29: (29, 2, 0), 30: (30, 23, 2, 1, 0), 31: (31, 3, 0),
    32: (32, 22, 2, 1, 0),
}
MODULI = {m: sum(1 << e for e in terms) for m, terms in _POLY_TERMS.items()}

MIN_M, MAX_M = 2, 32
EXHAUSTIVE_LIMIT = 20  # k * m bits of seed that we are willing to enumerate


class GF2m:
    """Vectorized arithmetic in GF(2^m) on uint64 arrays."""

    def __init__(self, m: int):
        if m not in MODULI:
            raise ValueError(f"field exponent must be in [{MIN_M}, {MAX_M}], got {m}")
        self.m = m
        self.order = 1 << m
        self.modulus = MODULI[m]
        self._table = None
        self._exp = self._log = None
        if m <= 8:
            a = np.arange(self.order, dtype=np.uint64)
            self._table = self._mul_bitwise(a[:, None], a[None, :])
        elif m <= 16:
            self._build_log_tables()

    def _mul_bitwise(self, a, b):
        a, b = np.broadcast_arrays(np.asarray(a, dtype=np.uint64),
                                   np.asarray(b, dtype=np.uint64))
        a = a.copy()
        b = b.copy()
        out = np.zeros(a.shape, dtype=np.uint64)
        top = np.uint64(self.order)
        red = np.uint64(self.modulus)
        one = np.uint64(1)
        for _ in range(self.m):
            out ^= np.where(b & one, a, np.uint64(0))
            b >>= one
            a <<= one
            a = np.where(a & top, a ^ red, a)
        return out

    def _build_log_tables(self):
        q1 = self.order - 1
        exp = np.zeros(2 * q1, dtype=np.uint64)
        log = np.zeros(self.order, dtype=np.int64)
        x = 1
        for i in range(q1):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & self.order:
                x ^= self.modulus
        if x != 1 or len(set(exp[:q1].tolist())) != q1:
            raise ArithmeticError(f"modulus for m={self.m} is not primitive")
        exp[q1:] = exp[:q1]
        # log(0) points past every nonzero log sum into a run of zeros
        log[0] = 2 * q1
        self._exp = np.concatenate([exp, np.zeros(2 * q1 + 1, dtype=np.uint64)])
        self._log = log.astype(np.intp)

    def mul(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.uint64)
        b = np.asarray(b, dtype=np.uint64)
        if self._table is not None:
            return self._table.ravel()[(a.astype(np.intp) << self.m) | b.astype(np.intp)]
        if self._exp is not None:
            return self._exp[self._log[a.astype(np.intp)] + self._log[b.astype(np.intp)]]
        return self._mul_bitwise(a, b)

    def poly_eval(self, coeffs, xs) -> np.ndarray:
        """Evaluate polynomials at points.

        ``coeffs`` has shape ``(..., k)`` with the constant term first; ``xs``
        has shape ``(N,)``.  Returns field elements of shape ``(..., N)``.
        """
        coeffs = np.asarray(coeffs, dtype=np.uint64)
        xs = np.asarray(xs, dtype=np.uint64)
        acc = np.broadcast_to(coeffs[..., -1:], coeffs.shape[:-1] + xs.shape).copy()
        for j in range(coeffs.shape[-1] - 2, -1, -1):
            acc = self.mul(acc, xs) ^ coeffs[..., j:j + 1]
        return acc


@functools.lru_cache(maxsize=None)
def field(m: int) -> GF2m:
    return GF2m(m)


def bits_for_domain(n: int) -> int:
    """Smallest field exponent m >= 2 with 2^m >= n."""
    return max(MIN_M, math.ceil(math.log2(max(n, 2))))


def _check_params(k: int, m: int):
    if k < 2:
        raise ValueError(f"independence degree k must be >= 2, got {k}")
    if not MIN_M <= m <= MAX_M:
        raise ValueError(f"field exponent m must be in [{MIN_M}, {MAX_M}], got {m}")


def _signs_from_values(values) -> np.ndarray:
    return (1 - 2 * (values & np.uint64(1)).astype(np.int8)).astype(np.int8)


@dataclass(frozen=True)
class SignFamily:
    """One member of the k-wise independent sign family over {0, ..., 2^m - 1}."""

    k: int
    m: int
    coeffs: tuple

    @property
    def domain_size(self) -> int:
        return 1 << self.m

    def signs(self, indices) -> np.ndarray:
        idx = np.atleast_1d(np.asarray(indices))
        if idx.size and (idx.min() < 0 or idx.max() >= self.domain_size):
            raise IndexError(f"index outside domain [0, {self.domain_size})")
        vals = field(self.m).poly_eval(np.array(self.coeffs, dtype=np.uint64), idx)
        return _signs_from_values(vals)

    def sign(self, i: int) -> int:
        return int(self.signs([i])[0])


def build_family(k: int, m: int, rng=None) -> SignFamily:
    _check_params(k, m)
    coeffs = as_generator(rng).integers(0, 1 << m, size=k, dtype=np.uint64)
    return SignFamily(k, m, tuple(int(c) for c in coeffs))


def eval_sign(family: SignFamily, i: int) -> int:
    return family.sign(i)


@dataclass(frozen=True)
class SignFamilyBank:
    """Many independent family members sharing (k, m); coefficients row-wise."""

    k: int
    m: int
    coeffs: np.ndarray  # (count, k) uint64

    @classmethod
    def draw(cls, count: int, k: int, m: int, rng=None) -> "SignFamilyBank":
        _check_params(k, m)
        c = as_generator(rng).integers(0, 1 << m, size=(count, k), dtype=np.uint64)
        return cls(k, m, c)

    def __len__(self):
        return self.coeffs.shape[0]

    def __getitem__(self, j) -> SignFamily:
        return SignFamily(self.k, self.m, tuple(int(c) for c in self.coeffs[j]))

    def signs(self, indices) -> np.ndarray:
        """``(count, len(indices))`` int8 matrix of signs."""
        idx = np.atleast_1d(np.asarray(indices))
        if idx.size and (idx.min() < 0 or idx.max() >= (1 << self.m)):
            raise IndexError(f"index outside domain [0, {1 << self.m})")
        return _signs_from_values(field(self.m).poly_eval(self.coeffs, idx))


# -- exhaustive verification ------------------------------------------------

def seed_coefficients(seeds, k: int, m: int) -> np.ndarray:
    """Map integer seeds in [0, 2^{k m}) to coefficient rows (constant term first)."""
    s = np.asarray(seeds, dtype=np.uint64)[:, None]
    shifts = (np.arange(k, dtype=np.uint64) * np.uint64(m))[None, :]
    return (s >> shifts) & np.uint64((1 << m) - 1)


def sign_bit_table(k: int, m: int, evaluator=None) -> np.ndarray:
    """Sign bits of every seed at every domain point, shape ``(2^{k m}, 2^m)``.

    ``evaluator(coeffs, xs)`` defaults to the field's polynomial evaluator; a
    different one can be passed to test the checker itself.
    """
    _check_params(k, m)
    if k * m > EXHAUSTIVE_LIMIT:
        raise ValueError(f"seed space 2^{k * m} too large to enumerate "
                         f"(limit 2^{EXHAUSTIVE_LIMIT})")
    ev = evaluator or field(m).poly_eval
    coeffs = seed_coefficients(np.arange(1 << (k * m)), k, m)
    vals = ev(coeffs, np.arange(1 << m))
    return (np.asarray(vals, dtype=np.uint64) & np.uint64(1)).astype(np.uint8)


_PARITY_SIGNS = np.array([1 - 2 * (bin(p).count("1") & 1) for p in range(1 << 12)],
                         dtype=np.int64)


def subset_correlations(table: np.ndarray) -> np.ndarray:
    """``corr[S] = sum over seeds of prod_{x in S} sign_x`` for every point subset S.

    S is a bitmask over the table's columns.  Computed as the Walsh-Hadamard
    transform of the histogram of packed per-seed bit words, so it needs
    ``2^points`` memory and is meant for domains of at most 16 points.
    """
    seeds, points = table.shape
    if points > 16:
        raise ValueError("subset correlations need a domain of at most 16 points")
    words = table.astype(np.int64) @ (1 << np.arange(points, dtype=np.int64))
    h = np.bincount(words, minlength=1 << points).astype(np.int64)
    step = 1
    while step < h.size:
        v = h.reshape(-1, 2, step)
        lo, hi = v[:, 0, :].copy(), v[:, 1, :].copy()
        v[:, 0, :] = lo + hi
        v[:, 1, :] = lo - hi
        step *= 2
    return h


def table_is_kwise(table: np.ndarray, order: int) -> bool:
    """True iff every set of j <= order columns shows each bit pattern equally often.

    By the XOR lemma this is equivalent to every nonempty subset of at most
    ``order`` columns having a sign product that sums to exactly zero, which
    is what is checked.  Pattern counts are also verified directly for
    domains too large for :func:`subset_correlations`.
    """
    seeds, points = table.shape
    top = min(order, points)
    if seeds % (1 << top):
        return False
    if points <= 16:
        corr = subset_correlations(table)
        sizes = np.bitwise_count(np.arange(corr.size, dtype=np.uint64))
        sel = (sizes >= 1) & (sizes <= top)
        return not np.any(corr[sel])
    cols = table.astype(np.int64)
    for j in range(1, top + 1):
        expect = seeds >> j
        for tup in itertools.combinations(range(points), j):
            pattern = np.zeros(seeds, dtype=np.int64)
            for pos, col in enumerate(tup):
                pattern |= cols[:, col] << pos
            counts = np.bincount(pattern, minlength=1 << j)
            if np.any(counts != expect) or int(counts @ _PARITY_SIGNS[: 1 << j]):
                return False
    return True


def pattern_counts(table: np.ndarray, points) -> np.ndarray:
    """How often each bit pattern occurs on the given columns, over all seeds."""
    pattern = np.zeros(table.shape[0], dtype=np.int64)
    for pos, col in enumerate(points):
        pattern |= table[:, col].astype(np.int64) << pos
    return np.bincount(pattern, minlength=1 << len(points))


def exhaustive_kwise_check(k: int, m: int, *, order: int | None = None,
                           evaluator=None) -> bool:
    """Enumerate the whole seed space and verify ``order``-wise independence.

    ``order`` defaults to k.  Asking for more independence than the family
    has must fail, which is how the tests show the check is not vacuous.
    """
    table = sign_bit_table(k, m, evaluator)
    return table_is_kwise(table, k if order is None else order)


def all_seed_sign_bits(k: int, m: int, xs, top: int | None = None) -> np.ndarray:
    """Sign bits at ``xs`` for every seed, by exhaustive enumeration.

    Uses ``h(x) = XOR_j c_j * x^j``: one ``(2^m, N)`` table of products per
    coefficient, combined by broadcasting XOR, so each seed's value is formed
    explicitly.  Seeds are ordered as in :func:`seed_coefficients`.  When
    ``top`` is given only seeds whose highest coefficient equals ``top`` are
    produced (a slice of ``2^{(k-1) m}`` seeds).
    """
    F = field(m)
    xs = np.asarray(xs, dtype=np.uint64)
    q = np.arange(1 << m, dtype=np.uint64)
    powers = np.ones_like(xs)
    parts = []
    for _ in range(k):
        parts.append((F.mul(q[:, None], powers[None, :]) & np.uint64(1)).astype(np.uint8))
        powers = F.mul(powers, xs)
    if top is not None:
        parts[-1] = parts[-1][top:top + 1]
    bits = parts[-1]
    for part in reversed(parts[:-1]):
        # seed index = sum_j c_j 2^{j m}: higher coefficients vary slowest
        bits = (bits[:, None, :] ^ part[None, :, :]).reshape(-1, xs.size)
    return bits


def second_moment_matrix(k: int, m: int, n: int) -> np.ndarray:
    """Exact ``E[s s^T]`` over the full seed space for the first n sign positions.

    Accumulated as integer sums of +-1 products, so the result is exact.
    """
    return _second_moment_cached(k, m, n).copy()


@functools.lru_cache(maxsize=16)
def _second_moment_cached(k: int, m: int, n: int) -> np.ndarray:
    _check_params(k, m)
    if n > 1 << m:
        raise ValueError("n exceeds the family's domain")
    if k * m > 32:
        raise ValueError(f"seed space 2^{k * m} too large to enumerate")
    xs = np.arange(n)
    acc = np.zeros((n, n), dtype=np.int64)
    for top in range(1 << m):
        s = 1.0 - 2.0 * all_seed_sign_bits(k, m, xs, top=top)
        acc += np.rint(s.T @ s).astype(np.int64)
    return acc / (1 << (k * m))
