"""Simulator for the one-way three-player protocol Charlie -> Bob -> Alice.

Charlie holds c, Bob holds B, Alice holds a.  All three share a public random
net T of unit vectors.  Charlie sends the index of the net vector closest to
c; Bob rotates it by B and runs a sign-sketch inner-product estimate against
Alice's a; Alice outputs.  Every message is an explicit bit array and the
transcript totals are exact.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import DimensionError, check_dimension, make_promise_instance
from .rng import Rng, as_rng

DEFAULT_NET_CAP = 1 << 24
NET_BLOCK = 4096
DIRECTION_CHUNK = 4096


def net_size(k: float, cap: int = DEFAULT_NET_CAP) -> int:
    """``min(ceil(32 sqrt(k) e^{2k}), cap)``."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if cap < 1:
        raise ValueError("net cap must be positive")
    log_size = math.log(32) + 0.5 * math.log(k) + 2 * k
    if log_size >= math.log(cap):
        return int(cap)
    return math.ceil(math.exp(log_size) - 1e-9)


def k_for_net_size(size: int) -> float:
    """The k solving ``32 sqrt(k) e^{2k} = size`` (inverse of the uncapped net size)."""
    from scipy.optimize import brentq

    if size <= 32:
        raise ValueError("net size must exceed 32")
    return brentq(lambda k: math.log(32) + 0.5 * math.log(k) + 2 * k - math.log(size),
                  1e-12, 100.0)


def index_bits(size: int) -> int:
    return max(0, math.ceil(math.log2(size))) if size > 1 else 0


class Net:
    """Public random net of ``size`` uniform unit vectors in R^n.

    Vectors are generated lazily in blocks of :data:`NET_BLOCK`; block b is
    drawn from ``Rng(seed).child(b)``, so ``vector(j)`` depends only on
    ``(seed, j)`` and nothing is held in memory between calls.
    """

    def __init__(self, n: int, size: int, seed: int):
        self.n = check_dimension(n)
        if size < 1:
            raise ValueError("empty net")
        self.size = int(size)
        self.seed = int(seed)

    def block(self, b: int) -> np.ndarray:
        lo = b * NET_BLOCK
        rows = min(NET_BLOCK, self.size - lo)
        if rows <= 0:
            raise IndexError(f"block {b} outside the net")
        g = Rng(self.seed).child(b).generator().standard_normal((NET_BLOCK, self.n))[:rows]
        return g / np.linalg.norm(g, axis=1, keepdims=True)

    def blocks(self):
        for b in range(math.ceil(self.size / NET_BLOCK)):
            yield b * NET_BLOCK, self.block(b)

    def vector(self, j: int) -> np.ndarray:
        if not 0 <= j < self.size:
            raise IndexError(f"net index {j} outside [0, {self.size})")
        return self.block(j // NET_BLOCK)[j % NET_BLOCK].copy()

    def __len__(self) -> int:
        return self.size


class ExplicitNet:
    """A net given by an explicit array of unit vectors (rows)."""

    def __init__(self, vectors):
        v = np.atleast_2d(np.asarray(vectors, dtype=float))
        if v.shape[0] == 0:
            raise ValueError("empty net")
        self.vectors = v
        self.n = v.shape[1]
        self.size = v.shape[0]

    def blocks(self):
        yield 0, self.vectors

    def vector(self, j: int) -> np.ndarray:
        return self.vectors[j].copy()

    def __len__(self) -> int:
        return self.size


def charlie_select(c, net) -> tuple[int, float]:
    """Index of the net vector maximizing ``<w, c>`` (smallest index on ties) and that maximum."""
    c = np.asarray(c, dtype=float)
    if len(net) == 0:
        raise ValueError("empty net")
    if c.shape != (net.n,):
        raise DimensionError(f"c has shape {c.shape}, net dimension is {net.n}")
    best, best_val = -1, -math.inf
    for lo, vecs in net.blocks():
        dots = vecs @ c
        j = int(np.argmax(dots))  # first maximum within the block
        if dots[j] > best_val:
            best, best_val = lo + j, float(dots[j])
    return best, best_val


@dataclass(frozen=True)
class QuantizedReal:
    """Fixed-point encoding of a value in [0, 1] with ``bits`` bits."""

    value: float
    bits: int

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError("bits must be positive")
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"value must lie in [0, 1], got {self.value}")

    @property
    def code(self) -> int:
        return int(round(self.value * ((1 << self.bits) - 1)))

    def to_bits(self) -> np.ndarray:
        return np.array([(self.code >> i) & 1 for i in range(self.bits)], dtype=np.uint8)

    @staticmethod
    def decode(bits) -> float:
        bits = np.asarray(bits, dtype=np.int64)
        code = int(sum(int(b) << i for i, b in enumerate(bits)))
        return code / ((1 << bits.size) - 1)

    @property
    def encoded(self) -> float:
        return self.code / ((1 << self.bits) - 1)


def int_to_bits(value: int, width: int) -> np.ndarray:
    if value < 0 or (width < 64 and value >= 1 << width):
        raise ValueError(f"{value} does not fit in {width} bits")
    return np.array([(value >> i) & 1 for i in range(width)], dtype=np.uint8)


def bits_to_int(bits) -> int:
    return int(sum(int(b) << i for i, b in enumerate(np.asarray(bits))))


PLAYERS = ("charlie", "bob", "alice")


@dataclass
class Transcript:
    messages: list[tuple[str, np.ndarray]] = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def send(self, sender: str, bits) -> np.ndarray:
        if sender not in PLAYERS:
            raise ValueError(f"unknown player {sender!r}")
        if sender == "alice":
            raise ValueError("Alice only receives")
        payload = np.asarray(bits, dtype=np.uint8).ravel()
        self.messages.append((sender, payload))
        return payload

    @property
    def totals(self) -> dict[str, int]:
        out = dict.fromkeys(PLAYERS, 0)
        for sender, payload in self.messages:
            out[sender] += int(payload.size)
        return out

    @property
    def total_bits(self) -> int:
        return sum(self.totals.values())


def knr_rounds(eps: float) -> int:
    """Number of shared hyperplanes: ``ceil(16 / eps^2)``."""
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return math.ceil(16 / eps**2 - 1e-9)


def sign_bits(x, coins: Rng, t: int) -> np.ndarray:
    """``1{<g_j, x> >= 0}`` for the t public Gaussian directions derived from ``coins``.

    Each player calls this independently; identical coins give identical g_j.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty(t, dtype=np.uint8)
    for ci, lo in enumerate(range(0, t, DIRECTION_CHUNK)):
        rows = min(DIRECTION_CHUNK, t - lo)
        g = coins.child(ci).generator().standard_normal((rows, x.size))
        out[lo:lo + rows] = g @ x >= 0
    return out


def knr_estimate(x, y, eps: float, rng=None) -> tuple[float, int]:
    """Estimate ``<x, y>`` for unit x (Bob) and y (Alice); returns (estimate, Bob's bits).

    Bob sends his t sign bits; Alice compares them with her own.  Sign
    agreement has probability ``1 - angle/pi``, so the estimate is
    ``cos(pi (1 - p_hat))``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionError(f"x{x.shape} and y{y.shape} differ")
    t = knr_rounds(eps)
    coins = as_rng(rng)
    bob = sign_bits(x, coins, t)
    alice = sign_bits(y, coins, t)
    p_hat = np.count_nonzero(bob == alice) / t
    return math.cos(math.pi * (1.0 - p_hat)), t


def _flag_large_k(transcript: Transcript, n: int, k: float):
    transcript.notes["k_exceeds_n_over_4"] = k > n / 4


def run_protocol_decision(instance, k: float, rng=None, net_cap: int = DEFAULT_NET_CAP,
                          alpha_floor: float | None = None, net=None
                          ) -> tuple[int, Transcript]:
    """Decide the label of a promise instance; returns (decision, transcript).

    Bob cannot see the achieved alpha, so he sizes the estimate for the
    guaranteed floor ``sqrt(k/n)`` (or ``alpha_floor`` when given).  A planted
    ``net`` replaces the public random one.
    """
    n = instance.n
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    coins = as_rng(rng)
    if net is None:
        net = Net(n, net_size(k, net_cap), coins.child(0).stream)
    tr = Transcript()
    _flag_large_k(tr, n, k)
    tr.notes["net_size"] = len(net)

    # Charlie
    j, alpha = charlie_select(instance.c, net)
    tr.notes["alpha"] = alpha
    width = index_bits(len(net))
    msg = tr.send("charlie", int_to_bits(j, width))

    # Bob
    j_recv = bits_to_int(msg)
    floor = math.sqrt(k / n) if alpha_floor is None else alpha_floor
    eps = min(floor / 3, 0.999)
    tr.notes["eps"] = eps
    t = knr_rounds(eps)
    hyper = coins.child(1)
    x = instance.B @ net.vector(j_recv)
    bob_bits = tr.send("bob", sign_bits(x, hyper, t))

    # Alice
    alice_bits = sign_bits(instance.a, hyper, t)
    agree = int(np.count_nonzero(bob_bits == alice_bits))
    if 2 * agree != t:
        decision = 1 if 2 * agree > t else -1
    else:
        # a tie is broken by the first hyperplane so that flipping a flips the answer
        decision = 1 if bob_bits[0] == alice_bits[0] else -1
    return decision, tr


def alpha_bits(n: int) -> int:
    return math.ceil(math.log2(n)) + 20


DEFAULT_KNR_FRACTION = 0.25


def run_protocol_approx(a, B, c, eps: float, k: float, rng=None,
                        net_cap: int = DEFAULT_NET_CAP,
                        knr_fraction: float = DEFAULT_KNR_FRACTION,
                        net=None) -> tuple[float, Transcript]:
    """Estimate ``a^T B c`` for arbitrary unit a, c and orthogonal B.

    Charlie additionally sends alpha = <W_max, c> quantized to
    ``ceil(log2 n) + 20`` bits.  Bob and Alice estimate <a, B W_max> to
    additive ``knr_fraction * alpha * eps`` and Alice rescales by 1/alpha.
    Returns NaN (and ``notes["aborted"]``) when alpha <= 0.
    """
    a = np.asarray(a, dtype=float)
    B = np.asarray(B, dtype=float)
    c = np.asarray(c, dtype=float)
    n = check_dimension(c.size)
    if a.shape != (n,) or B.shape != (n, n):
        raise DimensionError(f"shapes do not compose: a{a.shape}, B{B.shape}, c{c.shape}")
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    coins = as_rng(rng)
    if net is None:
        net = Net(n, net_size(k, net_cap), coins.child(0).stream)
    tr = Transcript()
    _flag_large_k(tr, n, k)
    tr.notes["net_size"] = len(net)

    j, alpha = charlie_select(c, net)
    tr.notes["alpha"] = alpha
    tr.notes["aborted"] = alpha <= 0
    if alpha <= 0:
        return math.nan, tr
    width = index_bits(len(net))
    q = QuantizedReal(min(alpha, 1.0), alpha_bits(n))
    msg = tr.send("charlie", np.concatenate([int_to_bits(j, width), q.to_bits()]))

    j_recv = bits_to_int(msg[:width])
    alpha_recv = QuantizedReal.decode(msg[width:])
    eps_knr = min(knr_fraction * alpha_recv * eps, 0.999)
    tr.notes["eps_knr"] = eps_knr
    t = knr_rounds(eps_knr)
    hyper = coins.child(1)
    bob_bits = tr.send("bob", sign_bits(B @ net.vector(j_recv), hyper, t))

    alice_bits = sign_bits(a, hyper, t)
    p_hat = np.count_nonzero(bob_bits == alice_bits) / t
    return math.cos(math.pi * (1.0 - p_hat)) / alpha_recv, tr


@dataclass(frozen=True)
class TradeoffRow:
    k: float
    net_size: int
    charlie_bits: int
    bob_bits: int
    trials: int
    error_rate: float
    flagged: bool


def _sweep_row(n: int, net_cap: int, base: Rng, seed_list: list, k: float) -> TradeoffRow:
    errors = 0
    totals = None
    for s in seed_list:
        run = base.child(int(s))
        label = 1 if run.child(7).generator().random() < 0.5 else -1
        inst = make_promise_instance(n, label, run.child(8))
        dec, tr = run_protocol_decision(inst, k, run.child(9), net_cap=net_cap)
        errors += dec != label
        totals = tr.totals
    return TradeoffRow(k=k, net_size=net_size(k, net_cap), charlie_bits=totals["charlie"],
                       bob_bits=totals["bob"], trials=len(seed_list),
                       error_rate=errors / len(seed_list), flagged=k > n / 4)


def tradeoff_sweep(n: int, k_list, seeds, rng=None, net_cap: int = DEFAULT_NET_CAP,
                   map_fn=map) -> list[TradeoffRow]:
    """Run the decision protocol for each k over fresh promise instances.

    ``seeds`` is a count or an iterable of integer seeds; seed s uses the
    same instance for every k.  Bit counts are per run (they do not depend
    on the seed).  ``map_fn`` may be a parallel map over the k values.
    """
    k_list = list(k_list)
    if not k_list:
        raise ValueError("k_list must be nonempty")
    seed_list = list(range(seeds)) if isinstance(seeds, int) else list(seeds)
    if not seed_list:
        raise ValueError("need at least one seed")
    run = functools.partial(_sweep_row, n, net_cap, as_rng(rng), seed_list)
    return list(map_fn(run, k_list))
