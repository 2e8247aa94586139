import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from abcsketch.linalg import (DimensionError, make_promise_instance, sample_haar_orthogonal,
                              sample_unit_vector, sample_unit_vectors)
from abcsketch.protocol import (ExplicitNet, Net, QuantizedReal, Transcript, alpha_bits,
                                bits_to_int, charlie_select, index_bits, int_to_bits,
                                k_for_net_size, knr_estimate, knr_rounds, net_size,
                                run_protocol_approx, run_protocol_decision, sign_bits,
                                tradeoff_sweep)
from abcsketch.rng import Rng, as_generator


def test_net_size_formula():
    assert net_size(1) == math.ceil(32 * math.e**2)
    assert net_size(3) == math.ceil(32 * math.sqrt(3) * math.e**6)
    assert net_size(50) == 1 << 24
    assert net_size(8, cap=1 << 18) == 1 << 18
    with pytest.raises(ValueError):
        net_size(0.5)


def test_k_for_net_size_inverts():
    for k in (1.0, 2.5, 4.0):
        assert k_for_net_size(32 * math.sqrt(k) * math.exp(2 * k)) == pytest.approx(k)


def test_net_lazy_and_reproducible():
    net = Net(16, 10_000, 99)
    v = net.vector(5000)
    assert np.array_equal(v, net.vector(5000))
    assert np.array_equal(v, Net(16, 10_000, 99).vector(5000))
    assert abs(np.linalg.norm(v) - 1) <= 1e-12
    lo, block = list(net.blocks())[1]
    assert np.array_equal(block[5000 - lo], v)
    # the prefix does not depend on the net size
    assert np.array_equal(Net(16, 6000, 99).vector(5000), v)
    with pytest.raises(IndexError):
        net.vector(10_000)
    with pytest.raises(ValueError):
        Net(16, 0, 1)


def test_charlie_planted_member():
    gen = as_generator(Rng(1))
    c = sample_unit_vector(12, gen)
    vecs = sample_unit_vectors(12, 9, gen)
    vecs[5] = c
    j, alpha = charlie_select(c, ExplicitNet(vecs))
    assert j == 5 and alpha == pytest.approx(1.0)


def test_charlie_singleton_and_ties():
    w = -np.eye(4)[0]
    j, alpha = charlie_select(np.eye(4)[0], ExplicitNet([w]))
    assert j == 0 and alpha == -1.0
    e = np.eye(4)
    j, _ = charlie_select(e[0], ExplicitNet([e[1], e[0], e[2], e[0]]))
    assert j == 1
    with pytest.raises(DimensionError):
        charlie_select(np.ones(3) / math.sqrt(3), ExplicitNet([w]))


def test_charlie_matches_brute_force_over_blocks():
    c = sample_unit_vector(8, 3)
    net = Net(8, 9000, 4)
    allv = np.vstack([b for _, b in net.blocks()])
    assert allv.shape == (9000, 8)
    j, alpha = charlie_select(c, net)
    assert j == int(np.argmax(allv @ c)) and alpha == pytest.approx(float(np.max(allv @ c)))


def test_net_coverage_rate_n16():
    # |T| = 2^12 corresponds to k ~ 2.65 for n = 16
    k = k_for_net_size(1 << 12)
    ok = 0
    for s in range(100):
        c = sample_unit_vector(16, Rng(16, s))
        _, alpha = charlie_select(c, Net(16, 1 << 12, s))
        ok += alpha >= math.sqrt(k / 16)
    assert ok >= 95


def test_quantized_real():
    for v in (0.0, 1.0, 0.123456789, 1 / 3):
        q = QuantizedReal(v, 28)
        assert abs(q.encoded - v) <= 2.0**-28
        assert QuantizedReal.decode(q.to_bits()) == q.encoded
        assert q.to_bits().size == 28
    with pytest.raises(ValueError):
        QuantizedReal(1.5, 8)
    assert alpha_bits(256) == 28 and alpha_bits(257) == 29


@given(v=st.integers(0, 2**20 - 1))
def test_int_bits_roundtrip(v):
    assert bits_to_int(int_to_bits(v, 20)) == v


def test_index_bits():
    assert [index_bits(s) for s in (1, 2, 3, 4, 237, 22361)] == [0, 1, 2, 2, 8, 15]


def test_transcript_accounting():
    tr = Transcript()
    tr.send("charlie", [1, 0, 1])
    tr.send("bob", np.ones(7))
    tr.send("charlie", [0])
    assert tr.totals == {"charlie": 4, "bob": 7, "alice": 0}
    assert tr.total_bits == 11
    with pytest.raises(ValueError):
        tr.send("alice", [1])
    with pytest.raises(ValueError):
        tr.send("dave", [1])


# -- KNR ---------------------------------------------------------------------------

def test_knr_rounds():
    assert knr_rounds(0.2) == 400
    assert knr_rounds(1 / 3) == 144
    with pytest.raises(ValueError):
        knr_rounds(1.0)


def test_shared_directions_are_identical():
    x = sample_unit_vector(10, 1)
    assert np.array_equal(sign_bits(x, Rng(3, 4), 9000), sign_bits(x, Rng(3, 4), 9000))
    assert np.array_equal(sign_bits(-x, Rng(3, 4), 5000), 1 - sign_bits(x, Rng(3, 4), 5000))


def test_knr_equal_and_opposite():
    x = sample_unit_vector(20, 5)
    est, bits = knr_estimate(x, x, 0.2, 1)
    assert est == 1.0 and bits == 400
    est, _ = knr_estimate(x, -x, 0.2, 1)
    assert est == -1.0


def test_knr_orthogonal():
    ok = 0
    gen = as_generator(Rng(6))
    for s in range(200):
        x = sample_unit_vector(20, gen)
        y = sample_unit_vector(20, gen)
        y -= (y @ x) * x
        y /= np.linalg.norm(y)
        ok += abs(knr_estimate(x, y, 0.2, Rng(6, s))[0]) <= 0.35
    assert ok >= 180


def test_knr_accuracy_random_pairs():
    gen = as_generator(Rng(7))
    errs = []
    for s in range(200):
        x, y = sample_unit_vector(30, gen), sample_unit_vector(30, gen)
        errs.append(abs(knr_estimate(x, y, 0.25, Rng(7, s))[0] - x @ y))
    assert np.mean(np.array(errs) <= 0.25) >= 0.9


# -- decision protocol ---------------------------------------------------------------

@pytest.mark.parametrize("label", [1, -1])
def test_decision_protocol_n64(label):
    ok = 0
    for s in range(100):
        inst = make_promise_instance(64, label, Rng(64, s))
        d, tr = run_protocol_decision(inst, 3, Rng(65, s))
        ok += d == label
        assert tr.totals == {"charlie": 15, "bob": 3072, "alice": 0}
    assert ok >= 85


def test_decision_with_planted_net():
    ok = 0
    for s in range(40):
        inst = make_promise_instance(32, 1 if s % 2 else -1, Rng(32, s))
        vecs = sample_unit_vectors(32, 16, Rng(33, s))
        vecs[5] = inst.c
        d, tr = run_protocol_decision(inst, 1, Rng(34, s), net=ExplicitNet(vecs), alpha_floor=1.0)
        assert tr.notes["alpha"] == pytest.approx(1.0)
        assert tr.totals["bob"] == 144 and tr.totals["charlie"] == 4
        ok += d == inst.label
    assert ok >= 38


def test_decision_sign_flip_invariance():
    for s in range(30):
        inst = make_promise_instance(16, 1, Rng(16, s))
        flipped = type(inst)(a=-inst.a, B=inst.B, c=inst.c, label=-1)
        d1, _ = run_protocol_decision(inst, 2, Rng(17, s))
        d2, _ = run_protocol_decision(flipped, 2, Rng(17, s))
        assert d1 == -d2


def test_large_k_is_flagged():
    inst = make_promise_instance(8, 1, 0)
    _, tr = run_protocol_decision(inst, 3, 1)
    assert tr.notes["k_exceeds_n_over_4"]
    _, tr = run_protocol_decision(make_promise_instance(16, 1, 0), 3, 1)
    assert not tr.notes["k_exceeds_n_over_4"]


# -- approximation protocol -------------------------------------------------------------

def test_approx_promise_case():
    ok = 0
    for s in range(30):
        inst = make_promise_instance(64, 1, Rng(80, s))
        est, tr = run_protocol_approx(inst.a, inst.B, inst.c, 0.2, 3, Rng(81, s))
        ok += abs(est - 1) <= 0.2
        width = index_bits(tr.notes["net_size"])
        assert tr.totals == {"charlie": width + alpha_bits(64),
                             "bob": knr_rounds(tr.notes["eps_knr"]), "alice": 0}
    assert ok >= 20


def test_approx_orthogonal_instance():
    ok = 0
    for s in range(30):
        gen = as_generator(Rng(82, s))
        c = sample_unit_vector(64, gen)
        B = sample_haar_orthogonal(64, gen)
        a = sample_unit_vector(64, gen)
        bc = B @ c
        a -= (a @ bc) * bc
        a /= np.linalg.norm(a)
        est, _ = run_protocol_approx(a, B, c, 0.25, 3, Rng(83, s))
        ok += abs(est) <= 0.25
    assert ok >= 20


def test_approx_aborts_on_negative_alpha():
    c = np.eye(4)[0]
    est, tr = run_protocol_approx(c, np.eye(4), c, 0.25, 1, 0, net=ExplicitNet([-c]))
    assert math.isnan(est) and tr.notes["aborted"] and tr.total_bits == 0


def test_approx_argument_errors():
    c = np.eye(4)[0]
    with pytest.raises(ValueError):
        run_protocol_approx(c, np.eye(4), c, 1.5, 1, 0)
    with pytest.raises(DimensionError):
        run_protocol_approx(np.ones(3), np.eye(4), c, 0.2, 1, 0)


# -- sweep ------------------------------------------------------------------------------

@pytest.mark.slow
def test_tradeoff_sweep_shape():
    rows = tradeoff_sweep(64, [1, 2, 3, 4], 10, Rng(90))
    charlie = [r.charlie_bits for r in rows]
    bob = [r.bob_bits for r in rows]
    assert charlie == sorted(set(charlie))
    assert bob == sorted(set(bob), reverse=True)
    assert bob[0] / bob[-1] >= 2
    assert all(r.trials == 10 for r in rows)
    with pytest.raises(ValueError):
        tradeoff_sweep(64, [], 1)


def test_sweep_is_deterministic():
    a = tradeoff_sweep(16, [1, 2], [3, 4], Rng(5))
    b = tradeoff_sweep(16, [1, 2], [3, 4], Rng(5))
    assert a == b
