import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from abcsketch.divergence import (SuiteReport, classical_inequality_suite, coarsen,
                                  conditional_divergence_suite, conditional_divergences,
                                  discrete_renyi, random_bipartite_pair, random_distribution,
                                  random_partition, total_variation)
from abcsketch.rng import Rng, as_generator


def renyi_oracle(p, q, alpha):
    """Plain-loop definition, no logs until the end."""
    if alpha == 1:
        return sum(x * math.log(x / y) for x, y in zip(p, q) if x > 0)
    if math.isinf(alpha):
        return math.log(max(x / y for x, y in zip(p, q) if x > 0))
    s = sum(x**alpha * y**(1 - alpha) for x, y in zip(p, q) if x > 0 and y > 0)
    return math.log(s) / (alpha - 1)


def test_point_mass_against_coin():
    for a in (0.5, 1.0, 2.0, 4.0, math.inf):
        assert discrete_renyi([1, 0], [0.5, 0.5], a) == pytest.approx(math.log(2), abs=1e-12)


def test_alpha_zero_and_support():
    assert discrete_renyi([0.5, 0.5, 0], [0.25, 0.25, 0.5], 0) == pytest.approx(math.log(2))
    assert discrete_renyi([0.5, 0.5], [1, 0], 2.0) == math.inf
    assert discrete_renyi([0.5, 0.5], [1, 0], 1.0) == math.inf
    # alpha < 1 stays finite on a partial overlap
    assert discrete_renyi([0.5, 0.5], [1, 0], 0.5) == pytest.approx(-2 * math.log(math.sqrt(0.5)))
    with pytest.raises(ValueError):
        discrete_renyi([1, 0], [0.5, 0.5], -1)
    with pytest.raises(ValueError):
        discrete_renyi([1, 0], [0.2, 0.3, 0.5], 2)


@given(seed=st.integers(0, 2**32 - 1), size=st.integers(2, 9),
       alpha=st.sampled_from([0.5, 1.0, 2.0, 3.0, 4.0, math.inf]))
@settings(max_examples=150, deadline=None)
def test_matches_oracle(seed, size, alpha):
    gen = np.random.default_rng(seed)
    p, q = gen.dirichlet(np.ones(size)), gen.dirichlet(np.ones(size))
    assert discrete_renyi(p, q, alpha) == pytest.approx(renyi_oracle(p, q, alpha), rel=1e-9, abs=1e-12)


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=100, deadline=None)
def test_monotone_and_nonnegative(seed):
    gen = np.random.default_rng(seed)
    p, q = gen.dirichlet(np.ones(6)), gen.dirichlet(np.ones(6))
    vals = [discrete_renyi(p, q, a) for a in (0, 0.5, 1, 2, 4, 64, math.inf)]
    assert vals[0] >= -1e-12
    assert all(x <= y + 1e-12 for x, y in zip(vals, vals[1:]))
    assert discrete_renyi(p, p, 2.0) == pytest.approx(0, abs=1e-12)


def test_total_variation_and_coarsen():
    assert total_variation([1, 0], [0.5, 0.5]) == 0.5
    assert coarsen([0.1, 0.2, 0.3, 0.4], [7, 3, 7, 3]).tolist() == pytest.approx([0.6, 0.4])


def test_pinsker_hand_example():
    # point mass vs fair coin: TV = 1/2 <= sqrt(ln 2 / 2) ~ 0.589
    rep = classical_inequality_suite([1, 0], [0.5, 0.5], partitions=[])
    assert rep.ok and rep.checks == 1
    assert 0.5 <= math.sqrt(math.log(2) / 2) <= 0.59


def test_trivial_partition_gives_zero():
    p, q = random_distribution(5, 1), random_distribution(5, 2)
    rep = classical_inequality_suite(p, q, partitions=[np.zeros(5, int), np.arange(5)])
    assert rep.ok and rep.checks == 1 + 2 * 4


def test_classical_suite_catches_a_planted_violation():
    rep = SuiteReport()
    rep.record("x", 1.0, 1.0 + 1e-13)
    assert rep.ok
    rep.record("x", 1.0, 0.99)
    assert not rep.ok and rep.violations[0]["check"] == "x"


def test_random_partition_shape():
    gen = as_generator(Rng(3))
    for _ in range(50):
        lab = random_partition(7, gen)
        assert lab.shape == (7,) and lab.min() >= 0


# -- bipartite ---------------------------------------------------------------------

def test_point_mass_bipartite():
    # f puts all mass on (a0, b0); g is uniform on {a0, a1} x {b0, b1}
    f = np.array([[1.0, 0], [0, 0]])
    g = np.full((2, 2), 0.25)
    assert discrete_renyi(f, g, 2.0) == pytest.approx(math.log(4))
    cond = conditional_divergences(f, g, 2.0)
    assert cond[0] == pytest.approx(math.log(2)) and math.isnan(cond[1])
    rep = conditional_divergence_suite(f, g, 2.0, 2.0)
    assert rep.ok
    # one live column: one expected-conditional check, one subset, one tail check
    assert rep.checks == 3


def test_identical_tables():
    f, _ = random_bipartite_pair(3, 3, 4)
    rep = conditional_divergence_suite(f, f, 4.0, 2.0)
    assert rep.ok
    # joint divergence 0, so every live column lands in E* and the bound is exp(0) = 1
    tail = [v for v in rep.violations if v["check"] == "tail_bound"]
    assert not tail


def test_subset_count():
    f, g = random_bipartite_pair(4, 4, 5)
    rep = conditional_divergence_suite(f, g, 2.0, 2.0)
    assert rep.checks == 1 + (2**4 - 1) + 1


def test_conditional_oracle():
    f, g = random_bipartite_pair(3, 4, 6)
    cond = conditional_divergences(f, g, 2.0)
    for b in range(4):
        p = f[:, b] / f[:, b].sum()
        q = g[:, b] / g[:, b].sum()
        assert cond[b] == pytest.approx(renyi_oracle(p, q, 2.0), rel=1e-12)


def test_expected_conditional_by_hand():
    f, g = random_bipartite_pair(4, 4, 7)
    for a in (2.0, 4.0, 64.0):
        cond = conditional_divergences(f, g, a)
        assert float(f.sum(axis=0) @ cond) <= discrete_renyi(f, g, a) + 1e-12


def test_suite_argument_errors():
    f, g = random_bipartite_pair(2, 2, 8)
    with pytest.raises(ValueError):
        conditional_divergence_suite(f, g, 1.0, 2.0)
    with pytest.raises(ValueError):
        conditional_divergence_suite(f, g, 2.0, 1.0)
    with pytest.raises(ValueError):
        conditional_divergence_suite(np.full((13, 1), 1 / 13), np.full((13, 1), 1 / 13), 2.0, 2.0)
    with pytest.raises(ValueError):
        conditional_divergence_suite(f * 2, g, 2.0, 2.0)


def test_sparse_tables_no_violations():
    gen = as_generator(Rng(9))
    for _ in range(200):
        f, g = random_bipartite_pair(3, 3, gen, concentration=0.2)
        for a in (2.0, 4.0):
            assert conditional_divergence_suite(f, g, a, 2.0).ok
