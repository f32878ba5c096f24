import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qlifting import DensityState, EventSystem
from qlifting.adaptive import (
    AdaptiveScenario,
    adaptive_evolve,
    joint_like_probability,
    joint_like_table,
    sequential_joint_table,
    sequential_law_check,
    total_probability_gap,
)
from qlifting.checks import random_kraus, random_state, random_unitary
from qlifting.liftings import compound_lifting, product_lifting

seeds = st.integers(0, 2**32 - 1)
PLUS_MINUS = EventSystem.projective(np.array([[1, 1], [1, -1]]) / math.sqrt(2), ("+", "-"))


def random_povm(rng, dim, n):
    """Effects K_i^dag K_i from a random isometry."""
    ch = random_kraus(rng, dim, n)
    return EventSystem(tuple(range(n)), tuple(k.H @ k for k in ch.kraus_ops))


def test_sequential_witness():
    rho = DensityState.pure(np.array([1, 1]) / math.sqrt(2))
    table = sequential_joint_table(rho, EventSystem.computational(2), PLUS_MINUS)
    assert table.row_labels == ("+", "-")
    assert table.row_sums()[0] == pytest.approx(0.5, abs=1e-12)
    laws = sequential_law_check(rho, EventSystem.computational(2), PLUS_MINUS)
    # tr(rho E+) = 1, so the row marginal misses by 1/2.
    assert laws.row_mismatch[0] == pytest.approx(-0.5, abs=1e-12)
    assert laws.max_commutator > 0


def test_sequential_table_hand_computed():
    # rho = diag(0.3, 0.7), F computational, E = +/- basis: every entry is P(F_k)/2.
    rho = DensityState(np.diag([0.3, 0.7]))
    table = sequential_joint_table(rho, EventSystem.computational(2), PLUS_MINUS)
    assert np.allclose(table.entries, [[0.15, 0.35], [0.15, 0.35]])


@given(seeds, st.integers(2, 4))
def test_sequential_laws_projective(seed, dim):
    rng = np.random.default_rng(seed)
    first = EventSystem.projective(random_unitary(rng, dim))
    second = EventSystem.projective(random_unitary(rng, dim))
    laws = sequential_law_check(random_state(rng, dim), first, second)
    assert laws.total_error < 1e-10
    assert laws.column_error < 1e-10


@given(seeds, st.integers(2, 4), st.integers(2, 4), st.integers(2, 4))
def test_sequential_laws_povm(seed, dim, n1, n2):
    rng = np.random.default_rng(seed)
    laws = sequential_law_check(random_state(rng, dim), random_povm(rng, dim, n1), random_povm(rng, dim, n2))
    assert laws.total_error < 1e-10
    assert laws.column_error < 1e-10


@given(seeds, st.integers(2, 4))
def test_commuting_sequence_has_both_marginals(seed, dim):
    rng = np.random.default_rng(seed)
    u = random_unitary(rng, dim)
    e = EventSystem.projective(u)
    laws = sequential_law_check(random_state(rng, dim), e, e)
    assert np.max(np.abs(laws.row_mismatch)) < 1e-10


@given(seeds, st.integers(1, 3), st.integers(1, 3))
def test_product_lifting_factorizes(seed, d1, d2):
    rng = np.random.default_rng(seed)
    rho, sigma = random_state(rng, d1), random_state(rng, d2)
    sc = AdaptiveScenario(rho, product_lifting(sigma, d1),
                          system_a=EventSystem.computational(d2), system_b=EventSystem.computational(d1))
    table = joint_like_table(sc)
    expected = np.outer(np.diag(rho.matrix).real, np.diag(sigma.matrix).real)
    assert np.allclose(table.entries, expected, atol=1e-12)
    lifted, reduced = adaptive_evolve(sc)
    assert np.allclose(reduced.matrix, rho.matrix)
    assert joint_like_probability(sc, 0, 0, lifted) == pytest.approx(table[0, 0])


@given(seeds, st.integers(2, 3))
def test_joint_like_table_normalized(seed, dim):
    rng = np.random.default_rng(seed)
    lift = compound_lifting(random_kraus(rng, dim, 2), input_dim=dim)
    sc = AdaptiveScenario(random_state(rng, dim), lift, random_povm(rng, dim, 3), random_povm(rng, dim, 2))
    table = joint_like_table(sc)
    assert abs(table.total - 1) < 1e-9
    assert table.entries.min() >= 0


def test_scenario_dimension_mismatch():
    lift = product_lifting(DensityState.maximally_mixed(3), 2)
    with pytest.raises(ValueError, match="do not match"):
        AdaptiveScenario(DensityState.maximally_mixed(2), lift,
                         EventSystem.computational(2), EventSystem.computational(2))
    with pytest.raises(ValueError, match="initial state"):
        AdaptiveScenario(DensityState.maximally_mixed(3), lift,
                         EventSystem.computational(3), EventSystem.computational(2))


def test_custom_combiner_is_used():
    lift = product_lifting(DensityState.pure([1, 0]), 2)
    swap_order = lambda e, f: np.kron(e.matrix, f.matrix)  # noqa: E731
    sc = AdaptiveScenario(DensityState.pure([0, 1]), lift, EventSystem.computational(2),
                          EventSystem.computational(2), combiner=swap_order)
    assert joint_like_table(sc)[1, 0] == pytest.approx(1.0)


def test_total_probability_gap_arithmetic():
    rep = total_probability_gap(0.3, [0.9, 0.1], [0.25, 0.75])
    assert rep.rhs == pytest.approx(0.3)
    assert rep.gap == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError, match="sum to 1"):
        total_probability_gap(0.3, [0.9, 0.1], [0.5, 0.6])
    with pytest.raises(ValueError, match="one conditional"):
        total_probability_gap(0.3, [0.9], [0.5, 0.5])
