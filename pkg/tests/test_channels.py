import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from qlifting import DensityState, Projection, partial_trace, tensor
from qlifting.channels import (
    KrausChannel,
    NullEventError,
    ReductionSpec,
    amplifier_operator,
    amplifier_safe_indices,
    annihilation,
    apply_kraus,
    commuting_equivalence_check,
    conditional_prob_luders,
    conditional_prob_meet,
    hermitian_expm,
    luders_conditional_state,
    nonadditivity_witness,
    reduction_channel,
)
from qlifting.checks import random_commuting_pair, random_kraus, random_state

seeds = st.integers(0, 2**32 - 1)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


@given(seeds, st.integers(1, 4), st.integers(1, 3))
def test_kraus_output_is_a_state(seed, dim, n):
    rng = np.random.default_rng(seed)
    ch = random_kraus(rng, dim, n)
    assert ch.trace_preserving
    out = apply_kraus(ch, random_state(rng, dim))
    assert abs(np.trace(out.matrix) - 1) < 1e-10
    assert np.min(np.linalg.eigvalsh(out.matrix)) > -1e-10


def test_amplitude_damping_oracle():
    g = 0.3
    k0 = np.array([[1, 0], [0, math.sqrt(1 - g)]])
    k1 = np.array([[0, math.sqrt(g)], [0, 0]])
    rho = DensityState(np.array([[0.4, 0.2 + 0.1j], [0.2 - 0.1j, 0.6]]))
    out = KrausChannel([k0, k1])(rho)
    expected = np.array([[0.4 + g * 0.6, math.sqrt(1 - g) * (0.2 + 0.1j)],
                         [math.sqrt(1 - g) * (0.2 - 0.1j), (1 - g) * 0.6]])
    assert np.allclose(out.matrix, expected, atol=1e-14)


def test_subnormalized_family_is_renormalized():
    ch = KrausChannel([np.diag([1.0, 0.0])])
    assert not ch.trace_preserving
    out = ch(DensityState(np.diag([0.25, 0.75])))
    assert np.allclose(out.matrix, np.diag([1.0, 0.0]))
    with pytest.raises(NullEventError):
        ch(DensityState(np.diag([0.0, 1.0])))


def test_overcomplete_family_rejected():
    with pytest.raises(ValueError, match="exceeds"):
        KrausChannel([np.eye(2), np.eye(2)])


def test_luders_state_hand_computed():
    rho = DensityState.pure(np.array([1, 1]) / math.sqrt(2))
    f = np.diag([1.0, 0.0])
    assert np.allclose(luders_conditional_state(rho, f).matrix, f)
    with pytest.raises(NullEventError):
        luders_conditional_state(DensityState.pure([0, 1]), f)


def test_null_event_threshold_is_1e_14():
    f = np.diag([1.0, 0.0])
    tiny = DensityState(np.diag([1e-13, 1 - 1e-13]))
    luders_conditional_state(tiny, f)
    with pytest.raises(NullEventError):
        luders_conditional_state(DensityState(np.diag([1e-15, 1 - 1e-15])), f)


@given(seeds, st.integers(2, 6))
def test_commuting_conditionals_agree(seed, dim):
    rng = np.random.default_rng(seed)
    e, f = random_commuting_pair(rng, dim)
    rho = random_state(rng, dim)
    rep = commuting_equivalence_check(rho, e, f)
    assert rep.commuting
    assert rep.equal
    assert abs(rep.luders - rep.meet) < 1e-10


def test_noncommuting_conditionals_differ():
    # E, F lines at 45 degrees in C^2, rho = F. Luders gives cos^2 = 1/2; the meet is 0.
    e = Projection.onto([1, 0])
    f = Projection.onto(np.array([1, 1]) / math.sqrt(2))
    rho = DensityState(f.matrix)
    assert conditional_prob_luders(rho, e, f) == pytest.approx(0.5, abs=1e-14)
    assert conditional_prob_meet(rho, e, f) == pytest.approx(0.0, abs=1e-14)
    rep = commuting_equivalence_check(rho, e, f)
    assert not rep.commuting and not rep.equal


def test_nonadditivity_witness_value():
    z = np.array([1, 1]) / math.sqrt(2)
    rep = nonadditivity_witness([1, 0], [0, 1], z, Projection(np.eye(2)), DensityState.maximally_mixed(2))
    # lhs = tr(rho P_z) = 1/2, both meets with z vanish.
    assert rep.lhs == pytest.approx(0.5, abs=1e-12)
    assert rep.rhs == pytest.approx(0.0, abs=1e-12)
    assert rep.gap >= 0.4


@pytest.mark.parametrize("z, msg", [([1, 0, 1], "span"), ([2, 0, 0], "coincides")])
def test_witness_preconditions(z, msg):
    f = Projection(np.eye(3))
    with pytest.raises(ValueError, match=msg):
        nonadditivity_witness([1, 0, 0], [0, 1, 0], z, f, DensityState.maximally_mixed(3))


@given(seeds, st.floats(-5, 5))
def test_hermitian_expm_matches_scipy(seed, t):
    rng = np.random.default_rng(seed)
    h = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    h = (h + h.conj().T) / 2
    assert np.allclose(hermitian_expm(h, t), scipy.linalg.expm(-1j * t * h), atol=1e-10)


def test_swap_reduction_returns_environment_state():
    # exp(-i pi/2 SWAP) = -i SWAP, so the system ends in the environment's state.
    rng = np.random.default_rng(1)
    rho, env = random_state(rng, 2), random_state(rng, 2)
    out = reduction_channel(ReductionSpec(SWAP, env, math.pi / 2), rho)
    assert np.allclose(out.matrix, env.matrix, atol=1e-12)
    same = reduction_channel(ReductionSpec(SWAP, env, 0.0), rho)
    assert np.allclose(same.matrix, rho.matrix, atol=1e-14)


@given(seeds, st.floats(0, 10))
def test_reduction_preserves_trace_and_positivity(seed, t):
    rng = np.random.default_rng(seed)
    h = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    h = (h + h.conj().T) / 2
    out = reduction_channel(ReductionSpec(h, random_state(rng, 2), t), random_state(rng, 2))
    assert abs(np.trace(out.matrix) - 1) < 1e-10
    assert np.min(np.linalg.eigvalsh(out.matrix)) > -1e-10


def test_reduction_against_scipy_pipeline():
    rng = np.random.default_rng(7)
    h = rng.normal(size=(4, 4))
    h = h + h.T
    env, rho = random_state(rng, 2), random_state(rng, 2)
    u = scipy.linalg.expm(-1.3j * h)
    full = u @ np.kron(rho.matrix, env.matrix) @ u.conj().T
    expected = np.einsum("ikjk->ij", full.reshape(2, 2, 2, 2))
    got = reduction_channel(ReductionSpec(h, env, 1.3), rho)
    assert np.allclose(got.matrix, expected, atol=1e-12)


def test_non_hermitian_hamiltonian_rejected():
    with pytest.raises(ValueError, match="Hermitian"):
        ReductionSpec(np.array([[0, 1], [0, 0]]), DensityState.maximally_mixed(1), 1.0)


def test_annihilation_lowers_number_states():
    a = annihilation(4).matrix
    assert np.allclose(a @ np.eye(4)[:, 3], math.sqrt(3) * np.eye(4)[:, 2])


@pytest.mark.parametrize("gain", [1.0, 1.5, 2.0, 3.7, 10.0])
@pytest.mark.parametrize("cutoff", [2, 3, 6, 10])
def test_amplifier_ccr_on_safe_subspace(gain, cutoff):
    c = amplifier_operator(gain, cutoff).matrix
    comm = c @ c.conj().T - c.conj().T @ c
    safe = amplifier_safe_indices(cutoff)
    block = comm[np.ix_(safe, safe)]
    # Rounding of sqrt(G)^2 and sqrt(G-1)^2 is the only error left.
    assert np.max(np.abs(block - np.eye(len(safe)))) < 1e-12


def test_amplifier_ccr_breaks_at_truncation_edge():
    c = amplifier_operator(2.0, 4).matrix
    comm = c @ c.conj().T - c.conj().T @ c
    assert np.max(np.abs(comm - np.eye(16))) > 1.0


@pytest.mark.parametrize("gain, cutoff", [(0.5, 4), (2.0, 1)])
def test_amplifier_argument_errors(gain, cutoff):
    with pytest.raises(ValueError):
        amplifier_operator(gain, cutoff)


def test_kraus_channel_from_projections_is_dephasing():
    ch = KrausChannel.from_projections([np.diag([1.0, 0]), np.diag([0, 1.0])])
    rho = DensityState.pure(np.array([1, 1]) / math.sqrt(2))
    assert np.allclose(ch(rho).matrix, np.eye(2) / 2)


def test_partial_trace_of_tensor_channel_output():
    rho = DensityState.maximally_mixed(2)
    assert np.allclose(partial_trace(DensityState(tensor(rho.op, rho.op)), 1).matrix, rho.matrix)
