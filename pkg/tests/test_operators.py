import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qlifting import (
    DensityState,
    EventSystem,
    Operator,
    Projection,
    expectation,
    join_projection,
    meet_projection,
    partial_trace,
    tensor,
    validate,
)
from qlifting.checks import random_projection, random_state, random_unitary
from qlifting.operators import commutator_norm, identity, projector, psd_sqrt

seeds = st.integers(0, 2**32 - 1)


def loop_kron(a, b):
    """Kronecker product written out index by index."""
    n, m = a.shape[0], b.shape[0]
    out = np.zeros((n * m, n * m), dtype=complex)
    for i, j, k, l in itertools.product(range(n), range(n), range(m), range(m)):
        out[i * m + k, j * m + l] = a[i, j] * b[k, l]
    return out


def loop_partial_trace(m, d1, d2, keep):
    if keep == 0:
        out = np.zeros((d1, d1), dtype=complex)
        for i, j, k in itertools.product(range(d1), range(d1), range(d2)):
            out[i, j] += m[i * d2 + k, j * d2 + k]
    else:
        out = np.zeros((d2, d2), dtype=complex)
        for k, l, i in itertools.product(range(d2), range(d2), range(d1)):
            out[k, l] += m[i * d2 + k, i * d2 + l]
    return out


def test_tensor_matches_explicit_4x4():
    a = np.array([[1, 2j], [3, 4]])
    b = np.array([[0, 1], [1, -1j]])
    expected = np.array([
        [0, 1, 0, 2j],
        [1, -1j, 2j, 2],
        [0, 3, 0, 4],
        [3, -3j, 4, -4j],
    ])
    t = tensor(a, b)
    assert t.dims == (2, 2)
    assert np.array_equal(t.matrix, expected)


@given(seeds, st.integers(1, 3), st.integers(1, 3), st.integers(1, 3))
def test_tensor_is_associative(seed, d1, d2, d3):
    rng = np.random.default_rng(seed)
    a, b, c = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) for d in (d1, d2, d3))
    left, right = tensor(tensor(a, b), c), tensor(a, tensor(b, c))
    assert np.allclose(left.matrix, right.matrix)
    assert np.allclose(left.matrix, loop_kron(loop_kron(a, b), c))


@given(seeds, st.integers(1, 4), st.integers(1, 4), st.sampled_from([0, 1]))
def test_partial_trace_matches_loop_oracle(seed, d1, d2, keep):
    rng = np.random.default_rng(seed)
    rho = DensityState(random_state(rng, d1 * d2).matrix, (d1, d2))
    got = partial_trace(rho, keep)
    assert isinstance(got, DensityState)
    assert np.allclose(got.matrix, loop_partial_trace(rho.matrix, d1, d2, keep), atol=1e-12)


@given(seeds, st.integers(1, 4), st.integers(1, 4))
def test_partial_trace_of_product_returns_factor(seed, d1, d2):
    rng = np.random.default_rng(seed)
    r1, r2 = random_state(rng, d1), random_state(rng, d2)
    joint = DensityState(tensor(r1.op, r2.op))
    assert np.allclose(partial_trace(joint, 0).matrix, r1.matrix, atol=1e-12)
    assert np.allclose(partial_trace(joint, 1).matrix, r2.matrix, atol=1e-12)


def test_partial_trace_three_factors_keeps_pair():
    rng = np.random.default_rng(3)
    r = [random_state(rng, d) for d in (2, 3, 2)]
    joint = DensityState(tensor(r[0].op, r[1].op, r[2].op))
    kept = partial_trace(joint, [0, 2])
    assert kept.dims == (2, 2)
    assert np.allclose(kept.matrix, np.kron(r[0].matrix, r[2].matrix))


def test_partial_trace_rejects_bad_factor():
    with pytest.raises(ValueError):
        partial_trace(DensityState.maximally_mixed((2, 2)), 2)


@pytest.mark.parametrize("matrix, failing", [
    (np.array([[0.5, 0.1], [0.2, 0.5]]), "hermitian"),
    (np.diag([1.2, -0.2]), "positive"),
    (np.diag([0.6, 0.6]), "unit_trace"),
])
def test_invalid_states_rejected_with_named_invariant(matrix, failing):
    with pytest.raises(ValueError, match=failing.replace("_", ".")):
        DensityState(matrix)
    report = validate(matrix)
    assert not report.ok
    assert not report[failing].passed


def test_state_tolerance_is_1e_10():
    ok = np.diag([0.5 + 5e-11, 0.5])
    DensityState(ok)
    with pytest.raises(ValueError):
        DensityState(np.diag([0.5 + 5e-10, 0.5]))


def test_renormalize_option():
    s = DensityState(np.diag([2.0, 2.0]), renormalize=True)
    assert np.allclose(s.matrix, np.eye(2) / 2)


def test_states_are_immutable():
    s = DensityState.maximally_mixed(2)
    with pytest.raises(ValueError):
        s.matrix[0, 0] = 1.0


def test_pure_state_purity():
    s = DensityState.pure([1, 1j])
    assert s.purity == pytest.approx(1.0)
    assert DensityState.maximally_mixed(4).purity == pytest.approx(0.25)


def test_validate_povm_and_event_system():
    e = EventSystem.computational(3)
    assert validate(e).ok
    bad = [np.diag([1.0, 0.0]), np.diag([0.0, 0.5])]
    report = validate(bad)
    assert not report["completeness"].passed
    with pytest.raises(ValueError, match="completeness"):
        EventSystem(("a", "b"), tuple(bad))


def test_expectation_real_for_hermitian():
    rho = DensityState.pure([1, 0])
    val = expectation(rho, np.diag([0.3, 0.7]))
    assert isinstance(val, float)
    assert val == pytest.approx(0.3)


@given(seeds, st.integers(2, 6))
def test_lattice_order_and_idempotence(seed, dim):
    rng = np.random.default_rng(seed)
    e, f = random_projection(rng, dim), random_projection(rng, dim)
    m, j = meet_projection(e, f), join_projection(e, f)
    for p in (m, j):
        assert np.allclose(p.matrix @ p.matrix, p.matrix, atol=1e-9)
    for lo, hi in ((m, e), (m, f), (e, j), (f, j)):
        assert np.min(np.linalg.eigvalsh(hi.matrix - lo.matrix)) > -1e-9
    assert meet_projection(e, e).allclose(e, 1e-9)
    assert join_projection(e, e).allclose(e, 1e-9)
    assert meet_projection(e, f).allclose(meet_projection(f, e), 1e-9)


@given(seeds, st.integers(2, 6))
def test_meet_matches_alternating_projection_limit(seed, dim):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(0, dim))
    u = random_unitary(rng, dim)
    # Extra directions orthogonal to the common part and to each other converge in one step.
    rest = u[:, k:]
    split = int(rng.integers(0, rest.shape[1] + 1))
    e = Projection.onto(np.hstack([u[:, :k], rest[:, :split]]), dim)
    f = Projection.onto(np.hstack([u[:, :k], rest[:, split:][:, :1]]), dim) if split < rest.shape[1] \
        else Projection.onto(u[:, :k], dim)
    limit = np.linalg.matrix_power(e.matrix @ f.matrix @ e.matrix, 50)
    assert np.allclose(meet_projection(e, f).matrix, limit, atol=1e-9)


def test_meet_of_nonorthogonal_lines_oracle():
    # Lines at 60 degrees in C^2: meet is 0, join is the identity.
    x = Projection.onto([1, 0])
    y = Projection.onto([0.5, np.sqrt(3) / 2])
    assert meet_projection(x, y).rank == 0
    assert join_projection(x, y).allclose(Projection(np.eye(2)))
    limit = np.linalg.matrix_power(x.matrix @ y.matrix @ x.matrix, 200)
    assert np.allclose(limit, 0, atol=1e-12)


def test_meet_of_planes_in_c3():
    e = Projection.onto(np.array([[1, 0], [0, 1], [0, 0]]).astype(float))
    f = Projection.onto(np.array([[0, 0], [1, 0], [0, 1]]).astype(float))
    assert meet_projection(e, f).allclose(projector([0, 1, 0]))
    assert join_projection(e, f).allclose(identity(3))


def test_operator_algebra():
    a = Operator([[0, 1], [0, 0]])
    assert np.array_equal((a @ a.H).matrix, np.diag([1, 0]))
    assert np.array_equal((2 * a + a - a).matrix, 2 * a.matrix)
    assert commutator_norm(a, a.H) == pytest.approx(1.0)


@given(seeds, st.integers(1, 5))
def test_psd_sqrt_squares_back(seed, dim):
    rho = random_state(np.random.default_rng(seed), dim)
    s = psd_sqrt(rho.matrix)
    assert np.allclose(s @ s, rho.matrix, atol=1e-12)
