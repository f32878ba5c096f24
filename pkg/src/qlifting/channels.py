"""State-change maps: Kraus channels, Lüders conditioning, conditional
probability candidates, open-system reduction and the amplifier mode.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .operators import (
    DensityState,
    Operator,
    Projection,
    as_operator,
    commutator_norm,
    expectation,
    identity,
    join_projection,
    meet_projection,
    partial_trace,
    projector,
    tensor,
)

#: Denominators below this are treated as conditioning on a null event.
NULL_EVENT_TOL = 1e-14
KRAUS_TOL = 1e-9


class NullEventError(ValueError):
    """Raised when conditioning on an event of (numerically) zero probability."""


class KrausChannel:
    """Channel ``rho -> sum_i K_i rho K_i^†``.

    Trace-preserving when ``sum K_i^† K_i = I``. Sub-normalized families
    (``sum K_i^† K_i <= I``) are accepted and their outputs renormalized.
    """

    def __init__(self, kraus_ops: Sequence, tol: float = KRAUS_TOL):
        ops = tuple(as_operator(k) for k in kraus_ops)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        if len({k.size for k in ops}) != 1:
            raise ValueError("Kraus operators must share one dimension")
        gram = sum(k.matrix.conj().T @ k.matrix for k in ops)
        eye = np.eye(ops[0].size)
        self.kraus_ops = ops
        self.completeness_error = float(np.max(np.abs(gram - eye)))
        if self.completeness_error < tol:
            self.trace_preserving = True
        elif np.min(np.linalg.eigvalsh(eye - (gram + gram.conj().T) / 2)) >= -tol:
            self.trace_preserving = False
        else:
            raise ValueError("sum of K^dagger K exceeds the identity; not a channel")

    @property
    def dims(self) -> tuple[int, ...]:
        return self.kraus_ops[0].dims

    @classmethod
    def from_projections(cls, projections: Sequence) -> "KrausChannel":
        return cls([as_operator(p) for p in projections])

    def __call__(self, rho: DensityState) -> DensityState:
        return apply_kraus(self, rho)

    def __repr__(self):
        kind = "trace-preserving" if self.trace_preserving else "sub-normalized"
        return f"KrausChannel(n={len(self.kraus_ops)}, dims={self.dims}, {kind})"


def apply_kraus(ch: KrausChannel, rho: DensityState) -> DensityState:
    if rho.size != ch.kraus_ops[0].size:
        raise ValueError(f"channel acts on {ch.dims}, state has dims {rho.dims}")
    r = rho.matrix
    out = sum(k.matrix @ r @ k.matrix.conj().T for k in ch.kraus_ops)
    if ch.trace_preserving:
        return DensityState(out, rho.dims, tol=KRAUS_TOL)
    tr = np.trace(out).real
    if tr <= NULL_EVENT_TOL:
        raise NullEventError("annihilating channel: output trace vanishes")
    return DensityState(out / tr, rho.dims, tol=KRAUS_TOL)


def luders_conditional_state(rho: DensityState, f) -> DensityState:
    """Conditioned state ``F rho F^† / tr(F rho F^†)``.

    ``F`` may be any operator, not just a projection.
    """
    f = as_operator(f)
    out = f.matrix @ rho.matrix @ f.matrix.conj().T
    tr = np.trace(out).real
    if tr <= NULL_EVENT_TOL:
        raise NullEventError("conditioning on null event")
    return DensityState(out / tr, rho.dims, tol=1e-9)


def _denominator(rho, f) -> float:
    p = expectation(rho, f)
    p = p.real if isinstance(p, complex) else p
    if p <= NULL_EVENT_TOL:
        raise NullEventError("conditioning on null event")
    return p


def conditional_prob_luders(rho: DensityState, e, f) -> float:
    """``tr(rho F E F) / tr(rho F)``, the probability of ``e`` after Lüders conditioning on ``f``."""
    e, f = as_operator(e), as_operator(f)
    den = _denominator(rho, f)
    num = expectation(rho, f @ e @ f)
    return float(np.real(num)) / den


def conditional_prob_meet(rho: DensityState, e: Projection, f: Projection) -> float:
    """``tr(rho (e ∧ f)) / tr(rho f)``."""
    e = e if isinstance(e, Projection) else Projection(e)
    f = f if isinstance(f, Projection) else Projection(f)
    den = _denominator(rho, f)
    return expectation(rho, meet_projection(e, f)) / den


@dataclass(frozen=True)
class EquivalenceReport:
    luders: float
    meet: float
    difference: float
    commuting: bool

    @property
    def equal(self) -> bool:
        return self.difference < 1e-10


def commuting_equivalence_check(rho: DensityState, e: Projection, f: Projection) -> EquivalenceReport:
    """Evaluate both conditional-probability candidates side by side.

    For commuting ``e, f`` they must coincide; an ``AssertionError`` signals a
    numerical defect if they do not.
    """
    lu = conditional_prob_luders(rho, e, f)
    me = conditional_prob_meet(rho, e, f)
    commuting = commutator_norm(e, f) < 1e-10
    diff = abs(lu - me)
    if commuting and diff >= 1e-10:
        raise AssertionError(f"commuting pair disagrees: luders={lu}, meet={me}")
    return EquivalenceReport(lu, me, diff, commuting)


@dataclass(frozen=True)
class AdditivityReport:
    """``K((Px ∨ Py) ∧ Pz | F)`` against ``K(Px ∧ Pz | F) + K(Py ∧ Pz | F)``."""

    lhs: float
    rhs: float

    @property
    def gap(self) -> float:
        return self.lhs - self.rhs


def nonadditivity_witness(x, y, z, f: Projection, rho: DensityState, tol: float = 1e-10) -> AdditivityReport:
    """Show that ``K(. | f) = tr(rho (. ∧ f)) / tr(rho f)`` is not additive.

    ``z`` must lie in ``span{x, y}`` without being parallel to ``x`` or ``y``.
    """
    x, y, z = (np.asarray(v, dtype=complex).ravel() for v in (x, y, z))
    x, y, z = (v / np.linalg.norm(v) for v in (x, y, z))
    span = Projection.onto(np.column_stack([x, y]))
    if np.linalg.norm(z - span.matrix @ z) > tol:
        raise ValueError("precondition: z is not in span{x, y}")
    for v, name in ((x, "x"), (y, "y")):
        if abs(abs(np.vdot(v, z)) - 1.0) < tol:
            raise ValueError(f"precondition: z coincides with {name} up to phase")
    px, py, pz = (Projection(projector(v)) for v in (x, y, z))

    def k(e):
        return conditional_prob_meet(rho, e, f)

    lhs = k(meet_projection(join_projection(px, py), pz))
    rhs = k(meet_projection(px, pz)) + k(meet_projection(py, pz))
    return AdditivityReport(lhs, rhs)


# --- open systems ----------------------------------------------------------------


def hermitian_expm(h, t: float) -> np.ndarray:
    """``exp(-i t H)`` for Hermitian ``H`` via its eigendecomposition."""
    m = as_operator(h).matrix
    w, v = np.linalg.eigh(m)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


@dataclass(frozen=True)
class ReductionSpec:
    """Total Hamiltonian on H ⊗ K, environment state on K, and interaction time."""

    hamiltonian: Operator
    environment_state: DensityState
    time: float

    def __post_init__(self):
        h = as_operator(self.hamiltonian)
        if not h.is_hermitian():
            raise ValueError("hamiltonian must be Hermitian")
        object.__setattr__(self, "hamiltonian", h)


def reduction_channel(spec: ReductionSpec, rho1: DensityState) -> DensityState:
    """``tr_K[ U_t (rho1 ⊗ rho2) U_t^† ]`` with ``U_t = exp(-i t H)``."""
    joint = tensor(rho1.op, spec.environment_state.op)
    h = spec.hamiltonian
    if h.size != joint.size:
        raise ValueError(f"hamiltonian side {h.size} does not match {joint.dims}")
    u = hermitian_expm(h, spec.time)
    theta = DensityState(u @ joint.matrix @ u.conj().T, joint.dims, tol=1e-9)
    return partial_trace(theta, 0)


# --- amplifier ---------------------------------------------------------------------


def annihilation(cutoff: int) -> Operator:
    """Truncated annihilation operator on span{|0>, ..., |cutoff-1>}."""
    return Operator(np.diag(np.sqrt(np.arange(1, cutoff)), k=1).astype(complex))


def amplifier_operator(gain: float, cutoff: int) -> Operator:
    """Two-mode amplifier ``c = sqrt(G) a ⊗ I + sqrt(G-1) I ⊗ b^†`` on truncated Fock ⊗ Fock.

    The commutator ``[c, c^†]`` equals the identity only on basis states with
    both photon numbers below ``cutoff - 1``; see :func:`amplifier_safe_indices`.
    """
    if gain < 1:
        raise ValueError(f"amplifier gain must be >= 1, got {gain}")
    if cutoff < 2:
        raise ValueError("cutoff must be >= 2")
    a = annihilation(cutoff)
    eye = identity(cutoff)
    return np.sqrt(gain) * tensor(a, eye) + np.sqrt(gain - 1.0) * tensor(eye, a.H)


def amplifier_safe_indices(cutoff: int) -> np.ndarray:
    """Flat indices of ``|m, n>`` with ``m, n < cutoff - 1``."""
    m, n = np.divmod(np.arange(cutoff * cutoff), cutoff)
    return np.flatnonzero((m < cutoff - 1) & (n < cutoff - 1))
