"""Adaptive dynamics: ``rho => E*rho => tr_K E*rho`` and joint-like probabilities."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .liftings import Lifting
from .operators import (
    DensityState,
    EventSystem,
    Operator,
    as_operator,
    commutator_norm,
    expectation,
    partial_trace,
    psd_sqrt,
    tensor,
)

#: Negative probabilities above this are rounding noise and get clamped.
NEGATIVE_CLAMP = 1e-12

Combiner = Callable[[Operator, Operator], Operator]


def _clamp(p: float) -> float:
    if p < -NEGATIVE_CLAMP:
        raise ValueError(f"negative probability {p:.3g}: invalid lifting or combiner")
    return max(p, 0.0)


@dataclass(frozen=True, eq=False)
class AdaptiveScenario:
    """Initial state, context lifting and the two event systems.

    ``system_b`` (effects ``E_j``) is read on the first output factor and
    ``system_a`` (effects ``F_k``) on the second, so that the default combiner
    is ``E_j ⊗ F_k``.
    """

    initial_state: DensityState
    lifting: Lifting
    system_a: EventSystem
    system_b: EventSystem
    combiner: Combiner = field(default=tensor)

    def __post_init__(self):
        if self.lifting.input_dim != self.initial_state.size:
            raise ValueError("lifting input does not match the initial state")
        if self.combiner is tensor:
            d1, d2 = self.lifting.out_dims
            if self.system_b.dim != d1 or self.system_a.dim != d2:
                raise ValueError(
                    f"event systems ({self.system_b.dim}, {self.system_a.dim}) do not match "
                    f"lifting output factors {self.lifting.out_dims}")

    @property
    def uses_tensor(self) -> bool:
        return self.combiner is tensor


def adaptive_evolve(sc: AdaptiveScenario) -> tuple[DensityState, DensityState]:
    """Return the lifted state and its reduction to the first factor."""
    lifted = sc.lifting(sc.initial_state)
    return lifted, partial_trace(lifted, 0)


def joint_like_probability(sc: AdaptiveScenario, j: int, k: int, lifted: DensityState | None = None) -> float:
    """``tr((E_j ⊡ F_k) E*rho)`` for outcome ``b_j`` of B and ``a_k`` of A."""
    lifted = lifted if lifted is not None else sc.lifting(sc.initial_state)
    eff = as_operator(sc.combiner(sc.system_b.effects[j], sc.system_a.effects[k]))
    if eff.size != lifted.size:
        raise ValueError(f"combiner output has side {eff.size}, lifted state {lifted.size}")
    return _clamp(float(np.real(expectation(lifted, eff))))


@dataclass(frozen=True)
class JointTable:
    """``p[j, k]`` with rows labeled by B outcomes and columns by A outcomes."""

    row_labels: tuple
    col_labels: tuple
    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=float)
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def total(self) -> float:
        return float(self.entries.sum())

    def row_sums(self) -> np.ndarray:
        return self.entries.sum(axis=1)

    def col_sums(self) -> np.ndarray:
        return self.entries.sum(axis=0)

    def __getitem__(self, jk):
        return float(self.entries[jk])


def joint_like_table(sc: AdaptiveScenario) -> JointTable:
    lifted = sc.lifting(sc.initial_state)
    p = [[joint_like_probability(sc, j, k, lifted) for k in range(len(sc.system_a))]
         for j in range(len(sc.system_b))]
    return JointTable(sc.system_b.labels, sc.system_a.labels, np.array(p))


def sequential_joint_table(rho: DensityState, first: EventSystem, second: EventSystem) -> JointTable:
    """Measure ``first`` (F_k), then ``second`` (E_j): ``p[j, k] = tr(E_j √F_k rho √F_k)``.

    For projective ``F_k`` this is ``tr(rho F_k E_j F_k)``.
    """
    r = rho.matrix
    roots = [psd_sqrt(f) for f in first.effects]
    p = np.empty((len(second), len(first)))
    for k, s in enumerate(roots):
        post = s @ r @ s
        for j, e in enumerate(second.effects):
            p[j, k] = _clamp(float(np.real(np.einsum("ij,ji->", post, e.matrix))))
    return JointTable(second.labels, first.labels, p)


@dataclass(frozen=True)
class SequentialLaws:
    total_error: float
    column_error: float
    row_mismatch: np.ndarray
    max_commutator: float


def sequential_law_check(rho: DensityState, first: EventSystem, second: EventSystem) -> SequentialLaws:
    """Deviation of a sequential table from normalization, the first-stage
    marginals, and (reported only) the second-stage marginals."""
    table = sequential_joint_table(rho, first, second)
    p_first = np.array([expectation(rho, f) for f in first.effects])
    p_second = np.array([expectation(rho, e) for e in second.effects])
    comm = max(commutator_norm(e, f) for e in second.effects for f in first.effects)
    return SequentialLaws(
        total_error=abs(table.total - 1.0),
        column_error=float(np.max(np.abs(table.col_sums() - p_first))),
        row_mismatch=table.row_sums() - p_second,
        max_commutator=comm,
    )


@dataclass(frozen=True)
class GapReport:
    """``lhs`` against the classical ``rhs = Σ_k conditional_k · prior_k``."""

    lhs: float
    rhs: float

    @property
    def gap(self) -> float:
        return self.lhs - self.rhs


def total_probability_gap(target: float, conditionals: Sequence[float], priors: Sequence[float]) -> GapReport:
    priors = np.asarray(priors, dtype=float)
    conditionals = np.asarray(conditionals, dtype=float)
    if priors.shape != conditionals.shape:
        raise ValueError("need one conditional per prior")
    if np.any(priors < 0) or abs(priors.sum() - 1.0) > 1e-9:
        raise ValueError(f"priors must be nonnegative and sum to 1 (sum={priors.sum():.12g})")
    return GapReport(float(target), float(conditionals @ priors))
