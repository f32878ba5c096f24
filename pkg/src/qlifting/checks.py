"""Randomized invariant suites for every module, driven by one seed.

Each check returns a :class:`CheckResult`; ``run_all`` is what the ``check``
subcommand prints.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import case_studies as cs
from .adaptive import AdaptiveScenario, joint_like_table, sequential_law_check
from .channels import (
    KrausChannel,
    ReductionSpec,
    amplifier_operator,
    amplifier_safe_indices,
    apply_kraus,
    conditional_prob_luders,
    conditional_prob_meet,
    nonadditivity_witness,
    reduction_channel,
)
from .liftings import (
    beam_split,
    coherent_vector,
    compound_lifting,
    is_nondemolition,
    number_operator,
)
from .operators import (
    DensityState,
    EventSystem,
    Projection,
    join_projection,
    meet_projection,
    partial_trace,
    tensor,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    tolerance: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: worst={self.worst:.3e} tol={self.tolerance:.0e}"


# --- random generators ---------------------------------------------------------------


def random_state(rng: np.random.Generator, dim: int, rank: int | None = None) -> DensityState:
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return DensityState(m / np.trace(m).real)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_projection(rng: np.random.Generator, dim: int, rank: int | None = None) -> Projection:
    rank = rng.integers(0, dim + 1) if rank is None else rank
    u = random_unitary(rng, dim)[:, :rank]
    return Projection(u @ u.conj().T)


def random_commuting_pair(rng: np.random.Generator, dim: int) -> tuple[Projection, Projection]:
    """Two projections diagonal in one random basis, so they commute."""
    u = random_unitary(rng, dim)
    d1 = rng.integers(0, 2, dim)
    d2 = rng.integers(0, 2, dim)
    d2[rng.integers(dim)] = 1
    return (Projection(u @ np.diag(d1) @ u.conj().T), Projection(u @ np.diag(d2) @ u.conj().T))


def random_kraus(rng: np.random.Generator, dim: int, n: int) -> KrausChannel:
    """Trace-preserving channel from the columns of a random isometry."""
    u = random_unitary(rng, dim * n)[:, :dim]
    return KrausChannel([u[i * dim:(i + 1) * dim] for i in range(n)])


# --- suites ----------------------------------------------------------------------------


def check_partial_trace(rng, trials=50) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        d1, d2 = rng.integers(1, 5, 2)
        r1, r2 = random_state(rng, d1), random_state(rng, d2)
        joint = DensityState(tensor(r1.op, r2.op))
        worst = max(worst, np.max(np.abs(partial_trace(joint, 0).matrix - r1.matrix)))
    return CheckResult("operators: partial trace of product state", worst < 1e-12, worst, 1e-12)


def check_lattice(rng, trials=100) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        dim = int(rng.integers(2, 7))
        e, f = random_projection(rng, dim), random_projection(rng, dim)
        m, j = meet_projection(e, f), join_projection(e, f)
        # A <= B  iff  B - A is PSD
        for lo, hi in ((m, e), (m, f), (e, j), (f, j)):
            worst = max(worst, -np.min(np.linalg.eigvalsh(hi.matrix - lo.matrix)))
    return CheckResult("operators: meet/join lattice order", worst < 1e-9, worst, 1e-9)


def check_meet_vs_alternating(rng, trials=30) -> CheckResult:
    """Spectral meet against the limit of ``(e f e)^n``, n = 200.

    Pairs share a random common subspace; pairs whose largest non-unit
    principal cosine is too close to 1 for 200 iterations to converge are
    redrawn, since the oracle itself would be wrong there.
    """
    worst = 0.0
    done = 0
    while done < trials:
        dim = int(rng.integers(2, 7))
        k = int(rng.integers(0, dim))
        u = random_unitary(rng, dim)
        common = u[:, :k]
        extra_e = rng.normal(size=(dim, int(rng.integers(0, dim - k + 1))))
        extra_f = rng.normal(size=(dim, int(rng.integers(0, dim - k + 1))))
        e = Projection.onto(np.hstack([common, extra_e]))
        f = Projection.onto(np.hstack([common, extra_f]))
        cosines = np.linalg.svd(e.range_basis().conj().T @ f.range_basis(), compute_uv=False)
        slow = cosines[cosines < 1 - 1e-8]
        if slow.size and slow.max() ** 400 > 1e-9:
            continue
        limit = np.linalg.matrix_power(e.matrix @ f.matrix @ e.matrix, 200)
        worst = max(worst, np.max(np.abs(limit - meet_projection(e, f).matrix)))
        done += 1
    return CheckResult("operators: meet equals lim (EFE)^n", worst < 1e-6, worst, 1e-6)


def check_kraus(rng, trials=100) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        dim = int(rng.integers(1, 5))
        ch = random_kraus(rng, dim, int(rng.integers(1, 4)))
        out = apply_kraus(ch, random_state(rng, dim))
        worst = max(worst, abs(np.trace(out.matrix) - 1), -np.min(np.linalg.eigvalsh(out.matrix)))
    return CheckResult("channels: Kraus trace and positivity", worst < 1e-10, worst, 1e-10)


def check_commuting_conditionals(rng, trials=100) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        dim = int(rng.integers(2, 7))
        e, f = random_commuting_pair(rng, dim)
        rho = random_state(rng, dim)
        worst = max(worst, abs(conditional_prob_luders(rho, e, f) - conditional_prob_meet(rho, e, f)))
    return CheckResult("channels: commuting Luders == meet conditional", worst < 1e-10, worst, 1e-10)


def check_witness(rng) -> CheckResult:
    z = np.array([1.0, 1.0]) / math.sqrt(2)
    rep = nonadditivity_witness([1, 0], [0, 1], z, Projection(np.eye(2)), DensityState.maximally_mixed(2))
    return CheckResult("channels: non-additivity witness gap >= 0.4", rep.gap >= 0.4, rep.gap, 0.4)


def check_reduction(rng, trials=20) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        h = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        h = (h + h.conj().T) / 2
        spec = ReductionSpec(h, random_state(rng, 2), float(rng.uniform(0, 5)))
        rho = random_state(rng, 2)
        worst = max(worst, abs(np.trace(reduction_channel(spec, rho).matrix) - 1))
        still = reduction_channel(ReductionSpec(h, spec.environment_state, 0.0), rho)
        worst = max(worst, np.max(np.abs(still.matrix - rho.matrix)))
    return CheckResult("channels: reduction trace / t=0 identity", worst < 1e-10, worst, 1e-10)


def check_amplifier(rng) -> CheckResult:
    worst = 0.0
    for gain in (1.0, 1.5, 2.0, 3.7):
        for n in (2, 5, 8):
            c = amplifier_operator(gain, n).matrix
            comm = c @ c.conj().T - c.conj().T @ c
            idx = amplifier_safe_indices(n)
            block = comm[np.ix_(idx, idx)]
            worst = max(worst, np.max(np.abs(block - np.eye(len(idx)))) if len(idx) else 0.0)
    return CheckResult("channels: amplifier CCR on safe subspace", worst < 1e-12, worst, 1e-12)


def check_compound_nondemolition(rng, trials=50) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        dim = int(rng.integers(1, 5))
        ch = random_kraus(rng, dim, 2)
        lift = compound_lifting(ch, input_dim=dim)
        worst = max(worst, is_nondemolition(lift, random_state(rng, dim)).deviation)
    return CheckResult("liftings: compound lifting is nondemolition", worst < 1e-10, worst, 1e-10)


def check_beam_splitter(rng, trials=20) -> CheckResult:
    worst = 0.0
    n = 40
    num = number_operator(n).matrix
    for _ in range(trials):
        th = complex(*rng.uniform(-1.4, 1.4, 2))
        th2 = complex(*rng.uniform(-1.4, 1.4, 2))
        phi = rng.uniform(0, 2 * np.pi)
        alpha, beta = math.cos(phi), math.sin(phi) * 1j
        out = beam_split(coherent_vector(th, n), alpha, beta)
        out2 = beam_split(coherent_vector(th2, n), alpha, beta)
        r1, r2 = out.reduced(0), out.reduced(1)
        mean = np.trace(r1 @ num).real + np.trace(r2 @ num).real
        worst = max(worst, abs(mean - abs(th) ** 2))
        marg = coherent_vector(alpha * th, n).coefficients
        worst = max(worst, abs(np.trace(r1 @ num).real - np.vdot(marg, num @ marg).real))
        overlap = np.vdot(out.vector, out2.vector)
        exact = np.exp(-(abs(th) ** 2 + abs(th2) ** 2) / 2 + np.conj(th) * th2)
        worst = max(worst, abs(overlap - exact))
    return CheckResult("liftings: beam splitter energy/marginal/isometry", worst < 1e-7, worst, 1e-7)


def check_sequential(rng, trials=100) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        dim = int(rng.integers(2, 5))
        first = EventSystem.projective(random_unitary(rng, dim))
        second = EventSystem.projective(random_unitary(rng, dim))
        laws = sequential_law_check(random_state(rng, dim), first, second)
        worst = max(worst, laws.total_error, laws.column_error)
    return CheckResult("adaptive: sequential table normalization and columns", worst < 1e-10, worst, 1e-10)


def check_joint_like(rng, trials=50) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        dim = int(rng.integers(2, 4))
        lift = compound_lifting(random_kraus(rng, dim, 2), input_dim=dim)
        sc = AdaptiveScenario(random_state(rng, dim), lift,
                              EventSystem.projective(random_unitary(rng, dim)),
                              EventSystem.projective(random_unitary(rng, dim)))
        worst = max(worst, abs(joint_like_table(sc).total - 1))
    return CheckResult("adaptive: joint-like probabilities sum to 1", worst < 1e-9, worst, 1e-9)


def check_tongue(rng, trials=100) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        l1, m1 = rng.uniform(0.01, 0.99, 2)
        p = cs.TongueParams.from_moduli(l1, 1 - l1, m1, 1 - m1)
        rep = cs.tongue_scenario(p)
        worst = max(worst, abs(rep.probabilities["P(C=1|after sugar)"] - cs.sweet_chocolate_closed_form(p)))
    return CheckResult("case_studies: tongue pipeline == closed form", worst < 1e-10, worst, 1e-10)


def check_lactose(rng, trials=100) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        pl, ppl, ppg = rng.uniform(0.01, 0.99, 3)
        kl, kg = rng.uniform(0.01, 2, 2) * np.exp(1j * rng.uniform(0, 2 * np.pi, 2))
        p = cs.LactoseParams.from_prior(pl, ppl, ppg, k_L=kl, k_G=kg)
        rep = cs.lactose_scenario(p)
        worst = max(worst, abs(rep.probabilities["P(+|L+G)"] - cs.activation_closed_form(p)))
    return CheckResult("case_studies: lactose pipeline == closed form", worst < 1e-10, worst, 1e-10)


def check_bayes(rng) -> CheckResult:
    worst = 0.0
    grid = np.round(np.arange(0.0, 1.01, 0.1), 10)
    for pa in grid[1:-1]:
        for pca in grid:
            for pcb in grid:
                if pca * pa + pcb * (1 - pa) == 0:
                    continue
                post = cs.bayes_update(cs.bayes_prediction_state(cs.BayesParams(pa, pca, pcb))).posterior_A
                worst = max(worst, abs(post - cs.classical_posterior(pa, pca, pcb)))
    return CheckResult("case_studies: quantum-like Bayes == classical Bayes", worst < 1e-12, worst, 1e-12)


def check_biased_bayes(rng, trials=50) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        pa, pca, pcb = rng.uniform(0.05, 0.95, 3)
        for v in (cs.mind_swap_bias(), cs.controlled_rotation_bias(rng.uniform(0, np.pi))):
            upd = cs.biased_bayes_update(cs.BayesParams(pa, pca, pcb, cs.bias_state(rng.uniform()), v))
            worst = max(worst, abs(upd.prior_delta_A), abs(sum(upd.joint.values()) - 1))
    return CheckResult("case_studies: biased prior preserved, table normalized", worst < 1e-10, worst, 1e-10)


def check_fit(rng, trials=30) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        pl, ppl, ppg = rng.uniform(0.05, 0.95, 3)
        r_true = float(rng.uniform(0.01, 5))
        p = cs.LactoseParams.from_prior(pl, ppl, ppg, k_L=r_true)
        target = cs.activation_closed_form(p)
        fit = cs.fit_preference_ratio(p.alpha, p.beta, ppl, ppg, target)
        for r in fit.roots:
            back = cs.activation_closed_form(cs.LactoseParams.from_prior(pl, ppl, ppg, k_L=r))
            worst = max(worst, abs(back - target))
    return CheckResult("case_studies: fitted ratio reproduces target", worst < 1e-9, worst, 1e-9)


SUITES: list[Callable] = [
    check_partial_trace, check_lattice, check_meet_vs_alternating,
    check_kraus, check_commuting_conditionals, check_witness, check_reduction, check_amplifier,
    check_compound_nondemolition, check_beam_splitter,
    check_sequential, check_joint_like,
    check_tongue, check_lactose, check_bayes, check_biased_bayes, check_fit,
]


def run_all(seed: int = 42) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    return [suite(rng) for suite in SUITES]
