"""Three contextual scenarios built on the adaptive pipeline.

* sweetness of chocolate after sugar (exchange-operator adaptation),
* lactose operon activity under a lactose/glucose mixture (preference operator),
* Bayesian updating with and without a psychological bias lifting.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .adaptive import AdaptiveScenario, joint_like_table, total_probability_gap
from .channels import NULL_EVENT_TOL, NullEventError, luders_conditional_state
from .liftings import Lifting
from .operators import (
    DensityState,
    EventSystem,
    Operator,
    expectation,
    identity,
    partial_trace,
    projector,
    tensor,
)
from .report import ScenarioReport

PIPELINE_TOL = 1e-10

E1 = projector([1, 0])
E2 = projector([0, 1])
EXCHANGE = Operator([[0, 1], [1, 0]])


def neutral_state() -> DensityState:
    """``|x0><x0|`` with ``x0 = (e1 + e2)/√2``."""
    return DensityState.pure(np.array([1.0, 1.0]) / math.sqrt(2))


def _unit_pair(a: complex, b: complex, name: str):
    if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > 1e-10:
        raise ValueError(f"{name}: squared moduli must sum to 1, got {abs(a) ** 2 + abs(b) ** 2:.12g}")


def _product_lifting(make_pair) -> Lifting:
    def apply(rho):
        first, second = make_pair(rho)
        return np.kron(first.matrix, second.matrix)
    return Lifting(apply, 2, (2, 2), "custom")


def _check_agreement(name: str, pipeline: float, closed: float):
    if abs(pipeline - closed) > PIPELINE_TOL:
        raise ArithmeticError(f"{name}: pipeline {pipeline!r} disagrees with closed form {closed!r}")


# --- tongue --------------------------------------------------------------------


@dataclass(frozen=True)
class TongueParams:
    """Diagonal sugar operator ``S = diag(λ1, λ2)`` and chocolate operator ``C = diag(μ1, μ2)``."""

    lambda1: complex
    lambda2: complex
    mu1: complex
    mu2: complex

    def __post_init__(self):
        _unit_pair(self.lambda1, self.lambda2, "sugar")
        _unit_pair(self.mu1, self.mu2, "chocolate")

    @classmethod
    def from_moduli(cls, lambda1_sq: float, lambda2_sq: float, mu1_sq: float, mu2_sq: float) -> "TongueParams":
        return cls(*(math.sqrt(x) for x in (lambda1_sq, lambda2_sq, mu1_sq, mu2_sq)))

    @property
    def sugar(self) -> Operator:
        return Operator(np.diag([self.lambda1, self.lambda2]))

    @property
    def chocolate(self) -> Operator:
        return Operator(np.diag([self.mu1, self.mu2]))


def sweet_chocolate_closed_form(p: TongueParams) -> float:
    l1, l2 = abs(p.lambda1) ** 2, abs(p.lambda2) ** 2
    m1, m2 = abs(p.mu1) ** 2, abs(p.mu2) ** 2
    return l2 * m1 / (l2 * m1 + l1 * m2)


def tongue_lifting(p: TongueParams, unread: bool = False) -> Lifting:
    """``rho -> Λ_S(rho) ⊗ Λ_C(X Λ_S(rho) X)`` with ``Λ_T(rho) = T^† rho T / tr``.

    ``unread`` replaces ``Λ_S(rho)`` by its dephased version; probabilities
    read in the sweet/non-sweet basis are unchanged.
    """
    s_dag, c_dag = p.sugar.H, p.chocolate.H

    def pair(rho):
        rho_s = luders_conditional_state(rho, s_dag)
        if unread:
            rho_s = DensityState(E1.matrix @ rho_s.matrix @ E1.matrix + E2.matrix @ rho_s.matrix @ E2.matrix)
        adapted = DensityState(EXCHANGE.matrix @ rho_s.matrix @ EXCHANGE.matrix)
        return rho_s, luders_conditional_state(adapted, c_dag)

    return _product_lifting(pair)


def tongue_adaptive_scenario(p: TongueParams, unread: bool = False) -> AdaptiveScenario:
    sugar_events = EventSystem(("S=1", "S=2"), (E1, E2))
    choc_events = EventSystem(("C=1", "C=2"), (E1, E2))
    return AdaptiveScenario(neutral_state(), tongue_lifting(p, unread), system_a=choc_events,
                            system_b=sugar_events)


def tongue_scenario(p: TongueParams, unread: bool = False) -> ScenarioReport:
    """Joint table ``P(S=j, C=k)`` and the sweet-chocolate probability.

    The law compares the adaptive sweet-chocolate probability (lhs) with the
    non-adaptive prediction ``Σ_j P(C=1) P(S=j)`` (rhs), which treats tasting
    chocolate as unaffected by the sugar.
    """
    table = joint_like_table(tongue_adaptive_scenario(p, unread))
    sweet = table[0, 0] + table[1, 0]
    closed = sweet_chocolate_closed_form(p)
    _check_agreement("tongue", sweet, closed)
    neutral = expectation(luders_conditional_state(neutral_state(), p.chocolate.H), E1)
    priors = table.row_sums()
    law = total_probability_gap(sweet, [neutral, neutral], priors)
    probs = {f"P(S={j + 1},C={k + 1})": table[j, k] for j in range(2) for k in range(2)}
    probs.update({
        "P(S=1)": float(priors[0]),
        "P(C=1|after sugar)": sweet,
        "P(C=1|after sugar) closed form": closed,
        "P(C=1|neutral)": neutral,
    })
    params = {
        "lambda1_sq": abs(p.lambda1) ** 2, "lambda2_sq": abs(p.lambda2) ** 2,
        "mu1_sq": abs(p.mu1) ** 2, "mu2_sq": abs(p.mu2) ** 2,
    }
    return ScenarioReport("tongue", params, probs, lhs=law.lhs, rhs=law.rhs)


# --- lactose operon ------------------------------------------------------------


@dataclass(frozen=True)
class LactoseParams:
    """Detection amplitudes ``(α, β)``, single-sugar activation data and preferences.

    ``phase_minus_L`` / ``phase_minus_G`` are the relative phases of the
    ``-`` entries of the activation operator against the ``+`` entries; both
    default to 0.
    """

    alpha: complex
    beta: complex
    p_plus_L: float
    p_plus_G: float
    k_L: complex = 1.0
    k_G: complex = 1.0
    phase_minus_L: float = 0.0
    phase_minus_G: float = 0.0

    def __post_init__(self):
        _unit_pair(self.alpha, self.beta, "detection")
        for name in ("p_plus_L", "p_plus_G"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    @classmethod
    def from_prior(cls, p_L: float, p_plus_L: float, p_plus_G: float, **kw) -> "LactoseParams":
        return cls(math.sqrt(p_L), math.sqrt(1.0 - p_L), p_plus_L, p_plus_G, **kw)

    @property
    def detection(self) -> Operator:
        return Operator(np.diag([self.alpha, self.beta]))

    @property
    def preference(self) -> Operator:
        return Operator(np.diag([self.k_L, self.k_G]))

    def _columns(self):
        sL = (math.sqrt(self.p_plus_L), math.sqrt(1 - self.p_plus_L) * np.exp(1j * self.phase_minus_L))
        sG = (math.sqrt(self.p_plus_G), math.sqrt(1 - self.p_plus_G) * np.exp(1j * self.phase_minus_G))
        return sL, sG

    @property
    def activation(self) -> Operator:
        """``Q = [[√P(+|L), √P(+|G)], [√P(-|L), √P(-|G)]] · diag(k_L, k_G)``."""
        sL, sG = self._columns()
        return Operator(np.array([[sL[0], sG[0]], [sL[1], sG[1]]]) @ self.preference.matrix)


def activation_closed_form(p: LactoseParams) -> float:
    """``|√P(+|L) k_L α + √P(+|G) k_G β|²`` over the sum with the ``-`` row."""
    sL, sG = p._columns()
    plus = abs(sL[0] * p.k_L * p.alpha + sG[0] * p.k_G * p.beta) ** 2
    minus = abs(sL[1] * p.k_L * p.alpha + sG[1] * p.k_G * p.beta) ** 2
    if plus + minus <= NULL_EVENT_TOL:
        raise NullEventError("activation operator annihilates the detection state")
    return float(plus / (plus + minus))


def lactose_lifting(p: LactoseParams) -> Lifting:
    """``rho -> Λ_Q(Λ_D(rho)) ⊗ Λ_D(rho)`` with ``Λ_T(rho) = T rho T^† / tr``."""
    d, q = p.detection, p.activation

    def pair(rho):
        detected = luders_conditional_state(rho, d)
        return luders_conditional_state(detected, q), detected

    return _product_lifting(pair)


def lactose_adaptive_scenario(p: LactoseParams) -> AdaptiveScenario:
    activation = EventSystem(("+", "-"), (E1, E2))
    detection = EventSystem(("L", "G"), (E1, E2))
    return AdaptiveScenario(neutral_state(), lactose_lifting(p), system_a=detection, system_b=activation)


def lactose_scenario(p: LactoseParams) -> ScenarioReport:
    table = joint_like_table(lactose_adaptive_scenario(p))
    active = table[0, 0] + table[0, 1]
    closed = activation_closed_form(p)
    _check_agreement("lactose", active, closed)
    p_L, p_G = table.col_sums()
    law = total_probability_gap(active, [p.p_plus_L, p.p_plus_G], [p_L, p_G])
    probs = {
        "P(+&L)": table[0, 0], "P(-&L)": table[1, 0],
        "P(+&G)": table[0, 1], "P(-&G)": table[1, 1],
        "P(L)": float(p_L), "P(G)": float(p_G),
        "P(+|L+G)": active,
        "P(+|L+G) closed form": closed,
    }
    params = {
        "p_L": abs(p.alpha) ** 2,
        "p_plus_L": p.p_plus_L, "p_plus_G": p.p_plus_G,
        "k_L.re": complex(p.k_L).real, "k_L.im": complex(p.k_L).imag,
        "k_G.re": complex(p.k_G).real, "k_G.im": complex(p.k_G).imag,
    }
    if abs(p.k_G) > 0:
        params["|k_L|/|k_G|"] = abs(p.k_L) / abs(p.k_G)
    return ScenarioReport("lactose", params, probs, lhs=law.lhs, rhs=law.rhs)


@dataclass(frozen=True)
class RatioFit:
    """Nonnegative preference ratios ``k_L / k_G`` hitting the target."""

    ratio: float
    roots: tuple[float, ...]
    degenerate: bool = False


def fit_preference_ratio(alpha: complex, beta: complex, p_plus_L: float, p_plus_G: float,
                         target: float) -> RatioFit:
    """Solve ``activation_closed_form = target`` for a real ratio ``r = k_L/k_G >= 0``.

    With ``k_G = 1`` and ``k_L = r`` the condition
    ``(1-t)|u1 r + v1|² = t|u2 r + v2|²`` is quadratic in ``r``; all
    nonnegative roots are returned and the smallest is selected.
    """
    if not 0.0 < target < 1.0:
        raise ValueError("target must lie strictly between 0 and 1")
    _unit_pair(alpha, beta, "detection")
    t = target
    u1, v1 = math.sqrt(p_plus_L) * alpha, math.sqrt(p_plus_G) * beta
    u2, v2 = math.sqrt(1 - p_plus_L) * alpha, math.sqrt(1 - p_plus_G) * beta
    a = (1 - t) * abs(u1) ** 2 - t * abs(u2) ** 2
    b = 2 * ((1 - t) * (u1 * np.conj(v1)).real - t * (u2 * np.conj(v2)).real)
    c = (1 - t) * abs(v1) ** 2 - t * abs(v2) ** 2
    eps = 1e-15
    if abs(a) < eps and abs(b) < eps and abs(c) < eps:
        return RatioFit(1.0, (), degenerate=True)
    if abs(a) < eps:
        candidates = [] if abs(b) < eps else [-c / b]
    else:
        disc = b * b - 4 * a * c
        if disc < 0:
            candidates = []
        else:
            sq = math.sqrt(disc)
            qq = -0.5 * (b + math.copysign(sq, b))
            candidates = [qq / a] + ([c / qq] if qq != 0 else [])
    roots = []
    for r in candidates:
        if r < 0 and r > -1e-14:
            r = 0.0
        if r < 0:
            continue
        norm = abs(u1 * r + v1) ** 2 + abs(u2 * r + v2) ** 2
        if norm > NULL_EVENT_TOL and not any(abs(r - x) <= 1e-15 * max(1.0, r) for x in roots):
            roots.append(float(r))
    if not roots:
        raise ValueError(f"target {target!r} infeasible for given data")
    roots.sort()
    return RatioFit(roots[0], tuple(roots))


# --- Bayesian updating ---------------------------------------------------------

A_PRIME, B_PRIME = np.array([1.0, 0.0]), np.array([0.0, 1.0])
C_PRIME, D_PRIME = np.array([1.0, 0.0]), np.array([0.0, 1.0])
M_A = tensor(projector(A_PRIME), identity(2))
M_B = tensor(projector(B_PRIME), identity(2))
M_C = tensor(identity(2), projector(C_PRIME))
M_D = tensor(identity(2), projector(D_PRIME))


def _controlled(u0: np.ndarray, u1: np.ndarray) -> np.ndarray:
    """``I ⊗ u0 ⊗ |0><0| + I ⊗ u1 ⊗ |1><1|`` on H1 ⊗ H2 ⊗ K."""
    k0, k1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    return np.kron(np.eye(2), np.kron(u0, k0) + np.kron(u1, k1))


def identity_bias() -> np.ndarray:
    return np.eye(8, dtype=complex)


def mind_swap_bias() -> np.ndarray:
    """Exchange the C'/D' minds when the factor state is |1>."""
    return _controlled(np.eye(2), EXCHANGE.matrix)


def controlled_rotation_bias(angle: float) -> np.ndarray:
    """Rotate the C'/D' minds by ``angle`` when the factor state is |1>."""
    c, s = math.cos(angle), math.sin(angle)
    return _controlled(np.eye(2), np.array([[c, -s], [s, c]]))


def bias_state(strength: float) -> DensityState:
    """``diag(1 - strength, strength)`` on the two-level psychological factor."""
    if not 0.0 <= strength <= 1.0:
        raise ValueError("bias strength must lie in [0, 1]")
    return DensityState(np.diag([1.0 - strength, strength]))


BIAS_FAMILIES = {
    "identity": lambda angle=None: identity_bias(),
    "mind_swap": lambda angle=None: mind_swap_bias(),
    "rotation": lambda angle=math.pi / 4: controlled_rotation_bias(angle),
}


@dataclass(frozen=True, eq=False)
class BayesParams:
    p_A: float
    p_C_given_A: float
    p_C_given_B: float
    bias_state: DensityState = field(default_factory=lambda: bias_state(0.0))
    bias_isometry: np.ndarray = field(default_factory=identity_bias)

    def __post_init__(self):
        for name in ("p_A", "p_C_given_A", "p_C_given_B"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        v = np.asarray(self.bias_isometry, dtype=complex)
        if v.shape[1] != 4 * self.bias_state.size:
            raise ValueError("bias isometry must act on H1 ⊗ H2 ⊗ K")
        if v.shape[0] % 4:
            raise ValueError("bias isometry must map into H1 ⊗ H2 ⊗ K'")
        if np.max(np.abs(v.conj().T @ v - np.eye(v.shape[1]))) > 1e-9:
            raise ValueError("bias operator is not an isometry")
        object.__setattr__(self, "bias_isometry", v)


def bayes_prediction_vector(p: BayesParams) -> np.ndarray:
    pa, pb = p.p_A, 1.0 - p.p_A
    mind_a = math.sqrt(p.p_C_given_A) * C_PRIME + math.sqrt(1 - p.p_C_given_A) * D_PRIME
    mind_b = math.sqrt(p.p_C_given_B) * C_PRIME + math.sqrt(1 - p.p_C_given_B) * D_PRIME
    return math.sqrt(pa) * np.kron(A_PRIME, mind_a) + math.sqrt(pb) * np.kron(B_PRIME, mind_b)


def bayes_prediction_state(p: BayesParams) -> DensityState:
    """Pure prediction state on C² ⊗ C² encoding the prior and likelihoods."""
    phi = bayes_prediction_vector(p)
    return DensityState(np.outer(phi, phi.conj()), (2, 2))


def _observation(observed: str) -> Operator:
    if observed == "C":
        return M_C
    if observed == "D":
        return M_D
    raise ValueError(f"observed must be 'C' or 'D', got {observed!r}")


@dataclass(frozen=True)
class Posterior:
    observed: str
    p_observed: float
    posterior_A: float


def bayes_update(rho: DensityState, observed: str = "C") -> Posterior:
    """Reduce by ``M_obs`` and read ``P(A | obs) = tr(M_A rho_obs)``."""
    m = _observation(observed)
    p_obs = expectation(rho, m)
    if p_obs <= NULL_EVENT_TOL:
        raise NullEventError(f"observation {observed} has zero probability")
    post = luders_conditional_state(rho, m)
    return Posterior(observed, p_obs, expectation(post, M_A))


def classical_posterior(p_A: float, p_obs_given_A: float, p_obs_given_B: float) -> float:
    num = p_obs_given_A * p_A
    return num / (num + p_obs_given_B * (1 - p_A))


def biased_prediction_state(p: BayesParams) -> DensityState:
    """``tr_K[ V (rho ⊗ sigma) V^† ]``.

    When ``V = I ⊗ W`` touches only the bias factor the trace returns ``rho``
    itself, so that case is returned as is rather than up to rounding.
    """
    rho = bayes_prediction_state(p)
    v = p.bias_isometry
    k_out = v.shape[0] // 4
    if np.array_equal(v, np.kron(np.eye(4), v[:k_out, :p.bias_state.size])):
        return rho
    joint = v @ np.kron(rho.matrix, p.bias_state.matrix) @ v.conj().T
    lifted = DensityState(joint, (2, 2, k_out), tol=1e-9)
    return partial_trace(lifted, [0, 1])


@dataclass(frozen=True)
class BiasedUpdate:
    observed: str
    joint: dict[str, float]
    posterior_A: float
    rational_posterior_A: float
    prior_delta_A: float
    prior_delta_B: float
    gap_C: float
    gap_D: float


def biased_bayes_update(p: BayesParams, observed: str = "C") -> BiasedUpdate:
    """Posterior from the biased state and the rationality gaps ``P(C) - P~(C)``, ``P(D) - P~(D)``."""
    rho = bayes_prediction_state(p)
    biased = biased_prediction_state(p)
    joint = {
        f"{x},{y}": expectation(biased, mx @ my)
        for x, mx in (("A", M_A), ("B", M_B)) for y, my in (("C", M_C), ("D", M_D))
    }
    joint = {k: float(np.real(v)) for k, v in joint.items()}
    post = bayes_update(biased, observed)
    rational = bayes_update(rho, observed)
    p_tilde_A = joint["A,C"] + joint["A,D"]
    p_tilde_B = joint["B,C"] + joint["B,D"]
    return BiasedUpdate(
        observed=observed,
        joint=joint,
        posterior_A=post.posterior_A,
        rational_posterior_A=rational.posterior_A,
        prior_delta_A=p_tilde_A - expectation(rho, M_A),
        prior_delta_B=p_tilde_B - expectation(rho, M_B),
        gap_C=expectation(rho, M_C) - (joint["A,C"] + joint["B,C"]),
        gap_D=expectation(rho, M_D) - (joint["A,D"] + joint["B,D"]),
    )


def bayes_scenario(p: BayesParams, observed: str = "C", strength: float | None = None) -> ScenarioReport:
    """Rational and biased posteriors; the law compares ``P(obs)`` with ``P~(obs)``."""
    rho = bayes_prediction_state(p)
    upd = biased_bayes_update(p, observed)
    p_obs = expectation(rho, _observation(observed))
    p_obs_tilde = upd.joint[f"A,{observed}"] + upd.joint[f"B,{observed}"]
    likelihood_a = p.p_C_given_A if observed == "C" else 1 - p.p_C_given_A
    likelihood_b = p.p_C_given_B if observed == "C" else 1 - p.p_C_given_B
    probs = {
        f"P(A|{observed})": upd.rational_posterior_A,
        f"P(A|{observed}) classical": classical_posterior(p.p_A, likelihood_a, likelihood_b),
        f"P({observed})": p_obs,
        f"P~({observed})": p_obs_tilde,
        f"P~(A|{observed})": upd.posterior_A,
        "P~(A)": upd.joint["A,C"] + upd.joint["A,D"],
    }
    probs.update({f"P~({k})": v for k, v in upd.joint.items()})
    params = {"p_A": p.p_A, "p_C_given_A": p.p_C_given_A, "p_C_given_B": p.p_C_given_B}
    if strength is not None:
        params["bias_strength"] = strength
    return ScenarioReport("bayes", params, probs, lhs=p_obs, rhs=p_obs_tilde)
