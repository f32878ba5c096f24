"""Liftings from states on one system to states on a composite system.

A lifting maps ``rho`` on ``H1`` to a state on ``H1 ⊗ H2``. Tracing out either
factor yields the two associated channels. Beam splitters act on truncated
coherent vectors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.special import comb
from scipy.stats import poisson

from .operators import DensityState, Operator, as_operator, partial_trace, tensor

LIFT_TOL = 1e-9


class Lifting:
    """State map ``S(H1) -> S(H1 ⊗ H2)`` with validated outputs.

    Parameters
    ----------
    apply : callable
        Maps a :class:`DensityState` on ``input_dim`` to a matrix (or state) on
        ``d1 * d2``.
    input_dim : int
    out_dims : (int, int)
    kind : str
        ``"isometric"``, ``"compound"``, ``"product"`` or ``"custom"``.
    """

    def __init__(self, apply: Callable, input_dim: int, out_dims: tuple[int, int], kind: str = "custom"):
        self._apply = apply
        self.input_dim = int(input_dim)
        self.out_dims = (int(out_dims[0]), int(out_dims[1]))
        self.kind = kind

    def __call__(self, rho: DensityState) -> DensityState:
        if rho.size != self.input_dim:
            raise ValueError(f"lifting expects input dimension {self.input_dim}, got {rho.size}")
        out = self._apply(rho)
        return DensityState(as_operator(out).matrix, self.out_dims, tol=LIFT_TOL)

    def __repr__(self):
        return f"Lifting(kind={self.kind!r}, {self.input_dim} -> {self.out_dims})"


def isometric_lifting(v, out_dims: tuple[int, int] | None = None, tol: float = LIFT_TOL) -> Lifting:
    """``rho -> V rho V^†`` for an isometry ``V: H1 -> H1 ⊗ H2``.

    ``out_dims`` defaults to ``(d1, rows // d1)``.
    """
    v = np.asarray(v, dtype=complex)
    rows, d1 = v.shape
    if out_dims is None:
        if rows % d1:
            raise ValueError(f"cannot infer output factors for a {rows}x{d1} isometry")
        out_dims = (d1, rows // d1)
    if out_dims[0] * out_dims[1] != rows:
        raise ValueError(f"out_dims {out_dims} do not match {rows} rows")
    err = float(np.max(np.abs(v.conj().T @ v - np.eye(d1))))
    if err >= tol:
        raise ValueError(f"not an isometry: max |V^dag V - I| = {err:.3g}")
    vh = v.conj().T
    return Lifting(lambda rho: v @ rho.matrix @ vh, d1, out_dims, "isometric")


def embedding_isometry(vector, input_dim: int) -> np.ndarray:
    """Matrix of the isometry ``|psi> -> |psi> ⊗ |e>``."""
    e = np.asarray(vector, dtype=complex).ravel()
    e = e / np.linalg.norm(e)
    return np.kron(np.eye(input_dim), e.reshape(-1, 1))


def product_lifting(sigma: DensityState, input_dim: int) -> Lifting:
    """``rho -> rho ⊗ sigma``; nondemolition for every input."""
    return Lifting(lambda rho: tensor(rho.op, sigma.op), input_dim, (input_dim, sigma.size), "product")


@dataclass(frozen=True)
class ConvexDecomposition:
    """Finite convex combination ``sum_n w_n rho_n``."""

    weights: tuple[float, ...]
    components: tuple[DensityState, ...]

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        comps = tuple(self.components)
        if len(w) != len(comps) or not w:
            raise ValueError("weights and components must be nonempty and equal in number")
        if min(w) < -1e-12 or abs(sum(w) - 1.0) > 1e-10:
            raise ValueError("weights must be nonnegative and sum to 1")
        if len({c.size for c in comps}) != 1:
            raise ValueError("components must share one dimension")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", comps)

    def mixture(self) -> np.ndarray:
        return sum(w * c.matrix for w, c in zip(self.weights, self.components))


def spectral_decomposition(rho: DensityState, cutoff: float = 1e-14) -> ConvexDecomposition:
    """Eigen-decomposition of ``rho`` into pure states (zero weights dropped)."""
    w, v = np.linalg.eigh(rho.matrix)
    keep = w > cutoff
    w = np.clip(w[keep], 0.0, None)
    w = w / w.sum()
    comps = tuple(DensityState.pure(v[:, i], rho.dims) for i in np.flatnonzero(keep))
    return ConvexDecomposition(tuple(w), comps)


def compound_lifting(channel: Callable[[DensityState], DensityState],
                     decomposition: ConvexDecomposition | None = None,
                     input_dim: int | None = None, output_dim: int | None = None) -> Lifting:
    """``rho -> sum_n w_n rho_n ⊗ channel(rho_n)``.

    With no decomposition the spectral decomposition of each input is used.
    A fixed decomposition must reproduce the lifted state to within 1e-9.
    The result is nonlinear in ``rho`` even when ``channel`` is linear.
    """
    if decomposition is not None:
        input_dim = decomposition.components[0].size
        output_dim = output_dim or channel(decomposition.components[0]).size
    if input_dim is None:
        raise ValueError("input_dim is required when no decomposition is fixed")
    if output_dim is None:
        probe = DensityState.maximally_mixed(input_dim)
        output_dim = channel(probe).size

    def apply(rho: DensityState) -> np.ndarray:
        decomp = decomposition or spectral_decomposition(rho)
        if np.max(np.abs(decomp.mixture() - rho.matrix)) > 1e-9:
            raise ValueError("decomposition does not reproduce the lifted state")
        return sum(w * np.kron(c.matrix, channel(c).matrix)
                   for w, c in zip(decomp.weights, decomp.components))

    return Lifting(apply, input_dim, (input_dim, output_dim), "compound")


def marginal_channels(lifting: Lifting, rho: DensityState) -> tuple[DensityState, DensityState]:
    """Both marginals ``(tr_2 E*rho, tr_1 E*rho)``."""
    joint = lifting(rho)
    return partial_trace(joint, 0), partial_trace(joint, 1)


class NondemolitionResult(NamedTuple):
    nondemolition: bool
    deviation: float

    def __bool__(self):
        return self.nondemolition


def is_nondemolition(lifting: Lifting, rho: DensityState, tol: float = 1e-10) -> NondemolitionResult:
    """Whether the first marginal of ``lifting(rho)`` returns ``rho``."""
    first, _ = marginal_channels(lifting, rho)
    dev = float(np.max(np.abs(first.matrix - rho.matrix)))
    return NondemolitionResult(dev < tol, dev)


# --- coherent vectors and beam splitting -------------------------------------


def default_cutoff(theta: complex) -> int:
    r = abs(theta)
    return int(math.ceil(r * r + 8 * r + 10))


def coherent_tail_mass(theta: complex, cutoff: int) -> float:
    """Probability weight of photon numbers ``>= cutoff`` in ``|theta>``."""
    return float(poisson.sf(cutoff - 1, abs(theta) ** 2))


@dataclass(frozen=True, eq=False)
class CoherentVector:
    theta: complex
    cutoff: int
    coefficients: np.ndarray
    tail_mass: float

    def density(self) -> DensityState:
        return DensityState.pure(self.coefficients)


def coherent_vector(theta: complex, cutoff: int | None = None, tol: float = 1e-12) -> CoherentVector:
    """Normalized truncation of ``e^{-|θ|²/2} Σ θⁿ/√n! |n>`` to ``n < cutoff``."""
    theta = complex(theta)
    cutoff = default_cutoff(theta) if cutoff is None else int(cutoff)
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    tail = coherent_tail_mass(theta, cutoff)
    if tail >= tol:
        raise ValueError(f"cutoff {cutoff} too small for |theta|={abs(theta):.3g} "
                         f"(tail mass {tail:.2e}); try cutoff >= {default_cutoff(theta)}")
    c = np.empty(cutoff, dtype=complex)
    c[0] = 1.0
    for n in range(1, cutoff):
        c[n] = c[n - 1] * theta / math.sqrt(n)
    c /= np.linalg.norm(c)
    c.setflags(write=False)
    return CoherentVector(theta, cutoff, c, tail)


def number_operator(cutoff: int) -> Operator:
    return Operator(np.diag(np.arange(cutoff, dtype=float)))


@dataclass(frozen=True, eq=False)
class BipartiteVector:
    """Pure state on Fock ⊗ Fock; ``norm_before`` records pre-normalization norm."""

    vector: np.ndarray
    dims: tuple[int, int]
    norm_before: float = 1.0

    def amplitudes(self) -> np.ndarray:
        return self.vector.reshape(self.dims)

    def reduced(self, keep: int) -> np.ndarray:
        """Reduced density matrix of factor ``keep`` (0 or 1)."""
        m = self.amplitudes()
        return m @ m.conj().T if keep == 0 else m.T @ m.conj()

    def density(self) -> DensityState:
        return DensityState.pure(self.vector, self.dims)


def _check_unimodular(alpha: complex, beta: complex):
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > 1e-10:
        raise ValueError("beam splitter needs |alpha|^2 + |beta|^2 = 1")


def beam_split(inputs: CoherentVector | Sequence[CoherentVector], alpha: complex, beta: complex,
               mode: str = "plain", tol: float = 1e-12) -> BipartiteVector:
    """Split coherent input(s) into a two-mode vector.

    ``plain``: ``|αθ> ⊗ |βθ>``.
    ``superposed``: ``(|αθ>⊗|βθ> - i|βθ>⊗|αθ>)/√2``, renormalized.
    ``two_input``: ``|αθ+βγ> ⊗ |-β̄θ+ᾱγ>`` for inputs ``(θ, γ)``.
    """
    _check_unimodular(alpha, beta)
    if isinstance(inputs, CoherentVector):
        inputs = (inputs,)
    inputs = tuple(inputs)
    n = max(v.cutoff for v in inputs)

    def coh(t):
        return coherent_vector(t, n, tol).coefficients

    if mode == "two_input":
        if len(inputs) != 2:
            raise ValueError("two_input mode takes exactly two coherent inputs")
        th, ga = inputs[0].theta, inputs[1].theta
        vec = np.kron(coh(alpha * th + beta * ga), coh(-np.conj(beta) * th + np.conj(alpha) * ga))
        return BipartiteVector(vec, (n, n))
    if len(inputs) != 1:
        raise ValueError(f"{mode} mode takes one coherent input")
    th = inputs[0].theta
    a, b = coh(alpha * th), coh(beta * th)
    if mode == "plain":
        return BipartiteVector(np.kron(a, b), (n, n))
    if mode == "superposed":
        vec = (np.kron(a, b) - 1j * np.kron(b, a)) / math.sqrt(2)
        norm = float(np.linalg.norm(vec))
        return BipartiteVector(vec / norm, (n, n), norm)
    raise ValueError(f"unknown beam splitting mode {mode!r}")


def beam_splitter_isometry(alpha: complex, beta: complex, cutoff: int) -> np.ndarray:
    """Linear extension of ``|θ> -> |αθ>⊗|βθ>`` on ``span{|0>..|cutoff-1>}``.

    Expanding both sides in number states gives
    ``|n> -> Σ_k sqrt(C(n,k)) α^k β^(n-k) |k, n-k>``, an exact isometry into
    the two-mode space with the same per-mode cutoff.
    """
    _check_unimodular(alpha, beta)
    v = np.zeros((cutoff * cutoff, cutoff), dtype=complex)
    for n in range(cutoff):
        for k in range(n + 1):
            v[k * cutoff + (n - k), n] = math.sqrt(comb(n, k, exact=True)) * alpha ** k * beta ** (n - k)
    return v


def beam_splitter_lifting(alpha: complex, beta: complex, cutoff: int) -> Lifting:
    """Isometric lifting built from :func:`beam_splitter_isometry`."""
    return isometric_lifting(beam_splitter_isometry(alpha, beta, cutoff), (cutoff, cutoff))
