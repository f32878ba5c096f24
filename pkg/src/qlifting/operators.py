"""Finite-dimensional operators, density states, projections and POVMs.

Everything here is an immutable value over a dense complex matrix that carries
its tensor-factor dimensions. The projection lattice (meet/join) is computed
spectrally.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

#: Tolerance for Hermiticity, positivity, trace and idempotence checks.
STATE_TOL = 1e-10
#: Eigenvalue window around 2 used to pick out range(e) ∩ range(f).
MEET_TOL = 1e-8
#: Singular-value cutoff when orthonormalizing spanning sets.
RANK_TOL = 1e-10


def _frozen(matrix) -> np.ndarray:
    arr = np.array(matrix, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense complex square matrix with declared tensor-factor dimensions.

    Parameters
    ----------
    matrix : array_like
        Square matrix of side ``prod(dims)``.
    dims : sequence of int, optional
        Factor dimensions. Defaults to a single factor.
    """

    matrix: np.ndarray
    dims: tuple[int, ...] = field(default=())

    def __post_init__(self):
        mat = _frozen(self.matrix)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {mat.shape}")
        dims = tuple(int(d) for d in self.dims) if self.dims else (mat.shape[0],)
        if any(d < 1 for d in dims):
            raise ValueError(f"factor dimensions must be >= 1, got {dims}")
        if int(np.prod(dims)) != mat.shape[0]:
            raise ValueError(f"dims {dims} do not multiply to matrix side {mat.shape[0]}")
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "dims", dims)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def H(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.dims)

    def __matmul__(self, other: "Operator") -> "Operator":
        if self.size != other.size:
            raise ValueError(f"dimension mismatch: {self.dims} vs {other.dims}")
        return Operator(self.matrix @ other.matrix, self.dims)

    def __add__(self, other: "Operator") -> "Operator":
        return Operator(self.matrix + other.matrix, self.dims)

    def __sub__(self, other: "Operator") -> "Operator":
        return Operator(self.matrix - other.matrix, self.dims)

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.matrix * scalar, self.dims)

    __rmul__ = __mul__

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def is_hermitian(self, tol: float = STATE_TOL) -> bool:
        return self.hermiticity_error() < tol

    def allclose(self, other, atol: float = 1e-10) -> bool:
        other = other.matrix if isinstance(other, Operator) else np.asarray(other)
        return bool(np.allclose(self.matrix, other, atol=atol, rtol=0))

    def __repr__(self):
        return f"Operator(dims={self.dims})"


def as_operator(obj, dims: Sequence[int] | None = None) -> Operator:
    """Coerce ``obj`` (Operator, DensityState, Projection or array) to Operator."""
    if isinstance(obj, Operator):
        return obj if dims is None else Operator(obj.matrix, dims)
    if isinstance(obj, (DensityState, Projection)):
        return obj.op
    return Operator(obj, tuple(dims) if dims else ())


def identity(dims: int | Sequence[int]) -> Operator:
    dims = (dims,) if isinstance(dims, (int, np.integer)) else tuple(dims)
    return Operator(np.eye(int(np.prod(dims))), dims)


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(vector) -> Operator:
    """Rank-one projector ``|v><v|`` onto the normalized vector."""
    v = np.asarray(vector, dtype=complex).ravel()
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError("cannot project onto the zero vector")
    v = v / norm
    return Operator(np.outer(v, v.conj()))


# --- states -------------------------------------------------------------------


@dataclass(frozen=True)
class InvariantCheck:
    name: str
    passed: bool
    deviation: float


@dataclass(frozen=True)
class ValidationReport:
    """Per-invariant pass/fail with the worst observed deviation."""

    kind: str
    checks: tuple[InvariantCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> InvariantCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __str__(self):
        lines = [f"{self.kind}: {'ok' if self.ok else 'INVALID'}"]
        for c in self.checks:
            lines.append(f"  {'pass' if c.passed else 'FAIL'} {c.name} (deviation {c.deviation:.3g})")
        return "\n".join(lines)


def _state_checks(op: Operator, tol: float) -> tuple[InvariantCheck, ...]:
    herm = op.hermiticity_error()
    sym = (op.matrix + op.matrix.conj().T) / 2
    min_eig = float(np.min(np.linalg.eigvalsh(sym)))
    neg = max(0.0, -min_eig)
    tr_dev = float(abs(np.trace(op.matrix) - 1.0))
    return (
        InvariantCheck("hermitian", herm < tol, herm),
        InvariantCheck("positive", min_eig >= -tol, neg),
        InvariantCheck("unit_trace", tr_dev < tol, tr_dev),
    )


class DensityState:
    """Hermitian, positive semidefinite, unit-trace operator.

    Parameters
    ----------
    matrix : Operator or array_like
    dims : sequence of int, optional
    renormalize : bool
        Divide by the trace before validating. Useful after Fock truncation.
    tol : float
        Validation tolerance; raise ``ValueError`` on violation.
    """

    __slots__ = ("op",)

    def __init__(self, matrix, dims: Sequence[int] | None = None, *, renormalize: bool = False,
                 tol: float = STATE_TOL):
        op = as_operator(matrix, dims)
        if renormalize:
            tr = np.trace(op.matrix).real
            if tr <= 0:
                raise ValueError("cannot renormalize an operator with non-positive trace")
            op = Operator(op.matrix / tr, op.dims)
        failed = [c for c in _state_checks(op, tol) if not c.passed]
        if failed:
            msg = ", ".join(f"{c.name} (deviation {c.deviation:.3g})" for c in failed)
            raise ValueError(f"not a density state: {msg}")
        object.__setattr__(self, "op", op)

    def __setattr__(self, name, value):
        raise AttributeError("DensityState is immutable")

    @classmethod
    def pure(cls, vector, dims: Sequence[int] | None = None) -> "DensityState":
        v = np.asarray(vector, dtype=complex).ravel()
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()), dims)

    @classmethod
    def maximally_mixed(cls, dims: int | Sequence[int]) -> "DensityState":
        eye = identity(dims)
        return cls(eye.matrix / eye.size, eye.dims)

    @property
    def matrix(self) -> np.ndarray:
        return self.op.matrix

    @property
    def dims(self) -> tuple[int, ...]:
        return self.op.dims

    @property
    def size(self) -> int:
        return self.op.size

    @property
    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)

    def allclose(self, other, atol: float = 1e-10) -> bool:
        return self.op.allclose(as_operator(other), atol)

    def __repr__(self):
        return f"DensityState(dims={self.dims})"


class Projection:
    """Orthogonal projection (P² = P = P†)."""

    __slots__ = ("op",)

    def __init__(self, matrix, dims: Sequence[int] | None = None, tol: float = STATE_TOL):
        op = as_operator(matrix, dims)
        idem = float(np.max(np.abs(op.matrix @ op.matrix - op.matrix))) if op.size else 0.0
        if idem >= tol or not op.is_hermitian(tol):
            raise ValueError("operator is not an orthogonal projection")
        object.__setattr__(self, "op", op)

    def __setattr__(self, name, value):
        raise AttributeError("Projection is immutable")

    @classmethod
    def onto(cls, vectors, dim: int | None = None) -> "Projection":
        """Projection onto the span of the given column vectors (a 1-D input is one vector)."""
        vecs = np.asarray(vectors, dtype=complex)
        if vecs.ndim == 1:
            vecs = vecs.reshape(-1, 1)
        if dim is not None and vecs.shape[0] != dim:
            raise ValueError(f"vectors have length {vecs.shape[0]}, expected {dim}")
        basis = _orthonormal_basis(vecs)
        return cls(basis @ basis.conj().T)

    @classmethod
    def zero(cls, dim: int) -> "Projection":
        return cls(np.zeros((dim, dim)))

    @property
    def matrix(self) -> np.ndarray:
        return self.op.matrix

    @property
    def dims(self) -> tuple[int, ...]:
        return self.op.dims

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.matrix).real))

    def range_basis(self) -> np.ndarray:
        w, v = np.linalg.eigh(self.matrix)
        return v[:, w > 0.5]

    def allclose(self, other, atol: float = 1e-10) -> bool:
        return self.op.allclose(as_operator(other), atol)

    def __repr__(self):
        return f"Projection(dims={self.dims}, rank={self.rank})"


@dataclass(frozen=True, eq=False)
class EventSystem:
    """Labeled POVM: positive effects summing to the identity."""

    labels: tuple
    effects: tuple[Operator, ...]
    tol: float = STATE_TOL

    def __post_init__(self):
        effects = tuple(as_operator(e) for e in self.effects)
        labels = tuple(self.labels)
        if not effects:
            raise ValueError("event system needs at least one effect")
        if len(labels) != len(effects):
            raise ValueError(f"{len(labels)} labels for {len(effects)} effects")
        if len({e.size for e in effects}) != 1:
            raise ValueError("effects must share one dimension")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "effects", effects)
        report = validate(self, self.tol)
        if not report.ok:
            raise ValueError(f"not a POVM:\n{report}")

    @classmethod
    def projective(cls, vectors, labels: Iterable | None = None) -> "EventSystem":
        """Rank-one projective measurement in an orthonormal basis (columns)."""
        vecs = np.asarray(vectors, dtype=complex)
        effects = [projector(vecs[:, i]) for i in range(vecs.shape[1])]
        labels = tuple(labels) if labels is not None else tuple(range(len(effects)))
        return cls(labels, tuple(effects))

    @classmethod
    def computational(cls, dim: int, labels: Iterable | None = None) -> "EventSystem":
        return cls.projective(np.eye(dim), labels)

    @property
    def dim(self) -> int:
        return self.effects[0].size

    def __len__(self):
        return len(self.effects)


# --- elementary operations ------------------------------------------------------


def tensor(a, b, *more) -> Operator:
    """Kronecker product; factor dimensions are concatenated."""
    a, b = as_operator(a), as_operator(b)
    out = Operator(np.kron(a.matrix, b.matrix), a.dims + b.dims)
    for c in more:
        out = tensor(out, c)
    return out


def partial_trace(rho, keep: int | Sequence[int]):
    """Trace out every factor not listed in ``keep``.

    Returns a :class:`DensityState` when given one, else an :class:`Operator`.
    """
    op = as_operator(rho)
    dims = op.dims
    n = len(dims)
    if n < 2:
        raise ValueError("nothing to trace out: operator has a single tensor factor")
    keep = sorted({keep} if isinstance(keep, (int, np.integer)) else set(keep))
    if not keep or any(k < 0 or k >= n for k in keep):
        raise ValueError(f"keep={keep} invalid for {n} factors")
    traced = [i for i in range(n) if i not in keep]
    t = op.matrix.reshape(dims + dims)
    # einsum: row index i_k, column index j_k, traced factors share a letter
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = [letters[n + i] if i in keep else row[i] for i in range(n)]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    kept_dims = tuple(dims[i] for i in keep)
    side = int(np.prod(kept_dims))
    reduced = np.einsum("".join(row) + "".join(col) + "->" + out, t).reshape(side, side)
    if traced and isinstance(rho, DensityState):
        return DensityState(reduced, kept_dims, tol=1e-9)
    return Operator(reduced, kept_dims)


def expectation(rho, a) -> complex:
    """``tr(rho a)``; returns a float when ``a`` is Hermitian."""
    r, a = as_operator(rho), as_operator(a)
    if r.size != a.size:
        raise ValueError(f"dimension mismatch: state {r.dims} vs operator {a.dims}")
    value = np.einsum("ij,ji->", r.matrix, a.matrix)
    if a.is_hermitian():
        return float(value.real)
    return complex(value)


def _orthonormal_basis(vectors: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    if vectors.size == 0:
        return np.zeros((vectors.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(vectors, full_matrices=False)
    return u[:, s > tol * max(1.0, s.max(initial=0.0))]


def meet_projection(e: Projection, f: Projection) -> Projection:
    """Projection onto ``range(e) ∩ range(f)``.

    A unit vector lies in both ranges iff it is an eigenvector of ``e + f``
    with eigenvalue 2, so the intersection is that eigenspace.
    """
    if e.matrix.shape != f.matrix.shape:
        raise ValueError("projections must act on the same space")
    s = e.matrix + f.matrix
    w, v = np.linalg.eigh((s + s.conj().T) / 2)
    basis = v[:, np.abs(w - 2.0) < MEET_TOL]
    return Projection(basis @ basis.conj().T, e.dims)


def join_projection(e: Projection, f: Projection) -> Projection:
    """Projection onto ``range(e) + range(f)``."""
    if e.matrix.shape != f.matrix.shape:
        raise ValueError("projections must act on the same space")
    basis = _orthonormal_basis(np.hstack([e.range_basis(), f.range_basis()]))
    return Projection(basis @ basis.conj().T, e.dims)


def commutator_norm(a, b) -> float:
    a, b = as_operator(a).matrix, as_operator(b).matrix
    return float(np.max(np.abs(a @ b - b @ a))) if a.size else 0.0


def psd_sqrt(a) -> np.ndarray:
    """Principal square root of a Hermitian PSD matrix."""
    m = as_operator(a).matrix
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def validate(obj, tol: float = STATE_TOL) -> ValidationReport:
    """Report every invariant of a state or event system with its deviation.

    Raw arrays/Operators are checked as would-be density states and a plain
    list of effects as a would-be POVM, so invalid candidates can be inspected
    without raising.
    """
    if isinstance(obj, EventSystem):
        return _povm_report(obj.effects, tol)
    if isinstance(obj, (list, tuple)):
        return _povm_report(tuple(as_operator(e) for e in obj), tol)
    op = obj.op if isinstance(obj, DensityState) else as_operator(obj)
    return ValidationReport("DensityState", _state_checks(op, tol))


def _povm_report(effects: Sequence[Operator], tol: float) -> ValidationReport:
    worst_herm = max(e.hermiticity_error() for e in effects)
    worst_neg = 0.0
    for e in effects:
        sym = (e.matrix + e.matrix.conj().T) / 2
        worst_neg = max(worst_neg, -float(np.min(np.linalg.eigvalsh(sym))))
    worst_neg = max(0.0, worst_neg)
    total = sum(e.matrix for e in effects)
    comp = float(np.max(np.abs(total - np.eye(effects[0].size))))
    return ValidationReport("EventSystem", (
        InvariantCheck("effects_hermitian", worst_herm < tol, worst_herm),
        InvariantCheck("effects_positive", worst_neg <= tol, worst_neg),
        InvariantCheck("completeness", comp < tol, comp),
    ))
