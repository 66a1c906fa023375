"""Matrix involutions, structure predicates and structure-preserving projections.

Quaternionic matrices live here as complex ``2n x 2n`` arrays.  With the
skew form ``J = [[0, I], [-I, 0]]`` the dual is ``M# = J M^T J^{-1}`` and a
matrix is quaternionic exactly when ``J conj(M) J^{-1} = M``, which for any
``M`` is the same condition as ``M# = M*``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la


class StructureError(ValueError):
    """Input does not have the structure an operation requires."""


class DimensionError(StructureError):
    """Wrong or mismatched matrix dimensions."""


class BranchCutError(ValueError):
    """An eigenvalue sits on (or too close to) the branch cut of the logarithm."""


class RankError(ValueError):
    """Input is singular where an invertible matrix is required."""


class StructureKind(enum.Enum):
    REAL_ORTHOGONAL = "real-orthogonal"
    SYMPLECTIC_UNITARY = "symplectic-unitary"
    GENERAL_UNITARY = "general-unitary"
    REAL_CONTRACTION = "real-contraction"
    QUATERNIONIC_CONTRACTION = "quaternionic-contraction"

    @classmethod
    def parse(cls, name: "str | StructureKind") -> "StructureKind":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "-")
        for kind in cls:
            if key in (kind.value, kind.name.lower().replace("_", "-")):
                return kind
        raise ValueError(f"unknown structure kind {name!r}")

    @property
    def needs_even_dim(self) -> bool:
        return self in (StructureKind.SYMPLECTIC_UNITARY, StructureKind.QUATERNIONIC_CONTRACTION)

    @property
    def is_real(self) -> bool:
        return self in (StructureKind.REAL_ORTHOGONAL, StructureKind.REAL_CONTRACTION)

    @property
    def is_quaternionic(self) -> bool:
        return self.needs_even_dim


def _square(M) -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    return M


def _even_half(M: np.ndarray) -> int:
    n2 = M.shape[0]
    if n2 % 2:
        raise DimensionError(f"dual needs an even dimension, got {n2}")
    return n2 // 2


def opnorm(M) -> float:
    """Operator 2-norm (largest singular value, full SVD)."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(la.svdvals(M)[0])


def skew_form(n: int) -> np.ndarray:
    """``J = [[0, I_n], [-I_n, 0]]``, the form behind the dual."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def dual(M) -> np.ndarray:
    """Block dual ``[[A, B], [C, D]] -> [[D^T, -B^T], [-C^T, A^T]]``."""
    M = _square(M)
    n = _even_half(M)
    A, B = M[:n, :n], M[:n, n:]
    C, D = M[n:, :n], M[n:, n:]
    return np.block([[D.T, -B.T], [-C.T, A.T]])


def quaternionic_conjugation(M) -> np.ndarray:
    """``J conj(M) J^{-1}``; fixes exactly the quaternionic matrices."""
    M = _square(M)
    n = _even_half(M)
    A, B = M[:n, :n], M[:n, n:]
    C, D = M[n:, :n], M[n:, n:]
    return np.block([[D.conj(), -C.conj()], [-B.conj(), A.conj()]])


def quaternionic_part(M) -> np.ndarray:
    """Orthogonal (Frobenius) projection onto quaternionic matrices."""
    M = _square(M)
    return 0.5 * (M + quaternionic_conjugation(M))


def commutator(U, V) -> np.ndarray:
    U, V = _square(U), _square(V)
    if U.shape != V.shape:
        raise DimensionError(f"dimension mismatch {U.shape} vs {V.shape}")
    return U @ V - V @ U


def commutator_norm(U, V) -> float:
    """``||UV - VU||`` in operator norm."""
    return opnorm(commutator(U, V))


def self_commutator_norm(X) -> float:
    X = _square(X)
    Xh = X.conj().T
    return opnorm(X @ Xh - Xh @ X)


@dataclass(frozen=True)
class StructuredMatrix:
    """Dense square complex matrix tagged with the structure it claims.

    Only the shape is checked on construction; use :meth:`checked` (or
    :func:`validate`) to enforce the structure itself.
    """

    entries: np.ndarray
    kind: StructureKind
    tol: float = 1e-10

    def __post_init__(self):
        M = _square(np.array(self.entries, dtype=complex))
        kind = StructureKind.parse(self.kind)
        if kind.needs_even_dim and M.shape[0] % 2:
            raise DimensionError(f"{kind.value} needs an even dimension, got {M.shape[0]}")
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")
        M.setflags(write=False)
        object.__setattr__(self, "entries", M)
        object.__setattr__(self, "kind", kind)

    @classmethod
    def checked(cls, entries, kind, tol: float = 1e-10) -> "StructuredMatrix":
        sm = cls(entries, kind, tol)
        report = validate(sm)
        if not report.ok:
            raise StructureError(f"matrix is not {sm.kind.value}: {report.describe()}")
        return sm

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def array(self) -> np.ndarray:
        """Writable copy, real dtype for the real kinds."""
        if self.kind.is_real:
            return self.entries.real.copy()
        return self.entries.copy()


@dataclass
class ValidationReport:
    kind: StructureKind
    tol: float
    residuals: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(r <= self.tol for r in self.residuals.values())

    def __bool__(self) -> bool:
        return self.ok

    def describe(self) -> str:
        return ", ".join(f"{k}={v:.3g}" for k, v in self.residuals.items())


def validate(M: StructuredMatrix) -> ValidationReport:
    """Check every invariant of ``M.kind`` at tolerance ``M.tol``.

    Never raises; the report carries one residual per invariant and is
    truthy iff all of them are within tolerance.
    """
    A = M.entries
    kind = M.kind
    res = {}
    if kind.is_real:
        res["realness"] = float(np.max(np.abs(A.imag), initial=0.0))
    if kind in (StructureKind.REAL_ORTHOGONAL, StructureKind.SYMPLECTIC_UNITARY,
                StructureKind.GENERAL_UNITARY):
        res["unitarity"] = opnorm(A.conj().T @ A - np.eye(M.dim))
    if kind == StructureKind.SYMPLECTIC_UNITARY:
        res["self_duality"] = opnorm(dual(A) - A.conj().T)
    if kind == StructureKind.QUATERNIONIC_CONTRACTION:
        res["quaternionic"] = opnorm(quaternionic_conjugation(A) - A)
    if kind in (StructureKind.REAL_CONTRACTION, StructureKind.QUATERNIONIC_CONTRACTION):
        res["contraction"] = max(0.0, opnorm(A) - 1.0)
    return ValidationReport(kind, M.tol, res)


def unitary_eigensystem(U, unitarity_tol: float = 1e-8):
    """Eigenvalues and an orthonormal eigenbasis of a unitary matrix.

    Uses the complex Schur form, which for a normal matrix is diagonal up
    to roundoff, so the basis stays orthonormal even inside clusters.
    """
    U = _square(U).astype(complex)
    defect = opnorm(U.conj().T @ U - np.eye(U.shape[0]))
    if defect > unitarity_tol:
        raise StructureError(f"matrix is not unitary (defect {defect:.3g})")
    T, Z = la.schur(U, output="complex")
    return np.diag(T).copy(), Z


def principal_log(U, branch_tol: float = 1e-6, unitarity_tol: float = 1e-8) -> np.ndarray:
    """Principal logarithm of a unitary matrix via its eigendecomposition.

    The result is skew-Hermitian with eigenvalue arguments in ``(-pi, pi)``.
    Raises :class:`BranchCutError` if an eigenvalue lies within
    ``branch_tol`` of ``-1``.
    """
    w, Z = unitary_eigensystem(U, unitarity_tol)
    if w.size and np.min(np.abs(w + 1.0)) < branch_tol:
        raise BranchCutError("eigenvalue on the branch cut at -1")
    theta = np.angle(w)
    L = (Z * (1j * theta)) @ Z.conj().T
    return 0.5 * (L - L.conj().T)


def polar_unitary(A) -> np.ndarray:
    """Unitary polar factor ``W Z^*`` from ``A = W S Z^*``; raises on singular input."""
    A = _square(A)
    W, s, Zh = la.svd(A)
    if s.size and s[-1] <= 1e-14 * max(1.0, s[0]):
        raise RankError("polar factor of a singular matrix is not unique")
    return W @ Zh


def project_to_orthogonal(A) -> np.ndarray:
    """Nearest real orthogonal matrix (orthogonal polar factor)."""
    A = _square(A)
    if np.iscomplexobj(A):
        if np.max(np.abs(A.imag), initial=0.0) > 1e-12:
            raise StructureError("project_to_orthogonal needs a real matrix")
        A = A.real
    return polar_unitary(A.astype(float))


def project_to_symplectic(A, max_defect: float = 0.5) -> np.ndarray:
    """Nearest symplectic unitary to a nearly quaternionic invertible matrix.

    The input is first replaced by its quaternionic part; the polar factor
    of a quaternionic matrix is again quaternionic, so only roundoff is
    cleaned up by the second symmetrization.
    """
    A = _square(A).astype(complex)
    _even_half(A)
    defect = opnorm(dual(A) - A.conj().T)
    if defect > max_defect:
        raise StructureError(f"input too far from quaternionic form (defect {defect:.3g})")
    Q = polar_unitary(quaternionic_part(A))
    return polar_unitary(quaternionic_part(Q))
