"""Constructive nearby commuting pairs and nearby normal matrices.

Both solvers follow the same pattern.  One matrix is diagonalized, its
spectrum is split into clusters separated by gaps of at least ``scale``,
and it is snapped to one value per cluster.  The other matrix is then
compressed onto the cluster blocks.  The two results commute by
construction.  The scale runs through ``sqrt(delta) * 2**-k``,
``k = 0..8``, for both choices of which matrix is diagonalized, and the
candidate closest to the input wins.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .structures import (
    StructureError,
    StructuredMatrix,
    StructureKind,
    commutator_norm,
    opnorm,
    project_to_orthogonal,
    project_to_symplectic,
    quaternionic_part,
    self_commutator_norm,
    unitary_eigensystem,
    validate,
)

PAIR_KINDS = (StructureKind.REAL_ORTHOGONAL, StructureKind.SYMPLECTIC_UNITARY)
NORMAL_KINDS = (StructureKind.REAL_CONTRACTION, StructureKind.QUATERNIONIC_CONTRACTION)
RESIDUAL_TOL = 1e-10
NORM_TOL = 1e-12


class Status(enum.Enum):
    CONVERGED = "Converged"
    CLUSTER_FALLBACK = "ClusterFallback"
    FAILED = "Failed"


@dataclass(frozen=True)
class SolverParams:
    delta_max: float = 0.3
    # clustered candidates farther than this from the input trigger the descent
    eps_budget: float = 1e-3
    levels: int = 9
    min_scale: float = 1e-10
    descent: bool = True
    mu_stages: int = 17
    descent_iters: int = 25


@dataclass
class ApproximationResult:
    outputs: tuple
    epsilon: float
    residual: float
    status: Status
    iterations: int = 0
    cluster_trace: list = field(default_factory=list)
    scale: float = float("nan")

    def summary(self) -> dict:
        return {
            "status": self.status.value,
            "epsilon": self.epsilon,
            "residual": self.residual,
            "iterations": self.iterations,
            "scale": self.scale,
            "cluster_trace": [list(t) for t in self.cluster_trace],
        }


def cluster_angles(values, scale: float, period: float | None = None) -> list:
    """Split values into clusters wherever consecutive sorted values differ by ``>= scale``.

    Returns lists of indices into ``values``, each in increasing order of
    value.  With ``period`` the values live on a circle and the first and
    last clusters merge when the wrap-around gap is below ``scale``.
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return []
    if period is not None:
        v = np.mod(v, period)
    order = np.argsort(v, kind="stable")
    sv = v[order]
    cuts = np.flatnonzero(np.diff(sv) >= scale) + 1
    groups = [list(map(int, g)) for g in np.split(order, cuts)]
    if period is not None and len(groups) > 1 and sv[0] + period - sv[-1] < scale:
        groups[0] = groups.pop() + groups[0]
    return groups


def _scales(delta: float, params: SolverParams):
    base = np.sqrt(max(delta, 0.0))
    return [max(base * 2.0**-k, params.min_scale) for k in range(params.levels)]


def _arc_midpoint(angles) -> float:
    ref = angles[0]
    d = np.angle(np.exp(1j * (angles - ref)))
    return float(ref + 0.5 * (d.min() + d.max()))


def _snap_values(w, groups):
    """Cluster representatives for a conjugation-symmetric unit spectrum.

    Self-conjugate clusters go to the real point ``+-1`` so that the snapped
    matrix keeps its real or quaternionic structure.
    """
    reps = np.empty(len(groups), dtype=complex)
    owner = np.empty(w.size, dtype=int)
    for c, g in enumerate(groups):
        owner[g] = c
    for c, g in enumerate(groups):
        partner = int(np.argmin(np.abs(w - np.conj(w[g[0]]))))
        if owner[partner] == c:
            reps[c] = 1.0 if np.real(np.sum(w[g])) >= 0 else -1.0
        else:
            reps[c] = np.exp(1j * _arc_midpoint(np.angle(w[g])))
    return reps


def _block_polar(B, fallback_identity):
    W, s, Zh = la.svd(B)
    if s.size and s[-1] <= 1e-12:
        return fallback_identity
    return W @ Zh


def _finalize_unitary(M, kind):
    if kind == StructureKind.REAL_ORTHOGONAL:
        return project_to_orthogonal(M.real)
    return project_to_symplectic(quaternionic_part(M))


def _snap_pair(A, B, kind, eig, scale):
    """Commuting pair from diagonalizing ``A`` and compressing ``B``."""
    w, Z = eig
    groups = cluster_angles(np.angle(w), scale, period=2 * np.pi)
    reps = _snap_values(w, groups)
    n = A.shape[0]
    A2 = np.zeros((n, n), dtype=complex)
    B2 = np.zeros((n, n), dtype=complex)
    for lam, g in zip(reps, groups):
        Zg = Z[:, g]
        Zgh = Zg.conj().T
        A2 += lam * (Zg @ Zgh)
        block = _block_polar(Zgh @ B @ Zg, np.eye(len(g)))
        B2 += Zg @ block @ Zgh
    return _finalize_unitary(A2, kind), _finalize_unitary(B2, kind), len(groups)


def _cluster_pair(U, V, kind, params):
    """Best clustered candidate over both orientations and all scales."""
    delta = commutator_norm(U, V)
    best = None
    for swap in (False, True):
        A, B = (V, U) if swap else (U, V)
        eig = unitary_eigensystem(A)
        trace = []
        for k, scale in enumerate(_scales(delta, params)):
            A2, B2, count = _snap_pair(A, B, kind, eig, scale)
            trace.append((k, count))
            U2, V2 = (B2, A2) if swap else (A2, B2)
            eps = max(opnorm(U - U2), opnorm(V - V2))
            if best is None or eps < best[0]:
                best = (eps, U2, V2, scale, trace)
    return best


def _tangent(M, kind):
    Om = 0.5 * (M - M.conj().T)
    if kind == StructureKind.REAL_ORTHOGONAL:
        return Om.real
    return quaternionic_part(Om)


def _cayley_step(X, Om, t):
    n = X.shape[0]
    half = 0.5 * t * Om
    return X @ np.linalg.solve(np.eye(n) + half, np.eye(n) - half)


def _penalized_descent(U, V, kind, params):
    """Minimize ``|X-U|^2 + |Y-V|^2 + mu |XY-YX|^2`` over the structure group.

    ``mu`` doubles from 1 to ``2**(mu_stages-1)``; each step moves along the
    Riemannian gradient with a Cayley retraction and Armijo backtracking,
    so iterates stay orthogonal (or symplectic unitary) throughout.
    """
    X, Y = U.copy(), V.copy()
    iterations = 0
    t = 1.0

    def objective(X, Y, mu):
        C = X @ Y - Y @ X
        return (np.linalg.norm(X - U) ** 2 + np.linalg.norm(Y - V) ** 2
                + mu * np.linalg.norm(C) ** 2)

    for stage in range(params.mu_stages):
        mu = 2.0**stage
        fval = objective(X, Y, mu)
        for _ in range(params.descent_iters):
            C = X @ Y - Y @ X
            Gx = 2 * (X - U) + 2 * mu * (C @ Y.conj().T - Y.conj().T @ C)
            Gy = 2 * (Y - V) + 2 * mu * (X.conj().T @ C - C @ X.conj().T)
            Ox = _tangent(X.conj().T @ Gx, kind)
            Oy = _tangent(Y.conj().T @ Gy, kind)
            slope = np.linalg.norm(Ox) ** 2 + np.linalg.norm(Oy) ** 2
            if slope < 1e-24:
                break
            t = min(2.0 * t, 1.0 / np.sqrt(mu))
            for _ in range(40):
                Xn, Yn = _cayley_step(X, Ox, t), _cayley_step(Y, Oy, t)
                fn = objective(Xn, Yn, mu)
                if fn <= fval - 1e-4 * t * slope:
                    break
                t *= 0.5
            else:
                break
            X, Y, fval = Xn, Yn, fn
            iterations += 1
    return X, Y, iterations


def _pair_input(M, name):
    if not isinstance(M, StructuredMatrix):
        raise StructureError(f"{name} must be a StructuredMatrix")
    if M.kind not in PAIR_KINDS:
        raise StructureError(
            f"commuting_approximation supports real-orthogonal and symplectic-unitary, "
            f"not {M.kind.value}")
    report = validate(M)
    if not report.ok:
        raise StructureError(f"{name} is not {M.kind.value}: {report.describe()}")
    return M.array


def commuting_approximation(U: StructuredMatrix, V: StructuredMatrix,
                            params: SolverParams = SolverParams()) -> ApproximationResult:
    """Nearby exactly commuting pair of the same structure as ``(U, V)``."""
    if U.kind != V.kind:
        raise StructureError(f"kind mismatch: {U.kind.value} vs {V.kind.value}")
    if U.dim != V.dim:
        raise StructureError("dimension mismatch")
    kind = U.kind
    Ua, Va = _pair_input(U, "U"), _pair_input(V, "V")
    delta = commutator_norm(Ua, Va)
    if delta > params.delta_max:
        raise StructureError(f"commutator {delta:.3g} exceeds delta_max {params.delta_max}")

    eps, U2, V2, scale, trace = _cluster_pair(Ua, Va, kind, params)
    iterations = 0
    accepted = eps <= params.eps_budget
    if not accepted and params.descent:
        X, Y, iterations = _penalized_descent(Ua, Va, kind, params)
        cand = _cluster_pair(X, Y, kind, params)
        e2 = max(opnorm(Ua - cand[1]), opnorm(Va - cand[2]))
        if e2 < eps:
            eps, U2, V2, scale, trace = e2, cand[1], cand[2], cand[3], cand[4]
            accepted = True

    outputs = (StructuredMatrix(U2, kind, U.tol), StructuredMatrix(V2, kind, U.tol))
    residual = commutator_norm(U2, V2)
    epsilon = max(opnorm(Ua - outputs[0].entries), opnorm(Va - outputs[1].entries))
    if residual > RESIDUAL_TOL or not all(validate(o).ok for o in outputs):
        status = Status.FAILED
    elif accepted:
        status = Status.CONVERGED
    else:
        status = Status.CLUSTER_FALLBACK
    return ApproximationResult(outputs, epsilon, residual, status, iterations, trace, scale)


def _finalize_normal(M, kind):
    if kind == StructureKind.REAL_CONTRACTION:
        M = M.real
    else:
        M = quaternionic_part(M)
    norm = opnorm(M)
    if norm > 1.0:
        M = M / norm
    return M


def _snap_normal(H, other, eig, scale, imaginary):
    """Snap the Hermitian part ``H`` (or ``-i`` times the skew part) and compress ``other``."""
    vals, Z = eig
    groups = cluster_angles(vals, scale)
    n = H.shape[0]
    out = np.zeros((n, n), dtype=complex)
    for g in groups:
        Zg = Z[:, g]
        Zgh = Zg.conj().T
        mid = 0.5 * (vals[g].min() + vals[g].max())
        P = Zg @ Zgh
        out += (1j * mid if imaginary else mid) * P + Zg @ (Zgh @ other @ Zg) @ Zgh
    return out, len(groups)


def nearest_normal(X: StructuredMatrix, params: SolverParams = SolverParams()) -> ApproximationResult:
    """Nearby normal contraction of the same (real or quaternionic) structure.

    ``X = S + K`` with ``S`` Hermitian and ``K`` skew-Hermitian is normal
    iff ``S`` and ``K`` commute, so one of them is snapped to clusters of
    its spectrum and the other is compressed onto the cluster blocks.
    """
    if not isinstance(X, StructuredMatrix) or X.kind not in NORMAL_KINDS:
        raise StructureError("nearest_normal needs a real or quaternionic contraction")
    report = validate(X)
    if not report.ok:
        raise StructureError(f"X is not {X.kind.value}: {report.describe()}")
    kind = X.kind
    Xa = X.entries.copy()
    delta = self_commutator_norm(Xa)
    if delta > params.delta_max:
        raise StructureError(f"self-commutator {delta:.3g} exceeds delta_max {params.delta_max}")
    S = 0.5 * (Xa + Xa.conj().T)
    K = 0.5 * (Xa - Xa.conj().T)
    best = None
    for imaginary in (False, True):
        H, other = (-1j * K, S) if imaginary else (S, K)
        eig = la.eigh(0.5 * (H + H.conj().T))
        trace = []
        for k, scale in enumerate(_scales(delta, params)):
            Y, count = _snap_normal(H, other, eig, scale, imaginary)
            Y = _finalize_normal(Y, kind)
            trace.append((k, count))
            eps = opnorm(Xa - Y)
            if best is None or eps < best[0]:
                best = (eps, Y, scale, trace)
    eps, Y, scale, trace = best
    out = StructuredMatrix(Y, kind, X.tol)
    residual = self_commutator_norm(out.entries)
    epsilon = opnorm(Xa - out.entries)
    ok = residual <= RESIDUAL_TOL and opnorm(out.entries) <= 1 + NORM_TOL and validate(out).ok
    status = Status.CONVERGED if ok else Status.FAILED
    return ApproximationResult((out,), epsilon, residual, status, 0, trace, scale)
