"""Bott index of a pair of almost commuting unitaries, computed three ways.

* winding number of ``t -> det((1 - t) UV + t VU)`` on ``[0, 1]``,
* trace of the principal logarithm of ``V U V* U*`` divided by ``2 pi i``,
* the class of the Bott almost-projection ``e(U, V)`` above ``1/2``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg as la

from .structures import (
    StructureError,
    _square,
    commutator_norm,
    dual,
    opnorm,
    principal_log,
    unitary_eigensystem,
)

MAX_PATH_SAMPLES = 2**20
DEGENERATE_DET = 1e-12


class CommutatorTooLargeError(ValueError):
    """``||UV - VU|| >= 2``: the determinant path may pass through zero."""


class DegeneratePathError(ValueError):
    """The determinant path comes too close to the origin."""


class NoSpectralGapError(ValueError):
    """The almost-projection has spectrum inside the window around 1/2."""


@dataclass(frozen=True)
class WindingResult:
    winding: int
    path_min_abs_det: float
    samples_used: int


@dataclass(frozen=True)
class BottReport:
    winding: int
    trace_log: float
    k_class: int
    commutator: float
    path_min_abs_det: float
    samples_used: int

    def to_dict(self) -> dict:
        return asdict(self)


def _pair(U, V):
    U = _square(U).astype(complex)
    V = _square(V).astype(complex)
    if U.shape != V.shape:
        raise StructureError(f"dimension mismatch {U.shape} vs {V.shape}")
    return U, V


def _path_logdets(UV, VU, ts):
    """Phase and log|det| of ``(1 - t) UV + t VU`` for each ``t``."""
    stack = (1.0 - ts)[:, None, None] * UV + ts[:, None, None] * VU
    sign, logabs = np.linalg.slogdet(stack)
    return np.angle(sign), logabs


def bott_winding(U, V, initial_samples: int = 64) -> WindingResult:
    """Winding number of the determinant path, by adaptive refinement.

    Intervals whose phase step is at least ``pi/2`` are bisected until
    every step is below that, with at most ``2**20`` samples in total.
    """
    U, V = _pair(U, V)
    if commutator_norm(U, V) >= 2.0:
        raise CommutatorTooLargeError("Bott index needs ||UV - VU|| < 2")
    UV, VU = U @ V, V @ U
    ts = np.linspace(0.0, 1.0, max(int(initial_samples), 2) + 1)
    phase, logabs = _path_logdets(UV, VU, ts)
    min_log = np.log(DEGENERATE_DET)
    while True:
        if np.min(logabs) < min_log:
            raise DegeneratePathError(
                f"|det| along the path dropped to {np.exp(np.min(logabs)):.3g}")
        steps = np.angle(np.exp(1j * np.diff(phase)))
        bad = np.flatnonzero(np.abs(steps) >= np.pi / 2)
        if bad.size == 0:
            break
        if ts.size + bad.size > MAX_PATH_SAMPLES:
            raise DegeneratePathError("phase refinement exceeded the sample cap")
        mids = 0.5 * (ts[bad] + ts[bad + 1])
        mid_phase, mid_logabs = _path_logdets(UV, VU, mids)
        ts = np.insert(ts, bad + 1, mids)
        phase = np.insert(phase, bad + 1, mid_phase)
        logabs = np.insert(logabs, bad + 1, mid_logabs)
    winding = int(np.rint(np.sum(steps) / (2 * np.pi)))
    return WindingResult(winding, float(np.exp(np.min(logabs))), int(ts.size))


def bott_trace_log(U, V, branch_tol: float = 1e-6) -> float:
    """``Tr(Log(V U V* U*)) / (2 pi i)`` as a raw real number (not rounded)."""
    U, V = _pair(U, V)
    W = V @ U @ V.conj().T @ U.conj().T
    L = principal_log(W, branch_tol=branch_tol)
    return float((np.trace(L) / (2j * np.pi)).real)


def _bump_functions(angles):
    """Values of ``f, g, h`` on points ``exp(i * angles)`` of the circle.

    With ``s = angle / 2 pi`` in ``[0, 1)``: ``f = |1 - 2s|``, ``g`` is
    ``sqrt(f - f^2)`` on the lower half circle, ``h`` is the same on the
    upper half.  Hence ``g h = 0`` and ``g^2 + h^2 = f - f^2``, which makes
    ``e(U, V)`` an exact projection when ``U`` and ``V`` commute.
    """
    s = np.mod(angles, 2 * np.pi) / (2 * np.pi)
    f = np.abs(1.0 - 2.0 * s)
    root = np.sqrt(np.clip(f - f * f, 0.0, None))
    upper = s < 0.5
    g = np.where(upper, 0.0, root)
    h = np.where(upper, root, 0.0)
    return f, g, h


def bott_projection(U, V) -> np.ndarray:
    """Hermitian ``2n x 2n`` almost-projection ``e(U, V)``.

    ``[[f(V), g(V) + h(V) U], [g(V) + U* h(V), 1 - f(V)]]`` with the
    functions applied to ``V`` through its unitary eigendecomposition.
    """
    U, V = _pair(U, V)
    n = U.shape[0]
    w, Z = unitary_eigensystem(V)
    f, g, h = _bump_functions(np.angle(w))
    Zh = Z.conj().T
    fV = (Z * f) @ Zh
    gV = (Z * g) @ Zh
    hV = (Z * h) @ Zh
    top_right = gV + hV @ U
    e = np.block([[fV, top_right], [top_right.conj().T, np.eye(n) - fV]])
    return 0.5 * (e + e.conj().T)


def k_class(e, gap_tol: float = 0.05) -> int:
    """Number of eigenvalues of ``e`` above 1/2, minus half the dimension."""
    e = _square(e)
    if e.shape[0] % 2:
        raise StructureError("k_class expects a 2n x 2n matrix")
    evals = la.eigvalsh(0.5 * (e + e.conj().T))
    if np.any(np.abs(evals - 0.5) < gap_tol):
        raise NoSpectralGapError("eigenvalue within gap_tol of 1/2")
    return int(np.count_nonzero(evals > 0.5)) - e.shape[0] // 2


def bott_report(U, V, initial_samples: int = 64, gap_tol: float = 0.05,
                branch_tol: float = 1e-6) -> BottReport:
    wr = bott_winding(U, V, initial_samples)
    return BottReport(
        winding=wr.winding,
        trace_log=bott_trace_log(U, V, branch_tol),
        k_class=k_class(bott_projection(U, V), gap_tol),
        commutator=commutator_norm(U, V),
        path_min_abs_det=wr.path_min_abs_det,
        samples_used=wr.samples_used,
    )


@dataclass(frozen=True)
class PairingResult:
    paired: bool
    pairs: list
    eigenvalues: np.ndarray


def spectral_pairing_check(X, tol: float = 1e-8) -> PairingResult:
    """Check that the spectrum of a self-dual unitary is closed under conjugation.

    Each eigenvalue is greedily matched with a distinct eigenvalue lying
    within ``tol`` of its complex conjugate.  Eigenvalues near ``+-1`` must
    therefore occur with even multiplicity.
    """
    X = _square(X).astype(complex)
    if X.shape[0] % 2:
        raise StructureError("spectral pairing needs an even dimension")
    if opnorm(dual(X) - X.conj().T) > tol or opnorm(X.conj().T @ X - np.eye(X.shape[0])) > tol:
        raise StructureError("expected a unitary X with X# = X*")
    w, _ = unitary_eigensystem(X, unitarity_tol=max(tol, 1e-8))
    order = np.argsort(-np.angle(w), kind="stable")
    free = np.ones(w.size, dtype=bool)
    pairs = []
    ok = True
    for i in order:
        if not free[i]:
            continue
        free[i] = False
        cand = np.flatnonzero(free)
        if cand.size == 0:
            ok = False
            break
        dist = np.abs(w[cand] - np.conj(w[i]))
        j = cand[np.argmin(dist)]
        if dist.min() > tol:
            ok = False
            continue
        free[j] = False
        pairs.append((complex(w[i]), complex(w[j])))
    return PairingResult(ok and not free.any(), pairs, w)
