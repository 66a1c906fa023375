"""Seeded generators of structured test inputs.

Every generator takes an integer seed and draws from numpy's PCG64.  Seeds
for individual trials are derived with :func:`derive_seed`, which hashes
``(base_seed, *keys)`` through :class:`numpy.random.SeedSequence`, so a
trial's stream depends only on its own coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .structures import (
    StructureError,
    StructuredMatrix,
    StructureKind,
    opnorm,
    project_to_symplectic,
    quaternionic_part,
    self_commutator_norm,
)

UNITARY_KINDS = (StructureKind.REAL_ORTHOGONAL, StructureKind.SYMPLECTIC_UNITARY,
                 StructureKind.GENERAL_UNITARY)
CONTRACTION_KINDS = (StructureKind.REAL_CONTRACTION, StructureKind.QUATERNIONIC_CONTRACTION)


class GenerationError(RuntimeError):
    pass


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) % 2**64))


def derive_seed(base_seed: int, *keys: int) -> int:
    """64-bit seed for the stream addressed by ``keys`` under ``base_seed``."""
    ss = np.random.SeedSequence(int(base_seed) % 2**64, spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class EnsembleSpec:
    dim: int
    kind: StructureKind
    eta: float = 0.0
    seed: int = 0

    def __post_init__(self):
        kind = StructureKind.parse(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if not 0.0 <= self.eta <= 0.5:
            raise ValueError("eta must lie in [0, 0.5]")
        if kind.needs_even_dim and self.dim % 2:
            raise ValueError(f"{kind.value} needs an even dimension")


def _complex_gaussian(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def haar_orthogonal(n: int, rng) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def haar_unitary(n: int, rng) -> np.ndarray:
    Q, R = np.linalg.qr(_complex_gaussian(rng, (n, n)))
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_symplectic(n2: int, rng) -> np.ndarray:
    """Random ``n2 x n2`` symplectic unitary (polar factor of a quaternionic Gaussian)."""
    return project_to_symplectic(quaternionic_part(_complex_gaussian(rng, (n2, n2))))


def _quaternionic_diagonal(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return np.diag(np.concatenate([z, z.conj()]))


def voiculescu_pair(n: int):
    """Clock and shift: ``U = diag(w^k)``, ``V`` the cyclic shift, ``VU = w UV``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    U = np.diag(np.exp(2j * np.pi * np.arange(n) / n))
    V = np.roll(np.eye(n, dtype=complex), 1, axis=1)
    return U, V


def commuting_pair(spec: EnsembleSpec):
    """Exactly commuting pair of ``spec.kind`` (``spec.eta`` is ignored).

    Both matrices are block diagonal in a common basis, which is then
    hidden by conjugating with one random structure-preserving matrix.
    """
    kind, n = spec.kind, spec.dim
    rng = rng_for(spec.seed)
    if kind == StructureKind.REAL_ORTHOGONAL:
        n_signs = n % 2 + 2 * int(rng.integers(0, n // 4 + 1))
        n_rot = (n - n_signs) // 2
        mats = []
        for _ in range(2):
            blocks = []
            for a in rng.uniform(-np.pi, np.pi, n_rot):
                c, s = np.cos(a), np.sin(a)
                blocks.append(np.array([[c, -s], [s, c]]))
            blocks.extend(np.array([[x]]) for x in rng.choice([-1.0, 1.0], n_signs))
            mats.append(la.block_diag(*blocks) if blocks else np.zeros((0, 0)))
        W = haar_orthogonal(n, rng)
        U, V = (W @ M @ W.T for M in mats)
    elif kind == StructureKind.SYMPLECTIC_UNITARY:
        m = n // 2
        D1 = _quaternionic_diagonal(np.exp(1j * rng.uniform(-np.pi, np.pi, m)))
        D2 = _quaternionic_diagonal(np.exp(1j * rng.uniform(-np.pi, np.pi, m)))
        W = random_symplectic(n, rng)
        U, V = (W @ D @ W.conj().T for D in (D1, D2))
    elif kind == StructureKind.GENERAL_UNITARY:
        D1 = np.diag(np.exp(1j * rng.uniform(-np.pi, np.pi, n)))
        D2 = np.diag(np.exp(1j * rng.uniform(-np.pi, np.pi, n)))
        W = haar_unitary(n, rng)
        U, V = (W @ D @ W.conj().T for D in (D1, D2))
    else:
        raise StructureError(f"commuting_pair does not support {kind.value}")
    return StructuredMatrix.checked(U, kind), StructuredMatrix.checked(V, kind)


def tangent_direction(kind: StructureKind, n: int, rng) -> np.ndarray:
    """Random unit-norm (operator norm) element of the structure's Lie algebra."""
    if kind == StructureKind.REAL_ORTHOGONAL:
        G = rng.standard_normal((n, n))
        K = 0.5 * (G - G.T)
    elif kind == StructureKind.SYMPLECTIC_UNITARY:
        G = quaternionic_part(_complex_gaussian(rng, (n, n)))
        K = 0.5 * (G - G.conj().T)
    elif kind == StructureKind.GENERAL_UNITARY:
        G = _complex_gaussian(rng, (n, n))
        K = 0.5 * (G - G.conj().T)
    else:
        raise StructureError(f"no tangent space sampler for {kind.value}")
    norm = opnorm(K)
    return K / norm if norm > 0 else K


def perturb(M: StructuredMatrix, eta: float, seed: int) -> StructuredMatrix:
    """``M exp(eta K)`` for a random unit tangent direction ``K``."""
    if not 0.0 <= eta <= 0.5:
        raise ValueError("eta must lie in [0, 0.5]")
    K = tangent_direction(M.kind, M.dim, rng_for(seed))
    if eta == 0.0:
        return M
    out = M.array @ la.expm(eta * K)
    return StructuredMatrix.checked(out, M.kind, M.tol)


def _normal_contraction(n: int, kind: StructureKind, rng, radius: float = 0.9) -> np.ndarray:
    if kind == StructureKind.REAL_CONTRACTION:
        n_real = n % 2 + 2 * int(rng.integers(0, n // 4 + 1))
        blocks = []
        for _ in range((n - n_real) // 2):
            r = radius * np.sqrt(rng.uniform())
            a = rng.uniform(-np.pi, np.pi)
            blocks.append(r * np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]]))
        blocks.extend(np.array([[x]]) for x in rng.uniform(-radius, radius, n_real))
        Q = haar_orthogonal(n, rng)
        return Q @ la.block_diag(*blocks) @ Q.T
    m = n // 2
    z = radius * np.sqrt(rng.uniform(size=m)) * np.exp(1j * rng.uniform(-np.pi, np.pi, m))
    W = random_symplectic(n, rng)
    return W @ _quaternionic_diagonal(z) @ W.conj().T


def almost_normal(dim: int, delta: float, kind, seed: int,
                  max_attempts: int = 100) -> StructuredMatrix:
    """Contraction whose self-commutator norm lies in ``[delta/2, delta]``.

    A normal contraction plus ``t`` times a random structured direction,
    radially rescaled into the unit ball; ``t`` is found by doubling and
    then bisection.
    """
    kind = StructureKind.parse(kind)
    if kind not in CONTRACTION_KINDS:
        raise StructureError(f"almost_normal does not support {kind.value}")
    if not 0.0 <= delta <= 0.5:
        raise ValueError("delta must lie in [0, 0.5]")
    if kind.needs_even_dim and dim % 2:
        raise ValueError(f"{kind.value} needs an even dimension")
    rng = rng_for(seed)
    X0 = _normal_contraction(dim, kind, rng)
    if kind == StructureKind.REAL_CONTRACTION:
        E = rng.standard_normal((dim, dim))
    else:
        E = quaternionic_part(_complex_gaussian(rng, (dim, dim)))
    E /= opnorm(E)

    def shaped(t):
        X = X0 + t * E
        return X / max(1.0, opnorm(X))

    if delta == 0.0:
        return StructuredMatrix.checked(X0, kind)
    lo, hi = 0.0, delta
    attempts = 0
    while self_commutator_norm(shaped(hi)) < delta / 2:
        lo, hi = hi, 2 * hi
        attempts += 1
        if attempts >= max_attempts:
            raise GenerationError("self-commutator window unreachable")
    t = hi
    while True:
        X = shaped(t)
        c = self_commutator_norm(X)
        if delta / 2 <= c <= delta:
            break
        if c > delta:
            hi = t
        else:
            lo = t
        t = 0.5 * (lo + hi)
        attempts += 1
        if attempts >= max_attempts:
            raise GenerationError("self-commutator window unreachable")
    if kind == StructureKind.QUATERNIONIC_CONTRACTION:
        X = quaternionic_part(X)
    return StructuredMatrix.checked(X, kind)
