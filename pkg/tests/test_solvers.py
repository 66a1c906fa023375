import numpy as np
import pytest

from almost_commuting.ensembles import (
    EnsembleSpec,
    almost_normal,
    commuting_pair,
    perturb,
    random_symplectic,
    rng_for,
    voiculescu_pair,
)
from almost_commuting.solvers import (
    SolverParams,
    Status,
    cluster_angles,
    commuting_approximation,
    nearest_normal,
)
from almost_commuting.structures import (
    StructuredMatrix,
    StructureError,
    commutator_norm,
    opnorm,
    self_commutator_norm,
    validate,
)
from oracles import gap_scan_clusters, nearest_normal_2x2


def perturbed(kind, dim, eta, seed):
    U, V = commuting_pair(EnsembleSpec(dim, kind, seed=seed))
    return perturb(U, eta, 1000 + seed), perturb(V, eta, 2000 + seed)


def assert_converged_pair(res, U, V, kind):
    assert res.status is Status.CONVERGED
    U2, V2 = res.outputs
    assert commutator_norm(U2.entries, V2.entries) <= 1e-10
    assert res.residual <= 1e-10
    assert validate(StructuredMatrix(U2.entries, kind)).ok
    assert validate(StructuredMatrix(V2.entries, kind)).ok
    eps = max(opnorm(U.entries - U2.entries), opnorm(V.entries - V2.entries))
    assert res.epsilon == pytest.approx(eps, rel=1e-9, abs=1e-14)


# cluster_angles

def test_cluster_obvious_gap():
    assert cluster_angles([0.0, 0.001, 1.0], 0.1) == [[0, 1], [2]]


def test_cluster_dense_spacing_single():
    vals = np.arange(20) * 0.05
    assert cluster_angles(vals, 0.1) == [list(range(20))]


def test_cluster_order_independent_of_input_order():
    vals = [1.0, 0.0, 0.001]
    assert cluster_angles(vals, 0.1) == [[1, 2], [0]]


def test_cluster_periodic_wraps():
    groups = cluster_angles([0.01, 3.0, 2 * np.pi - 0.01], 0.1, period=2 * np.pi)
    assert sorted(map(sorted, groups)) == [[0, 2], [1]]


def test_cluster_rejects_nonpositive_scale():
    with pytest.raises(ValueError):
        cluster_angles([0.0], 0.0)


def test_cluster_empty():
    assert cluster_angles([], 0.1) == []


@pytest.mark.parametrize("seed", range(10))
def test_cluster_matches_gap_scan_oracle(seed):
    rng = rng_for(seed)
    vals = rng.uniform(0, 2 * np.pi, 100)
    scale = rng.uniform(0.01, 0.2)
    got = sorted(sorted(g) for g in cluster_angles(vals, scale))
    assert got == gap_scan_clusters(vals, scale)


@pytest.mark.parametrize("seed", range(5))
def test_cluster_gap_and_diameter_bounds(seed):
    vals = rng_for(seed).uniform(0, 1, 50)
    scale = 0.03
    groups = cluster_angles(vals, scale)
    assert sorted(i for g in groups for i in g) == list(range(50))
    for a, b in zip(groups, groups[1:]):
        assert vals[b].min() - vals[a].max() >= scale
    for g in groups:
        assert np.ptp(vals[g]) < len(g) * scale


# commuting_approximation

@pytest.mark.parametrize("kind", ["real-orthogonal", "symplectic-unitary"])
def test_commuting_input_is_fixed_point(kind):
    U, V = commuting_pair(EnsembleSpec(8, kind, seed=4))
    res = commuting_approximation(U, V)
    assert_converged_pair(res, U, V, U.kind)
    assert res.epsilon <= 1e-10


def test_real_orthogonal_dim8_seed1():
    U, V = commuting_pair(EnsembleSpec(8, "real-orthogonal", seed=1))
    U, V = perturb(U, 0.01, 11), perturb(V, 0.01, 12)
    res = commuting_approximation(U, V)
    assert_converged_pair(res, U, V, U.kind)
    assert res.epsilon <= 0.2


@pytest.mark.parametrize("kind", ["real-orthogonal", "symplectic-unitary"])
@pytest.mark.parametrize("seed", range(4))
def test_perturbed_pairs_converge(kind, seed):
    U, V = perturbed(kind, 12, 0.05, seed)
    res = commuting_approximation(U, V)
    assert_converged_pair(res, U, V, U.kind)
    assert res.epsilon < 0.3


@pytest.mark.parametrize("kind", ["real-orthogonal", "symplectic-unitary"])
def test_idempotence(kind):
    U, V = perturbed(kind, 8, 0.05, 9)
    U2, V2 = commuting_approximation(U, V).outputs
    res = commuting_approximation(U2, V2)
    assert res.status is Status.CONVERGED
    assert res.epsilon <= 1e-10


def test_general_unitary_rejected():
    U, V = voiculescu_pair(6)
    with pytest.raises(StructureError):
        commuting_approximation(StructuredMatrix(U, "general-unitary"),
                                StructuredMatrix(V, "general-unitary"))


def test_mixed_kinds_rejected():
    U, _ = commuting_pair(EnsembleSpec(4, "real-orthogonal", seed=0))
    _, V = commuting_pair(EnsembleSpec(4, "symplectic-unitary", seed=0))
    with pytest.raises(StructureError):
        commuting_approximation(U, V)


def test_commutator_above_delta_max_rejected():
    U, V = perturbed("real-orthogonal", 8, 0.3, 2)
    assert commutator_norm(U.entries, V.entries) > 0.05
    with pytest.raises(StructureError):
        commuting_approximation(U, V, SolverParams(delta_max=0.05))


def test_descent_improves_on_clustering():
    U, V = perturbed("symplectic-unitary", 16, 0.05, 3)
    plain = commuting_approximation(U, V, SolverParams(descent=False))
    refined = commuting_approximation(U, V)
    assert refined.status is Status.CONVERGED
    assert refined.epsilon <= plain.epsilon + 1e-12


@pytest.mark.slow
def test_monotone_median_trend_dim16():
    medians = []
    for eta in (0.1, 0.05, 0.025, 0.0125):
        eps = []
        for seed in range(50):
            U, V = perturbed("real-orthogonal", 16, eta, seed)
            res = commuting_approximation(U, V)
            assert res.status is Status.CONVERGED
            eps.append(res.epsilon)
        medians.append(np.median(eps))
    assert all(a >= b for a, b in zip(medians, medians[1:]))
    assert medians[-1] < medians[0]


# nearest_normal

def test_normal_input_unchanged():
    rng = rng_for(5)
    Q = np.linalg.qr(rng.standard_normal((6, 6)))[0]
    D = np.diag(rng.uniform(-0.9, 0.9, 6))
    X = StructuredMatrix(Q @ D @ Q.T, "real-contraction")
    res = nearest_normal(X)
    assert res.status is Status.CONVERGED
    assert res.epsilon <= 1e-10


def test_quaternionic_normal_dim4_unchanged():
    W = random_symplectic(4, rng_for(8))
    z = np.array([0.5 + 0.3j, -0.2 + 0.6j])
    D = np.diag(np.concatenate([z, z.conj()]))
    X = StructuredMatrix(W @ D @ W.conj().T, "quaternionic-contraction")
    assert self_commutator_norm(X.entries) < 1e-14
    res = nearest_normal(X)
    assert res.status is Status.CONVERGED
    assert res.epsilon <= 1e-10


def test_two_by_two_matches_oracle():
    Xa = np.array([[0.0, 0.2], [0.0, 0.0]])
    assert self_commutator_norm(Xa) == pytest.approx(0.04)
    res = nearest_normal(StructuredMatrix(Xa, "real-contraction"))
    oracle = nearest_normal_2x2(Xa)
    assert res.status is Status.CONVERGED
    assert abs(res.epsilon - oracle) <= 0.02


@pytest.mark.parametrize("kind", ["real-contraction", "quaternionic-contraction"])
@pytest.mark.parametrize("seed", range(4))
def test_almost_normal_outputs(kind, seed):
    X = almost_normal(8, 0.05, kind, seed)
    res = nearest_normal(X)
    (Y,) = res.outputs
    assert self_commutator_norm(Y.entries) <= 1e-10
    assert opnorm(Y.entries) <= 1 + 1e-12
    assert validate(Y).ok
    assert res.epsilon == pytest.approx(opnorm(X.entries - Y.entries), rel=1e-9, abs=1e-14)


def test_nearest_normal_rejects_pairs_kind():
    U, _ = commuting_pair(EnsembleSpec(4, "real-orthogonal", seed=0))
    with pytest.raises(StructureError):
        nearest_normal(U)


def test_summary_fields():
    U, V = perturbed("real-orthogonal", 6, 0.02, 0)
    s = commuting_approximation(U, V).summary()
    assert set(s) == {"status", "epsilon", "residual", "iterations", "scale", "cluster_trace"}
