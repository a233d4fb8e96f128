import json
import math

import numpy as np
import pytest

from subembed import (
    AffineSubspace,
    DegenerateInputError,
    DimensionError,
    EnsembleSpec,
    InputError,
    ResourceError,
    Subspace,
    SubspaceFamily,
    cross_family,
    epsilon_net,
    family_distortion,
    grassmann_distance,
    load_family_json,
    orthonormalize,
    random_subspace,
    reduce_affine,
    sample_matrix,
    sparse_subspace,
    store_family_json,
)
from subembed.geometry import covering_defect

SQRT2 = math.sqrt(2.0)


def sampled_grassmann(v, w, n_v=2000, n_w=20000, seed=0):
    """Brute-force max-min oracle over sampled coefficient spheres."""
    rng = np.random.default_rng(seed)
    cv = rng.standard_normal((n_v, v.dim))
    cv /= np.linalg.norm(cv, axis=1, keepdims=True)
    cw = rng.standard_normal((n_w, w.dim))
    cw /= np.linalg.norm(cw, axis=1, keepdims=True)
    pv = cv @ v.basis.T
    pw = cw @ w.basis.T
    # ||a - b||^2 = 2 - 2 <a, b> on unit vectors
    inner = pv @ pw.T
    dmin = np.sqrt(np.maximum(0.0, 2.0 - 2.0 * inner.max(axis=1)))
    return float(dmin.max())


# ---------------------------------------------------------------- orthonormalize


def test_orthonormalize_scaled_axes():
    mat = np.zeros((3, 2))
    mat[0, 0] = 2.0
    mat[1, 1] = 3.0
    sub = orthonormalize(mat)
    assert sub.dim == 2
    assert np.allclose(sub.projector(), np.diag([1.0, 1.0, 0.0]), atol=1e-12)


def test_orthonormalize_duplicate_columns_reduce_rank():
    mat = np.array([[1.0, 1.0], [0.0, 0.0], [0.0, 0.0]])
    sub = orthonormalize(mat)
    assert sub.dim == 1
    assert np.allclose(sub.projector(), np.diag([1.0, 0.0, 0.0]), atol=1e-12)


def test_orthonormalize_matches_independent_projector_oracle():
    rng = np.random.default_rng(3)
    mat = rng.standard_normal((8, 3))
    sub = orthonormalize(mat)
    # independent re-orthonormalization pass: double Gram-Schmidt via QR
    q, _ = np.linalg.qr(mat)
    q, _ = np.linalg.qr(q)
    assert np.allclose(sub.projector(), q @ q.T, atol=1e-8)


def test_orthonormalize_degenerate_and_idempotent():
    with pytest.raises(DegenerateInputError):
        orthonormalize(np.zeros((4, 2)))
    rng = np.random.default_rng(4)
    sub = orthonormalize(rng.standard_normal((6, 2)))
    again = orthonormalize(sub.basis)
    assert np.allclose(sub.projector(), again.projector(), atol=1e-10)


def test_subspace_rejects_non_orthonormal_basis():
    with pytest.raises(InputError):
        Subspace(np.array([[1.0], [1.0]]))
    with pytest.raises(DimensionError):
        Subspace(np.ones((2, 3)))


# ---------------------------------------------------------------- random/sparse


def test_random_subspace_full_space_is_identity_projector():
    sub = random_subspace(3, 3, seed=5)
    assert np.allclose(sub.projector(), np.eye(3), atol=1e-12)


def test_random_subspace_distinct_seeds_are_separated():
    a = random_subspace(8, 2, seed=1)
    b = random_subspace(8, 2, seed=2)
    assert grassmann_distance(a, b) > 0.0
    with pytest.raises(DimensionError):
        random_subspace(4, 5, seed=1)


def test_random_subspace_haar_moment():
    # E ||P_W e_1||^2 = k/n under the rotation-invariant distribution
    vals = [float(np.sum(random_subspace(16, 4, s).basis[0] ** 2)) for s in range(1000)]
    assert np.mean(vals) == pytest.approx(0.25, abs=0.02)


def test_sparse_subspace_basics():
    sub = sparse_subspace(4, (0, 1))
    assert np.allclose(sub.projector(), np.diag([1.0, 1.0, 0.0, 0.0]))
    assert np.allclose(sparse_subspace(3, (0, 1, 2)).basis, np.eye(3))
    with pytest.raises(InputError):
        sparse_subspace(4, (1, 1))
    with pytest.raises(InputError):
        sparse_subspace(4, (0, 4))


# ---------------------------------------------------------------- grassmann


def test_grassmann_distance_examples():
    e1 = sparse_subspace(2, (0,))
    e2 = sparse_subspace(2, (1,))
    diag = Subspace(np.array([[1.0], [1.0]]) / SQRT2)
    assert grassmann_distance(e1, e1) == pytest.approx(0.0, abs=1e-12)
    assert grassmann_distance(e1, e2) == pytest.approx(SQRT2, abs=1e-12)
    assert grassmann_distance(sparse_subspace(4, (0,)), sparse_subspace(4, (1,))) == pytest.approx(
        SQRT2, abs=1e-12
    )
    assert grassmann_distance(e1, diag) == pytest.approx(math.sqrt(2 - SQRT2), abs=1e-12)


def test_grassmann_distance_against_sampling_oracle():
    v = random_subspace(6, 2, seed=21)
    w = random_subspace(6, 3, seed=22)
    exact = grassmann_distance(v, w)
    assert abs(sampled_grassmann(v, w) - exact) < 1e-3
    e1 = sparse_subspace(2, (0,))
    diag = Subspace(np.array([[1.0], [1.0]]) / SQRT2)
    assert abs(sampled_grassmann(e1, diag) - math.sqrt(2 - SQRT2)) < 1e-3


def test_grassmann_distance_range_and_containment():
    rng = np.random.default_rng(9)
    for _ in range(20):
        v = random_subspace(7, int(rng.integers(1, 4)), seed=int(rng.integers(1e6)))
        w = random_subspace(7, int(rng.integers(1, 4)), seed=int(rng.integers(1e6)))
        d = grassmann_distance(v, w)
        assert 0.0 <= d <= SQRT2 + 1e-12
    big = random_subspace(6, 3, seed=77)
    inside = Subspace(big.basis[:, :2])  # contained subspace
    assert grassmann_distance(inside, big) < 1e-8
    assert grassmann_distance(big, inside) > 0.5
    with pytest.raises(DimensionError):
        grassmann_distance(random_subspace(4, 1, 0), random_subspace(5, 1, 0))


def test_sparse_families_pairwise_sqrt2():
    subs = [sparse_subspace(9, s) for s in ((0, 1, 2), (3, 4, 5), (6, 7, 8), (0, 1, 3))]
    for i in range(len(subs)):
        for j in range(i + 1, len(subs)):
            assert grassmann_distance(subs[i], subs[j]) == pytest.approx(SQRT2, abs=1e-10)


# ---------------------------------------------------------------- epsilon nets


def test_net_on_s0_is_two_points():
    net = epsilon_net(1, 0.5, seed=3)
    assert sorted(net.points.ravel().tolist()) == [-1.0, 1.0]
    assert net.size == 2 <= 6


def test_net_on_circle_at_eps_one():
    # 3 equispaced points suffice (max chord 2 sin(pi/6) = 1); bound is 9
    net = epsilon_net(2, 1.0, seed=3)
    assert net.size <= 9


def test_three_equispaced_points_cover_circle_at_eps_one():
    angles = np.array([0.0, 2 * math.pi / 3, 4 * math.pi / 3])
    tripod = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    rng = np.random.default_rng(17)
    probes = rng.standard_normal((100_000, 2))
    probes /= np.linalg.norm(probes, axis=1, keepdims=True)
    defect = covering_defect(tripod, probes)
    # worst probe sits midway between net points, at chord 2 sin(pi/6) = 1
    assert defect <= 1.0 + 1e-9
    assert defect >= 0.999


@pytest.mark.parametrize("k,eps", [(2, 0.5), (3, 0.5), (3, 0.3)])
def test_net_covering_oracle_and_cardinality(k, eps):
    net = epsilon_net(k, eps, seed=8)
    assert net.size <= math.floor((3 / eps) ** k)
    rng = np.random.default_rng(99)
    probes = rng.standard_normal((100_000, k))
    probes /= np.linalg.norm(probes, axis=1, keepdims=True)
    assert covering_defect(net.points, probes) <= eps
    assert np.allclose(np.linalg.norm(net.points, axis=1), 1.0, atol=1e-12)


def test_net_budget_and_validation():
    with pytest.raises(ResourceError) as err:
        epsilon_net(25, 0.1, seed=0)
    assert "budget" in str(err.value)
    with pytest.raises(InputError):
        epsilon_net(2, 1.5, seed=0)
    with pytest.raises(InputError):
        epsilon_net(2, 0.0, seed=0)


# ---------------------------------------------------------------- families


def test_reduce_affine_examples():
    e1 = sparse_subspace(3, (0,))
    affine = AffineSubspace(np.array([2.0, -1.0, 0.5]), e1)
    fam = SubspaceFamily((affine,))
    red = reduce_affine(fam)
    assert red.members[0].is_linear
    assert np.allclose(red.members[0].direction.projector(), e1.projector())
    linear = SubspaceFamily.from_subspaces([e1])
    red2 = reduce_affine(linear)
    assert all(m.is_linear for m in red2.members)


def test_reduce_affine_preserves_distortion_exactly():
    rng = np.random.default_rng(31)
    members = [
        AffineSubspace(rng.standard_normal(10), random_subspace(10, 2, seed=100 + i))
        for i in range(4)
    ]
    fam = SubspaceFamily(tuple(members))
    gamma = sample_matrix(EnsembleSpec.gaussian(), 6, 10, 17)
    a = family_distortion(gamma, fam)
    b = family_distortion(gamma, reduce_affine(fam))
    assert a.achieved_distortion == b.achieved_distortion
    assert a.per_subspace == b.per_subspace


def test_cross_family_examples():
    single = SubspaceFamily.from_subspaces([random_subspace(5, 2, seed=1)])
    crossed = cross_family(single)
    assert crossed.size == 1
    assert np.allclose(
        crossed.members[0].direction.projector(), single.members[0].direction.projector(), atol=1e-12
    )

    two = SubspaceFamily.from_subspaces([sparse_subspace(4, (0,)), sparse_subspace(4, (1,))])
    crossed2 = cross_family(two)
    assert crossed2.size == 3
    projectors = [m.direction.projector() for m in crossed2.members]
    target = np.diag([1.0, 1.0, 0.0, 0.0])
    assert any(np.allclose(p, target, atol=1e-10) for p in projectors)


def test_cross_family_dims_and_count_on_random_input():
    k, p = 3, 5
    fam = SubspaceFamily.from_subspaces([random_subspace(12, k, seed=40 + i) for i in range(p)])
    crossed = cross_family(fam)
    assert crossed.size == p * (p + 1) // 2
    for a_idx, member in enumerate(crossed.members):
        assert member.dim <= 2 * k
        # oracle: rank of the stacked spanning set
        assert member.dim == np.linalg.matrix_rank(member.direction.basis)
    with pytest.raises(ResourceError):
        cross_family(fam, cardinality_budget=3)


def test_family_json_round_trip(tmp_path):
    fam = SubspaceFamily(
        (
            AffineSubspace(np.array([1.0, 2.0, 0.0, 0.0]), sparse_subspace(4, (0, 2))),
            AffineSubspace(np.zeros(4), random_subspace(4, 1, seed=3)),
        )
    )
    path = tmp_path / "family.json"
    store_family_json(fam, path)
    loaded = load_family_json(path)
    assert loaded.size == fam.size
    for a, b in zip(fam.members, loaded.members):
        assert np.allclose(a.base_point, b.base_point)
        assert np.allclose(a.direction.projector(), b.direction.projector(), atol=1e-12)


def test_family_json_reorthonormalizes_on_load(tmp_path):
    payload = {
        "n": 3,
        "members": [{"base": [0.0, 0.0, 0.0], "basis_columns": [[2.0, 0.0, 0.0], [2.0, 1.0, 0.0]]}],
    }
    path = tmp_path / "raw.json"
    path.write_text(json.dumps(payload))
    fam = load_family_json(path)
    basis = fam.members[0].direction.basis
    assert np.allclose(basis.T @ basis, np.eye(2), atol=1e-12)
    assert np.allclose(fam.members[0].direction.projector(), np.diag([1.0, 1.0, 0.0]), atol=1e-12)


def test_family_validation():
    with pytest.raises(InputError):
        SubspaceFamily(())
    with pytest.raises(DimensionError):
        SubspaceFamily.from_subspaces([sparse_subspace(3, (0,)), sparse_subspace(4, (0,))])
