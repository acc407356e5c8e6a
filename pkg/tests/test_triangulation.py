import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from UnlabeledTriangulation.triangulation import (
    build_B,
    pencil_rank2_points,
    reconstruction_error,
    triangulate,
    triangulate_multiview,
    triangulate_two_view,
)
from UnlabeledTriangulation.errors import (
    AmbiguousTriangulationError,
    DegenerateConfigurationError,
    PreconditionError,
    ShapeError,
    UnsupportedConfigurationError,
)
from UnlabeledTriangulation.sym_rep import (
    SymConfig,
    config_to_sym,
    pair_to_sym,
    unlabeled_focal_point,
    unlabeled_project,
)
from UnlabeledTriangulation.projective_core import normalize_vector, proj_distance
from UnlabeledTriangulation.camera import epipole, random_rig
from UnlabeledTriangulation.linalg import SVD, numerical_rank
from UnlabeledTriangulation.scene import generate_scene, project_scene
import numpy as np


def _raises(exc_type, func, *args, **kwargs):
    try:
        func(*args, **kwargs)
    except exc_type as exc:
        return exc
    raise AssertionError(f"{func.__name__} did not raise {exc_type.__name__}")


def _scene(rig, points):
    world = config_to_sym(points)
    return world, [unlabeled_project(camera, world) for camera in rig]


def _same_pair(found, truth, tol):
    P, Q = found
    X, Y = truth
    direct = max(proj_distance(P, X), proj_distance(Q, Y))
    swapped = max(proj_distance(P, Y), proj_distance(Q, X))
    return min(direct, swapped) < tol


def test_two_view_round_trip():
    rng = np.random.default_rng(100)
    for _ in range(100):
        rig = random_rig(2, rng)
        X, Y = rng.uniform(-1, 1, size=(2, 4))
        world, Ns = _scene(rig, (X, Y))
        result = triangulate_two_view(rig, *Ns)
        assert result.method == "two_view"
        assert result.kernel_dim == 2
        assert not result.ambiguous
        assert proj_distance(result.M_delta.entries, world.entries) < 1e-8
        assert _same_pair(result.points, (X, Y), 1e-6)


def test_two_view_exact_scenes_always_split():
    for seed in range(2000):
        scene = generate_scene(2, 2, seed=seed)
        result = triangulate(scene.rig, project_scene(scene).Ns)
        assert result.points is not None, seed
        assert reconstruction_error(result, scene.world_points) < 1e-8, seed
        assert _same_pair(result.points, [X.coords for X in scene.world_points], 1e-6), seed


def test_two_view_pencil_roots():
    rng = np.random.default_rng(110)
    for _ in range(20):
        rig = random_rig(2, rng)
        world, Ns = _scene(rig, rng.uniform(-1, 1, size=(2, 4)))
        result = triangulate_two_view(rig, *Ns)

        svd = SVD(build_B(rig, Ns).matrix)
        f = unlabeled_focal_point(rig, (0, 1))
        f_full = np.concatenate([f.entries, [0.0, 0.0]])
        V2 = svd.smallest_right(2)
        M = normalize_vector(SVD(V2 - np.outer(f_full, f_full @ V2)).U[:10, 0])

        members = dict(pencil_rank2_points(SymConfig(M, 2, 4), f))
        roots = sorted(members)
        expected = sorted((0.0, result.double_root))
        assert abs(roots[0] - expected[0]) < 1e-6 and abs(roots[1] - expected[1]) < 1e-6
        at_zero = min(roots, key=abs)
        at_c = max(roots, key=abs)
        assert proj_distance(members[at_zero].entries, f.entries) < 1e-8
        assert proj_distance(members[at_c].entries, world.entries) < 1e-8


def test_multiview_round_trip():
    rng = np.random.default_rng(200)
    for n in (3, 4):
        for _ in range(50):
            rig = random_rig(n, rng)
            X, Y = rng.uniform(-1, 1, size=(2, 4))
            world, Ns = _scene(rig, (X, Y))
            result = triangulate(rig, Ns)
            assert result.method == "multiview"
            assert result.kernel_dim == 1
            assert result.gap_ratio >= 1e6
            assert proj_distance(result.M_delta.entries, world.entries) < 1e-8
            assert _same_pair(result.points, (X, Y), 1e-6)


def test_two_view_kernel_structure():
    rng = np.random.default_rng(300)
    for _ in range(50):
        rig = random_rig(2, rng)
        X, Y = rng.uniform(-1, 1, size=(2, 4))
        world, Ns = _scene(rig, (X, Y))
        system = build_B(rig, Ns)
        assert system.matrix.shape == (12, 12)
        svd = SVD(system.matrix)
        assert svd.rank == 10
        assert svd.nullity == 2

        f = unlabeled_focal_point(rig, (0, 1))
        assert svd.residual(np.concatenate([f.entries, [0.0, 0.0]])) < 1e-8

        result = triangulate_two_view(rig, *Ns)
        solution = np.concatenate([result.M_delta.entries, -result.scales])
        assert svd.residual(solution) < 1e-8


def test_general_order_round_trip():
    rng = np.random.default_rng(400)
    for _ in range(10):
        rig = random_rig(4, rng)
        points = rng.uniform(-1, 1, size=(3, 4))
        world, Ns = _scene(rig, points)
        result = triangulate(rig, Ns)
        assert result.kernel_dim == 1
        assert result.M_delta.order == 3
        assert proj_distance(result.M_delta.entries, world.entries) < 1e-8


def test_general_order_too_few_views():
    rng = np.random.default_rng(401)
    rig = random_rig(3, rng)
    world, Ns = _scene(rig, rng.uniform(-1, 1, size=(3, 4)))

    system = build_B(rig, Ns)
    f = unlabeled_focal_point(rig, (0, 1, 2))
    vector = np.concatenate([f.entries, np.zeros(3)])
    assert SVD(system.matrix).residual(vector) < 1e-10

    error = _raises(DegenerateConfigurationError, triangulate_multiview, rig, Ns)
    assert error.details["kernel_dim"] >= 2
    _raises(UnsupportedConfigurationError, triangulate, rig, Ns)


def test_epipole_family_is_degenerate():
    rng = np.random.default_rng(500)
    rig = random_rig(2, rng)
    e01 = epipole(rig, 0, 1)
    N1 = pair_to_sym(e01, rng.normal(size=3))
    for _ in range(20):
        N2 = pair_to_sym(*rng.normal(size=(2, 3)))
        assert numerical_rank(build_B(rig, (N1, N2)).matrix) <= 10
    error = _raises(AmbiguousTriangulationError, triangulate_two_view, rig, N1, N2)
    assert "kernel_dim" in error.details


def test_noisy_multiview():
    within = 0
    for seed in range(100):
        scene = generate_scene(3, 2, seed=seed, noise_sigma=1e-6)
        result = triangulate(scene.rig, project_scene(scene).Ns)
        if reconstruction_error(result, scene.world_points) < 1e-3:
            within += 1
    assert within >= 95


def test_mixed_orders_rejected():
    rng = np.random.default_rng(600)
    rig = random_rig(3, rng)
    Ns = [pair_to_sym(*rng.normal(size=(2, 3))),
          config_to_sym(rng.normal(size=(3, 3))),
          pair_to_sym(*rng.normal(size=(2, 3)))]
    _raises(ShapeError, triangulate, rig, Ns)


def test_pencil_of_rank2_matrices():
    rng = np.random.default_rng(700)
    for _ in range(100):
        M1 = pair_to_sym(*rng.uniform(-1, 1, size=(2, 4)))
        M2 = pair_to_sym(*rng.uniform(-1, 1, size=(2, 4)))
        members = pencil_rank2_points(M1, M2)
        alphas = [alpha for alpha, _ in members]
        assert abs(alphas[0]) < 1e-8 and abs(alphas[1] - 1.0) < 1e-8
        assert members[0][1] == M2
        assert members[1][1] == M1


def test_pencil_precondition():
    rng = np.random.default_rng(701)
    X, Y, Z = rng.uniform(-1, 1, size=(3, 4))
    _raises(PreconditionError, pencil_rank2_points, pair_to_sym(X, Y), pair_to_sym(X, Z))


if __name__ == "__main__":
    for name, test in list(globals().items()):
        if name.startswith("test_") and callable(test):
            test()
            print(f"✓ {name}")
