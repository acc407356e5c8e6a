import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from UnlabeledTriangulation.sym_rep import (
    SymConfig,
    config_to_sym,
    lift_camera,
    multi_indices,
    nearest_rank2,
    pair_to_sym,
    split_rank2,
    sym_length,
    transform_sym,
    unlabeled_focal_point,
    unlabeled_project,
    unvectorize,
    vectorize,
)
from UnlabeledTriangulation.errors import ComplexPairError, DegenerateProjectionError
from UnlabeledTriangulation.errors import NotSplittableError, ShapeError
from UnlabeledTriangulation.projective_core import proj_distance, proj_equal
from UnlabeledTriangulation.camera import canonical_cameras, random_rig
import numpy as np


def _raises(exc_type, func, *args, **kwargs):
    try:
        func(*args, **kwargs)
    except exc_type:
        return
    raise AssertionError(f"{func.__name__} did not raise {exc_type.__name__}")


def test_storage_order():
    assert multi_indices(2, 4)[:4] == ((0, 0), (0, 1), (0, 2), (0, 3))
    assert multi_indices(2, 4)[-1] == (3, 3)
    assert sym_length(2, 3) == 6
    assert sym_length(2, 4) == 10
    assert sym_length(3, 4) == 20


def test_pair_to_sym_examples():
    N = pair_to_sym([1, 0, 0], [0, 1, 0])
    expected = np.zeros((3, 3))
    expected[0, 1] = expected[1, 0] = 1.0
    assert proj_equal(N.matrix().ravel(), expected.ravel())

    N = pair_to_sym([1, 2, 3], [4, 5, 6])
    assert proj_equal(N.entries, [8, 13, 18, 20, 27, 36])

    N = pair_to_sym([1, 0, 0], [1, 0, 0])
    assert np.linalg.matrix_rank(N.matrix()) == 1
    assert proj_equal(N.entries, [1, 0, 0, 0, 0, 0])


def test_pair_to_sym_is_unordered():
    rng = np.random.default_rng(1)
    for _ in range(20):
        u, v = rng.normal(size=(2, 4))
        assert pair_to_sym(u, v) == pair_to_sym(v, -2.0 * u)


def test_config_to_sym_matches_pair_to_sym():
    rng = np.random.default_rng(2)
    for _ in range(10):
        u, v = rng.normal(size=(2, 3))
        assert config_to_sym([u, v]) == pair_to_sym(u, v)


def test_vectorize_and_tensor_agree():
    rng = np.random.default_rng(3)
    points = rng.normal(size=(3, 4))
    M = config_to_sym(points)
    T = M.to_tensor()
    assert np.allclose(T, np.transpose(T, (1, 0, 2)))
    assert np.allclose(T, np.transpose(T, (2, 1, 0)))
    again = SymConfig.from_tensor(T)
    assert np.array_equal(vectorize(again), M.entries)
    assert unvectorize(vectorize(M), 3, 4) == M


def test_from_tensor_rejects_asymmetric():
    _raises(ShapeError, SymConfig.from_tensor, np.arange(9.0).reshape(3, 3))


def test_unlabeled_project_commutes_with_symmetrisation():
    rng = np.random.default_rng(4)
    rig = random_rig(2, rng)
    for _ in range(20):
        X, Y = rng.uniform(-1, 1, size=(2, 4))
        camera = rig[0]
        image = unlabeled_project(camera, pair_to_sym(X, Y))
        assert image == pair_to_sym(camera.project(X), camera.project(Y))


def test_unlabeled_project_of_rank2_is_singular():
    rng = np.random.default_rng(5)
    for _ in range(100):
        camera = random_rig(1, rng)[0]
        X, Y = rng.uniform(-1, 1, size=(2, 4))
        N = unlabeled_project(camera, pair_to_sym(X, Y))
        assert abs(np.linalg.det(N.matrix())) < 1e-9


def test_unlabeled_project_degenerate():
    camera = canonical_cameras(1)[0]
    _raises(DegenerateProjectionError, unlabeled_project, camera,
            pair_to_sym([1, 0, 0, 0], [0, 1, 0, 0]))


def test_lifted_camera_matches_projection():
    rng = np.random.default_rng(6)
    camera = random_rig(1, rng)[0]
    for order in (2, 3):
        lifted = lift_camera(camera, order)
        assert lifted.matrix.shape == (sym_length(order, 3), sym_length(order, 4))
        M = config_to_sym(rng.uniform(-1, 1, size=(order, 4)))
        image = unlabeled_project(camera, M)
        assert proj_equal(lifted.apply(M), image.entries)


def test_lifted_kernel_is_unlabeled_focal_point():
    rng = np.random.default_rng(7)
    rig = random_rig(2, rng)
    f = unlabeled_focal_point(rig, (0, 1))
    for camera in rig:
        assert np.linalg.norm(lift_camera(camera, 2).apply(f)) < 1e-10


def test_split_rank2():
    points = split_rank2(pair_to_sym([1, 0, 0, 0], [0, 1, 0, 0]))
    assert {tuple(np.round(p.to_list(), 12)) for p in points} == {(1.0, 0.0, 0.0, 0.0),
                                                                 (0.0, 1.0, 0.0, 0.0)}
    rng = np.random.default_rng(8)
    for _ in range(50):
        X, Y = rng.uniform(-1, 1, size=(2, 4))
        P, Q = split_rank2(pair_to_sym(X, Y))
        direct = proj_distance(P, X) + proj_distance(Q, Y)
        swapped = proj_distance(P, Y) + proj_distance(Q, X)
        assert min(direct, swapped) < 1e-6


def test_split_rank2_failures():
    _raises(NotSplittableError, split_rank2, SymConfig.from_tensor(np.eye(4)))
    definite = np.diag([1.0, 2.0, 0.0, 0.0])
    _raises(ComplexPairError, split_rank2, SymConfig.from_tensor(definite))


def test_nearest_rank2():
    rng = np.random.default_rng(9)
    X, Y = rng.uniform(-1, 1, size=(2, 4))
    M = pair_to_sym(X, Y)
    assert nearest_rank2(M) == M
    noisy = SymConfig(M.entries + 1e-6 * rng.normal(size=10), 2, 4)
    truncated = nearest_rank2(noisy)
    assert np.linalg.matrix_rank(truncated.matrix(), tol=1e-12) == 2
    assert proj_distance(truncated.entries, M.entries) < 1e-5


def test_transform_sym_equivariance():
    rng = np.random.default_rng(10)
    rig = random_rig(2, rng)
    H = rng.normal(size=(4, 4))
    moved = rig.transformed(H)
    M = pair_to_sym(*rng.uniform(-1, 1, size=(2, 4)))
    M_moved = transform_sym(M, H)
    for camera, camera_moved in zip(rig, moved):
        assert unlabeled_project(camera, M) == unlabeled_project(camera_moved, M_moved)


if __name__ == "__main__":
    for name, test in list(globals().items()):
        if name.startswith("test_") and callable(test):
            test()
            print(f"✓ {name}")
