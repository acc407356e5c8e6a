import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from UnlabeledTriangulation.algebra_checks import (
    EXPECTED_FORM_DIMS,
    EXPECTED_NEW_GENERATORS,
    VarietySample,
    bidegree_monomials,
    check_gens_fund2,
    gens_fund2_report,
    new_generator_count,
    pencil_check,
    pencil_grid,
    rank_profile,
    relaxed_membership,
    sample_variety,
    vanishing_forms,
)
from UnlabeledTriangulation.camera import canonical_cameras, epipole, fundamental_matrix, random_rig
from UnlabeledTriangulation.errors import OutOfRangeError, PreconditionError
from UnlabeledTriangulation.matching_oracle import unlabeled_epipolar_products
from UnlabeledTriangulation.sym_rep import SymConfig, pair_to_sym, split_rank2, unlabeled_project
import numpy as np


def _raises(exc_type, func, *args, **kwargs):
    try:
        func(*args, **kwargs)
    except exc_type as exc:
        return exc
    raise AssertionError(f"{func.__name__} did not raise {exc_type.__name__}")


def test_monomial_counts():
    assert len(bidegree_monomials(1, 1)) == 36
    assert len(bidegree_monomials(3, 0)) == 56
    assert len(bidegree_monomials(2, 1)) == 126


def test_sample_is_on_the_variety():
    rig = random_rig(2, 1)
    sample = sample_variety(rig, 50, seed=1)
    assert sample.coordinates.shape == (50, 2, 6)
    for row in sample.coordinates:
        for entries in row:
            assert np.isclose(np.linalg.norm(entries), 1.0)


def test_sample_satisfies_the_two_view_equations():
    rig = random_rig(2, 11)
    sample = sample_variety(rig, 50, seed=11)
    F = fundamental_matrix(rig, 0, 1)
    for row in sample.coordinates:
        N1, N2 = (SymConfig(entries, 2, 3) for entries in row)
        assert abs(np.linalg.det(N1.matrix())) < 1e-9
        assert abs(np.linalg.det(N2.matrix())) < 1e-9
        u1, v1 = split_rank2(N1)
        u2, v2 = split_rank2(N2)
        assert np.abs(unlabeled_epipolar_products(F, u1, v1, u2, v2)).max() < 1e-8


def test_sample_is_seeded():
    rig = random_rig(2, 12)
    first = sample_variety(rig, 30, seed=12)
    assert np.array_equal(first.coordinates, sample_variety(rig, 30, seed=12).coordinates)
    assert not np.array_equal(first.coordinates, sample_variety(rig, 30, seed=13).coordinates)


def test_too_few_samples():
    sample = sample_variety(random_rig(2, 2), 40, seed=2)
    try:
        vanishing_forms(sample, (1, 1))
    except OutOfRangeError:
        pass
    else:
        raise AssertionError("36 monomials accepted with 40 samples")


def test_ideal_dimensions():
    rig = random_rig(2, 3)
    sample = sample_variety(rig, 500, seed=3)
    for bidegree, expected in EXPECTED_FORM_DIMS.items():
        space = vanishing_forms(sample, bidegree)
        assert space.dim == expected, (bidegree, space.dim)
        assert space.gap_ratio >= 10
    for bidegree, expected in EXPECTED_NEW_GENERATORS.items():
        assert new_generator_count(sample, bidegree) == expected
    assert sum(EXPECTED_FORM_DIMS.values()) + sum(EXPECTED_NEW_GENERATORS.values()) == 7


def test_bilinear_forms_come_from_fundamental_matrix():
    rng = np.random.default_rng(4)
    rigs = [canonical_cameras(2)] + [random_rig(2, rng) for _ in range(20)]
    for rig in rigs:
        sample = sample_variety(rig, 100, seed=int(rng.integers(2 ** 31)))
        report = gens_fund2_report(rig, sample)
        assert report.passed, report
        assert report.vanishing_dim == 3
        assert check_gens_fund2(rig, sample)


def test_bilinear_check_rejects_samples_off_the_variety():
    rng = np.random.default_rng(8)
    coordinates = rng.normal(size=(100, 2, 6))
    coordinates /= np.linalg.norm(coordinates, axis=2, keepdims=True)
    error = _raises(PreconditionError, check_gens_fund2, random_rig(2, rng),
                    VarietySample(coordinates, 8))
    assert error.details["vanishing_dim"] == 0


def test_rank_profile():
    rng = np.random.default_rng(5)
    profile = rank_profile(random_rig(2, rng), seed=5)
    assert profile.rank_of("lifted") == 9
    assert profile.rank_of("B") == 10
    assert profile.kernel_is_focal
    assert profile.passed
    for _ in range(20):
        for k in (3, 4, 5):
            profile = rank_profile(random_rig(k, rng), seed=int(rng.integers(2 ** 31)))
            assert profile.rank_of("lifted") == 10
            assert profile.rank_of("B") == 10 + k - 1
            assert profile.passed


def test_pencil_check():
    grid = pencil_grid()
    assert grid.size == 1000 and 0.0 in grid and 1.0 in grid
    report = pencil_check(count=20, seed=6)
    assert report.passed, report
    assert report.root_error < 1e-8
    assert 3 not in report.histogram


def test_relaxed_membership():
    rng = np.random.default_rng(7)
    rig = random_rig(2, rng)
    M = pair_to_sym(*rng.uniform(-1, 1, size=(2, 4)))
    Ns = [unlabeled_project(camera, M) for camera in rig]
    membership = relaxed_membership(rig, Ns)
    assert membership.relaxed and membership.unlabeled

    N1 = pair_to_sym(epipole(rig, 0, 1), rng.normal(size=3))
    N2 = pair_to_sym(*rng.normal(size=(2, 3)))
    membership = relaxed_membership(rig, [N1, N2])
    assert membership.relaxed
    assert membership.unlabeled is False


if __name__ == "__main__":
    for name, test in list(globals().items()):
        if name.startswith("test_") and callable(test):
            test()
            print(f"✓ {name}")
