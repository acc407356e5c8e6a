"""
Numerical verification of the algebraic structure behind unlabeled
triangulation.

Points are sampled on the unlabeled two-view variety (images of random
world pairs) and the dimensions of the spaces of vanishing forms in each
bidegree are read off the null spaces of monomial evaluation matrices. On
top of that the module checks the rank pattern of the lifted cameras and of
B_sigma, the containment of the bilinear vanishing forms in the span of the
entries of N_2 F N_1, and the rank behaviour of pencils of rank-2 matrices.
"""

from .errors import DegenerateInputError, DegenerateRigError, NotSplittableError
from .errors import OutOfRangeError, PreconditionError, UnreliableRankError
from .sym_rep import lift_camera, multi_indices, pair_to_sym, split_rank2, unlabeled_project
from .sym_rep import SymConfig, config_to_sym, unlabeled_focal_point
from .linalg import SVD, INIT_MIN_GAP_RATIO, INIT_TOL_RANK, numerical_rank
from .triangulation import build_B, pencil_rank2_points
from .matching_oracle import unlabeled_epipolar_products
from .projective_core import INIT_TOL_INCIDENCE, proj_equal
from dataclasses import dataclass, field
from .camera import fundamental_matrix
from typing import Dict, List, Optional
from .logsetup import logger
from collections import Counter
import scipy.linalg
import numpy as np
import functools
import itertools

INIT_TOL_FORM = 1e-7
INIT_TOL_ANGLE = 1e-6
INIT_SAMPLE_COUNT = 500
INIT_PENCIL_GRID = 1000
INIT_MAX_REJECTION = 0.5

# Coordinates of a point of P^5: the entries N00, N01, N02, N11, N12, N22.
SYM_COORDS = 6

EXPECTED_FORM_DIMS = {(1, 1): 3, (3, 0): 1, (0, 3): 1, (1, 0): 0}
EXPECTED_NEW_GENERATORS = {(2, 1): 1, (1, 2): 1}


@dataclass(frozen=True)
class VarietySample:
    """Image tuples (N_1, ..., N_n) of random world pairs, normalised per view."""

    coordinates: np.ndarray
    seed: Optional[int] = None
    rejected: int = 0

    @property
    def count(self):
        return self.coordinates.shape[0]

    def view(self, i):
        return self.coordinates[:, i, :]


@dataclass(frozen=True)
class FormSpace:
    bidegree: tuple
    monomials: tuple
    basis: np.ndarray
    gap_ratio: float
    singular_values: np.ndarray = field(repr=False, default=None)

    @property
    def dim(self):
        return self.basis.shape[0]


@dataclass(frozen=True)
class GensFund2Report:
    passed: bool
    max_angle: float
    vanishing_dim: int
    span_dim: int

    def to_dict(self):
        return {"passed": self.passed, "max_angle": float(self.max_angle),
                "vanishing_dim": self.vanishing_dim, "span_dim": self.span_dim}


@dataclass(frozen=True)
class RankEntry:
    name: str
    rank: int
    expected: Optional[int]
    gap_ratio: float


@dataclass(frozen=True)
class RankProfile:
    entries: List[RankEntry]
    kernel_is_focal: Optional[bool] = None

    @property
    def passed(self):
        ranks_ok = all(e.expected is None or e.rank == e.expected for e in self.entries)
        return ranks_ok and self.kernel_is_focal is not False

    def rank_of(self, name):
        return next(e.rank for e in self.entries if e.name == name)

    def to_dict(self):
        return {"passed": self.passed, "kernel_is_focal": self.kernel_is_focal,
                "entries": [{"name": e.name, "rank": e.rank, "expected": e.expected,
                             "gap_ratio": float(e.gap_ratio)} for e in self.entries]}


@dataclass(frozen=True)
class PencilReport:
    trials: int
    excluded: int
    histogram: Dict[int, int]
    root_error: float
    failures: int

    @property
    def passed(self):
        return (self.failures == 0
                and set(self.histogram) <= {2, 4}
                and self.histogram.get(2, 0) == 2 * self.trials)

    def to_dict(self):
        return {"passed": self.passed, "trials": self.trials, "excluded": self.excluded,
                "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
                "root_error": float(self.root_error), "failures": self.failures}


@dataclass(frozen=True)
class RelaxedMembership:
    rank: int
    rank_bound: int
    determinants: List[float]
    relaxed: bool
    unlabeled: Optional[bool]

    def to_dict(self):
        return {"rank": self.rank, "rank_bound": self.rank_bound,
                "determinants": [float(d) for d in self.determinants],
                "relaxed": self.relaxed, "unlabeled": self.unlabeled}


def sample_variety(rig, count, seed=None, max_rejection=INIT_MAX_REJECTION):
    """
    Sample ``count`` points of the unlabeled variety of ``rig``.

    World pairs X, Y are drawn uniformly from [-1, 1]^4; draws whose images
    degenerate in some view are rejected.

    Raises:
        DegenerateRigError: If more than ``max_rejection`` of the draws are
            rejected.
    """
    rng = np.random.default_rng(seed)
    rows = []
    attempts = 0
    rejected = 0
    while len(rows) < count:
        attempts += 1
        X, Y = rng.uniform(-1.0, 1.0, size=(2, 4))
        try:
            M = pair_to_sym(X, Y)
            rows.append([unlabeled_project(camera, M).entries for camera in rig])
        except DegenerateInputError:
            rejected += 1
            if attempts >= 20 and rejected > max_rejection * attempts:
                raise DegenerateRigError(f"{rejected} of {attempts} samples rejected",
                                         rejected=rejected, attempts=attempts)
    if rejected:
        logger.debug(f"sample_variety rejected {rejected} of {attempts} draws")
    return VarietySample(np.array(rows), seed, rejected)


@functools.lru_cache(maxsize=None)
def bidegree_monomials(d1, d2):
    """Monomials of bidegree (d1, d2) as pairs of sorted variable tuples."""
    return tuple((a, b)
                 for a in itertools.combinations_with_replacement(range(SYM_COORDS), d1)
                 for b in itertools.combinations_with_replacement(range(SYM_COORDS), d2))


def evaluation_matrix(sample, bidegree):
    """Row-normalised values of every bidegree monomial on views 0 and 1."""
    first = sample.view(0)
    second = sample.view(1)
    columns = [np.prod(first[:, list(a)], axis=1) * np.prod(second[:, list(b)], axis=1)
               for a, b in bidegree_monomials(*bidegree)]
    E = np.column_stack(columns)
    return E / np.linalg.norm(E, axis=1)[:, None]


def vanishing_forms(sample, bidegree, tol=INIT_TOL_FORM, min_gap=INIT_MIN_GAP_RATIO):
    """
    Orthonormal basis (rows, in monomial coordinates) of the forms of the
    given bidegree vanishing on the sample.

    Raises:
        OutOfRangeError: With fewer than twice as many samples as monomials.
        UnreliableRankError: If the singular value gap is below ``min_gap``.
    """
    bidegree = tuple(bidegree)
    monomials = bidegree_monomials(*bidegree)
    if sample.count < 2 * len(monomials):
        raise OutOfRangeError(f"bidegree {bidegree} needs at least {2 * len(monomials)} "
                              f"samples, got {sample.count}")
    svd = SVD(evaluation_matrix(sample, bidegree), tol=tol)
    gap = svd.gap_ratio()
    logger.debug(f"bidegree {bidegree}: nullity {svd.nullity}, gap ratio {gap:.3e}")
    if gap < min_gap:
        raise UnreliableRankError(f"singular value gap {gap:.3e} too small in bidegree {bidegree}",
                                  bidegree=list(bidegree), gap_ratio=gap)
    return FormSpace(bidegree, monomials, svd.null_space().T, gap, svd.s)


def vanishing_form_dim(sample, bidegree, tol=INIT_TOL_FORM):
    return vanishing_forms(sample, bidegree, tol=tol).dim


def _multiply_by_variable(space, variable, side, target_index, size):
    products = np.zeros((space.dim, size))
    for column, (a, b) in enumerate(space.monomials):
        if side == 0:
            monomial = (tuple(sorted(a + (variable,))), b)
        else:
            monomial = (a, tuple(sorted(b + (variable,))))
        products[:, target_index[monomial]] += space.basis[:, column]
    return products


def new_generator_count(sample, bidegree, tol=INIT_TOL_FORM):
    """
    Vanishing forms of the bidegree not generated by lower bidegrees:
    dim V(d1, d2) minus the dimension of the span of the products of
    V(d1 - 1, d2) with the first view's coordinates and of V(d1, d2 - 1)
    with the second view's.
    """
    d1, d2 = bidegree
    space = vanishing_forms(sample, bidegree, tol=tol)
    target_index = {monomial: i for i, monomial in enumerate(space.monomials)}
    size = len(space.monomials)
    blocks = []
    for side, lower_bidegree in ((0, (d1 - 1, d2)), (1, (d1, d2 - 1))):
        if min(lower_bidegree) < 0:
            continue
        lower = vanishing_forms(sample, lower_bidegree, tol=tol)
        if lower.dim == 0:
            continue
        for variable in range(SYM_COORDS):
            blocks.append(_multiply_by_variable(lower, variable, side, target_index, size))
    if not blocks:
        return space.dim
    generated = numerical_rank(np.vstack(blocks), tol)
    logger.debug(f"bidegree {bidegree}: {space.dim} vanishing forms, {generated} generated")
    return space.dim - generated


def fund2_forms(F):
    """The nine entries of N_2 F N_1 as bilinear forms in monomial coordinates."""
    monomials = bidegree_monomials(1, 1)
    column = {monomial: i for i, monomial in enumerate(monomials)}
    coordinate = {index: i for i, index in enumerate(multi_indices(2, 3))}
    forms = np.zeros((9, len(monomials)))
    for a, b in itertools.product(range(3), repeat=2):
        for c, d in itertools.product(range(3), repeat=2):
            p = coordinate[tuple(sorted((d, b)))]
            q = coordinate[tuple(sorted((a, c)))]
            forms[3 * a + b, column[((p,), (q,))]] += F[c, d]
    return forms


def gens_fund2_report(rig, sample, tol=INIT_TOL_FORM, tol_angle=INIT_TOL_ANGLE):
    """
    Principal angles between the (1, 1) vanishing forms and the span of N_2 F N_1.

    Raises:
        PreconditionError: If the (1, 1) vanishing space is not three dimensional.
    """
    F = fundamental_matrix(rig, 0, 1).matrix
    vanishing = vanishing_forms(sample, (1, 1), tol=tol)
    span = scipy.linalg.orth(fund2_forms(F).T)
    if vanishing.dim != 3:
        raise PreconditionError(f"(1, 1) vanishing space has dimension {vanishing.dim}, "
                                "expected 3",
                                vanishing_dim=vanishing.dim)
    angles = scipy.linalg.subspace_angles(vanishing.basis.T, span)
    max_angle = float(np.max(angles))
    return GensFund2Report(max_angle < tol_angle, max_angle, vanishing.dim, span.shape[1])


def check_gens_fund2(rig, sample, tol=INIT_TOL_FORM, tol_angle=INIT_TOL_ANGLE):
    """True when every (1, 1) vanishing form is a combination of the entries of N_2 F N_1."""
    return gens_fund2_report(rig, sample, tol=tol, tol_angle=tol_angle).passed


def _ranked(name, matrix, expected, tol, min_gap):
    svd = SVD(matrix, tol=tol)
    gap = svd.gap_ratio()
    if gap < min_gap:
        raise UnreliableRankError(f"singular value gap {gap:.3e} too small for {name}",
                                  matrix=name, gap_ratio=gap)
    return RankEntry(name, svd.rank, expected, gap), svd


def rank_profile(rig, m=2, sigma=None, Ns=None, seed=None, tol_rank=INIT_TOL_RANK,
                 min_gap=INIT_MIN_GAP_RATIO):
    """
    Ranks of the stacked lifted cameras and of B_sigma.

    For pairs the expected values are rank 9 for two lifted cameras (with
    kernel spanned by the unlabeled focal point), 10 from three on, and
    rank B = 10 for two views, 10 + |sigma| - 1 from three views on.
    Without ``Ns`` the images of a random world pair are used.
    """
    sigma = tuple(range(len(rig))) if sigma is None else tuple(sigma)
    k = len(sigma)
    lifted = np.vstack([lift_camera(rig[i], m).matrix for i in sigma])
    expected_lifted = None
    expected_B = None
    if m == 2:
        expected_lifted = {1: 6, 2: 9}.get(k, 10)
        expected_B = 10 if k == 2 else 10 + k - 1

    entries = []
    entry, svd = _ranked("lifted", lifted, expected_lifted, tol_rank, min_gap)
    entries.append(entry)
    kernel_is_focal = None
    if m == 2 and k == 2 and svd.nullity == 1:
        kernel_is_focal = proj_equal(svd.null_space()[:, 0],
                                     unlabeled_focal_point(rig, sigma).entries)

    if k >= 2:
        if Ns is None:
            rng = np.random.default_rng(seed)
            points = rng.uniform(-1.0, 1.0, size=(m, 4))
            world = config_to_sym(points)
            Ns = [unlabeled_project(rig[i], world) for i in sigma]
        entry, _ = _ranked("B", build_B(rig, Ns, sigma).matrix, expected_B, tol_rank, min_gap)
        entries.append(entry)
    return RankProfile(entries, kernel_is_focal)


def pencil_grid(size=INIT_PENCIL_GRID):
    """``size`` values of alpha in [-2, 3] containing 0 and 1 exactly."""
    return np.unique(np.concatenate([np.linspace(-2.0, 3.0, size - 2), [0.0, 1.0]]))


def pencil_check(count=100, seed=None, grid_size=INIT_PENCIL_GRID, random_alphas=20,
                 tol_rank=INIT_TOL_RANK):
    """
    Pencils of two random rank-2 matrices: the rank-2 members are exactly
    alpha = 0 and alpha = 1 and rank 3 never occurs.
    """
    rng = np.random.default_rng(seed)
    grid = pencil_grid(grid_size)
    histogram = Counter()
    excluded = 0
    failures = 0
    root_error = 0.0
    trials = 0
    while trials < count:
        X1, Y1, X2, Y2 = rng.uniform(-1.0, 1.0, size=(4, 4))
        M1 = pair_to_sym(X1, Y1)
        M2 = pair_to_sym(X2, Y2)
        A = M1.matrix()
        B = M2.matrix()
        if numerical_rank(A - B, tol_rank) != 4:
            excluded += 1
            continue
        trials += 1
        try:
            roots = [alpha for alpha, _ in pencil_rank2_points(M1, M2, tol_rank=tol_rank)]
            root_error = max(root_error, abs(roots[0]), abs(roots[1] - 1.0))
        except PreconditionError:
            failures += 1
            continue
        for alpha in grid:
            histogram[numerical_rank(alpha * A + (1.0 - alpha) * B, tol_rank)] += 1
        for alpha in rng.uniform(-10.0, 10.0, size=random_alphas):
            if numerical_rank(alpha * A + (1.0 - alpha) * B, tol_rank) != 4:
                failures += 1
    if root_error > 1e-8:
        failures += 1
    return PencilReport(trials, excluded, dict(histogram), root_error, failures)


def relaxed_membership(rig, Ns, sigma=None, tol_rank=INIT_TOL_RANK, tol=INIT_TOL_INCIDENCE):
    """
    Membership of pair data in the rank relaxation of the unlabeled variety
    (rank B_sigma at most 10 resp. 10 + k - 1, det N_i = 0) and, for two
    views, in the unlabeled variety itself.

    The epipole family is relaxed but not unlabeled.
    """
    configs = [N if isinstance(N, SymConfig) else SymConfig.from_tensor(N) for N in Ns]
    sigma = tuple(range(len(configs))) if sigma is None else tuple(sigma)
    k = len(configs)
    rank = SVD(build_B(rig, configs, sigma).matrix, tol=tol_rank).rank
    bound = 10 if k == 2 else 10 + k - 1
    determinants = [float(np.linalg.det(N.normalized().matrix())) for N in configs]
    relaxed = rank <= bound and all(abs(d) < tol for d in determinants)

    unlabeled = None
    if k == 2:
        try:
            u1, v1 = split_rank2(configs[0])
            u2, v2 = split_rank2(configs[1])
        except NotSplittableError:
            unlabeled = None
        else:
            F = fundamental_matrix(rig, sigma[0], sigma[1])
            products = unlabeled_epipolar_products(F, u1, v1, u2, v2)
            unlabeled = bool(np.abs(products).max() < tol)
    return RelaxedMembership(rank, bound, determinants, relaxed, unlabeled)
