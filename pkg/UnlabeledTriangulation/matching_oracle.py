"""
Brute-force reference for unlabeled triangulation.

Enumerates every correspondence between the image points of the views,
triangulates each labeled track and keeps the matchings whose every track
is consistent. A second, geometric route intersects back-projected lines
and searches exact covers of the lines by intersection points. Both are
exponential in the number of points and serve as ground truth for the
algebraic solvers and for ambiguity diagnostics.
"""

from .camera import (
    INIT_TOL_RESIDUAL,
    back_projected_line,
    epipole,
    fundamental_matrix,
    labeled_triangulate,
    trifocal_plane,
)
from .projective_core import (
    INIT_TOL_INCIDENCE,
    collinear_det,
    coords_of,
    coplanar_det,
    lines_meet,
    normalize_vector,
    proj_distance,
    proj_equal,
)
from .errors import AmbiguousTriangulationError, BudgetExceededError, DegenerateInputError
from .errors import OffVarietyError, ShapeError
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import FrozenSet, List, Tuple
from .linalg import INIT_TOL_RANK
from .logsetup import logger
import numpy as np
import itertools
import math

INIT_MATCHING_BUDGET = 10 ** 6
INIT_CLUSTER_BUDGET = 20
INIT_TOL_CLUSTER = 1e-6


@dataclass(frozen=True)
class Matching:
    """
    Correspondence between the points of all views. View 0 is the
    identity; ``permutations[v - 1][i]`` is the point of view v matched to
    point i of view 0.
    """

    permutations: Tuple[Tuple[int, ...], ...]
    index: int = 0

    def track(self, i):
        return (i,) + tuple(p[i] for p in self.permutations)

    def tracks(self, m):
        return [self.track(i) for i in range(m)]

    def to_list(self):
        m = len(self.permutations[0]) if self.permutations else 0
        return [list(range(m))] + [list(p) for p in self.permutations]


@dataclass(frozen=True)
class OracleSolution:
    points: Tuple
    residual: float
    matchings: Tuple[Matching, ...]

    def to_dict(self):
        return {"points": [p.to_list() for p in self.points],
                "residual": float(self.residual),
                "matchings": [m.to_list() for m in self.matchings]}


@dataclass(frozen=True)
class OracleResult:
    solutions: List[OracleSolution]
    surviving: List[Tuple[Matching, float]]
    evaluated: int

    @property
    def configuration_count(self):
        return len(self.solutions)

    @property
    def matching_count(self):
        return len(self.surviving)

    def to_dict(self):
        return {"configuration_count": self.configuration_count,
                "matching_count": self.matching_count,
                "evaluated": self.evaluated,
                "solutions": [s.to_dict() for s in self.solutions]}


@dataclass(frozen=True)
class Cluster:
    point: object
    incident: FrozenSet[Tuple[int, int]]

    @property
    def degree(self):
        return len(self.incident)


@dataclass(frozen=True)
class LineArrangement:
    lines: List[Tuple[int, int, object]]
    clusters: List[Cluster] = field(default_factory=list)

    def degrees(self):
        return sorted((c.degree for c in self.clusters), reverse=True)


@dataclass(frozen=True)
class AmbiguityDiagnosis:
    on_variety: bool
    on_variety_residual: float
    epipolar_residuals: Tuple[float, float, float, float]
    determinants: Tuple[float, float]
    ambiguous: bool
    at_epipole: bool
    separation: float
    reconstructions: List[Tuple] = field(default_factory=list)

    def to_dict(self):
        return {"on_variety": self.on_variety,
                "on_variety_residual": float(self.on_variety_residual),
                "epipolar_residuals": [float(r) for r in self.epipolar_residuals],
                "determinants": [float(d) for d in self.determinants],
                "ambiguous": self.ambiguous,
                "at_epipole": self.at_epipole,
                "separation": float(self.separation),
                "reconstructions": [[p.to_list() for p in config]
                                    for config in self.reconstructions]}


def matching_count(n, m):
    """(m!)^(n-1) matchings with view 0 fixed."""
    return math.factorial(m) ** (n - 1)


def enumerate_matchings(n, m, budget=INIT_MATCHING_BUDGET):
    """
    Lexicographic iterator over all matchings of n views with m points.

    Raises:
        BudgetExceededError: If (m!)^(n-1) exceeds ``budget``.
    """
    count = matching_count(n, m)
    if count > budget:
        raise BudgetExceededError(f"{count} matchings exceed the budget of {budget}",
                                  count=count, budget=budget)
    choices = itertools.product(itertools.permutations(range(m)), repeat=n - 1)
    return (Matching(tuple(perms), index) for index, perms in enumerate(choices))


def _check_observations(rig, observations):
    if len(observations) != len(rig):
        raise ShapeError(f"{len(observations)} views for {len(rig)} cameras")
    sizes = {len(view) for view in observations}
    if len(sizes) != 1:
        raise ShapeError(f"views carry different numbers of points {sorted(sizes)}")
    return sizes.pop()


def same_configuration(P, Q, tol=INIT_TOL_RANK):
    """Unordered equality of two point configurations up to scale."""
    if len(P) != len(Q):
        return False
    unused = list(Q)
    for p in P:
        for i, q in enumerate(unused):
            if proj_equal(p, q, tol):
                del unused[i]
                break
        else:
            return False
    return True


def _evaluate_matching(rig, observations, matching, m, tol_rank, tol_residual):
    points = []
    worst = 0.0
    for track in matching.tracks(m):
        us = [observations[view][i] for view, i in enumerate(track)]
        try:
            labeled = labeled_triangulate(rig, us, tol_rank=tol_rank, tol_residual=np.inf)
        except AmbiguousTriangulationError:
            return None
        worst = max(worst, labeled.residual)
        if worst >= tol_residual:
            return None
        points.append(labeled.point)
    return points, worst


def oracle_triangulate(rig, observations, tol_residual=INIT_TOL_RESIDUAL,
                       tol_rank=INIT_TOL_RANK, budget=INIT_MATCHING_BUDGET, workers=1):
    """
    Reconstructions of every consistent matching.

    Args:
        rig (CameraRig): n cameras.
        observations (sequence): Per view, the list of its m image points.
        tol_residual (float): Largest labeled residual of a surviving track.
        workers (int): Threads used to evaluate matchings; results are
            merged in matching order.

    Returns:
        OracleResult: Distinct configurations with the matchings producing
            them, plus every surviving matching.

    Raises:
        BudgetExceededError: If there are more matchings than ``budget``.
        OffVarietyError: If no matching survives.
    """
    m = _check_observations(rig, observations)
    matchings = list(enumerate_matchings(len(rig), m, budget))

    def evaluate(matching):
        return _evaluate_matching(rig, observations, matching, m, tol_rank, tol_residual)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            outcomes = list(executor.map(evaluate, matchings))
    else:
        outcomes = [evaluate(matching) for matching in matchings]

    surviving = []
    groups = []
    for matching, outcome in zip(matchings, outcomes):
        if outcome is None:
            continue
        points, residual = outcome
        surviving.append((matching, residual))
        for group in groups:
            if same_configuration(group["points"], points):
                group["matchings"].append(matching)
                group["residual"] = min(group["residual"], residual)
                break
        else:
            groups.append({"points": points, "matchings": [matching], "residual": residual})

    logger.debug(f"oracle: {len(surviving)} of {len(matchings)} matchings survive, "
                 f"{len(groups)} distinct configurations")
    if not surviving:
        raise OffVarietyError("no matching is consistent with the observations",
                              evaluated=len(matchings))
    solutions = [OracleSolution(tuple(g["points"]), g["residual"], tuple(g["matchings"]))
                 for g in groups]
    return OracleResult(solutions, surviving, len(matchings))


def intersection_degrees(rig, observations, tol_incidence=INIT_TOL_INCIDENCE,
                         tol_cluster=INIT_TOL_CLUSTER):
    """
    Pairwise intersections of back-projected lines from different views,
    clustered, with focal points excluded.

    Returns:
        LineArrangement: Lines tagged (view, index) and clusters with the
            set of lines through them; the degree is the size of that set.
    """
    _check_observations(rig, observations)
    lines = [(view, i, back_projected_line(rig[view], u))
             for view, points in enumerate(observations) for i, u in enumerate(points)]
    focal = rig.focal_points
    found = []
    for (va, ia, La), (vb, ib, Lb) in itertools.combinations(lines, 2):
        if va == vb:
            continue
        try:
            P = lines_meet(La, Lb, tol_incidence)
        except DegenerateInputError:
            # coincident lines only happen along a baseline
            continue
        if P is None:
            continue
        if any(proj_distance(P, f) < tol_cluster for f in focal):
            continue
        for cluster in found:
            if proj_distance(cluster["point"], P) < tol_cluster:
                cluster["incident"].update({(va, ia), (vb, ib)})
                break
        else:
            found.append({"point": P, "incident": {(va, ia), (vb, ib)}})

    clusters = sorted((Cluster(c["point"], frozenset(c["incident"])) for c in found),
                      key=lambda c: sorted(c.incident))
    return LineArrangement(lines, clusters)


def cover_solutions(arrangement, n, m, budget=INIT_CLUSTER_BUDGET):
    """
    Sets of m clusters of degree at least n covering every line exactly once.

    Returns:
        list[tuple]: One tuple of cluster points per exact cover.
    """
    candidates = [c for c in arrangement.clusters if c.degree >= n]
    if len(candidates) > budget:
        raise BudgetExceededError(f"{len(candidates)} clusters exceed the budget of {budget}",
                                  count=len(candidates), budget=budget)
    all_lines = frozenset((view, i) for view, i, _ in arrangement.lines)
    covers = []

    def search(uncovered, chosen):
        if not uncovered:
            if len(chosen) == m:
                covers.append(tuple(c.point for c in chosen))
            return
        if len(chosen) == m:
            return
        line = min(uncovered)
        for cluster in candidates:
            if line in cluster.incident and cluster.incident <= uncovered:
                search(uncovered - cluster.incident, chosen + [cluster])

    search(all_lines, [])
    return covers


def unlabeled_epipolar_products(F, u1, v1, u2, v2):
    """
    The four products whose common zeros are the unlabeled two-view data.

    With a = u2^T F u1, b = v2^T F v1, c = v2^T F u1, d = u2^T F v1 the
    products are ac, ad, bc, bd; all vanish iff (a = b = 0) or (c = d = 0).
    """
    matrix = F.matrix if hasattr(F, "matrix") else np.asarray(F, dtype=float)
    x1, y1, x2, y2 = (normalize_vector(coords_of(p)) for p in (u1, v1, u2, v2))
    a = x2 @ matrix @ x1
    b = y2 @ matrix @ y1
    c = y2 @ matrix @ x1
    d = x2 @ matrix @ y1
    return np.array([a * c, a * d, b * c, b * d])


def two_view_ambiguity_check(rig, u1, v1, u2, v2, tol=INIT_TOL_INCIDENCE,
                             tol_residual=INIT_TOL_RESIDUAL):
    """
    Decide whether two-view pair data has two reconstructions.

    The data is ambiguous iff it is on the unlabeled variety and both
    epipoles are collinear with their view's pair, provided no image point
    is an epipole.
    """
    F = fundamental_matrix(rig, 0, 1)
    a = F.residual(u1, u2)
    b = F.residual(v1, v2)
    c = F.residual(u1, v2)
    d = F.residual(v1, u2)
    on_variety_residual = min(max(a, b), max(c, d))
    on_variety = on_variety_residual < tol

    e01 = epipole(rig, 0, 1)
    e10 = epipole(rig, 1, 0)
    determinants = (collinear_det(e01, u1, v1), collinear_det(e10, u2, v2))
    at_epipole = any(proj_equal(p, e01) for p in (u1, v1)) or \
        any(proj_equal(p, e10) for p in (u2, v2))
    ambiguous = on_variety and not at_epipole and all(abs(x) < tol for x in determinants)

    reconstructions = []
    if on_variety and not at_epipole:
        try:
            result = oracle_triangulate(rig.subrig((0, 1)), [[u1, v1], [u2, v2]],
                                        tol_residual=tol_residual)
            reconstructions = [s.points for s in result.solutions]
        except OffVarietyError:
            logger.warning("on-variety pair data has no consistent matching")

    separation = min(proj_distance(u1, v1), proj_distance(u2, v2))
    return AmbiguityDiagnosis(on_variety, on_variety_residual, (a, b, c, d), determinants,
                              ambiguous, at_epipole, separation, reconstructions)


def baseline_coplanarity(rig, world_points, i=0, j=1, tol=INIT_TOL_INCIDENCE):
    """True when some pair of world points is coplanar with the baseline f_i f_j."""
    f_i, f_j = rig[i].focal_point, rig[j].focal_point
    return any(abs(coplanar_det(X, Y, f_i, f_j)) < tol
               for X, Y in itertools.combinations(world_points, 2))


def trifocal_coplanarity(rig, world_points, i=0, j=1, k=2, tol=INIT_TOL_INCIDENCE):
    """True when every world point lies on the plane of f_i, f_j, f_k."""
    plane = trifocal_plane(rig, i, j, k)
    return all(abs(plane @ normalize_vector(coords_of(X))) < tol for X in world_points)
