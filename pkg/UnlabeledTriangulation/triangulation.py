"""
Unlabeled triangulation: recover the symmetric tensor M_Delta of an
unordered world configuration from the symmetric tensors N_i of its images,
without knowing which image point belongs to which world point.

The lifted cameras turn the problem into a homogeneous linear system

    B_sigma (vv(M), -lambda_1, ..., -lambda_k) = 0,

whose block row i is [A~_i | vv(N_i) in column P + i]. From three views on
(or m + 1 views for order m) its kernel is spanned by the solution. With two
views and pairs the kernel is the span of the solution and of the unlabeled
focal point f_01; the solution is then the second rank-2 member of that
pencil, found as the double root of a quartic determinant.
"""

from .errors import (
    AmbiguousTriangulationError,
    DegenerateConfigurationError,
    DegenerateInputError,
    InconsistentDataError,
    NotSplittableError,
    OffVarietyError,
    PreconditionError,
    ShapeError,
    UnsupportedConfigurationError,
)
from .sym_rep import (
    SymConfig,
    config_to_sym,
    lift_camera,
    nearest_rank2,
    split_rank2,
    sym_length,
    unlabeled_focal_point,
)
from .projective_core import INIT_TOL_INCIDENCE, collinear_det, normalize_vector
from .projective_core import proj_distance, proj_equal
from .camera import INIT_TOL_RESIDUAL, epipole
from .linalg import SVD, INIT_TOL_RANK, numerical_rank
from dataclasses import dataclass, field
from typing import Optional, Tuple
from .logsetup import logger
import numpy as np

INIT_TOL_QUARTIC = 1e-8
INIT_ROOT_STEPS = 8

# Half-width of the refinement bracket, relative to max(1, |alpha|); capped at
# half the distance to the other double root.
ROOT_BRACKET = 1e-2

# Interpolation nodes of the pencil quartic.
QUARTIC_NODES = np.array([-2.0, -1.0, 1.0, 2.0, 3.0])
_QUARTIC_SOLVE = np.linalg.inv(np.vander(QUARTIC_NODES, 5, increasing=True))


@dataclass(frozen=True)
class StackedSystem:
    """The matrix B_sigma together with the bookkeeping to read its kernel."""

    matrix: np.ndarray
    sigma: Tuple[int, ...]
    order: int
    world_columns: int


@dataclass(frozen=True)
class TriangulationResult:
    M_delta: SymConfig
    scales: np.ndarray
    residual: float
    kernel_dim: int
    ambiguous: bool = False
    method: str = "multiview"
    gap_ratio: float = float("inf")
    points: Optional[tuple] = None
    quartic: Optional[np.ndarray] = field(default=None, repr=False)
    projection_distance: float = 0.0
    double_root: Optional[float] = None

    def to_dict(self):
        payload = {
            "method": self.method,
            "M_delta": self.M_delta.to_dict(),
            "scales": [float(s) for s in self.scales],
            "residual": float(self.residual),
            "kernel_dim": int(self.kernel_dim),
            "gap_ratio": float(self.gap_ratio),
            "ambiguous": bool(self.ambiguous),
            "projection_distance": float(self.projection_distance),
        }
        if self.points is not None:
            payload["points"] = [p.to_list() for p in self.points]
        if self.quartic is not None:
            payload["quartic"] = [float(a) for a in self.quartic]
        if self.double_root is not None:
            payload["double_root"] = float(self.double_root)
        return payload


def _as_configs(Ns):
    configs = [N if isinstance(N, SymConfig) else SymConfig.from_tensor(N) for N in Ns]
    orders = {N.order for N in configs}
    if len(orders) != 1:
        raise ShapeError(f"image configurations mix orders {sorted(orders)}")
    if any(N.dim != 3 for N in configs):
        raise ShapeError("image configurations must live over R^3")
    return configs


def build_B(rig, Ns, sigma=None):
    """
    Assemble B_sigma of shape k binom(m+2, m) x (binom(m+3, m) + k).

    Args:
        rig (CameraRig): The full rig.
        Ns (sequence): Image configurations N_i, one per entry of sigma.
        sigma (sequence of int, optional): Camera indices, default all.
    """
    configs = _as_configs(Ns)
    sigma = tuple(range(len(configs))) if sigma is None else tuple(sigma)
    if len(sigma) != len(configs):
        raise ShapeError(f"{len(configs)} image configurations for {len(sigma)} cameras")
    if len(sigma) < 2:
        raise ShapeError("unlabeled triangulation needs at least two views")

    order = configs[0].order
    rows = sym_length(order, 3)
    world = sym_length(order, 4)
    k = len(sigma)
    B = np.zeros((k * rows, world + k))
    for i, (camera_index, N) in enumerate(zip(sigma, configs)):
        block = slice(i * rows, (i + 1) * rows)
        B[block, :world] = lift_camera(rig[camera_index], order).matrix
        B[block, world + i] = normalize_vector(N.entries)
    return StackedSystem(B, sigma, order, world)


def pencil_quartic(M1, M2):
    """Coefficients a0..a4 of det(alpha M1 + (1 - alpha) M2), by interpolation."""
    values = [np.linalg.det(alpha * M1 + (1.0 - alpha) * M2) for alpha in QUARTIC_NODES]
    return _QUARTIC_SOLVE @ np.array(values)


def _double_roots(coefficients, tol):
    """
    Fit a4 (alpha^2 + b alpha + c)^2 to the quartic and return its two roots.
    """
    a0, a1, a2, a3, a4 = coefficients
    scale = np.abs(coefficients).max()
    if scale == 0.0 or abs(a4) < tol * scale:
        raise PreconditionError("pencil quartic has no leading term",
                                quartic=[float(a) for a in coefficients])
    b = a3 / (2.0 * a4)
    c = (a2 / a4 - b * b) / 2.0
    mismatch = max(abs(a1 - 2.0 * a4 * b * c), abs(a0 - a4 * c * c)) / scale
    if mismatch > tol:
        raise PreconditionError("pencil quartic is not a perfect square",
                                mismatch=float(mismatch),
                                quartic=[float(a) for a in coefficients])
    discriminant = b * b - 4.0 * c
    if discriminant < -tol * max(1.0, b * b):
        raise PreconditionError("double roots of the pencil quartic are complex",
                                discriminant=float(discriminant))
    root = np.sqrt(max(discriminant, 0.0))
    return sorted(((-b - root) / 2.0, (-b + root) / 2.0))


def pencil_rank2_points(M1, M2, tol_rank=INIT_TOL_RANK, tol_quartic=INIT_TOL_QUARTIC):
    """
    Rank-2 members of the pencil alpha M1 + (1 - alpha) M2.

    Both inputs are normalised first. For rank-2 M1, M2 with
    rank(M1 - M2) = 4 the result is exactly alpha in {0, 1}.

    Returns:
        list[tuple[float, SymConfig]]: The two double roots with the
            normalised pencil members, sorted by alpha.

    Raises:
        PreconditionError: If rank(M1 - M2) != 4 or the quartic does not
            have two real double roots.
    """
    A, B = (N.normalized().matrix() for N in _as_pencil_pair(M1, M2))
    difference_rank = numerical_rank(A - B, tol_rank)
    if difference_rank != 4:
        raise PreconditionError(f"rank(M1 - M2) is {difference_rank}, expected 4",
                                difference_rank=difference_rank)
    coefficients = pencil_quartic(A, B)
    logger.debug(f"pencil quartic coefficients {coefficients}")
    roots = _double_roots(coefficients, tol_quartic)
    roots = [refine_double_root(A, B, roots[0], other=roots[1]),
             refine_double_root(A, B, roots[1], other=roots[0])]
    return [(float(alpha), SymConfig.from_tensor(alpha * A + (1.0 - alpha) * B).normalized())
            for alpha in roots]


def _as_pencil_pair(M1, M2):
    pair = [M if isinstance(M, SymConfig) else SymConfig.from_tensor(M) for M in (M1, M2)]
    if any(M.order != 2 or M.dim != 4 for M in pair):
        raise ShapeError("pencils are formed from symmetric 4x4 matrices")
    return pair


def _read_kernel(vector, world_columns):
    """Rescale a kernel vector so its M part is normalised."""
    M_raw = vector[:world_columns]
    if np.linalg.norm(M_raw) == 0.0:
        raise InconsistentDataError("kernel vector has no world component")
    M = normalize_vector(M_raw)
    factor = float(M @ M_raw) / float(M_raw @ M_raw)
    full = vector * factor
    return M, -full[world_columns:], full


def _image_pair_at_epipole(N, e):
    try:
        u, v = split_rank2(N)
    except NotSplittableError:
        return False
    return proj_equal(u, e) or proj_equal(v, e)


def _third_singular_value(alpha, M1, M2):
    s = np.linalg.svd(alpha * M1 + (1.0 - alpha) * M2, compute_uv=False)
    return s[2] / s[0]


def refine_double_root(M1, M2, alpha, other=None, steps=INIT_ROOT_STEPS):
    """
    Polish a double root of det(alpha M1 + (1 - alpha) M2).

    Each step takes the plane W spanned by the two eigenvectors of smallest
    magnitude of the current pencil member and solves the least squares
    problem W^T (M2 + alpha (M1 - M2)) W = 0 for alpha. The error squares
    per step; the estimate is kept when the step leaves the bracket or does
    not lower the third singular value.
    """
    half_width = ROOT_BRACKET * max(1.0, abs(alpha))
    if other is not None and other != alpha:
        half_width = min(half_width, abs(alpha - other) / 2.0)
    D = M1 - M2
    current = float(alpha)
    for _ in range(steps):
        w, V = np.linalg.eigh(current * M1 + (1.0 - current) * M2)
        W = V[:, np.argsort(np.abs(w))[:2]]
        slope = W.T @ D @ W
        denominator = float(np.sum(slope * slope))
        if denominator == 0.0:
            break
        proposal = -float(np.sum((W.T @ M2 @ W) * slope)) / denominator
        if abs(proposal - alpha) > half_width:
            break
        step = abs(proposal - current)
        current = proposal
        if step <= np.finfo(float).eps * max(1.0, abs(current)):
            break
    if _third_singular_value(current, M1, M2) > _third_singular_value(alpha, M1, M2):
        return float(alpha)
    logger.debug(f"double root refined from {alpha!r} to {current!r}")
    return current


def two_view_collinearity(rig, N1, N2, sigma=(0, 1)):
    """
    Determinants det(e_01, u1, v1) and det(e_10, u2, v2) of the split image
    pairs, or None when an image does not split into real points.
    """
    j, k = sigma
    try:
        u1, v1 = split_rank2(N1)
        u2, v2 = split_rank2(N2)
    except NotSplittableError:
        return None
    return (collinear_det(epipole(rig, j, k), u1, v1),
            collinear_det(epipole(rig, k, j), u2, v2))


def triangulate_two_view(rig, N1, N2, sigma=(0, 1), tol_rank=INIT_TOL_RANK,
                         tol_residual=INIT_TOL_RESIDUAL, tol_quartic=INIT_TOL_QUARTIC,
                         tol_incidence=INIT_TOL_INCIDENCE):
    """
    Two-view unlabeled triangulation of a pair of world points.

    The kernel of B_01 is two dimensional on exact data. The element
    orthogonal to (vv f_01, 0, 0) gives M; the pencil det(alpha M +
    (1 - alpha) f_01) = a4 alpha^2 (alpha - c)^2 yields c = -a3 / (2 a4),
    refined on the pencil itself, and M_Delta is the rank-2 truncation of
    c M + (1 - c) f_01.

    Raises:
        ShapeError: If the inputs are not symmetric 3x3 matrices.
        OffVarietyError: If the kernel is one dimensional.
        AmbiguousTriangulationError: If an image point is the epipole, the
            kernel is larger than two or the double-root structure fails.
        DegenerateConfigurationError: If the solution is not a real pair.
    """
    N1, N2 = _as_configs((N1, N2))
    if N1.order != 2:
        raise ShapeError("two-view triangulation works on pairs")
    j, k = sigma
    if _image_pair_at_epipole(N1, epipole(rig, j, k)) or \
            _image_pair_at_epipole(N2, epipole(rig, k, j)):
        raise AmbiguousTriangulationError("an image point coincides with the epipole",
                                          kernel_dim=None)

    system = build_B(rig, (N1, N2), sigma)
    svd = SVD(system.matrix, tol=tol_rank)
    kernel_dim = svd.nullity
    logger.debug(f"two-view singular values {svd.relative}")
    if kernel_dim < 2:
        raise OffVarietyError(f"two-view kernel has dimension {kernel_dim}, expected 2",
                              kernel_dim=kernel_dim,
                              smallest=[float(s) for s in svd.relative[-3:]])
    if kernel_dim > 2:
        raise AmbiguousTriangulationError(f"two-view kernel has dimension {kernel_dim}",
                                          kernel_dim=kernel_dim)

    world = system.world_columns
    f = unlabeled_focal_point(rig, sigma)
    f_full = np.concatenate([f.entries, np.zeros(2)])
    V2 = svd.smallest_right(2)
    Q = V2 - np.outer(f_full, f_full @ V2)
    m_vec = SVD(Q).U[:, 0]
    M, _, m_scaled = _read_kernel(m_vec, world)

    coefficients = pencil_quartic(SymConfig(M, 2, 4).matrix(), f.matrix())
    a0, a1, a2, a3, a4 = coefficients
    scale = np.abs(coefficients).max()
    logger.debug(f"two-view quartic coefficients {coefficients}")
    if scale == 0.0 or abs(a4) < tol_quartic * scale:
        raise AmbiguousTriangulationError("pencil determinant vanishes identically",
                                          kernel_dim=kernel_dim,
                                          quartic=[float(a) for a in coefficients])
    if max(abs(a0), abs(a1)) > tol_quartic * scale or \
            abs(a2 * a4 - a3 * a3 / 4.0) > tol_quartic * scale * scale:
        raise AmbiguousTriangulationError("pencil quartic violates the double-root structure",
                                          kernel_dim=kernel_dim,
                                          quartic=[float(a) for a in coefficients])

    c = refine_double_root(SymConfig(M, 2, 4).matrix(), f.matrix(), -a3 / (2.0 * a4),
                           other=0.0)
    M_delta, scales, full = _read_kernel(c * m_scaled + (1.0 - c) * f_full, world)
    residual = svd.residual(full)
    if residual > tol_residual:
        raise OffVarietyError(f"two-view residual {residual:.3e} above {tol_residual:.1e}",
                              kernel_dim=kernel_dim, residual=residual)
    if np.all(np.abs(scales) < tol_rank):
        raise InconsistentDataError("all scales vanish", kernel_dim=kernel_dim)

    M_delta = SymConfig(M_delta, 2, 4)
    truncated = nearest_rank2(M_delta)
    distance = proj_distance(M_delta.entries, truncated.entries)
    M_delta = truncated.normalized()
    try:
        points = split_rank2(M_delta, tol_rank)
    except NotSplittableError as exc:
        raise DegenerateConfigurationError("two-view solution does not split into a real pair",
                                           kernel_dim=kernel_dim, cause=type(exc).__name__,
                                           **exc.details) from exc
    determinants = two_view_collinearity(rig, N1, N2, sigma)
    ambiguous = determinants is not None and \
        all(abs(d) < tol_incidence for d in determinants)

    return TriangulationResult(M_delta, scales, residual + distance, kernel_dim, ambiguous,
                               "two_view", svd.gap_ratio(svd.cols - 2), points,
                               coefficients, distance, c)


def triangulate_multiview(rig, Ns, sigma=None, tol_rank=INIT_TOL_RANK,
                          tol_residual=INIT_TOL_RESIDUAL):
    """
    Unlabeled triangulation from a one-dimensional kernel of B_sigma.

    Under noise the smallest right singular vector is taken; for pairs the
    result is then projected to the nearest rank-2 matrix and the projection
    distance is added to the residual.

    Raises:
        DegenerateConfigurationError: If the kernel has dimension above one.
        InconsistentDataError: If the kernel vector gives every view scale 0.
    """
    system = build_B(rig, Ns, sigma)
    svd = SVD(system.matrix, tol=tol_rank)
    kernel_dim = svd.nullity
    if kernel_dim > 1:
        raise DegenerateConfigurationError(f"kernel of B has dimension {kernel_dim}",
                                           kernel_dim=kernel_dim)
    v = svd.kernel_vector()
    world = system.world_columns
    if np.abs(v[world:]).max() < tol_rank:
        raise InconsistentDataError("kernel vector gives every view scale zero",
                                    kernel_dim=kernel_dim)
    M, scales, full = _read_kernel(v, world)
    residual = svd.residual(full)
    if residual > tol_residual:
        logger.warning(f"multiview residual {residual:.3e} above {tol_residual:.1e}")

    M_delta = SymConfig(M, system.order, 4)
    distance = 0.0
    points = None
    if system.order == 2:
        truncated = nearest_rank2(M_delta)
        distance = proj_distance(M_delta.entries, truncated.entries)
        M_delta = truncated.normalized()
        try:
            points = split_rank2(M_delta)
        except NotSplittableError:
            points = None

    return TriangulationResult(M_delta, scales, residual + distance, kernel_dim, False,
                               "multiview", svd.gap_ratio(svd.cols - 1), points,
                               None, distance)


def triangulate(rig, Ns, sigma=None, **tolerances):
    """
    Dispatch on the number of views n and the order m.

    Pairs seen in two views go to the pencil method, anything with
    n >= m + 1 (or n >= 3 for pairs) to the kernel method.

    Raises:
        UnsupportedConfigurationError: For m >= 3 with fewer than m + 1 views.
    """
    configs = _as_configs(Ns)
    m = configs[0].order
    n = len(configs)
    if m == 2 and n == 2:
        return triangulate_two_view(rig, configs[0], configs[1],
                                    sigma=(0, 1) if sigma is None else tuple(sigma),
                                    **tolerances)
    if n < m + 1:
        raise UnsupportedConfigurationError(
            f"{n} views cannot determine a configuration of {m} points",
            views=n, order=m)
    tolerances.pop("tol_quartic", None)
    tolerances.pop("tol_incidence", None)
    return triangulate_multiview(rig, configs, sigma=sigma, **tolerances)


def reconstruction_error(result, world_points):
    """Projective distance between the recovered M_Delta and the true one."""
    truth = config_to_sym(world_points)
    if truth.order != result.M_delta.order:
        raise DegenerateInputError("ground truth has a different number of points")
    return proj_distance(truth.entries, result.M_delta.entries)
