"""
Projective cameras P^3 -> P^2 and the labeled two- and multi-view tools
built on them: focal points, epipoles, fundamental matrices, back-projected
lines and labeled triangulation of a single point.

A camera is a real 3x4 matrix of rank 3, defined up to scale. A rig is an
ordered tuple of cameras; camera ``i`` of a rig is addressed by its 0-based
index.
"""

from .projective_core import (
    INIT_TOL_EQUAL,
    ProjPoint,
    coords_of,
    coplanar_det,
    line_through,
    normalize,
    normalize_vector,
    plane_through,
    proj_equal,
    span_deficiency,
)
from .errors import (
    AmbiguousTriangulationError,
    DegenerateInputError,
    DegenerateRigError,
    InvalidCameraError,
    InvalidPairError,
    OutOfRangeError,
    ShapeError,
    UndefinedProjectionError,
)
from .linalg import SVD, INIT_TOL_RANK
from dataclasses import dataclass, field
from .logsetup import logger
from typing import Tuple
import numpy as np
import itertools

INIT_TOL_RESIDUAL = 1e-6
INIT_RIG_ENTRY_RANGE = 20
INIT_RIG_MAX_ATTEMPTS = 1000


class Camera:
    """
    Rank-3 real 3x4 matrix with its cached focal point.

    Args:
        matrix (array_like): The 3x4 camera matrix.
        tol_rank (float): Relative singular value threshold for the rank test.

    Raises:
        ShapeError: If the matrix is not 3x4.
        InvalidCameraError: If the rank is below 3.
    """

    __slots__ = ("_matrix", "_focal", "_scale")

    def __init__(self, matrix, tol_rank=INIT_TOL_RANK):
        A = np.array(matrix, dtype=float)
        if A.shape != (3, 4):
            raise ShapeError(f"camera matrix must be 3x4, got {A.shape}")
        svd = SVD(A, tol=tol_rank)
        if svd.rank < 3:
            raise InvalidCameraError(f"camera matrix has rank {svd.rank}, expected 3",
                                     rank=svd.rank)
        A.setflags(write=False)
        self._matrix = A
        self._scale = svd.largest
        self._focal = ProjPoint(normalize_vector(svd.kernel_vector()))

    @property
    def matrix(self):
        return self._matrix

    @property
    def focal_point(self):
        return self._focal

    def project(self, X, tol=INIT_TOL_EQUAL):
        """Image of the world point X; undefined at the focal point."""
        x = normalize_vector(coords_of(X))
        if x.size != 4:
            raise ShapeError("cameras project points of P^3")
        image = self._matrix @ x
        if np.linalg.norm(image) < tol * self._scale:
            raise UndefinedProjectionError("world point coincides with the focal point")
        return normalize(image)

    def pinv(self):
        return np.linalg.pinv(self._matrix)

    def to_list(self, normalized=True):
        A = self._matrix
        if normalized:
            A = normalize_vector(A.ravel()).reshape(3, 4)
        return [[float(a) for a in row] for row in A]

    def __repr__(self):
        return f"Camera(focal_point={self._focal!r})"


class CameraRig:
    """Ordered tuple of cameras."""

    __slots__ = ("_cameras",)

    def __init__(self, cameras):
        self._cameras = tuple(c if isinstance(c, Camera) else Camera(c) for c in cameras)
        if not self._cameras:
            raise ShapeError("a rig needs at least one camera")

    def __len__(self):
        return len(self._cameras)

    def __getitem__(self, index):
        return self._cameras[index]

    def __iter__(self):
        return iter(self._cameras)

    @property
    def focal_points(self):
        return [camera.focal_point for camera in self._cameras]

    def subrig(self, sigma):
        return CameraRig([self._cameras[i] for i in sigma])

    def transformed(self, H):
        """Rig of the cameras A_i H for an invertible 4x4 world change H."""
        H = np.asarray(H, dtype=float)
        return CameraRig([Camera(camera.matrix @ H) for camera in self._cameras])

    def to_list(self, normalized=True):
        return [camera.to_list(normalized) for camera in self._cameras]

    @classmethod
    def from_list(cls, matrices):
        return cls([Camera(m) for m in matrices])

    def __repr__(self):
        return f"CameraRig(n={len(self)})"


@dataclass(frozen=True)
class FundamentalMatrix:
    """Unit-norm F with u_k^T F u_j = 0 for labeled correspondences."""

    matrix: np.ndarray
    j: int
    k: int

    def residual(self, u_j, u_k):
        """|u_k^T F u_j| on normalised image points."""
        a = normalize_vector(coords_of(u_j))
        b = normalize_vector(coords_of(u_k))
        return float(abs(b @ self.matrix @ a))


@dataclass(frozen=True)
class LabeledTriangulation:
    point: ProjPoint
    scales: np.ndarray
    residual: float
    kernel_dim: int
    off_variety: bool = False
    singular_values: np.ndarray = field(default=None, repr=False)


def focal_point(A):
    """Kernel of the camera matrix as a normalised point of P^3."""
    return A.focal_point if isinstance(A, Camera) else Camera(A).focal_point


def project(A, X, tol=INIT_TOL_EQUAL):
    camera = A if isinstance(A, Camera) else Camera(A)
    return camera.project(X, tol=tol)


def canonical_cameras(n):
    """
    The first n of the four coordinate cameras.

    Camera i is the 4x4 identity with row i deleted, so its focal point is
    the unit vector e_i.
    """
    if not 1 <= n <= 4:
        raise OutOfRangeError(f"there are only four canonical cameras, requested {n}")
    return CameraRig([np.delete(np.eye(4), i, axis=0) for i in range(n)])


def normalized_camera(c):
    """The camera [I | c] whose focal point is (-c, 1)."""
    c = np.asarray(c, dtype=float).ravel()
    if c.size != 3:
        raise ShapeError("normalized camera needs a 3-vector")
    return Camera(np.hstack([np.eye(3), c[:, None]]))


def canonical_frame(rig):
    """
    World change H taking the focal points of a four camera rig to e_0..e_3.

    The focal point of A_i H is e_i for every i.
    """
    if len(rig) != 4:
        raise OutOfRangeError(f"canonical frame needs exactly four cameras, got {len(rig)}")
    H = np.column_stack([f.coords for f in rig.focal_points])
    if abs(coplanar_det(*rig.focal_points)) < INIT_TOL_EQUAL:
        raise DegenerateInputError("focal points are coplanar")
    return H


def skew(v):
    x, y, z = np.asarray(v, dtype=float)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def _check_pair(rig, j, k):
    for index in (j, k):
        if not 0 <= index < len(rig):
            raise OutOfRangeError(f"camera index {index} outside rig of size {len(rig)}")
    if j == k:
        raise InvalidPairError(f"pairwise object requested for camera {j} with itself")


def epipole(rig, k, j):
    """e_kj: the image of focal point f_j under camera k."""
    _check_pair(rig, k, j)
    return rig[k].project(rig[j].focal_point)


def fundamental_matrix(rig, j, k):
    """
    F = [e_kj]_x A_k pinv(A_j), normalised, with u_k^T F u_j = 0.

    Raises:
        InvalidPairError: If j == k.
        UndefinedProjectionError: If the two focal points coincide.
    """
    _check_pair(rig, j, k)
    e_kj = epipole(rig, k, j)
    F = skew(e_kj.coords) @ rig[k].matrix @ rig[j].pinv()
    return FundamentalMatrix(normalize_vector(F.ravel()).reshape(3, 3), j, k)


def back_projected_line(A, u):
    """Line through the focal point of A and the point pinv(A) u."""
    camera = A if isinstance(A, Camera) else Camera(A)
    x = normalize_vector(coords_of(u))
    if x.size != 3:
        raise ShapeError("image points live in P^2")
    return line_through(camera.focal_point, camera.pinv() @ x)


def trifocal_plane(rig, i, j, k):
    """Plane through the focal points f_i, f_j and f_k."""
    focal = rig.focal_points
    return plane_through(focal[i], focal[j], focal[k])


def labeled_triangulate(rig, us, tol_rank=INIT_TOL_RANK, tol_residual=INIT_TOL_RESIDUAL):
    """
    Triangulate one world point from its labeled images.

    Solves B (X, -lambda) = 0 for the 3n x (4+n) matrix B whose block row j
    is [A_j | u_j placed in column 4+j], by SVD.

    Args:
        rig (CameraRig): n cameras.
        us (sequence): n image points, one per camera.
        tol_rank (float): Relative singular value threshold.
        tol_residual (float): Residuals above it set ``off_variety``.

    Returns:
        LabeledTriangulation

    Raises:
        AmbiguousTriangulationError: If the kernel is at least 2-dimensional
            (e.g. every image is the epipole of the others).
    """
    n = len(rig)
    if len(us) != n:
        raise ShapeError(f"{len(us)} image points for {n} cameras")
    B = np.zeros((3 * n, 4 + n))
    for j, (camera, u) in enumerate(zip(rig, us)):
        x = normalize_vector(coords_of(u))
        if x.size != 3:
            raise ShapeError("image points live in P^2")
        B[3 * j:3 * j + 3, :4] = camera.matrix
        B[3 * j:3 * j + 3, 4 + j] = x

    svd = SVD(B, tol=tol_rank)
    kernel_dim = svd.nullity
    if kernel_dim >= 2:
        raise AmbiguousTriangulationError(
            f"labeled triangulation kernel has dimension {kernel_dim}",
            kernel_dim=kernel_dim)

    v = svd.kernel_vector()
    X = v[:4]
    if np.linalg.norm(X) < tol_rank:
        raise DegenerateInputError("kernel vector has no world component")
    point = normalize_vector(X)
    factor = float(point @ X) / float(X @ X)
    scales = -v[4:] * factor
    residual = svd.residual(v)
    off_variety = residual > tol_residual
    if off_variety:
        logger.warning(f"labeled triangulation residual {residual:.3e} above {tol_residual:.1e}")
    return LabeledTriangulation(ProjPoint(point), scales, residual, kernel_dim,
                                off_variety, svd.s)


def epipolar_residual(rig, us):
    """Largest normalised bilinear residual over all camera pairs."""
    worst = 0.0
    for j, k in itertools.combinations(range(len(rig)), 2):
        F = fundamental_matrix(rig, j, k)
        worst = max(worst, F.residual(us[j], us[k]))
    return worst


def general_position_check(rig, tol=INIT_TOL_EQUAL):
    """
    Focal points pairwise distinct, no three collinear, no four coplanar.
    """
    focal = rig.focal_points
    for a, b in itertools.combinations(focal, 2):
        if proj_equal(a, b, tol):
            return False
    for triple in itertools.combinations(focal, 3):
        if span_deficiency(triple) < tol:
            return False
    for quadruple in itertools.combinations(focal, 4):
        if abs(coplanar_det(*quadruple)) < tol:
            return False
    return True


def random_rig(n, rng=None, entry_range=INIT_RIG_ENTRY_RANGE,
               max_attempts=INIT_RIG_MAX_ATTEMPTS) -> CameraRig:
    """
    Rig of n cameras with integer entries in [-entry_range, entry_range],
    re-drawn until every camera has rank 3 and the rig is in general position.

    Args:
        n (int): Number of cameras.
        rng (int or np.random.Generator, optional): Seed or generator.
    """
    rng = np.random.default_rng(rng)
    for attempt in range(1, max_attempts + 1):
        matrices = rng.integers(-entry_range, entry_range + 1, size=(n, 3, 4))
        try:
            rig = CameraRig(matrices)
        except InvalidCameraError:
            continue
        if general_position_check(rig):
            if attempt > 1:
                logger.debug(f"random rig of {n} cameras accepted after {attempt} draws")
            return rig
    raise DegenerateRigError(f"no rig in general position after {max_attempts} draws",
                             attempts=max_attempts)


def random_world_points(rng, count=2) -> Tuple[np.ndarray, ...]:
    """``count`` world points with coordinates uniform in [-1, 1]."""
    rng = np.random.default_rng(rng)
    return tuple(rng.uniform(-1.0, 1.0, size=4) for _ in range(count))
