"""
Symmetric tensor representation of unordered point configurations.

A configuration of m points of P^(d-1) is encoded as the symmetric order-m
tensor sum_pi x_pi(1) (x) ... (x) x_pi(m), which forgets the order of the
points. For m = 2 this is the symmetric matrix u v^T + v u^T.

Storage follows the sorted multi-index convention: the entries of a
symmetric tensor are listed at the multi-indices i1 <= ... <= im in
lexicographic order (for m = 2, d = 4: m00, m01, m02, m03, m11, m12, m13,
m22, m23, m33). The stored value is the tensor entry itself, not weighted
by the multiplicity of the index.
"""

from .projective_core import INIT_TOL_EQUAL, ProjPoint, coords_of, normalize_vector, proj_equal
from .errors import ComplexPairError, DegenerateInputError, DegenerateProjectionError
from .errors import NotSplittableError, ShapeError
from .linalg import INIT_TOL_RANK
from dataclasses import dataclass
from .logsetup import logger
from .camera import Camera
import numpy as np
import functools
import itertools
import math


@functools.lru_cache(maxsize=None)
def multi_indices(order, dim):
    """Sorted multi-indices of a symmetric tensor in storage order."""
    return tuple(itertools.combinations_with_replacement(range(dim), order))


def sym_length(order, dim):
    """Number of stored entries, binom(order + dim - 1, order)."""
    return math.comb(order + dim - 1, order)


@functools.lru_cache(maxsize=None)
def _orbits(order, dim):
    # every distinct permutation of each sorted multi-index
    return tuple(tuple(set(itertools.permutations(index))) for index in multi_indices(order, dim))


class SymConfig:
    """
    Symmetric tensor of a given order over R^dim, stored by sorted
    multi-index. Represents an unordered configuration up to scale.
    """

    __slots__ = ("order", "dim", "_entries")

    def __init__(self, entries, order, dim):
        arr = np.array(entries, dtype=float).ravel()
        expected = sym_length(order, dim)
        if arr.size != expected:
            raise ShapeError(f"order {order} tensor over R^{dim} has {expected} entries, got {arr.size}")
        arr.setflags(write=False)
        self.order = order
        self.dim = dim
        self._entries = arr

    @property
    def entries(self):
        return self._entries

    def normalized(self):
        return SymConfig(normalize_vector(self._entries), self.order, self.dim)

    def to_tensor(self):
        T = np.zeros((self.dim,) * self.order)
        for value, orbit in zip(self._entries, _orbits(self.order, self.dim)):
            for index in orbit:
                T[index] = value
        return T

    def matrix(self):
        if self.order != 2:
            raise ShapeError(f"order {self.order} tensor is not a matrix")
        return self.to_tensor()

    @classmethod
    def from_tensor(cls, T, tol=INIT_TOL_RANK):
        """Read a symmetric tensor; asymmetry beyond ``tol`` is rejected."""
        T = np.asarray(T, dtype=float)
        order, dim = T.ndim, T.shape[0]
        if any(size != dim for size in T.shape):
            raise ShapeError(f"tensor shape {T.shape} is not cubical")
        scale = max(np.abs(T).max(), 1.0)
        for axes in itertools.permutations(range(order)):
            if np.abs(T - np.transpose(T, axes)).max() > tol * scale:
                raise ShapeError("tensor is not symmetric")
        return cls([T[index] for index in multi_indices(order, dim)], order, dim)

    def to_dict(self):
        return {"order": self.order, "dim": self.dim,
                "entries": [float(e) for e in normalize_vector(self._entries)]}

    @classmethod
    def from_dict(cls, data):
        return cls(data["entries"], int(data["order"]), int(data["dim"]))

    def __eq__(self, other):
        if not isinstance(other, SymConfig):
            return NotImplemented
        if (self.order, self.dim) != (other.order, other.dim):
            return False
        return proj_equal(self._entries, other._entries)

    __hash__ = None

    def __repr__(self):
        return f"SymConfig(order={self.order}, dim={self.dim})"


def _as_sym(M):
    if isinstance(M, SymConfig):
        return M
    return SymConfig.from_tensor(M)


def pair_to_sym(u, v):
    """Normalised u v^T + v u^T."""
    a = coords_of(u)
    b = coords_of(v)
    if a.shape != b.shape:
        raise ShapeError(f"pair of points of dimensions {a.size} and {b.size}")
    if not np.any(a) or not np.any(b):
        raise DegenerateInputError("a pair cannot contain the zero vector")
    S = np.outer(a, b)
    return SymConfig.from_tensor(S + S.T).normalized()


def config_to_sym(points, order=None):
    """
    Normalised symmetrised tensor of an unordered configuration.

    Args:
        points (sequence): m points of the same dimension.
        order (int, optional): Must equal len(points) when given.
    """
    points = [coords_of(p) for p in points]
    if not points:
        raise ShapeError("empty configuration")
    if order is not None and order != len(points):
        raise ShapeError(f"order {order} does not match {len(points)} points")
    dim = points[0].size
    if any(p.size != dim for p in points):
        raise ShapeError("configuration mixes point dimensions")
    points = [normalize_vector(p) for p in points]
    T = np.zeros((dim,) * len(points))
    for perm in itertools.permutations(range(len(points))):
        T += functools.reduce(np.multiply.outer, [points[i] for i in perm])
    return SymConfig([T[index] for index in multi_indices(len(points), dim)],
                     len(points), dim).normalized()


def vectorize(M):
    """Entries of M at the sorted multi-indices."""
    return _as_sym(M).entries.copy()


def unvectorize(vector, order, dim):
    return SymConfig(vector, order, dim)


def contract(T, A):
    """T(A, ..., A): apply the matrix A on every axis of the tensor T."""
    A = np.asarray(A, dtype=float)
    for _ in range(T.ndim):
        # the contracted axis moves to the end, so after ndim steps the
        # original axis order is restored
        T = np.tensordot(T, A, axes=([0], [1]))
    return T


def unlabeled_project(A, M, tol=INIT_TOL_EQUAL):
    """
    Image M(A, ..., A) of a world configuration under the camera A.

    Raises:
        DegenerateProjectionError: If the image is numerically zero, e.g. a
            pair whose points project to a single point.
    """
    M = _as_sym(M)
    matrix = A.matrix if isinstance(A, Camera) else np.asarray(A, dtype=float)
    if M.dim != matrix.shape[1]:
        raise ShapeError(f"configuration over R^{M.dim} for a camera on R^{matrix.shape[1]}")
    T = M.to_tensor()
    R = contract(T, matrix)
    reference = np.linalg.norm(matrix, 2) ** M.order * np.linalg.norm(T)
    if np.linalg.norm(R) < tol * reference:
        raise DegenerateProjectionError("unlabeled image vanishes",
                                        norm=float(np.linalg.norm(R)))
    return SymConfig([R[index] for index in multi_indices(M.order, matrix.shape[0])],
                     M.order, matrix.shape[0]).normalized()


@dataclass(frozen=True)
class LiftedCamera:
    """Matrix of M -> M(A, ..., A) on stored entries."""

    matrix: np.ndarray
    order: int

    def apply(self, M):
        return self.matrix @ vectorize(M)


def lift_camera(A, order):
    """
    The binom(order+2, order) x binom(order+3, order) lifted camera.

    Column s is the image of the symmetric 0/1 basis tensor of the sorted
    multi-index s, read at the sorted image multi-indices.
    """
    matrix = A.matrix if isinstance(A, Camera) else np.asarray(A, dtype=float)
    rows, cols = matrix.shape
    target = multi_indices(order, rows)
    columns = []
    for orbit in _orbits(order, cols):
        E = np.zeros((cols,) * order)
        for index in orbit:
            E[index] = 1.0
        R = contract(E, matrix)
        columns.append([R[index] for index in target])
    return LiftedCamera(np.array(columns).T, order)


def unlabeled_focal_point(rig, sigma):
    """Symmetrised tensor of the focal points of the cameras in sigma."""
    return config_to_sym([rig[i].focal_point for i in sigma])


def transform_sym(M, H):
    """Configuration in the world frame where the cameras read A H."""
    M = _as_sym(M)
    T = contract(M.to_tensor(), np.linalg.inv(np.asarray(H, dtype=float)))
    return SymConfig([T[index] for index in multi_indices(M.order, M.dim)],
                     M.order, M.dim).normalized()


def nearest_rank2(M):
    """Keep the two eigenpairs of largest magnitude; no rescaling."""
    M = _as_sym(M)
    w, V = np.linalg.eigh(M.matrix())
    keep = np.argsort(np.abs(w))[::-1][:2]
    S = (V[:, keep] * w[keep]) @ V[:, keep].T
    return SymConfig.from_tensor((S + S.T) / 2)


def split_rank2(M, tol_rank=INIT_TOL_RANK):
    """
    Recover the unordered pair {X, Y} of a rank-2 symmetric matrix.

    With eigenpairs l+ > 0 > l-, X = sqrt(l+) w+ + sqrt(-l-) w- and
    Y = sqrt(l+) w+ - sqrt(-l-) w- satisfy X Y^T + Y X^T proportional to M.

    Returns:
        tuple[ProjPoint, ProjPoint]: Normalised points in lexicographic order.

    Raises:
        NotSplittableError: If the numerical rank is not 2.
        ComplexPairError: If the matrix is definite on its range.
    """
    M = _as_sym(M)
    w, V = np.linalg.eigh(M.matrix())
    largest = np.abs(w).max()
    if largest == 0.0:
        raise NotSplittableError("zero matrix", rank=0)
    significant = np.flatnonzero(np.abs(w) > tol_rank * largest)
    if significant.size != 2:
        raise NotSplittableError(f"matrix has rank {significant.size}, expected 2",
                                 rank=int(significant.size))
    lam = w[significant]
    vecs = V[:, significant]
    if lam[0] * lam[1] > 0:
        raise ComplexPairError("definite rank-2 matrix splits into a complex conjugate pair",
                               eigenvalues=[float(x) for x in lam])
    pos = int(np.argmax(lam))
    neg = 1 - pos
    a = np.sqrt(lam[pos]) * vecs[:, pos]
    b = np.sqrt(-lam[neg]) * vecs[:, neg]
    pair = sorted((normalize_vector(a + b), normalize_vector(a - b)), key=tuple)
    logger.debug(f"split rank-2 matrix with eigenvalues {lam[pos]:.3e}, {lam[neg]:.3e}")
    return ProjPoint(pair[0]), ProjPoint(pair[1])
