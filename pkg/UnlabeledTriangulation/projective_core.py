"""
Projective primitives: points of P^2 and P^3, lines of P^3 in Pluecker
coordinates and the incidence tests built on them.

Points are kept as nonzero real vectors and compared up to scale. All
predicates work on normalised representatives (unit norm, first nonzero
coordinate positive), so their tolerances do not depend on the scale the
caller happened to use.
"""

from .errors import DegenerateInputError, ShapeError
from .linalg import SVD
import numpy as np

INIT_TOL_EQUAL = 1e-8
INIT_TOL_INCIDENCE = 1e-8

# Coordinates smaller than this fraction of the largest one are skipped
# when looking for the leading sign.
SIGN_THRESHOLD = 1e-12
UNIT_NORM_SLACK = 16 * np.finfo(float).eps

# Pluecker coordinate order (p01, p02, p03, p12, p13, p23).
PLUECKER_INDICES = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def normalize_vector(vector):
    """
    Unit-norm representative whose first nonzero coordinate is positive.

    Args:
        vector (array_like): Nonzero finite real vector.

    Returns:
        np.ndarray: New normalised array. Normalising an already normalised
            vector returns an identical copy.

    Raises:
        DegenerateInputError: If the vector is zero or not finite.
    """
    v = np.array(vector, dtype=float).ravel()
    if not np.all(np.isfinite(v)):
        raise DegenerateInputError("vector has non-finite entries")
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise DegenerateInputError("zero vector has no projective class")
    if abs(norm - 1.0) > UNIT_NORM_SLACK:
        v = v / norm
    magnitudes = np.abs(v)
    lead = int(np.argmax(magnitudes > SIGN_THRESHOLD * magnitudes.max()))
    if v[lead] < 0:
        v = -v
    return v


def coords_of(point):
    """Coordinates of a ProjPoint or of any array-like as a float array."""
    if isinstance(point, ProjPoint):
        return point.coords
    return np.asarray(point, dtype=float).ravel()


class ProjPoint:
    """
    Point of P^(d-1) stored as a nonzero real d-vector.

    The coordinate array is read-only; two points are equal when they are
    equal up to scale at the default tolerance.
    """

    __slots__ = ("_coords",)

    def __init__(self, coords):
        arr = np.array(coords, dtype=float).ravel()
        if arr.size < 2:
            raise ShapeError(f"projective point needs at least 2 coordinates, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise DegenerateInputError("projective point has non-finite coordinates")
        if not np.any(arr):
            raise DegenerateInputError("zero vector is not a projective point")
        arr.setflags(write=False)
        self._coords = arr

    @property
    def coords(self):
        return self._coords

    @property
    def dim(self):
        return self._coords.size

    def normalized(self):
        return ProjPoint(normalize_vector(self._coords))

    def to_list(self):
        """Normalised coordinates as a list of floats."""
        return [float(c) for c in normalize_vector(self._coords)]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._coords.copy()
        return self._coords.astype(dtype)

    def __len__(self):
        return self._coords.size

    def __eq__(self, other):
        if not isinstance(other, ProjPoint):
            return NotImplemented
        if other.dim != self.dim:
            return False
        return proj_equal(self, other)

    __hash__ = None

    def __repr__(self):
        return f"ProjPoint({', '.join(f'{c:.6g}' for c in normalize_vector(self._coords))})"


def normalize(point):
    """Normalised representative of ``point`` as a new ProjPoint."""
    return ProjPoint(normalize_vector(coords_of(point)))


def _unit_pair(a, b):
    a = coords_of(a)
    b = coords_of(b)
    if a.shape != b.shape:
        raise ShapeError(f"cannot compare points of dimensions {a.size} and {b.size}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise DegenerateInputError("zero vector is not a projective point")
    return a / na, b / nb


def proj_equal(a, b, tol=INIT_TOL_EQUAL):
    """True when ``1 - |<a, b>| / (|a| |b|) < tol``."""
    ua, ub = _unit_pair(a, b)
    return bool(1.0 - abs(float(ua @ ub)) < tol)


def proj_distance(a, b):
    """Chordal distance between the unit representatives, minimised over sign."""
    ua, ub = _unit_pair(a, b)
    return float(min(np.linalg.norm(ua - ub), np.linalg.norm(ua + ub)))


def _stacked(points, dim):
    rows = []
    for p in points:
        c = coords_of(p)
        if c.size != dim:
            raise ShapeError(f"expected points with {dim} coordinates, got {c.size}")
        rows.append(normalize_vector(c))
    return np.vstack(rows)


def collinear_det(p, q, r):
    """Determinant of three normalised points of P^2; zero iff collinear."""
    return float(np.linalg.det(_stacked((p, q, r), 3)))


def coplanar_det(p, q, r, s):
    """Determinant of four normalised points of P^3; zero iff coplanar."""
    return float(np.linalg.det(_stacked((p, q, r, s), 4)))


def span_deficiency(points):
    """
    Smallest singular value of the stacked normalised points.

    Zero iff the points are linearly dependent, e.g. three collinear points
    of P^3. For a square stack it equals |det| up to the other singular values.
    """
    points = list(points)
    dim = coords_of(points[0]).size
    if len(points) > dim:
        raise ShapeError(f"{len(points)} points of P^{dim - 1} are always dependent")
    return float(SVD(_stacked(points, dim)).s[-1])


def plane_through(p, q, r, tol=INIT_TOL_EQUAL):
    """Unit plane vector of P^3 through three points."""
    basis = SVD(_stacked((p, q, r), 4), tol=tol)
    if basis.rank < 3:
        raise DegenerateInputError("points are collinear, the plane is not unique",
                                   deficiency=float(basis.s[-1]))
    return normalize_vector(basis.kernel_vector())


class ProjLine3:
    """
    Line of P^3 as a unit Pluecker 6-vector (p01, p02, p03, p12, p13, p23).
    """

    __slots__ = ("_plucker",)

    def __init__(self, plucker, tol=INIT_TOL_INCIDENCE):
        arr = np.array(plucker, dtype=float).ravel()
        if arr.size != 6:
            raise ShapeError(f"Pluecker vector needs 6 coordinates, got {arr.size}")
        arr = normalize_vector(arr)
        if abs(pluecker_relation(arr)) > tol:
            raise DegenerateInputError("vector does not satisfy the Pluecker relation",
                                       relation=float(pluecker_relation(arr)))
        arr.setflags(write=False)
        self._plucker = arr

    @property
    def plucker(self):
        return self._plucker

    def primal_matrix(self):
        """Skew matrix L with L[i, j] = p_ij; its row space is the line."""
        L = np.zeros((4, 4))
        for value, (i, j) in zip(self._plucker, PLUECKER_INDICES):
            L[i, j] = value
            L[j, i] = -value
        return L

    def dual_matrix(self):
        """Skew matrix L* with L* X = 0 exactly for points X on the line."""
        p01, p02, p03, p12, p13, p23 = self._plucker
        D = np.zeros((4, 4))
        D[0, 1], D[0, 2], D[0, 3] = p23, -p13, p12
        D[1, 2], D[1, 3], D[2, 3] = p03, -p02, p01
        return D - D.T

    def points(self):
        """Two orthonormal points spanning the line, as columns of a 4x2 array."""
        return SVD(self.primal_matrix()).Vh[:2].T.copy()

    def incidence(self, point):
        """Residual |L* X| for the normalised point X; zero iff X is on the line."""
        X = normalize_vector(coords_of(point))
        return float(np.linalg.norm(self.dual_matrix() @ X))

    def contains(self, point, tol=INIT_TOL_INCIDENCE):
        return self.incidence(point) < tol

    def __eq__(self, other):
        if not isinstance(other, ProjLine3):
            return NotImplemented
        return proj_equal(self._plucker, other._plucker)

    __hash__ = None

    def __repr__(self):
        return f"ProjLine3({', '.join(f'{c:.6g}' for c in self._plucker)})"


def pluecker_relation(p):
    """p01 p23 - p02 p13 + p03 p12."""
    p = np.asarray(p, dtype=float)
    return float(p[0] * p[5] - p[1] * p[4] + p[2] * p[3])


def reciprocal_product(L1, L2):
    """Reciprocal pairing of two unit lines; zero iff they are coplanar."""
    p = L1.plucker
    q = L2.plucker
    return float(p[0] * q[5] - p[1] * q[4] + p[2] * q[3]
                 + p[3] * q[2] - p[4] * q[1] + p[5] * q[0])


def line_through(X, Y, tol=INIT_TOL_EQUAL):
    """
    Line of P^3 joining two distinct points.

    Raises:
        DegenerateInputError: If the points coincide projectively.
    """
    x = coords_of(X)
    y = coords_of(Y)
    if x.size != 4 or y.size != 4:
        raise ShapeError("line_through needs points of P^3")
    if proj_equal(x, y, tol):
        raise DegenerateInputError("coincident points do not span a line")
    x = normalize_vector(x)
    y = normalize_vector(y)
    return ProjLine3([x[i] * y[j] - x[j] * y[i] for i, j in PLUECKER_INDICES])


def lines_meet(L1, L2, tol=INIT_TOL_INCIDENCE):
    """
    Intersection point of two lines of P^3.

    Returns:
        ProjPoint or None: The common point, or None for skew lines.

    Raises:
        DegenerateInputError: If the lines are identical.
    """
    if proj_equal(L1.plucker, L2.plucker, tol):
        raise DegenerateInputError("identical lines meet in a whole line")
    pairing = reciprocal_product(L1, L2)
    if abs(pairing) > tol:
        return None
    P1 = L1.points()
    P2 = L2.points()
    coefficients = SVD(np.hstack([P1, -P2])).kernel_vector()
    return normalize(P1 @ coefficients[:2])
