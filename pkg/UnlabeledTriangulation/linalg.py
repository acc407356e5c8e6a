"""
Singular value decomposition helper shared by the solvers.

Wraps scipy.linalg.svd and keeps the quantities every caller needs:
numerical rank at a relative threshold, nullity, null space basis and the
singular value gap that tells how trustworthy the rank decision is.
"""

import scipy.linalg
import numpy as np

INIT_TOL_RANK = 1e-8
INIT_MIN_GAP_RATIO = 10.0


class SVD:

    def __init__(self, matrix, tol=INIT_TOL_RANK):
        """
        Decompose ``matrix`` and keep metrics like the rank and the gap.

        Parameters
        ----------
        matrix : array_like
            Real two dimensional matrix.
        tol : float, optional
            Singular values below ``tol * largest_singular_value`` count as
            zero. The default is 1e-8.
        """
        self.matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        self.tol = tol
        self.rows, self.cols = self.matrix.shape
        full = self.cols > self.rows
        self.U, self.s, self.Vh = scipy.linalg.svd(
            self.matrix, full_matrices=full, lapack_driver="gesvd")

        self.largest = float(self.s[0]) if self.s.size else 0.0
        if self.largest == 0.0:
            self.rank = 0
        else:
            self.rank = int(np.sum(self.s > tol * self.largest))
        self.nullity = self.cols - self.rank

    @property
    def relative(self):
        """Singular values divided by the largest one."""
        if self.largest == 0.0:
            return np.zeros_like(self.s)
        return self.s / self.largest

    def null_space(self):
        """Orthonormal basis of the numerical null space, one column each."""
        return self.Vh[self.rank:].T.copy()

    def smallest_right(self, k):
        """Right singular vectors of the ``k`` smallest singular values."""
        return self.Vh[self.cols - k:].T.copy()

    def kernel_vector(self):
        """Unit right singular vector of the smallest singular value."""
        return self.Vh[-1].copy()

    def residual(self, vector):
        """Relative residual ``|M v| / sigma_max`` of a unit vector."""
        vector = np.asarray(vector, dtype=float)
        vector = vector / np.linalg.norm(vector)
        if self.largest == 0.0:
            return 0.0
        return float(np.linalg.norm(self.matrix @ vector) / self.largest)

    def gap_ratio(self, rank=None):
        """
        Ratio between the last kept and the first discarded singular value.

        When nothing is discarded inside the computed spectrum, the ratio is
        taken between the smallest singular value and the threshold.
        """
        r = self.rank if rank is None else rank
        if r == 0:
            return np.inf
        if r < self.s.size:
            if self.s[r] == 0.0:
                return np.inf
            return float(self.s[r - 1] / self.s[r])
        if self.cols > self.s.size:
            return np.inf
        return float(self.s[r - 1] / (self.largest * self.tol))


def numerical_rank(matrix, tol=INIT_TOL_RANK):
    """Numerical rank of ``matrix`` at relative threshold ``tol``."""
    return SVD(matrix, tol=tol).rank
