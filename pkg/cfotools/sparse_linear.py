''' Sparse Linear Algebra Module

This module contains functions to build compressed sparse row matrices from
unordered triplets and to solve the symmetric indefinite saddle-point
systems produced by the flux assembly.
'''

import logging

import numpy as np
import scipy.io
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg


log = logging.getLogger(__name__)

PIVOT_TOLERANCE = 1e-13
DENSE_THRESHOLD = 200
RESIDUAL_TOLERANCE = 1e-9


class SingularMatrixError(ArithmeticError):
    pass


def from_triplets(n, rows, cols, values, n_cols=None):
    '''
    Build a CSR matrix from (row, col, value) triplets.

    Duplicates are summed after sorting the triplets by (row, col, value), so
    both the layout and the summed values are independent of the order in
    which triplets were produced.

    Parameters
    ----------
    n: int
        Number of rows.
    rows, cols, values: array-like
        Triplet components of equal length.
    n_cols: int, optional
        Number of columns, defaults to n.

    Returns
    -------
    scipy.sparse.csr_matrix
        Column indices sorted and unique within each row.
    '''
    n_cols = n if n_cols is None else n_cols
    rows = np.asarray(rows, dtype=np.int64).ravel()
    cols = np.asarray(cols, dtype=np.int64).ravel()
    values = np.asarray(values, dtype=float).ravel()
    if not (len(rows) == len(cols) == len(values)):
        raise ValueError('triplet arrays differ in length')
    if len(rows) and (rows.min() < 0 or rows.max() >= n or
                      cols.min() < 0 or cols.max() >= n_cols):
        raise IndexError('triplet index out of range for a {}x{} matrix'.format(n, n_cols))

    order = np.lexsort((values, cols, rows))
    rows = rows[order]
    cols = cols[order]
    values = values[order]

    if len(rows):
        start = np.ones(len(rows), dtype=bool)
        start[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
        first = np.flatnonzero(start)
        data = np.add.reduceat(values, first)
        rows = rows[first]
        cols = cols[first]
    else:
        data = values
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    matrix = scipy.sparse.csr_matrix((data, cols, indptr), shape=(n, n_cols))
    matrix.has_sorted_indices = True
    return matrix


def matvec(A, x):
    '''Product A x with a dimension check'''
    x = np.asarray(x, dtype=float)
    if x.shape != (A.shape[1],):
        raise ValueError('dimension mismatch: matrix {} and vector {}'.format(A.shape, x.shape))
    return A.dot(x)


def symmetry_defect(A):
    '''max |A - A^T|'''
    diff = (A - A.T).tocoo()
    return float(np.abs(diff.data).max()) if diff.nnz else 0.0


def _equilibrate(A):
    '''Symmetric row/column scaling D A D with D = diag(max_j |A_ij|)^-1/2'''
    row_max = np.asarray(abs(A).max(axis=1).toarray()).ravel()
    if np.any(row_max == 0):
        raise SingularMatrixError('matrix has an empty row ({})'.format(int(np.argmin(row_max))))
    d = 1.0 / np.sqrt(row_max)
    D = scipy.sparse.diags(d)
    return scipy.sparse.csr_matrix(D.dot(A).dot(D)), d


def _check_pivots(pivots, scale, tol):
    if len(pivots) and (not np.all(np.isfinite(pivots)) or pivots.min() <= tol * scale):
        raise SingularMatrixError('singular or ill-conditioned matrix: pivot {:.3e} '
                                  'against scale {:.3e}'.format(pivots.min(), scale))


def _solve_dense(A, b, tol):
    dense = A.toarray()
    lu, d, perm = scipy.linalg.ldl(dense, lower=True)
    scale = np.abs(np.diag(dense)).max()
    scale = scale if scale > 0 else np.abs(dense).max()
    # d is block diagonal with 1x1 and 2x2 blocks
    _check_pivots(np.abs(np.linalg.eigvalsh(d)), scale, tol)
    triangular = lu[perm]
    y = scipy.linalg.solve_triangular(triangular, b[perm], lower=True, unit_diagonal=True)
    z = scipy.linalg.solve(d, y, assume_a='sym')
    w = scipy.linalg.solve_triangular(triangular.T, z, lower=False, unit_diagonal=True)
    x = np.empty_like(w)
    x[perm] = w
    return x


def _solve_sparse(A, b, tol):
    try:
        factor = scipy.sparse.linalg.splu(A.tocsc(), permc_spec='MMD_AT_PLUS_A')
    except RuntimeError as err:
        raise SingularMatrixError('sparse factorization failed: {}'.format(err))
    scale = np.abs(A.diagonal()).max()
    scale = scale if scale > 0 else np.abs(A.data).max()
    _check_pivots(np.abs(factor.U.diagonal()), scale, tol)
    x = factor.solve(b)
    # one step of iterative refinement
    x = x + factor.solve(b - A.dot(x))
    return x


def solve_symmetric_indefinite(A, b, tol=PIVOT_TOLERANCE, dense_threshold=DENSE_THRESHOLD):
    '''
    Solve A x = b for a symmetric, possibly indefinite, sparse matrix.

    The system is first scaled symmetrically so that every row has unit
    largest magnitude. Systems smaller than dense_threshold then use a dense
    Bunch-Kaufman LDL^T factorization; larger ones a sparse LU factorization
    with a minimum-degree ordering on A^T + A. The sparse path does not
    exploit symmetry: it factors the full matrix and stores both triangles.
    Both paths are deterministic.

    Parameters
    ----------
    A: scipy.sparse matrix (n, n)
    b: array (n,)
    tol: float, default 1e-13
        Pivots of the scaled matrix smaller than tol times its largest
        diagonal magnitude are treated as singular.
    dense_threshold: int, default 200

    Returns
    -------
    numpy array (n,)
    '''
    A = scipy.sparse.csr_matrix(A)
    b = np.asarray(b, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or b.shape != (n,):
        raise ValueError('dimension mismatch: matrix {} and vector {}'.format(A.shape, b.shape))
    if n == 0:
        return np.zeros(0)

    scaled, d = _equilibrate(A)
    if n < dense_threshold:
        log.debug('dense LDL^T solve, n=%d', n)
        y = _solve_dense(scaled, d * b, tol)
    else:
        log.debug('sparse LU solve, n=%d, nnz=%d', n, A.nnz)
        y = _solve_sparse(scaled, d * b, tol)
    x = d * y

    residual = np.linalg.norm(A.dot(x) - b)
    bound = RESIDUAL_TOLERANCE * (np.abs(A.data).max() * np.linalg.norm(x) + np.linalg.norm(b))
    log.debug('solve residual %.3e (bound %.3e)', residual, bound)
    if not np.isfinite(residual) or residual > bound:
        raise SingularMatrixError('ill-conditioned system: residual {:.3e} exceeds {:.3e}'
                                  .format(residual, bound))
    return x


def write_matrix_market(path, A, comment=''):
    '''Dump A in MatrixMarket coordinate format'''
    scipy.io.mmwrite(path, scipy.sparse.coo_matrix(A), comment=comment)
