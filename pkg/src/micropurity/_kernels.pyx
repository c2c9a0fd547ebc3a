# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementation of the hot sampling/observable kernels.

Same contracts as :mod:`micropurity._kernels_py`, specialized to per-sample C
loops (plus LAPACK ``zheevd`` for reduced-spectrum entropies).  All heavy
loops release the GIL, so chunked sampling parallelizes across threads.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport log, sqrt
from scipy.linalg.cython_lapack cimport zheevd

from .errors import NumericalError, PositivityError, ValidationError

cnp.import_array()

BACKEND_NAME = "compiled"

EIG_CLIP = 1e-10


def normalize_blocks(double complex[:, :, ::1] states,
                     cnp.int64_t[::1] row_start, cnp.int64_t[::1] row_stop,
                     cnp.int64_t[::1] col_start, cnp.int64_t[::1] col_stop,
                     double[::1] weights):
    """Rescale each (gas shell, container shell) block to its target weight.

    In-place twin of the numpy version; see ``_kernels_py.normalize_blocks``.
    """
    cdef Py_ssize_t m = states.shape[0]
    cdef Py_ssize_t nb = weights.shape[0]
    cdef Py_ssize_t s, k, i, j
    cdef double sq, scale
    cdef int bad = 0
    with nogil:
        for s in range(m):
            for k in range(nb):
                if weights[k] == 0.0:
                    for i in range(row_start[k], row_stop[k]):
                        for j in range(col_start[k], col_stop[k]):
                            states[s, i, j] = 0.0
                    continue
                sq = 0.0
                for i in range(row_start[k], row_stop[k]):
                    for j in range(col_start[k], col_stop[k]):
                        sq += (states[s, i, j].real * states[s, i, j].real
                               + states[s, i, j].imag * states[s, i, j].imag)
                if sq == 0.0:
                    bad = 1
                    continue
                scale = sqrt(weights[k] / sq)
                for i in range(row_start[k], row_stop[k]):
                    for j in range(col_start[k], col_stop[k]):
                        states[s, i, j] = states[s, i, j] * scale
    if bad:
        raise ValidationError("cannot normalize a zero block to nonzero weight")
    return np.asarray(states)


def block_weights(double complex[:, :, ::1] states,
                  cnp.int64_t[::1] row_start, cnp.int64_t[::1] row_stop,
                  cnp.int64_t[::1] col_start, cnp.int64_t[::1] col_stop):
    """Squared amplitude mass of every block, shape ``(m, n_blocks)``."""
    cdef Py_ssize_t m = states.shape[0]
    cdef Py_ssize_t nb = row_start.shape[0]
    out = np.empty((m, nb))
    cdef double[:, ::1] outv = out
    cdef Py_ssize_t s, k, i, j
    cdef double sq
    with nogil:
        for s in range(m):
            for k in range(nb):
                sq = 0.0
                for i in range(row_start[k], row_stop[k]):
                    for j in range(col_start[k], col_stop[k]):
                        sq += (states[s, i, j].real * states[s, i, j].real
                               + states[s, i, j].imag * states[s, i, j].imag)
                outv[s, k] = sq
    return out


def gas_purity(double complex[:, :, ::1] states):
    """Purity of the first-subsystem reduction of each pure state."""
    cdef Py_ssize_t m = states.shape[0]
    cdef Py_ssize_t g = states.shape[1]
    cdef Py_ssize_t c = states.shape[2]
    out = np.empty(m)
    cdef double[::1] outv = out
    cdef Py_ssize_t s, i, i2, j
    cdef double complex acc
    cdef double p, diag
    with nogil:
        for s in range(m):
            p = 0.0
            for i in range(g):
                diag = 0.0
                for j in range(c):
                    diag += (states[s, i, j].real * states[s, i, j].real
                             + states[s, i, j].imag * states[s, i, j].imag)
                p += diag * diag
                for i2 in range(i + 1, g):
                    acc = 0.0
                    for j in range(c):
                        acc = acc + states[s, i, j] * states[s, i2, j].conjugate()
                    p += 2.0 * (acc.real * acc.real + acc.imag * acc.imag)
            outv[s] = p
    return out


def gas_entropy(double complex[:, :, ::1] states, double clip=EIG_CLIP):
    """Von Neumann entropy of the first-subsystem reduction of each state."""
    cdef Py_ssize_t m = states.shape[0]
    cdef Py_ssize_t g = states.shape[1]
    cdef Py_ssize_t c = states.shape[2]
    out = np.empty(m)
    cdef double[::1] outv = out

    gram_arr = np.empty(g * g, dtype=np.complex128)
    w_arr = np.empty(g)
    cdef double complex[::1] gram = gram_arr
    cdef double[::1] w = w_arr

    cdef char jobz = b"N"
    cdef char uplo = b"L"
    cdef int n = <int> g
    cdef int lda = <int> g
    cdef int info = 0
    cdef int lwork = -1
    cdef int lrwork = -1
    cdef int liwork = -1
    cdef double complex wkopt
    cdef double rwkopt
    cdef int iwkopt
    # workspace size query
    zheevd(&jobz, &uplo, &n, &gram[0], &lda, &w[0], &wkopt, &lwork,
           &rwkopt, &lrwork, &iwkopt, &liwork, &info)
    if info != 0:
        raise NumericalError(f"zheevd workspace query failed, info={info}")
    lwork = <int> wkopt.real
    lrwork = <int> rwkopt
    liwork = iwkopt
    work_arr = np.empty(lwork, dtype=np.complex128)
    rwork_arr = np.empty(lrwork)
    iwork_arr = np.empty(liwork, dtype=np.intc)
    cdef double complex[::1] work = work_arr
    cdef double[::1] rwork = rwork_arr
    cdef int[::1] iwork = iwork_arr

    cdef Py_ssize_t s, i, i2, j
    cdef double complex acc
    cdef double ent, lam, low
    cdef int fail_info = 0
    cdef double bad_eval = 0.0
    with nogil:
        for s in range(m):
            for i in range(g):
                for i2 in range(g):
                    acc = 0.0
                    for j in range(c):
                        acc = acc + states[s, i, j] * states[s, i2, j].conjugate()
                    gram[i * g + i2] = acc
            zheevd(&jobz, &uplo, &n, &gram[0], &lda, &w[0], &work[0], &lwork,
                   &rwork[0], &lrwork, &iwork[0], &liwork, &info)
            if info != 0:
                fail_info = info
                break
            ent = 0.0
            for i in range(g):
                lam = w[i]
                if lam < -clip:
                    if lam < bad_eval:
                        bad_eval = lam
                elif lam > 0.0:
                    ent -= lam * log(lam)
            outv[s] = ent
    if fail_info != 0:
        raise NumericalError(f"zheevd failed to converge, info={fail_info}")
    if bad_eval < 0.0:
        raise PositivityError(
            f"reduced density matrix eigenvalue {bad_eval} < -{clip}")
    return out
