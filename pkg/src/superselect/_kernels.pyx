# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels.

``eigh``, ``expi`` and ``mean_error_sq`` call LAPACK (zheev) directly, so the
search objective runs without Python overhead per evaluation.
``jacobi_eigh`` is an independent cyclic Jacobi eigensolver.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, hypot, cos, sin
from scipy.linalg.cython_lapack cimport zheev

cnp.import_array()

DEF MAX_SWEEPS = 64


cdef int _jacobi(double complex[:, ::1] a, double complex[:, ::1] v,
                 double[::1] w) noexcept nogil:
    """Diagonalize ``a`` in place. Returns the number of sweeps used."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t p, q, k
    cdef int sweep, rotated
    cdef double fro2 = 0.0, off2, mag, app, aqq, theta, t, c, s
    cdef double complex ph, wpp, wpq, wqp, wqq, x, y

    for p in range(n):
        for q in range(n):
            v[p, q] = 1.0 if p == q else 0.0
            fro2 += a[p, q].real * a[p, q].real + a[p, q].imag * a[p, q].imag

    for sweep in range(MAX_SWEEPS):
        off2 = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off2 += a[p, q].real * a[p, q].real + a[p, q].imag * a[p, q].imag
        if off2 <= 1e-26 * fro2 or off2 < 1e-300:
            break
        rotated = 0
        for p in range(n - 1):
            for q in range(p + 1, n):
                mag = hypot(a[p, q].real, a[p, q].imag)
                app = a[p, p].real
                aqq = a[q, q].real
                # below rounding level of the diagonal: treat as zero
                if mag < 1e-300 or mag < 1e-17 * (fabs(app) + fabs(aqq)):
                    continue
                rotated += 1
                theta = (aqq - app) / (2.0 * mag)
                if theta >= 0:
                    t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                ph = a[p, q] / mag
                wpp = c * ph
                wpq = s * ph
                wqp = -s
                wqq = c
                for k in range(n):
                    x = a[k, p]
                    y = a[k, q]
                    a[k, p] = x * wpp + y * wqp
                    a[k, q] = x * wpq + y * wqq
                for k in range(n):
                    x = a[p, k]
                    y = a[q, k]
                    a[p, k] = wpp.conjugate() * x + wqp.conjugate() * y
                    a[q, k] = wpq.conjugate() * x + wqq.conjugate() * y
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                for k in range(n):
                    x = v[k, p]
                    y = v[k, q]
                    v[k, p] = x * wpp + y * wqp
                    v[k, q] = x * wpq + y * wqq
        if rotated == 0:
            break
    for p in range(n):
        w[p] = a[p, p].real
    return sweep


cdef void _sort_eig(double[::1] w, double complex[:, ::1] v) noexcept nogil:
    # insertion sort; n is small
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double key
    cdef double complex tmp
    for i in range(1, n):
        j = i
        while j > 0 and w[j - 1] > w[j]:
            key = w[j]
            w[j] = w[j - 1]
            w[j - 1] = key
            for k in range(n):
                tmp = v[k, j]
                v[k, j] = v[k, j - 1]
                v[k, j - 1] = tmp
            j -= 1


cdef int _lapack_eigh(double complex[:, ::1] a, double[::1] w, double complex[::1] work,
                      double[::1] rwork) noexcept nogil:
    # a is row-major Hermitian, i.e. the column-major conjugate; on exit its
    # rows hold the conjugated eigenvectors, so a = V^dagger
    cdef int n = <int>a.shape[0]
    cdef int lwork = <int>work.shape[0]
    cdef int info = 0
    cdef char jobz = b'V'
    cdef char uplo = b'U'
    zheev(&jobz, &uplo, &n, &a[0, 0], &n, &w[0], &work[0], &lwork, &rwork[0], &info)
    return info


cdef inline Py_ssize_t _lwork(Py_ssize_t n):
    return max(1, 33 * n)


def eigh(a):
    """Eigenvalues (ascending) and eigenvectors of a Hermitian matrix (LAPACK)."""
    cdef double complex[:, ::1] work_a = np.array(a, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t n = work_a.shape[0]
    w = np.empty(n, dtype=np.float64)
    cdef double[::1] wv = w
    cdef double complex[::1] work = np.empty(_lwork(n), dtype=np.complex128)
    cdef double[::1] rwork = np.empty(max(1, 3 * n - 2), dtype=np.float64)
    cdef int info
    with nogil:
        info = _lapack_eigh(work_a, wv, work, rwork)
    if info != 0:
        raise np.linalg.LinAlgError(f"zheev failed with info={info}")
    return w, np.asarray(work_a).conj().T.copy()


def jacobi_eigh(a):
    """Eigenvalues (ascending) and eigenvectors by cyclic complex Jacobi rotations."""
    cdef double complex[:, ::1] work = np.array(a, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t n = work.shape[0]
    w = np.empty(n, dtype=np.float64)
    v = np.empty((n, n), dtype=np.complex128)
    cdef double[::1] wv = w
    cdef double complex[:, ::1] vv = v
    with nogil:
        _jacobi(work, vv, wv)
        _sort_eig(wv, vv)
    return w, v


cdef int _expi(double complex[:, ::1] h, double s, double complex[:, ::1] out,
               double[::1] w, double complex[::1] work, double[::1] rwork) noexcept nogil:
    # out = V diag(exp(i w s)) V^dagger; h is overwritten with V^dagger
    cdef Py_ssize_t n = h.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double complex acc
    cdef int info = _lapack_eigh(h, w, work, rwork)
    if info != 0:
        return info
    # phases go into the first n slots of work; lwork >= n always
    for k in range(n):
        work[k] = cos(w[k] * s) + 1j * sin(w[k] * s)
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(n):
                acc = acc + h[k, i].conjugate() * work[k] * h[k, j]
            out[i, j] = acc
    return 0


def expi(h, double s):
    """exp(i h s) for Hermitian ``h``."""
    cdef double complex[:, ::1] work_h = np.array(h, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t n = work_h.shape[0]
    out = np.empty((n, n), dtype=np.complex128)
    cdef double complex[:, ::1] ov = out
    cdef double[::1] w = np.empty(n, dtype=np.float64)
    cdef double complex[::1] work = np.empty(_lwork(n), dtype=np.complex128)
    cdef double[::1] rwork = np.empty(max(1, 3 * n - 2), dtype=np.float64)
    cdef int info
    with nogil:
        info = _expi(work_h, s, ov, w, work, rwork)
    if info != 0:
        raise np.linalg.LinAlgError(f"zheev failed with info={info}")
    return out


cdef double _mean_error(double complex[:, ::1] u, double complex[:, ::1] meter,
                        double complex[:, ::1] observable, double complex[:, ::1] states,
                        double complex[::1] x, double complex[::1] y) noexcept nogil:
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t ns = states.shape[0]
    cdef Py_ssize_t i, j, m
    cdef double complex acc
    cdef double total = 0.0
    for m in range(ns):
        # x = U^dagger nu
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc = acc + u[j, i].conjugate() * states[m, j]
            x[i] = acc
        # y = M x
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc = acc + meter[i, j] * x[j]
            y[i] = acc
        # residual = U y - A nu
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc = acc + u[i, j] * y[j] - observable[i, j] * states[m, j]
            total += acc.real * acc.real + acc.imag * acc.imag
    return total / ns


cdef class _Objective:
    """Workspace for repeated evaluations of the mean squared error."""
    cdef double complex[:, :, ::1] basis
    cdef double complex[:, ::1] meter, observable, states
    cdef double time
    cdef double complex[:, ::1] h, scratch, u
    cdef double complex[::1] x, y, work
    cdef double[::1] w, rwork

    def __init__(self, basis, double time, meter, observable, states):
        self.basis = basis
        self.meter = meter
        self.observable = observable
        self.states = states
        self.time = time
        n = self.basis.shape[1]
        if self.meter.shape[0] != n or self.observable.shape[0] != n or self.states.shape[1] != n:
            raise ValueError("operator and state dimensions do not match the basis")
        self.h = np.zeros((n, n), dtype=np.complex128)
        self.scratch = np.empty((n, n), dtype=np.complex128)
        self.u = np.empty((n, n), dtype=np.complex128)
        self.x = np.empty(n, dtype=np.complex128)
        self.y = np.empty(n, dtype=np.complex128)
        self.w = np.empty(n, dtype=np.float64)
        self.work = np.empty(_lwork(n), dtype=np.complex128)
        self.rwork = np.empty(max(1, 3 * n - 2), dtype=np.float64)

    cdef void set_coeffs(self, double[::1] c) noexcept nogil:
        cdef Py_ssize_t n = self.h.shape[0]
        cdef Py_ssize_t i, j, k
        for i in range(n):
            for j in range(n):
                self.h[i, j] = 0.0
        for k in range(c.shape[0]):
            if c[k] != 0.0:
                self.add(k, c[k])

    cdef void add(self, Py_ssize_t k, double delta) noexcept nogil:
        cdef Py_ssize_t n = self.h.shape[0]
        cdef Py_ssize_t i, j
        for i in range(n):
            for j in range(n):
                self.h[i, j] = self.h[i, j] + delta * self.basis[k, i, j]

    cdef double value(self) noexcept nogil:
        # NaN signals a LAPACK failure
        self.scratch[:, :] = self.h
        if _expi(self.scratch, self.time, self.u, self.w, self.work, self.rwork) != 0:
            return 0.0 / 0.0
        return _mean_error(self.u, self.meter, self.observable, self.states, self.x, self.y)


def mean_error_sq(double[::1] coeffs, double complex[:, :, ::1] basis, double time,
                  double complex[:, ::1] meter, double complex[:, ::1] observable,
                  double complex[:, ::1] states):
    """Mean over ``states`` of ||(U M U^dagger - A) nu||^2 with U = exp(i H time)
    and H = sum_k coeffs[k] basis[k]."""
    if coeffs.shape[0] != basis.shape[0]:
        raise ValueError("coefficient count does not match basis")
    cdef _Objective obj = _Objective(basis, time, meter, observable, states)
    cdef double f
    with nogil:
        obj.set_coeffs(coeffs)
        f = obj.value()
    if f != f:
        raise np.linalg.LinAlgError("zheev failed")
    return f


def coordinate_search(x0, double complex[:, :, ::1] basis, double time,
                      double complex[:, ::1] meter, double complex[:, ::1] observable,
                      double complex[:, ::1] states, Py_ssize_t budget,
                      double initial_step, double min_step):
    """Derivative-free coordinate search with step halving.

    Each coordinate is tried at +step then -step; the first improvement is
    kept. A sweep without improvement halves the step. Stops when ``budget``
    evaluations are spent or the step drops below ``min_step``.
    Returns ``(best value, best coefficients, evaluations)``.
    """
    x_arr = np.array(x0, dtype=np.float64, copy=True)
    cdef double[::1] x = x_arr
    cdef Py_ssize_t nb = basis.shape[0]
    if x.shape[0] != nb:
        raise ValueError("coefficient count does not match basis")
    cdef _Objective obj = _Objective(basis, time, meter, observable, states)
    cdef Py_ssize_t evals = 1
    cdef Py_ssize_t i
    cdef int sign
    cdef bint improved
    cdef double f, fy, delta, step = initial_step
    with nogil:
        obj.set_coeffs(x)
        f = obj.value()
        while evals < budget and step > min_step:
            improved = False
            # rebuild from the coefficients so incremental updates cannot drift
            obj.set_coeffs(x)
            for i in range(nb):
                for sign in range(2):
                    if evals >= budget:
                        break
                    delta = step if sign == 0 else -step
                    obj.add(i, delta)
                    fy = obj.value()
                    evals += 1
                    if fy < f:
                        x[i] += delta
                        f = fy
                        improved = True
                        break
                    obj.add(i, -delta)
            if not improved:
                step *= 0.5
    return f, x_arr, evals


def jacobi_sweeps(a):
    """Number of Jacobi sweeps needed for ``a`` (diagnostics and benchmarks)."""
    cdef double complex[:, ::1] work = np.array(a, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t n = work.shape[0]
    cdef double complex[:, ::1] v = np.empty((n, n), dtype=np.complex128)
    cdef double[::1] w = np.empty(n, dtype=np.float64)
    return _jacobi(work, v, w)
