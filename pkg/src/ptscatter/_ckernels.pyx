# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; mirrors ``_pykernels`` signature for signature."""

from libc.math cimport cos, sinh, sqrt, hypot, fabs, M_PI, NAN

import numpy as np

cdef extern from "complex.h" nogil:
    double complex csqrt(double complex)
    double complex ctan(double complex)
    double complex cexp(double complex)
    double cabs(double complex)
    double complex conj(double complex)
    double creal(double complex)
    double cimag(double complex)

cdef enum:
    C_OK = 0
    C_NONPOSITIVE = 1
    C_DEGENERATE = 2
    C_SINGULAR = 3
    C_OUT_OF_RANGE = 4
    C_SPEC_UNCOUPLED = 0
    C_SPEC_CASE2 = 1
    C_SPEC_CASE3_LEFT = 2
    C_SPEC_CASE3_RIGHT = 3

OK = C_OK
NONPOSITIVE = C_NONPOSITIVE
DEGENERATE = C_DEGENERATE
SINGULAR = C_SINGULAR
OUT_OF_RANGE = C_OUT_OF_RANGE

ROW_FIELDS = (
    "R_L", "R_R", "T", "pseudo_residual", "ssb_measure",
    "re_l1", "im_l1", "re_l2", "im_l2", "re_l3", "im_l3", "re_l4", "im_l4",
)

SPEC_UNCOUPLED = C_SPEC_UNCOUPLED
SPEC_CASE2 = C_SPEC_CASE2
SPEC_CASE3_LEFT = C_SPEC_CASE3_LEFT
SPEC_CASE3_RIGHT = C_SPEC_CASE3_RIGHT

cdef double complex J = 1j


cdef int _half_slab(double complex k0, double complex k1, double half,
                    double complex *r, double complex *t) noexcept nogil:
    cdef double complex lam = k1 * half
    cdef double complex w = k0 / k1
    cdef double complex wb = conj(w)
    cdef double complex o1 = k1 / conj(k1)
    cdef double complex tn = ctan(lam)
    cdef double complex tb = conj(tn)
    cdef double complex nl, dl
    cdef double cc, x, y
    nl = (J * o1 * tn + wb) * (1 - J * wb * tb) + (J * tb - wb) * (1 + J * w * tn)
    dl = (1 - J * w * tn) * (wb - J * tb) + (wb - J * o1 * tn) * (1 - J * wb * tb)
    if not (cabs(dl) >= 1e-300):
        return 0
    r[0] = nl / dl
    x = creal(lam)
    y = fabs(cimag(lam))
    if y > 354.0:
        t[0] = 0
        return 1
    cc = cos(x) * cos(x) + sinh(y) * sinh(y)
    t[0] = 2 * wb / (dl * cc)
    return 1


cdef int _amplitudes(double energy, double v_real, double v_imag, double length_nm,
                     double hbar2_2m, double max_imag_lambda, double degenerate_tol,
                     double complex *rl, double complex *rr, double complex *t) noexcept nogil:
    cdef double dr, di, half
    cdef double complex k0, k1, tdummy
    if not energy > 0:
        return C_NONPOSITIVE
    dr = energy - v_real
    di = -v_imag + 0.0
    if hypot(dr, di) < degenerate_tol:
        return C_DEGENERATE
    k0 = sqrt(energy / hbar2_2m)
    k1 = csqrt((dr + J * di) / hbar2_2m)
    if cabs(k1) * length_nm < 1e-12:
        return C_DEGENERATE
    half = 0.5 * length_nm
    if fabs(cimag(k1) * half) > max_imag_lambda:
        return C_OUT_OF_RANGE
    if not _half_slab(k0, k1, half, rl, t):
        return C_SINGULAR
    if not _half_slab(k0, conj(k1), half, rr, &tdummy):
        return C_SINGULAR
    return C_OK


def amplitudes(double energy, double v_real, double v_imag, double length_nm,
               double hbar2_2m, double max_imag_lambda, double degenerate_tol):
    cdef double complex rl = 0, rr = 0, t = 0
    cdef int status = _amplitudes(energy, v_real, v_imag, length_nm, hbar2_2m,
                                  max_imag_lambda, degenerate_tol, &rl, &rr, &t)
    if status != C_OK:
        return status, 0j, 0j, 0j
    return status, rl, rr, t


cdef void _quadratic(double complex b, double complex c, double complex disc,
                     double complex *plus, double complex *minus) noexcept nogil:
    cdef double complex s = csqrt(disc)
    cdef double complex p = b + s
    cdef double complex m = b - s
    if cabs(p) >= cabs(m):
        plus[0] = 0.5 * p
        minus[0] = c / plus[0] if plus[0] != 0 else 0.5 * m
    else:
        minus[0] = 0.5 * m
        plus[0] = c / minus[0] if minus[0] != 0 else 0.5 * p


cdef void _eigen(double complex rl, double complex rr, double complex t, int spectrum,
                 double complex *lam) noexcept nogil:
    cdef double complex tt = 4 * t * t
    cdef double complex c
    _quadratic(rr + rl, rr * rl - t * t, (rr - rl) * (rr - rl) + tt, &lam[0], &lam[1])
    if spectrum == C_SPEC_UNCOUPLED:
        lam[2] = lam[0]
        lam[3] = lam[1]
    elif spectrum == C_SPEC_CASE2:
        lam[2] = -lam[1]
        lam[3] = -lam[0]
    else:
        c = -(rr * rl + t * t)
        if spectrum == C_SPEC_CASE3_LEFT:
            _quadratic(rr - rl, c, (rr + rl) * (rr + rl) + tt, &lam[2], &lam[3])
        else:
            _quadratic(rl - rr, c, (rr + rl) * (rr + rl) + tt, &lam[2], &lam[3])


def eigen_pairs(double complex r_left, double complex r_right, double complex t, int spectrum):
    cdef double complex lam[4]
    _eigen(r_left, r_right, t, spectrum, lam)
    return lam[0], lam[1], lam[2], lam[3]


def sweep_rows(energies, double v_real, double v_imag, double length_nm, double hbar2_2m,
               double max_imag_lambda, double degenerate_tol, int spectrum):
    cdef double[::1] e = np.ascontiguousarray(energies, dtype=np.float64)
    cdef Py_ssize_t n = e.shape[0]
    status_arr = np.zeros(n, dtype=np.int8)
    rows_arr = np.empty((n, 13), dtype=np.float64)
    cdef signed char[::1] status = status_arr
    cdef double[:, ::1] rows = rows_arr
    cdef Py_ssize_t i, j
    cdef int st
    cdef double complex rl, rr, t
    cdef double complex lam[4]
    cdef double RL, RR, T
    with nogil:
        for i in range(n):
            st = _amplitudes(e[i], v_real, v_imag, length_nm, hbar2_2m,
                             max_imag_lambda, degenerate_tol, &rl, &rr, &t)
            status[i] = st
            if st != C_OK:
                for j in range(13):
                    rows[i, j] = NAN
                continue
            RL = creal(rl) * creal(rl) + cimag(rl) * cimag(rl)
            RR = creal(rr) * creal(rr) + cimag(rr) * cimag(rr)
            T = creal(t) * creal(t) + cimag(t) * cimag(t)
            rows[i, 0] = RL
            rows[i, 1] = RR
            rows[i, 2] = T
            rows[i, 3] = fabs(fabs(1.0 - T) - cabs(rl) * cabs(rr))
            rows[i, 4] = 0.5 * (RL + RR) - T
            _eigen(rl, rr, t, spectrum, lam)
            for j in range(4):
                rows[i, 5 + 2 * j] = creal(lam[j])
                rows[i, 6 + 2 * j] = cimag(lam[j])
    return status_arr, rows_arr


def quartic_roots(double complex c3, double complex c2, double complex c1, double complex c0,
                  double tol, int max_iter):
    cdef double radius = 1.0 + max(cabs(c3), cabs(c2), cabs(c1), cabs(c0))
    cdef double complex z[4]
    cdef double complex nz[4]
    cdef double complex x, p, den, step
    cdef double worst
    cdef int i, j, k, it
    for k in range(4):
        z[k] = radius * cexp(J * (0.4 + 0.5 * M_PI * k))
    for it in range(1, max_iter + 1):
        worst = 0.0
        for i in range(4):
            x = z[i]
            p = (((x + c3) * x + c2) * x + c1) * x + c0
            den = 1.0
            for j in range(4):
                if j != i:
                    den = den * (x - z[j])
            step = p / den if den != 0 else 0
            nz[i] = x - step
            worst = max(worst, cabs(step) / (1.0 + cabs(x)))
        for i in range(4):
            z[i] = nz[i]
        if worst <= tol:
            return (z[0], z[1], z[2], z[3]), it, True
    return (z[0], z[1], z[2], z[3]), max_iter, False
