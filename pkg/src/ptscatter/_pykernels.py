"""Pure-Python hot kernels (fallback backend).

Every function here has a twin with the same signature in ``_ckernels.pyx``.
Work is done one energy at a time with scalar ``cmath`` calls, so a value never
depends on how a grid was chunked across workers.
"""

import cmath
import math

import numpy as np

OK = 0
NONPOSITIVE = 1
DEGENERATE = 2
SINGULAR = 3
OUT_OF_RANGE = 4

#: Columns of the array returned by :func:`sweep_rows`.
ROW_FIELDS = (
    "R_L", "R_R", "T", "pseudo_residual", "ssb_measure",
    "re_l1", "im_l1", "re_l2", "im_l2", "re_l3", "im_l3", "re_l4", "im_l4",
)

# spectrum codes shared with the Cython module
SPEC_UNCOUPLED = 0
SPEC_CASE2 = 1
SPEC_CASE3_LEFT = 2
SPEC_CASE3_RIGHT = 3


def _half_slab(k0, k1, half):
    # numerator and denominator scaled by |cos(lam)|^2 so large |Im lam| cannot overflow;
    # t = 2 conj(k0/k1) / D is the cancellation-free transmission
    lam = k1 * half
    w = k0 / k1
    wb = w.conjugate()
    o1 = k1 / k1.conjugate()
    tn = cmath.tan(lam)
    tb = tn.conjugate()
    nl = (1j * o1 * tn + wb) * (1 - 1j * wb * tb) + (1j * tb - wb) * (1 + 1j * w * tn)
    dl = (1 - 1j * w * tn) * (wb - 1j * tb) + (wb - 1j * o1 * tn) * (1 - 1j * wb * tb)
    if not abs(dl) >= 1e-300:
        return None
    y = abs(lam.imag)
    if y > 354.0:
        # |cos(lam)|^2 overflows; |t| ~ exp(-2|Im lam|) is below the double range
        return nl / dl, 0j
    cc = math.cos(lam.real) ** 2 + math.sinh(y) ** 2
    return nl / dl, 2 * wb / (dl * cc)


def amplitudes(energy, v_real, v_imag, length_nm, hbar2_2m, max_imag_lambda, degenerate_tol):
    """Return ``(status, r_left, r_right, t)`` for the two-slab PT bilayer."""
    if not energy > 0:
        return NONPOSITIVE, 0j, 0j, 0j
    dr = energy - v_real
    di = -v_imag + 0.0  # drop a negative zero so the branch cut stays on Im > 0
    if math.hypot(dr, di) < degenerate_tol:
        return DEGENERATE, 0j, 0j, 0j
    k0 = complex(math.sqrt(energy / hbar2_2m), 0.0)
    k1 = cmath.sqrt(complex(dr, di) / hbar2_2m)
    if abs(k1) * length_nm < 1e-12:
        return DEGENERATE, 0j, 0j, 0j
    half = 0.5 * length_nm
    if abs(k1.imag * half) > max_imag_lambda:
        return OUT_OF_RANGE, 0j, 0j, 0j
    left = _half_slab(k0, k1, half)
    right = _half_slab(k0, k1.conjugate(), half)
    if left is None or right is None:
        return SINGULAR, 0j, 0j, 0j
    return OK, left[0], right[0], left[1]


def _quadratic(b, c, disc):
    # roots of x^2 - b x + c with disc = b^2 - 4c supplied in its accurate form;
    # the smaller root comes from c / larger to avoid cancellation
    s = cmath.sqrt(disc)
    p = b + s
    m = b - s
    if abs(p) >= abs(m):
        plus = 0.5 * p
        minus = c / plus if plus != 0 else 0.5 * m
    else:
        minus = 0.5 * m
        plus = c / minus if minus != 0 else 0.5 * p
    return plus, minus


def eigen_pairs(r_left, r_right, t, spectrum):
    """Analytic eigenvalues ``(l1, l2, l3, l4)``; (l1, l2) and (l3, l4) are the pairs."""
    tt = 4 * t * t
    l1, l2 = _quadratic(r_right + r_left, r_right * r_left - t * t, (r_right - r_left) ** 2 + tt)
    if spectrum == SPEC_UNCOUPLED:
        return l1, l2, l1, l2
    if spectrum == SPEC_CASE2:
        # second factor is x^2 + b x + c: roots (-b + s)/2 = -l2 and (-b - s)/2 = -l1
        return l1, l2, -l2, -l1
    c = -(r_right * r_left + t * t)
    disc = (r_right + r_left) ** 2 + tt
    if spectrum == SPEC_CASE3_LEFT:
        l3, l4 = _quadratic(r_right - r_left, c, disc)
    else:
        l3, l4 = _quadratic(r_left - r_right, c, disc)
    return l1, l2, l3, l4


def _row(status_and_amps, spectrum, out):
    status, rl, rr, t = status_and_amps
    if status != OK:
        out[:] = np.nan
        return status
    RL = rl.real * rl.real + rl.imag * rl.imag
    RR = rr.real * rr.real + rr.imag * rr.imag
    T = t.real * t.real + t.imag * t.imag
    out[0] = RL
    out[1] = RR
    out[2] = T
    out[3] = abs(abs(1.0 - T) - abs(rl) * abs(rr))
    out[4] = 0.5 * (RL + RR) - T
    for i, lam in enumerate(eigen_pairs(rl, rr, t, spectrum)):
        out[5 + 2 * i] = lam.real
        out[6 + 2 * i] = lam.imag
    return OK


def sweep_rows(energies, v_real, v_imag, length_nm, hbar2_2m, max_imag_lambda, degenerate_tol, spectrum):
    """Evaluate every per-energy quantity of a sweep.

    Returns ``(status, rows)`` with ``status`` an int8 array and ``rows`` a
    float array laid out as :data:`ROW_FIELDS`; failed points hold NaN.
    """
    energies = np.ascontiguousarray(energies, dtype=np.float64)
    n = energies.shape[0]
    status = np.zeros(n, dtype=np.int8)
    rows = np.empty((n, len(ROW_FIELDS)), dtype=np.float64)
    for i in range(n):
        amps = amplitudes(float(energies[i]), v_real, v_imag, length_nm, hbar2_2m,
                          max_imag_lambda, degenerate_tol)
        status[i] = _row(amps, spectrum, rows[i])
    return status, rows


def quartic_roots(c3, c2, c1, c0, tol, max_iter):
    """Durand-Kerner on the monic quartic x^4 + c3 x^3 + c2 x^2 + c1 x + c0.

    Returns ``(roots, iterations, converged)``. Start points sit on a circle of
    radius ``1 + max|c|``, rotated off the axes.
    """
    radius = 1.0 + max(abs(c3), abs(c2), abs(c1), abs(c0))
    z = [radius * cmath.exp(1j * (0.4 + 0.5 * math.pi * k)) for k in range(4)]
    for it in range(1, max_iter + 1):
        new = []
        worst = 0.0
        for i in range(4):
            x = z[i]
            p = (((x + c3) * x + c2) * x + c1) * x + c0
            den = 1.0 + 0j
            for j in range(4):
                if j != i:
                    den *= x - z[j]
            step = p / den if den != 0 else 0j
            new.append(x - step)
            worst = max(worst, abs(step) / (1.0 + abs(x)))
        z = new
        if worst <= tol:
            return tuple(z), it, True
    return tuple(z), max_iter, False
