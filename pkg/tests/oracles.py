"""Independent reference implementations used only by the tests."""

import mpmath as mp

H = mp.mpf("0.0380998")


def mp_amplitudes(energy, v_real, v_imag, length_um, mass_ratio=1, dps=None):
    """(r_L, r_R, t) of the gain-left PT bilayer by an mpmath transfer-matrix product.

    Amplitudes are referenced to the outer edges of the bilayer.
    """
    half = mp.mpf(length_um) * 500
    h = H / mp.mpf(mass_ratio)
    with mp.workdps(30):
        k1_est = abs(mp.im(mp.sqrt((mp.mpf(energy) - mp.mpc(v_real, v_imag)) / h)))
    # the transfer matrix grows like exp(2 |Im k1| d); carry enough digits to cancel it
    prec = dps or int(30 + 1.74 * float(k1_est * half))
    with mp.workdps(max(prec, 30) + 10):
        e = mp.mpf(energy)
        k0 = mp.sqrt(e / h)
        slabs = [(mp.mpc(v_real, v_imag), half), (mp.mpc(v_real, -v_imag), half)]
        m = mp.eye(2)
        k_prev = k0
        for v, d in slabs:
            k = mp.sqrt((e - v) / h)
            m = _interface(k_prev, k) * m
            m = mp.matrix([[mp.exp(1j * k * d), 0], [0, mp.exp(-1j * k * d)]]) * m
            k_prev = k
        m = _interface(k_prev, k0) * m
        m22 = m[1, 1]
        return complex(-m[1, 0] / m22), complex(m[0, 1] / m22), complex(1 / m22)


def _interface(ka, kb):
    q = ka / kb
    return mp.matrix([[1 + q, 1 - q], [1 - q, 1 + q]]) / 2


def mp_ssb_measure(energy, v_real, v_imag, length_um, mass_ratio=1):
    rl, rr, t = mp_amplitudes(energy, v_real, v_imag, length_um, mass_ratio)
    return (abs(rl) ** 2 + abs(rr) ** 2) / 2 - abs(t) ** 2
