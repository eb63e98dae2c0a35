"""Spinless scattering amplitudes of the PT-symmetric gain/loss bilayer.

Region M is two slabs of width L/2. The left slab carries ``V_R + i V_I`` and
the right slab its conjugate. Amplitudes are referenced to the outer edges of
M, so with ``V = 0`` the transmission is ``exp(i k0 L)``.

Two independent evaluation paths are provided:

* :func:`amplitudes_closed_form`, the closed-form expressions in Lambda,
  Omega0 and Omega1;
* :func:`amplitudes_oracle`, a plain 2x2 transfer-matrix product over an
  arbitrary piecewise-constant :class:`LayerStack`.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .constants import (
    DEGENERATE_ENERGY_TOL,
    HBAR2_2ME,
    MAX_IMAG_LAMBDA,
    MAX_IMAG_LAMBDA_VERBATIM,
    NM_PER_UM,
)
from .errors import DegenerateEnergy, InputError, NonPositiveEnergy, SingularDenominator

#: The gain (+i V_I) half of M sits on the left; fixed by :func:`calibrate_orientation`.
GAIN_ON_LEFT = True


@dataclass(frozen=True)
class PhysParams:
    """Physical scene.

    Parameters
    ----------
    v_real, v_imag : float
        Real and imaginary parts of the slab potential in eV. ``v_imag >= 0``;
        the partner slab carries ``-v_imag``.
    length : float
        Total width of region M in micrometres.
    mass_ratio : float
        Particle mass in units of the free-electron mass.
    e0 : float
        Reference energy scale in eV used for dimensionless output.
    """

    v_real: float
    v_imag: float
    length: float
    mass_ratio: float = 1.0
    e0: float = 1.0

    def __post_init__(self):
        for name in ("v_real", "v_imag", "length", "mass_ratio", "e0"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
                raise InputError(f"{name} must be a finite real number, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.v_imag < 0:
            raise InputError("v_imag must be >= 0; the partner slab carries -v_imag")
        if self.length <= 0:
            raise InputError("length must be > 0")
        if self.mass_ratio <= 0:
            raise InputError("mass_ratio must be > 0")
        if self.e0 <= 0:
            raise InputError("e0 must be > 0")

    @property
    def length_nm(self):
        return self.length * NM_PER_UM

    @property
    def hbar2_2m(self):
        """hbar^2 / 2m in eV nm^2 for this particle."""
        return HBAR2_2ME / self.mass_ratio

    @property
    def potential(self):
        """Complex potential of the gain slab in eV."""
        return complex(self.v_real, self.v_imag)


#: Scene of the published figures (E0 = 1 eV, free-electron mass).
PAPER_PARAMS = PhysParams(v_real=0.3, v_imag=0.005, length=0.5, mass_ratio=1.0, e0=1.0)


@dataclass(frozen=True)
class Wavenumbers:
    k0: complex
    k1: complex
    lambda_half: complex
    omega0: complex
    omega1: complex


@dataclass(frozen=True)
class Amplitudes:
    """Scattering amplitudes at one energy and their squared moduli."""

    r_left: complex
    r_right: complex
    t: complex
    refl_left: float
    refl_right: float
    trans: float

    @classmethod
    def from_complex(cls, r_left, r_right, t):
        r_left, r_right, t = complex(r_left), complex(r_right), complex(t)
        return cls(r_left, r_right, t, _abs2(r_left), _abs2(r_right), _abs2(t))

    def as_tuple(self):
        return self.r_left, self.r_right, self.t

    @property
    def pseudo_residual(self):
        """``| |1 - T| - sqrt(R_L R_R) |``, zero for a PT-symmetric scatterer."""
        return abs(abs(1.0 - self.trans) - abs(self.r_left) * abs(self.r_right))

    def deviation(self, other):
        """Largest componentwise ``|a - b| / max(1, |b|)`` against ``other``."""
        return max(
            abs(a - b) / max(1.0, abs(b))
            for a, b in zip(self.as_tuple(), other.as_tuple())
        )


def _abs2(z):
    return z.real * z.real + z.imag * z.imag


@dataclass(frozen=True)
class LayerStack:
    """Piecewise-constant potential between two field-free leads.

    Parameters
    ----------
    slabs : tuple of (complex, float)
        ``(potential_eV, width_nm)`` from left to right.
    hbar2_2m : float
        hbar^2 / 2m in eV nm^2; fixes the lead and slab wavenumbers at each energy.
    """

    slabs: tuple = field(default_factory=tuple)
    hbar2_2m: float = HBAR2_2ME

    def __post_init__(self):
        slabs = tuple((complex(v), float(w)) for v, w in self.slabs)
        for _, w in slabs:
            if not w > 0:
                raise InputError("every slab width must be > 0")
        object.__setattr__(self, "slabs", slabs)

    def reversed(self):
        return LayerStack(tuple(reversed(self.slabs)), self.hbar2_2m)

    @property
    def width_nm(self):
        return sum(w for _, w in self.slabs)


def pt_stack(p, gain_on_left=GAIN_ON_LEFT):
    """Two-slab stack of region M for ``p``."""
    v = p.potential
    half = 0.5 * p.length_nm
    pair = ((v, half), (v.conjugate(), half))
    if not gain_on_left:
        pair = pair[::-1]
    return LayerStack(pair, p.hbar2_2m)


def _branch_sqrt(radicand):
    # principal branch; a -0.0 imaginary part would flip the cut to Im < 0
    return cmath.sqrt(complex(radicand.real, radicand.imag + 0.0))


def wavenumbers(energy, p):
    """Lead and slab wavenumbers (nm^-1) and the derived dimensionless ratios.

    Raises
    ------
    NonPositiveEnergy
        If ``energy <= 0``.
    DegenerateEnergy
        If ``energy`` sits on the potential, where ``k1 -> 0``.
    """
    if not energy > 0:
        raise NonPositiveEnergy(f"energy must be > 0, got {energy!r}")
    if math.hypot(energy - p.v_real, p.v_imag) < DEGENERATE_ENERGY_TOL:
        raise DegenerateEnergy(f"E = {energy!r} eV coincides with the potential")
    k0 = complex(math.sqrt(energy / p.hbar2_2m), 0.0)
    k1 = _branch_sqrt(complex(energy - p.v_real, -p.v_imag) / p.hbar2_2m)
    if abs(k1) * p.length_nm < 1e-12:
        raise DegenerateEnergy(f"|k1| L < 1e-12 at E = {energy!r} eV")
    return Wavenumbers(
        k0=k0,
        k1=k1,
        lambda_half=0.5 * k1 * p.length_nm,
        omega0=k0 / k1,
        omega1=k1 / k1.conjugate(),
    )


_STATUS_ERRORS = {
    1: NonPositiveEnergy,
    2: DegenerateEnergy,
    3: SingularDenominator,
    4: SingularDenominator,
}


def raise_for_status(status, energy):
    """Raise the exception matching a kernel status code (0 is success)."""
    if status:
        detail = {
            1: "energy must be > 0",
            2: "energy coincides with the potential",
            3: "closed-form denominator vanishes",
            4: "|Im Lambda| beyond the representable range",
        }[int(status)]
        raise _STATUS_ERRORS[int(status)](f"E = {energy!r} eV: {detail}")


def _verbatim(w, lam):
    # unscaled cos/sin expressions; N_T carries r_L
    wc = w.conjugate()
    o1 = w.conjugate() / w  # k1 / k1* written through Omega0
    c, s = cmath.cos(lam), cmath.sin(lam)
    cb, sb = c.conjugate(), s.conjugate()
    n_l = (1j * o1 * s + wc * c) * (cb - 1j * wc * sb) + (1j * sb - wc * cb) * (c + 1j * w * s)
    d_l = (c - 1j * w * s) * (wc * cb - 1j * sb) + (wc * c - 1j * o1 * s) * (cb - 1j * wc * sb)
    if not abs(d_l) >= 1e-300:
        return None
    r = n_l / d_l
    n_t = (c - 1j * w * s) * r + c + 1j * w * s
    d_t = cb - 1j * wc * sb
    if not abs(d_t) >= 1e-300:
        return None
    return r, n_t / d_t


def amplitudes_closed_form(energy, p, form="scaled"):
    """Closed-form amplitudes of region M.

    Parameters
    ----------
    energy : float
        Incident energy in eV.
    p : PhysParams
    form : {"scaled", "verbatim"}
        ``"scaled"`` divides numerator and denominator by ``|cos Lambda|^2`` and
        uses ``t = 2 conj(Omega0) / D_L``; it is accurate for any ``|Im Lambda|``
        up to :data:`MAX_IMAG_LAMBDA`. ``"verbatim"`` evaluates the raw cos/sin
        expressions including the ``N_T / D_T`` transmission, which loses
        roughly ``exp(2 |Im Lambda|)`` ulps and is capped at ``|Im Lambda| <= 20``.

    Returns
    -------
    Amplitudes

    Raises
    ------
    NonPositiveEnergy, DegenerateEnergy, SingularDenominator
    """
    if form == "scaled":
        status, rl, rr, t = _backend.kernels().amplitudes(
            float(energy), p.v_real, p.v_imag, p.length_nm, p.hbar2_2m,
            MAX_IMAG_LAMBDA, DEGENERATE_ENERGY_TOL,
        )
        raise_for_status(status, energy)
        return Amplitudes.from_complex(rl, rr, t)
    if form != "verbatim":
        raise ValueError(f"unknown form {form!r}")
    wn = wavenumbers(energy, p)
    if abs(wn.lambda_half.imag) > MAX_IMAG_LAMBDA_VERBATIM:
        raise SingularDenominator(f"|Im Lambda| = {abs(wn.lambda_half.imag):.3g} > {MAX_IMAG_LAMBDA_VERBATIM}")
    left = _verbatim(wn.omega0, wn.lambda_half)
    # k1 -> k1* maps Omega0 -> conj-partner and Lambda -> Lambda*
    right = _verbatim(wn.k0 / wn.k1.conjugate(), wn.lambda_half.conjugate())
    if left is None or right is None:
        raise SingularDenominator(f"closed-form denominator vanishes at E = {energy!r} eV")
    return Amplitudes.from_complex(left[0], right[0], left[1])


def _interface(ka, kb):
    q = ka / kb
    return 0.5 * np.array([[1 + q, 1 - q], [1 - q, 1 + q]], dtype=complex)


def transfer_matrix(energy, stack):
    """Total 2x2 transfer matrix from the left edge to the right edge of ``stack``.

    It maps ``(A, B)`` of ``A e^{ik0 z} + B e^{-ik0 z}`` in the left lead,
    referenced at the left edge, to the same pair in the right lead referenced
    at the right edge.
    """
    if not energy > 0:
        raise NonPositiveEnergy(f"energy must be > 0, got {energy!r}")
    h = stack.hbar2_2m
    k0 = complex(math.sqrt(energy / h), 0.0)
    m = np.eye(2, dtype=complex)
    k_prev = k0
    for v, width in stack.slabs:
        if abs(energy - v) < DEGENERATE_ENERGY_TOL:
            raise DegenerateEnergy(f"E = {energy!r} eV coincides with slab potential {v}")
        k = _branch_sqrt((energy - v) / h)
        if abs(k) * width < 1e-12:
            raise DegenerateEnergy(f"|k| d < 1e-12 in slab with potential {v}")
        phase = cmath.exp(1j * k * width)
        m = _interface(k_prev, k) @ m
        m = np.array([[phase, 0], [0, 1 / phase]], dtype=complex) @ m
        k_prev = k
    return _interface(k_prev, k0) @ m


def amplitudes_oracle(energy, stack):
    """Amplitudes of ``stack`` from the transfer-matrix product.

    ``r_L = -M21/M22``, ``r_R = M12/M22`` and ``t = 1/M22`` (``det M = 1``).
    """
    m = transfer_matrix(energy, stack)
    m22 = m[1, 1]
    if not abs(m22) >= 1e-300 or not np.all(np.isfinite(m)):
        raise SingularDenominator(f"transfer matrix is singular at E = {energy!r} eV")
    return Amplitudes.from_complex(-m[1, 0] / m22, m[0, 1] / m22, 1 / m22)


def calibrate_orientation(energy, p):
    """Decide which slab must carry the gain for the oracle to reproduce the closed form.

    Returns ``True`` when the gain-on-left stack matches the closed-form
    ``r_L`` at least as well as the gain-on-right stack.
    """
    closed = amplitudes_closed_form(energy, p)
    left = amplitudes_oracle(energy, pt_stack(p, gain_on_left=True))
    right = amplitudes_oracle(energy, pt_stack(p, gain_on_left=False))
    return abs(left.r_left - closed.r_left) <= abs(right.r_left - closed.r_left)


def swap_symmetry_check(energy, p):
    """Residual of the ``k1 -> k1*`` substitution rule, checked with the oracle.

    Reversing the slab order is the same as conjugating k1, so the left
    reflection of the reversed stack must equal the right reflection of the
    original, and the transmissions must coincide.
    """
    stack = pt_stack(p)
    forward = amplitudes_oracle(energy, stack)
    swapped = amplitudes_oracle(energy, stack.reversed())
    return max(
        abs(swapped.r_left - forward.r_right) / max(1.0, abs(forward.r_right)),
        abs(swapped.t - forward.t) / max(1.0, abs(forward.t)),
    )


def evaluate_grid(energies, p, spectrum=0):
    """Per-energy quantities on a grid through the active kernel backend.

    Returns ``(status, rows)``; see ``_pykernels.ROW_FIELDS`` for the columns.
    """
    return _backend.kernels().sweep_rows(
        np.asarray(energies, dtype=np.float64), p.v_real, p.v_imag, p.length_nm,
        p.hbar2_2m, MAX_IMAG_LAMBDA, DEGENERATE_ENERGY_TOL, int(spectrum),
    )
