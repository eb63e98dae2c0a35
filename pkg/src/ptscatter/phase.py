"""PT-phase classification, SSB measure, critical energies, ATRs and SSB manifolds."""

import enum
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from . import scattering
from .constants import CRITICAL_ENERGY_BAND, PAPER_CRITICAL_ENERGY
from .errors import AmbiguousSide, Indeterminate, InputError, NoCrossing, PTScatterError
from .scattering import PAPER_PARAMS, amplitudes_closed_form
from .spinflip import DeviceConfig, eigenvalues_analytic, spectrum_class

log = logging.getLogger(__name__)

TOL_UNI = 1e-6
TOL_SSB = 1e-9
BISECT_XTOL = 1e-13  # eV; well inside the 1e-10 eV requirement
ATR_TANGENT_TOL = 1e-10


class PairPhase(enum.Enum):
    SYMMETRIC = "Symmetric"
    BROKEN = "Broken"  # moduli (s, 1/s)
    NONRECIPROCAL = "Nonreciprocal"  # neither unimodular nor reciprocal


class Phase(enum.Enum):
    SYMMETRIC = "Symmetric"
    BROKEN = "Broken"
    MIXED = "Mixed"


@dataclass(frozen=True)
class PhaseLabel:
    pairs: tuple
    overall: Phase

    def __str__(self):
        return self.overall.value


def _pair_phase(a, b, tol_uni, strict):
    ma, mb = abs(a), abs(b)
    uni = max(abs(ma - 1.0), abs(mb - 1.0))
    if uni <= tol_uni:
        return PairPhase.SYMMETRIC
    if uni <= 10 * tol_uni:
        raise Indeterminate(f"pair moduli {ma!r}, {mb!r} sit at the unimodular threshold", (a, b))
    rec = abs(math.log10(ma) + math.log10(mb)) if ma > 0 and mb > 0 else math.inf
    if rec <= tol_uni:
        return PairPhase.BROKEN
    if rec <= 10 * tol_uni:
        raise Indeterminate(f"pair moduli {ma!r}, {mb!r} sit at the reciprocity threshold", (a, b))
    if strict:
        raise Indeterminate(f"pair moduli {ma!r}, {mb!r} are neither unimodular nor reciprocal", (a, b))
    return PairPhase.NONRECIPROCAL


def classify_values(values, pairing=((0, 1), (2, 3)), tol_uni=TOL_UNI, strict=False):
    """Phase label of raw eigenvalues grouped by ``pairing``; see :func:`classify_phase`."""
    pairs = tuple(_pair_phase(values[i], values[j], tol_uni, strict) for i, j in pairing)
    symmetric = sum(p is PairPhase.SYMMETRIC for p in pairs)
    if symmetric == len(pairs):
        overall = Phase.SYMMETRIC
    elif symmetric:
        overall = Phase.MIXED
    else:
        overall = Phase.BROKEN
    return PhaseLabel(pairs, overall)


def classify_phase(q, tol_uni=TOL_UNI, strict=False):
    """Label each eigenvalue pair and the spectrum as a whole.

    A pair is symmetric when both moduli are within ``tol_uni`` of 1 and
    broken when ``|log10|a| + log10|b|| <= tol_uni``. The spectrum is mixed
    when a symmetric pair coexists with a non-symmetric one.

    Parameters
    ----------
    q : EigenQuartet
    tol_uni : float
    strict : bool
        If true, a pair that is neither unimodular nor reciprocal raises
        :class:`Indeterminate`; otherwise it is labelled ``NONRECIPROCAL`` and
        counts as non-symmetric.

    Raises
    ------
    Indeterminate
        If a pair falls between a criterion and ten times its tolerance.
    """
    return classify_values(q.values, q.pairing, tol_uni, strict)


@dataclass(frozen=True)
class SSBRecord:
    energy: float
    measure: float
    side: str  # "symmetric", "critical" or "broken"


def _side(measure, tol_ssb):
    if abs(measure - 1.0) <= tol_ssb:
        return "critical"
    return "symmetric" if measure < 1.0 else "broken"


def ssb_measure(energy, p, tol_ssb=TOL_SSB):
    """``(R_L + R_R)/2 - T`` at ``energy`` and the side of the SSB point it lies on."""
    a = amplitudes_closed_form(energy, p)
    m = 0.5 * (a.refl_left + a.refl_right) - a.trans
    return SSBRecord(float(energy), m, _side(m, tol_ssb))


def _measure_minus_one(p):
    def f(e):
        a = amplitudes_closed_form(e, p)
        return 0.5 * (a.refl_left + a.refl_right) - a.trans - 1.0
    return f


def _default_range(p):
    return (p.v_real + 0.01 * p.e0, 2.0 * p.e0)


def _grid(p, e_range, grid_n, column):
    if grid_n < 2:
        raise InputError("grid_n must be >= 2")
    lo, hi = e_range if e_range is not None else _default_range(p)
    if not 0 < lo < hi:
        raise InputError(f"invalid energy range ({lo}, {hi})")
    energies = np.linspace(lo, hi, int(grid_n))
    status, rows = scattering.evaluate_grid(energies, p)
    return energies, rows[:, column], status


def _brackets(energies, values):
    # consecutive finite samples with a strict sign change, or an exact zero
    out = []
    for i in range(len(energies) - 1):
        a, b = values[i], values[i + 1]
        if not (math.isfinite(a) and math.isfinite(b)):
            continue
        if a == 0.0:
            out.append((energies[i], energies[i]))
        elif a * b < 0:
            out.append((energies[i], energies[i + 1]))
    if len(values) and values[-1] == 0.0:
        out.append((energies[-1], energies[-1]))
    return out


def _bisect(f, a, b):
    if a == b:
        return a
    return optimize.bisect(f, a, b, xtol=BISECT_XTOL, maxiter=200)


def find_critical_energy(p, e_range=None, grid_n=4000, tol_ssb=TOL_SSB):
    """Every energy where the SSB measure crosses 1, ascending.

    The measure is sampled on ``grid_n`` uniform points over ``e_range``
    (default ``(V_R + 0.01 E0, 2 E0)``) and each sign change of
    ``measure - 1`` is refined by bisection. An empty list is a valid result.
    """
    energies, measure, _ = _grid(p, e_range, grid_n, 4)
    f = _measure_minus_one(p)
    out = []
    for a, b in _brackets(energies, measure - 1.0):
        e = _bisect(f, a, b)
        out.append(ssb_measure(e, p, tol_ssb=max(tol_ssb, abs(f(e)))))
    return out


@dataclass(frozen=True)
class CriticalReport:
    crossings: tuple
    first: float | None
    paper_value: float
    relative_deviation: float | None
    convention_mismatch: bool
    symmetric_side: str | None  # "above" or "below" the first crossing

    @property
    def found(self):
        return self.first is not None


def critical_energy_report(p=PAPER_PARAMS, e_range=None, grid_n=4000, paper_value=PAPER_CRITICAL_ENERGY,
                           band=CRITICAL_ENERGY_BAND):
    """Locate crossings and compare the first one with ``paper_value * E0``.

    ``convention_mismatch`` is set when no crossing is found or the first one
    deviates from the published value by more than ``band`` (relative). The
    symmetric side is read off the measure just past the crossing.
    """
    crossings = find_critical_energy(p, e_range, grid_n)
    if not crossings:
        return CriticalReport((), None, paper_value, None, True, None)
    first = crossings[0].energy
    ref = paper_value * p.e0
    dev = (first - ref) / ref
    probe = min(1e-4 * p.e0, 0.25 * _crossing_gap(crossings, first))
    above = ssb_measure(first + probe, p).measure
    side = "above" if above < 1.0 else "below"
    return CriticalReport(
        tuple(c.energy for c in crossings), first, paper_value, dev, abs(dev) > band, side
    )


def _crossing_gap(crossings, e):
    later = [c.energy - e for c in crossings if c.energy > e]
    return min(later) if later else math.inf


@dataclass(frozen=True)
class ATREvent:
    energy: float
    side: str  # "Left", "Right" or "Both"
    trans: float
    vanishing_reflectance: float
    tangent: bool = False


def _atr_event(e, p, tangent, on_ambiguous):
    a = amplitudes_closed_form(e, p)
    if a.refl_left < 1e-6 and a.refl_right < 1e-6:
        if on_ambiguous == "raise":
            raise AmbiguousSide(f"both reflectances vanish at E = {e!r} eV")
        return ATREvent(float(e), "Both", a.trans, max(a.refl_left, a.refl_right), tangent)
    side = "Left" if a.refl_left <= a.refl_right else "Right"
    return ATREvent(float(e), side, a.trans, min(a.refl_left, a.refl_right), tangent)


def find_atrs(p, e_range=None, grid_n=4000, on_ambiguous="raise"):
    """Anisotropic transmission resonances (``T = 1`` with one reflectance zero).

    Sign changes of ``1 - T`` on the grid are bisected; grid-local minima of
    ``|1 - T|`` without a sign change are polished with a bounded scalar
    minimisation and kept as tangent events if ``|1 - T| <= 1e-10``.

    Parameters
    ----------
    on_ambiguous : {"raise", "report"}
        What to do when both reflectances vanish: raise
        :class:`AmbiguousSide` or keep the event with side ``"Both"``.

    Raises
    ------
    InputError
        If ``p.v_imag <= 0``; without gain/loss ``T = 1`` is not a discrete event.
    """
    if not p.v_imag > 0:
        raise InputError("find_atrs needs v_imag > 0")
    energies, trans, _ = _grid(p, e_range, grid_n, 2)
    g = 1.0 - trans

    def f(e):
        return 1.0 - amplitudes_closed_form(e, p).trans

    events = []
    for a, b in _brackets(energies, g):
        events.append(_atr_event(_bisect(f, a, b), p, False, on_ambiguous))
    absg = np.abs(g)
    for i in range(1, len(energies) - 1):
        if not (absg[i] <= absg[i - 1] and absg[i] <= absg[i + 1]):
            continue
        if g[i - 1] * g[i] <= 0 or g[i] * g[i + 1] <= 0:
            continue  # already bracketed
        res = optimize.minimize_scalar(
            lambda e: abs(f(e)), bounds=(energies[i - 1], energies[i + 1]),
            method="bounded", options={"xatol": 1e-13},
        )
        if res.fun <= ATR_TANGENT_TOL:
            events.append(_atr_event(res.x, p, True, on_ambiguous))
    return sorted(events, key=lambda ev: ev.energy)


def phase_labels(cfg, p, energies, tol_uni=TOL_UNI, strict=False):
    """Overall phase (or ``None`` where indeterminate or a gap) at each energy."""
    status, rows = scattering.evaluate_grid(energies, p, int(spectrum_class(cfg)))
    labels = []
    for st, row in zip(status, rows):
        if st:
            labels.append(None)
            continue
        values = [complex(row[5 + 2 * k], row[6 + 2 * k]) for k in range(4)]
        try:
            labels.append(classify_values(values, tol_uni=tol_uni, strict=strict).overall)
        except Indeterminate:
            labels.append(None)
    return labels


def longest_run(energies, labels, target=Phase.MIXED):
    """Widest contiguous interval of grid points all labelled ``target``.

    Returns ``(start, stop)`` energies, or ``None`` if no point matches.
    """
    best, start = None, None
    for i, lab in enumerate(list(labels) + [None]):
        if lab is target:
            if start is None:
                start = i
        elif start is not None:
            span = (energies[start], energies[i - 1])
            if best is None or span[1] - span[0] > best[1] - best[0]:
                best = span
            start = None
    return best


@dataclass(frozen=True)
class ManifoldCurve:
    length: float
    v_real: float
    points: tuple  # ((energy, critical v_imag), ...)
    omitted: tuple = field(default=())  # ((energy, reason), ...)


def critical_v_imag(energy, p, v_imag_max=1.0, v_imag_start=1e-6):
    """Smallest ``V_I`` on a doubling ladder where the SSB measure exceeds 1, refined by bisection.

    Raises
    ------
    NoCrossing
        If the measure stays below 1 up to ``v_imag_max``.
    """
    def g(vi):
        return ssb_measure(energy, replace(p, v_imag=vi)).measure - 1.0

    lo, g_lo = 0.0, g(0.0)
    if g_lo >= 0:
        raise NoCrossing(f"measure >= 1 already at V_I = 0 for E = {energy!r}")
    hi = v_imag_start * p.e0
    while True:
        hi = min(hi, v_imag_max)
        if g(hi) > 0:
            break
        if hi >= v_imag_max:
            raise NoCrossing(f"no SSB crossing for V_I <= {v_imag_max} at E = {energy!r}")
        lo, hi = hi, 2 * hi
    return optimize.bisect(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=400)


def default_energy_grid(v_real, e0=1.0, n=60, e_max=2.0):
    return np.linspace(v_real + 0.01 * e0, e_max * e0, n)


def trace_ssb_manifold(lengths=(0.25, 0.5, 1.0), v_real=None, e_grid=None, p0=PAPER_PARAMS,
                       v_imag_max=1.0):
    """Critical ``V_I(E)`` curves, one per length.

    Parameters
    ----------
    lengths : sequence of float
        Slab lengths in micrometres.
    v_real : float or sequence of float, optional
        Real potential(s) in eV; defaults to ``p0.v_real``. A sequence yields
        one curve per ``(length, v_real)``.
    e_grid : array_like, optional
        Energies in eV; defaults to 60 points over ``[V_R + 0.01 E0, 2 E0]``.
    p0 : PhysParams
        Supplies mass and E0.

    Grid points without a crossing below ``v_imag_max`` are omitted and logged.
    """
    v_reals = [p0.v_real] if v_real is None else list(np.atleast_1d(v_real))
    curves = []
    for length in lengths:
        for vr in v_reals:
            p = replace(p0, length=float(length), v_real=float(vr), v_imag=0.0)
            grid = default_energy_grid(vr, p.e0) if e_grid is None else np.asarray(e_grid, float)
            points, omitted = [], []
            for e in grid:
                try:
                    points.append((float(e), critical_v_imag(float(e), p, v_imag_max)))
                except (NoCrossing, PTScatterError) as exc:
                    log.info("manifold point omitted: L=%s V_R=%s E=%s (%s)", length, vr, e, exc)
                    omitted.append((float(e), str(exc)))
            curves.append(ManifoldCurve(float(length), float(vr), tuple(points), tuple(omitted)))
    return curves


def cross_validate_point(energy, v_imag_c, p, deltas=(1e-6, 1e-5, 1e-4, 1e-3)):
    """Check that the case-2 eigenvalue phase flips across a manifold point.

    Evaluates the L0MR0 spectrum at ``V_I (1 -/+ delta)`` for increasing
    ``delta`` until both labels are determinate. Returns
    ``(flips, delta, below, above)``.
    """
    cfg = DeviceConfig.parse("L0MR0")
    below = above = None
    for d in deltas:
        try:
            below = _case2_label(energy, replace(p, v_imag=v_imag_c * (1 - d)), cfg)
            above = _case2_label(energy, replace(p, v_imag=v_imag_c * (1 + d)), cfg)
        except Indeterminate:
            continue
        return (below is Phase.SYMMETRIC and above is Phase.BROKEN), d, below, above
    return False, None, below, above


def _case2_label(energy, p, cfg):
    return classify_phase(eigenvalues_analytic(cfg, amplitudes_closed_form(energy, p))).overall

