"""Invariant suite behind ``ptscatter verify``.

:data:`MANIFEST` maps each invariant ID to a check returning ``(ok, detail)``.
The same IDs are listed in the README table.
"""

import math
import tempfile
from dataclasses import dataclass, replace

import numpy as np

from .config import RunConfig, parse_run_config
from .errors import InputError
from .phase import (
    Phase,
    classify_phase,
    critical_energy_report,
    find_atrs,
    find_critical_energy,
    longest_run,
    phase_labels,
)
from .scattering import (
    PAPER_PARAMS,
    Amplitudes,
    PhysParams,
    amplitudes_closed_form,
    amplitudes_oracle,
    pt_stack,
    swap_symmetry_check,
    wavenumbers,
)
from .spinflip import (
    TABLE1,
    DeviceConfig,
    all_configs,
    build_smatrix,
    classify_case,
    det_residual,
    det_scale,
    eigenvalues_analytic,
    eigenvalues_numeric,
    multiset_distance,
    placement,
    spectral_collapse_report,
)
from .sweep import SweepSpec, evaluate_point, gap_count, run_sweep, write_csv, write_sweep

SEED = 20200111


def random_draws(n, seed=SEED):
    """``(E, PhysParams)`` pairs: E in (V_R + 0.01, 2], V_R in [0, 0.5], V_I in [0, 0.02], L in [0.1, 1]."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        vr = rng.uniform(0.0, 0.5)
        p = PhysParams(vr, rng.uniform(0.0, 0.02), rng.uniform(0.1, 1.0))
        e = 2.0 - rng.uniform(0.0, 2.0 - vr - 0.01)
        out.append((e, p))
    return out


def random_amplitudes(n, seed=SEED, bound=10.0):
    """Random complex triples with moduli up to ``bound``."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        z = rng.normal(size=3) + 1j * rng.normal(size=3)
        z = z / np.abs(z) * rng.uniform(0.0, bound, size=3)
        out.append(Amplitudes.from_complex(*z))
    return out


def _result(ok, detail):
    return bool(ok), detail


# -- scattering_core -------------------------------------------------------------

def check_pseudo_unitarity():
    worst = 0.0
    for e, p in random_draws(1000):
        a = amplitudes_closed_form(e, p)
        worst = max(worst, a.pseudo_residual / max(1.0, a.trans))
    return _result(worst <= 1e-9, f"max scaled residual {worst:.3g}")


def check_oracle_equivalence():
    worst = 0.0
    for e, p in random_draws(1000):
        worst = max(worst, amplitudes_closed_form(e, p).deviation(amplitudes_oracle(e, pt_stack(p))))
    return _result(worst <= 1e-10, f"max relative deviation {worst:.3g}")


def check_hermitian_limit():
    worst = 0.0
    for e, p in random_draws(200, SEED + 1):
        a = amplitudes_closed_form(e, replace(p, v_imag=0.0))
        worst = max(worst, abs(a.trans + a.refl_left - 1), abs(a.refl_left - a.refl_right))
    return _result(worst <= 1e-12, f"max |T + R - 1|, |R_L - R_R| = {worst:.3g}")


def check_zero_potential():
    worst = 0.0
    for e, p in random_draws(200, SEED + 2):
        a = amplitudes_closed_form(e, replace(p, v_real=0.0, v_imag=0.0))
        worst = max(worst, abs(a.r_left), abs(a.r_right), abs(abs(a.t) - 1))
    return _result(worst <= 1e-14, f"max deviation {worst:.3g}")


def check_branch_continuity():
    worst = 0.0
    for p in (PAPER_PARAMS, replace(PAPER_PARAMS, v_imag=0.0), replace(PAPER_PARAMS, v_imag=0.02)):
        grid = np.linspace(0.01, 2.0, 20001)
        grid = grid[np.abs(grid - p.v_real) > 1e-3]
        k = np.array([wavenumbers(e, p).k1 for e in grid])
        ratio = np.abs(np.diff(k)) / np.diff(grid)
        # |dk1/dE| = 1 / (2 h |k1|); allow a factor 2 over that bound
        bound = 2.0 / (2 * p.hbar2_2m * np.minimum(np.abs(k[1:]), np.abs(k[:-1])))
        # steps across E = V_R are excluded from the grid, so no legitimate jump remains
        mask = np.diff(grid) < 1e-3
        worst = max(worst, float(np.max(ratio[mask] / bound[mask])))
    return _result(worst <= 1.0, f"max step over bound {worst:.3g}")


def check_swap_symmetry():
    worst = max(swap_symmetry_check(e, p) for e, p in random_draws(200, SEED + 3))
    return _result(worst <= 1e-10, f"max residual {worst:.3g}")


# -- spinflip_smatrix --------------------------------------------------------------

def check_spectral_collapse():
    a = random_amplitudes(1, SEED + 4)[0]
    report = spectral_collapse_report(a)
    moduli_ok = all(row[5] for row in report)
    split = sorted(row[1] for row in report if not row[4])
    return _result(moduli_ok, f"moduli collapse by case; multiset differs from case reference for {split}")


_EQ4 = (("rR", "t", None, None), ("t", "rL", None, None), (None, None, "rR", "t"), (None, None, "t", "rL"))
_EQ6 = ((None, "t", "rR", None), ("t", None, None, "rL"), ("rR", None, None, "t"), (None, "rL", "t", None))
_EQ7 = (("rR", None, None, "t"), (None, None, "t", "rL"), (None, "t", "rR", None), ("t", "rL", None, None))


def check_recipe():
    ok = (
        placement(DeviceConfig.parse("M")) == _EQ4
        and placement(DeviceConfig.parse("L0MR0")) == _EQ6
        and placement(DeviceConfig.parse("L0M")) == _EQ7
    )
    return _result(ok, "M, L0MR0, L0M layouts against the printed matrices")


def check_det_residual():
    worst = 0.0
    for a in random_amplitudes(100, SEED + 5) + [amplitudes_closed_form(0.4, PAPER_PARAMS)]:
        for cfg in all_configs():
            s = build_smatrix(cfg, a)
            q = eigenvalues_analytic(cfg, a)
            scale = det_scale(q.values)
            worst = max(worst, max(det_residual(s, lam) for lam in q.values) / scale)
    return _result(worst <= 1e-8, f"max |det(S - lam)| / scale {worst:.3g}")


def check_decoupling():
    s = build_smatrix(DeviceConfig.parse("M"), random_amplitudes(1, SEED + 6)[0])
    ok = not np.any(s[:2, 2:]) and not np.any(s[2:, :2])
    return _result(ok, "off-diagonal spin blocks of M are exactly zero")


def _connected(s):
    nz = np.abs(np.asarray(s)) > 0
    seen, stack = {0}, [0]
    while stack:
        i = stack.pop()
        for j in range(4):
            if (nz[i, j] or nz[j, i]) and j not in seen:
                seen.add(j)
                stack.append(j)
    return len(seen) == 4


def check_case3_coupling():
    a = random_amplitudes(1, SEED + 7)[0]
    ok = all(_connected(build_smatrix(c, a)) for c in all_configs() if classify_case(c) == 3)
    return _result(ok, "channel graph connected for every case-3 config")


def check_dual_path():
    worst = 0.0
    for a in random_amplitudes(100, SEED + 8):
        for cfg in all_configs():
            q = eigenvalues_analytic(cfg, a)
            worst = max(worst, multiset_distance(q.values, eigenvalues_numeric(build_smatrix(cfg, a)).values))
    return _result(worst <= 1e-8, f"max multiset distance {worst:.3g}")


def check_case_labels():
    bad = [c.name for row in TABLE1 for c in row.configs if classify_case(c) != row.case]
    n = sum(len(r.configs) for r in TABLE1)
    return _result(not bad and n == 16 and len(TABLE1) == 10, f"{n} configs in {len(TABLE1)} rows; mismatches {bad}")


# -- phase_analysis ----------------------------------------------------------------

def check_criterion_equivalence():
    cfg = DeviceConfig.parse("L0MR0")
    disagree = 0
    checked = 0
    for p in (PAPER_PARAMS, replace(PAPER_PARAMS, length=0.25), replace(PAPER_PARAMS, v_imag=0.001)):
        grid = np.linspace(p.v_real + 0.01, 2.0, 2000)
        crossings = [c.energy for c in find_critical_energy(p, (grid[0], grid[-1]), 4000)]
        for e in grid:
            if any(abs(e - c) <= 1e-6 for c in crossings):
                continue
            a = amplitudes_closed_form(e, p)
            measure = 0.5 * (a.refl_left + a.refl_right) - a.trans
            label = classify_phase(eigenvalues_analytic(cfg, a)).overall
            expect = Phase.SYMMETRIC if measure < 1 else Phase.BROKEN
            checked += 1
            disagree += label is not expect
    return _result(disagree == 0, f"{disagree} disagreements in {checked} points")


def check_atr_consistency():
    events = find_atrs(PAPER_PARAMS, (0.31, 1.0), 4000, on_ambiguous="report")
    worst = 0.0
    for ev in events:
        a = amplitudes_closed_form(ev.energy, PAPER_PARAMS)
        worst = max(worst, math.sqrt(a.refl_left * a.refl_right))
    return _result(events and worst <= 1e-7, f"{len(events)} events, max sqrt(R_L R_R) {worst:.3g}")


def check_mixed_broadband():
    report = critical_energy_report(PAPER_PARAMS)
    if not report.found:
        return _result(False, "no SSB crossing found")
    ec = report.first
    lo, hi = (ec, 2.0) if report.symmetric_side == "above" else (PAPER_PARAMS.v_real + 0.01, ec)
    grid = np.linspace(lo, hi, 2000)
    run = longest_run(grid, phase_labels(DeviceConfig.parse("L0M"), PAPER_PARAMS, grid))
    width = 0.0 if run is None else run[1] - run[0]
    return _result(width >= 0.1, f"widest Mixed window {width:.4f} E0 on the {report.symmetric_side} side of {ec:.6f}")


def check_reciprocal_symmetry():
    # the (l1, l2) pair of every spectrum is either unimodular or an exact reciprocal pair
    worst, broken = 0.0, 0
    for e, p in random_draws(1000, SEED + 9):
        q = eigenvalues_analytic(DeviceConfig.parse("L0M"), amplitudes_closed_form(e, p))
        m1, m2 = abs(q.values[0]), abs(q.values[1])
        if max(abs(m1 - 1), abs(m2 - 1)) > 1e-5:
            broken += 1
            worst = max(worst, abs(math.log10(m1) + math.log10(m2)))
    return _result(broken and worst <= 1e-6, f"{broken} non-unimodular pairs, max |log10|a| + log10|b|| {worst:.3g}")


def check_rootfinder_determinism():
    a = [c.energy for c in find_critical_energy(PAPER_PARAMS)]
    b = [c.energy for c in find_critical_energy(PAPER_PARAMS)]
    x = [ev.energy for ev in find_atrs(PAPER_PARAMS, (0.31, 1.0))]
    y = [ev.energy for ev in find_atrs(PAPER_PARAMS, (0.31, 1.0))]
    return _result(a == b and x == y, "repeated crossings and ATRs are bit-identical")


# -- sweep_engine ------------------------------------------------------------------

def _sweep_bytes(workers):
    with tempfile.TemporaryDirectory() as tmp:
        spec = SweepSpec(PAPER_PARAMS, DeviceConfig.parse("L0M"), 0.31, 2.0, 4000)
        path = write_sweep(tmp, run_sweep(spec, workers))
        return path.read_bytes()


def check_sweep_determinism():
    ref = _sweep_bytes(1)
    ok = all(_sweep_bytes(w) == ref for w in (2, 3))
    return _result(ok, "sweep.csv identical for 1, 2 and 3 workers")


def check_pipeline_consistency():
    spec = SweepSpec(PAPER_PARAMS, DeviceConfig.parse("L0M"), 0.31, 2.0, 4000)
    records = run_sweep(spec)
    energies = spec.energies()
    idx = np.random.default_rng(SEED + 10).choice(len(records), 100, replace=False)
    bad = 0
    for i in idx:
        again = evaluate_point(float(energies[i]), spec.params, spec.config)
        bad += again != records[i]
    return _result(bad == 0, f"{bad} of 100 records differ on recomputation")


def check_gap_accounting():
    p = replace(PAPER_PARAMS, v_imag=0.0)
    spec = SweepSpec(p, DeviceConfig(), 0.2, 0.4, 1000)  # 0.3 lies on the grid
    records = run_sweep(spec)
    expected = int(np.sum(np.abs(spec.energies() - p.v_real) <= 1e-12))
    return _result(gap_count(records) == expected and expected >= 1,
                   f"{gap_count(records)} gaps, {expected} grid points on E = V_R")


# -- cli_io ----------------------------------------------------------------------

def check_config_roundtrip():
    cfg = RunConfig(0.3, 0.005, 0.5, "l1mr2", 0.31, 1.0, n_points=100)
    return _result(parse_run_config(cfg.to_json()) == cfg, "RunConfig -> JSON -> RunConfig")


def check_output_confinement():
    with tempfile.TemporaryDirectory() as tmp:
        try:
            write_csv(tmp, "../escape.csv", ("a",), [])
        except InputError:
            return _result(True, "writes outside out_dir are refused")
    return _result(False, "a write escaped out_dir")


@dataclass(frozen=True)
class Check:
    id: str
    module: str
    description: str
    func: object


MANIFEST = (
    Check("SC1", "scattering_core", "pseudo-unitarity on 1000 random draws", check_pseudo_unitarity),
    Check("SC2", "scattering_core", "closed form equals transfer-matrix oracle", check_oracle_equivalence),
    Check("SC3", "scattering_core", "Hermitian limit conserves flux and is symmetric", check_hermitian_limit),
    Check("SC4", "scattering_core", "zero potential is transparent", check_zero_potential),
    Check("SC5", "scattering_core", "k1 continuous along energy sweeps", check_branch_continuity),
    Check("SC6", "scattering_core", "k1 -> k1* equals slab reversal", check_swap_symmetry),
    Check("SF1", "spinflip_smatrix", "spectral collapse by case label", check_spectral_collapse),
    Check("SF2", "spinflip_smatrix", "recipe reproduces the printed matrices", check_recipe),
    Check("SF3", "spinflip_smatrix", "determinant residual of every eigenvalue", check_det_residual),
    Check("SF4", "spinflip_smatrix", "no-flipper matrix is spin block diagonal", check_decoupling),
    Check("SF5", "spinflip_smatrix", "case-3 channel graph is connected", check_case3_coupling),
    Check("SF6", "spinflip_smatrix", "analytic and quartic-root spectra agree", check_dual_path),
    Check("SF7", "spinflip_smatrix", "case labels match the table", check_case_labels),
    Check("PA1", "phase_analysis", "eigenvalue phase agrees with the SSB measure", check_criterion_equivalence),
    Check("PA2", "phase_analysis", "ATRs satisfy sqrt(R_L R_R) ~ 0", check_atr_consistency),
    Check("PA3", "phase_analysis", "broadband Mixed window for L0M", check_mixed_broadband),
    Check("PA4", "phase_analysis", "broken pairs have reciprocal moduli", check_reciprocal_symmetry),
    Check("PA5", "phase_analysis", "root finders are deterministic", check_rootfinder_determinism),
    Check("SW1", "sweep_engine", "sweep output independent of worker count", check_sweep_determinism),
    Check("SW2", "sweep_engine", "records reproducible from their own inputs", check_pipeline_consistency),
    Check("SW3", "sweep_engine", "gaps only on the degenerate locus", check_gap_accounting),
    Check("CL1", "cli_io", "run-config JSON round trip", check_config_roundtrip),
    Check("CL2", "cli_io", "no writes outside out_dir", check_output_confinement),
)


def run_all(ids=None):
    """Run the manifest (or the listed IDs); returns ``[(id, ok, detail)]``."""
    out = []
    for check in MANIFEST:
        if ids is not None and check.id not in ids:
            continue
        try:
            ok, detail = check.func()
        except Exception as exc:  # a crashing check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((check.id, ok, detail))
    return out


def manifest_ids():
    return [c.id for c in MANIFEST]


__all__ = ["MANIFEST", "manifest_ids", "random_amplitudes", "random_draws", "run_all"]
