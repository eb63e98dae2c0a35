"""Batch sweeps, dataset emission and the table/figure reproductions.

Every grid point is evaluated independently with scalar arithmetic, so the
output does not depend on how the grid is split across worker processes.
"""

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, _backend, scattering
from .errors import Indeterminate, InputError
from .phase import (
    Phase,
    classify_values,
    critical_energy_report,
    find_atrs,
    find_critical_energy,
    phase_labels,
    trace_ssb_manifold,
)
from .scattering import PAPER_PARAMS, PhysParams, amplitudes_closed_form
from .spinflip import (
    TABLE1,
    DeviceConfig,
    classify_case,
    eigenvalues_analytic,
    spectrum_class,
)

OUTPUTS = frozenset({"amplitudes", "eigenvalues", "phase", "ssb", "pseudo_residual"})

SWEEP_FIELDS = (
    "E_over_E0", "R_L", "R_R", "T", "pseudo_residual", "ssb_measure",
    "re_l1", "im_l1", "re_l2", "im_l2", "re_l3", "im_l3", "re_l4", "im_l4", "phase",
)
ATR_FIELDS = ("E_over_E0", "side", "T", "R_min", "tangent")
SSB_FIELDS = ("E_over_E0_critical",)
MANIFOLD_FIELDS = ("L_um", "V_R_over_E0", "E_over_E0", "V_I_over_E0_critical")
TABLE1_FIELDS = ("config", "case", "mix_observed", "case_paper", "mix_paper", "match", "note")

_OUTPUT_COLUMNS = {
    "amplitudes": ("R_L", "R_R", "T"),
    "pseudo_residual": ("pseudo_residual",),
    "ssb": ("ssb_measure",),
    "eigenvalues": SWEEP_FIELDS[6:14],
    "phase": ("phase",),
}

GAP = "gap"
INDETERMINATE = "Indeterminate"

#: Six real potentials (eV) for the fixed-length manifold panel.
FIG4_V_REALS = (0.05, 0.1, 0.2, 0.3, 0.4, 0.5)
FIG4_LENGTHS = (0.25, 0.5, 1.0)


@dataclass(frozen=True)
class SweepSpec:
    """Energy sweep over the closed-open grid ``[e_min, e_max)`` in eV."""

    params: PhysParams
    config: DeviceConfig = field(default_factory=DeviceConfig)
    e_min: float = 0.31
    e_max: float = 1.0
    n_points: int = 4000
    outputs: frozenset = OUTPUTS

    def __post_init__(self):
        if not isinstance(self.n_points, int) or isinstance(self.n_points, bool) or self.n_points < 2:
            raise InputError("n_points must be an integer >= 2")
        if not (math.isfinite(self.e_min) and math.isfinite(self.e_max)):
            raise InputError("e_min and e_max must be finite")
        if not 0 < self.e_min < self.e_max:
            raise InputError("need 0 < e_min < e_max")
        outputs = frozenset(self.outputs)
        unknown = outputs - OUTPUTS
        if unknown:
            raise InputError(f"unknown outputs {sorted(unknown)}")
        object.__setattr__(self, "outputs", outputs)

    def energies(self):
        i = np.arange(self.n_points, dtype=np.float64)
        return self.e_min + i * ((self.e_max - self.e_min) / self.n_points)


@dataclass(frozen=True)
class SweepRecord:
    energy_over_e0: float
    refl_left: float
    refl_right: float
    trans: float
    pseudo_residual: float
    ssb_measure: float
    eigenvalues: tuple
    phase: str
    gap: bool = False


def _phase_name(values, gap):
    if gap:
        return GAP
    try:
        return classify_values(values).overall.value
    except Indeterminate:
        return INDETERMINATE


def _records(energies, status, rows, p):
    out = []
    for e, st, row in zip(energies, status, rows):
        values = tuple(complex(row[5 + 2 * k], row[6 + 2 * k]) for k in range(4))
        gap = bool(st)
        out.append(SweepRecord(
            float(e) / p.e0, float(row[0]), float(row[1]), float(row[2]), float(row[3]),
            float(row[4]), values, _phase_name(values, gap), gap,
        ))
    return out


def _init_worker(backend):
    _backend.use_backend(backend)


def _chunk(args):
    energies, p, spectrum = args
    return scattering.evaluate_grid(energies, p, spectrum)


def evaluate(energies, p, cfg, workers=1):
    """Kernel rows for ``energies``; chunks run in ``workers`` processes and are reassembled in order."""
    energies = np.asarray(energies, dtype=np.float64)
    spectrum = int(spectrum_class(cfg))
    if workers is None or workers <= 1 or len(energies) < 2:
        return scattering.evaluate_grid(energies, p, spectrum)
    chunks = np.array_split(energies, min(int(workers), len(energies)))
    with ProcessPoolExecutor(max_workers=int(workers), initializer=_init_worker,
                             initargs=(_backend.name(),)) as pool:
        parts = list(pool.map(_chunk, [(c, p, spectrum) for c in chunks]))
    return np.concatenate([s for s, _ in parts]), np.concatenate([r for _, r in parts])


def run_sweep(spec, workers=1):
    """Evaluate ``spec`` and return one :class:`SweepRecord` per grid energy.

    Points where the amplitudes cannot be formed (``E`` on the potential,
    overflow) are kept as gap records with NaN fields.
    """
    energies = spec.energies()
    status, rows = evaluate(energies, spec.params, spec.config, workers)
    return _records(energies, status, rows, spec.params)


def evaluate_point(energy, p, cfg):
    """The record a sweep would hold at ``energy``."""
    status, rows = scattering.evaluate_grid(np.array([energy], dtype=np.float64), p, int(spectrum_class(cfg)))
    return _records([energy], status, rows, p)[0]


def gap_count(records):
    return sum(r.gap for r in records)


# -- file output ---------------------------------------------------------------

def _fmt(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _target(out_dir, name):
    root = Path(out_dir).resolve()
    path = (root / name).resolve()
    if root != path and root not in path.parents:
        raise InputError(f"refusing to write {name!r} outside {root}")
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_csv(out_dir, name, header, rows):
    """Write ``rows`` under ``out_dir``; floats use 17 significant digits."""
    path = _target(out_dir, name)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def write_metadata(out_dir, name, meta):
    path = _target(out_dir, name)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def sweep_columns(outputs):
    cols = ["E_over_E0"]
    for name in SWEEP_FIELDS[1:]:
        if any(name in _OUTPUT_COLUMNS[o] for o in outputs):
            cols.append(name)
    return tuple(cols)


def _sweep_row(r):
    values = {
        "E_over_E0": r.energy_over_e0, "R_L": r.refl_left, "R_R": r.refl_right, "T": r.trans,
        "pseudo_residual": r.pseudo_residual, "ssb_measure": r.ssb_measure, "phase": r.phase,
    }
    for k, lam in enumerate(r.eigenvalues, start=1):
        values[f"re_l{k}"] = lam.real
        values[f"im_l{k}"] = lam.imag
    return values


def write_sweep(out_dir, records, outputs=OUTPUTS, name="sweep.csv"):
    cols = sweep_columns(outputs)
    return write_csv(out_dir, name, cols, ([_sweep_row(r)[c] for c in cols] for r in records))


def write_atrs(out_dir, events, e0, name="atr.csv"):
    rows = ((ev.energy / e0, ev.side, ev.trans, ev.vanishing_reflectance, ev.tangent) for ev in events)
    return write_csv(out_dir, name, ATR_FIELDS, rows)


def write_ssb(out_dir, crossings, e0, name="ssb.csv"):
    return write_csv(out_dir, name, SSB_FIELDS, ((c.energy / e0,) for c in crossings))


def write_manifold(out_dir, curves, e0, name="manifold.csv"):
    rows = (
        (c.length, c.v_real / e0, e / e0, vi / e0)
        for c in curves for e, vi in c.points
    )
    return write_csv(out_dir, name, MANIFOLD_FIELDS, rows)


def spec_metadata(spec, **extra):
    meta = {
        "params": asdict(spec.params),
        "config": spec.config.name,
        "e_min_eV": spec.e_min,
        "e_max_eV": spec.e_max,
        "n_points": spec.n_points,
        "grid": "E_i = e_min + i (e_max - e_min) / n_points, i = 0..n_points-1",
        "backend": _backend.name(),
        "version": __version__,
    }
    meta.update(extra)
    return meta


# -- Table 1 ---------------------------------------------------------------------

@dataclass(frozen=True)
class Table1Result:
    config: str
    case: int
    mix_observed: bool
    case_paper: int
    mix_paper: bool
    match: bool
    note: str
    eigenvalues: int
    eigenvalues_paper: int
    mixed_fraction: float

    def row(self):
        return (self.config, self.case, self.mix_observed, self.case_paper, self.mix_paper, self.match, self.note)


def probe_window(p=PAPER_PARAMS, width=0.15, offset=0.02, grid_n=4000):
    """Energy window on the symmetric side of the first SSB crossing.

    Returns ``(lo, hi, report)``. Without a crossing the window falls back
    to ``[0.35, 0.5] E0``.
    """
    report = critical_energy_report(p, grid_n=grid_n)
    if not report.found:
        return 0.35 * p.e0, 0.5 * p.e0, report
    ec = report.first
    if report.symmetric_side == "above":
        return ec + offset * p.e0, ec + (offset + width) * p.e0, report
    return ec - (offset + width) * p.e0, ec - offset * p.e0, report


def distinct_count(values, rtol=1e-9):
    """Number of distinct complex values, merging those within ``rtol`` of the largest modulus."""
    scale = max(1.0, max(abs(v) for v in values))
    reps = []
    for v in values:
        if all(abs(v - u) > rtol * scale for u in reps):
            reps.append(v)
    return len(reps)


def reproduce_table1(p=PAPER_PARAMS, probe=None, probe_n=151, e_ref=None):
    """Classify all 16 configurations and compare with the published table.

    Parameters
    ----------
    p : PhysParams
    probe : (float, float), optional
        Energy window (eV) in which a Mixed label at any grid point sets the
        mix flag. Defaults to :func:`probe_window`.
    probe_n : int
        Grid points in the window.
    e_ref : float, optional
        Energy (eV) at which distinct eigenvalues are counted; defaults to the
        window centre.

    Returns
    -------
    list of Table1Result
        In table order; ``match`` compares case label and mix flag.
    """
    if probe is None:
        lo, hi, _ = probe_window(p)
    else:
        lo, hi = probe
    energies = np.linspace(lo, hi, probe_n)
    e_ref = 0.5 * (lo + hi) if e_ref is None else e_ref
    amps = amplitudes_closed_form(e_ref, p)
    results = []
    for row in TABLE1:
        for cfg in row.configs:
            labels = phase_labels(cfg, p, energies)
            mixed = sum(lab is Phase.MIXED for lab in labels)
            mix = mixed > 0
            case = classify_case(cfg)
            n_eig = distinct_count(eigenvalues_analytic(cfg, amps).values)
            notes = [f"mixed at {mixed}/{probe_n} points in [{lo:.4f}, {hi:.4f}] eV"]
            if n_eig != row.eigenvalues:
                notes.append(
                    f"caveat: recipe matrix has {n_eig} distinct eigenvalues, table lists "
                    f"{row.eigenvalues}; spectrum is the doubled uncoupled pair (same moduli as case 2)"
                )
            results.append(Table1Result(
                cfg.name, case, mix, row.case, row.mix, case == row.case and mix == row.mix,
                "; ".join(notes), n_eig, row.eigenvalues, mixed / probe_n,
            ))
    return results


def write_table1(out_dir, results, name="table1.csv"):
    return write_csv(out_dir, name, TABLE1_FIELDS, (r.row() for r in results))


# -- figures -------------------------------------------------------------------

def _fig2(out_dir, p, n_points, workers):
    spec = SweepSpec(p, DeviceConfig(), p.v_real + 0.01 * p.e0, 1.0 * p.e0, n_points)
    records = run_sweep(spec, workers)
    atrs = find_atrs(p, (spec.e_min, spec.e_max), n_points, on_ambiguous="report")
    crossings = find_critical_energy(p, grid_n=n_points)
    paths = [
        write_sweep(out_dir, records, name="fig2/sweep.csv"),
        write_atrs(out_dir, atrs, p.e0, name="fig2/atr.csv"),
        write_ssb(out_dir, crossings, p.e0, name="fig2/ssb.csv"),
        write_metadata(out_dir, "fig2/metadata.json", spec_metadata(
            spec, energy_range_note="(V_R + 0.01 E0, 1.0 E0]; axis range not given with the figure",
            ssb_range_eV=[p.v_real + 0.01 * p.e0, 2.0 * p.e0],
        )),
    ]
    return paths


def _log_rows(records):
    for r in records:
        logs = [math.log10(abs(v)) if abs(v) > 0 else -math.inf for v in r.eigenvalues]
        yield (r.energy_over_e0, *logs, r.phase)


FIG3_FIELDS = ("E_over_E0", "log10_abs_l1", "log10_abs_l2", "log10_abs_l3", "log10_abs_l4", "phase")


def _fig3(out_dir, p, n_points, workers):
    paths = []
    for panel, name in (("a", "L0MR0"), ("b", "L0M")):
        spec = SweepSpec(p, DeviceConfig.parse(name), p.v_real + 0.01 * p.e0, 2.0 * p.e0, n_points)
        records = run_sweep(spec, workers)
        paths.append(write_csv(out_dir, f"fig3/panel_{panel}.csv", FIG3_FIELDS, _log_rows(records)))
        paths.append(write_metadata(out_dir, f"fig3/panel_{panel}.json", spec_metadata(spec)))
    report = critical_energy_report(p, grid_n=n_points)
    paths.append(write_csv(out_dir, "fig3/ssb.csv", SSB_FIELDS, ((e / p.e0,) for e in report.crossings)))
    paths.append(write_metadata(out_dir, "fig3/critical.json", {
        "crossings_eV": list(report.crossings),
        "paper_value_over_E0": report.paper_value,
        "relative_deviation": report.relative_deviation,
        "convention_mismatch": report.convention_mismatch,
        "symmetric_side": report.symmetric_side,
        "mass_ratio": p.mass_ratio,
    }))
    return paths


def _fig4(out_dir, p):
    inset = trace_ssb_manifold(FIG4_LENGTHS, p.v_real, p0=p)
    main = trace_ssb_manifold((0.5,), FIG4_V_REALS, p0=p)
    return [
        write_manifold(out_dir, inset, p.e0, name="fig4/manifold_inset.csv"),
        write_manifold(out_dir, main, p.e0, name="fig4/manifold_main.csv"),
        write_metadata(out_dir, "fig4/metadata.json", {
            "params": asdict(p),
            "inset_lengths_um": list(FIG4_LENGTHS),
            "main_v_reals_eV": list(FIG4_V_REALS),
            "energy_grid": "60 points over [V_R + 0.01 E0, 2 E0] per curve",
            "omitted": {f"L={c.length},V_R={c.v_real}": len(c.omitted) for c in inset + main},
        }),
    ]


def reproduce_figures(which, out_dir, p=PAPER_PARAMS, n_points=4000, workers=1):
    """Write the datasets behind one figure; returns the written paths."""
    if which == "fig2":
        return _fig2(out_dir, p, n_points, workers)
    if which == "fig3":
        return _fig3(out_dir, p, n_points, workers)
    if which == "fig4":
        return _fig4(out_dir, p)
    raise InputError(f"unknown figure {which!r}; expected fig2, fig3 or fig4")

