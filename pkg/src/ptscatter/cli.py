"""``ptscatter`` command-line interface.

Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 verification failure.
Diagnostics go to standard error; datasets go to files under ``--out``.
"""

import argparse
import json
import sys
from dataclasses import replace

from . import __version__, _backend
from .config import RunConfig, parse_run_config
from .errors import InputError, NumericalError, SchemaError
from .phase import critical_energy_report, find_atrs, find_critical_energy, trace_ssb_manifold
from .sweep import (
    reproduce_figures,
    reproduce_table1,
    run_sweep,
    spec_metadata,
    write_atrs,
    write_manifold,
    write_metadata,
    write_ssb,
    write_sweep,
    write_table1,
)

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL, EXIT_VERIFY = 0, 1, 2, 3

# flag -> RunConfig field
_FLAGS = {
    "vr": "v_r_ev", "vi": "v_i_ev", "l": "l_um", "mass": "mass_ratio", "e0": "e0_ev",
    "emin": "e_min", "emax": "e_max", "n": "n_points", "device": "config", "out": "out_dir",
}
_DEFAULTS = dict(v_r_ev=0.3, v_i_ev=0.005, l_um=0.5, config="M", e_min=0.31, e_max=1.0)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _add_common(p):
    p.add_argument("--config", metavar="FILE", help="JSON run configuration")
    p.add_argument("--vr", type=float, help="real potential V_R (eV)")
    p.add_argument("--vi", type=float, help="imaginary potential V_I >= 0 (eV)")
    p.add_argument("--l", type=float, help="length of region M (um)")
    p.add_argument("--mass", type=float, help="particle mass / electron mass")
    p.add_argument("--e0", type=float, help="reference energy E0 (eV)")
    p.add_argument("--emin", type=float, help="lowest energy (eV)")
    p.add_argument("--emax", type=float, help="upper energy bound (eV)")
    p.add_argument("--n", type=int, help="number of grid points")
    p.add_argument("--device", help="configuration such as M, L0M, L1MR2")
    p.add_argument("--out", help="output directory")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--backend", choices=("auto", "cython", "python"), default="auto")


def build_parser():
    parser = _Parser(prog="ptscatter", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in (
        ("sweep", "energy sweep -> sweep.csv"),
        ("atr", "anisotropic transmission resonances -> atr.csv"),
        ("ssb", "SSB critical energies -> ssb.csv"),
        ("manifold", "critical V_I curves -> manifold.csv"),
        ("configs", "classify the 16 configurations -> table1.csv"),
        ("figures", "datasets behind a figure"),
        ("verify", "run the invariant suite"),
    ):
        p = sub.add_parser(name, help=help_)
        _add_common(p)
        if name == "figures":
            p.add_argument("--which", required=True, choices=("fig2", "fig3", "fig4"))
        if name == "manifold":
            p.add_argument("--lengths", type=float, nargs="+", default=[0.25, 0.5, 1.0],
                           help="lengths of region M (um)")
        if name == "verify":
            p.add_argument("--only", nargs="+", metavar="ID", help="run only these invariant IDs")
    return parser


def resolve_config(args):
    """RunConfig from ``--config`` (if any) overlaid with explicit flags."""
    data = dict(_DEFAULTS)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                base = parse_run_config(fh.read())
        except OSError as exc:
            raise SchemaError("--config", str(exc)) from None
        data = json.loads(base.to_json())
    for flag, name in _FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            data[name] = value
    return RunConfig(**data)


def _say(msg):
    print(msg, file=sys.stderr)


def _run(args):
    _backend.use_backend(args.backend)
    cfg = resolve_config(args)
    out = cfg.out_dir
    p = cfg.params()
    e_range = (cfg.e_min, cfg.e_max)
    if args.command == "sweep":
        spec = cfg.to_spec()
        records = run_sweep(spec, args.workers)
        path = write_sweep(out, records)
        write_metadata(out, "metadata.json", spec_metadata(spec))
        gaps = sum(r.gap for r in records)
        _say(f"wrote {path} ({len(records)} rows, {gaps} gaps)")
    elif args.command == "atr":
        events = find_atrs(p, e_range, cfg.n_points, on_ambiguous="report")
        path = write_atrs(out, events, p.e0)
        sides = {s: sum(ev.side == s for ev in events) for s in ("Left", "Right", "Both")}
        _say(f"wrote {path} ({len(events)} events: {sides})")
    elif args.command == "ssb":
        crossings = find_critical_energy(p, e_range, cfg.n_points)
        path = write_ssb(out, crossings, p.e0)
        report = critical_energy_report(p, e_range, cfg.n_points)
        write_metadata(out, "critical.json", {
            "crossings_eV": list(report.crossings),
            "paper_value_over_E0": report.paper_value,
            "relative_deviation": report.relative_deviation,
            "convention_mismatch": report.convention_mismatch,
            "symmetric_side": report.symmetric_side,
        })
        _say(f"wrote {path} ({len(crossings)} crossings)")
        if report.convention_mismatch:
            _say(f"convention mismatch: first crossing {report.first} deviates from "
                 f"{report.paper_value} E0 by {report.relative_deviation}")
    elif args.command == "manifold":
        curves = trace_ssb_manifold(args.lengths, p.v_real, p0=replace(p, v_imag=0.0))
        path = write_manifold(out, curves, p.e0)
        omitted = sum(len(c.omitted) for c in curves)
        _say(f"wrote {path} ({len(curves)} curves, {omitted} omitted points)")
    elif args.command == "configs":
        results = reproduce_table1(p)
        path = write_table1(out, results)
        _say(f"wrote {path} ({sum(r.match for r in results)}/{len(results)} rows match)")
    elif args.command == "figures":
        for path in reproduce_figures(args.which, out, p, cfg.n_points, args.workers):
            _say(f"wrote {path}")
    elif args.command == "verify":
        from .verify import run_all

        results = run_all(set(args.only) if args.only else None)
        for cid, ok, detail in results:
            print(f"{cid:4s} {'PASS' if ok else 'FAIL'}  {detail}")
        if not all(ok for _, ok, _ in results):
            return EXIT_VERIFY
    return EXIT_OK


def main(argv=None):
    """Entry point; returns the process exit code."""
    try:
        args = build_parser().parse_args(argv)
        return _run(args)
    except InputError as exc:
        _say(f"ptscatter: invalid input: {exc}")
        return EXIT_INPUT
    except NumericalError as exc:
        _say(f"ptscatter: numerical failure: {type(exc).__name__}: {exc}")
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
