"""Time the compiled and pure-Python kernel backends side by side.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--n 4000]

Prints the best-of-``repeat`` wall time per kernel and backend plus the
speed-up. Both backends are checked to agree before timing.
"""

import argparse
import timeit

import numpy as np

from ptscatter import _backend
from ptscatter.constants import DEGENERATE_ENERGY_TOL, HBAR2_2ME
from ptscatter.scattering import PAPER_PARAMS
from ptscatter.spinflip import DeviceConfig
from ptscatter.sweep import SweepSpec, run_sweep


def workloads(n):
    p = PAPER_PARAMS
    energies = np.linspace(0.31, 1.0, n, endpoint=False)
    length_nm = p.length * 1e3
    roots = np.random.default_rng(0).normal(size=(200, 4)) + 1j * np.random.default_rng(1).normal(size=(200, 4))
    polys = [np.poly(r)[1:] for r in roots]

    def amplitudes(k):
        for e in energies[:500]:
            k.amplitudes(e, p.v_real, p.v_imag, length_nm, HBAR2_2ME, np.inf, DEGENERATE_ENERGY_TOL)

    def sweep_rows(k):
        k.sweep_rows(energies, p.v_real, p.v_imag, length_nm, HBAR2_2ME, np.inf, DEGENERATE_ENERGY_TOL, 3)

    def quartic_roots(k):
        for c in polys:
            k.quartic_roots(*c, 1e-12, 200)

    def full_sweep(_k):
        run_sweep(SweepSpec(p, DeviceConfig.parse("L0M"), 0.31, 1.0, n))

    return {"amplitudes x500": amplitudes, f"sweep_rows n={n}": sweep_rows,
            "quartic_roots x200": quartic_roots, f"run_sweep L0M n={n}": full_sweep}


def check_agreement(n):
    p = PAPER_PARAMS
    e = np.linspace(0.31, 1.0, n, endpoint=False)
    args = (e, p.v_real, p.v_imag, p.length * 1e3, HBAR2_2ME, np.inf, DEGENERATE_ENERGY_TOL, 3)
    out = {}
    for b in _backend.available():
        _backend.use_backend(b)
        out[b] = _backend.kernels().sweep_rows(*args)[1]
    ref = out["python"]
    for b, rows in out.items():
        dev = np.max(np.abs(rows - ref) / np.maximum(1.0, np.abs(ref)))
        print(f"agreement {b:>7s} vs python: max relative deviation {dev:.2e}")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=4000)
    args = ap.parse_args(argv)

    previous = _backend.name()
    try:
        check_agreement(args.n)
        backends = _backend.available()
        print(f"{'workload':26s}" + "".join(f"{b:>12s}" for b in backends) + "     speed-up")
        for label, fn in workloads(args.n).items():
            times = {}
            for b in backends:
                _backend.use_backend(b)
                k = _backend.kernels()
                times[b] = min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat))
            speedup = times["python"] / times["cython"] if "cython" in times else float("nan")
            print(f"{label:26s}" + "".join(f"{times[b]*1e3:10.2f}ms" for b in backends) + f"  {speedup:9.1f}x")
    finally:
        _backend.use_backend(previous)


if __name__ == "__main__":
    main()
