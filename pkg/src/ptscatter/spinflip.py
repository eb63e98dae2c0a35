"""Spin-flipper configurations, 4x4 S-matrices and their spectra.

Channel basis for both input and output vectors is ``[L_up, R_up, L_down, R_down]``.
The uncoupled template places ``r_R`` on the diagonal entries of the left
channels, ``r_L`` on those of the right channels and ``t`` on the in-sector
off-diagonals. A flipper moves an entry ``(i, j)`` to the opposite-spin column
``(i, j ^ 2)``:

* ``t`` moves iff the number of F0 and F1 components is odd;
* ``r_L`` (``r_R``) moves iff the left (right) component is F0 or F2.
"""

import enum
import itertools
import math
import re
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import GrammarError, NoConvergence

DK_TOL = 1e-12
DK_MAX_ITER = 200
# an m-fold root spreads DK iterates by ~eps**(1/m); 1e-3 covers m = 4
CLUSTER_RTOL = 1e-3
# stalled iterates this close to a neighbour are treated as part of a multiple root
STALL_RTOL = 1e-2


class SFKind(enum.Enum):
    """Spin-flipper variants."""

    F0 = 0  # flips reflected and transmitted spin
    F1 = 1  # flips transmitted spin only
    F2 = 2  # flips reflected spin only

    @property
    def flips_transmitted(self):
        return self in (SFKind.F0, SFKind.F1)

    @property
    def flips_reflected(self):
        return self in (SFKind.F0, SFKind.F2)


_GRAMMAR = re.compile(r"^(L[012])?M(R[012])?$")


@dataclass(frozen=True)
class DeviceConfig:
    """Flippers to the left and right of region M (``None`` for no flipper)."""

    left: SFKind | None = None
    right: SFKind | None = None

    @classmethod
    def parse(cls, text):
        """Parse names such as ``"M"``, ``"l0m"`` or ``"L1MR2"``.

        Raises
        ------
        GrammarError
            If ``text`` does not match ``^(L[012])?M(R[012])?$`` ignoring case.
        """
        if not isinstance(text, str):
            raise GrammarError(f"device must be a string, got {text!r}")
        m = _GRAMMAR.match(text.strip().upper())
        if m is None:
            raise GrammarError(f"invalid device {text!r}; expected ^(L[012])?M(R[012])?$")
        left, right = m.groups()
        return cls(
            SFKind(int(left[1])) if left else None,
            SFKind(int(right[1])) if right else None,
        )

    @property
    def name(self):
        left = f"L{self.left.value}" if self.left is not None else ""
        right = f"R{self.right.value}" if self.right is not None else ""
        return f"{left}M{right}"

    def __str__(self):
        return self.name

    @property
    def components(self):
        return 1 + (self.left is not None) + (self.right is not None)

    @property
    def shifts(self):
        """``(t, r_L, r_R)`` flags: which entries move to the opposite spin sector."""
        kinds = [k for k in (self.left, self.right) if k is not None]
        t = sum(k.flips_transmitted for k in kinds) % 2 == 1
        rl = self.left is not None and self.left.flips_reflected
        rr = self.right is not None and self.right.flips_reflected
        return t, rl, rr


def all_configs():
    """The 16 configurations, sorted by name."""
    sides = [None, SFKind.F0, SFKind.F1, SFKind.F2]
    return sorted((DeviceConfig(l, r) for l in sides for r in sides), key=lambda c: c.name)


@dataclass(frozen=True)
class Table1Row:
    label: str
    configs: tuple
    eigenvalues: int
    components: int
    mix: bool
    case: int


def _row(label, names, eigenvalues, components, mix, case):
    return Table1Row(label, tuple(DeviceConfig.parse(n) for n in names), eigenvalues, components, mix, case)


#: The published classification table, row by row.
TABLE1 = (
    _row("M", ["M"], 2, 1, False, 1),
    _row("L0MR0", ["L0MR0"], 4, 3, False, 2),
    _row("L0M or MR0", ["L0M", "MR0"], 4, 2, True, 3),
    _row("L1MR1", ["L1MR1"], 4, 3, False, 2),
    _row("L2MR2", ["L2MR2"], 4, 3, False, 2),
    _row("L1M or MR1", ["L1M", "MR1"], 4, 2, False, 2),
    _row("L2M or MR2", ["L2M", "MR2"], 4, 2, True, 3),
    _row("L0MR1 or L1MR0", ["L0MR1", "L1MR0"], 4, 3, True, 3),
    _row("L0MR2 or L2MR0", ["L0MR2", "L2MR0"], 4, 3, False, 2),
    _row("L1MR2 or L2MR1", ["L1MR2", "L2MR1"], 4, 3, True, 3),
)


def enumerate_configs():
    """Table rows with their configurations; 10 rows covering all 16 configs."""
    return list(TABLE1)


def table1_row(cfg):
    """The table row that lists ``cfg``."""
    for row in TABLE1:
        if cfg in row.configs:
            return row
    raise KeyError(cfg)  # unreachable for valid configs


# (row, col) template positions of the uncoupled matrix
_T_POS = ((0, 1), (1, 0), (2, 3), (3, 2))
_RR_POS = ((0, 0), (2, 2))
_RL_POS = ((1, 1), (3, 3))


def placement(cfg):
    """Symbolic layout: 4x4 nested tuple of ``"t"``, ``"rL"``, ``"rR"`` or ``None``."""
    grid = [[None] * 4 for _ in range(4)]
    t_shift, rl_shift, rr_shift = cfg.shifts
    for positions, symbol, moved in ((_T_POS, "t", t_shift), (_RR_POS, "rR", rr_shift), (_RL_POS, "rL", rl_shift)):
        for i, j in positions:
            grid[i][j ^ 2 if moved else j] = symbol
    return tuple(tuple(r) for r in grid)


def build_smatrix(cfg, a):
    """S-matrix of ``cfg`` for amplitudes ``a`` (read-only complex ndarray)."""
    values = {"t": a.t, "rL": a.r_left, "rR": a.r_right}
    s = np.zeros((4, 4), dtype=complex)
    for i, row in enumerate(placement(cfg)):
        for j, symbol in enumerate(row):
            if symbol is not None:
                s[i, j] = values[symbol]
    s.flags.writeable = False
    return s


def classify_case(cfg):
    """Table case label: 1 without flippers, else 3 iff exactly one reflection moves, else 2."""
    if cfg.left is None and cfg.right is None:
        return 1
    _, rl, rr = cfg.shifts
    return 3 if rl != rr else 2


class Spectrum(enum.IntEnum):
    """Actual eigenvalue structure of a recipe-built matrix."""

    UNCOUPLED = 0  # case-1 pair, doubled
    CASE2 = 1  # {l1, l2, -l2, -l1}
    CASE3_LEFT = 2  # only r_L moved
    CASE3_RIGHT = 3  # only r_R moved


def spectrum_class(cfg):
    """Spectrum structure of ``cfg``; depends only on which reflections move.

    Configurations with no reflection moved (M, L1M, MR1, L1MR1) share the
    doubled uncoupled spectrum even though the table files the last three as
    case 2.
    """
    _, rl, rr = cfg.shifts
    if rl and rr:
        return Spectrum.CASE2
    if rl:
        return Spectrum.CASE3_LEFT
    if rr:
        return Spectrum.CASE3_RIGHT
    return Spectrum.UNCOUPLED


@dataclass(frozen=True)
class EigenQuartet:
    """Four eigenvalues with pairs ``(values[i], values[j])`` for ``(i, j)`` in ``pairing``."""

    values: tuple
    pairing: tuple = ((0, 1), (2, 3))
    case_label: int = 1
    spectrum: Spectrum = Spectrum.UNCOUPLED

    def pairs(self):
        return [(self.values[i], self.values[j]) for i, j in self.pairing]

    @property
    def moduli(self):
        return tuple(abs(v) for v in self.values)


def eigenvalues_analytic(cfg, a):
    """Closed-form eigenvalues of ``build_smatrix(cfg, a)``.

    The first pair is ``((r_R + r_L) +/- sqrt((r_R - r_L)^2 + 4 t^2)) / 2``.
    The second pair depends on the spectrum class: a copy of the first
    (uncoupled), its negation (case 2) or
    ``(+/-(r_R - r_L) +/- sqrt((r_R + r_L)^2 + 4 t^2)) / 2`` (case 3, sign
    set by which reflection moved).
    """
    spec = spectrum_class(cfg)
    values = _backend.kernels().eigen_pairs(a.r_left, a.r_right, a.t, int(spec))
    return EigenQuartet(tuple(complex(v) for v in values), ((0, 1), (2, 3)), classify_case(cfg), spec)


def charpoly(s):
    """Monic characteristic polynomial coefficients ``[1, c3, c2, c1, c0]`` (Faddeev-LeVerrier)."""
    s = np.asarray(s, dtype=complex)
    n = s.shape[0]
    coeffs = [1.0 + 0j]
    m = np.zeros_like(s)
    eye = np.eye(n, dtype=complex)
    for k in range(1, n + 1):
        m = s @ m + coeffs[-1] * eye
        coeffs.append(-np.trace(s @ m) / k)
    return np.array(coeffs, dtype=complex)


def _polyval(c, z):
    acc = 0j
    for ck in c:
        acc = acc * z + ck
    return acc


def _rounding(radius):
    # rounding scale of p^(k)(z) when the coefficients come from roots of size <= radius
    u = 2 * np.finfo(float).eps
    return lambda z, k: u * math.perm(4, k) * (radius + abs(z)) ** (4 - k)


def _is_multiple(c, z, m, noise):
    d = c
    for k in range(m):
        if abs(_polyval(d, z)) > 8 * noise(z, k):
            return False
        d = np.polyder(d)
    return True


def _clusters(roots):
    scale = max(1.0, max(abs(z) for z in roots))
    thresh = CLUSTER_RTOL * scale
    groups = []
    for i, z in enumerate(roots):
        for g in groups:
            if any(abs(z - roots[j]) <= thresh for j in g):
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


def _taylor_shift(c, shift, scale):
    """Monic coefficients of ``p(shift + scale * w)`` in ``w``."""
    n = len(c) - 1
    out = []
    d = c
    fact = 1.0
    for k in range(n + 1):
        out.append(_polyval(d, shift) / fact * scale**k)
        d = np.polyder(d)
        fact *= k + 1
    out = np.array(out[::-1], dtype=complex)
    return out / out[0]


def _refine_cluster(c, members, noise, solve, tol):
    # recombine at the mean, refined by Newton on p^(m-1)
    m = len(members)
    mean = sum(members) / m
    d = np.polyder(c, m - 1)
    dval = _polyval(np.polyder(d), mean)
    if dval != 0:
        mean = mean - _polyval(d, mean) / dval
    spread = max(abs(z - mean) for z in members)
    if spread == 0 or _is_multiple(c, mean, m, noise):
        return [mean] * m
    # members far apart compared with the rounding blur (noise / |p^(m)/m!|)^(1/m) are simple roots
    lead = abs(_polyval(np.polyder(c, m), mean)) / math.factorial(m)
    blur = (8 * noise(mean, 0) / lead) ** (1 / m) if lead > 0 else math.inf
    polished = [_newton_polish(c, z, tol) for z in members]
    zs = [z for z, _ in polished]
    if all(ok for _, ok in polished) and min(
        abs(x - y) for x, y in itertools.combinations(zs, 2)
    ) >= 10 * blur:
        return zs
    if solve is not None:
        # distinct roots below the cluster threshold: zoom in and solve at their own scale
        try:
            local = solve(_taylor_shift(c, mean, spread),
                          lambda w, k: noise(mean + spread * w, k) * spread ** (k - 4))
        except NoConvergence:
            return [mean] * m
        targets = [(z - mean) / spread for z in members]
        best = min(itertools.permutations(local, m),
                   key=lambda ws: sum(abs(w - t) for w, t in zip(ws, targets)))
        return [mean + spread * w for w in best]
    if m != 2:
        return [mean] * m
    # two close but distinct roots: solve the local quadratic Taylor model
    p0 = _polyval(c, mean)
    p1 = _polyval(np.polyder(c), mean)
    p2 = 0.5 * _polyval(np.polyder(c, 2), mean)
    if p2 == 0:
        return [mean] * m
    disc = np.sqrt(complex(p1 * p1 - 4 * p2 * p0))
    return [mean + (-p1 + disc) / (2 * p2), mean + (-p1 - disc) / (2 * p2)]


def _newton_polish(c, z0, tol, steps=8):
    """Newton from ``z0``; returns ``(z, ok)`` with ``ok`` when it settles near ``z0``."""
    dc = np.polyder(c)
    z = z0
    for _ in range(steps):
        d = _polyval(dc, z)
        if d == 0:
            break
        step = _polyval(c, z) / d
        z = z - step
        if abs(step) <= tol * max(1.0, abs(z)):
            break
    ok = _isfinite(z) and abs(z - z0) <= 1e-6 * max(1.0, abs(z0))
    return (z, True) if ok else (z0, False)


def _solve(c, tol, max_iter, noise, depth):
    raw, _, converged = _backend.kernels().quartic_roots(
        complex(c[1]), complex(c[2]), complex(c[3]), complex(c[4]), float(tol), int(max_iter)
    )
    raw = [complex(z) for z in raw]
    if not all(_isfinite(z) for z in raw):
        raise NoConvergence(f"Durand-Kerner diverged for coefficients {c.tolist()}")
    if noise is None:
        noise = _rounding(max(abs(z) for z in raw))
    solve = None
    if depth > 0:
        def solve(cc, nn):
            return _solve(cc, tol, max_iter, nn, depth - 1)
    roots = [0j] * 4
    groups = _clusters(raw)
    polished = {g[0]: _newton_polish(c, raw[g[0]], tol) for g in groups if len(g) == 1}
    if not converged:
        # multiple roots stall DK; a stalled iterate joins the group of its nearest neighbour
        for i, (_, ok) in polished.items():
            if not ok:
                j = min((k for k in range(4) if k != i), key=lambda k: abs(raw[k] - raw[i]))
                if abs(raw[j] - raw[i]) > STALL_RTOL * max(1.0, abs(raw[i])):
                    continue
                gi = next(g for g in groups if i in g)
                gj = next(g for g in groups if j in g)
                if gi is not gj:
                    gj.extend(gi)
                    groups.remove(gi)
    for g in groups:
        if len(g) == 1:
            z, ok = polished[g[0]]
            if not converged and not ok:
                raise NoConvergence(f"Durand-Kerner did not converge in {max_iter} iterations")
            roots[g[0]] = z
        else:
            for idx, z in zip(g, _refine_cluster(c, [raw[i] for i in g], noise, solve, tol)):
                roots[idx] = z
    return roots


def quartic_roots(coeffs, tol=DK_TOL, max_iter=DK_MAX_ITER):
    """Roots of a monic quartic by Durand-Kerner with cluster recombination and Newton polish.

    Iterates closer than ``1e-3 * max(1, max|z|)`` form a cluster. A cluster whose
    mean is a root to within coefficient rounding collapses to a multiple root;
    otherwise the quartic is re-centred on the cluster, rescaled to its spread
    and solved again (up to three levels).

    Parameters
    ----------
    coeffs : sequence of complex
        ``[1, c3, c2, c1, c0]``.

    Raises
    ------
    NoConvergence
        If the iteration stalls on roots that are not part of a multiple-root cluster.
    """
    c = np.asarray(coeffs, dtype=complex)
    return tuple(_solve(c, tol, max_iter, None, 3))


def _isfinite(z):
    return math.isfinite(z.real) and math.isfinite(z.imag)


def eigenvalues_numeric(s, reference=None):
    """Eigenvalues of ``s`` from the roots of its characteristic polynomial.

    When ``reference`` (an :class:`EigenQuartet`) is given, the roots are
    reordered to match it by minimum total distance and inherit its pairing.
    """
    roots = quartic_roots(charpoly(s))
    if reference is None:
        return EigenQuartet(roots, ((0, 1), (2, 3)), 0, None)
    matched = match_to(roots, reference.values)
    return EigenQuartet(matched, reference.pairing, reference.case_label, reference.spectrum)


def match_to(values, reference):
    """Permutation of ``values`` closest to ``reference`` (min over the 4! orderings)."""
    best = min(
        itertools.permutations(values),
        key=lambda perm: sum(abs(a - b) for a, b in zip(perm, reference)),
    )
    return tuple(best)


def multiset_distance(a, b):
    """Largest matched ``|a_i - b_i|`` under the best of all permutations."""
    return min(
        max(abs(x - y) for x, y in zip(perm, b))
        for perm in itertools.permutations(a)
    )


def det_residual(s, lam):
    """``|det(S - lam I)|``; compare against ``tol * det_scale(values)``."""
    return abs(np.linalg.det(np.asarray(s) - lam * np.eye(4)))


def det_scale(values):
    """``prod(1 + |lam_i|)`` over a quartet."""
    return float(np.prod([1.0 + abs(v) for v in values]))


def spectral_collapse_report(a, tol=1e-10):
    """Compare spectra across configurations sharing a table case label.

    Returns a list of ``(case, config, reference_config, distance, same_multiset,
    same_moduli)`` tuples, one per config, with ``reference_config`` the first
    config of that case.
    """
    report = []
    refs = {}
    for cfg in all_configs():
        case = classify_case(cfg)
        q = eigenvalues_analytic(cfg, a)
        if case not in refs:
            refs[case] = (cfg, q)
        ref_cfg, ref_q = refs[case]
        dist = multiset_distance(q.values, ref_q.values)
        mod = multiset_distance(
            [complex(abs(v)) for v in q.values], [complex(abs(v)) for v in ref_q.values]
        )
        report.append((case, cfg.name, ref_cfg.name, dist, dist <= tol, mod <= tol))
    return report
