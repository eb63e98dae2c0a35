import cmath
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptscatter.errors import GrammarError, NoConvergence
from ptscatter.scattering import Amplitudes, amplitudes_closed_form
from ptscatter.spinflip import (
    TABLE1,
    DeviceConfig,
    SFKind,
    Spectrum,
    all_configs,
    build_smatrix,
    charpoly,
    classify_case,
    det_residual,
    det_scale,
    eigenvalues_analytic,
    eigenvalues_numeric,
    enumerate_configs,
    match_to,
    multiset_distance,
    placement,
    quartic_roots,
    spectral_collapse_report,
    spectrum_class,
    table1_row,
)

# printed layouts, rows/cols in [L_up, R_up, L_down, R_down]
EQ_M = (("rR", "t", None, None), ("t", "rL", None, None), (None, None, "rR", "t"), (None, None, "t", "rL"))
EQ_L0MR0 = ((None, "t", "rR", None), ("t", None, None, "rL"), ("rR", None, None, "t"), (None, "rL", "t", None))
EQ_L0M = (("rR", None, None, "t"), (None, None, "t", "rL"), (None, "t", "rR", None), ("t", "rL", None, None))

GENERIC = Amplitudes.from_complex(0.3 + 0.7j, -1.1 + 0.2j, 0.45 - 0.8j)


def cplx(bound=5.0):
    return st.complex_numbers(max_magnitude=bound, allow_nan=False, allow_infinity=False, allow_subnormal=False)


amplitude_triples = st.builds(Amplitudes.from_complex, cplx(), cplx(), cplx())
configs = st.sampled_from(all_configs())


# -- grammar ---------------------------------------------------------------------

@pytest.mark.parametrize("text,left,right", [
    ("M", None, None), ("l0m", SFKind.F0, None), (" MR2 ", None, SFKind.F2), ("L1MR2", SFKind.F1, SFKind.F2),
])
def test_parse(text, left, right):
    cfg = DeviceConfig.parse(text)
    assert (cfg.left, cfg.right) == (left, right)


@pytest.mark.parametrize("text", ["", "L3M", "MM", "R0ML0", "L0", "LM", 5, None])
def test_parse_rejects(text):
    with pytest.raises(GrammarError):
        DeviceConfig.parse(text)


@given(configs)
def test_name_round_trip(cfg):
    assert DeviceConfig.parse(cfg.name) == cfg
    assert DeviceConfig.parse(cfg.name.lower()) == cfg
    assert str(cfg) == cfg.name


def test_sixteen_configs():
    cfgs = all_configs()
    assert len(cfgs) == len(set(cfgs)) == 16
    assert sorted(c.components for c in cfgs) == [1] + [2] * 6 + [3] * 9


def test_flipper_semantics():
    assert SFKind.F0.flips_transmitted and SFKind.F0.flips_reflected
    assert SFKind.F1.flips_transmitted and not SFKind.F1.flips_reflected
    assert SFKind.F2.flips_reflected and not SFKind.F2.flips_transmitted


# -- table -----------------------------------------------------------------------

def test_table_covers_every_config_once():
    rows = enumerate_configs()
    assert len(rows) == 10
    listed = [c for r in rows for c in r.configs]
    assert sorted(listed, key=str) == all_configs()
    assert all(table1_row(c).configs.count(c) == 1 for c in listed)


def test_table_components_match_names():
    for row in TABLE1:
        assert all(c.components == row.components for c in row.configs)


@pytest.mark.parametrize("row", TABLE1, ids=lambda r: r.label)
def test_xor_rule_reproduces_case_labels(row):
    assert all(classify_case(c) == row.case for c in row.configs)


def test_spectrum_classes():
    names = {s: sorted(c.name for c in all_configs() if spectrum_class(c) is s) for s in Spectrum}
    assert names[Spectrum.UNCOUPLED] == ["L1M", "L1MR1", "M", "MR1"]
    assert names[Spectrum.CASE3_LEFT] == ["L0M", "L0MR1", "L2M", "L2MR1"]
    assert names[Spectrum.CASE3_RIGHT] == ["L1MR0", "L1MR2", "MR0", "MR2"]


# -- matrices --------------------------------------------------------------------

@pytest.mark.parametrize("name,layout", [("M", EQ_M), ("L0MR0", EQ_L0MR0), ("L0M", EQ_L0M)])
def test_recipe_matches_printed_layouts(name, layout):
    cfg = DeviceConfig.parse(name)
    assert placement(cfg) == layout
    s = build_smatrix(cfg, GENERIC)
    values = {"t": GENERIC.t, "rL": GENERIC.r_left, "rR": GENERIC.r_right, None: 0}
    assert all(s[i, j] == values[layout[i][j]] for i in range(4) for j in range(4))


@given(configs)
def test_layout_invariants(cfg):
    grid = placement(cfg)
    flat = [x for row in grid for x in row]
    assert (flat.count("t"), flat.count("rL"), flat.count("rR")) == (4, 2, 2)
    for k in range(4):
        assert sum(x is not None for x in grid[k]) == 2
        assert sum(grid[i][k] is not None for i in range(4)) == 2


def test_smatrix_is_read_only():
    s = build_smatrix(DeviceConfig(), GENERIC)
    with pytest.raises(ValueError):
        s[0, 0] = 1


def test_no_flipper_blocks_decouple_exactly():
    s = build_smatrix(DeviceConfig(), GENERIC)
    assert not s[:2, 2:].any() and not s[2:, :2].any()


def _connected(s):
    nz = np.abs(s) > 0
    seen, stack = {0}, [0]
    while stack:
        i = stack.pop()
        for j in range(4):
            if (nz[i, j] or nz[j, i]) and j not in seen:
                seen.add(j)
                stack.append(j)
    return len(seen) == 4


def test_case3_channels_are_connected():
    for cfg in all_configs():
        if classify_case(cfg) == 3:
            assert _connected(build_smatrix(cfg, GENERIC)), cfg.name


def test_l1m_decouples_into_two_blocks():
    assert not _connected(build_smatrix(DeviceConfig.parse("L1M"), GENERIC))


# -- eigenvalues -----------------------------------------------------------------

def test_uncoupled_eigenvalues_closed_form():
    a = GENERIC
    root = cmath.sqrt((a.r_right - a.r_left) ** 2 + 4 * a.t**2)
    lam = ((a.r_right + a.r_left + root) / 2, (a.r_right + a.r_left - root) / 2)
    q = eigenvalues_analytic(DeviceConfig(), a)
    assert multiset_distance(q.values, lam * 2) <= 1e-14


def test_case2_spectrum_is_symmetric_under_negation():
    q = eigenvalues_analytic(DeviceConfig.parse("L0MR0"), GENERIC)
    assert multiset_distance(q.values, [-v for v in q.values]) <= 1e-14
    assert q.case_label == 2 and q.spectrum is Spectrum.CASE2


@settings(max_examples=200, deadline=None)
@given(configs, amplitude_triples)
def test_analytic_eigenvalues_solve_det(cfg, a):
    s = build_smatrix(cfg, a)
    q = eigenvalues_analytic(cfg, a)
    scale = det_scale(q.values)
    assert all(det_residual(s, v) <= 1e-8 * scale for v in q.values)


@settings(max_examples=200, deadline=None)
@given(configs, amplitude_triples)
def test_dual_path(cfg, a):
    s = build_smatrix(cfg, a)
    q = eigenvalues_analytic(cfg, a)
    num = eigenvalues_numeric(s, reference=q)
    assert num.pairing == q.pairing and num.case_label == q.case_label
    scale = det_scale(num.values)
    assert all(det_residual(s, v) <= 1e-8 * scale for v in num.values)
    # forward agreement needs distinct eigenvalues the characteristic polynomial can resolve
    size = max(1.0, max(abs(v) for v in q.values))
    gaps = [abs(x - y) for x, y in itertools.combinations(q.values, 2)]
    if all(g == 0 or g >= 1e-3 * size for g in gaps):
        assert multiset_distance(q.values, num.values) <= 1e-8


@settings(max_examples=100, deadline=None)
@given(configs, amplitude_triples)
def test_trace_and_determinant(cfg, a):
    s = build_smatrix(cfg, a)
    vals = np.array(eigenvalues_analytic(cfg, a).values)
    assert abs(vals.sum() - np.trace(s)) <= 1e-10 * det_scale(vals)
    assert abs(np.prod(vals) - np.linalg.det(s)) <= 1e-10 * det_scale(vals)


def test_dual_path_at_physical_points(paper):
    for e in (0.4, 0.5, 0.9, 1.5):
        a = amplitudes_closed_form(e, paper)
        for cfg in all_configs():
            q = eigenvalues_analytic(cfg, a)
            assert multiset_distance(q.values, eigenvalues_numeric(build_smatrix(cfg, a)).values) <= 1e-8


# -- quartic solver --------------------------------------------------------------

def _poly(roots):
    return np.poly(roots)


@pytest.mark.parametrize("roots", [
    (1, 2, 3, 4),
    (1j, -1j, 2 + 1j, 0.5),
    (0, 0, 0, 0),
    (1, 1, -1, -1),
    (2, 2, 2, 5),
    (1e-3, 1e-3, 30, -40j),
    (1 + 1e-5, 1 - 1e-5, -2, 3j),
])
def test_quartic_known_roots(roots):
    found = quartic_roots(_poly(roots))
    scale = max(1.0, max(abs(r) for r in roots))
    assert multiset_distance(found, roots) <= 1e-7 * scale


@settings(max_examples=300, deadline=None)
@given(st.lists(cplx(10.0), min_size=4, max_size=4))
def test_quartic_residual(roots):
    c = _poly(roots)
    for z in quartic_roots(c):
        scale = (1 + max(abs(r) for r in roots)) ** 4
        assert abs(np.polyval(c, z)) <= 1e-9 * scale


def test_quartic_is_deterministic():
    c = _poly((0.3, -1 + 2j, 2j, 4))
    assert quartic_roots(c) == quartic_roots(c)


def test_quartic_iteration_budget():
    with pytest.raises(NoConvergence):
        quartic_roots(_poly((1, 2, 3, 4)), max_iter=1)


def test_charpoly_of_diagonal():
    c = charpoly(np.diag([1, 2, 3, 4]).astype(complex))
    assert np.allclose(c, _poly((1, 2, 3, 4)), atol=0)


def test_match_to_restores_order():
    ref = (1, 2j, -3, 4 + 1j)
    assert match_to(tuple(reversed(ref)), ref) == ref
    for perm in itertools.permutations(ref):
        assert multiset_distance(perm, ref) == 0


# -- spectral collapse -----------------------------------------------------------

def test_spectral_collapse_report(paper):
    a = amplitudes_closed_form(0.5, paper)
    rows = spectral_collapse_report(a)
    assert len(rows) == 16
    assert all(same_moduli for *_, same_moduli in rows)
    # multisets split along the spectrum classes; moduli always collapse
    split = {name for _, name, _, _, same, _ in rows if not same}
    assert split == {"L1M", "L1MR1", "MR1", "L1MR0", "L1MR2", "MR0", "MR2"}
