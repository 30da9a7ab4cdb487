import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from midiode.cubic import discriminant_array
from midiode.model import DomainError
from midiode.sweep import (
    FIGURES,
    SVG_MAX_CELLS,
    Dataset,
    SweepSpec,
    boundary_samples,
    emit,
    find_collisions,
    from_json,
    run,
    to_csv,
    to_json,
    to_svg,
    track_branches,
    with_grid,
    write_outputs,
)
from midiode.thetad import boundary_array

R3 = math.sqrt(3)


def line(name, value, lo=-5.0, hi=5.0, n=1001, quantity="u"):
    other = "beta_hat" if name == "k_hat" else "k_hat"
    return SweepSpec("branch_1d", {name: value}, {other: (lo, hi, n)}, quantity=quantity)


def disc_zeros_on_line(name, value):
    """Real zeros of the discriminant along a line, from its polynomial form."""
    if name == "k_hat":
        k = value
        coeffs = [-27.0, 18 * k - 4 * k**3, k * k - 4]
    else:
        b = value
        coeffs = [-4 * b, 1.0, 18 * b, -4 - 27 * b * b]
    r = np.roots(np.trim_zeros(coeffs, "f"))
    return np.sort(r[np.abs(r.imag) < 1e-7].real)


# -- spec --------------------------------------------------------------------


@pytest.mark.parametrize("kwargs", [
    dict(mode="nope"),
    dict(mode="branch_1d", range={"k_hat": (-1, 1, 1)}),
    dict(mode="branch_1d", range={"k_hat": (-1, 1, 2.5)}),
    dict(mode="branch_1d", range={"k_hat": (1, -1, 10)}),
    dict(mode="branch_1d", fixed={"k_hat": 0.0}, range={"k_hat": (-1, 1, 10)}),
    dict(mode="branch_1d", range={"k_hat": (-1, 1, 10)}, outputs=("png",)),
    dict(mode="branch_1d", range={"k_hat": (-1, 1, 10)}, quantity="phi"),
])
def test_spec_validation(kwargs):
    with pytest.raises(DomainError):
        SweepSpec(**kwargs)


def test_spec_dict_round_trip_and_unknown_keys(tmp_path):
    spec = FIGURES["fig6"]
    assert SweepSpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(DomainError):
        SweepSpec.from_dict({"mode": "branch_1d", "colour": "red"})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(DomainError):
        SweepSpec.load(bad)


def test_with_grid():
    spec = with_grid(FIGURES["fig6"], (20, 30))
    assert spec.range["beta_hat"][2] == 20 and spec.range["k_hat"][2] == 30
    assert with_grid(FIGURES["fig2"], None) is FIGURES["fig2"]


# -- branch tables -------------------------------------------------------------


def test_three_rows_per_sample():
    ds = run(line("k_hat", 0.5, n=51))
    sv = ds.column("sweep_value")
    assert len(sv) == 153
    _, counts = np.unique(sv, return_counts=True)
    assert set(counts) == {3}
    assert list(ds.column("branch_id")[:6]) == [0, 1, 2, 0, 1, 2]


def test_origin_roots():
    ds = run(line("k_hat", 0.0, n=11))
    sv = ds.column("sweep_value")
    at0 = np.isclose(sv, 0.0)
    z = np.sort_complex(ds.column("re")[at0] + 1j * ds.column("im")[at0])
    np.testing.assert_allclose(z, np.sort_complex(np.array([0, -1j, 1j])), atol=1e-14)


def test_fig2_touch_at_triple_point():
    spec = FIGURES["fig2"]
    ds = run(spec)
    lo, hi, n = spec.range["beta_hat"]
    cell = (hi - lo) / (n - 1)
    locs = [a["sweep_value"] for a in ds.annotations]
    assert locs and min(abs(x + R3 / 9) for x in locs) <= cell


@pytest.mark.parametrize("fig", ["fig2", "fig3", "fig4", "fig5"])
def test_collisions_match_discriminant_zeros(fig):
    spec = FIGURES[fig]
    (name, value), = spec.fixed.items()
    (swept, (lo, hi, n)), = spec.range.items()
    cell = (hi - lo) / (n - 1)
    expected = [z for z in disc_zeros_on_line(name, value) if lo <= z <= hi]
    found = [a["sweep_value"] for a in run(spec).annotations]
    for z in expected:
        assert min(abs(z - f) for f in found) <= cell
    for f in found:
        assert min(abs(z - f) for z in expected) <= cell


def test_fig3_collisions_on_boundary_curve():
    spec = FIGURES["fig3"]
    lo, hi, n = spec.range["k_hat"]
    cell = (hi - lo) / (n - 1)
    target = spec.fixed["beta_hat"]
    for a in run(spec).annotations:
        kc = a["sweep_value"]
        ks = np.linspace(kc - cell, kc + cell, 201)
        ks = np.append(ks, [k for k in (-R3, R3) if abs(k - kc) <= cell])
        hit = False
        for branch in boundary_array(ks):
            g = branch - target
            ok = np.isfinite(g)
            hit |= bool(np.any(np.abs(g[ok]) <= 1e-12) or np.any(np.diff(np.sign(g[ok])) != 0))
        assert hit


@settings(max_examples=30, deadline=None)
@given(st.floats(-4, 4))
def test_branch_continuity_away_from_collisions(value):
    spec = line("beta_hat", value, n=401)
    ds = run(spec)
    s = np.unique(ds.column("sweep_value"))
    z = (ds.column("re") + 1j * ds.column("im")).reshape(-1, 3)
    events, _ = find_collisions("k_hat", s, value)
    step = np.abs(np.diff(z, axis=0)).max(axis=1)
    quiet = np.ones(len(step), bool)
    for _, i, _ in events:
        quiet[max(0, i - 3):i + 3] = False
    h = s[1] - s[0]
    # roots move with bounded speed away from the discriminant zeros
    assert np.all(step[quiet] <= 50 * h)


def test_tracking_prefers_continuation():
    t = np.linspace(0, 1, 20)
    roots = np.stack([t, 1 + t, -1 - t], axis=1).astype(complex)
    scrambled = roots.copy()
    scrambled[1::2] = scrambled[1::2][:, [2, 0, 1]]
    out, dist = track_branches(scrambled)
    np.testing.assert_allclose(out, roots)
    assert dist == pytest.approx(3 * (t[-1] - t[0]))


@pytest.mark.parametrize("fig", ["fig2", "fig3", "fig5"])
def test_reversal_gives_same_pairing_distance(fig):
    spec = FIGURES[fig]
    (name, value), = spec.fixed.items()
    (swept, (lo, hi, n)), = spec.range.items()
    fwd = run(spec).meta["pairing_distance"]
    rev_spec = SweepSpec("branch_1d", {name: -value}, {swept: (-hi, -lo, n)})
    rev = run(rev_spec).meta["pairing_distance"]
    assert rev == pytest.approx(fwd, rel=1e-9)


def test_odd_even_symmetry_on_k_zero_line():
    ds = run(line("k_hat", 0.0, n=201))
    z = (ds.column("re") + 1j * ds.column("im")).reshape(-1, 3)
    flipped = -z[::-1]
    for a, b in zip(z, flipped):
        np.testing.assert_allclose(np.sort_complex(a), np.sort_complex(b), atol=1e-12)


def test_theta_quantity_is_square():
    u = run(line("k_hat", 1.0, n=21))
    th = run(line("k_hat", 1.0, n=21, quantity="theta"))
    zu = u.column("re") + 1j * u.column("im")
    zt = th.column("re") + 1j * th.column("im")
    np.testing.assert_allclose(zt, zu * zu, atol=1e-14)


# -- surfaces and regions --------------------------------------------------------


def test_surface_symmetry():
    ds = run(with_grid(FIGURES["fig6"], 41))
    n = ds.meta["shape"][0]
    z = (ds.column("re") + 1j * ds.column("im")).reshape(n, n, 3)
    mirrored = -z[::-1, ::-1]
    np.testing.assert_allclose(np.sort_complex(z.reshape(-1, 3)),
                               np.sort_complex(mirrored.reshape(-1, 3)), atol=1e-10)


def test_surface_single_sheet_cells():
    ds = run(with_grid(FIGURES["fig6"], 60))
    k = ds.column("k_hat")[::3]
    b = ds.column("beta_hat")[::3]
    phys_real = np.abs(ds.column("im")).reshape(-1, 3) <= 1e-9
    one_sheet = phys_real.sum(axis=1) == 1
    np.testing.assert_array_equal(one_sheet, discriminant_array(k, b) < 0)


def test_surface_fold_annotations_near_boundary():
    spec = with_grid(FIGURES["fig6"], 200)
    ds = run(spec)
    lo, hi, n = spec.range["beta_hat"]
    cell = (hi - lo) / (n - 1)
    folds = ds.annotations
    assert folds
    k = np.array([a["k_hat"] for a in folds])
    b = np.array([a["beta_hat"] for a in folds])
    minus, plus = boundary_array(k)
    gap = np.fmin(np.abs(b - minus), np.abs(b - plus))
    assert np.all(gap <= cell)


def region(n=201, **kw):
    return run(SweepSpec("region_map", {}, {"k_hat": (-5, 5, n), "beta_hat": (-5, 5, n)}, **kw))


def test_region_map_fields():
    ds = region()
    k, b = ds.column("k_hat"), ds.column("beta_hat")
    origin = (k == 0) & (b == 0)
    assert ds.column("n_real_roots")[origin][0] == 1
    assert ds.column("delta_sign")[origin][0] == -1
    p8 = ds.column("prop8").astype(bool)
    assert np.all(b[p8] < 0)
    p10 = ds.column("prop10").astype(bool)
    assert p10.any() and np.all(b[p10] == 0) and np.all(k[p10] ** 2 >= 4)
    s = ds.column("s_value")
    assert np.all(np.isnan(s) == (ds.column("delta_sign") >= 0))


def test_region_boundary_within_one_cell():
    spec = SweepSpec("region_map", {}, {"k_hat": (-5, 5, 200), "beta_hat": (-5, 5, 200)})
    ds = run(spec)
    cell = 10 / 199
    k = np.array([a["k_hat"] for a in ds.annotations])
    b = np.array([a["beta_hat"] for a in ds.annotations])
    minus, plus = boundary_array(k)
    assert np.all(np.fmin(np.abs(b - minus), np.abs(b - plus)) <= cell)
    # every column with k^2 > 3 sees both boundary branches inside the window
    ks = np.unique(k)
    assert np.all(np.abs(ks) >= R3 - cell)


def test_boundary_curve_mode():
    ds = run(FIGURES["fig12"])
    k = ds.column("k_hat")
    inside = np.abs(k) < R3 - 1e-9
    assert np.all(np.isnan(ds.column("beta_minus")[inside]))
    m, p = ds.column("beta_minus")[~inside], ds.column("beta_plus")[~inside]
    kk = k[~inside]
    scale = np.maximum(1, kk**6)
    assert np.all(np.abs(discriminant_array(kk, m)) <= 1e-9 * scale)
    assert np.all(np.abs(discriminant_array(kk, p)) <= 1e-9 * scale)


def test_boundary_samples():
    ks = boundary_samples(500)
    assert len(ks) == 500 and np.all(np.abs(ks) >= R3) and np.all(np.abs(ks) <= 5)


# -- profiles -----------------------------------------------------------------------


def test_profile_modes():
    pot = run(SweepSpec("potential_profile", {"gamma": 1.0, "j_x": 1.0}, {"x": (0.0, 1.0, 11)}))
    assert pot.columns == ["x", "D", "dD"] and pot.column("D")[0] == 0
    uv = run(SweepSpec("uv_profile", {"gamma": 0.5, "j_x": 1.0}, {"x": (0.0, 0.5, 2)}))
    r = uv.column("u") ** 2 - 1 - uv.column("v") ** 2 - uv.column("D")
    assert np.max(np.abs(r)) <= 1e-5
    tan = run(SweepSpec("tangent_scan", {"theta_L": 1.0, "j_x": 1.0, "k1": 0.0, "k2": 40.0},
                        {"x": (0.0, 0.2, 5)}))
    assert tan.column("theta")[0] == 0
    with pytest.raises(DomainError):
        run(SweepSpec("potential_profile", {"gamma": 1.0}))


# -- emission ------------------------------------------------------------------------


def small():
    return run(line("beta_hat", -R3 / 9, lo=-3, hi=-1, n=41))


def test_csv_layout():
    ds = small()
    lines = to_csv(ds).splitlines()
    assert lines[0] == "sweep_value,branch_id,re,im,admissible,physical"
    assert len(lines) == 1 + 3 * 41
    assert lines[1].split(",")[4] in ("0", "1")


def test_csv_blank_for_missing():
    text = to_csv(run(SweepSpec("boundary_curve", {}, {"k_hat": (-1.0, 1.0, 3)})))
    assert text.splitlines()[1].endswith(",,")


def test_json_round_trip_and_determinism():
    ds = small()
    text = to_json(ds)
    assert from_json(text) == ds
    assert to_json(run(line("beta_hat", -R3 / 9, lo=-3, hi=-1, n=41))) == text
    assert json.loads(text)["kind"] == "branch_table"
    reg = region(n=21)
    assert from_json(to_json(reg)) == reg


def test_svg_structure():
    ds = small()
    svg = to_svg(ds)
    assert svg.startswith("<svg") or svg.startswith("<?xml")
    for b in range(3):
        for part in ("re", "im"):
            assert svg.count(f'data-series="branch{b}-{part}"') == 1
    assert 'class="axis-label"' in svg and 'class="tick"' in svg


def test_svg_raster_capped():
    svg = to_svg(region(n=401))
    assert svg.count('class="cell"') <= SVG_MAX_CELLS**2


def test_write_outputs(tmp_path):
    ds = small()
    paths = write_outputs(ds, tmp_path / "fig", ("csv", "json", "svg"))
    assert sorted(p.name for p in paths) == ["fig.csv", "fig.json", "fig.svg"]
    assert (tmp_path / "fig.csv").read_text() == emit(ds, "csv")
    assert Dataset.from_dict(json.loads((tmp_path / "fig.json").read_text())) == ds
