"""Dataset engine for branch tables, surfaces, region rasters and profiles.

A run is described by a SweepSpec (mode, fixed bindings, swept ranges,
output formats). Every mode returns a Dataset, which emits to CSV, JSON or
a small hand-written SVG. Emission is byte-deterministic for a fixed dataset.
"""

from __future__ import annotations

import io
import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .cubic import discriminant_array, roots_array, zero_band
from .model import DomainError
from .thetad import ADMIT_TOL, boundary_array, classify_array

MODES = ("branch_1d", "surface_2d", "region_map", "boundary_curve",
         "potential_profile", "uv_profile", "tangent_scan")
FORMATS = ("csv", "json", "svg")
PLANE_NAMES = ("k_hat", "beta_hat")
DEFAULT_1D = 1001
DEFAULT_2D = 400
TOUCH_TOL = 1e-10
SVG_MAX_CELLS = 200

_PERMS = list(itertools.permutations(range(3)))


# -- spec ---------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    mode: str
    fixed: dict = field(default_factory=dict)
    range: dict = field(default_factory=dict)
    outputs: tuple = ("csv",)
    quantity: str = "u"
    focus: str | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"unknown mode {self.mode!r}")
        for name, r in self.range.items():
            if len(r) != 3:
                raise DomainError(f"range for {name} must be [min, max, count]")
            lo, hi, n = r
            if int(n) != n or n < 2:
                raise DomainError(f"count for {name} must be an integer >= 2")
            if not lo < hi:
                raise DomainError(f"range for {name} needs min < max")
        overlap = set(self.fixed) & set(self.range)
        if overlap:
            raise DomainError(f"parameters both fixed and swept: {sorted(overlap)}")
        for fmt in self.outputs:
            if fmt not in FORMATS:
                raise DomainError(f"unknown output format {fmt!r}")
        if self.quantity not in ("u", "theta"):
            raise DomainError("quantity must be 'u' or 'theta'")

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        unknown = set(d) - {"mode", "fixed", "range", "outputs", "quantity", "focus"}
        if unknown:
            raise DomainError(f"unknown sweep keys: {sorted(unknown)}")
        if "mode" not in d:
            raise DomainError("sweep config needs a mode")
        rng = {k: (float(v[0]), float(v[1]), int(v[2])) if len(v) == 3 else tuple(v)
               for k, v in d.get("range", {}).items()}
        return cls(
            mode=d["mode"],
            fixed={k: float(v) for k, v in d.get("fixed", {}).items()},
            range=rng,
            outputs=tuple(d.get("outputs", ["csv"])),
            quantity=d.get("quantity", "u"),
            focus=d.get("focus"),
        )

    @classmethod
    def load(cls, path) -> "SweepSpec":
        text = Path(path).read_text()
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DomainError(f"sweep config is not valid JSON: {exc}") from None
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "fixed": dict(sorted(self.fixed.items())),
            "range": {k: list(v) for k, v in sorted(self.range.items())},
            "outputs": list(self.outputs),
            "quantity": self.quantity,
            "focus": self.focus,
        }


# -- dataset ----------------------------------------------------------------------


def _as_list(a: np.ndarray) -> list:
    """Plain Python scalars, with NaN replaced by None."""
    if a.dtype.kind == "f":
        out = a.tolist()
        for i in np.flatnonzero(np.isnan(a)).tolist():
            out[i] = None
        return out
    return a.tolist()


@dataclass
class Dataset:
    """Rows of plain Python scalars; NaN is stored as None."""

    kind: str
    columns: list
    rows: list
    meta: dict = field(default_factory=dict)
    annotations: list = field(default_factory=list)

    @classmethod
    def from_columns(cls, kind, cols: dict, meta=None, annotations=None):
        names = list(cols)
        arrays = [np.asarray(cols[n]).ravel() for n in names]
        rows = [list(r) for r in zip(*map(_as_list, arrays))]
        return cls(kind, names, rows, meta or {}, annotations or [])

    def column(self, name) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([np.nan if r[i] is None else r[i] for r in self.rows], dtype=float)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "columns": self.columns, "rows": self.rows,
                "meta": self.meta, "annotations": self.annotations}

    @classmethod
    def from_dict(cls, d: dict) -> "Dataset":
        return cls(d["kind"], list(d["columns"]), [list(r) for r in d["rows"]],
                   d.get("meta", {}), d.get("annotations", []))


# -- branch tracking ------------------------------------------------------------------


def _line(spec: SweepSpec):
    if len(spec.range) != 1:
        raise DomainError("branch_1d needs exactly one swept parameter")
    (name, (lo, hi, n)), = spec.range.items()
    if name not in PLANE_NAMES:
        raise DomainError(f"swept parameter must be one of {PLANE_NAMES}")
    other = PLANE_NAMES[1 - PLANE_NAMES.index(name)]
    if other not in spec.fixed:
        raise DomainError(f"{other} must be fixed")
    return name, _axis(lo, hi, n), spec.fixed[other]


def _axis(lo, hi, n):
    x = np.linspace(lo, hi, int(n))
    if lo == -hi:
        # exact antisymmetry so that mirrored grid points are exact negatives
        x = (x - x[::-1]) / 2
    return x


def _plane(name, s, fixed):
    s = np.asarray(s, dtype=float)
    return (s, np.full_like(s, fixed)) if name == "k_hat" else (np.full_like(s, fixed), s)


def _disc_on_line(name, fixed):
    def f(s):
        k, b = _plane(name, s, fixed)
        return float(discriminant_array(k, b))
    return f


def find_collisions(name, s, fixed):
    """Locations along the line where the discriminant vanishes.

    Returns (events, reseed) with events a list of (location, index, kind)
    and reseed the set of sample indices where labels restart from sort order.
    """
    k, b = _plane(name, s, fixed)
    disc = discriminant_array(k, b)
    band = zero_band(k, b)
    sign = np.where(np.abs(disc) < band, 0, np.sign(disc))
    f = _disc_on_line(name, fixed)
    events, reseed = [], set()
    n = len(s)
    for i in range(n):
        if sign[i] == 0:
            events.append((float(s[i]), i, "zero"))
            reseed.update((i, i + 1))
        elif i > 0 and sign[i - 1] * sign[i] < 0:
            loc = brentq(f, s[i - 1], s[i], xtol=1e-15, rtol=1e-15)
            events.append((float(loc), i, "crossing"))
            reseed.add(i)
        elif 0 < i < n - 1 and sign[i - 1] == sign[i] == sign[i + 1] != 0:
            a0, a1, a2 = abs(disc[i - 1]), abs(disc[i]), abs(disc[i + 1])
            if a1 <= a0 and a1 <= a2:
                res = minimize_scalar(lambda t: abs(f(t)), bounds=(s[i - 1], s[i + 1]),
                                      method="bounded", options={"xatol": 1e-13})
                kk, bb = _plane(name, res.x, fixed)
                scale = max(1.0, float(kk) ** 6, float(bb) ** 2)
                if abs(f(res.x)) <= TOUCH_TOL * scale:
                    events.append((float(res.x), i, "touch"))
                    reseed.update((i, i + 1))
    reseed.discard(n)
    return events, reseed


def track_branches(roots, reseed=()):
    """Order roots along a sweep by minimal total pairing distance.

    ``roots`` has shape (n, 3). Returns (tracked, pairing_distance) where the
    distance sums the optimal matching cost over consecutive samples.
    """
    roots = np.asarray(roots, dtype=complex)
    out = roots.copy()
    total = 0.0
    for i in range(1, len(roots)):
        prev, cur = out[i - 1], roots[i]
        costs = [float(np.abs(cur[list(p)] - prev).sum()) for p in _PERMS]
        best = int(np.argmin(costs))
        total += costs[best]
        if i not in reseed:
            out[i] = cur[list(_PERMS[best])]
    return out, total


def sweep_1d(spec: SweepSpec) -> Dataset:
    name, s, fixed = _line(spec)
    k, b = _plane(name, s, fixed)
    roots, _, _, _ = roots_array(k, b)
    events, reseed = find_collisions(name, s, fixed)
    tracked, dist = track_branches(roots, reseed)

    u = tracked
    admissible = u.real >= -ADMIT_TOL
    physical = admissible & (np.abs(u.imag) <= ADMIT_TOL * np.maximum(1.0, np.abs(u)))
    val = u * u if spec.quantity == "theta" else u
    n = len(s)
    cols = {
        "sweep_value": np.repeat(s, 3),
        "branch_id": np.tile(np.arange(3), n),
        "re": val.real.ravel(),
        "im": val.imag.ravel(),
        "admissible": admissible.ravel(),
        "physical": physical.ravel(),
    }
    annotations = [
        {"type": "collision", "kind": kind, "sweep_value": loc, "index": i}
        for loc, i, kind in sorted(events)
    ]
    meta = {
        "mode": "branch_1d",
        "quantity": spec.quantity,
        "swept": name,
        "fixed": {k_: v for k_, v in sorted(spec.fixed.items())},
        "count": n,
        "range": [float(s[0]), float(s[-1])],
        "pairing_distance": dist,
    }
    return Dataset.from_columns("branch_table", cols, meta, annotations)


# -- 2-D products --------------------------------------------------------------------


def _grid(spec: SweepSpec):
    missing = [p for p in PLANE_NAMES if p not in spec.range]
    if missing:
        raise DomainError(f"{spec.mode} needs ranges for {PLANE_NAMES}")
    kx = _axis(*spec.range["k_hat"])
    bx = _axis(*spec.range["beta_hat"])
    K, B = np.meshgrid(kx, bx, indexing="ij")
    return kx, bx, K, B


def fold_lines(kx, bx, sign):
    """Midpoints between adjacent beta cells whose discriminant signs differ."""
    out = []
    for i, k in enumerate(kx):
        col = sign[i]
        for j in range(len(bx) - 1):
            if col[j] != col[j + 1]:
                out.append({"type": "fold", "k_hat": float(k), "beta_hat": float((bx[j] + bx[j + 1]) / 2)})
    return out


def sweep_2d(spec: SweepSpec) -> Dataset:
    kx, bx, K, B = _grid(spec)
    roots, disc, _, _ = roots_array(K, B)
    sign = np.where(np.abs(disc) < zero_band(K, B), 0, np.sign(disc))
    u = roots
    admissible = u.real >= -ADMIT_TOL
    physical = admissible & (np.abs(u.imag) <= ADMIT_TOL * np.maximum(1.0, np.abs(u)))
    val = u * u if spec.quantity == "theta" else u
    cols = {
        "k_hat": np.repeat(K.ravel(), 3),
        "beta_hat": np.repeat(B.ravel(), 3),
        "branch_id": np.tile(np.arange(3), K.size),
        "re": val.real.ravel(),
        "im": val.imag.ravel(),
        "admissible": admissible.ravel(),
        "physical": physical.ravel(),
    }
    meta = {
        "mode": "surface_2d",
        "quantity": spec.quantity,
        "shape": [len(kx), len(bx)],
        "k_range": [float(kx[0]), float(kx[-1])],
        "beta_range": [float(bx[0]), float(bx[-1])],
    }
    return Dataset.from_columns("surface", cols, meta, fold_lines(kx, bx, sign))


def region_map(spec: SweepSpec) -> Dataset:
    kx, bx, K, B = _grid(spec)
    f = classify_array(K, B)
    cols = {
        "k_hat": K,
        "beta_hat": B,
        "delta_sign": f["delta_sign"].astype(int),
        "n_real_roots": f["n_real_roots"].astype(int),
        "n_physical": f["n_physical"].astype(int),
        "prop8": f["prop8_applies"],
        "prop9": f["prop9_applies"],
        "prop10": f["prop10_boundary"],
        "s_value": f["s_value"],
    }
    meta = {
        "mode": "region_map",
        "shape": [len(kx), len(bx)],
        "k_range": [float(kx[0]), float(kx[-1])],
        "beta_range": [float(bx[0]), float(bx[-1])],
        "focus": spec.focus,
    }
    return Dataset.from_columns("region_map", cols, meta, fold_lines(kx, bx, f["delta_sign"]))


def boundary_curve(spec: SweepSpec) -> Dataset:
    lo, hi, n = spec.range.get("k_hat", (-5.0, 5.0, DEFAULT_1D))
    k = _axis(lo, hi, n)
    minus, plus = boundary_array(k)
    meta = {"mode": "boundary_curve", "count": int(n), "range": [float(k[0]), float(k[-1])]}
    return Dataset.from_columns("boundary_curve", {"k_hat": k, "beta_minus": minus, "beta_plus": plus}, meta)


def boundary_samples(n: int = 500, k_max: float = 5.0) -> np.ndarray:
    """n values of k covering [-k_max, -sqrt 3] and [sqrt 3, k_max] evenly."""
    half = np.linspace(math.sqrt(3), k_max, n // 2)
    return np.concatenate([-half[::-1], half])


# -- profiles ---------------------------------------------------------------------------


def _require(spec, *names):
    missing = [n for n in names if n not in spec.fixed]
    if missing:
        raise DomainError(f"{spec.mode} needs fixed values for {missing}")
    return [spec.fixed[n] for n in names]


def _x_range(spec, default_end):
    lo, hi, n = spec.range.get("x", (0.0, default_end, DEFAULT_1D))
    return np.linspace(lo, hi, int(n))


def potential_profile(spec: SweepSpec) -> Dataset:
    from .potential import SUPERCRITICAL, build_profile, slope_D

    gamma, j_x = _require(spec, "gamma", "j_x")
    prof = build_profile(gamma, j_x, n=64)
    x = _x_range(spec, prof.x_end)
    if prof.case != SUPERCRITICAL and x[-1] > prof.x_end:
        prof = build_profile(gamma, j_x, x_end=float(x[-1]), n=64)
    D = prof.at(x)
    dD = prof.slope_at(x) if prof.case == SUPERCRITICAL else slope_D(D, j_x, gamma)
    meta = {"mode": "potential_profile", "gamma": gamma, "j_x": j_x, "case": prof.case,
            "half_period": prof.a_half_period}
    return Dataset.from_columns("potential_profile", {"x": x, "D": D, "dD": dD}, meta)


def uv_profile(spec: SweepSpec) -> Dataset:
    from .potential import build_profile
    from .uvsolve import default_interval, solve_uv

    gamma, j_x = _require(spec, "gamma", "j_x")
    alpha = spec.fixed.get("alpha", 0.0)
    beta = spec.fixed.get("beta", math.sqrt(2 * j_x * gamma) if gamma >= 0 else 0.0)
    prof = build_profile(gamma, j_x, n=64)
    if "x" in spec.range:
        x_end = spec.range["x"][1]
    else:
        x_end = default_interval(prof, 0.1)
    uv = solve_uv(prof, alpha, beta, x_end=x_end)
    D = prof.at(uv.x)
    meta = {"mode": "uv_profile", "gamma": gamma, "j_x": j_x, "alpha": alpha, "beta": beta,
            "delta": uv.delta_contraction, "contraction": uv.contraction_L}
    cols = {"x": uv.x, "u": uv.u, "v": uv.v, "du": uv.du, "dv": uv.dv, "D": D}
    return Dataset.from_columns("uv_profile", cols, meta)


def tangent_scan(spec: SweepSpec) -> Dataset:
    from .tangent import build_model, first_pole, theta_tangent

    theta_L, j_x, k1, k2 = _require(spec, "theta_L", "j_x", "k1", "k2")
    sign = int(spec.fixed.get("branch_sign", 1))
    model = build_model(theta_L, j_x, k1, k2, branch_sign=sign)
    x = _x_range(spec, 1.0)
    th = theta_tangent(model, x)
    meta = {"mode": "tangent_scan", "theta_L": theta_L, "j_x": j_x, "k1": k1, "k2": k2,
            "branch_sign": sign, "R": model.R_L, "first_pole": first_pole(model)}
    return Dataset.from_columns("tangent_scan", {"x": x, "theta": th}, meta)


_RUNNERS = {
    "branch_1d": sweep_1d,
    "surface_2d": sweep_2d,
    "region_map": region_map,
    "boundary_curve": boundary_curve,
    "potential_profile": potential_profile,
    "uv_profile": uv_profile,
    "tangent_scan": tangent_scan,
}


def run(spec: SweepSpec) -> Dataset:
    return _RUNNERS[spec.mode](spec)


# -- figure presets -------------------------------------------------------------------------

_R3 = math.sqrt(3)
_LINES = [("k_hat", -_R3), ("beta_hat", -_R3 / 9), ("k_hat", 0.0), ("beta_hat", 0.0)]


def _line_spec(fixed_name, fixed_value, quantity):
    swept = PLANE_NAMES[1 - PLANE_NAMES.index(fixed_name)]
    return SweepSpec("branch_1d", {fixed_name: fixed_value}, {swept: (-5.0, 5.0, DEFAULT_1D)},
                     ("csv", "json", "svg"), quantity)


def _plane_range(n):
    return {"k_hat": (-5.0, 5.0, n), "beta_hat": (-5.0, 5.0, n)}


FIGURES = {}
for _i, (_name, _value) in enumerate(_LINES):
    FIGURES[f"fig{_i + 2}"] = _line_spec(_name, _value, "u")
    FIGURES[f"fig{_i + 7}"] = _line_spec(_name, _value, "theta")
FIGURES["fig6"] = SweepSpec("surface_2d", {}, _plane_range(DEFAULT_2D), ("csv", "json", "svg"), "u")
FIGURES["fig11"] = SweepSpec("surface_2d", {}, _plane_range(DEFAULT_2D), ("csv", "json", "svg"), "theta")
FIGURES["fig12"] = SweepSpec("boundary_curve", {}, {"k_hat": (-5.0, 5.0, DEFAULT_1D)}, ("csv", "json", "svg"))
# odd counts put beta = 0 on the grid, where the three-real-root flag lives
FIGURES["fig13"] = SweepSpec("region_map", {}, _plane_range(DEFAULT_2D + 1), ("csv", "json", "svg"), focus="negative")
FIGURES["fig14"] = SweepSpec("region_map", {}, _plane_range(DEFAULT_2D + 1), ("csv", "json", "svg"), focus="positive")
FIGURES = dict(sorted(FIGURES.items(), key=lambda kv: int(kv[0][3:])))


def with_grid(spec: SweepSpec, grid) -> SweepSpec:
    """Copy of spec with swept counts replaced by grid (an int or an (n, m) pair)."""
    if grid is None:
        return spec
    counts = list(grid) if isinstance(grid, (tuple, list)) else [grid]
    rng = {}
    for i, (name, (lo, hi, _)) in enumerate(sorted(spec.range.items())):
        rng[name] = (lo, hi, int(counts[min(i, len(counts) - 1)]))
    return SweepSpec(spec.mode, dict(spec.fixed), rng, spec.outputs, spec.quantity, spec.focus)


# -- emission ------------------------------------------------------------------------------


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    return "%.17g" % v


def to_csv(ds: Dataset) -> str:
    buf = io.StringIO()
    buf.write(",".join(ds.columns) + "\n")
    for r in ds.rows:
        buf.write(",".join(map(_fmt, r)) + "\n")
    return buf.getvalue()


def to_json(ds: Dataset) -> str:
    return json.dumps(ds.to_dict(), sort_keys=True, allow_nan=False, separators=(",", ":")) + "\n"


def from_json(text: str) -> Dataset:
    return Dataset.from_dict(json.loads(text))


_W, _H, _PAD = 640, 480, 60
_PALETTE = ["#d0d0d0", "#4575b4", "#91bfdb", "#fee090", "#fc8d59", "#d73027", "#1a9850"]
_LINE_COLORS = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"]


class _Frame:
    def __init__(self, xlo, xhi, ylo, yhi):
        if not xhi > xlo:
            xhi = xlo + 1
        if not yhi > ylo:
            yhi = ylo + 1
        self.xlo, self.xhi, self.ylo, self.yhi = xlo, xhi, ylo, yhi

    def px(self, x):
        return _PAD + (x - self.xlo) / (self.xhi - self.xlo) * (_W - 2 * _PAD)

    def py(self, y):
        return _H - _PAD - (y - self.ylo) / (self.yhi - self.ylo) * (_H - 2 * _PAD)


def _finite_range(*arrays):
    vals = np.concatenate([np.asarray(a, dtype=float).ravel() for a in arrays])
    vals = vals[np.isfinite(vals)]
    if vals.size == 0:
        return 0.0, 1.0
    return float(vals.min()), float(vals.max())


def _axes(fr: _Frame, xlabel, ylabel, title):
    out = [
        f'<rect x="{_PAD}" y="{_PAD}" width="{_W - 2 * _PAD}" height="{_H - 2 * _PAD}" fill="none" stroke="black"/>',
        f'<text class="axis-label" x="{_W / 2:.1f}" y="{_H - 15}" text-anchor="middle">{xlabel}</text>',
        f'<text class="axis-label" x="15" y="{_H / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 15 {_H / 2:.1f})">{ylabel}</text>',
        f'<text class="title" x="{_W / 2:.1f}" y="30" text-anchor="middle">{title}</text>',
    ]
    for v in np.linspace(fr.xlo, fr.xhi, 5):
        out.append(f'<text class="tick" x="{fr.px(v):.1f}" y="{_H - _PAD + 18}" text-anchor="middle">{v:.3g}</text>')
    for v in np.linspace(fr.ylo, fr.yhi, 5):
        out.append(f'<text class="tick" x="{_PAD - 6}" y="{fr.py(v) + 4:.1f}" text-anchor="end">{v:.3g}</text>')
    return out


def _polyline(fr, x, y, color, label):
    pts = " ".join(f"{fr.px(a):.2f},{fr.py(b):.2f}" for a, b in zip(x, y) if np.isfinite(a) and np.isfinite(b))
    return f'<polyline data-series="{label}" fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>'


def _series(ds, xname, series):
    x = ds.column(xname)
    ys = {label: ds.column(col) for label, col in series}
    fr = _Frame(*_finite_range(x), *_finite_range(*ys.values()))
    return x, ys, fr


def _svg_lines(ds, xname, series, ylabel):
    x, ys, fr = _series(ds, xname, series)
    body = _axes(fr, xname, ylabel, ds.kind)
    for i, (label, y) in enumerate(ys.items()):
        body.append(_polyline(fr, x, y, _LINE_COLORS[i % len(_LINE_COLORS)], label))
    return body


def _svg_branches(ds):
    s = ds.column("sweep_value")
    bid = ds.column("branch_id").astype(int)
    re, im = ds.column("re"), ds.column("im")
    fr = _Frame(*_finite_range(s), *_finite_range(re, im))
    body = _axes(fr, ds.meta.get("swept", "sweep_value"), ds.meta.get("quantity", "u"), ds.kind)
    for b in range(3):
        m = bid == b
        body.append(_polyline(fr, s[m], re[m], _LINE_COLORS[b], f"branch{b}-re"))
        body.append(_polyline(fr, s[m], im[m], _LINE_COLORS[b + 3], f"branch{b}-im"))
    for a in ds.annotations:
        v = a["sweep_value"]
        body.append(f'<line class="collision" x1="{fr.px(v):.2f}" y1="{_PAD}" x2="{fr.px(v):.2f}" '
                    f'y2="{_H - _PAD}" stroke="gray" stroke-dasharray="4,3"/>')
    return body


def _raster_values(ds):
    if ds.kind == "surface":
        phys = ds.column("physical").reshape(-1, 3)
        return phys.sum(axis=1)
    values = ds.column("n_physical")
    focus = ds.meta.get("focus")
    if focus:
        sign = ds.column("delta_sign")
        keep = sign < 0 if focus == "negative" else sign > 0
        values = np.where(keep, values + 1, 0)
    return values


def _svg_raster(ds):
    nk, nb = ds.meta["shape"]
    step = 3 if ds.kind == "surface" else 1
    k = ds.column("k_hat")[::step].reshape(nk, nb)
    b = ds.column("beta_hat")[::step].reshape(nk, nb)
    val = _raster_values(ds).reshape(nk, nb)
    si = max(1, math.ceil(nk / SVG_MAX_CELLS))
    sj = max(1, math.ceil(nb / SVG_MAX_CELLS))
    k, b, val = k[::si, ::sj], b[::si, ::sj], val[::si, ::sj]
    kx, bx = k[:, 0], b[0, :]
    fr = _Frame(float(kx[0]), float(kx[-1]), float(bx[0]), float(bx[-1]))
    w = (_W - 2 * _PAD) / len(kx)
    h = (_H - 2 * _PAD) / len(bx)
    body = []
    for i in range(len(kx)):
        for j in range(len(bx)):
            c = _PALETTE[int(val[i, j]) % len(_PALETTE)]
            x = _PAD + i * w
            y = _H - _PAD - (j + 1) * h
            body.append(f'<rect class="cell" x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" height="{h:.2f}" fill="{c}"/>')
    body += _axes(fr, "k_hat", "beta_hat", ds.kind)
    return body


def to_svg(ds: Dataset) -> str:
    if ds.kind == "branch_table":
        body = _svg_branches(ds)
    elif ds.kind in ("surface", "region_map"):
        body = _svg_raster(ds)
    elif ds.kind == "boundary_curve":
        body = _svg_lines(ds, "k_hat", [("beta_minus", "beta_minus"), ("beta_plus", "beta_plus")], "beta_hat")
    else:
        xname = ds.columns[0]
        body = _svg_lines(ds, xname, [(c, c) for c in ds.columns[1:]], "value")
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
            f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="11">')
    return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>', *body, "</svg>"]) + "\n"


_EMITTERS = {"csv": to_csv, "json": to_json, "svg": to_svg}


def emit(ds: Dataset, fmt: str, path=None) -> str:
    """Render ds in the given format; also write it when path is given."""
    if fmt not in _EMITTERS:
        raise DomainError(f"unknown output format {fmt!r}")
    text = _EMITTERS[fmt](ds)
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def write_outputs(ds: Dataset, base, formats) -> list[Path]:
    """Write ds as base.<fmt> for each format; returns the paths."""
    base = Path(base)
    paths = []
    for fmt in formats:
        p = base.with_suffix("." + fmt)
        emit(ds, fmt, p)
        paths.append(p)
    return paths
