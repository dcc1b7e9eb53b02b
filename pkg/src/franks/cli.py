"""Command-line experiment harness.

    franks run <config> [--key value ...]
    franks list

A config is a flat ``key = value`` file; ``#`` starts a comment and lists
are comma-separated. Command-line ``--key value`` pairs override the file.
Every run writes one CSV (header plus rows, floats to 17 significant
digits) and exits 0 if every row passes, 1 if some row fails, 2 on a
malformed config and 3 when the library raises.
"""

import argparse
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, FranksError, OutOfBall
from .rng import XorShift64Star

# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

FLOAT, INT, STR, FLOATS = "float", "int", "str", "floats"

KEYS = {
    "experiment": STR,
    "output": STR,
    "seed": INT,
    "curvature": STR,
    "curvature_value": FLOAT,
    "curvature_table": STR,
    "lambdas": FLOATS,
    "omega": FLOAT,
    "n": INT,
    "epsilon": FLOAT,
    "delta": FLOAT,
    "d": FLOAT,
    "eta": FLOATS,
    "deltas": FLOATS,
    "measures": FLOATS,
    "height": FLOAT,
    "count": INT,
    "profiles": INT,
    "radius": FLOAT,
    "scheme": STR,
    "family": STR,
    "t_points": INT,
    "x_points": INT,
}

# experiment -> (backing module, defaults)
EXPERIMENTS = {
    "invariants": ("franks.jacobi", {
        "curvature": "zero", "n": 1, "profiles": 20, "seed": 1}),
    "surface-realize": ("franks.surface", {
        "curvature": "sin2pi", "epsilon": 0.01, "count": 20, "radius": 5e-4, "seed": 1}),
    "highdim-realize": ("franks.highdim", {
        "curvature": "diag", "lambdas": [1.0, -1.0], "epsilon": 2.0, "delta": 0.2,
        "count": 10, "radius": 1e-5, "seed": 1}),
    "metric-bounds": ("franks.metric", {
        "curvature": "sin2pi", "epsilon": 0.01, "family": "S1",
        "eta": [0.1, 0.05, 0.025], "t_points": 513, "x_points": 513}),
    "scaling": ("franks.highdim", {
        "curvature": "diag", "lambdas": [1.0, -1.0], "scheme": "I", "epsilon": 0.01,
        "deltas": [0.3, 0.2, 0.13]}),
    "avoidance": ("franks.surface", {
        "curvature": "sin2pi", "height": 0.1, "measures": [0.2, 0.1, 0.05, 0.025]}),
}

CURVATURES = ("zero", "one", "minus_one", "sin2pi", "cos2pi", "constant", "tabulated",
              "diag", "twisted")


def parse_text(text):
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        raw[key] = value
    return raw


def parse_overrides(items):
    if len(items) % 2:
        raise ConfigError("overrides come in --key value pairs")
    out = {}
    for key, value in zip(items[::2], items[1::2]):
        if not key.startswith("--") or len(key) < 3:
            raise ConfigError(f"bad override {key!r}")
        out[key[2:].replace("-", "_")] = value
    return out


def _convert(key, value):
    kind = KEYS[key]
    try:
        if kind == FLOAT:
            v = float(value)
        elif kind == INT:
            v = int(value)
        elif kind == FLOATS:
            v = [float(s) for s in str(value).split(",") if s.strip()]
            if not v:
                raise ValueError("empty list")
        else:
            return str(value)
    except ValueError as err:
        raise ConfigError(f"{key}: cannot parse {value!r} ({err})") from None
    vals = v if isinstance(v, list) else [v]
    for x in vals:
        if not math.isfinite(x):
            raise ConfigError(f"{key}: non-finite value")
        if key == "seed":
            if x < 0:
                raise ConfigError("seed must be non-negative")
        elif key in ("lambdas", "curvature_value"):
            pass
        elif x <= 0:
            raise ConfigError(f"{key} must be positive")
    return v


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict = field(default_factory=dict)
    output: str = None

    def __getitem__(self, key):
        return self.params[key]

    def get(self, key, default=None):
        return self.params.get(key, default)


def build_config(raw):
    raw = dict(raw)
    name = raw.pop("experiment", None)
    if name is None:
        raise ConfigError("missing key: experiment")
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}")
    output = raw.pop("output", None)
    params = dict(EXPERIMENTS[name][1])
    for key, value in raw.items():
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}")
        params[key] = _convert(key, value)
    curv = params.get("curvature")
    if curv is not None and curv not in CURVATURES:
        raise ConfigError(f"unknown curvature {curv!r}")
    if curv == "tabulated":
        _parse_table(params.get("curvature_table"))
    if curv == "constant" and "curvature_value" not in params:
        raise ConfigError("curvature = constant needs curvature_value")
    return ExperimentConfig(name, params, output)


def load_config(path, overrides=()):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigError(f"cannot read config: {err}") from None
    raw = parse_text(text)
    raw.update(parse_overrides(list(overrides)))
    return build_config(raw)


# --------------------------------------------------------------------------
# curvature profiles
# --------------------------------------------------------------------------

def _parse_table(spec):
    if not spec:
        raise ConfigError("curvature = tabulated needs curvature_table")
    try:
        pairs = [tuple(float(v) for v in item.split(":")) for item in spec.split(",")]
    except ValueError:
        raise ConfigError("curvature_table entries are t:k pairs") from None
    if any(len(p) != 2 for p in pairs):
        raise ConfigError("curvature_table entries are t:k pairs")
    t = np.array([p[0] for p in pairs])
    k = np.array([p[1] for p in pairs])
    if t.size < 9:
        raise ConfigError("tabulated curvature needs at least 9 samples")
    if np.any(np.diff(t) <= 0):
        raise ConfigError("tabulated curvature must be increasing in t")
    if t[0] > 0.0 or t[-1] < 1.0:
        raise ConfigError("tabulated curvature must cover [0, 1]")
    return t, k


def tabulated_curvature(t, k):
    """Cubic spline through the samples, with exact spline derivatives."""
    from scipy.interpolate import CubicSpline

    from .numkit.smooth import SmoothFn

    cs = CubicSpline(t, k)

    def jet_fn(s, order):
        out = [cs(s, nu) if nu <= 3 else np.zeros_like(s) for nu in range(order + 1)]
        return np.stack([np.asarray(v, dtype=float) for v in out])

    return SmoothFn(jet_fn, (float(t[0]), float(t[-1])), None, "tabulated", t[1:-1])


def scalar_curvature(cfg):
    from .numkit.smooth import SmoothFn, cos_fn, sin_fn

    name = cfg.get("curvature", "zero")
    if name == "zero":
        return SmoothFn.constant(0.0)
    if name == "one":
        return SmoothFn.constant(1.0)
    if name == "minus_one":
        return SmoothFn.constant(-1.0)
    if name == "sin2pi":
        return sin_fn(2 * np.pi)
    if name == "cos2pi":
        return cos_fn(2 * np.pi)
    if name == "constant":
        return SmoothFn.constant(float(cfg["curvature_value"]))
    if name == "tabulated":
        return tabulated_curvature(*_parse_table(cfg["curvature_table"]))
    raise ConfigError(f"curvature {name!r} is not scalar")


def matrix_curvature(cfg):
    from .numkit.smooth import MatrixCurve, cos_fn, sin_fn

    name = cfg.get("curvature", "diag")
    lam = np.asarray(cfg.get("lambdas", [1.0, -1.0]), dtype=float)
    if name == "diag":
        return MatrixCurve.constant(np.diag(lam))
    if name == "twisted":
        if lam.size != 2:
            raise ConfigError("twisted curvature is defined for n = 2")
        w = float(cfg.get("omega", 1.0))
        c, s = cos_fn(2 * w), sin_fn(2 * w)
        m, h = 0.5 * (lam[0] + lam[1]), 0.5 * (lam[0] - lam[1])
        # Q(wt) diag(lam) Q(wt)^T
        return MatrixCurve.from_entries([[m + h * c, h * s], [h * s, m - h * c]], symmetric=True)
    raise ConfigError(f"curvature {name!r} is not a matrix profile")


def random_scalar_profile(rng, bound=10.0, modes=3):
    from .numkit.smooth import SmoothFn, cos_fn, sin_fn

    coef = rng.normals(2 * modes + 1)
    scale = bound * rng.uniform() / max(float(np.sum(np.abs(coef))), 1e-300)
    k = SmoothFn.constant(scale * coef[0])
    for m in range(1, modes + 1):
        k = k + (scale * coef[2 * m - 1]) * cos_fn(2 * np.pi * m)
        k = k + (scale * coef[2 * m]) * sin_fn(2 * np.pi * m)
    return k


def random_matrix_profile(rng, n, bound=10.0):
    from .numkit.smooth import MatrixCurve, SmoothFn, sin_fn

    mats = []
    for _ in range(3):
        X = rng.normals((n, n))
        mats.append(0.5 * (X + X.T))
    total = sum(float(np.abs(M).sum()) for M in mats)
    scale = bound * rng.uniform() / max(total, 1e-300)
    t = SmoothFn.identity()
    s = sin_fn(2 * np.pi)
    return (MatrixCurve.constant(scale * mats[0]) + MatrixCurve.constant(scale * mats[1]) * t
            + MatrixCurve.constant(scale * mats[2]) * s)


# --------------------------------------------------------------------------
# targets
# --------------------------------------------------------------------------

def seeded_targets(seed, count, radius, n, base, delta_est=None):
    """``count`` symplectic maps at chart distance ``radius`` from ``base``.

    n = 1 uses the (a', a, b) chart with b' recovered from det = 1; n >= 2
    moves along base . expm(r J S) for random symmetric S.
    """
    from .highdim import target_along
    from .numkit.symplectic import SymplecticMap
    from .surface import sp1_coords, sp1_from_coords

    if delta_est is not None and radius > delta_est:
        raise OutOfBall(f"radius {radius:.3g} exceeds {delta_est:.3g}")
    rng = XorShift64Star(seed)
    base = base if isinstance(base, SymplecticMap) else SymplecticMap(base)
    out = []
    for _ in range(count):
        if radius == 0:
            out.append(SymplecticMap(base.matrix.copy()))
        elif n == 1:
            c = sp1_coords(base) + radius * rng.unit_vector(3)
            out.append(sp1_from_coords(c))
        else:
            S = rng.normals((2 * n, 2 * n))
            out.append(target_along(base, S, radius))
    return out


# --------------------------------------------------------------------------
# experiments
# --------------------------------------------------------------------------

@dataclass
class ReportRow:
    experiment: str
    quantity: str
    parameters: str
    measured: float
    predicted: float
    passed: bool


def _params(**kw):
    parts = []
    for k, v in kw.items():
        if isinstance(v, float):
            v = format(v, ".17g")
        parts.append(f"{k}={v}")
    return ";".join(parts)


def _threads():
    try:
        return max(1, int(os.environ.get("FRANKS_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, items):
    items = list(items)
    workers = min(_threads(), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def exp_invariants(cfg):
    from .jacobi import fundamental_solution
    from .numkit.symplectic import symplectic_defect

    name = "invariants"
    n = int(cfg["n"])
    rng = XorShift64Star(cfg["seed"])
    profiles = []
    if n == 1:
        profiles.append(("configured", scalar_curvature(cfg)))
        profiles += [(f"random{i}", random_scalar_profile(rng)) for i in range(cfg["profiles"])]
    else:
        if cfg.get("curvature") in ("diag", "twisted"):
            profiles.append(("configured", matrix_curvature(cfg)))
        profiles += [(f"random{i}", random_matrix_profile(rng, n)) for i in range(cfg["profiles"])]

    def one(item):
        label, k = item
        fs = fundamental_solution(k)
        w, s = fs.wronskian_defect()
        sd = symplectic_defect(fs.dp(1.0))
        return [
            ReportRow(name, "wronskian_defect", _params(profile=label, n=n), w, 1e-8, w <= 1e-8),
            ReportRow(name, "gram_symmetry_defect", _params(profile=label, n=n), s, 1e-8, s <= 1e-8),
            ReportRow(name, "symplectic_defect", _params(profile=label, n=n), sd, 1e-8, sd <= 1e-8),
        ]

    return [r for rows in _map(one, profiles) for r in rows]


def exp_surface_realize(cfg):
    from .surface import SurfaceFranks

    name = "surface-realize"
    k = scalar_curvature(cfg)
    sf = SurfaceFranks(k, cfg["epsilon"])
    radius = cfg["radius"]
    targets = seeded_targets(cfg["seed"], cfg["count"], radius, 1, sf.dp(), sf.delta_est())

    def one(item):
        i, tgt = item
        res = sf.realize(tgt, tol=1e-12)
        smax = float(np.max(np.abs(res.coefficients)))
        bound = sf.curvature_bound(smax)
        p = _params(target=i, epsilon=cfg["epsilon"], radius=radius)
        return [
            ReportRow(name, "residual", p, res.residual, 1e-9, res.residual <= 1e-9),
            ReportRow(name, "newton_iterations", p, float(res.newton_iterations), 15.0,
                      res.newton_iterations <= 15),
            ReportRow(name, "curvature_change_c0", p, res.curvature_change_c0, bound,
                      res.curvature_change_c0 <= bound),
        ]

    return [r for rows in _map(one, enumerate(targets)) for r in rows]


def exp_highdim_realize(cfg):
    from .highdim import HighDimFranks

    name = "highdim-realize"
    R = matrix_curvature(cfg)
    hf = HighDimFranks(R, cfg["epsilon"], cfg["delta"], cfg.get("d"))
    smin = hf.sigma_min()
    radius = cfg["radius"]
    targets = seeded_targets(cfg["seed"], cfg["count"], radius, R.n, hf.dp(), 0.25 * smin)
    rows = [ReportRow(name, "sigma_min", _params(epsilon=cfg["epsilon"], delta=cfg["delta"]),
                      smin, 0.0, smin > 0.0)]

    def one(item):
        i, tgt = item
        res = hf.realize(tgt, tol=1e-10)
        p = _params(target=i, epsilon=cfg["epsilon"], delta=cfg["delta"], radius=radius)
        return [ReportRow(name, "residual", p, res.residual, 1e-8, res.residual <= 1e-8)]

    return rows + [r for rs in _map(one, enumerate(targets)) for r in rs]


def exp_metric_bounds(cfg):
    from .metric import (axis_curvature_change, c2_bound, c2_distance, interpolate_metric,
                         surface_metric_from_curvature)
    from .surface import FAMILIES, SurfaceFranks

    name = "metric-bounds"
    k = scalar_curvature(cfg)
    fam = cfg["family"]
    if fam not in FAMILIES:
        raise ConfigError(f"unknown family {fam!r}")
    sf = SurfaceFranks(k, cfg["epsilon"])
    kt = sf.ktildes[FAMILIES.index(fam)]
    tp, xp = cfg["t_points"], cfg["x_points"]
    g = surface_metric_from_curvature(k, t_points=tp, x_points=xp)
    gh = surface_metric_from_curvature(kt, t_points=tp, x_points=xp)
    bound = c2_bound(g, gh)
    dk = axis_curvature_change(g, gh)
    rows, dists = [], []
    for eta in cfg["eta"]:
        d = c2_distance(interpolate_metric(g, gh, eta), g)
        dists.append(d)
        rows.append(ReportRow(name, "c2_distance", _params(eta=eta, family=fam), d, bound, d <= bound))
    ratio = max(dists) / min(dists)
    rows.append(ReportRow(name, "eta_ratio", _params(family=fam), ratio, 2.0, ratio <= 2.0))
    rows.append(ReportRow(name, "axis_curvature_change", _params(family=fam), dk,
                          sf.curvature_bound(1.0), dk <= sf.curvature_bound(1.0)))
    return rows


def exp_scaling(cfg):
    from .highdim import SCHEME_EXPONENTS, SCHEMES, remainder_scaling

    name = "scaling"
    R = matrix_curvature(cfg)
    kind = cfg["scheme"]
    if kind not in SCHEMES:
        raise ConfigError(f"unknown scheme {kind!r}")
    deltas = cfg["deltas"]
    if len(deltas) < 3:
        raise ConfigError("scaling needs at least three deltas")
    slope, rems = remainder_scaling(kind, R, deltas, cfg["epsilon"])
    rows = [ReportRow(name, "remainder", _params(scheme=kind, delta=dl), r, float("nan"), True)
            for dl, r in zip(deltas, rems)]
    p = SCHEME_EXPONENTS[kind] - 0.5
    rows.append(ReportRow(name, "fitted_slope", _params(scheme=kind), slope, p, slope >= p))
    return rows


def exp_avoidance(cfg):
    from .highdim import fit_slope
    from .numkit.smooth import hump
    from .surface import localized_replacement

    name = "avoidance"
    k = scalar_curvature(cfg)
    h = cfg["height"]
    rows, dists, meas = [], [], cfg["measures"]
    for m in meas:
        if m >= 1.0:
            raise ConfigError("support measures must be below 1")
        lo = 0.5 - 0.5 * m
        k1 = k + h * hump().reparam(1.0 / m, -lo / m)
        rep = localized_replacement(k, k1, m)
        dists.append(rep.distance)
        err = float(np.max(np.abs(rep.predicted_column - rep.measured_column)))
        p = _params(measure=m, height=h)
        rows.append(ReportRow(name, "distance", p, rep.distance, rep.bound, rep.distance <= rep.bound))
        rows.append(ReportRow(name, "column_mismatch", p, err, 1e-5, err <= 1e-5))
    slope = fit_slope(meas, dists)
    rows.append(ReportRow(name, "fitted_slope", _params(height=h), slope, 1.0, abs(slope - 1.0) <= 0.3))
    return rows


RUNNERS = {
    "invariants": exp_invariants,
    "surface-realize": exp_surface_realize,
    "highdim-realize": exp_highdim_realize,
    "metric-bounds": exp_metric_bounds,
    "scaling": exp_scaling,
    "avoidance": exp_avoidance,
}

HEADER = ("experiment", "row", "quantity", "parameters", "measured", "predicted", "pass")


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def render_csv(rows):
    lines = [",".join(HEADER)]
    for i, r in enumerate(rows):
        cells = [r.experiment, str(i), r.quantity, r.parameters, _fmt(r.measured),
                 _fmt(r.predicted), _fmt(bool(r.passed))]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def run(cfg):
    """Execute one experiment; returns (exit status, csv text)."""
    rows = RUNNERS[cfg.experiment](cfg)
    text = render_csv(rows)
    status = 0 if all(r.passed for r in rows) else 1
    return status, text


def list_experiments():
    lines = []
    for name, (module, defaults) in EXPERIMENTS.items():
        keys = " ".join(f"{k}={_fmt_default(v)}" for k, v in defaults.items())
        lines.append(f"{name}\t{module}\t{keys}")
    return "\n".join(lines)


def _fmt_default(v):
    if isinstance(v, list):
        return ",".join(repr(float(x)) for x in v)
    return repr(v) if isinstance(v, float) else str(v)


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, suffix=".tmp")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def main(argv=None):
    parser = argparse.ArgumentParser(prog="franks")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("config")
    p_run.add_argument("overrides", nargs=argparse.REMAINDER)
    sub.add_parser("list", help="list experiments")
    args = parser.parse_args(argv)

    if args.command == "list":
        print(list_experiments())
        return 0
    try:
        cfg = load_config(args.config, args.overrides)
    except ConfigError as err:
        print(f"ConfigError: {err}", file=sys.stderr)
        return 2
    start = time.perf_counter()
    try:
        status, text = run(cfg)
    except ConfigError as err:
        print(f"ConfigError: {err}", file=sys.stderr)
        return 2
    except (FranksError, ValueError, ArithmeticError) as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return 3
    _write(cfg.output, text)
    print(f"{cfg.experiment}: {'pass' if status == 0 else 'FAIL'} "
          f"({time.perf_counter() - start:.2f} s)", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
