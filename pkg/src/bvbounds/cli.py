"""Command-line front end.

Exit codes: 0 when every verdict passes, 1 when any inequality verdict fails,
2 on configuration or validation errors.
"""

from __future__ import annotations

import argparse
import concurrent.futures as cf
import csv
import inspect
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from . import bounds as bd
from . import divergences as dv
from . import estimators as es
from . import infomatrices as im
from . import scenarios as sc
from .models import (
    BernoulliProduct,
    ConfigurationError,
    DominationError,
    ExponentialProduct,
    GammaProduct,
    GridFunction,
    GwnDiscrete,
    IsoNormal,
    ParameterDomainError,
    ParamVector,
    PoissonProduct,
    PppBoundary,
    RngStream,
    raw_moments_1d,
)

SCHEMA_VERSION = sc.SCHEMA_VERSION
COMMANDS = ("divergence", "matrix", "bound", "estimate", "scenario", "verify-all")
DEFAULT_TOL = 1e-8
DEFAULT_REPS = 20000


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# run configuration

_SECTIONS: dict[str, set[str]] = {
    "": {"command", "seed", "reps", "threads", "out_dir", "format", "tol", "plots"},
    "family": {"kind", "sigma", "shapes", "m", "n", "height"},
    "params": {"theta", "theta_prime", "points", "base_index"},
    "divergence": {"kind"},
    "matrix": {"kind"},
    "bound": {"coordinate"},
    "estimator": {"kind", "T", "u", "c", "h", "x0", "n", "center", "K", "corrected"},
    "scenario": None,  # keys validated against the runner signature
}


@dataclass
class RunConfig:
    command: str | None = None
    seed: int | None = None
    reps: int | None = None
    threads: int | None = None
    out_dir: str | None = None
    format: str = "json"
    tol: float = DEFAULT_TOL
    plots: bool = False
    sections: dict[str, dict[str, Any]] = field(default_factory=dict)

    def section(self, name: str) -> dict[str, Any]:
        return self.sections.setdefault(name, {})


def load_config(path: str | Path) -> RunConfig:
    """Parse a TOML run-config; unknown sections or keys raise :class:`ConfigError`."""
    text = Path(path).read_text()
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from None
    cfg = RunConfig()
    for key, val in raw.items():
        if isinstance(val, dict):
            if key not in _SECTIONS:
                raise ConfigError(f"{path}: unknown section [{key}]")
            allowed = _SECTIONS[key]
            for k, v in val.items():
                if isinstance(v, dict):
                    raise ConfigError(f"{path}: [{key}.{k}] nests deeper than two levels")
                if allowed is not None and k not in allowed:
                    raise ConfigError(f"{path}: unknown key '{k}' in [{key}] (line {_line_of(text, k)})")
            cfg.sections[key] = dict(val)
        else:
            if key not in _SECTIONS[""]:
                raise ConfigError(f"{path}: unknown top-level key '{key}' (line {_line_of(text, key)})")
            setattr(cfg, key, val)
    return cfg


def _line_of(text: str, key: str) -> int | str:
    for i, line in enumerate(text.splitlines(), start=1):
        if line.strip().startswith(key) and "=" in line:
            return i
    return "?"


def _floats(s: Any) -> list[float]:
    if s is None:
        return []
    if isinstance(s, (int, float)):
        return [float(s)]
    if isinstance(s, (list, tuple)):
        return [float(x) for x in s]
    try:
        return [float(x) for x in str(s).replace(";", ",").split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse number list {s!r}") from None


def _points(s: Any) -> list[list[float]]:
    if isinstance(s, (list, tuple)):
        return [_floats(p) for p in s]
    return [_floats(p) for p in str(s).split(";") if p.strip()]


# --------------------------------------------------------------------------
# family and parameter construction


def make_family(spec: dict[str, Any]):
    kind = spec.get("kind", "iso-normal")
    if kind == "iso-normal":
        return IsoNormal(float(spec.get("sigma", 1.0)))
    if kind == "poisson":
        return PoissonProduct()
    if kind == "bernoulli":
        return BernoulliProduct()
    if kind == "exponential":
        return ExponentialProduct()
    if kind == "gamma":
        sh = spec.get("shapes")
        return GammaProduct(tuple(_floats(sh)) if sh is not None else None)
    if kind == "gwn":
        return GwnDiscrete(int(spec.get("m", 100)), float(spec.get("n", 1.0)))
    if kind == "ppp":
        h = spec.get("height")
        return PppBoundary(float(spec.get("n", 1.0)), float(h) if h is not None else None)
    raise ConfigError(f"unknown family {kind!r}")


def make_params(family, values: Sequence[float]):
    if isinstance(family, (GwnDiscrete, PppBoundary)):
        return GridFunction(np.asarray(values, dtype=float))
    return ParamVector(values)


def make_estimator(spec: dict[str, Any], dim: int, rng: RngStream) -> es.Estimator:
    kind = spec.get("kind", "identity")
    table: dict[str, Callable[[], es.Estimator]] = {
        "identity": es.Identity,
        "zero": es.Zero,
        "soft-threshold": lambda: es.SoftThreshold(float(spec.get("T", 1.0))),
        "linear-shrinkage": lambda: es.LinearShrinkage(float(spec.get("c", 0.5))),
        "james-stein": lambda: es.JamesStein(float(spec.get("n", 1.0)),
                                             tuple(_floats(spec["center"])) if "center" in spec else None),
        "unbiased-quadratic": es.UnbiasedQuadratic,
        "functional-threshold": lambda: es.QuadFunctionalThreshold(float(spec.get("u", 2.0))),
        "kernel-smoother": lambda: es.KernelSmoother(float(spec.get("h", 0.05)), float(spec.get("x0", 0.5))),
        "ppp-min": lambda: es.PppMin(float(spec.get("n", 1.0)), bool(spec.get("corrected", False))),
    }
    sym = kind.startswith("symmetrized-")
    base = kind[len("symmetrized-"):] if sym else kind
    if base not in table:
        raise ConfigError(f"unknown estimator {kind!r}")
    est = table[base]()
    if sym:
        est = es.spherical_symmetrize(est, int(spec.get("K", 64)), rng.child(7), dim)
    return est


# --------------------------------------------------------------------------
# output


def atomic_write(path: Path, data: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def envelope(command: str, result: Any, passed: bool | None = None) -> dict:
    out = {"schema_version": SCHEMA_VERSION, "command": command, "result": sc._clean(result)}
    if passed is not None:
        out["passed"] = bool(passed)
    return out


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, allow_nan=False)


def table_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


def svg_plot(series: dict[str, tuple[Sequence[float], Sequence[float]]], title: str, xlabel: str, ylabel: str,
             logx: bool = False, width: int = 560, height: int = 380) -> str:
    """Minimal single-file line plot."""
    pad = 56
    xs_all = [x for xs, _ in series.values() for x in xs]
    ys_all = [y for _, ys in series.values() for y in ys if math.isfinite(y)]
    tx = (lambda x: math.log10(x)) if logx else (lambda x: x)
    x0, x1 = min(map(tx, xs_all)), max(map(tx, xs_all))
    y0, y1 = min(ys_all + [0.0]), max(ys_all)
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1
    px = lambda x: pad + (tx(x) - x0) / (x1 - x0) * (width - 2 * pad)
    py = lambda y: height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2}" y="20" text-anchor="middle">{title}</text>',
        f'<text x="{width / 2}" y="{height - 12}" text-anchor="middle">{xlabel}</text>',
        f'<text x="14" y="{height / 2}" transform="rotate(-90 14 {height / 2})" text-anchor="middle">{ylabel}</text>',
        f'<text x="{pad - 4}" y="{height - pad}" text-anchor="end">{y0:.3g}</text>',
        f'<text x="{pad - 4}" y="{pad + 4}" text-anchor="end">{y1:.3g}</text>',
    ]
    for i, (name, (xs, ys)) in enumerate(series.items()):
        c = colors[i % len(colors)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys) if math.isfinite(y))
        parts.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{pts}"/>')
        parts.append(f'<text x="{width - pad}" y="{pad + 14 * i}" fill="{c}" text-anchor="end">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _emit(cfg: RunConfig, command: str, payload: dict, stem: str, csv_text: str | None = None) -> None:
    if cfg.format == "csv" and csv_text is not None:
        sys.stdout.write(csv_text)
    else:
        sys.stdout.write(dumps(payload) + "\n")
    if cfg.out_dir:
        d = Path(cfg.out_dir)
        atomic_write(d / f"{stem}.json", dumps(payload) + "\n")
        if csv_text is not None:
            atomic_write(d / f"{stem}.csv", csv_text)


# --------------------------------------------------------------------------
# subcommands


def _need_seed(cfg: RunConfig) -> int:
    if cfg.seed is None:
        raise ConfigError("a seed is required (--seed or 'seed' in the config)")
    s = int(cfg.seed)
    if not 0 <= s < 2**64:
        raise ConfigError("seed must be a 64-bit unsigned integer")
    return s


def cmd_divergence(cfg: RunConfig) -> int:
    fam = make_family(cfg.section("family"))
    p = cfg.section("params")
    P = make_params(fam, _floats(p.get("theta")))
    Q = make_params(fam, _floats(p.get("theta_prime")))
    kind = cfg.section("divergence").get("kind", "all")
    if kind == "all":
        vals = dv.all_divergences(fam, P, Q)
        result = {k: v.to_dict() for k, v in vals.items()}
        rows = [[k, v.value, v.provenance] for k, v in vals.items()]
    else:
        v = dv.divergence(kind, fam, P, Q)
        result = v.to_dict()
        rows = [[kind, v.value, v.provenance]]
    _emit(cfg, "divergence", envelope("divergence", result), "divergence", table_csv(["kind", "value", "provenance"], rows))
    return 0


def cmd_matrix(cfg: RunConfig) -> int:
    fam = make_family(cfg.section("family"))
    p = cfg.section("params")
    pts = [make_params(fam, v) for v in _points(p.get("points", ""))]
    if len(pts) < 2:
        raise ConfigError("a matrix needs a base point and at least one alternative (--points 'a;b;...')")
    kind = cfg.section("matrix").get("kind", "chi2")
    base = int(p.get("base_index", 0))
    if kind == "chi2":
        A = im.chi2_matrix(fam, pts[base:base + 1] + pts[:base] + pts[base + 1:])
    elif kind == "affinity":
        A = im.affinity_matrix(fam, pts, base)
    else:
        raise ConfigError(f"unknown matrix kind {kind!r}")
    result = {"kind": A.kind, "values": A.values, "provenance": A.provenance, "base_index": base,
              "min_eigenvalue": A.min_eigenvalue(), "psd": A.is_psd()}
    _emit(cfg, "matrix", envelope("matrix", result), "matrix", A.to_csv())
    return 0


def _linear_moments(fam, P, coord: int) -> tuple[float, float]:
    vals = dv.coords(fam, P)[coord]
    if isinstance(fam, IsoNormal):
        return float(vals[0]), fam.sigma**2
    if isinstance(fam, GammaProduct):
        a, b = vals
        m = raw_moments_1d(fam, b, 2, shape=a)
    else:
        m = raw_moments_1d(fam, vals[0], 2)
    return float(m[1]), float(m[2] - m[1] ** 2)


def cmd_bound(cfg: RunConfig) -> int:
    fam = make_family(cfg.section("family"))
    if isinstance(fam, (GwnDiscrete, PppBoundary)):
        raise ConfigError("the bound subcommand takes a parametric product family")
    p = cfg.section("params")
    P = make_params(fam, _floats(p.get("theta")))
    Q = make_params(fam, _floats(p.get("theta_prime")))
    coord = int(cfg.section("bound").get("coordinate", 0))
    mp, vp = _linear_moments(fam, P, coord)
    mq, vq = _linear_moments(fam, Q, coord)
    divs = dv.all_divergences(fam, P, Q)
    reps = bd.two_point_bounds(divs, bd.StatMoments([mp, mq], [vp, vq]), float(cfg.tol))
    ok = all(r.holds for r in reps)
    rows = [[r.inequality, r.lhs, r.rhs, r.slack, r.holds] for r in reps]
    _emit(cfg, "bound", envelope("bound", [r.to_dict() for r in reps], ok), "bound",
          table_csv(["inequality", "lhs", "rhs", "slack", "holds"], rows))
    return 0 if ok else 1


def _reps(cfg: RunConfig) -> int:
    return int(cfg.reps) if cfg.reps is not None else DEFAULT_REPS


def cmd_estimate(cfg: RunConfig) -> int:
    seed = _need_seed(cfg)
    fam = make_family(cfg.section("family"))
    P = make_params(fam, _floats(cfg.section("params").get("theta")))
    rng = RngStream(seed)
    dim = P.d if isinstance(P, ParamVector) else P.m
    est = make_estimator(cfg.section("estimator"), dim, rng)
    if not est.vector:
        target = float(np.sum(np.asarray(P.values) ** 2)) if isinstance(P, ParamVector) else 0.0
        x = es.draw_estimates(est, fam, P, _reps(cfg), rng.child(1))
        me = es.moments_from_draws(x, target, seed)
    else:
        me = es.mc_moments(est, fam, P, _reps(cfg), rng.child(1))
    rows = [[i, float(b), float(s), float(v)] for i, (b, s, v) in enumerate(zip(me.bias, me.bias_se, me.variances))]
    _emit(cfg, "estimate", envelope("estimate", me), "estimate", table_csv(["coordinate", "bias", "bias_se", "variance"], rows))
    return 0


def _scenario_kwargs(fn: Callable, raw: dict[str, Any], seed: int, reps: int | None) -> dict[str, Any]:
    sig = inspect.signature(fn)
    kw = {}
    for k, v in raw.items():
        if k == "id":
            continue
        if k not in sig.parameters:
            raise ConfigError(f"unknown key '{k}' in [scenario] for {fn.__name__}")
        kw[k] = v
    if "seed" in sig.parameters:
        kw.setdefault("seed", seed)
    if reps is not None and "reps" in sig.parameters:
        kw.setdefault("reps", reps)
    return kw


def write_scenario(res: sc.ScenarioResult, out_dir: Path, plots: bool = False) -> list[Path]:
    written = []
    stem = res.scenario
    atomic_write(out_dir / f"{stem}.json", dumps(res.to_dict()) + "\n")
    written.append(out_dir / f"{stem}.json")
    rows = [[k, r.inequality, r.lhs, r.rhs, r.slack, r.holds] for k, r in res.bounds.items()]
    atomic_write(out_dir / f"{stem}_bounds.csv", table_csv(["id", "inequality", "lhs", "rhs", "slack", "holds"], rows))
    written.append(out_dir / f"{stem}_bounds.csv")
    for name, (header, trows) in res.tables.items():
        p = out_dir / f"{stem}_{name}.csv"
        atomic_write(p, table_csv(header, trows))
        written.append(p)
    if plots:
        for name, (header, trows) in res.tables.items():
            num = [i for i, h in enumerate(header) if all(isinstance(r[i], (int, float, np.floating)) for r in trows)]
            if len(num) < 2:
                continue
            x = [float(r[num[0]]) for r in trows]
            series = {header[i]: (x, [float(r[i]) for r in trows]) for i in num[1:4]}
            p = out_dir / f"{stem}_{name}.svg"
            atomic_write(p, svg_plot(series, f"{stem}: {name}", header[num[0]], "value", logx=min(x) > 0))
            written.append(p)
    return written


def cmd_scenario(cfg: RunConfig, scenario_id: str | None) -> int:
    seed = _need_seed(cfg)
    sec = cfg.section("scenario")
    sid = scenario_id or sec.get("id")
    if sid not in sc.SCENARIOS:
        raise ConfigError(f"unknown scenario {sid!r}; choose from {sorted(sc.SCENARIOS)}")
    fn = sc.SCENARIOS[sid]
    kw = _scenario_kwargs(fn, sec, seed, cfg.reps)
    res = fn(**kw)
    payload = res.to_dict()
    sys.stdout.write(dumps(payload) + "\n")
    if cfg.out_dir:
        write_scenario(res, Path(cfg.out_dir), cfg.plots)
    return 0 if res.passed else 1


# --------------------------------------------------------------------------
# verify-all


def verification_suite(seed: int, scale: float = 1.0) -> list[tuple[str, Callable[[], sc.ScenarioResult]]]:
    """Light versions of every scenario plus closed-form cross-checks."""
    r = lambda n: max(1000, int(n * scale))
    return [
        ("pointwise-gwn", lambda: sc.run_pointwise_gwn(R=3.0, beta=1.0)),
        ("pointwise-gwn-half", lambda: sc.run_pointwise_gwn(R=3.0, beta=0.5)),
        ("pointwise-gwn-two", lambda: sc.run_pointwise_gwn(R=3.0, beta=2.0)),
        ("sparse-sequence", lambda: sc.run_sparse_sequence(100, 2, 0.1, reps=r(20000), seed=seed)),
        ("sparse-sequence-large", lambda: sc.run_sparse_sequence(2500, 5, 0.1, reps=r(20000), seed=seed)),
        ("quadratic-functional", lambda: sc.run_quadratic_functional(400, 2, 1.0, reps=r(100000), seed=seed)),
        ("boundary", lambda: sc.run_boundary(50.0, 0.5, 1.0, reps=r(100000), seed=seed)),
        ("l2-reduction", lambda: sc.run_l2_reduction(8, 1.0, 1, reps=r(50000), seed=seed, K=32)),
        ("bias-blowup", lambda: sc.run_bias_blowup_demo(8, 2.0, reps=r(20000), seed=seed)),
        ("hd-regression", lambda: sc.run_hd_regression(400, 20, 1, 0.05, seed=seed)),
        ("closed-forms", lambda: closed_form_checks(seed)),
    ]


def closed_form_checks(seed: int, tuples: int = 20) -> sc.ScenarioResult:
    """Closed-form divergence matrices against the independent oracles on random inputs."""
    res = sc.ScenarioResult("closed-forms", {"seed": seed, "tuples": tuples})
    g = RngStream(seed, 71).generator()
    fams = {
        "iso-normal": (IsoNormal(1.3), lambda d: g.normal(0, 1, d)),
        "poisson": (PoissonProduct(), lambda d: g.uniform(0.3, 3, d)),
        "bernoulli": (BernoulliProduct(), lambda d: g.uniform(0.1, 0.9, d)),
        "exponential": (ExponentialProduct(), lambda d: g.uniform(0.5, 2, d)),
        "gamma": (GammaProduct((1.5, 2.5)), lambda d: g.uniform(0.7, 1.4, 2)),
    }
    for name, (fam, draw) in fams.items():
        worst = 0.0
        for _ in range(tuples):
            d = 2 if name == "gamma" else int(g.integers(1, 3))
            pts = [ParamVector(draw(d)) for _ in range(3)]
            for kind in ("chi2", "affinity"):
                A = im.chi2_matrix(fam, pts) if kind == "chi2" else im.affinity_matrix(fam, pts)
                B, err = im.numeric_matrix_oracle(fam, pts, kind)
                fin = np.isfinite(A.values) & np.isfinite(B.values)
                if np.any(fin):
                    worst = max(worst, float(np.max(np.abs(A.values[fin] - B.values[fin]))))
        res.measurements[f"{name}_max_abs_diff"] = worst
        res.check(f"{name} matrices match oracle", worst <= 1e-6, "matrix-oracle", f"{worst:.3g}")
    return res


def cmd_verify_all(cfg: RunConfig, threads: int) -> int:
    seed = _need_seed(cfg)
    scale = float(cfg.reps or DEFAULT_REPS) / DEFAULT_REPS
    suite = verification_suite(seed, scale)
    results: dict[str, sc.ScenarioResult] = {}
    with cf.ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
        futs = {name: ex.submit(fn) for name, fn in suite}
        for name, f in futs.items():
            results[name] = f.result()
    ok = True
    for name, _ in suite:
        res = results[name]
        ok = ok and res.passed
        line = {"schema_version": SCHEMA_VERSION, "command": "verify-all", "check": name, "passed": res.passed,
                "failed": [v.name for v in res.verdicts if not v.passed]}
        sys.stdout.write(dumps(line) + "\n")
        if cfg.out_dir:
            write_scenario(res, Path(cfg.out_dir) / name, cfg.plots)
    sys.stdout.write(dumps({"schema_version": SCHEMA_VERSION, "command": "verify-all", "passed": ok}) + "\n")
    return 0 if ok else 1


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run-config file")
    common.add_argument("--seed", type=int, help="64-bit master seed")
    common.add_argument("--reps", type=int, help=f"Monte Carlo replications (default {DEFAULT_REPS})")
    common.add_argument("--threads", type=int, help="worker threads (default: $BV_BOUNDS_THREADS or CPU count)")
    common.add_argument("--out-dir", help="directory for JSON/CSV/SVG outputs")
    common.add_argument("--format", choices=("json", "csv"), help="stdout format (default json)")
    common.add_argument("--tol", type=float, help=f"closed-form slack tolerance (default {DEFAULT_TOL})")
    common.add_argument("--plots", action="store_true", help="write SVG plots next to scenario tables")

    fam = argparse.ArgumentParser(add_help=False)
    fam.add_argument("--family", choices=("iso-normal", "poisson", "bernoulli", "exponential", "gamma", "gwn", "ppp"))
    fam.add_argument("--sigma", type=float)
    fam.add_argument("--shapes", help="Gamma shapes, comma separated")
    fam.add_argument("--grid", type=int, dest="m", help="white-noise grid cells")
    fam.add_argument("--level", type=float, dest="n", help="white-noise level or point-process intensity")

    p = argparse.ArgumentParser(prog="bv-bounds", description="Bias-variance lower bounds toolkit")
    sub = p.add_subparsers(dest="command", required=True)
    d = sub.add_parser("divergence", parents=[common, fam], help="pairwise divergence")
    d.add_argument("--theta")
    d.add_argument("--theta-prime")
    d.add_argument("--kind", choices=("tv", "h2", "kl", "chi2", "all"))
    m = sub.add_parser("matrix", parents=[common, fam], help="chi-square or affinity matrix")
    m.add_argument("--points", help="parameter points separated by ';', base point first")
    m.add_argument("--kind", choices=("chi2", "affinity"))
    m.add_argument("--base-index", type=int)
    b = sub.add_parser("bound", parents=[common, fam], help="two-point bounds for a coordinate statistic")
    b.add_argument("--theta")
    b.add_argument("--theta-prime")
    b.add_argument("--coordinate", type=int)
    e = sub.add_parser("estimate", parents=[common, fam], help="Monte Carlo moments of an estimator")
    e.add_argument("--theta")
    e.add_argument("--estimator", dest="est_kind")
    e.add_argument("--threshold", type=float, dest="T")
    e.add_argument("--shrinkage", type=float, dest="c")
    e.add_argument("--rotations", type=int, dest="K")
    s = sub.add_parser("scenario", parents=[common], help="run a case study")
    s.add_argument("--id", dest="scenario_id", choices=sorted(sc.SCENARIOS))
    sub.add_parser("verify-all", parents=[common], help="run the full verification suite")
    return p


def _merge(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    for k in ("seed", "reps", "threads", "out_dir", "format", "tol"):
        v = getattr(args, k, None)
        if v is not None:
            setattr(cfg, k, v)
    if getattr(args, "plots", False):
        cfg.plots = True
    famsec = cfg.section("family")
    for k_arg, k_cfg in (("family", "kind"), ("sigma", "sigma"), ("shapes", "shapes"), ("m", "m"), ("n", "n")):
        v = getattr(args, k_arg, None)
        if v is not None:
            famsec[k_cfg] = v
    par = cfg.section("params")
    for k_arg, k_cfg in (("theta", "theta"), ("theta_prime", "theta_prime"), ("points", "points"), ("base_index", "base_index")):
        v = getattr(args, k_arg, None)
        if v is not None:
            par[k_cfg] = v
    if args.command in ("divergence", "matrix") and getattr(args, "kind", None) is not None:
        cfg.section(args.command)["kind"] = args.kind
    if getattr(args, "coordinate", None) is not None:
        cfg.section("bound")["coordinate"] = args.coordinate
    est = cfg.section("estimator")
    if getattr(args, "est_kind", None) is not None:
        est["kind"] = args.est_kind
    for k in ("T", "c", "K"):
        v = getattr(args, k, None)
        if v is not None:
            est[k] = v
    if cfg.format not in ("json", "csv"):
        raise ConfigError("format must be json or csv")
    if cfg.reps is not None and int(cfg.reps) < 1000:
        raise ConfigError("reps must be at least 1000")
    return cfg


def resolve_threads(cfg: RunConfig) -> int:
    if cfg.threads is not None:
        return max(1, int(cfg.threads))
    env = os.environ.get("BV_BOUNDS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError("BV_BOUNDS_THREADS must be an integer") from None
    return os.cpu_count() or 1


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else 2
    try:
        cfg = _merge(args)
        threads = resolve_threads(cfg)
        if args.command == "divergence":
            return cmd_divergence(cfg)
        if args.command == "matrix":
            return cmd_matrix(cfg)
        if args.command == "bound":
            return cmd_bound(cfg)
        if args.command == "estimate":
            return cmd_estimate(cfg)
        if args.command == "scenario":
            return cmd_scenario(cfg, args.scenario_id)
        return cmd_verify_all(cfg, threads)
    except (ConfigError, ConfigurationError, ParameterDomainError, DominationError, sc.PreconditionError,
            es.ArityError, es.SupportViolationError, bd.ArityError, bd.InconsistentInputError, im.ShapeError,
            im.DegenerateBaseError, FileNotFoundError) as e:
        sys.stderr.write(f"error: {e}\n")
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
