"""Batch front end: parameter sweeps written as CSV or JSON tables.

Usage::

    bicshg trace --set R=0.08 --set eps_c=2 --set h_max=1.5
    bicshg bound-states --config run.cfg --format json --out bs.json

Configuration files hold one ``key = value`` per line; ``#`` starts a comment.
Command-line ``--set`` overrides win over the file.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .dispersion import StructureParams, scattering_phase
from .errors import (BicShgError, ConfigError, NotFound, NumericalFailure,
                     ValidityViolation)
from .flux import (bic_constants, conservation_check, efficiency_estimates,
                   optimal_distance, sigma1, sigma2)
from .oracle import sweep_argmax_sigma2
from .shg import sh_coupling, solve_fields, validity, zeta_xi
from .siegert import (curve_follower, find_bound_state, kz_of,
                      threshold_estimate, trace_curve)

SCHEMA = "bic-shg schema v1"
SIGMA_CEILING = 1 + 1e-8

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VALIDITY = 0, 2, 3, 4


def _floats(text):
    return tuple(float(t) for t in text.replace(",", " ").split())


def _parity(text):
    t = text.strip().lower()
    if t in ("both", "all"):
        return (1, -1)
    if t in ("+1", "1", "even"):
        return (1,)
    if t in ("-1", "odd"):
        return (-1,)
    raise ValueError(f"unknown parity {text!r}")


@dataclass(frozen=True)
class RunConfig:
    R: float = 0.1
    eps_c: float = 2.0
    chi_c: float = 1e-3
    kx: float = 0.0
    parity: tuple = (1,)
    h_min: float = 0.1
    h_max: float = 1.0
    h_step: float = 0.01
    n: int = 1
    n_max: int = 3
    sweep: str = "R"                # efficiency: "R" or "kx"
    R_list: tuple = ()
    kx_list: tuple = ()
    nu_min: float = 1e-8
    nu_max: float = 1e-3
    nu_points: int = 21
    dh_max: float = 0.02
    h_points: int = 41
    sweep_points: int = 41
    tol: float = 1e-10
    jobs: int = 1

    _parsers = {"parity": _parity, "R_list": _floats, "kx_list": _floats}

    def structure(self, **changes) -> StructureParams:
        base = dict(R=self.R, eps_c=self.eps_c, chi_c=self.chi_c, kx=self.kx)
        base.update(changes)
        return StructureParams(**base)

    def echo(self) -> list[tuple[str, str]]:
        out = []
        for f in fields(self):
            if f.name == "jobs":       # scheduling only, never changes the data
                continue
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = " ".join(_fmt(x) for x in v)
            elif isinstance(v, float):
                v = _fmt(v)
            out.append((f.name, str(v)))
        return out


_KEYS = {f.name: f for f in fields(RunConfig)}


def _coerce(key, raw, where):
    if key not in _KEYS:
        raise ConfigError(f"{where}: unknown key {key!r}")
    try:
        if key in RunConfig._parsers:
            return RunConfig._parsers[key](raw)
        kind = type(_KEYS[key].default)
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return raw.strip()
    except ValueError as exc:
        raise ConfigError(f"{where}: bad value for {key}: {exc}") from None


def parse_config_text(text: str, source: str = "<config>") -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        values[key] = _coerce(key, raw, f"{source}:{lineno}")
    return values


def build_config(path: str | None, overrides: list[str]) -> RunConfig:
    values = {}
    if path:
        try:
            with open(path) as fh:
                values.update(parse_config_text(fh.read(), path))
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from None
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set {item!r}: expected key=value")
        key, raw = (s.strip() for s in item.split("=", 1))
        values[key] = _coerce(key, raw, f"--set {key}")
    cfg = RunConfig(**values)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    try:
        cfg.structure()
    except ValueError as exc:
        raise ConfigError(f"structure: {exc}") from None
    if not 0 < cfg.h_min <= cfg.h_max:
        raise ConfigError("h_min/h_max: need 0 < h_min <= h_max (empty h range)")
    if cfg.h_step <= 0:
        raise ConfigError("h_step: must be positive")
    if cfg.n_max < 0 or cfg.n < 1:
        raise ConfigError("n/n_max: need n >= 1 and n_max >= 0")
    if cfg.sweep not in ("R", "kx"):
        raise ConfigError("sweep: must be R or kx")
    if not 0 < cfg.nu_min <= cfg.nu_max or cfg.nu_points < 1 or cfg.h_points < 2:
        raise ConfigError("validity grid: need 0 < nu_min <= nu_max, nu_points >= 1, h_points >= 2")
    if cfg.dh_max <= 0 or cfg.sweep_points < 3:
        raise ConfigError("dh_max must be positive and sweep_points >= 3")
    if cfg.tol <= 0 or cfg.jobs < 1:
        raise ConfigError("tol must be positive and jobs >= 1")
    for R in cfg.R_list:
        if not 0 < R < 0.5:
            raise ConfigError(f"R_list: {R} outside (0, 0.5)")
    for kx in cfg.kx_list:
        if not 0 <= kx < math.pi / 2:
            raise ConfigError(f"kx_list: {kx} outside [0, pi/2)")


# ---------------------------------------------------------------- output

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        if math.isnan(x):
            return "nan"
        return f"{float(x):.12g}"
    return str(x)


def _jsonable(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return None if not math.isfinite(x) else float(f"{float(x):.12g}")
    return x


@dataclass
class Table:
    command: str
    columns: list[str]
    rows: list[tuple] = field(default_factory=list)

    def render(self, cfg: RunConfig, fmt: str) -> str:
        if fmt == "json":
            doc = {"schema": SCHEMA, "command": self.command,
                   "inputs": dict(cfg.echo()), "columns": self.columns,
                   "rows": [[_jsonable(v) for v in r] for r in self.rows]}
            return json.dumps(doc, indent=1) + "\n"
        lines = [f"# {SCHEMA}", f"# command = {self.command}"]
        lines += [f"# {k} = {v}" for k, v in cfg.echo()]
        lines.append(",".join(self.columns))
        lines += [",".join(_fmt(v) for v in r) for r in self.rows]
        return "\n".join(lines) + "\n"


def _pmap(fn, items, jobs):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))   # map keeps input order


def _require_sh_window(cfg: RunConfig) -> None:
    """Second-harmonic commands need exactly the m = 0, +-1 SH channels open."""
    if not cfg.kx < math.pi / 2:
        raise ConfigError(f"kx = {cfg.kx}: second-harmonic commands need kx < pi/2")


def _check_sigma(*values):
    for v in values:
        if math.isfinite(v) and not 0 <= v <= SIGMA_CEILING:
            raise ValidityViolation(f"conversion ratio {v!r} outside [0, 1]")


# ---------------------------------------------------------------- commands

def _trace_one(args):
    cfg, parity = args
    pts = trace_curve(parity, cfg.structure(), (cfg.h_min, cfg.h_max), cfg.h_step, cfg.tol)
    return [(parity, p.h, p.kr, p.gamma) for p in pts]


def cmd_trace(cfg: RunConfig) -> Table:
    t = Table("trace", ["parity", "h", "k_r", "Gamma"])
    for rows in _pmap(_trace_one, [(cfg, p) for p in sorted(cfg.parity, reverse=True)], cfg.jobs):
        t.rows.extend(rows)
    return t


def _bound_one(args):
    cfg, parity, n = args
    params = cfg.structure()
    try:
        bs = find_bound_state(n, parity, params, cfg.tol)
    except NotFound as exc:
        nan = math.nan
        return (n, parity, nan, nan, nan, threshold_estimate(params), type(exc).__name__)
    return (n, parity, bs.hb, bs.kb, bs.kzb, threshold_estimate(params), "ok")


def cmd_bound_states(cfg: RunConfig) -> Table:
    t = Table("bound-states", ["n", "parity", "h_b", "k_b", "k_zb", "k_b_threshold_estimate",
                                   "status"])
    tasks = [(cfg, p, n) for p in sorted(cfg.parity, reverse=True)
             for n in range(1, cfg.n_max + 1)]
    t.rows = _pmap(_bound_one, tasks, cfg.jobs)
    return t


def _efficiency_one(args):
    cfg, n, R, kx = args
    params = cfg.structure(R=R, kx=kx)
    try:
        bs = find_bound_state(n, 1, params, cfg.tol)
        est = efficiency_estimates(bs, params, bic_constants(bs, params, cfg.tol))
    except NumericalFailure as exc:
        nan = math.nan
        return (n, R, kx, nan, nan, nan, nan, nan, scattering_phase(2 * math.pi - kx, params),
                False, type(exc).__name__)
    _check_sigma(est.sigma2max_exact, est.sigma2max_m0)
    return (n, R, kx, bs.hb, bs.kb, est.sigma2max_exact, est.sigma2max_leading,
            est.sigma2max_m0, est.delta0_kb, est.subwavelength_ok, "ok")


def cmd_efficiency(cfg: RunConfig) -> Table:
    _require_sh_window(cfg)
    t = Table("efficiency", ["n", "R", "kx", "h_b", "k_b", "sigma2_max_exact",
                             "sigma2_max_leading", "sigma2_max_m0", "delta0_kb", "solid",
                             "status"])
    if cfg.sweep == "R":
        points = [(R, cfg.kx) for R in (cfg.R_list or (cfg.R,))]
    else:
        points = [(cfg.R, kx) for kx in (cfg.kx_list or (cfg.kx,))]
    tasks = [(cfg, n, R, kx) for n in range(1, cfg.n_max + 1) for R, kx in points]
    t.rows = _pmap(_efficiency_one, tasks, cfg.jobs)
    return t


def _validity_column(args):
    cfg, h, k, nus = args
    params = cfg.structure()
    phi = math.cos(h * kz_of(k, params))
    zeta, xi = zeta_xi(h, k, 1.0, sh_coupling(h, k, params, cfg.tol), params)
    rows = []
    for nu in nus:
        tau, ok = validity(phi, nu, zeta, xi)
        rows.append((nu, h, tau, ok))
    return rows


def cmd_validity(cfg: RunConfig) -> Table:
    """(nu, h) grid around hb(n); the h grid is centred on the bound state."""
    _require_sh_window(cfg)
    params = cfg.structure()
    bs = find_bound_state(cfg.n, 1, params, cfg.tol)
    hs = bs.hb + np.linspace(-cfg.dh_max, cfg.dh_max, cfg.h_points)
    nus = np.geomspace(cfg.nu_min, cfg.nu_max, cfg.nu_points)
    follow = curve_follower(1, params, cfg.tol)
    ks = [follow(float(h)) for h in hs]
    cols = _pmap(_validity_column, [(cfg, float(h), k, nus) for h, k in zip(hs, ks)], cfg.jobs)
    t = Table("validity", ["nu", "h", "tau_sum", "valid"])
    for i in range(len(nus)):
        for col in cols:
            t.rows.append(col[i])
    return t


def cmd_optimal(cfg: RunConfig) -> Table:
    if cfg.chi_c <= 0:
        raise ConfigError("optimal: chi_c must be positive")
    _require_sh_window(cfg)
    params = cfg.structure()
    bs = find_bound_state(cfg.n, 1, params, cfg.tol)
    bc = bic_constants(bs, params, cfg.tol)
    od = optimal_distance(bs, params, bc, cfg.tol)
    follow = curve_follower(1, params, cfg.tol)
    t = Table("optimal", ["side", "h_b", "h_opt", "dh", "dh_quarter_power", "h_sweep_argmax",
                          "sigma2_at_opt", "sigma2_sweep_max", "sigma2_max_exact",
                          "conservation_residual"])
    for side, h in ((-1, od.h_minus), (1, od.h_plus)):
        dh = abs(h - bs.hb)
        window = tuple(sorted((bs.hb + side * 0.3 * dh, bs.hb + side * 3.0 * dh)))
        h_star, s_star = sweep_argmax_sigma2(bs, params, window, cfg.sweep_points)
        sol = solve_fields(h, params, k=follow(h), tol=cfg.tol)
        s2 = sigma2(sol, params)
        resid = conservation_check(sol, params, bc)
        _check_sigma(s2, s_star, sigma1(sol, params))
        t.rows.append((side, bs.hb, h, dh, od.dh_leading, h_star, s2, s_star,
                       bc.sigma2_max, resid))
    return t


COMMANDS = {
    "trace": cmd_trace,
    "bound-states": cmd_bound_states,
    "efficiency": cmd_efficiency,
    "validity": cmd_validity,
    "optimal": cmd_optimal,
}


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bicshg", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", metavar="PATH")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    ap.add_argument("--out", metavar="PATH")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--jobs", type=int, help="worker processes (overrides config)")
    return ap


def main(argv=None) -> int:
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:       # argparse usage errors
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        overrides = list(args.set)
        if args.jobs is not None:
            overrides.append(f"jobs={args.jobs}")
        cfg = build_config(args.config, overrides)
        text = COMMANDS[args.command](cfg).render(cfg, args.format)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidityViolation as exc:
        print(f"validity violation: {exc}", file=sys.stderr)
        return EXIT_VALIDITY
    except (NumericalFailure, BicShgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
