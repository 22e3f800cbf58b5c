"""Command-line runner: a JSON config plus flag overrides in, report files out.

Exit codes: 0 all assertions pass, 1 an assertion failed, 2 config error,
3 computation error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import dataclass, fields
from dataclasses import field as dc_field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import harness
from .core import FieldError, FieldSpec, ParamError, alpha_np, ball_indicator, omega_n, validate_params
from .projbody import QuadConfig, build_frac_bodies, frac_gauge
from .quadrature import BoxQuad, TGrid, sphere_grid, t_integral
from .starbody import ball, ellipsoid, volume

EXIT_OK, EXIT_ASSERT, EXIT_CONFIG, EXIT_COMPUTE = 0, 1, 2, 3

COMMANDS = ("projbody", "chain", "ps", "asym", "optimal", "limits", "riesz", "selftest")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    field: Any = "gaussian"
    n: int = 2
    s: float = 0.5
    p: float = 2.0
    s_list: list = dc_field(default_factory=lambda: [0.5, 0.7, 0.9, 0.95])
    body: str = "ball"
    asymmetric: bool = False
    candidates: int = 200
    triples: int = 50
    shears: int = 5
    sphere_level: int = 8
    box_half_extent: Optional[float] = None
    box_points: int = 40
    t_min: float = 1e-4
    t_max: float = 1e4
    t_points: int = 80
    seed: int = 0
    tolerance: float = harness.DEFAULT_TOL
    out: str = "reports"
    formats: list = dc_field(default_factory=lambda: ["json", "csv"])
    threads: int = 1

    def quad(self) -> QuadConfig:
        return QuadConfig(
            sphere_level=self.sphere_level,
            box=BoxQuad(self.box_half_extent, self.box_points),
            tgrid=TGrid(self.t_min, self.t_max, self.t_points),
            threads=self.threads,
        )

    def field_spec(self) -> FieldSpec:
        if isinstance(self.field, str):
            return harness.preset_field(self.field, self.n)
        f = FieldSpec.from_dict(self.field)
        if f.n != self.n:
            raise ConfigError(f"field dimension {f.n} differs from n={self.n}")
        return f

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def digest(self) -> str:
        """Hash of everything that affects the numbers (not out/threads/formats)."""
        d = {k: v for k, v in self.to_dict().items() if k not in ("out", "threads", "formats")}
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


_FIELD_NAMES = {f.name for f in fields(RunConfig)}
_INT_KEYS = {"n", "candidates", "triples", "shears", "sphere_level", "box_points", "t_points", "seed", "threads"}
_FLOAT_KEYS = {"s", "p", "t_min", "t_max", "tolerance"}


def _coerce(key: str, value: Any) -> Any:
    try:
        if key in _INT_KEYS:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
        if key == "box_half_extent":
            return None if value is None else float(value)
        if key == "asymmetric":
            if isinstance(value, str):
                if value.lower() not in ("true", "false", "1", "0"):
                    raise ValueError
                return value.lower() in ("true", "1")
            return bool(value)
        if key in ("s_list", "formats"):
            if isinstance(value, str):
                value = [v for v in value.split(",") if v]
            value = list(value)
            return [float(v) for v in value] if key == "s_list" else [str(v) for v in value]
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {key!r}: {value!r}") from None
    return value


def _parse_set(item: str) -> tuple[str, Any]:
    if "=" not in item:
        raise ConfigError(f"--set expects key=value, got {item!r}")
    key, raw = item.split("=", 1)
    key = key.strip()
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def parse_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> RunConfig:
    """Read an optional JSON config, apply overrides, and validate."""
    data: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {path} is not valid JSON: {e}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    unknown = sorted(set(data) - _FIELD_NAMES)
    if unknown:
        raise ConfigError(f"unknown config key {unknown[0]!r}")
    if "command" not in data:
        raise ConfigError("missing 'command'")
    if data["command"] not in COMMANDS:
        raise ConfigError(f"unknown command {data['command']!r}; choose from {', '.join(COMMANDS)}")
    cfg = RunConfig(**{k: _coerce(k, v) for k, v in data.items()})
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    if cfg.command == "selftest":
        return
    if cfg.n not in (1, 2, 3):
        raise ConfigError(f"n={cfg.n} unsupported; use 1, 2 or 3")
    try:
        if cfg.command == "limits":
            for s in cfg.s_list:
                validate_params(cfg.n, s, cfg.p, sobolev=False)
            if cfg.s_list != sorted(cfg.s_list):
                raise ConfigError("s_list must be increasing")
        else:
            validate_params(cfg.n, cfg.s, cfg.p, sobolev=cfg.command in ("chain",))
        cfg.quad()
        if cfg.command != "riesz":
            f = cfg.field_spec()
            needs_sign = cfg.command in ("ps", "asym") or (cfg.command == "chain" and cfg.asymmetric)
            if needs_sign and not f.nonnegative:
                raise ConfigError(f"command {cfg.command!r} needs a non-negative field")
            if cfg.command == "limits" and not f.smooth:
                raise ConfigError("limits needs a smooth field")
    except (ParamError, FieldError, KeyError, ValueError) as e:
        raise ConfigError(str(e).strip("'\"")) from None
    if not set(cfg.formats) <= {"json", "csv"}:
        raise ConfigError(f"formats must be drawn from json, csv; got {cfg.formats}")
    if cfg.tolerance < 0:
        raise ConfigError("tolerance must be non-negative")
    if cfg.body not in ("ball", "ellipse"):
        raise ConfigError(f"body must be 'ball' or 'ellipse', got {cfg.body!r}")


# -- commands -------------------------------------------------------------------------


def _params(cfg: RunConfig):
    return validate_params(cfg.n, cfg.s, cfg.p, sobolev=False)


def _cmd_projbody(cfg: RunConfig) -> harness.Report:
    f, params, quad = cfg.field_spec(), _params(cfg), cfg.quad()
    grid = quad.grid(cfg.n)
    rep = harness.Report("projbody", inputs={"field": f.to_dict(), "params": harness._params_dict(params)}, quad=quad.to_dict())
    with rep.stage("bodies"):
        bodies = build_frac_bodies(f, params, grid, quad)
    for v, b in bodies.items():
        rep.results[f"volume_{v}"] = volume(b.body)
    for k in range(grid.size):
        row = {"node": k}
        row.update({f"xi_{i}": float(grid.nodes[k, i]) for i in range(cfg.n)})
        row["weight"] = float(grid.weights[k])
        row.update({f"rho_{v}": float(bodies[v].body.rho[k]) for v in ("sym", "plus", "minus")})
        rep.rows.append(row)
    return rep


def _cmd_chain(cfg: RunConfig) -> harness.Report:
    return harness.sobolev_chain_report(cfg.field_spec(), _params(cfg), cfg.quad(), asymmetric=cfg.asymmetric, tol=cfg.tolerance)


def _cmd_ps(cfg: RunConfig) -> harness.Report:
    return harness.affine_ps_report(cfg.field_spec(), _params(cfg), cfg.quad(), tol=cfg.tolerance)


def _cmd_asym(cfg: RunConfig) -> harness.Report:
    return harness.asym_strengthening_report(cfg.field_spec(), _params(cfg), cfg.quad(), tol=cfg.tolerance)


def _cmd_optimal(cfg: RunConfig) -> harness.Report:
    return harness.optimal_body_report(cfg.field_spec(), _params(cfg), cfg.candidates, cfg.seed, cfg.quad(), tol=cfg.tolerance)


def _cmd_limits(cfg: RunConfig) -> harness.Report:
    quad = cfg.quad()
    grid = quad.grid(cfg.n)
    K = ball(grid) if cfg.body == "ball" else ellipsoid(grid, np.diag([1.3] + [1.0 / 1.3] + [1.0] * (cfg.n - 2))[: cfg.n, : cfg.n])
    return harness.bbm_limit_report(cfg.field_spec(), K, cfg.p, cfg.s_list, quad, final_tol=max(cfg.tolerance, 0.10))


def _cmd_riesz(cfg: RunConfig) -> harness.Report:
    if cfg.n > 2:
        raise ConfigError("riesz supports n <= 2")
    triples = harness.random_riesz_triples(cfg.triples, cfg.seed, cfg.n)
    eq = [False] * len(triples)
    if cfg.n == 2:
        triples.append(harness.burchard_triple(2))
        eq.append(True)
    rep = harness.riesz_report(triples, tol=cfg.tolerance, equality=eq)
    rep.inputs.update({"seed": cfg.seed, "n": cfg.n})
    return rep


def selftest_report(tol: float = 5e-3) -> harness.Report:
    """Closed-form oracles: 1-D indicator gauge, ball volumes, alpha_np and
    t-integral closed forms."""
    rep = harness.Report("selftest")
    params = validate_params(1, 0.25, 2.0)
    quad = QuadConfig(tgrid=TGrid(points=80))
    g = frac_gauge(ball_indicator(1, 0.5, center=[0.5]), [1.0], params, quad) ** params.ps
    rep.check("1-D indicator gauge^ps = 8", g, "==", 8.0, tol)
    for n, level in ((1, 1), (2, 16), (3, 12)):
        rep.check(f"vol(B^{n}) = omega_{n}", volume(ball(sphere_grid(n, level))), "==", omega_n(n), 1e-8)
    rep.check("alpha_{1,2} = 2", alpha_np(1, 2.0), "==", 2.0, 1e-12)
    rep.check("alpha_{2,2} = pi", alpha_np(2, 2.0), "==", math.pi, 1e-10)
    rep.check("alpha_{3,2} = 4 pi / 3", alpha_np(3, 2.0), "==", 4 * math.pi / 3, 1e-8)
    # int_0^inf t^{-3/2} 2 min(t, 1) dt = 4 + 4 = 8
    tg = TGrid(points=80, low_exponent=1 - 0.5 - 1, tail_coeff=2.0)
    val = t_integral(lambda t: 2 * np.minimum(t, 1.0), 0.5, tg, t_hi=1.0)
    rep.check("t-integral of 2 min(t,1) t^(-3/2) = 8", val, "==", 8.0, 1e-10)
    # int_0^inf t^{-3/2} min(t, 1)^2 dt = 2 + 2/3
    tg2 = TGrid(points=80, low_exponent=2 - 0.5 - 1, tail_coeff=1.0)
    val2 = t_integral(lambda t: np.minimum(t, 1.0) ** 2, 0.5, tg2, t_hi=1.0)
    rep.check("t-integral of min(t,1)^2 t^(-3/2) = 8/3", val2, "==", 8.0 / 3.0, 1e-10)
    return rep


def _cmd_selftest(cfg: RunConfig) -> harness.Report:
    return selftest_report()


_DISPATCH = {
    "projbody": _cmd_projbody,
    "chain": _cmd_chain,
    "ps": _cmd_ps,
    "asym": _cmd_asym,
    "optimal": _cmd_optimal,
    "limits": _cmd_limits,
    "riesz": _cmd_riesz,
    "selftest": _cmd_selftest,
}


def run(cfg: RunConfig, stream=None) -> tuple[int, Optional[harness.Report], list]:
    """Run one command; returns (exit code, report, written paths)."""
    stream = sys.stdout if stream is None else stream
    t0 = time.perf_counter()
    try:
        rep = _DISPATCH[cfg.command](cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG, None, []
    except (ArithmeticError, ValueError, FloatingPointError, np.linalg.LinAlgError) as e:
        print(f"computation error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_COMPUTE, None, []
    elapsed = time.perf_counter() - t0
    for c in rep.checks:
        print(c.line(), file=stream)
    written = []
    try:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        stem = f"{cfg.command}-{cfg.digest()}"
        if "json" in cfg.formats:
            p = out / f"{stem}.json"
            p.write_text(rep.to_json(), encoding="utf-8")
            written.append(p)
        if "csv" in cfg.formats:
            p = out / f"{stem}.csv"
            with open(p, "w", encoding="utf-8", newline="") as fh:
                fh.write(rep.to_csv())
            written.append(p)
        meta = rep.meta()
        meta.update({"config": cfg.to_dict(), "elapsed_s": elapsed, "finished_at": time.strftime("%Y-%m-%dT%H:%M:%S")})
        p = out / f"{stem}.meta.json"
        p.write_text(json.dumps(harness._plain(meta), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(p)
    except OSError as e:
        print(f"output error: {e}", file=sys.stderr)
        return EXIT_COMPUTE, rep, written
    status = "passed" if rep.passed else "FAILED"
    print(f"{cfg.command}: {status} ({elapsed:.2f} s) -> {written[0] if written else '-'}", file=stream)
    return (EXIT_OK if rep.passed else EXIT_ASSERT), rep, written


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracbody", description="Fractional polar projection bodies and their inequalities.")
    ap.add_argument("command", nargs="?", choices=COMMANDS, help="command (or use --command / the config file)")
    ap.add_argument("--config", help="JSON config file")
    ap.add_argument("--command", dest="command_flag", choices=COMMANDS)
    ap.add_argument("--out", help="output directory (default: reports)")
    ap.add_argument("--threads", type=int, help="worker cap (fallback: FRACBODY_THREADS)")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--tolerance", type=float)
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key (repeatable)")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_CONFIG
    try:
        overrides: dict = {}
        for item in args.set:
            k, v = _parse_set(item)
            overrides[k] = v
        command = args.command_flag or args.command
        if command is not None:
            overrides["command"] = command
        threads = args.threads
        if threads is None and os.environ.get("FRACBODY_THREADS"):
            threads = os.environ["FRACBODY_THREADS"]
        for k, v in (("out", args.out), ("threads", threads), ("seed", args.seed), ("tolerance", args.tolerance)):
            if v is not None:
                overrides[k] = v
        cfg = parse_config(args.config, overrides)
        if cfg.threads < 1:
            raise ConfigError("threads must be >= 1")
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    code, _, _ = run(cfg)
    return code


if __name__ == "__main__":
    sys.exit(main())
