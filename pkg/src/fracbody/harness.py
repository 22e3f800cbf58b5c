"""Inequality reports: every assertion is constant-free and records the
tolerance it was judged against."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import AffineMap, FieldError, FieldSpec, FracParams, alpha_np, field_abs, omega_n, validate_params
from .projbody import (
    QuadConfig,
    anisotropic_energy,
    build_classical_body,
    build_frac_bodies,
    direct_double_energy,
)
from .quadrature import gl_box, lp_norm_p
from .rearrange import rearranged_field, riesz_gap
from .starbody import (
    StarBody,
    ball,
    dual_mixed_volume,
    is_dilate,
    normalized,
    radial_sum,
    random_star_body,
    volume,
)

DEFAULT_TOL = 0.02
IDENTITY_TOL = 1e-6


@dataclass
class Check:
    """One judged relation lhs <rel> rhs.

    ``<=``/``>=`` allow a relative slack ``tolerance``; ``==`` requires the
    relative difference to stay below it; ``<``/``>`` require a relative gap
    strictly larger than it. ``asserted=False`` records without judging.
    """

    name: str
    lhs: float
    rhs: float
    relation: str
    tolerance: float
    asserted: bool = True

    @property
    def rel_gap(self) -> float:
        scale = max(abs(self.lhs), abs(self.rhs), 1e-300)
        return (self.rhs - self.lhs) / scale

    @property
    def passed(self) -> bool:
        g, tol = self.rel_gap, self.tolerance
        if self.relation == "<=":
            return g >= -tol
        if self.relation == ">=":
            return g <= tol
        if self.relation == "==":
            return abs(g) <= tol
        if self.relation == "<":
            return g > tol
        if self.relation == ">":
            return g < -tol
        raise ValueError(self.relation)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "relation": self.relation,
            "rhs": self.rhs,
            "rel_gap": self.rel_gap,
            "tolerance": self.tolerance,
            "asserted": self.asserted,
            "passed": self.passed,
        }

    def line(self) -> str:
        status = ("PASS" if self.passed else "FAIL") if self.asserted else "INFO"
        return (
            f"[{status}] {self.name}: {self.lhs:.8g} {self.relation} {self.rhs:.8g} "
            f"(rel gap {self.rel_gap:+.3e}, tol {self.tolerance:g})"
        )


@dataclass
class Report:
    kind: str
    inputs: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    quad: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.asserted)

    def check(self, name, lhs, relation, rhs, tolerance, asserted=True) -> Check:
        c = Check(name, float(lhs), float(rhs), relation, float(tolerance), asserted)
        self.checks.append(c)
        return c

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        yield
        self.timings[name] = self.timings.get(name, 0.0) + time.perf_counter() - t0

    def merge(self, other: "Report", prefix: str = ""):
        for c in other.checks:
            c.name = prefix + c.name
            self.checks.append(c)
        self.results.update({prefix + k: v for k, v in other.results.items()})
        self.rows.extend(other.rows)
        self.timings.update({prefix + k: v for k, v in other.timings.items()})

    def to_dict(self) -> dict:
        """Deterministic content; wall-clock timings live in :meth:`meta`."""
        return {
            "kind": self.kind,
            "passed": self.passed,
            "inputs": self.inputs,
            "results": self.results,
            "checks": [c.to_dict() for c in self.checks],
            "rows": self.rows,
            "quadrature": self.quad,
        }

    def to_json(self) -> str:
        return json.dumps(_plain(self.to_dict()), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def meta(self) -> dict:
        return {"kind": self.kind, "timings_s": dict(self.timings)}

    def to_csv(self) -> str:
        """Flat rows: one per check, then one per table row."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["report", "record", "name", "lhs", "relation", "rhs", "rel_gap", "tolerance", "asserted", "passed"])
        for c in self.checks:
            w.writerow(
                [self.kind, "check", c.name, repr(c.lhs), c.relation, repr(c.rhs), repr(c.rel_gap), c.tolerance, int(c.asserted), int(c.passed)]
            )
        for r in self.rows:
            name = ";".join(f"{k}={_fmt(v)}" for k, v in r.items())
            w.writerow([self.kind, "row", name, "", "", "", "", "", "", ""])
        return buf.getvalue()


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


# -- field classification -------------------------------------------------------------


def is_radial(f: FieldSpec) -> bool:
    """Radially symmetric about the origin (catalog structure, not sampling)."""
    if f.is_composite:
        return False
    if f.center is not None and any(f.center):
        return False
    if f.affine is None:
        return True
    if np.any(f.affine.translation):
        return False
    m = f.affine.matrix
    g = m.T @ m
    return bool(np.allclose(g, g[0, 0] * np.eye(f.n), rtol=1e-12, atol=1e-12))


def is_affine_radial(f: FieldSpec) -> bool:
    """A translate of f* o phi for some phi in SL(n): every single catalog
    term is an affine image of a radially decreasing profile."""
    return not f.is_composite and f.nonnegative


def is_even(f: FieldSpec, samples: int = 256) -> bool:
    lo, hi = f.support_box()
    rng = np.random.default_rng(0)
    x = lo + (hi - lo) * rng.random((samples, f.n))
    a, b = f.value(x), f.value(-x)
    return bool(np.allclose(a, b, rtol=1e-12, atol=1e-14))


def _params_dict(params: FracParams) -> dict:
    return {"n": params.n, "s": params.s, "p": params.p, "ps": params.ps}


def _vol_power(body: StarBody, params: FracParams) -> float:
    return volume(body) ** (-params.ps / params.n)


# -- reports ------------------------------------------------------------------------


def sobolev_chain_report(
    f: FieldSpec,
    params: FracParams,
    quad: QuadConfig,
    asymmetric: bool = False,
    tol: float = DEFAULT_TOL,
    bodies: Optional[dict] = None,
    direct_c: Optional[bool] = None,
) -> Report:
    """A = ||f||_{np/(n-ps)}^p, B = n w_n^{(n+ps)/n} vol(P)^{-ps/n} and the
    Euclidean seminorm C; asserts B <= C, and B = C for radial f.

    C comes from the direct double integral when ``direct_c`` (default for
    n <= 2), so it shares no quadrature with B; the value through the body
    is reported as ``C_identity``. The asymmetric form uses the plus body and
    doubles B and C.
    """
    if not params.in_sobolev_range:
        raise ValueError("Sobolev chain needs ps < n")
    if asymmetric and not f.nonnegative:
        raise FieldError("asymmetric chain needs a non-negative field")
    n, ps = params.n, params.ps
    rep = Report("chain+" if asymmetric else "chain", inputs={"field": f.to_dict(), "params": _params_dict(params)}, quad=quad.to_dict())
    grid = quad.grid(n)
    with rep.stage("bodies"):
        if bodies is None:
            bodies = build_frac_bodies(f, params, grid, quad)
    variant = "plus" if asymmetric else "sym"
    factor = 2.0 if asymmetric else 1.0
    body = bodies[variant]
    with rep.stage("norms"):
        q = params.sobolev_exp
        A = lp_norm_p(f, q, quad.box) ** (params.p / q)
    B = factor * n * omega_n(n) ** ((n + ps) / n) * _vol_power(body.body, params)
    C_id = factor * anisotropic_energy(f, ball(grid), params, quad, variant, body=body)
    if direct_c is None:
        direct_c = n <= 2
    if direct_c:
        with rep.stage("direct"):
            C = factor * direct_double_energy(f, ball(grid), params, quad, variant)
    else:
        C = C_id
    rep.results.update({"C_identity": C_id, "C_method": "direct" if direct_c else "identity"})
    rep.results.update({"A": A, "B": B, "C": C, "A_over_B": A / B, "A_over_C": A / C, "volume": volume(body.body)})
    rep.check("B <= C", B, "<=", C, tol)
    if is_radial(f):
        rep.check("B == C (radial)", B, "==", C, tol)
    return rep


def abs_value_reduction_check(f: FieldSpec, params: FracParams, quad: QuadConfig, tol: float = 1e-8) -> Report:
    """Euclidean seminorm of |f| against that of f."""
    rep = Report("abs", inputs={"field": f.to_dict(), "params": _params_dict(params)}, quad=quad.to_dict())
    grid = quad.grid(f.n)
    B = ball(grid)
    with rep.stage("bodies"):
        e_f = anisotropic_energy(f, B, params, quad)
        e_abs = anisotropic_energy(field_abs(f), B, params, quad)
    rep.results.update({"seminorm_f": e_f, "seminorm_abs_f": e_abs})
    constant_sign = f.nonnegative or f.scaled(-1.0).nonnegative
    if constant_sign:
        rep.check("seminorm(|f|) == seminorm(f) (constant sign)", e_abs, "==", e_f, tol)
    else:
        rep.check("seminorm(|f|) <= seminorm(f)", e_abs, "<=", e_f, tol)
        rep.check("strict for sign change", e_abs, "<", e_f, tol, asserted=False)
    return rep


def affine_ps_report(
    f: FieldSpec,
    params: FracParams,
    quad: QuadConfig,
    tol: float = DEFAULT_TOL,
    gap_tol: Optional[float] = None,
    variants: Sequence[str] = ("sym", "plus"),
    expect_equality: Optional[bool] = None,
) -> Report:
    """vol(P f)^{-ps/n} >= vol(P f*)^{-ps/n} for the symmetric and plus bodies.

    Equality is asserted for translated SL(n) images of radial profiles; a
    strict gap above ``gap_tol`` is recorded (not asserted) otherwise.
    """
    if not f.nonnegative:
        raise FieldError("affine Polya-Szego needs a non-negative field")
    rep = Report("ps", inputs={"field": f.to_dict(), "params": _params_dict(params)}, quad=quad.to_dict())
    grid = quad.grid(f.n)
    with rep.stage("rearrange"):
        fs = rearranged_field(f)
    with rep.stage("bodies"):
        bf = build_frac_bodies(f, params, grid, quad)
        bs = build_frac_bodies(fs, params, grid, quad)
    equality = is_affine_radial(f) if expect_equality is None else expect_equality
    gap_tol = tol if gap_tol is None else gap_tol
    for v in variants:
        lhs, rhs = _vol_power(bf[v].body, params), _vol_power(bs[v].body, params)
        rep.results[f"{v}_lhs"] = lhs
        rep.results[f"{v}_rhs"] = rhs
        rep.check(f"{v}: vol(P f)^(-ps/n) >= vol(P f*)^(-ps/n)", lhs, ">=", rhs, tol)
        if equality:
            rep.check(f"{v}: equality for affine-radial f", lhs, "==", rhs, tol)
        else:
            rep.check(f"{v}: strict gap", lhs, ">", rhs, gap_tol, asserted=False)
    return rep


def asym_strengthening_report(
    f: FieldSpec,
    params: FracParams,
    quad: QuadConfig,
    tol: float = DEFAULT_TOL,
    gap_tol: float = 1e-2,
    bodies: Optional[dict] = None,
) -> Report:
    """Radial-sum identity P = P+ (+)_{-ps} P- and the dual Brunn-Minkowski
    bound vol(P)^{-ps/n} >= vol(P+)^{-ps/n} + vol(P-)^{-ps/n}."""
    if not f.nonnegative:
        raise FieldError("asymmetric strengthening needs a non-negative field")
    rep = Report("asym", inputs={"field": f.to_dict(), "params": _params_dict(params)}, quad=quad.to_dict())
    grid = quad.grid(f.n)
    with rep.stage("bodies"):
        if bodies is None:
            bodies = build_frac_bodies(f, params, grid, quad)
    P, Pp, Pm = (bodies[v].body for v in ("sym", "plus", "minus"))
    summed = radial_sum(Pp, Pm, -params.ps)
    dev = float(np.max(np.abs(summed.rho / P.rho - 1.0)))
    rep.results["radial_sum_max_rel_dev"] = dev
    rep.check("radial-sum identity (max nodewise rel. dev.)", dev, "<=", IDENTITY_TOL, 0.0)
    lhs = _vol_power(P, params)
    rhs = _vol_power(Pp, params) + _vol_power(Pm, params)
    rep.results.update({"lhs": lhs, "rhs": rhs})
    rep.check("dual Brunn-Minkowski", lhs, ">=", rhs, tol)
    even = is_even(f)
    dilates = is_dilate(Pp, Pm)
    rep.results.update({"even": even, "plus_minus_dilates": dilates})
    if even or dilates:
        rep.check("equality (P+ and P- dilates)", lhs, "==", rhs, tol)
    else:
        rep.check("strict gap (P+ and P- not dilates)", lhs, ">", rhs, gap_tol, asserted=False)
    return rep


def optimal_body_report(
    f: FieldSpec,
    params: FracParams,
    candidate_count: int,
    seed: int,
    quad: QuadConfig,
    tol: float = DEFAULT_TOL,
    bodies: Optional[dict] = None,
) -> Report:
    """The volume-normalised projection body against seeded random candidates."""
    n, ps = params.n, params.ps
    rep = Report(
        "optimal",
        inputs={"field": f.to_dict(), "params": _params_dict(params), "candidates": candidate_count, "seed": seed},
        quad=quad.to_dict(),
    )
    grid = quad.grid(n)
    with rep.stage("bodies"):
        if bodies is None:
            bodies = build_frac_bodies(f, params, grid, quad)
    P = bodies["sym"].body
    w_n = omega_n(n)
    P_hat = normalized(P, w_n)

    def energy(L: StarBody) -> float:
        return n * dual_mixed_volume(L, P, -ps)

    e_opt = energy(P_hat)
    bound = n * w_n ** ((n + ps) / n) * volume(P) ** (-ps / n)
    rep.results.update({"energy_optimal": e_opt, "volume_bound": bound})
    rep.check("energy(P_hat) equals the dual mixed volume bound", e_opt, "==", bound, 1e-10)
    margins = []
    violations = 0
    with rep.stage("candidates"):
        for i in range(candidate_count):
            L = normalized(random_star_body(seed + i, n, grid), w_n)
            e = energy(L)
            margins.append((e - e_opt) / e_opt)
            if not e > e_opt:
                violations += 1
    margins = np.array(margins)
    rep.results.update(
        {
            "violations": violations,
            "margin_min": float(margins.min()) if len(margins) else None,
            "margin_median": float(np.median(margins)) if len(margins) else None,
            "margin_max": float(margins.max()) if len(margins) else None,
        }
    )
    rep.check("violations among candidates", violations, "<=", 0, 0.0)
    if len(margins):
        rep.check("min candidate energy > optimal", e_opt, "<", e_opt * (1 + margins.min()), 0.0)
    if is_radial(f):
        rep.check("ball candidate for radial f", energy(ball(grid)), "==", e_opt, tol)
    return rep


def bbm_target(f: FieldSpec, K: StarBody, p: float, quad: QuadConfig) -> float:
    """n * dual mixed volume of K and the classical body with alpha = -p."""
    cl = build_classical_body(f, p, K.grid, "sym", quad)
    return float(np.dot(K.grid.weights, K.rho ** (K.n + p) * cl.gauges**p))


def euclidean_gradient_target(f: FieldSpec, p: float, quad: QuadConfig) -> float:
    """alpha_{n,p} * integral of |grad f|^p."""
    lo, hi = quad.box.box_for(f)
    x, w = gl_box(lo, hi, [quad.box.points_per_axis] * f.n)
    return alpha_np(f.n, p) * float(np.dot(w, np.linalg.norm(f.gradient(x), axis=1) ** p))


def bbm_limit_report(
    f: FieldSpec,
    K: StarBody,
    p: float,
    s_list: Sequence[float],
    quad: QuadConfig,
    final_tol: float = 0.10,
) -> Report:
    """p(1-s) * energy(f, K, s) along s_list against its s -> 1 limit."""
    if not f.smooth:
        raise FieldError("limit report needs a smooth field")
    if list(s_list) != sorted(s_list):
        raise ValueError("s_list must be increasing")
    n = f.n
    rep = Report("limits", inputs={"field": f.to_dict(), "p": p, "s_list": list(s_list), "body": K.to_dict()}, quad=quad.to_dict())
    with rep.stage("target"):
        target = bbm_target(f, K, p, quad)
    rep.results["target"] = target
    residuals = []
    for s in s_list:
        params = validate_params(n, s, p, sobolev=False)
        with rep.stage("bodies"):
            body = build_frac_bodies(f, params, K.grid, quad)["sym"]
        val = p * (1 - s) * anisotropic_energy(f, K, params, quad, body=body)
        res = abs(val - target)
        residuals.append(res)
        rep.rows.append({"s": s, "scaled_energy": val, "target": target, "residual": res})
    for i in range(1, len(residuals)):
        rep.check(f"residual decreases s={s_list[i - 1]}->{s_list[i]}", residuals[i], "<", residuals[i - 1], 0.0)
    rep.check("final residual / target", residuals[-1] / target, "<=", final_tol, 0.0)
    return rep


def random_sl(rng: np.random.Generator, n: int, strength: float = 0.6) -> AffineMap:
    """A random SL(n) map with moderate anisotropy (no translation)."""
    a = np.eye(n) + strength * rng.normal(size=(n, n))
    while abs(np.linalg.det(a)) < 0.2:
        a = np.eye(n) + strength * rng.normal(size=(n, n))
    if np.linalg.det(a) < 0:
        a[:, 0] = -a[:, 0]
    return AffineMap.sl(a)


def affine_invariance_report(
    f: FieldSpec,
    params: FracParams,
    quad: QuadConfig,
    shears: int = 5,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    min_increases: Optional[int] = None,
) -> Report:
    """vol(P(f o phi^-1))^{-ps/n} is SL(n)-invariant while the Euclidean
    seminorm is not."""
    n = params.n
    rep = Report("affine", inputs={"field": f.to_dict(), "params": _params_dict(params), "shears": shears, "seed": seed}, quad=quad.to_dict())
    grid = quad.grid(n)
    B0 = ball(grid)
    with rep.stage("bodies"):
        base = build_frac_bodies(f, params, grid, quad)["sym"]
    v0 = _vol_power(base.body, params)
    c0 = anisotropic_energy(f, B0, params, quad, body=base)
    rep.results.update({"vol_power_base": v0, "seminorm_base": c0})
    rng = np.random.default_rng(seed)
    increases = 0
    for i in range(shears):
        phi = random_sl(rng, n)
        g = f.transformed(phi)
        with rep.stage("bodies"):
            body = build_frac_bodies(g, params, grid, quad)["sym"]
        v = _vol_power(body.body, params)
        c = anisotropic_energy(g, B0, params, quad, body=body)
        rep.rows.append({"shear": i, "matrix": phi.matrix.tolist(), "vol_power": v, "seminorm": c})
        rep.check(f"shear {i}: vol power invariant", v, "==", v0, tol)
        inc = c > c0 * (1 + 1e-9)
        increases += int(inc)
        rep.check(f"shear {i}: seminorm increases", c0, "<", c, 0.0, asserted=False)
    need = shears - 1 if min_increases is None else min_increases
    rep.results["seminorm_increases"] = increases
    rep.check("seminorm increases for enough shears", increases, ">=", need, 0.0)
    return rep


def riesz_report(triples: Sequence[tuple], tol: float = DEFAULT_TOL, cells: Optional[int] = None, equality: Sequence[bool] = ()) -> Report:
    rep = Report("riesz", inputs={"triples": len(triples)})
    for i, (f, k, g) in enumerate(triples):
        with rep.stage("triples"):
            lhs, rhs = riesz_gap(f, k, g, cells)
        rep.rows.append({"triple": i, "lhs": lhs, "rhs": rhs})
        rep.check(f"triple {i}: lhs <= rhs", lhs, "<=", rhs, tol)
        if i < len(equality) and equality[i]:
            rep.check(f"triple {i}: equality", lhs, "==", rhs, tol)
    return rep


# -- field presets ------------------------------------------------------------------

_SHEAR2 = np.array([[1.6, 0.9], [0.3, 0.8]])


def _unit(n: int, k: int = 0) -> np.ndarray:
    e = np.zeros(n)
    e[k] = 1.0
    return e


def preset_field(name: str, n: int) -> FieldSpec:
    """Named test fields used by the CLI, tests and scripts."""
    from .core import ball_indicator, bump, field_sum, gaussian

    if name == "gaussian":
        return gaussian(n, 1.0)
    if name == "bump":
        return bump(n, 1.0)
    if name == "ball_indicator":
        return ball_indicator(n, 1.0)
    if name == "offset_bump":
        return bump(n, 1.0, center=0.4 * _unit(n))
    if name == "sheared_bump":
        m = np.eye(n)
        m[:2, :2] = _SHEAR2 if n >= 2 else m[:2, :2]
        phi = AffineMap.sl(m, 0.3 * _unit(n))
        return bump(n, 1.0).transformed(phi)
    if name == "sheared_gaussian":
        m = np.eye(n)
        if n >= 2:
            m[:2, :2] = _SHEAR2
        return gaussian(n, 1.0).transformed(AffineMap.sl(m))
    if name == "two_bump":
        return field_sum(bump(n, 0.7, center=-0.8 * _unit(n)), bump(n, 0.7, center=0.8 * _unit(n), scale=0.5))
    if name == "even_pair":
        return field_sum(bump(n, 0.7, center=-0.8 * _unit(n)), bump(n, 0.7, center=0.8 * _unit(n)))
    if name == "skewed":
        # staircase of bumps: gentle rise, steep fall along e_1
        e = _unit(n)
        return field_sum(bump(n, 1.0), bump(n, 0.6, center=0.4 * e, scale=1.5), bump(n, 0.3, center=0.7 * e, scale=2.0))
    if name == "signed_pair":
        return field_sum(bump(n, 0.7, center=-0.8 * _unit(n)), bump(n, 0.7, center=0.8 * _unit(n), scale=-1.0))
    raise KeyError(f"unknown field preset {name!r}")


FIELD_PRESETS = (
    "gaussian",
    "bump",
    "ball_indicator",
    "offset_bump",
    "sheared_bump",
    "sheared_gaussian",
    "two_bump",
    "even_pair",
    "skewed",
    "signed_pair",
)


def random_ellipse_indicator(rng: np.random.Generator, n: int = 2) -> FieldSpec:
    """Indicator of a random ellipse (axes in [0.4, 1.2], random centre)."""
    from .core import ball_indicator

    axes = rng.uniform(0.4, 1.2, size=n)
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    m = q @ np.diag(axes)
    phi = AffineMap(m, rng.uniform(-0.5, 0.5, size=n))
    return ball_indicator(n, 1.0).transformed(phi)


def random_riesz_triples(count: int, seed: int, n: int = 2) -> list:
    rng = np.random.default_rng(seed)
    return [tuple(random_ellipse_indicator(rng, n) for _ in range(3)) for _ in range(count)]


def burchard_triple(n: int = 2) -> tuple:
    """Three centred dilates of one ellipse; radii 1, 0.8, 0.5 satisfy the
    strict triangle inequalities, inside the equality window."""
    from .core import ball_indicator

    phi = AffineMap.sl(np.array([[1.5, 0.4], [0.0, 1.0 / 1.5]]) if n == 2 else np.eye(n))
    return tuple(ball_indicator(n, r).transformed(phi) for r in (1.0, 0.8, 0.5))


# -- cross-checks -------------------------------------------------------------------


def energy_identity_report(
    fields_: Sequence[FieldSpec],
    bodies: Sequence[StarBody],
    params: FracParams,
    quad: QuadConfig,
    tol: float = DEFAULT_TOL,
    cells: Optional[int] = None,
) -> Report:
    """Energy through the projection body against the direct double integral,
    for every field/body pair."""
    rep = Report("energy_identity", inputs={"params": _params_dict(params), "fields": [f.to_dict() for f in fields_]}, quad=quad.to_dict())
    for i, f in enumerate(fields_):
        with rep.stage("bodies"):
            pb = build_frac_bodies(f, params, bodies[0].grid, quad)["sym"]
        for j, K in enumerate(bodies):
            with rep.stage("identity"):
                e_id = anisotropic_energy(f, K, params, quad, body=pb)
            with rep.stage("direct"):
                e_dir = direct_double_energy(f, K, params, quad, cells=cells)
            rep.rows.append({"field": i, "body": j, "identity": e_id, "direct": e_dir})
            rep.check(f"field {i} body {j}: identity == direct", e_id, "==", e_dir, tol)
    return rep


def dual_inequalities_report(
    n: int,
    pairs: int,
    seed: int,
    level: int = 8,
    alpha: float = -1.0,
    q: float = -1.0,
    equality_tol: float = 1e-8,
) -> Report:
    """Dual mixed volume inequality (alpha < 0) and dual Brunn-Minkowski
    (q < 0) over seeded random body pairs, plus dilate equality cases."""
    from .quadrature import sphere_grid

    if not (alpha < 0 and q < 0):
        raise ValueError("this report covers alpha < 0 and q < 0")
    grid = sphere_grid(n, level)
    rep = Report("dual", inputs={"n": n, "pairs": pairs, "seed": seed, "level": level, "alpha": alpha, "q": q})

    def dmv(K, L):
        lhs = dual_mixed_volume(K, L, alpha) ** n
        rhs = volume(K) ** (n - alpha) * volume(L) ** alpha
        return lhs, rhs

    def dbm(K, L):
        lhs = volume(radial_sum(K, L, q)) ** (q / n)
        rhs = volume(K) ** (q / n) + volume(L) ** (q / n)
        return lhs, rhs

    viol_dmv = viol_dbm = 0
    min_gap_dmv = min_gap_dbm = math.inf
    with rep.stage("pairs"):
        for i in range(pairs):
            K = random_star_body(seed + 2 * i, n, grid)
            L = random_star_body(seed + 2 * i + 1, n, grid)
            a, b = dmv(K, L)
            c, d = dbm(K, L)
            g1, g2 = (a - b) / b, (c - d) / d
            viol_dmv += int(g1 <= 0)
            viol_dbm += int(g2 <= 0)
            min_gap_dmv, min_gap_dbm = min(min_gap_dmv, g1), min(min_gap_dbm, g2)
            rep.rows.append({"pair": i, "dmv_gap": g1, "dbm_gap": g2})
    rep.results.update({"min_gap_dmv": min_gap_dmv, "min_gap_dbm": min_gap_dbm})
    rep.check("dual mixed volume: violations", viol_dmv, "<=", 0, 0.0)
    rep.check("dual Brunn-Minkowski: violations", viol_dbm, "<=", 0, 0.0)
    K = random_star_body(seed, n, grid)
    for lam in (0.5, 2.0):
        a, b = dmv(K, K.scaled(lam))
        rep.check(f"dual mixed volume equality, dilate {lam}", a, "==", b, equality_tol)
        c, d = dbm(K, K.scaled(lam))
        rep.check(f"dual Brunn-Minkowski equality, dilate {lam}", c, "==", d, equality_tol)
    return rep
