"""Schwarz symmetrization of catalog fields, level-set measures and the
rearrangement inequalities of Riesz and Polya-Szego."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.signal import fftconvolve

from .core import FieldError, FieldSpec, FracParams, ball_indicator, omega_n
from .projbody import QuadConfig, anisotropic_energy, build_frac_bodies
from .starbody import StarBody, schwarz_ball

LEVEL_CELLS = {1: 200_000, 2: 1000, 3: 120}


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Decreasing radial function f*(x) = value at |x|, monotone cubic between samples."""

    n: int
    radii: np.ndarray
    values: np.ndarray
    _interp: PchipInterpolator = field(init=False, repr=False)

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if r.ndim != 1 or r.shape != v.shape or len(r) < 2:
            raise ValueError("radii and values must be 1-D of equal length >= 2")
        if r[0] != 0 or np.any(np.diff(r) <= 0):
            raise ValueError("radii must start at 0 and increase strictly")
        if np.any(np.diff(v) > 0) or np.any(v < 0):
            raise ValueError("values must be non-negative and non-increasing")
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "_interp", PchipInterpolator(r, v, extrapolate=False))

    @property
    def support_radius(self) -> float:
        return float(self.radii[-1])

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        out = self._interp(np.minimum(r, self.support_radius))
        return np.where(r >= self.support_radius, 0.0, out)

    def derivative(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        d = self._interp.derivative()(np.minimum(r, self.support_radius))
        return np.where(r >= self.support_radius, 0.0, d)

    def level_measure(self, t: float) -> float:
        """Measure of {f* >= t}."""
        if t > self.values[0]:
            return 0.0
        if t <= 0:
            return math.inf
        fine = np.linspace(0, self.support_radius, 20001)
        vals = self(fine)
        r = fine[vals >= t].max() if np.any(vals >= t) else 0.0
        return omega_n(self.n) * r**self.n

    def as_field(self) -> FieldSpec:
        return FieldSpec("radial", self.n, profile=self)

    def to_dict(self) -> dict:
        return {"n": self.n, "radii": self.radii.tolist(), "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "RadialProfile":
        return cls(int(d["n"]), np.array(d["radii"]), np.array(d["values"]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["radius", "value"])
        for r, v in zip(self.radii, self.values):
            w.writerow([repr(float(r)), repr(float(v))])
        return buf.getvalue()


@dataclass(frozen=True, eq=False)
class _LevelTable:
    """f sampled on a uniform midpoint lattice, sorted decreasingly."""

    sorted_values: np.ndarray
    cell_volume: float

    def measure(self, t) -> np.ndarray:
        # count of samples with value >= t in a decreasing array
        idx = np.searchsorted(-self.sorted_values, -np.asarray(t, dtype=float), side="right")
        return idx * self.cell_volume


def _level_table(f: FieldSpec, cells: Optional[int] = None) -> _LevelTable:
    cells = LEVEL_CELLS[f.n] if cells is None else cells
    lo, hi = f.support_box()
    pad = 0.01 * float(np.max(hi - lo))
    lo, hi = lo - pad, hi + pad
    h = (hi - lo) / cells
    axes = [lo[i] + (np.arange(cells) + 0.5) * h[i] for i in range(f.n)]
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, f.n)
    vals = f.value(X)
    return _LevelTable(np.sort(vals)[::-1], float(np.prod(h)))


def superlevel_measure(f: FieldSpec, t: float, cells: Optional[int] = None) -> float:
    """Measure of {f >= t} for t > 0, by counting cells of a midpoint lattice."""
    if t <= 0:
        raise ValueError("threshold must be positive")
    return float(_level_table(f, cells).measure(t))


def _check_nonnegative(f: FieldSpec, table: Optional[_LevelTable] = None):
    if not f.nonnegative:
        raise FieldError("rearrangement needs a non-negative field")
    if table is not None and table.sorted_values[-1] < -1e-12:
        raise FieldError("field takes negative values")


def schwarz_rearrange(f: FieldSpec, level_count: int = 400, cells: Optional[int] = None) -> RadialProfile:
    """Symmetric decreasing rearrangement from the measures of geometric
    super-level thresholds between 1e-4 max f and max f."""
    _check_nonnegative(f)
    table = _level_table(f, cells)
    _check_nonnegative(f, table)
    fmax = float(table.sorted_values[0])
    if fmax <= 0:
        raise FieldError("field vanishes identically")
    t = fmax * np.geomspace(1e-4, 1.0, level_count)[::-1]
    meas = table.measure(t)
    radii = (meas / omega_n(f.n)) ** (1.0 / f.n)
    # decreasing t, increasing radius; drop repeated radii keeping the largest value
    r_out, v_out = [0.0], [fmax]
    for r, v in zip(radii, t):
        if r > r_out[-1] * (1 + 1e-12) + 1e-15:
            r_out.append(float(r))
            v_out.append(float(v))
    if len(r_out) == 2 and np.allclose(radii, radii[-1]):
        # indicator-like: one jump at the common radius
        return _step_profile(f.n, r_out[-1], fmax)
    r_end = r_out[-1] * 1.02 + 1e-6
    r_out.append(r_end)
    v_out.append(0.0)
    return RadialProfile(f.n, np.array(r_out), np.array(v_out))


def _step_profile(n: int, radius: float, height: float) -> RadialProfile:
    # a steep monotone ramp over 1e-9 relative width stands in for the jump
    r = np.array([0.0, radius, radius * (1 + 1e-9)])
    return RadialProfile(n, r, np.array([height, height, 0.0]))


def rearranged_field(f: FieldSpec, level_count: int = 400, cells: Optional[int] = None) -> FieldSpec:
    """f* as a field; indicator-like profiles come back as ball indicators."""
    prof = schwarz_rearrange(f, level_count, cells)
    if len(prof.radii) == 3 and prof.values[0] == prof.values[1]:
        return ball_indicator(f.n, float(prof.radii[1]), scale=float(prof.values[0]))
    return prof.as_field()


# -- Riesz ---------------------------------------------------------------------------


def _riesz_sum(f: FieldSpec, k: FieldSpec, g: FieldSpec, cells: int) -> float:
    n = f.n
    lo = np.minimum(f.support_box()[0], g.support_box()[0])
    hi = np.maximum(f.support_box()[1], g.support_box()[1])
    pad = 0.01 * float(np.max(hi - lo))
    lo, hi = lo - pad, hi + pad
    h = (hi - lo) / cells
    axes = [lo[i] + (np.arange(cells) + 0.5) * h[i] for i in range(n)]
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    F = f.value(X)
    G = g.value(X)
    offs = [np.arange(-(cells - 1), cells) * h[i] for i in range(n)]
    Z = np.stack(np.meshgrid(*offs, indexing="ij"), axis=-1)
    Kz = k.value(Z)
    # sum_i sum_j F_i K(x_i - x_j) G_j
    conv = fftconvolve(G, Kz, mode="full")
    sl = tuple(slice(cells - 1, 2 * cells - 1) for _ in range(n))
    cell = float(np.prod(h))
    return float(np.sum(F * conv[sl])) * cell * cell


def riesz_gap(f: FieldSpec, k: FieldSpec, g: FieldSpec, cells: Optional[int] = None) -> tuple[float, float]:
    """(lhs, rhs) of the Riesz rearrangement inequality for the triple
    int int f(x) k(x-y) g(y) dx dy."""
    n = f.n
    if n > 2:
        raise ValueError("riesz_gap supports n <= 2 only")
    if not (k.n == g.n == n):
        raise ValueError("dimension mismatch")
    for h in (f, k, g):
        _check_nonnegative(h)
    cells = (4000 if n == 1 else 400) if cells is None else cells
    lhs = _riesz_sum(f, k, g, cells)
    fs, ks, gs = (rearranged_field(h) for h in (f, k, g))
    rhs = _riesz_sum(fs, ks, gs, cells)
    return lhs, rhs


# -- Polya-Szego ---------------------------------------------------------------------


def polya_szego_gap(
    f: FieldSpec,
    K: StarBody,
    params: FracParams,
    variant: str,
    quad: QuadConfig,
    f_star: Optional[FieldSpec] = None,
    bodies: Optional[dict] = None,
    star_bodies: Optional[dict] = None,
) -> tuple[float, float]:
    """(energy of f w.r.t. K, energy of f* w.r.t. the Schwarz ball of K)."""
    if variant not in ("sym", "plus"):
        raise ValueError("variant must be 'sym' or 'plus'")
    _check_nonnegative(f)
    if f.is_zero:
        raise FieldError("zero field")
    if f_star is None:
        f_star = rearranged_field(f)
    if bodies is None:
        bodies = build_frac_bodies(f, params, K.grid, quad)
    if star_bodies is None:
        star_bodies = build_frac_bodies(f_star, params, K.grid, quad)
    lhs = anisotropic_energy(f, K, params, quad, variant, body=bodies[variant])
    rhs = anisotropic_energy(f_star, schwarz_ball(K), params, quad, variant, body=star_bodies[variant])
    return lhs, rhs
