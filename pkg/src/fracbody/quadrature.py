"""Numerical integration: spherical grids, tensor Gauss-Legendre boxes and the
singular radial integral over t in (0, inf)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .core import FieldSpec, FracParams, omega_n

SPHERE_AREA = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}
REFERENCE_LEVEL = {1: 1, 2: 512, 3: 100}


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Quadrature nodes and weights on S^{n-1}.

    For n = 3 the nodes form a (polar x azimuth) product: ``cos_theta`` holds
    the Gauss-Legendre ring heights and ``n_azimuth`` the points per ring,
    node index = ring * n_azimuth + azimuth index.
    """

    n: int
    level: int
    nodes: np.ndarray
    weights: np.ndarray
    antipode: np.ndarray
    cos_theta: Optional[np.ndarray] = None
    n_azimuth: int = 0

    def __len__(self):
        return len(self.weights)

    @property
    def size(self) -> int:
        return len(self.weights)

    def same_as(self, other: "SphereGrid") -> bool:
        return self is other or (self.n == other.n and self.level == other.level and self.size == other.size)


@lru_cache(maxsize=32)
def sphere_grid(n: int, level: int) -> SphereGrid:
    """n=1: {+1,-1}; n=2: 8*level uniform angles; n=3: 2*level Gauss-Legendre
    rings in cos(theta) times 4*level azimuths."""
    if level < 1:
        raise ValueError("level must be >= 1")
    if n == 1:
        nodes = np.array([[1.0], [-1.0]])
        weights = np.ones(2)
        antipode = np.array([1, 0])
        return _frozen(SphereGrid(1, level, nodes, weights, antipode))
    if n == 2:
        m = 8 * level
        theta = 2 * math.pi * np.arange(m) / m
        nodes = np.column_stack([np.cos(theta), np.sin(theta)])
        weights = np.full(m, 2 * math.pi / m)
        antipode = (np.arange(m) + m // 2) % m
        return _frozen(SphereGrid(2, level, nodes, weights, antipode))
    if n == 3:
        nr, na = 2 * level, 4 * level
        ct, wt = np.polynomial.legendre.leggauss(nr)
        st = np.sqrt(1 - ct**2)
        phi = 2 * math.pi * np.arange(na) / na
        nodes = np.column_stack(
            [
                np.outer(st, np.cos(phi)).ravel(),
                np.outer(st, np.sin(phi)).ravel(),
                np.repeat(ct, na),
            ]
        )
        nodes /= np.linalg.norm(nodes, axis=1, keepdims=True)
        weights = np.repeat(wt, na) * (2 * math.pi / na)
        # GL nodes are symmetric, so ring i pairs with ring nr-1-i; symmetrise weights exactly
        weights = 0.5 * (weights + weights.reshape(nr, na)[::-1].ravel())
        ring = np.arange(nr * na) // na
        az = np.arange(nr * na) % na
        antipode = (nr - 1 - ring) * na + (az + na // 2) % na
        return _frozen(SphereGrid(3, level, nodes, weights, antipode, cos_theta=ct, n_azimuth=na))
    raise ValueError(f"unsupported dimension n={n}")


def reference_sphere_grid(n: int) -> SphereGrid:
    return sphere_grid(n, REFERENCE_LEVEL[n])


def _frozen(g: SphereGrid) -> SphereGrid:
    for a in (g.nodes, g.weights, g.antipode, g.cos_theta):
        if a is not None:
            a.flags.writeable = False
    return g


def integrate_sphere(values: np.ndarray, grid: SphereGrid) -> float:
    return float(np.dot(grid.weights, values))


# -- boxes ---------------------------------------------------------------------


@dataclass(frozen=True)
class BoxQuad:
    """Tensor Gauss-Legendre rule. ``half_extent=None`` fits the box to the
    support of the field being integrated."""

    half_extent: Optional[float] = None
    points_per_axis: int = 48

    def box_for(self, f: Optional[FieldSpec] = None, n: Optional[int] = None):
        if self.half_extent is not None:
            n = f.n if f is not None else n
            return np.full(n, -self.half_extent), np.full(n, self.half_extent)
        if f is None:
            raise ValueError("BoxQuad without half_extent needs a field")
        return f.support_box()


@lru_cache(maxsize=256)
def _gl(m: int):
    x, w = np.polynomial.legendre.leggauss(m)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def gl_box(lo: Sequence[float], hi: Sequence[float], counts: Sequence[int]):
    """Nodes (M, n) and weights (M,) of a tensor Gauss-Legendre rule on [lo, hi]."""
    axes, wts = [], []
    for a, b, m in zip(lo, hi, counts):
        x, w = _gl(int(m))
        axes.append(0.5 * (b - a) * x + 0.5 * (a + b))
        wts.append(0.5 * (b - a) * w)
    grids = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    weights = wts[0]
    for w in wts[1:]:
        weights = np.multiply.outer(weights, w)
    return nodes, weights.ravel()


def integrate_box(g: Callable[[np.ndarray], np.ndarray], q: BoxQuad, n: Optional[int] = None, lo=None, hi=None) -> float:
    """Tensor Gauss-Legendre estimate of the integral of ``g`` over a box.

    ``g`` receives an (M, n) array of points.
    """
    if lo is None:
        if q.half_extent is None:
            raise ValueError("integrate_box needs an explicit box")
        lo, hi = -np.full(n, q.half_extent), np.full(n, q.half_extent)
    nodes, w = gl_box(lo, hi, [q.points_per_axis] * len(lo))
    return float(np.dot(w, g(nodes)))


def lp_norm_p(f: FieldSpec, p: float, q: BoxQuad) -> float:
    """The integral of |f|^p."""
    if f.kind == "ball_indicator":
        det = 1.0 if f.affine is None else abs(f.affine.det)
        return abs(f.scale) ** p * det * omega_n(f.n) * f.radius**f.n
    lo, hi = q.box_for(f)
    return integrate_box(lambda x: np.abs(f.value(x)) ** p, q, lo=lo, hi=hi)


def lp_norm(f: FieldSpec, p: float, q: BoxQuad) -> float:
    return lp_norm_p(f, p, q) ** (1.0 / p)


# -- shifted energies ------------------------------------------------------------


def lens_volume(n: int, r: float, d: float) -> float:
    """Volume of the intersection of two radius-r balls whose centres are d apart."""
    if d >= 2 * r:
        return 0.0
    if n == 1:
        return 2 * r - d
    if n == 2:
        return 2 * r * r * math.acos(d / (2 * r)) - 0.5 * d * math.sqrt(4 * r * r - d * d)
    if n == 3:
        return math.pi * (4 * r + d) * (2 * r - d) ** 2 / 12
    raise ValueError(n)


def shift_energies(f: FieldSpec, z, p: float, q: BoxQuad) -> tuple[float, float, float]:
    """(|.|^p, (.)_+^p, (.)_-^p) integrals of f(x+z) - f(x) over R^n.

    Single ball indicators use the exact overlap measure; everything else is
    integrated with Gauss-Legendre over the bounding box of both supports.
    """
    z = np.asarray(z, dtype=float)
    if f.kind == "ball_indicator":
        zu = z if f.affine is None else f.affine.inverse_matrix @ z
        det = 1.0 if f.affine is None else abs(f.affine.det)
        miss = det * (omega_n(f.n) * f.radius**f.n - lens_volume(f.n, f.radius, float(np.linalg.norm(zu))))
        half = abs(f.scale) ** p * miss
        return 2 * half, half, half
    lo, hi = q.box_for(f)
    width = hi - lo
    if np.any(np.abs(z) >= width):
        norm = lp_norm_p(f, p, q)
        return 2 * norm, norm, norm
    if not np.any(z):
        return 0.0, 0.0, 0.0
    blo = np.minimum(lo, lo - z)
    bhi = np.maximum(hi, hi - z)
    counts = np.ceil(q.points_per_axis * (bhi - blo) / width).astype(int)
    x, w = gl_box(blo, bhi, counts)
    d = f.value(x + z) - f.value(x)
    pos = np.maximum(d, 0.0) ** p
    neg = np.maximum(-d, 0.0) ** p
    plus = float(np.dot(w, pos))
    minus = float(np.dot(w, neg))
    return plus + minus, plus, minus


def shifted_energy(f: FieldSpec, z, p: float, q: BoxQuad) -> float:
    """Integral of |f(x+z) - f(x)|^p."""
    return shift_energies(f, z, p, q)[0]


def shifted_energy_signed(f: FieldSpec, z, p: float, sign: str, q: BoxQuad) -> float:
    """Integral of (f(x+z) - f(x))_+^p or its negative-part analogue."""
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    _, plus, minus = shift_energies(f, z, p, q)
    return plus if sign == "+" else minus


def separation_time(f: FieldSpec, xi, q: BoxQuad) -> float:
    """Smallest t after which supp f and supp f(. + t xi) are disjoint boxes."""
    lo, hi = q.box_for(f)
    xi = np.abs(np.asarray(xi, dtype=float))
    with np.errstate(divide="ignore"):
        t = np.where(xi > 0, (hi - lo) / np.where(xi > 0, xi, 1.0), np.inf)
    return float(np.min(t))


# -- the t integral ------------------------------------------------------------------


@dataclass(frozen=True)
class TGrid:
    """Log-spaced rule for the integral of t^{-ps-1} phi(t) over (0, inf).

    ``low_exponent`` is the power of the whole integrand near 0 and
    ``tail_coeff`` the limit of phi at infinity. Either may be left ``None``
    and filled in by the caller.
    """

    t_min: float = 1e-4
    t_max: float = 1e4
    points: int = 200
    low_exponent: Optional[float] = None
    tail_coeff: Optional[float] = None

    def __post_init__(self):
        if not (0 < self.t_min < self.t_max):
            raise ValueError("need 0 < t_min < t_max")
        if self.points < 2:
            raise ValueError("need at least 2 t points")
        if self.low_exponent is not None and self.low_exponent <= -1:
            raise ValueError("low_exponent must exceed -1 for integrability at 0")

    def with_(self, **kw) -> "TGrid":
        from dataclasses import replace

        return replace(self, **kw)


def t_nodes(grid: TGrid, t_hi: Optional[float] = None):
    """Composite Gauss-Legendre nodes in log t, one panel per decade.

    Returns (t, w) with ``sum(w * g(t))`` approximating the integral of g(t) dt/t
    on [t_min, t_hi].
    """
    t_hi = grid.t_max if t_hi is None else min(t_hi, grid.t_max)
    a, b = math.log10(grid.t_min), math.log10(t_hi)
    # panel edges on integer decades so kinks at powers of ten stay on edges
    edges = [a] + [k for k in range(math.floor(a) + 1, math.ceil(b))] + [b]
    edges = [e for i, e in enumerate(edges) if i == 0 or e > edges[i - 1] + 1e-12]
    panels = max(len(edges) - 1, 1)
    m = max(4, math.ceil(grid.points / panels))
    x, w = _gl(m)
    ts, ws = [], []
    ln10 = math.log(10.0)
    for lo, hi in zip(edges[:-1], edges[1:]):
        u = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        ts.append(10.0**u)
        ws.append(0.5 * (hi - lo) * w * ln10)
    return np.concatenate(ts), np.concatenate(ws)


def t_integral(profile: Callable, params, grid: TGrid, t_hi: Optional[float] = None) -> float:
    """Integral over (0, inf) of t^{-ps-1} * profile(t).

    Gauss-Legendre in log t on [t_min, min(t_hi, t_max)], a power-law head
    below t_min with the grid's ``low_exponent``, and the analytic tail
    ``tail_coeff * t_upper^{-ps} / ps``. ``profile`` is called once with an
    array of t values. ``params`` is a FracParams or the number ps.
    """
    ps = params.ps if isinstance(params, FracParams) else float(params)
    low = grid.low_exponent
    if low is None:
        if not isinstance(params, FracParams):
            raise ValueError("low_exponent required when params is a bare ps")
        low = params.p * (1 - params.s) - 1
    if low <= -1:
        raise ValueError("integrand not integrable at 0")
    if grid.tail_coeff is None:
        raise ValueError("tail_coeff required")
    t, w = t_nodes(grid, t_hi)
    upper = grid.t_max if t_hi is None else min(t_hi, grid.t_max)
    vals = np.asarray(profile(np.concatenate([[grid.t_min], t])), dtype=float)
    if np.any(vals < -1e-12 * max(1.0, float(np.max(np.abs(vals))))):
        raise ValueError("profile must be non-negative")
    phi0, phi = vals[0], vals[1:]
    body = float(np.dot(w, t ** (-ps) * phi))
    head = grid.t_min ** (-ps) * phi0 / (low + 1)
    tail = grid.tail_coeff * upper ** (-ps) / ps
    return head + body + tail
