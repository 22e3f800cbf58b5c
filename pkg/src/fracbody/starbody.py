"""Star bodies sampled on a shared sphere grid, and dual Brunn-Minkowski
primitives on them."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import AffineMap, omega_n
from .quadrature import SphereGrid, sphere_grid

DILATE_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class StarBody:
    grid: SphereGrid
    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=float)
        if rho.shape != (self.grid.size,):
            raise ValueError(f"rho has shape {rho.shape}, grid has {self.grid.size} nodes")
        if not np.all(np.isfinite(rho)) or np.any(rho <= 0):
            raise ValueError("radial function must be finite and strictly positive")
        rho.flags.writeable = False
        object.__setattr__(self, "rho", rho)

    @property
    def n(self) -> int:
        return self.grid.n

    def scaled(self, lam: float) -> "StarBody":
        return StarBody(self.grid, lam * self.rho)

    def reflected(self) -> "StarBody":
        """-K."""
        return StarBody(self.grid, self.rho[self.grid.antipode])

    def radial(self, dirs) -> np.ndarray:
        return radial_at(self, dirs)

    def to_dict(self) -> dict:
        return {"n": self.n, "level": self.grid.level, "rho": self.rho.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "StarBody":
        return cls(sphere_grid(int(d["n"]), int(d["level"])), np.array(d["rho"], dtype=float))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["node"] + [f"xi_{i}" for i in range(self.n)] + ["weight", "rho"])
        for k, (x, wt, r) in enumerate(zip(self.grid.nodes, self.grid.weights, self.rho)):
            w.writerow([k, *(repr(float(v)) for v in x), repr(float(wt)), repr(float(r))])
        return buf.getvalue()


def ball(grid: SphereGrid, radius: float = 1.0) -> StarBody:
    return StarBody(grid, np.full(grid.size, float(radius)))


def from_radial_function(grid: SphereGrid, fn: Callable[[np.ndarray], np.ndarray]) -> StarBody:
    return StarBody(grid, fn(grid.nodes))


def ellipsoid(grid: SphereGrid, matrix) -> StarBody:
    """The image of the unit ball under ``matrix``, sampled exactly."""
    inv = np.linalg.inv(np.asarray(matrix, dtype=float))
    return StarBody(grid, 1.0 / np.linalg.norm(grid.nodes @ inv.T, axis=1))


def _check_same(K: StarBody, L: StarBody):
    if not K.grid.same_as(L.grid):
        raise ValueError("bodies live on different sphere grids")


def radial_at(K: StarBody, dirs) -> np.ndarray:
    """Interpolated radial function at unit directions (M, n).

    n=1 picks the node with the same sign, n=2 is linear in angle, n=3 is
    bilinear in (cos theta, azimuth) with the pole value taken as the mean of
    the nearest ring.
    """
    dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
    g = K.grid
    if g.n == 1:
        return np.where(dirs[:, 0] >= 0, K.rho[0], K.rho[1])
    if g.n == 2:
        m = g.size
        pos = (np.arctan2(dirs[:, 1], dirs[:, 0]) % (2 * math.pi)) * m / (2 * math.pi)
        k0 = np.floor(pos).astype(int) % m
        frac = pos - np.floor(pos)
        return (1 - frac) * K.rho[k0] + frac * K.rho[(k0 + 1) % m]
    na = g.n_azimuth
    ct = g.cos_theta
    table = K.rho.reshape(len(ct), na)
    south, north = table[0].mean(), table[-1].mean()
    # extend the ring table with pole rows (constant in azimuth)
    ct_ext = np.concatenate([[-1.0], ct, [1.0]])
    table = np.vstack([np.full(na, south), table, np.full(na, north)])
    u = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    z = np.clip(u[:, 2], -1.0, 1.0)
    i0 = np.clip(np.searchsorted(ct_ext, z) - 1, 0, len(ct_ext) - 2)
    fz = (z - ct_ext[i0]) / (ct_ext[i0 + 1] - ct_ext[i0])
    pos = (np.arctan2(u[:, 1], u[:, 0]) % (2 * math.pi)) * na / (2 * math.pi)
    j0 = np.floor(pos).astype(int) % na
    fa = pos - np.floor(pos)
    j1 = (j0 + 1) % na
    lo = (1 - fa) * table[i0, j0] + fa * table[i0, j1]
    hi = (1 - fa) * table[i0 + 1, j0] + fa * table[i0 + 1, j1]
    return (1 - fz) * lo + fz * hi


def gauge_eval(K: StarBody, x) -> np.ndarray | float:
    """||x||_K = |x| / rho_K(x/|x|); accepts one point or an (M, n) array."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    r = np.linalg.norm(x, axis=1)
    if np.any(r == 0):
        raise ValueError("gauge at the origin is not evaluated")
    out = r / radial_at(K, x / r[:, None])
    return float(out[0]) if single else out


def volume(K: StarBody) -> float:
    return float(np.dot(K.grid.weights, K.rho**K.n)) / K.n


def dual_mixed_volume(K: StarBody, L: StarBody, alpha: float) -> float:
    """(1/n) * integral of rho_K^{n-alpha} rho_L^alpha over the sphere."""
    _check_same(K, L)
    n = K.n
    if alpha == 0 or alpha == n:
        raise ValueError("alpha must differ from 0 and n")
    return float(np.dot(K.grid.weights, K.rho ** (n - alpha) * L.rho**alpha)) / n


def radial_sum(K: StarBody, L: StarBody, q: float) -> StarBody:
    """q-radial sum: rho^q = rho_K^q + rho_L^q."""
    _check_same(K, L)
    if q == 0:
        raise ValueError("q must be non-zero")
    return StarBody(K.grid, (K.rho**q + L.rho**q) ** (1.0 / q))


def linear_image(phi, K: StarBody) -> StarBody:
    """phi K, resampled on K's grid."""
    if isinstance(phi, AffineMap):
        if np.any(phi.translation):
            raise ValueError("linear_image needs a map without translation")
        m = phi.matrix
    else:
        m = np.asarray(phi, dtype=float)
    if abs(np.linalg.det(m)) == 0:
        raise ValueError("singular matrix")
    pre = K.grid.nodes @ np.linalg.inv(m).T
    return StarBody(K.grid, 1.0 / gauge_eval(K, pre))


def schwarz_ball(K: StarBody) -> StarBody:
    """Centred ball with the volume of K."""
    return ball(K.grid, (volume(K) / omega_n(K.n)) ** (1.0 / K.n))


def normalized(K: StarBody, target_volume: float) -> StarBody:
    return K.scaled((target_volume / volume(K)) ** (1.0 / K.n))


def is_dilate(K: StarBody, L: StarBody, tol: float = DILATE_TOL) -> bool:
    _check_same(K, L)
    ratio = K.rho / L.rho
    return float((ratio.max() - ratio.min()) / ratio.min()) < tol


def moment_body_support(L: StarBody, p: float, xi) -> float:
    """Support function h at xi of the body with
    h^p = integral of |<xi, eta>|^p rho_L(eta)^{n+p} d eta."""
    if p < 1:
        raise ValueError("p >= 1 required")
    xi = np.asarray(xi, dtype=float)
    xi = xi / np.linalg.norm(xi)
    g = L.grid
    hp = float(np.dot(g.weights, np.abs(g.nodes @ xi) ** p * L.rho ** (L.n + p)))
    return hp ** (1.0 / p)


def random_star_body(seed: int, n: int, grid: SphereGrid, amplitude: float = 0.35) -> StarBody:
    """exp of a random low-order trigonometric/polynomial field, clipped to [0.2, 5]."""
    if grid.n != n:
        raise ValueError("grid dimension mismatch")
    rng = np.random.default_rng(seed)
    x = grid.nodes
    if n == 1:
        log_rho = rng.normal(0.0, 2 * amplitude, size=2)
    elif n == 2:
        theta = np.arctan2(x[:, 1], x[:, 0])
        log_rho = np.full(len(theta), rng.normal(0.0, 0.2))
        for k in range(1, 5):
            a, b = rng.normal(0.0, amplitude / k, size=2)
            log_rho += a * np.cos(k * theta) + b * np.sin(k * theta)
    else:
        log_rho = np.full(len(x), rng.normal(0.0, 0.2))
        log_rho += x @ rng.normal(0.0, amplitude, size=3)
        Q = rng.normal(0.0, amplitude / 2, size=(3, 3))
        log_rho += np.einsum("ki,ij,kj->k", x, Q, x)
        T = rng.normal(0.0, amplitude / 3, size=(3, 3, 3))
        log_rho += np.einsum("ki,kj,kl,ijl->k", x, x, x, T)
    return StarBody(grid, np.clip(np.exp(log_rho), 0.2, 5.0))
