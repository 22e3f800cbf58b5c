"""Parameters, affine maps and the analytic test-function catalog."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

KINDS = ("ball_indicator", "gaussian", "bubble", "bump", "sum", "abs", "radial")
SMOOTH_KINDS = ("gaussian", "bubble", "bump", "radial")

# Gaussians are treated as supported in 6 widths: exp(-36) is below double precision
# relative to the peak.
GAUSSIAN_SUPPORT_WIDTHS = 6.0
# Bubbles decay algebraically; the box is cut where the profile drops below this level.
BUBBLE_CUTOFF = 1e-3
MAX_CONDITION = 1e6


class ParamError(ValueError):
    """Invalid (n, s, p) triple."""


class FieldError(ValueError):
    """Invalid field descriptor or unsupported operation on a field."""


@dataclass(frozen=True)
class FracParams:
    n: int
    s: float
    p: float

    @property
    def ps(self) -> float:
        return self.p * self.s

    @property
    def sobolev_exp(self) -> float:
        """n p / (n - p s); infinite outside the Sobolev range."""
        if self.ps >= self.n:
            return math.inf
        return self.n * self.p / (self.n - self.ps)

    @property
    def in_sobolev_range(self) -> bool:
        return self.ps < self.n

    def to_dict(self) -> dict:
        return {"n": self.n, "s": self.s, "p": self.p}


def validate_params(n: int, s: float, p: float, sobolev: bool = True) -> FracParams:
    """Check (n, s, p) and return the parameter record.

    With ``sobolev=False`` the constraint p < n/s is dropped; the fractional
    energies and the s -> 1 limits are defined without it, only the Sobolev
    exponent needs it.
    """
    if int(n) != n or n not in (1, 2, 3):
        raise ParamError(f"dimension n={n} not supported (need 1, 2 or 3)")
    if not (math.isfinite(s) and 0.0 < s < 1.0):
        raise ParamError(f"s={s} outside (0, 1)")
    if not (math.isfinite(p) and p > 1.0):
        raise ParamError(f"p={p} must satisfy p > 1")
    if sobolev and p * s >= n:
        raise ParamError(f"p >= n/s: p={p}, n/s={n / s:g} (need p*s < n)")
    return FracParams(int(n), float(s), float(p))


def omega_n(n: int) -> float:
    """Volume of the n-dimensional unit ball."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def alpha_np(n: int, p: float, eta: Optional[Sequence[float]] = None, level: Optional[int] = None) -> float:
    """Integral of |<xi, eta>|^p over the unit sphere, by spherical quadrature."""
    from .quadrature import reference_sphere_grid, sphere_grid

    if p < 1:
        raise ValueError("alpha_np needs p >= 1")
    grid = reference_sphere_grid(n) if level is None else sphere_grid(n, level)
    if eta is None:
        eta = np.zeros(n)
        eta[-1] = 1.0
    eta = np.asarray(eta, dtype=float)
    eta = eta / np.linalg.norm(eta)
    return float(np.sum(grid.weights * np.abs(grid.nodes @ eta) ** p))


@dataclass(frozen=True, eq=False)
class AffineMap:
    """x = matrix @ u + translation."""

    matrix: np.ndarray
    translation: np.ndarray
    det: float = field(init=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise FieldError("affine matrix must be square")
        t = np.zeros(m.shape[0]) if self.translation is None else np.array(self.translation, dtype=float)
        if t.shape != (m.shape[0],):
            raise FieldError("translation has wrong length")
        det = float(np.linalg.det(m))
        if det == 0.0 or not np.isfinite(det):
            raise FieldError("singular affine matrix")
        if np.linalg.cond(m) > MAX_CONDITION:
            raise FieldError(f"affine matrix condition number exceeds {MAX_CONDITION:g}")
        m.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "det", det)

    @classmethod
    def identity(cls, n: int) -> "AffineMap":
        return cls(np.eye(n), np.zeros(n))

    @classmethod
    def sl(cls, matrix, translation=None) -> "AffineMap":
        """Rescale ``matrix`` to determinant one."""
        m = np.array(matrix, dtype=float)
        n = m.shape[0]
        det = np.linalg.det(m)
        if det == 0:
            raise FieldError("singular affine matrix")
        if det < 0:
            if n % 2 == 0:
                raise FieldError("negative determinant cannot be normalised to +1 in even dimension")
            m = -m
            det = -det
        return cls(m / det ** (1.0 / n), translation)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def inverse_matrix(self) -> np.ndarray:
        return np.linalg.inv(self.matrix)

    def apply(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(u) @ self.matrix.T + self.translation

    def apply_inverse(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x) - self.translation) @ self.inverse_matrix.T

    def compose(self, other: "AffineMap") -> "AffineMap":
        """self after other."""
        return AffineMap(self.matrix @ other.matrix, self.matrix @ other.translation + self.translation)

    def to_dict(self) -> dict:
        return {"matrix": self.matrix.tolist(), "translation": self.translation.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "AffineMap":
        return cls(np.array(d["matrix"], dtype=float), np.array(d.get("translation", [0.0] * len(d["matrix"]))))

    def __eq__(self, other):
        return (
            isinstance(other, AffineMap)
            and np.array_equal(self.matrix, other.matrix)
            and np.array_equal(self.translation, other.translation)
        )

    def __hash__(self):
        return hash((self.matrix.tobytes(), self.translation.tobytes()))


@dataclass(frozen=True)
class FieldSpec:
    """Analytic test function ``scale * f0(phi^{-1}(x))``.

    ``radius`` is the radius for ``ball_indicator``/``bump``, the width for
    ``gaussian`` and the length scale for ``bubble``. ``sum`` adds ``terms``,
    ``abs`` takes the modulus of its single term, ``radial`` wraps a
    decreasing radial profile (see :mod:`fracbody.rearrange`).
    """

    kind: str
    n: int
    radius: float = 1.0
    center: Optional[tuple] = None
    s: Optional[float] = None
    affine: Optional[AffineMap] = None
    scale: float = 1.0
    terms: tuple = ()
    profile: Any = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FieldError(f"unknown field kind {self.kind!r}")
        if self.n not in (1, 2, 3):
            raise FieldError(f"dimension {self.n} not supported")
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise FieldError("radius/width must be strictly positive")
        if self.center is not None:
            c = tuple(float(v) for v in self.center)
            if len(c) != self.n:
                raise FieldError("center has wrong length")
            object.__setattr__(self, "center", c)
        if self.affine is not None and self.affine.n != self.n:
            raise FieldError("affine map dimension mismatch")
        if self.kind == "bubble":
            if self.s is None or not 0 < self.s < 1:
                raise FieldError("bubble needs 0 < s < 1")
            if self.n <= 2 * self.s:
                raise FieldError("bubble needs n > 2s")
        if self.kind in ("sum", "abs"):
            if not self.terms:
                raise FieldError(f"{self.kind} needs terms")
            if self.kind == "abs" and len(self.terms) != 1:
                raise FieldError("abs takes exactly one term")
            if any(t.n != self.n for t in self.terms):
                raise FieldError("term dimension mismatch")
            object.__setattr__(self, "terms", tuple(self.terms))
        if self.kind == "radial" and self.profile is None:
            raise FieldError("radial kind needs a profile")

    # -- structure ---------------------------------------------------------

    @property
    def is_composite(self) -> bool:
        return self.kind in ("sum", "abs")

    @property
    def smooth(self) -> bool:
        if self.is_composite:
            return all(t.smooth for t in self.terms)
        return self.kind in SMOOTH_KINDS

    @property
    def nonnegative(self) -> bool:
        if self.kind == "abs":
            return True
        if self.kind == "sum":
            return self.scale >= 0 and all(t.nonnegative for t in self.terms)
        return self.scale >= 0

    @property
    def is_zero(self) -> bool:
        if self.scale == 0:
            return True
        if self.is_composite:
            return all(t.is_zero for t in self.terms)
        return False

    def difference_order(self, p: float) -> float:
        """Power beta with ||f(.+t xi) - f||_p^p ~ t^beta as t -> 0."""
        return p if self.smooth else 1.0

    def _center(self) -> np.ndarray:
        return np.zeros(self.n) if self.center is None else np.asarray(self.center, dtype=float)

    def _support_radius(self) -> float:
        if self.kind in ("ball_indicator", "bump"):
            return self.radius
        if self.kind == "gaussian":
            return GAUSSIAN_SUPPORT_WIDTHS * self.radius
        if self.kind == "bubble":
            e = (self.n - 2 * self.s) / 2
            return self.radius * math.sqrt(BUBBLE_CUTOFF ** (-1 / e) - 1)
        if self.kind == "radial":
            return float(self.profile.support_radius)
        raise AssertionError(self.kind)

    def support_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Axis-aligned box containing the (effective) support."""
        if self.is_composite:
            boxes = [t.support_box() for t in self.terms]
            lo = np.min([b[0] for b in boxes], axis=0)
            hi = np.max([b[1] for b in boxes], axis=0)
            if self.affine is not None:
                corners = np.array(np.meshgrid(*zip(lo, hi), indexing="ij")).reshape(self.n, -1).T
                img = self.affine.apply(corners)
                return img.min(axis=0), img.max(axis=0)
            return lo, hi
        R = self._support_radius()
        c = self._center()
        if self.affine is None:
            return c - R, c + R
        mid = self.affine.apply(c)
        half = R * np.linalg.norm(self.affine.matrix, axis=1)
        return mid - half, mid + half

    # -- evaluation ----------------------------------------------------------

    def _local(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n:
            raise FieldError(f"point dimension {x.shape[-1]} != {self.n}")
        return x if self.affine is None else self.affine.apply_inverse(x)

    def value(self, x) -> np.ndarray:
        """Vectorised evaluation; ``x`` has shape (..., n)."""
        u = self._local(x)
        if self.kind == "sum":
            out = sum(t.value(u) for t in self.terms)
        elif self.kind == "abs":
            out = np.abs(self.terms[0].value(u))
        else:
            q = np.sum((u - self._center()) ** 2, axis=-1) / self.radius**2
            if self.kind == "ball_indicator":
                out = (q <= 1.0).astype(float)
            elif self.kind == "gaussian":
                out = np.exp(-q)
            elif self.kind == "bump":
                inside = q < 1.0
                out = np.zeros_like(q)
                out[inside] = np.exp(1.0 - 1.0 / (1.0 - q[inside]))
            elif self.kind == "bubble":
                out = (1.0 + q) ** (-(self.n - 2 * self.s) / 2)
            else:
                out = self.profile(np.sqrt(q) * self.radius)
        return self.scale * out

    def gradient(self, x) -> np.ndarray:
        """Analytic gradient, shape (..., n)."""
        if not self.smooth:
            raise FieldError(f"gradient undefined for non-smooth kind {self.kind!r}")
        u = self._local(x)
        if self.kind == "sum":
            g = sum(t.gradient(u) for t in self.terms)
        elif self.kind == "abs":
            t = self.terms[0]
            g = np.sign(t.value(u))[..., None] * t.gradient(u)
        else:
            d = u - self._center()
            r2 = self.radius**2
            q = np.sum(d**2, axis=-1) / r2
            if self.kind == "gaussian":
                dq = np.exp(-q) * -1.0
            elif self.kind == "bump":
                inside = q < 1.0
                dq = np.zeros_like(q)
                qi = q[inside]
                dq[inside] = -np.exp(1.0 - 1.0 / (1.0 - qi)) / (1.0 - qi) ** 2
            elif self.kind == "bubble":
                e = (self.n - 2 * self.s) / 2
                dq = -e * (1.0 + q) ** (-e - 1)
            else:
                r = np.sqrt(q) * self.radius
                safe = np.where(r > 0, r, 1.0)
                # d/dq of profile(radius*sqrt(q)) = profile'(r) * radius^2 / (2 r)
                dq = np.where(r > 0, self.profile.derivative(r) * r2 / (2 * safe), 0.0)
            g = (2.0 * dq / r2)[..., None] * d
        if self.affine is not None:
            g = g @ self.affine.inverse_matrix
        return self.scale * g

    # -- transforms ----------------------------------------------------------

    def transformed(self, phi: AffineMap) -> "FieldSpec":
        """The field ``f o phi^{-1}``."""
        new = phi if self.affine is None else phi.compose(self.affine)
        return _replace(self, affine=new)

    def translated(self, a) -> "FieldSpec":
        a = np.asarray(a, dtype=float)
        return self.transformed(AffineMap(np.eye(self.n), a))

    def scaled(self, c: float) -> "FieldSpec":
        return _replace(self, scale=self.scale * c)

    # -- serialisation -------------------------------------------------------

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind, "n": self.n}
        if self.kind not in ("sum", "abs", "radial"):
            d["radius"] = self.radius
        if self.center is not None:
            d["center"] = list(self.center)
        if self.s is not None:
            d["s"] = self.s
        if self.affine is not None:
            d["affine"] = self.affine.to_dict()
        if self.scale != 1.0:
            d["scale"] = self.scale
        if self.terms:
            d["terms"] = [t.to_dict() for t in self.terms]
        if self.profile is not None:
            d["profile"] = self.profile.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FieldSpec":
        known = {"kind", "n", "radius", "width", "center", "s", "affine", "scale", "terms", "profile"}
        extra = set(d) - known
        if extra:
            raise FieldError(f"unknown field keys: {sorted(extra)}")
        if "kind" not in d or "n" not in d:
            raise FieldError("field needs 'kind' and 'n'")
        profile = None
        if d.get("profile") is not None:
            from .rearrange import RadialProfile

            profile = RadialProfile.from_dict(d["profile"])
        return cls(
            kind=d["kind"],
            n=int(d["n"]),
            radius=float(d.get("radius", d.get("width", 1.0))),
            center=tuple(d["center"]) if d.get("center") is not None else None,
            s=d.get("s"),
            affine=AffineMap.from_dict(d["affine"]) if d.get("affine") else None,
            scale=float(d.get("scale", 1.0)),
            terms=tuple(cls.from_dict(t) for t in d.get("terms", ())),
            profile=profile,
        )


def _replace(f: FieldSpec, **changes) -> FieldSpec:
    from dataclasses import replace

    return replace(f, **changes)


def eval_field(f: FieldSpec, x) -> float:
    """Value of ``f`` at a single point."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(x)):
        raise FieldError("point must be finite")
    return float(f.value(x[None, :])[0])


def eval_gradient(f: FieldSpec, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return f.gradient(x[None, :])[0]


# -- catalog shorthands -------------------------------------------------------


def _c(center, n):
    return None if center is None else tuple(np.broadcast_to(np.asarray(center, dtype=float), (n,)))


def ball_indicator(n: int, radius: float = 1.0, center=None, scale: float = 1.0) -> FieldSpec:
    return FieldSpec("ball_indicator", n, radius=radius, center=_c(center, n), scale=scale)


def gaussian(n: int, width: float = 1.0, center=None, scale: float = 1.0) -> FieldSpec:
    return FieldSpec("gaussian", n, radius=width, center=_c(center, n), scale=scale)


def bump(n: int, radius: float = 1.0, center=None, scale: float = 1.0) -> FieldSpec:
    return FieldSpec("bump", n, radius=radius, center=_c(center, n), scale=scale)


def bubble(n: int, s: float, scale: float = 1.0) -> FieldSpec:
    """(1 + |x|^2)^{-(n-2s)/2}, the p = 2 extremal profile."""
    return FieldSpec("bubble", n, s=s, scale=scale)


def field_sum(*terms: FieldSpec, scale: float = 1.0) -> FieldSpec:
    return FieldSpec("sum", terms[0].n, terms=tuple(terms), scale=scale)


def field_abs(f: FieldSpec) -> FieldSpec:
    return FieldSpec("abs", f.n, terms=(f,))
