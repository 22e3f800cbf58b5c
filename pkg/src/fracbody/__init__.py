"""Fractional L^p polar projection bodies of functions, the star-body
geometry around them, and numerical checks of the inequalities they satisfy."""

from .core import (
    AffineMap,
    FieldError,
    FieldSpec,
    FracParams,
    ParamError,
    alpha_np,
    ball_indicator,
    bubble,
    bump,
    field_abs,
    field_sum,
    gaussian,
    omega_n,
    validate_params,
)
from .projbody import (
    QuadConfig,
    anisotropic_energy,
    build_classical_body,
    build_frac_bodies,
    build_frac_body,
    direct_double_energy,
    frac_gauge,
    frac_gauge_signed,
)
from .quadrature import BoxQuad, SphereGrid, TGrid, sphere_grid, t_integral
from .starbody import StarBody, ball, dual_mixed_volume, ellipsoid, radial_sum, random_star_body, volume

__version__ = "0.1.0"
