"""Riemann-Roch data and heat coefficients of a cusped hyperbolic surface."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError
from .specfun import mp_gamma_log, working_context

__all__ = [
    "SurfaceType",
    "HeatCoefficients",
    "index_dbar",
    "dim_ker",
    "dim_coker",
    "eta_horizontal",
    "eta_vertical",
    "divisor_degree",
    "heat_coefficients",
    "zeta_at_zero",
    "index_table",
]


@dataclass(frozen=True)
class SurfaceType:
    """Genus ``g`` and number of cusps ``n`` of a hyperbolic surface."""

    g: int
    n: int

    def __post_init__(self):
        for name in ("g", "n"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 0:
                raise DomainError(f"{name} must be a non-negative integer, got {v!r}")
        if 2 * self.g + self.n < 3:
            raise DomainError(f"need 2g + n >= 3, got (g, n) = ({self.g}, {self.n})")

    @property
    def chi(self) -> int:
        return 2 - 2 * self.g - self.n

    @property
    def area(self) -> float:
        return 2 * math.pi * (2 * self.g - 2 + self.n)


def _surface(st) -> SurfaceType:
    if isinstance(st, SurfaceType):
        return st
    g, n = st
    return SurfaceType(g, n)


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def index_dbar(ell: int, st: SurfaceType) -> int:
    st = _surface(st)
    g, n = st.g, st.n
    if ell <= 0:
        return (2 * ell - 1) * (g - 1) + ell * n
    return (2 * ell - 1) * (g - 1) + (ell - 1) * n


def dim_ker(ell: int, st: SurfaceType) -> int:
    st = _surface(st)
    if ell < 0:
        return 0
    if ell == 0:
        return 1
    if ell == 1:
        return st.g
    return (2 * ell - 1) * (st.g - 1) + st.n * (ell - 1)


def dim_coker(ell: int, st: SurfaceType) -> int:
    st = _surface(st)
    if ell < 0:
        return -(2 * ell - 1) * (st.g - 1) - st.n * ell
    if ell == 0:
        return st.g
    if ell == 1:
        return 1
    return 0


def eta_horizontal(ell: int, st: SurfaceType) -> Fraction:
    """Eta invariant of the horizontal family: n sign(ell - 1/2)."""
    st = _surface(st)
    return Fraction(st.n * _sign(Fraction(ell) - Fraction(1, 2)))


def eta_vertical(ell: int, st: SurfaceType) -> Fraction:
    """The vertical family's eta invariant vanishes identically."""
    _surface(st)
    return Fraction(0)


def divisor_degree(ell: int, st: SurfaceType) -> int:
    st = _surface(st)
    return -(ell - 1) * (2 * st.g + st.n - 2)


@dataclass(frozen=True)
class HeatCoefficients:
    """Small-time coefficients of the renormalized heat trace.

    RTr(exp(-t Delta)) ~ a_m1/t + a_tilde_mhalf log(t)/sqrt(t) + a_mhalf/sqrt(t) + a_0.
    """

    a_m1: Fraction
    a_tilde_mhalf: float
    a_mhalf: float
    a_0: Fraction

    def to_json(self):
        return {"a_m1": str(self.a_m1), "a_tilde_mhalf": self.a_tilde_mhalf,
                "a_mhalf": self.a_mhalf, "a_0": str(self.a_0)}


def heat_coefficients(st: SurfaceType, a_m1_reading: str = "chi") -> HeatCoefficients:
    """Heat coefficients of the hyperbolic Laplacian on a surface of type (g, n).

    The leading coefficient is -chi/2 = (2g-2+n)/2, which is what the area
    term area/(4 pi) requires.  ``a_m1_reading="genus"`` gives the
    alternative value g - 1 instead; the two agree only when n = 0.
    """
    st = _surface(st)
    if a_m1_reading == "chi":
        a_m1 = Fraction(-st.chi, 2)
    elif a_m1_reading == "genus":
        a_m1 = Fraction(st.g - 1)
    else:
        raise ValueError(f"unknown reading {a_m1_reading!r}")
    ctx = working_context()
    sqrt_pi = ctx.sqrt(ctx.pi)
    a_tilde = st.n / (4 * sqrt_pi)
    a_half = st.n / (2 * sqrt_pi) * (1 - ctx.log(2) + mp_gamma_log(ctx, ctx.mpf(-0.5)) / (4 * sqrt_pi))
    return HeatCoefficients(a_m1, float(a_tilde), float(a_half), Fraction(st.chi, 6))


def zeta_at_zero(st: SurfaceType, s):
    """zeta(0; s(s-1)) = chi (1/6 + s(s-1)/2); exact for rational ``s``."""
    st = _surface(st)
    if isinstance(s, (int, Fraction)):
        s = Fraction(s)
        return st.chi * (Fraction(1, 6) + s * (s - 1) / 2)
    return st.chi * (1 / 6 + s * (s - 1) / 2)


def index_table(g: int, n: int, ells) -> list[dict]:
    st = SurfaceType(g, n)
    rows = []
    for ell in ells:
        rows.append({
            "ell": ell,
            "index": index_dbar(ell, st),
            "ker": dim_ker(ell, st),
            "coker": dim_coker(ell, st),
            "eta_horizontal": int(eta_horizontal(ell, st)),
            "divisor_degree": divisor_degree(ell, st),
        })
    return rows
