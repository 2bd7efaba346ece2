"""Zeta-regularized determinants of the hyperbolic Laplacian on cusped surfaces.

The geometric determinant is assembled as

    log det(Delta + s(s-1)) = log Z(s) - chi log F(s) - n log P(s) + n log C

with F(s) = exp(E - s(s-1)) Gamma_2(s)^2 / Gamma(s) (2 pi)^s the compact
factor, P(s) = 2^s sqrt(pi (s - 1/2)) Gamma(s - 1/2) the cusp factor and
C a per-cusp normalization.  Two normalizations are offered:

``"asymptotic"`` (default)
    log C = log 2 pi per cusp, the value for which log det - log Z has no
    constant term as s -> oo, i.e. agrees with the small-time heat
    expansion.  Since 1/P = Z_cusp / sqrt(2 pi), this is
    det / Z = (2 pi)^{n/2} F^-chi Z_cusp^n.
``"printed"``
    no extra constant, i.e. the literal product Z F^-chi / P^n.

The two differ by exactly n log 2 pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DomainError
from .fuchsian import LengthSpectrum
from .index import HeatCoefficients, SurfaceType, _surface, zeta_at_zero
from .specfun import (
    EvalResult,
    mp_constant_E,
    mp_digamma,
    mp_gamma_log,
    mp_log_gamma,
    mp_log_gamma2,
    to_mp,
    to_result,
    working_context,
)
from .zeta import log_selberg_zeta, zeta_prime_at_1

__all__ = [
    "DetReport",
    "CUSP_NORMALIZATIONS",
    "log_sarnak_factor",
    "log_sarnak_factor_derivative",
    "log_cusp_factor",
    "closed_form_log_factor",
    "closed_form_log_factor_derivative",
    "det_geometric",
    "det_dbar",
    "sarnak_compact_factor",
    "local_terms_zeta_prime",
    "asymptotic_log_det_minus_log_z",
    "spectrum_contribution_bound",
    "det_prime_ratio_report",
]

CUSP_NORMALIZATIONS = ("asymptotic", "printed")


def _fmt_det(log_det: float):
    if -700 < log_det < 700:
        return math.exp(log_det)
    # outside the double range; emit a decimal string with 17 significant digits
    ctx = working_context()
    return ctx.nstr(ctx.exp(ctx.mpf(log_det)), 17)


@dataclass(frozen=True)
class DetReport:
    log_det: float
    inputs: dict
    assumptions: tuple[str, ...] = ()
    det_value: float | str = field(init=False)

    def __post_init__(self):
        if not math.isfinite(self.log_det):
            raise DomainError(f"log det is not finite: {self.log_det}")
        object.__setattr__(self, "det_value", _fmt_det(self.log_det))

    def to_json(self):
        return {"det_value": self.det_value, "log_det": self.log_det,
                "inputs": self.inputs, "assumptions": list(self.assumptions)}


def _real_s(ctx, s, lower, name):
    s = to_mp(ctx, s)
    if ctx.im(s) != 0 or not s > lower:
        raise DomainError(f"{name} needs real s > {lower}, got {s}")
    return ctx.re(s)


def _mp_log_sarnak(ctx, s):
    return (mp_constant_E(ctx) - s * (s - 1) + 2 * mp_log_gamma2(ctx, s)
            - mp_log_gamma(ctx, s) + s * ctx.log(2 * ctx.pi))


def _mp_dlog_sarnak(ctx, s):
    # d/ds log G(s) = (s - 1) psi(s) - s + (1 + log 2 pi)/2
    dlog_g = (s - 1) * mp_digamma(ctx, s) - s + (1 + ctx.log(2 * ctx.pi)) / 2
    return -(2 * s - 1) - 2 * dlog_g - mp_digamma(ctx, s) + ctx.log(2 * ctx.pi)


def _mp_log_cusp(ctx, s):
    half = ctx.mpf(1) / 2
    return s * ctx.log(2) + ctx.log(ctx.pi * (s - half)) / 2 + mp_log_gamma(ctx, s - half)


def _normalization_shift(ctx, n, cusp_normalization):
    if cusp_normalization == "asymptotic":
        return n * ctx.log(2 * ctx.pi)
    if cusp_normalization == "printed":
        return ctx.mpf(0)
    raise ValueError(f"unknown cusp normalization {cusp_normalization!r}; "
                     f"choose from {CUSP_NORMALIZATIONS}")


def log_sarnak_factor(s) -> EvalResult:
    """log F(s) for real s > 0."""
    ctx = working_context()
    return to_result(ctx, _mp_log_sarnak(ctx, _real_s(ctx, s, 0, "log_sarnak_factor")))


def log_sarnak_factor_derivative(s) -> EvalResult:
    ctx = working_context()
    return to_result(ctx, _mp_dlog_sarnak(ctx, _real_s(ctx, s, 0, "log_sarnak_factor_derivative")))


def log_cusp_factor(s) -> EvalResult:
    """log(2^s sqrt(pi (s - 1/2)) Gamma(s - 1/2)), s > 1/2."""
    ctx = working_context()
    return to_result(ctx, _mp_log_cusp(ctx, _real_s(ctx, s, ctx.mpf(1) / 2, "log_cusp_factor")))


def closed_form_log_factor(st: SurfaceType, s, cusp_normalization: str = "asymptotic") -> EvalResult:
    """log(det / Z): the spectrum-independent part of the determinant."""
    st = _surface(st)
    ctx = working_context()
    s = _real_s(ctx, s, ctx.mpf(1) / 2, "closed_form_log_factor")
    value = (-st.chi * _mp_log_sarnak(ctx, s) - st.n * _mp_log_cusp(ctx, s)
             + _normalization_shift(ctx, st.n, cusp_normalization))
    return to_result(ctx, value, notes=(f"cusp_normalization={cusp_normalization}",))


def closed_form_log_factor_derivative(st: SurfaceType, s) -> EvalResult:
    """d/ds of :func:`closed_form_log_factor`, evaluated analytically."""
    st = _surface(st)
    ctx = working_context()
    s = _real_s(ctx, s, ctx.mpf(1) / 2, "closed_form_log_factor_derivative")
    half = ctx.mpf(1) / 2
    dlog_cusp = ctx.log(2) + 1 / (2 * s - 1) + mp_digamma(ctx, s - half)
    return to_result(ctx, -st.chi * _mp_dlog_sarnak(ctx, s) - st.n * dlog_cusp)


def _check_consistent(st: SurfaceType, sp: LengthSpectrum):
    if sp.surface is not None and (sp.surface.g, sp.surface.n) != (st.g, st.n):
        raise DomainError(f"surface type {(st.g, st.n)} does not match the spectrum "
                          f"header {(sp.surface.g, sp.surface.n)}")


def _inputs(st, sp, s, **extra):
    out = {"s": float(s), "g": st.g, "n": st.n, "spectrum": dict(sp.provenance),
           "cutoff": sp.cutoff, "entries": len(sp)}
    out.update(extra)
    return out


def _zeta_assumptions(z):
    return tuple(z.assumptions) + (
        f"tail_estimate={z.tail_estimate!r}", f"k_cut={z.k_cut}")


def det_geometric(st: SurfaceType, sp: LengthSpectrum, s, cusp_normalization: str = "asymptotic") -> DetReport:
    """det(Delta + s(s-1)) from the Selberg zeta function, s > 1."""
    st = _surface(st)
    _check_consistent(st, sp)
    s = float(s)
    if not s > 1:
        raise DomainError(f"det_geometric needs s > 1, got {s}")
    z = log_selberg_zeta(sp, s)
    factor = closed_form_log_factor(st, s, cusp_normalization)
    assumptions = _zeta_assumptions(z) + (f"cusp_normalization={cusp_normalization}",)
    return DetReport(z.log_value + factor.value,
                     _inputs(st, sp, s, cusp_normalization=cusp_normalization,
                             log_zeta=z.log_value, log_factor=factor.value),
                     assumptions)


def det_dbar(st: SurfaceType, sp: LengthSpectrum, s, cusp_normalization: str = "asymptotic") -> DetReport:
    """det(Delta_dbar + s(s-1)/2) = 2^{-zeta(0; s(s-1))} det(Delta + s(s-1))."""
    st = _surface(st)
    geo = det_geometric(st, sp, s, cusp_normalization)
    z0 = zeta_at_zero(st, Fraction(geo.inputs["s"]))
    shift = -float(z0) * math.log(2)
    inputs = dict(geo.inputs, zeta_at_zero=float(z0), log_det_geometric=geo.log_det)
    return DetReport(geo.log_det + shift, inputs,
                     geo.assumptions + ("dbar-Laplacian = Delta / 2",))


def sarnak_compact_factor(g: int, s) -> EvalResult:
    """log of F(s)^{-chi} for a compact surface of genus g >= 2."""
    if isinstance(g, bool) or int(g) != g or g < 2:
        raise DomainError(f"compact factor needs integer genus g >= 2, got {g!r}")
    ctx = working_context()
    s = _real_s(ctx, s, 1, "sarnak_compact_factor")
    return to_result(ctx, (2 * int(g) - 2) * _mp_log_sarnak(ctx, s), notes=("log of the factor",))


def local_terms_zeta_prime(hc: HeatCoefficients, w, remainder=None) -> EvalResult:
    """zeta'(0; w) from the heat coefficients, plus an optional remainder.

    ``remainder`` is a callable w -> float returning the heat-trace integral
    that the coefficients do not capture; without it the integral is taken
    to be zero and the result carries a note saying so.
    """
    ctx = working_context()
    w = to_mp(ctx, w)
    if ctx.im(w) != 0 or not w > 0:
        raise DomainError(f"w must be real and positive, got {w}")
    w = ctx.re(w)
    sqrt_pi = ctx.sqrt(ctx.pi)
    log_w = ctx.log(w)
    a_m1, a_0 = to_mp(ctx, hc.a_m1), to_mp(ctx, hc.a_0)
    value = (-a_0 * log_w - 2 * sqrt_pi * ctx.mpf(hc.a_mhalf) * ctx.sqrt(w)
             + a_m1 * w * (log_w - 1))
    if hc.a_tilde_mhalf:
        half = ctx.mpf(1) / 2
        value += ctx.mpf(hc.a_tilde_mhalf) * ctx.sqrt(w) * (
            mp_gamma_log(ctx, -half) - log_w * ctx.gamma(-half))
    # a_mhalf and a_tilde_mhalf are doubles; their rounding dominates
    rounding = 2.3e-16 * float(abs(2 * sqrt_pi * hc.a_mhalf * ctx.sqrt(w))
                               + abs(hc.a_tilde_mhalf * ctx.sqrt(w) * (1 + abs(log_w)) * 4))
    if remainder is None:
        return to_result(ctx, value, rounding, notes=("remainder integral taken as 0",))
    return to_result(ctx, value + ctx.mpf(remainder(float(w))), rounding,
                     notes=("remainder integral user-supplied",))


def asymptotic_log_det_minus_log_z(hc: HeatCoefficients, s) -> EvalResult:
    """Large-s expansion of log(det / Z), without the o(1) terms.

    a_0 log w + (2 sqrt(pi) a_{-1/2} - a~ Gamma_log(-1/2))(s - 1/2)
      - 4 sqrt(pi) a~ (s - 1/2) log(s - 1/2) - a_{-1} w (log w - 1),  w = s(s-1).
    """
    ctx = working_context()
    s = _real_s(ctx, s, 1, "asymptotic_log_det_minus_log_z")
    half = ctx.mpf(1) / 2
    w = s * (s - 1)
    sqrt_pi = ctx.sqrt(ctx.pi)
    a_t, a_h = ctx.mpf(hc.a_tilde_mhalf), ctx.mpf(hc.a_mhalf)
    value = (to_mp(ctx, hc.a_0) * ctx.log(w)
             + (2 * sqrt_pi * a_h - a_t * mp_gamma_log(ctx, -half)) * (s - half)
             - 4 * sqrt_pi * a_t * (s - half) * ctx.log(s - half)
             - to_mp(ctx, hc.a_m1) * w * (ctx.log(w) - 1))
    rounding = 2.3e-16 * float(abs(s) * (abs(a_h) + abs(a_t)) * 10 * (1 + ctx.log(s)))
    return to_result(ctx, value, rounding)


def spectrum_contribution_bound(sp: LengthSpectrum, s: float) -> float:
    """Rigorous bound on |log Z(s)| for the finite spectrum ``sp``.

    Uses -log(1 - q) <= q / (1 - q) and sums the geometric series over k:
    |log Z(s)| <= sum_gamma e^{-s l} / ((1 - e^{-l})(1 - e^{-s l})).
    """
    s = float(s)
    if not s > 1:
        raise DomainError("bound requires s > 1")
    total = 0.0
    for e in sp.entries:
        q = math.exp(-s * e.length)
        total += e.multiplicity * q / (-math.expm1(-e.length) * -math.expm1(-s * e.length))
    # rounding of the sum itself
    return total * (1 + 1e-12)


UNKNOWN = "UNKNOWN"


def det_prime_ratio_report(ell: int, st: SurfaceType, sp: LengthSpectrum,
                           eps_grid=(0.2, 0.1, 0.05),
                           cusp_normalization: str = "asymptotic") -> dict:
    """The computable part of det'(Delta_ell) = alpha Z(ell) (or alpha Z'(1)).

    For ell >= 2 the report holds Z(ell), det(Delta + ell(ell-1)) and their
    ratio, which depends only on (g, n).  For ell in {0, 1} it holds the
    extrapolated Z'(1) and the s -> 1 limit of det/Z, whose product is
    det'(Delta_0) up to the constant.  Constants that the formulas leave
    undetermined are reported as UNKNOWN.
    """
    if isinstance(ell, bool) or int(ell) != ell or ell < 0:
        raise DomainError(f"ell must be a non-negative integer, got {ell!r}")
    ell = int(ell)
    st = _surface(st)
    _check_consistent(st, sp)
    report = {"ell": ell, "g": st.g, "n": st.n, "spectrum": dict(sp.provenance),
              "cutoff": sp.cutoff,
              "constants": {"alpha": UNKNOWN, "D": UNKNOWN, "delta": UNKNOWN},
              "cusp_normalization": cusp_normalization}
    if ell >= 2:
        z = log_selberg_zeta(sp, ell)
        det = det_geometric(st, sp, ell, cusp_normalization)
        report.update({
            "log_zeta": z.log_value,
            "zeta": math.exp(z.log_value),
            "tail_estimate": z.tail_estimate,
            "log_det": det.log_det,
            "det_value": det.det_value,
            "log_ratio": det.log_det - z.log_value,
            "ratio": _fmt_det(det.log_det - z.log_value),
            "flags": [],
        })
    else:
        zp = zeta_prime_at_1(sp, eps_grid)
        limit = closed_form_log_factor(st, 1, cusp_normalization)
        report.update({
            "zeta_prime_at_1": zp.value,
            "zeta_prime_at_1_abs_error": zp.abs_error,
            "zeta_prime_notes": list(zp.notes),
            "log_ratio": limit.value,
            "ratio": _fmt_det(limit.value),
            "det_prime_over_alpha": zp.value * math.exp(limit.value),
            "flags": ["LOW-CONFIDENCE"],
        })
    return report
