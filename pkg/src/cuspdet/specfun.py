"""High-precision special functions.

Everything here is evaluated in an extended-precision mpmath context and
reported as a double together with an error estimate.  Gamma, digamma and
zeta values come straight from mpmath; the Barnes G function (and hence
the double Gamma function) is evaluated here along two independent routes.

Double Gamma convention:  ``Gamma_2(s) = 1 / G(s)`` where ``G`` is the
Barnes G function, ``G(1) = 1``, ``G(s + 1) = Gamma(s) G(s)``.  The double
Gamma function therefore satisfies ``Gamma_2(s + 1) = Gamma_2(s) / Gamma(s)``
and is the normalization for which

    log(exp(E - s(s-1)) Gamma_2(s)^2 / Gamma(s) (2 pi)^s)
        = -1/6 log s(s-1) + s(s-1)/2 - s(s-1)/2 log s(s-1) + o(1).
"""

from __future__ import annotations

import contextvars
import math
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from numbers import Number

from mpmath import MPContext

from .errors import DomainError, PoleError

__all__ = [
    "EvalResult",
    "precision",
    "working_context",
    "log_gamma",
    "digamma",
    "gamma_log",
    "log_barnes_g",
    "log_gamma2",
    "bernoulli_numbers",
    "bernoulli_poly",
    "bernoulli_poly_coefficients",
    "riemann_zeta_minus_one",
    "zeta_prime_minus_one",
    "constant_E",
    "dhoker_phong_c",
]

DEFAULT_DIGITS = 34
MIN_DIGITS = 30

_digits = contextvars.ContextVar("cuspdet_digits", default=DEFAULT_DIGITS)
_local = threading.local()


@dataclass(frozen=True)
class EvalResult:
    """A scalar value with a bound on its rounding/truncation error."""

    value: float | complex
    abs_error: float
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if not (self.abs_error >= 0):
            raise ValueError(f"abs_error must be non-negative, got {self.abs_error}")
        if _isfinite(self.value) and not math.isfinite(self.abs_error):
            raise ValueError("finite value with non-finite error estimate")

    def __float__(self):
        return float(self.value)

    def to_json(self):
        out = {"abs_error": self.abs_error, "notes": list(self.notes)}
        if isinstance(self.value, complex):
            out["value"] = {"re": self.value.real, "im": self.value.imag}
        else:
            out["value"] = self.value
        return out


def _isfinite(v):
    if isinstance(v, complex):
        return math.isfinite(v.real) and math.isfinite(v.imag)
    return math.isfinite(v)


@contextmanager
def precision(digits: int):
    """Raise the working precision (decimal digits) inside a ``with`` block.

    Values below the 30-digit floor are clamped up to it.
    """
    token = _digits.set(max(int(digits), MIN_DIGITS))
    try:
        yield
    finally:
        _digits.reset(token)


def working_context() -> MPContext:
    """Thread-local mpmath context at the current working precision."""
    ctx = getattr(_local, "ctx", None)
    if ctx is None:
        ctx = _local.ctx = MPContext()
    ctx.dps = _digits.get()
    return ctx


def to_mp(ctx, x):
    if isinstance(x, Fraction):
        return ctx.mpf(x.numerator) / x.denominator
    if isinstance(x, complex):
        if x.imag == 0:
            return ctx.mpf(x.real)
        return ctx.mpc(x)
    if isinstance(x, str):
        return ctx.mpf(x)
    return ctx.convert(x)


def _is_nonpositive_integer(ctx, z):
    if ctx.im(z) != 0:
        return False
    x = ctx.re(z)
    return x <= 0 and x == ctx.floor(x)


def to_result(ctx, value, extra_error=0, notes=()) -> EvalResult:
    """Round an mpmath value to a double and attach an error estimate."""
    relative = ctx.mpf(10) ** (-(ctx.dps - 3))
    if ctx.im(value) != 0:
        z = complex(value)
        mag = abs(value)
        err = float(mag * relative + extra_error) + 2.3e-16 * abs(z)
        return EvalResult(z, err, tuple(notes))
    x = float(ctx.re(value))
    err = float(abs(value) * relative + abs(extra_error)) + math.ulp(x)
    return EvalResult(x, err, tuple(notes))


# --- Gamma and digamma -------------------------------------------------------

def mp_log_gamma(ctx, z):
    if _is_nonpositive_integer(ctx, z):
        raise PoleError(f"log Gamma has a pole at z = {z}")
    v = ctx.loggamma(z)
    if ctx.im(z) == 0 and ctx.re(z) > 0:
        return ctx.re(v)
    return v


def log_gamma(z) -> EvalResult:
    """Principal branch of log Gamma(z)."""
    ctx = working_context()
    return to_result(ctx, mp_log_gamma(ctx, to_mp(ctx, z)))


def mp_digamma(ctx, z):
    if _is_nonpositive_integer(ctx, z):
        raise PoleError(f"digamma has a pole at z = {z}")
    return ctx.digamma(z)


def digamma(z) -> EvalResult:
    ctx = working_context()
    return to_result(ctx, mp_digamma(ctx, to_mp(ctx, z)))


def mp_gamma_log(ctx, z):
    """Meromorphic continuation of int_0^oo t^(z-1) e^-t log t dt.

    On z > 0 the integral equals Gamma(z) Psi(z); below that the value is
    carried down with Gamma_log(z) = (Gamma_log(z + 1) - Gamma(z)) / z.
    """
    if ctx.im(z) != 0:
        raise DomainError("gamma_log is only provided for real arguments")
    z = ctx.re(z)
    if _is_nonpositive_integer(ctx, z):
        raise PoleError(f"Gamma_log has a pole at z = {z}")
    if z > 0:
        return ctx.gamma(z) * ctx.digamma(z)
    shift = int(ctx.floor(-z)) + 1
    value = ctx.gamma(z + shift) * ctx.digamma(z + shift)
    for j in range(shift - 1, -1, -1):
        value = (value - ctx.gamma(z + j)) / (z + j)
    return value


def gamma_log(z) -> EvalResult:
    ctx = working_context()
    return to_result(ctx, mp_gamma_log(ctx, to_mp(ctx, z)))


# --- Barnes G / double Gamma ---------------------------------------------------

def _asymptotic_threshold(ctx):
    # the optimally truncated series has its smallest term near exp(-2 pi x)
    return max(15, int(0.4 * ctx.dps) + 4)


def _log_g_asymptotic_series(ctx, x):
    """log G(1 + x) for large positive x."""
    lx = ctx.log(x)
    value = (x * x / 2 * lx - 3 * x * x / 4 + x / 2 * ctx.log(2 * ctx.pi)
             - lx / 12 + mp_zeta_prime_minus_one(ctx))
    eps = ctx.mpf(10) ** (-(ctx.dps + 2))
    bern = bernoulli_numbers(4 * ctx.dps + 40)
    x2 = x * x
    power = x2
    previous = None
    k = 1
    while 2 * k + 2 < len(bern):
        b = bern[2 * k + 2]
        term = (ctx.mpf(b.numerator) / b.denominator) / (4 * k * (k + 1) * power)
        if previous is not None and abs(term) > abs(previous):
            break
        value += term
        if abs(term) < eps * max(1, abs(value)):
            break
        previous = term
        power *= x2
        k += 1
    return value


def mp_log_barnes_g_asymptotic(ctx, z):
    """log G(z), z > 0: asymptotic series at z + N, then the recurrence downward."""
    x0 = _asymptotic_threshold(ctx)
    shift = max(0, int(ctx.ceil(x0 + 1 - z)))
    value = _log_g_asymptotic_series(ctx, z + shift - 1)
    for j in range(shift - 1, -1, -1):
        value -= ctx.loggamma(z + j)
    return value


def _log_g_taylor(ctx, t):
    """log G(1 + t) by its Maclaurin series, |t| <= 1/2."""
    value = t / 2 * ctx.log(2 * ctx.pi) - (t + (1 + ctx.euler) * t * t) / 2
    eps = ctx.mpf(10) ** (-(ctx.dps + 2))
    power = t ** 3
    k = 2
    while True:
        term = (-1) ** k * ctx.zeta(k) * power / (k + 1)
        value += term
        if abs(power) < eps:
            break
        power *= t
        k += 1
    return value


def mp_log_barnes_g_taylor(ctx, z):
    """log G(z), z > 0: Maclaurin series near 1, then the recurrence upward."""
    m = int(ctx.floor(z - ctx.mpf(1) / 2))
    z0 = z - m
    value = _log_g_taylor(ctx, z0 - 1)
    if m >= 0:
        for j in range(m):
            value += ctx.loggamma(z0 + j)
    else:
        for j in range(1, -m + 1):
            value -= ctx.loggamma(z0 - j)
    return value


def mp_log_barnes_g(ctx, z):
    # near 1 the Maclaurin route is cheaper, elsewhere the asymptotic one
    if abs(z - 1) <= ctx.mpf(1) / 2:
        return mp_log_barnes_g_taylor(ctx, z)
    return mp_log_barnes_g_asymptotic(ctx, z)


def _check_positive(ctx, s, name):
    if ctx.im(s) != 0 or ctx.re(s) <= 0:
        raise DomainError(f"{name} requires a real argument s > 0, got {s}")
    return ctx.re(s)


def log_barnes_g(s, method: str = "auto") -> EvalResult:
    """log G(s) for real s > 0.

    ``method`` is ``"asymptotic"``, ``"taylor"`` or ``"auto"``.  With
    ``"auto"`` both routes are evaluated and their disagreement enters the
    error estimate.
    """
    ctx = working_context()
    s = _check_positive(ctx, to_mp(ctx, s), "log_barnes_g")
    if method == "asymptotic":
        return to_result(ctx, mp_log_barnes_g_asymptotic(ctx, s))
    if method == "taylor":
        return to_result(ctx, mp_log_barnes_g_taylor(ctx, s))
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    a = mp_log_barnes_g_asymptotic(ctx, s)
    b = mp_log_barnes_g_taylor(ctx, s)
    return to_result(ctx, a, extra_error=abs(a - b))


def mp_log_gamma2(ctx, s):
    return -mp_log_barnes_g(ctx, s)


def log_gamma2(s, method: str = "auto") -> EvalResult:
    """log Gamma_2(s) = -log G(s), real s > 0."""
    r = log_barnes_g(s, method=method)
    return EvalResult(-r.value, r.abs_error, r.notes)


# --- Bernoulli numbers and polynomials ----------------------------------------

_bernoulli_table: list[Fraction] = [Fraction(1)]
_bernoulli_lock = threading.Lock()


def bernoulli_numbers(M: int) -> list[Fraction]:
    """Exact B_0, ..., B_M with the convention B_1 = -1/2."""
    if M < 0:
        raise ValueError("M must be >= 0")
    with _bernoulli_lock:
        table = _bernoulli_table
        # sum_{k=0}^{m} C(m+1, k) B_k = 0 for m >= 1
        while len(table) <= M:
            m = len(table)
            acc = Fraction(0)
            c = 1
            for k in range(m):
                acc += c * table[k]
                c = c * (m + 1 - k) // (k + 1)
            table.append(-acc / (m + 1))
        return table[: M + 1]


def bernoulli_poly_coefficients(m: int) -> list[Fraction]:
    """Coefficients [c_0, ..., c_m] of B_m(x) = sum c_j x^j."""
    if m < 0:
        raise ValueError("m must be >= 0")
    bern = bernoulli_numbers(m)
    coeffs = [Fraction(0)] * (m + 1)
    c = 1
    for k in range(m + 1):
        coeffs[m - k] = c * bern[k]
        c = c * (m - k) // (k + 1)
    return coeffs


def bernoulli_poly(m: int, ell) -> Fraction:
    """B_m(ell), exact for rational ``ell``."""
    ell = Fraction(ell)
    acc = Fraction(0)
    for c in reversed(bernoulli_poly_coefficients(m)):
        acc = acc * ell + c
    return acc


# --- named constants ---------------------------------------------------------

def mp_zeta_prime_minus_one(ctx):
    return ctx.zeta(-1, derivative=1)


def zeta_prime_minus_one() -> EvalResult:
    ctx = working_context()
    return to_result(ctx, mp_zeta_prime_minus_one(ctx))


def riemann_zeta_minus_one() -> Fraction:
    """zeta(-1) = -B_2 / 2 = -1/12."""
    return -bernoulli_numbers(2)[2] / 2


def mp_constant_E(ctx):
    return -ctx.mpf(1) / 4 - ctx.log(2 * ctx.pi) / 2 + 2 * mp_zeta_prime_minus_one(ctx)


def constant_E() -> EvalResult:
    """E = -1/4 - 1/2 log 2 pi + 2 zeta'(-1)."""
    ctx = working_context()
    return to_result(ctx, mp_constant_E(ctx))


def mp_dhoker_phong_c(ctx, ell: int, variant: str = "literal"):
    if variant == "literal":
        zeta_term = ctx.mpf(-1) / 12
    elif variant == "derivative":
        zeta_term = mp_zeta_prime_minus_one(ctx)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    half = ell + ctx.mpf(1) / 2
    total = ctx.mpf(0)
    # 0 <= m < ell - 1/2  <=>  0 <= m <= ell - 1
    for m in range(0, ell):
        total += (2 * ell - 2 * m - 1) * ctx.log(2 * ell - m)
    return total - half ** 2 + half * ctx.log(2 * ctx.pi) + 2 * zeta_term


def dhoker_phong_c(ell: int, variant: str = "literal") -> EvalResult:
    """The constant c_ell of the compact determinant formula.

    ``variant="literal"`` uses the Riemann zeta value zeta(-1) = -1/12 in the
    constant term; ``variant="derivative"`` uses zeta'(-1) instead.
    """
    if not isinstance(ell, Number) or int(ell) != ell or ell < 0:
        raise DomainError(f"ell must be a non-negative integer, got {ell}")
    ctx = working_context()
    return to_result(ctx, mp_dhoker_phong_c(ctx, int(ell), variant), notes=(f"variant={variant}",))
