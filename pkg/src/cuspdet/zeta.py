"""Selberg zeta function of a truncated length spectrum, and cusp factors."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import DivergedError, DomainError, EmptySpectrumWarning, PoleError
from .fuchsian import LengthSpectrum
from .specfun import EvalResult, mp_digamma, mp_log_gamma, to_mp, to_result, working_context

__all__ = [
    "ZetaEval",
    "log_selberg_zeta",
    "zeta_log_derivative",
    "zeta_prime_at_1",
    "richardson_to_zero",
    "phi_horn",
    "z_cusp",
    "INNER_TAIL",
]

INNER_TAIL = 1e-16
MIN_ZERO_ORDER = 0.1

ASSUMPTIONS = (
    "finite spectrum: classes beyond the cutoff (or beyond the word-length limit) are omitted",
    "tail_estimate is heuristic (cutoff-shell count times a geometric tail), not a certified bound",
)


@dataclass(frozen=True)
class ZetaEval:
    log_value: float
    tail_estimate: float
    k_cut: int
    quantity: str = "log_zeta"
    assumptions: tuple[str, ...] = ASSUMPTIONS

    def to_json(self):
        return {"quantity": self.quantity, "log_value": self.log_value,
                "tail_estimate": self.tail_estimate, "k_cut": self.k_cut,
                "assumptions": list(self.assumptions)}


def _check_s(s):
    s = float(s)
    if not s > 1:
        raise DomainError(f"the Euler product needs s > 1, got s = {s}")
    return s


def _k_cut(length: float, s: float) -> int:
    # geometric tail sum_{j>=K} e^{-(s+j)l} = e^{-(s+K)l} / (1 - e^{-l})
    denom = -math.log1p(-math.exp(-length))
    K = math.ceil((-math.log(INNER_TAIL) - math.log(denom) - s * length) / length) if denom > 0 else 0
    K = max(K, 0)
    while math.exp(-(s + K) * length) / -math.expm1(-length) >= INNER_TAIL:
        K += 1
    return K


def _shell_count(sp: LengthSpectrum) -> int:
    return sum(e.multiplicity for e in sp.entries if e.length > sp.cutoff - 1)


def _tail(sp: LengthSpectrum, s: float, weight: float = 1.0) -> float:
    if not sp.entries:
        return 0.0
    return weight * _shell_count(sp) * math.exp(-(s - 1) * sp.cutoff) / -math.expm1(-(s - 1))


def log_selberg_zeta(sp: LengthSpectrum, s: float) -> ZetaEval:
    """log Z(s) = sum over classes and k >= 0 of log(1 - e^{-(s+k) l})."""
    s = _check_s(s)
    bins = sp.length_bins()
    if not bins:
        warnings.warn(EmptySpectrumWarning("empty spectrum: log Z = 0"), stacklevel=2)
        return ZetaEval(0.0, 0.0, 0)
    terms = []
    k_max = 0
    for length, count in bins:
        K = _k_cut(length, s)
        k_max = max(k_max, K)
        terms.extend(count * math.log1p(-math.exp(-(s + k) * length)) for k in range(K + 1))
    return ZetaEval(math.fsum(terms), _tail(sp, s), k_max)


def zeta_log_derivative(sp: LengthSpectrum, s: float) -> ZetaEval:
    """Z'(s)/Z(s) = sum l e^{-(s+k) l} / (1 - e^{-(s+k) l})."""
    s = _check_s(s)
    bins = sp.length_bins()
    terms = []
    k_max = 0
    for length, count in bins:
        K = _k_cut(length, s)
        k_max = max(k_max, K)
        for k in range(K + 1):
            q = math.exp(-(s + k) * length)
            terms.append(count * length * q / -math.expm1(-(s + k) * length))
    return ZetaEval(math.fsum(terms), _tail(sp, s, weight=sp.cutoff), k_max, quantity="log_derivative")


def richardson_to_zero(xs, ys):
    """Neville table extrapolating the interpolating polynomial to x = 0.

    Returns (estimate, spread) where spread compares the full-table value
    with the one that drops the coarsest point.
    """
    n = len(xs)
    table = [list(ys)]
    for level in range(1, n):
        prev = table[-1]
        row = []
        for i in range(n - level):
            x0, x1 = xs[i], xs[i + level]
            row.append((x1 * prev[i] - x0 * prev[i + 1]) / (x1 - x0))
        table.append(row)
    best = table[-1][0]
    runner_up = table[-2][1] if n >= 2 else ys[-1]
    return best, abs(best - runner_up)


def zeta_prime_at_1(sp: LengthSpectrum, eps_grid=(0.2, 0.1, 0.05)) -> EvalResult:
    """Richardson estimate of Z'(1) from Z(1 + eps)/eps, eps -> 0.

    Assumes a simple zero of Z at s = 1.  The order of vanishing implied by
    the samples is reported; when the samples show no decay towards s = 1
    (order below 0.1) a :class:`DivergedError` is raised.  The estimate is
    always flagged LOW-CONFIDENCE: the product converges only for s > 1 and
    a truncated spectrum has no zero at s = 1.
    """
    eps = [float(e) for e in eps_grid]
    if len(eps) < 3:
        raise DomainError("eps_grid needs at least 3 points")
    if any(not 0 < e <= 0.5 for e in eps):
        raise DomainError("eps_grid points must lie in (0, 0.5]")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise DomainError("eps_grid must be strictly decreasing")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EmptySpectrumWarning)
        logs = [log_selberg_zeta(sp, 1 + e).log_value for e in eps]
    order = (logs[0] - logs[-1]) / math.log(eps[0] / eps[-1])
    if not order >= MIN_ZERO_ORDER:
        raise DivergedError(
            f"Z(1+eps) shows no zero at s=1 (implied order {order:.3g}); Z(1+eps)/eps diverges")
    values = [math.exp(lz) / e for lz, e in zip(logs, eps)]
    est, spread = richardson_to_zero(eps, values)
    if not math.isfinite(est):
        raise DivergedError("Richardson extrapolation produced a non-finite value")
    notes = ("LOW-CONFIDENCE", "assumes a simple zero of Z at s=1",
             f"implied zero order {order:.6g}", f"eps_grid={eps}")
    return EvalResult(est, spread + 1e-16 * abs(est), notes)


def phi_horn(s) -> EvalResult:
    """phi_H(s) = -log 2 - Psi(s + 1/2) + 1/(2s - 1)."""
    ctx = working_context()
    s = to_mp(ctx, s)
    if s == ctx.mpf(1) / 2:
        raise PoleError("phi_H has a pole at s = 1/2")
    try:
        psi = mp_digamma(ctx, s + ctx.mpf(1) / 2)
    except PoleError:
        raise PoleError(f"phi_H has a pole at s = {s}") from None
    return to_result(ctx, -ctx.log(2) - psi + 1 / (2 * s - 1))


def z_cusp(s, log: bool = False) -> EvalResult:
    """Z_cusp(s) = sqrt(2s - 1) / (2^s Gamma(s + 1/2)), s > 1/2.

    With ``log=True`` the logarithm is returned, which stays representable
    for large s.
    """
    ctx = working_context()
    s = to_mp(ctx, s)
    if ctx.im(s) != 0 or not s > ctx.mpf(1) / 2:
        raise DomainError(f"Z_cusp needs real s > 1/2, got {s}")
    value = ctx.log(2 * s - 1) / 2 - s * ctx.log(2) - mp_log_gamma(ctx, s + ctx.mpf(1) / 2)
    return to_result(ctx, value if log else ctx.exp(value))
