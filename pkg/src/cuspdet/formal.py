"""Exact truncated graded power series over commuting generators.

Generators carry a degree (form degree divided by two): ``psi_i`` has
degree 1 and ``kappa_m`` / ``kappat_m`` (the kappa-tilde classes) have
degree ``m``.  All coefficients are :class:`fractions.Fraction`; products
are truncated at the series' truncation degree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import AlphabetMismatch, DomainError, MixedGenerators
from .specfun import bernoulli_poly

__all__ = [
    "GeneratorAlphabet",
    "GradedSeries",
    "series_arith",
    "univariate_kernel",
    "substitute_univariate",
    "fiber_integrate",
    "ac_substitute",
    "index_density",
    "interior_part",
    "degree_zero_value",
    "kappa_bernoulli_sum",
    "BiniReport",
    "bini_compare",
]

Monomial = tuple  # exponent vector


@dataclass(frozen=True)
class GeneratorAlphabet:
    names: tuple[str, ...]
    degrees: tuple[int, ...]
    n: int | None = None
    max_kappa: int | None = None

    def __post_init__(self):
        if len(self.names) != len(self.degrees):
            raise ValueError("names and degrees differ in length")
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate generator names")

    @classmethod
    def univariate(cls, name: str = "x") -> "GeneratorAlphabet":
        return cls((name,), (1,))

    @classmethod
    def moduli(cls, n: int, max_kappa: int) -> "GeneratorAlphabet":
        """psi_1..psi_{n+1}, kappa_0..kappa_K and kappat_0..kappat_K."""
        if n < 0 or max_kappa < 0:
            raise ValueError("n and max_kappa must be non-negative")
        names = [f"psi_{i}" for i in range(1, n + 2)]
        degrees = [1] * (n + 1)
        for prefix in ("kappa", "kappat"):
            names += [f"{prefix}_{m}" for m in range(max_kappa + 1)]
            degrees += list(range(max_kappa + 1))
        return cls(tuple(names), tuple(degrees), n=n, max_kappa=max_kappa)

    def __len__(self):
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"generator {name!r} is not in the alphabet") from None

    def monomial_degree(self, mono: Monomial) -> int:
        return sum(e * d for e, d in zip(mono, self.degrees))


@dataclass(frozen=True)
class GradedSeries:
    alphabet: GeneratorAlphabet
    truncation_degree: int
    terms: Mapping[Monomial, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        if self.truncation_degree < 0:
            raise ValueError("truncation degree must be >= 0")
        clean = {}
        for mono, c in self.terms.items():
            mono = tuple(mono)
            if len(mono) != len(self.alphabet):
                raise ValueError(f"monomial {mono} does not fit the alphabet")
            c = Fraction(c)
            if c and self.alphabet.monomial_degree(mono) <= self.truncation_degree:
                clean[mono] = clean.get(mono, Fraction(0)) + c
        object.__setattr__(self, "terms", {m: c for m, c in clean.items() if c})

    # constructors
    @classmethod
    def zero(cls, alphabet, D):
        return cls(alphabet, D, {})

    @classmethod
    def constant(cls, alphabet, D, c):
        return cls(alphabet, D, {(0,) * len(alphabet): Fraction(c)})

    @classmethod
    def generator(cls, alphabet, D, name, power=1, coeff=1):
        mono = [0] * len(alphabet)
        mono[alphabet.index(name)] = power
        return cls(alphabet, D, {tuple(mono): Fraction(coeff)})

    @classmethod
    def from_coefficients(cls, alphabet, D, name, coeffs):
        """sum_k coeffs[k] * name^k."""
        i = alphabet.index(name)
        terms = {}
        for k, c in enumerate(coeffs):
            mono = [0] * len(alphabet)
            mono[i] = k
            terms[tuple(mono)] = c
        return cls(alphabet, D, terms)

    # inspection
    def coefficient(self, **exponents) -> Fraction:
        mono = [0] * len(self.alphabet)
        for name, e in exponents.items():
            mono[self.alphabet.index(name)] = e
        return self.terms.get(tuple(mono), Fraction(0))

    def univariate_coefficients(self) -> list[Fraction]:
        if len(self.alphabet) != 1:
            raise ValueError("series is not univariate")
        return [self.terms.get((k,), Fraction(0)) for k in range(self.truncation_degree + 1)]

    def degree_part(self, k: int) -> "GradedSeries":
        return GradedSeries(self.alphabet, self.truncation_degree,
                            {m: c for m, c in self.terms.items()
                             if self.alphabet.monomial_degree(m) == k})

    def generators_used(self) -> set[str]:
        used = set()
        for mono in self.terms:
            used.update(self.alphabet.names[i] for i, e in enumerate(mono) if e)
        return used

    def truncate(self, D: int) -> "GradedSeries":
        return GradedSeries(self.alphabet, min(D, self.truncation_degree), self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def pretty(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for mono in sorted(self.terms, key=lambda m: (self.alphabet.monomial_degree(m), m)):
            factors = [n if e == 1 else f"{n}^{e}"
                       for n, e in zip(self.alphabet.names, mono) if e]
            parts.append(f"({self.terms[mono]})" + ("*" + "*".join(factors) if factors else ""))
        return " + ".join(parts)

    # arithmetic
    def _check(self, other: "GradedSeries"):
        if not isinstance(other, GradedSeries):
            raise TypeError(f"cannot combine GradedSeries with {type(other).__name__}")
        if self.alphabet != other.alphabet:
            raise AlphabetMismatch("series are defined over different alphabets")
        if self.truncation_degree != other.truncation_degree:
            raise AlphabetMismatch(
                f"truncation degrees differ: {self.truncation_degree} vs {other.truncation_degree}")

    def _lift(self, other):
        if isinstance(other, (int, Fraction)):
            return GradedSeries.constant(self.alphabet, self.truncation_degree, other)
        return other

    def __add__(self, other):
        other = self._lift(other)
        self._check(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, Fraction(0)) + c
        return GradedSeries(self.alphabet, self.truncation_degree, terms)

    __radd__ = __add__

    def __neg__(self):
        return GradedSeries(self.alphabet, self.truncation_degree,
                            {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return GradedSeries(self.alphabet, self.truncation_degree,
                                {m: c * other for m, c in self.terms.items()})
        self._check(other)
        deg = self.alphabet.monomial_degree
        D = self.truncation_degree
        out: dict = {}
        right = [(m, c, deg(m)) for m, c in other.terms.items()]
        for m1, c1 in self.terms.items():
            d1 = deg(m1)
            for m2, c2, d2 in right:
                if d1 + d2 > D:
                    continue
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, Fraction(0)) + c1 * c2
        return GradedSeries(self.alphabet, D, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not supported")
        result = GradedSeries.constant(self.alphabet, self.truncation_degree, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, GradedSeries):
            return NotImplemented
        return (self.alphabet == other.alphabet
                and self.truncation_degree == other.truncation_degree
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.alphabet, self.truncation_degree, frozenset(self.terms.items())))


def series_arith(a: GradedSeries, b: GradedSeries, op: str) -> GradedSeries:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    raise ValueError(f"op must be 'add' or 'mul', got {op!r}")


# --- univariate kernels -----------------------------------------------------------

def _exp_coeffs(D, scale=Fraction(1)):
    return [scale ** k / math.factorial(k) for k in range(D + 1)]


def _series_inverse(c, D):
    """Coefficients of 1 / sum c_k x^k, c_0 != 0."""
    inv = [Fraction(0)] * (D + 1)
    inv[0] = 1 / Fraction(c[0])
    for k in range(1, D + 1):
        acc = sum((c[j] * inv[k - j] for j in range(1, min(k, len(c) - 1) + 1)), Fraction(0))
        inv[k] = -acc * inv[0]
    return inv


def _series_mul(a, b, D):
    return [sum((a[j] * b[k - j] for j in range(k + 1)), Fraction(0)) for k in range(D + 1)]


def _x_over_expm1(D):
    # (e^x - 1)/x = sum x^k / (k+1)!
    return _series_inverse([Fraction(1, math.factorial(k + 1)) for k in range(D + 1)], D)


def _half_coth(D):
    # (x/2) coth(x/2) = cosh(x/2) / (sinh(x/2) / (x/2))
    half = Fraction(1, 2)
    cosh = [half ** k / math.factorial(k) if k % 2 == 0 else Fraction(0) for k in range(D + 1)]
    sinhc = [half ** k / math.factorial(k + 1) if k % 2 == 0 else Fraction(0) for k in range(D + 1)]
    return _series_mul(cosh, _series_inverse(sinhc, D), D)


def univariate_kernel(kind: str, D: int, ell=None, name: str = "x") -> GradedSeries:
    """Exact Taylor expansion of one of the characteristic-class kernels.

    ``todd_twisted`` (needs ``ell``): e^(ell x) x / (e^x - 1).
    ``eta_form``: 1/(2 tanh(x/2)) - 1/x, an odd series starting at x/12.
    ``half_coth``: x / (2 tanh(x/2)).
    """
    if D < 0:
        raise ValueError("D must be >= 0")
    alphabet = GeneratorAlphabet.univariate(name)
    if kind == "todd_twisted":
        if ell is None:
            raise ValueError("todd_twisted needs ell")
        coeffs = _series_mul(_exp_coeffs(D, Fraction(ell)), _x_over_expm1(D), D)
    elif kind == "half_coth":
        coeffs = _half_coth(D)
    elif kind == "eta_form":
        coeffs = [Fraction(0)] + _half_coth(D + 1)[2:]
        coeffs = coeffs[: D + 1]
    elif kind == "x_over_expm1":
        coeffs = _x_over_expm1(D)
    else:
        raise ValueError(f"unknown kernel {kind!r}")
    return GradedSeries.from_coefficients(alphabet, D, name, coeffs)


def substitute_univariate(s: GradedSeries, alphabet: GeneratorAlphabet, name: str,
                          D: int | None = None) -> GradedSeries:
    """Rewrite a series in one variable as a series in generator ``name``."""
    coeffs = s.univariate_coefficients()
    D = s.truncation_degree if D is None else D
    if alphabet.degrees[alphabet.index(name)] != 1 and any(coeffs[1:]):
        raise ValueError("substitution target must have degree 1")
    return GradedSeries.from_coefficients(alphabet, D, name, coeffs[: D + 1])


# --- pushforward and the Arbarello-Cornalba relation ------------------------------

def fiber_integrate(s: GradedSeries) -> GradedSeries:
    """Push forward along the forgetful map: psi_{n+1}^(m+1) -> kappa_m.

    The constant term maps to 0.  The result is truncated one degree lower.
    """
    a = s.alphabet
    if a.n is None:
        raise ValueError("fiber_integrate needs a moduli alphabet")
    last = f"psi_{a.n + 1}"
    extra = s.generators_used() - {last}
    if extra:
        raise MixedGenerators(f"series involves {sorted(extra)} besides {last}")
    D_out = max(s.truncation_degree - 1, 0)
    if D_out > a.max_kappa:
        raise ValueError(f"alphabet has kappa up to {a.max_kappa}, need {D_out}")
    i = a.index(last)
    out = GradedSeries.zero(a, D_out)
    for mono, c in s.terms.items():
        p = mono[i]
        if p >= 1:
            out = out + GradedSeries.generator(a, D_out, f"kappa_{p - 1}", coeff=c)
    return out


def _substitute(s: GradedSeries, images: dict) -> GradedSeries:
    """Ring homomorphism fixing generators not listed in ``images``."""
    a, D = s.alphabet, s.truncation_degree
    out = GradedSeries.zero(a, D)
    for mono, c in s.terms.items():
        term = GradedSeries.constant(a, D, c)
        for i, e in enumerate(mono):
            if not e:
                continue
            name = a.names[i]
            base = images.get(name)
            if base is None:
                base = GradedSeries.generator(a, D, name)
            term = term * base ** e
        out = out + term
    return out


def ac_substitute(s: GradedSeries, n: int) -> GradedSeries:
    """kappa_m -> kappat_m + sum_{i<=n} psi_i^m throughout ``s``."""
    a, D = s.alphabet, s.truncation_degree
    if a.n is None or a.n < n:
        raise ValueError("alphabet does not carry enough psi generators")
    images = {}
    for m in range(a.max_kappa + 1):
        img = GradedSeries.generator(a, D, f"kappat_{m}")
        for i in range(1, n + 1):
            img = img + GradedSeries.generator(a, D, f"psi_{i}", power=m)
        images[f"kappa_{m}"] = img
    return _substitute(s, images)


# --- the index density --------------------------------------------------------

def _sign(x) -> int:
    return (x > 0) - (x < 0)


def kappa_bernoulli_sum(ell, alphabet: GeneratorAlphabet, D: int, prefix: str = "kappa"):
    """sum_{m>=1} B_m(ell)/m! prefix_{m-1}, truncated at degree D."""
    out = GradedSeries.zero(alphabet, D)
    for m in range(1, D + 2):
        c = bernoulli_poly(m, ell) / math.factorial(m)
        out = out + GradedSeries.generator(alphabet, D, f"{prefix}_{m - 1}", coeff=c)
    return out


def _eta_terms(alphabet, D, n):
    eta = univariate_kernel("eta_form", D)
    total = GradedSeries.zero(alphabet, D)
    for i in range(1, n + 1):
        total = total + substitute_univariate(eta, alphabet, f"psi_{i}")
    return total


def interior_part(ell: int, n: int, D: int, alphabet=None) -> GradedSeries:
    """Bernoulli/kappa sum plus the constant and eta-form cusp corrections."""
    alphabet = alphabet or GeneratorAlphabet.moduli(n, D)
    return (kappa_bernoulli_sum(ell, alphabet, D)
            + Fraction(n, 2) * _sign(Fraction(1, 2) - ell)
            - _eta_terms(alphabet, D, n))


def index_density(ell: int, g: int, n: int, D: int) -> GradedSeries:
    """Cohomological index density of the d-bar family at twist ``ell``.

    The superconnection transgression term is exact and therefore omitted;
    the eta-form generators are identified with the psi classes.
    """
    if 2 * g + n < 3:
        raise DomainError(f"need 2g + n >= 3, got g={g}, n={n}")
    if D < 0:
        raise DomainError("D must be >= 0")
    return interior_part(ell, n, D)


def degree_zero_value(s: GradedSeries, g: int, n: int) -> Fraction:
    """Evaluate the degree-0 part with kappa_0 = 2g-2+n and kappat_0 = 2g-2."""
    a = s.alphabet
    values = {}
    if "kappa_0" in a.names:
        values[a.index("kappa_0")] = Fraction(2 * g - 2 + n)
    if "kappat_0" in a.names:
        values[a.index("kappat_0")] = Fraction(2 * g - 2)
    total = Fraction(0)
    for mono, c in s.degree_part(0).terms.items():
        term = c
        for i, e in enumerate(mono):
            if e:
                term *= values[i] ** e
        total += term
    return total


@dataclass(frozen=True)
class BiniReport:
    ell: int
    n: int
    max_degree_checked: int
    equal: bool
    difference: str

    def to_json(self):
        return {"ell": self.ell, "n": self.n, "max_degree_checked": self.max_degree_checked,
                "equal": self.equal, "difference": self.difference}


def bini_compare(ell: int, n: int, D: int) -> BiniReport:
    """Compare the interior index density with the kappa-tilde Bernoulli sum.

    After rewriting kappa in terms of kappa-tilde and psi, the cusp terms
    must cancel exactly for ell in {0, 1}.
    """
    if ell not in (0, 1):
        raise DomainError("the comparison only makes sense for ell in {0, 1}")
    alphabet = GeneratorAlphabet.moduli(n, D)
    lhs = ac_substitute(interior_part(ell, n, D, alphabet), n)
    rhs = kappa_bernoulli_sum(ell, alphabet, D, prefix="kappat")
    diff = lhs - rhs
    return BiniReport(ell, n, D, diff.is_zero(), diff.pretty())
