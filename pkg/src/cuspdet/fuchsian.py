"""Free Fuchsian groups and their primitive geodesic length spectra.

Words are strings over the ordered alphabet ``a, A, b, B, ...`` where the
upper-case letter is the inverse of the lower-case generator.  A conjugacy
class of a primitive hyperbolic element is keyed by its cyclically reduced
word rotated to be lexicographically minimal in that letter order; ``g``
and ``g^-1`` are different classes.
"""

from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import DomainError, EllipticFound, IncompleteCutoff, NotHyperbolic, UnknownGroup
from .index import SurfaceType
from .specfun import to_mp, working_context

__all__ = [
    "MoebiusMatrix",
    "Kind",
    "classify",
    "geodesic_length",
    "FuchsianPresentation",
    "builtin_group",
    "BUILTIN_GROUPS",
    "cyclic_reduce",
    "canonical_word",
    "inverse_word",
    "is_proper_power",
    "LengthSpectrumEntry",
    "LengthSpectrum",
    "enumerate_spectrum",
    "stability_report",
    "dumps_spectrum",
    "loads_spectrum",
    "write_spectrum",
    "read_spectrum",
]

PARABOLIC_TOL = 1e-14
CONJUGACY_KEY = "cyclic reduction + lexicographically minimal rotation over (a, A, b, B, ...); g and g^-1 distinct"


@dataclass(frozen=True)
class MoebiusMatrix:
    """Unit-determinant real 2x2 matrix, identified with its negative."""

    a: object
    b: object
    c: object
    d: object

    def __post_init__(self):
        entries = (self.a, self.b, self.c, self.d)
        if all(isinstance(x, Rational) for x in entries):
            for name, x in zip("abcd", entries):
                object.__setattr__(self, name, Fraction(x))
            if self.det != 1:
                raise DomainError(f"determinant is {self.det}, not 1")
        else:
            ctx = working_context()
            det = to_mp(ctx, self.a) * to_mp(ctx, self.d) - to_mp(ctx, self.b) * to_mp(ctx, self.c)
            if abs(det - 1) > 1e-20:
                raise DomainError(f"determinant deviates from 1 by {float(abs(det - 1)):.3g}")

    @property
    def exact(self) -> bool:
        return isinstance(self.a, Fraction)

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    @property
    def trace(self):
        return self.a + self.d

    def __matmul__(self, other: "MoebiusMatrix") -> "MoebiusMatrix":
        return MoebiusMatrix(self.a * other.a + self.b * other.c, self.a * other.b + self.b * other.d,
                             self.c * other.a + self.d * other.c, self.c * other.b + self.d * other.d)

    def inverse(self) -> "MoebiusMatrix":
        return MoebiusMatrix(self.d, -self.b, -self.c, self.a)

    def __neg__(self):
        return MoebiusMatrix(-self.a, -self.b, -self.c, -self.d)

    def _normalized(self):
        t = (self.a, self.b, self.c, self.d)
        first = next(x for x in t if x != 0)
        return t if first > 0 else tuple(-x for x in t)

    def __eq__(self, other):
        if not isinstance(other, MoebiusMatrix):
            return NotImplemented
        return self._normalized() == other._normalized()

    def __hash__(self):
        return hash(self._normalized())

    def is_identity(self) -> bool:
        return self.b == 0 and self.c == 0 and self.a == self.d and abs(self.a) == 1

    def conjugate_by(self, h: "MoebiusMatrix") -> "MoebiusMatrix":
        """h M h^-1."""
        return h @ self @ h.inverse()

    def entries(self):
        return (self.a, self.b, self.c, self.d)


class Kind(str, Enum):
    IDENTITY = "identity"
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"
    ELLIPTIC = "elliptic"


def classify(M: MoebiusMatrix) -> Kind:
    if M.is_identity():
        return Kind.IDENTITY
    t = abs(M.trace)
    if M.exact:
        if t == 2:
            return Kind.PARABOLIC
        return Kind.HYPERBOLIC if t > 2 else Kind.ELLIPTIC
    if abs(t - 2) <= PARABOLIC_TOL:
        return Kind.PARABOLIC
    return Kind.HYPERBOLIC if t > 2 else Kind.ELLIPTIC


def _length_from_trace(t) -> float:
    ctx = working_context()
    t = to_mp(ctx, abs(t))
    return float(2 * ctx.acosh(t / 2))


def geodesic_length(M: MoebiusMatrix) -> float:
    """Length 2 arccosh(|tr M| / 2) of the closed geodesic of a hyperbolic M."""
    kind = classify(M)
    if kind is not Kind.HYPERBOLIC:
        raise NotHyperbolic(f"matrix is {kind.value}, not hyperbolic")
    return _length_from_trace(M.trace)


# --- words ----------------------------------------------------------------------

def _letters(rank: int) -> str:
    out = []
    for i in range(rank):
        ch = chr(ord("a") + i)
        out += [ch, ch.upper()]
    return "".join(out)


def _invert_letter(ch: str) -> str:
    return ch.lower() if ch.isupper() else ch.upper()


def inverse_word(word: str) -> str:
    return "".join(_invert_letter(ch) for ch in reversed(word))


def free_reduce(word: str) -> str:
    out: list[str] = []
    for ch in word:
        if out and out[-1] == _invert_letter(ch):
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def cyclic_reduce(word: str) -> str:
    w = free_reduce(word)
    while len(w) >= 2 and w[0] == _invert_letter(w[-1]):
        w = w[1:-1]
    return w


def _letter_key(ch: str):
    # a < A < b < B < ...
    return (ch.lower(), ch.isupper())


def canonical_word(word: str) -> str:
    """Minimal rotation of the cyclic reduction of ``word``."""
    w = cyclic_reduce(word)
    if not w:
        return w
    keyed = [_letter_key(ch) for ch in w]
    best = min(range(len(w)), key=lambda i: keyed[i:] + keyed[:i])
    return w[best:] + w[:best]


def is_proper_power(word: str) -> bool:
    return len(word) > 1 and word in (word + word)[1:-1]


# --- presentations ----------------------------------------------------------------

@dataclass(frozen=True)
class FuchsianPresentation:
    name: str
    generators: tuple[MoebiusMatrix, ...]
    surface: SurfaceType
    declared_parabolic_words: tuple[str, ...] = ()

    def __post_init__(self):
        for w in self.declared_parabolic_words:
            if classify(self.evaluate(w)) is not Kind.PARABOLIC:
                raise DomainError(f"declared parabolic word {w!r} is not parabolic")

    @property
    def letters(self) -> str:
        return _letters(len(self.generators))

    def letter_matrix(self, ch: str) -> MoebiusMatrix:
        i = ord(ch.lower()) - ord("a")
        if not 0 <= i < len(self.generators):
            raise ValueError(f"letter {ch!r} is not in the alphabet {self.letters}")
        g = self.generators[i]
        return g.inverse() if ch.isupper() else g

    def evaluate(self, word: str) -> MoebiusMatrix:
        M = MoebiusMatrix(1, 0, 0, 1)
        for ch in word:
            M = M @ self.letter_matrix(ch)
        return M

    def conjugated(self, h: MoebiusMatrix, name: str | None = None) -> "FuchsianPresentation":
        return FuchsianPresentation(name or f"{self.name}^h", tuple(g.conjugate_by(h) for g in self.generators),
                                    self.surface, self.declared_parabolic_words)


def _gamma2():
    return FuchsianPresentation(
        "gamma2",
        (MoebiusMatrix(1, 2, 0, 1), MoebiusMatrix(1, 0, 2, 1)),
        SurfaceType(0, 3),
        ("a", "b", "aB"),
    )


def _modular_torus():
    return FuchsianPresentation(
        "modular_torus",
        (MoebiusMatrix(1, 1, 1, 2), MoebiusMatrix(1, -1, -1, 2)),
        SurfaceType(1, 1),
        ("abAB",),
    )


BUILTIN_GROUPS = {"gamma2": _gamma2, "modular_torus": _modular_torus}


def builtin_group(name: str) -> FuchsianPresentation:
    """``gamma2``: z -> z+2, z -> z/(2z+1), three cusps.
    ``modular_torus``: traces (3, 3), parabolic commutator, one cusp.
    """
    try:
        return BUILTIN_GROUPS[name]()
    except KeyError:
        raise UnknownGroup(f"unknown group {name!r}; choose from {sorted(BUILTIN_GROUPS)}") from None


# --- spectra -----------------------------------------------------------------

@dataclass(frozen=True)
class LengthSpectrumEntry:
    length: float
    trace: float
    multiplicity: int
    representative_word: str

    def __post_init__(self):
        if not self.length > 0:
            raise DomainError(f"length must be positive, got {self.length}")
        if not abs(self.trace) > 2:
            raise DomainError(f"|trace| must exceed 2, got {self.trace}")
        if int(self.multiplicity) != self.multiplicity or self.multiplicity < 1:
            raise DomainError(f"multiplicity must be a positive integer, got {self.multiplicity}")
        t = abs(self.trace)
        if abs(2 * math.cosh(self.length / 2) - t) > 1e-10 * t:
            raise DomainError(f"length {self.length} does not match trace {self.trace}")

    @classmethod
    def from_length(cls, length: float, multiplicity: int = 1, word: str = "") -> "LengthSpectrumEntry":
        return cls(float(length), 2 * math.cosh(length / 2), multiplicity, word)


@dataclass(frozen=True)
class LengthSpectrum:
    surface: SurfaceType
    cutoff: float
    entries: tuple[LengthSpectrumEntry, ...]
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        entries = tuple(sorted(self.entries, key=lambda e: (e.length, e.representative_word)))
        words = [e.representative_word for e in entries]
        if len(set(words)) != len(words):
            raise DomainError("spectrum entries must have distinct representative words")
        if entries and entries[-1].length > self.cutoff:
            raise DomainError(f"entry of length {entries[-1].length} exceeds cutoff {self.cutoff}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_lengths(cls, surface, lengths, cutoff=None, multiplicities=None, provenance=None):
        lengths = list(lengths)
        mults = list(multiplicities) if multiplicities is not None else [1] * len(lengths)
        entries = tuple(LengthSpectrumEntry.from_length(l, m, f"#{i}")
                        for i, (l, m) in enumerate(zip(lengths, mults)))
        cutoff = max(lengths, default=0.0) if cutoff is None else cutoff
        return cls(surface, float(cutoff), entries, dict(provenance or {}))

    def __len__(self):
        return len(self.entries)

    @property
    def min_length(self) -> float | None:
        return self.entries[0].length if self.entries else None

    def restrict(self, L: float) -> "LengthSpectrum":
        return LengthSpectrum(self.surface, L, tuple(e for e in self.entries if e.length <= L),
                              dict(self.provenance))

    def length_bins(self, tol: float = 1e-9) -> list[tuple[float, int]]:
        """(length, class count) with lengths closer than ``tol`` merged."""
        bins: list[list] = []
        for e in self.entries:
            if bins and e.length - bins[-1][2] <= tol:
                bins[-1][1] += e.multiplicity
                bins[-1][2] = e.length
            else:
                bins.append([e.length, e.multiplicity, e.length])
        return [(b[0], b[1]) for b in bins]


def _trace_bound(L: float) -> float:
    return 2 * math.cosh(L / 2) * (1 + 1e-12)


def _letter_arrays(grp: FuchsianPresentation):
    mats = [grp.letter_matrix(ch) for ch in grp.letters]
    if not all(m.exact for m in mats):
        raise DomainError("enumeration needs rational generator matrices")
    if all(x.denominator == 1 for m in mats for x in m.entries()):
        return tuple(tuple(int(x) for x in m.entries()) for m in mats), "int"
    return tuple(tuple(m.entries()) for m in mats), "object"


_INT_LIMIT = 2 ** 40


def _enumerate_branch(args):
    """All cyclically reduced words starting with ``first`` whose |trace| <= bound.

    Level-by-level over reduced words, with the four matrix entries held in
    parallel arrays.  Returns (word codes, trace) pairs plus elliptic hits.
    """
    letter_mats, dtype, first, max_len, bound = args
    n_letters = len(letter_mats)
    as_array = (lambda xs: np.array(xs, dtype=object)) if dtype == "object" else (lambda xs: np.array(xs, dtype=np.int64))
    G = [tuple(as_array([x]) for x in m) for m in letter_mats]
    m00, m01, m10, m11 = (as_array([x]) for x in letter_mats[first])
    last = np.array([first], dtype=np.int8)
    parents: list[np.ndarray] = [np.array([-1], dtype=np.int64)]
    letters: list[np.ndarray] = [last.copy()]
    hits, elliptic = [], []
    for level in range(1, max_len + 1):
        cyc = last != (first ^ 1)
        tr = m00 + m11
        atr = np.abs(tr)
        if dtype == "object":
            atr_f = atr.astype(float)
        else:
            atr_f = atr
        bad = np.flatnonzero(cyc & (atr_f < 2))
        if bad.size:
            elliptic.append(_codes(parents, letters, level, int(bad[0])))
            break
        keep = np.flatnonzero(cyc & (atr_f > 2) & (atr_f <= bound))
        for idx in keep:
            hits.append((_codes(parents, letters, level, int(idx)), tr[idx]))
        if level == max_len:
            break
        new = [[], [], [], []]
        new_last, new_parent = [], []
        for c in range(n_letters):
            sel = np.flatnonzero(last != (c ^ 1))
            if not sel.size:
                continue
            g00, g01, g10, g11 = G[c]
            a, b, cc, d = m00[sel], m01[sel], m10[sel], m11[sel]
            new[0].append(a * g00 + b * g10)
            new[1].append(a * g01 + b * g11)
            new[2].append(cc * g00 + d * g10)
            new[3].append(cc * g01 + d * g11)
            new_last.append(np.full(sel.size, c, dtype=np.int8))
            new_parent.append(sel)
        m00, m01, m10, m11 = (np.concatenate(x) for x in new)
        last = np.concatenate(new_last)
        parents.append(np.concatenate(new_parent))
        letters.append(last)
        if dtype != "object":
            peak = max(int(np.abs(x).max()) for x in (m00, m01, m10, m11))
            if peak > _INT_LIMIT:
                dtype = "object"
                m00, m01, m10, m11 = (x.astype(object) for x in (m00, m01, m10, m11))
                G = [tuple(x.astype(object) for x in g) for g in G]
                as_array = lambda xs: np.array(xs, dtype=object)  # noqa: E731
    return hits, elliptic


def _codes(parents, letters, level, idx):
    codes = []
    for k in range(level - 1, -1, -1):
        codes.append(int(letters[k][idx]))
        idx = int(parents[k][idx])
    return tuple(reversed(codes))


def enumerate_spectrum(grp: FuchsianPresentation, L: float, max_word_len: int,
                       workers: int = 1) -> LengthSpectrum:
    """Primitive hyperbolic conjugacy classes of word length <= max_word_len
    and geodesic length <= L.

    The word tree is split by first letter; with ``workers > 1`` the branches
    run in separate processes.  The merged result does not depend on the
    worker count.

    Word length does not bound geodesic length on a cusped surface (powers of
    a parabolic stay short), so completeness is not certified.  The
    provenance records ``l_stable``: the shortest length contributed by the
    last two word-length levels.  When it falls below ``L`` an
    :class:`IncompleteCutoff` warning is issued.
    """
    if not L > 0:
        raise DomainError(f"cutoff L must be positive, got {L}")
    if max_word_len < 0:
        raise DomainError("max_word_len must be >= 0")
    letters = grp.letters
    provenance = {
        "group": grp.name,
        "max_word_len": int(max_word_len),
        "conjugacy_key": CONJUGACY_KEY,
    }
    if max_word_len == 0:
        return LengthSpectrum(grp.surface, float(L), (), {**provenance, "l_stable": float(L)})
    mats, dtype = _letter_arrays(grp)
    bound = _trace_bound(L)
    tasks = [(mats, dtype, f, max_word_len, bound) for f in range(len(letters))]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_enumerate_branch, tasks))
    else:
        results = [_enumerate_branch(t) for t in tasks]
    entries = {}
    for hits, elliptic in results:
        if elliptic:
            word = "".join(letters[c] for c in elliptic[0])
            raise EllipticFound(f"elliptic element {word!r}: the group is not torsion-free")
        for codes, tr in hits:
            word = "".join(letters[c] for c in codes)
            if word != canonical_word(word) or is_proper_power(word):
                continue
            length = _length_from_trace(tr)
            if length <= L:
                entries[word] = LengthSpectrumEntry(length, float(tr), 1, word)
    late = [e.length for w, e in entries.items() if len(w) > max_word_len - 2]
    l_stable = min(late) if late else float(L)
    if l_stable < L:
        warnings.warn(IncompleteCutoff(
            f"words of length > {max_word_len - 2} still produce geodesics of length {l_stable:.6g} <= L={L}"),
            stacklevel=2)
    provenance["l_stable"] = float(min(l_stable, L))
    return LengthSpectrum(grp.surface, float(L), tuple(entries.values()), provenance)


def stability_report(grp: FuchsianPresentation, L: float, w: int) -> dict:
    """Compare the spectra at word lengths ``w`` and ``w + 2`` below ``L``."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IncompleteCutoff)
        lo = enumerate_spectrum(grp, L, w)
        hi = enumerate_spectrum(grp, L, w + 2)
    a = {e.representative_word: e.length for e in lo.entries}
    b = {e.representative_word: e.length for e in hi.entries}
    new = sorted((b[k], k) for k in b.keys() - a.keys())
    stable = all(abs(a[k] - b[k]) <= 1e-12 for k in a.keys() & b.keys()) and a.keys() <= b.keys()
    l_stable = new[0][0] if new else float(L)
    return {"w": w, "entries_w": len(a), "entries_w_plus_2": len(b), "new_entries": len(new),
            "l_stable": l_stable, "stable": bool(stable and not new), "cutoff": float(L)}


# --- JSON-lines persistence ----------------------------------------------------

def _fmt(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError("spectrum values must be finite")
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "inf" not in s and "nan" not in s:
        s += ".0"
    return s


def _json_value(v) -> str:
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, float):
        return _fmt(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(v[k])}" for k in sorted(v)) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps_spectrum(sp: LengthSpectrum) -> str:
    prov = dict(sp.provenance)
    header = {
        "group": prov.pop("group", None),
        "g": sp.surface.g,
        "n": sp.surface.n,
        "cutoff": float(sp.cutoff),
        "max_word_len": prov.pop("max_word_len", None),
        "provenance": prov,
    }
    lines = [_json_value(header)]
    for e in sp.entries:
        lines.append("{" + f'"length": {_fmt(e.length)}, "trace": {_fmt(e.trace)}, '
                     f'"mult": {int(e.multiplicity)}, "word": {_json_value(e.representative_word)}' + "}")
    return "\n".join(lines) + "\n"


def loads_spectrum(text: str) -> LengthSpectrum:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DomainError("empty spectrum file")
    header = json.loads(lines[0])
    for key in ("g", "n", "cutoff"):
        if key not in header:
            raise DomainError(f"spectrum header lacks {key!r}")
    entries = []
    for ln in lines[1:]:
        rec = json.loads(ln)
        entries.append(LengthSpectrumEntry(float(rec["length"]), float(rec["trace"]),
                                           int(rec["mult"]), str(rec["word"])))
    prov = dict(header.get("provenance") or {})
    if header.get("group") is not None:
        prov["group"] = header["group"]
    if header.get("max_word_len") is not None:
        prov["max_word_len"] = int(header["max_word_len"])
    return LengthSpectrum(SurfaceType(int(header["g"]), int(header["n"])), float(header["cutoff"]),
                          tuple(entries), prov)


def write_spectrum(sp: LengthSpectrum, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_spectrum(sp))


def read_spectrum(path) -> LengthSpectrum:
    with open(path, encoding="utf-8") as fh:
        return loads_spectrum(fh.read())
