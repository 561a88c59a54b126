"""Exact arithmetic and normal forms in free products of cyclic groups.

A group Z_{m_1} * Z_{m_2} * ... (each factor cyclic of finite order m >= 2
or infinite) is described by a :class:`FactorSignature`.  Elements are kept
in the unique alternating normal form: a sequence of syllables, adjacent
syllables in distinct factors, finite-factor exponents in [1, m-1] and
infinite-factor exponents nonzero.  The empty sequence is the identity.

The same folding engine optionally tracks "wrap" contributions: when a
finite-factor exponent is reduced past its order, a per-factor weight is
accumulated.  That is what the Seifert piece modules use to realise central
extensions of these free products, so the weighted fold lives here even
though the plain free-product API never exposes it.

Word text grammar (shared with the CLI):

    word := term (space term)* ;  term := name '^' int | name

e.g. ``c1^2 c2^-1``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from math import gcd
from typing import Iterable, NamedTuple, Optional, Sequence, Union


class ParseError(ValueError):
    """Raised on malformed word / spec text; carries a character offset."""

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at offset {position})"
        super().__init__(message)
        self.position = position


@dataclass(frozen=True)
class FactorSignature:
    """Ordered list of cyclic factors, each (name, order).

    ``order`` is an int >= 2 for a finite factor or None for an infinite
    one.  Order 1 is tolerated so that degenerate filled quotients (a
    factor killed entirely by a filling) reuse the same machinery; no
    syllable can live in such a factor.
    """

    factors: tuple[tuple[str, Optional[int]], ...]

    def __post_init__(self):
        names = [name for name, _ in self.factors]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate factor names in {names}")
        for name, order in self.factors:
            if order is not None and order < 1:
                raise ValueError(f"factor {name!r} has invalid order {order}")

    @property
    def arity(self) -> int:
        return len(self.factors)

    def name(self, i: int) -> str:
        return self.factors[i][0]

    def order(self, i: int) -> Optional[int]:
        return self.factors[i][1]

    def index(self, name: str) -> int:
        for i, (n, _) in enumerate(self.factors):
            if n == name:
                return i
        raise ValueError(f"unknown factor {name!r}")


class Syllable(NamedTuple):
    factor: int
    exp: int


RawTerm = tuple[Union[int, str], int]


@dataclass(frozen=True)
class FPWord:
    """A normal-form word; construct through :func:`fp_normalize`."""

    signature: FactorSignature
    syllables: tuple[Syllable, ...]

    def __len__(self) -> int:
        return len(self.syllables)

    @property
    def is_identity(self) -> bool:
        return not self.syllables

    def __mul__(self, other: "FPWord") -> "FPWord":
        return fp_multiply(self, other)

    def __pow__(self, k: int) -> "FPWord":
        result = FPWord(self.signature, ())
        base = self if k >= 0 else fp_invert(self)
        for _ in range(abs(k)):
            result = fp_multiply(result, base)
        return result

    def inverse(self) -> "FPWord":
        return fp_invert(self)

    def __str__(self) -> str:
        return format_word(self)


def fp_fold(
    signature: FactorSignature,
    raw: Iterable[Syllable | tuple[int, int]],
    carries: Sequence[int] | None = None,
) -> tuple[int, tuple[Syllable, ...]]:
    """Fold a raw syllable sequence to normal form.

    Returns ``(wraps, syllables)`` where ``wraps`` is the weighted count of
    finite-order reductions, using ``carries[f]`` per full wrap of factor
    ``f`` (0 when ``carries`` is None).  Adjacent same-factor syllables are
    merged, exponents reduced into [0, order), zero syllables dropped, to a
    fixpoint.
    """
    total = 0
    stack: list[Syllable] = []
    orders = [order for _, order in signature.factors]
    for f, e in raw:
        if e == 0:
            continue
        if stack and stack[-1].factor == f:
            e += stack.pop().exp
        m = orders[f]
        if m is not None:
            r = e % m
            k = (e - r) // m
            if k and carries is not None:
                total += carries[f] * k
            e = r
        if e != 0:
            stack.append(Syllable(f, e))
    return total, tuple(stack)


def _resolve(signature: FactorSignature, raw: Iterable[RawTerm]) -> list[Syllable]:
    out = []
    for f, e in raw:
        if isinstance(f, str):
            f = signature.index(f)
        elif not 0 <= f < signature.arity:
            raise ValueError(f"factor index {f} out of range")
        out.append(Syllable(f, e))
    return out


def fp_normalize(signature: FactorSignature, raw: Iterable[RawTerm]) -> FPWord:
    """Unique normal form of a raw (factor, exponent) sequence."""
    _, syls = fp_fold(signature, _resolve(signature, raw))
    return FPWord(signature, syls)


def fp_multiply(a: FPWord, b: FPWord) -> FPWord:
    if a.signature != b.signature:
        raise ValueError("signature mismatch")
    _, syls = fp_fold(a.signature, list(a.syllables) + list(b.syllables))
    return FPWord(a.signature, syls)


def fp_invert(a: FPWord) -> FPWord:
    raw = [Syllable(s.factor, -s.exp) for s in reversed(a.syllables)]
    _, syls = fp_fold(a.signature, raw)
    return FPWord(a.signature, syls)


def fp_cyclic_reduce(a: FPWord) -> tuple[FPWord, FPWord]:
    """Return (core, conjugator) with ``a = conjugator * core * conjugator^-1``
    and core cyclically reduced (first/last syllables in distinct factors,
    or length <= 1)."""
    core = list(a.syllables)
    conj: list[Syllable] = []
    while len(core) >= 2 and core[0].factor == core[-1].factor:
        head = core[0]
        conj.append(head)
        _, core_t = fp_fold(a.signature, core[1:] + [head])
        core = list(core_t)
    _, conj_t = fp_fold(a.signature, conj)
    return FPWord(a.signature, tuple(core)), FPWord(a.signature, conj_t)


def is_cyclically_reduced(a: FPWord) -> bool:
    return len(a) <= 1 or a.syllables[0].factor != a.syllables[-1].factor


def _solve_cyclic(e: int, f: int, m: Optional[int]) -> Optional[int]:
    """Smallest k (nonnegative for finite m) with k*e == f in Z or Z_m."""
    if m is None:
        if f % e:
            return None
        return f // e
    g = gcd(e % m, m)
    if f % g:
        return None
    mm = m // g
    return (f // g) * pow(e // g, -1, mm) % mm


def fp_is_power_of(a: FPWord, base: FPWord) -> Optional[int]:
    """Return k with ``a == base**k`` if one exists, else None.

    ``base`` must be cyclically reduced and nonempty; k may be 0 for the
    empty word, and negative powers are detected.
    """
    if base.is_identity:
        raise ValueError("empty base")
    if not is_cyclically_reduced(base):
        raise ValueError("base not cyclically reduced")
    if a.signature != base.signature:
        raise ValueError("signature mismatch")
    if a.is_identity:
        return 0
    if len(base) == 1:
        if len(a) != 1 or a.syllables[0].factor != base.syllables[0].factor:
            return None
        f = base.syllables[0].factor
        k = _solve_cyclic(base.syllables[0].exp, a.syllables[0].exp,
                          a.signature.order(f))
        return k
    n, nb = len(a), len(base)
    if n % nb:
        return None
    k = n // nb
    if a.syllables == base.syllables * k:
        return k
    inv = fp_invert(base)
    if a.syllables == inv.syllables * k:
        return -k
    return None


# word text grammar ---------------------------------------------------------

_TERM_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)(?:\^(-?\d+))?\Z")


def parse_terms(text: str) -> list[tuple[str, int]]:
    """Parse the word grammar into (name, exponent) pairs."""
    terms = []
    for tok in re.finditer(r"\S+", text):
        m = _TERM_RE.match(tok.group())
        if not m:
            raise ParseError(f"bad term {tok.group()!r}", tok.start())
        name, exp = m.group(1), m.group(2)
        terms.append((name, 1 if exp is None else int(exp)))
    return terms


def parse_word(signature: FactorSignature, text: str) -> FPWord:
    return fp_normalize(signature, parse_terms(text))


def format_word(a: FPWord, names: Sequence[str] | None = None) -> str:
    if names is None:
        names = [name for name, _ in a.signature.factors]
    if a.is_identity:
        return "1"
    parts = []
    for f, e in a.syllables:
        parts.append(names[f] if e == 1 else f"{names[f]}^{e}")
    return " ".join(parts)
