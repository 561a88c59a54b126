"""Element arithmetic in the three Seifert piece groups.

Each piece group is a central extension of a free product of cyclic groups
by the infinite cyclic fiber class t:

* torus-knot exterior, parameters (p, q): <u, v | u^p = v^q central>,
  realised with z = u^p = t, so u carries t^1 per p-wrap and v carries
  t^{sign q} per |q|-wrap;
* cable space, parameters (p, q): <c1, c2, t | t central, c2^q = t^-1>;
* 2-fold composing space: <c, d, t | t central>.

An element is the unique pair (t_exp, word): t-syllables are extracted to
the central exponent, finite-order generator powers are reduced into
[0, order) with their central carries applied, and the word component is
the free-product normal form.  All values are immutable and every
operation is pure, so the module is safe for concurrent use.

Boundary tori carry fixed bases.  The outer torus of every piece is
expressed in the meridian/longitude pair (mu, lam) of the knot the piece
came from; inner tori in the pair (t, w) for a designated word generator w.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gcd
from typing import Iterable, Optional, Sequence, Union

from .freeprod import (
    FactorSignature,
    FPWord,
    Syllable,
    fp_fold,
    fp_is_power_of,
    format_word,
    parse_terms,
)

FIBER_NAME = "t"


# piece kinds ---------------------------------------------------------------

@dataclass(frozen=True)
class TorusKnot:
    p: int
    q: int

    def __post_init__(self):
        if not (2 <= self.p < abs(self.q)):
            raise ValueError(f"torus knot needs 2 <= p < |q|, got ({self.p}, {self.q})")
        if gcd(self.p, self.q) != 1:
            raise ValueError(f"torus knot parameters ({self.p}, {self.q}) not coprime")


@dataclass(frozen=True)
class Cable:
    p: int
    q: int

    def __post_init__(self):
        if self.q < 2:
            raise ValueError(f"cable needs q >= 2, got q = {self.q}")
        if gcd(self.p, self.q) != 1:
            raise ValueError(f"cable parameters ({self.p}, {self.q}) not coprime")


@dataclass(frozen=True)
class Composing:
    """The 2-fold composing space (disk with two holes) x S^1."""


PieceKind = Union[TorusKnot, Cable, Composing]


# peripheral classification results -----------------------------------------

@dataclass(frozen=True)
class Outer:
    """Conjugate to (mu^a lam^b)^power; slope = (a, b) with b >= 0, gcd 1.

    ``central`` marks pure fiber powers, which lie in every boundary
    subgroup at once.
    """

    slope: tuple[int, int]
    power: int
    central: bool = False


@dataclass(frozen=True)
class Inner:
    torus: int  # 1-based index of the inner boundary torus


@dataclass(frozen=True)
class NonPeripheral:
    pass


@dataclass(frozen=True)
class PieceElement:
    group: "PieceGroup"
    t_exp: int
    word: FPWord

    @property
    def is_identity(self) -> bool:
        return self.t_exp == 0 and self.word.is_identity

    def __mul__(self, other: "PieceElement") -> "PieceElement":
        return self.group.mul(self, other)

    def __pow__(self, k: int) -> "PieceElement":
        return self.group.pow(self, k)

    def inverse(self) -> "PieceElement":
        return self.group.inv(self)

    def __str__(self) -> str:
        word = format_word(self.word)
        if self.t_exp == 0:
            return word
        t = FIBER_NAME if self.t_exp == 1 else f"{FIBER_NAME}^{self.t_exp}"
        return t if word == "1" else f"{t} {word}"


class PieceGroup:
    """Central extension arithmetic for one piece (or one filled piece).

    ``carries[f]`` is the t-exponent produced by one full positive wrap of
    factor f; the fiber quotient is the free product over ``signature``.
    """

    def __init__(self, kind: PieceKind, signature: FactorSignature,
                 carries: tuple[int, ...], label: str):
        self.kind = kind
        self.signature = signature
        self.carries = carries
        self.label = label
        self.identity = PieceElement(self, 0, FPWord(signature, ()))

    def __repr__(self):
        return f"PieceGroup({self.label})"

    # construction -----------------------------------------------------

    def fold(self, raw: Iterable[Syllable | tuple[int, int]]) -> tuple[int, FPWord]:
        delta, syls = fp_fold(self.signature, raw, self.carries)
        return delta, FPWord(self.signature, syls)

    def element(self, t_exp: int, raw: Iterable[Syllable | tuple[int, int]]) -> PieceElement:
        delta, word = self.fold(raw)
        return PieceElement(self, t_exp + delta, word)

    def canonicalize(self, terms: Iterable[tuple[str, int]]) -> PieceElement:
        """Build an element from (generator name, exponent) pairs; the
        fiber name ``t`` is accepted alongside the word generators."""
        t_exp = 0
        raw = []
        for name, exp in terms:
            if name == FIBER_NAME:
                t_exp += exp
            else:
                raw.append(Syllable(self.signature.index(name), exp))
        return self.element(t_exp, raw)

    def parse(self, text: str) -> PieceElement:
        return self.canonicalize(parse_terms(text))

    # group law ----------------------------------------------------------

    def _check(self, *elts: PieceElement):
        for g in elts:
            if g.group is not self:
                raise ValueError(f"element of {g.group!r} used in {self!r}")

    def mul(self, a: PieceElement, b: PieceElement) -> PieceElement:
        self._check(a, b)
        return self.element(a.t_exp + b.t_exp,
                            list(a.word.syllables) + list(b.word.syllables))

    def inv(self, a: PieceElement) -> PieceElement:
        self._check(a)
        raw = [Syllable(s.factor, -s.exp) for s in reversed(a.word.syllables)]
        return self.element(-a.t_exp, raw)

    def pow(self, a: PieceElement, k: int) -> PieceElement:
        base = a if k >= 0 else self.inv(a)
        out = self.identity
        for _ in range(abs(k)):
            out = self.mul(out, base)
        return out

    def cyclic_reduce(self, g: PieceElement) -> tuple[PieceElement, PieceElement]:
        """(core, conj) with g = conj * core * conj^-1 and the word part of
        core cyclically reduced; carries are tracked exactly."""
        self._check(g)
        core, conj = g, self.identity
        while (len(core.word) >= 2
               and core.word.syllables[0].factor == core.word.syllables[-1].factor):
            head = PieceElement(self, 0, FPWord(self.signature, (core.word.syllables[0],)))
            conj = self.mul(conj, head)
            core = self.mul(self.mul(self.inv(head), core), head)
        return core, conj

    def _rotate(self, g: PieceElement) -> PieceElement:
        head = PieceElement(self, 0, FPWord(self.signature, (g.word.syllables[0],)))
        return self.mul(self.mul(self.inv(head), g), head)


def _torus_meridian_exponents(p: int, q: int) -> tuple[int, int]:
    # a q + b p = 1 with a in [1, p-1]
    a = pow(q, -1, p)
    b = (1 - a * q) // p
    return a, b


class SeifertPiece(PieceGroup):
    """A piece group together with its boundary-torus bases."""

    def __init__(self, kind, signature, carries, label,
                 inner_second_terms: tuple[tuple[tuple[str, int], ...], ...]):
        super().__init__(kind, signature, carries, label)
        self.inner_second_terms = inner_second_terms
        self.inner_count = len(inner_second_terms)
        if isinstance(kind, Composing):
            self.fiber_slope = (1, 0)  # t = mu
            self.mu = self.element(1, ())
            self.lam = self.canonicalize([("c", 1)])
        else:
            pq = kind.p * kind.q
            self.fiber_slope = (pq, 1)  # t = mu^{pq} lam
            if isinstance(kind, TorusKnot):
                a, b = _torus_meridian_exponents(kind.p, kind.q)
                self.mu = self.canonicalize([("u", a), ("v", b)])
                self.meridian_exponents = (a, b)
            else:
                self.mu = self.canonicalize([("c1", 1)])
            self.lam = self.mul(self.element(1, ()), self.pow(self.mu, -pq))

    # boundary bases -----------------------------------------------------

    def inner_second(self, i: int) -> PieceElement:
        """Second basis element of inner torus T_i (the first is always t)."""
        if not 1 <= i <= self.inner_count:
            raise ValueError(f"{self.label} has no inner torus T_{i}")
        return self.canonicalize(self.inner_second_terms[i - 1])

    # membership and coordinates ------------------------------------------

    def outer_coords(self, g: PieceElement) -> Optional[tuple[int, int]]:
        """(A, B) with g = mu^A lam^B, or None if g is not literally in the
        outer boundary subgroup <mu, lam> = <mu, t>."""
        self._check(g)
        if isinstance(self.kind, Composing):
            # mu = t, lam = c: membership means the word is a c-power
            j = fp_is_power_of(g.word, self.lam.word)
            if j is None:
                return None
            return g.t_exp, j
        j = fp_is_power_of(g.word, self.mu.word)
        if j is None:
            return None
        m = g.t_exp - self.pow(self.mu, j).t_exp
        pq = self.fiber_slope[0]
        return j + pq * m, m

    def inner_coords(self, g: PieceElement, i: int) -> Optional[tuple[int, int]]:
        """(alpha, beta) with g = t^alpha * second_i^beta, or None."""
        self._check(g)
        second = self.inner_second(i)
        beta = fp_is_power_of(g.word, second.word)
        if beta is None:
            return None
        alpha = g.t_exp - self.pow(second, beta).t_exp
        return alpha, beta

    def from_outer_coords(self, a: int, b: int) -> PieceElement:
        return self.mul(self.pow(self.mu, a), self.pow(self.lam, b))

    def from_inner_coords(self, i: int, alpha: int, beta: int) -> PieceElement:
        return self.mul(self.element(alpha, ()), self.pow(self.inner_second(i), beta))

    def peripheral_membership(self, g: PieceElement, torus: int) -> bool:
        """Literal membership of g in a boundary-torus subgroup.

        ``torus`` 0 means the outer boundary, i >= 1 the inner torus T_i.
        """
        if torus == 0:
            return self.outer_coords(g) is not None
        return self.inner_coords(g, torus) is not None

    # conjugacy-level classification --------------------------------------

    def classify_peripheral(self, g: PieceElement):
        """Outer / Inner / NonPeripheral classification of a nontrivial g,
        up to conjugacy (decided on the cyclically reduced core)."""
        self._check(g)
        if g.is_identity:
            raise ValueError("identity element has no peripheral class")
        core, _ = self.cyclic_reduce(g)
        if core.word.is_identity:
            a, b = self.fiber_slope
            return Outer((a, b), core.t_exp, central=True)
        rotations = [core]
        for _ in range(min(2, len(core.word)) - 1):
            rotations.append(self._rotate(rotations[-1]))
        for rot in rotations:
            coords = self.outer_coords(rot)
            if coords is not None:
                return Outer(*_normalize_slope(*coords))
        for i in range(1, self.inner_count + 1):
            for rot in rotations:
                if self.inner_coords(rot, i) is not None:
                    return Inner(i)
        return NonPeripheral()

    # abelianization ------------------------------------------------------

    def abelian_relations(self) -> list[list[int]]:
        """Relation rows over (word generators..., t) for H_1 of the piece."""
        n = self.signature.arity
        rows = []
        for f in range(n):
            m = self.signature.order(f)
            if m is not None:
                row = [0] * (n + 1)
                row[f] = m
                row[n] = -self.carries[f]
                rows.append(row)
        return rows

    def abelian_vector(self, g: PieceElement) -> list[int]:
        n = self.signature.arity
        vec = [0] * (n + 1)
        for f, e in g.word.syllables:
            vec[f] += e
        vec[n] = g.t_exp
        return vec


def _normalize_slope(a: int, b: int) -> tuple[tuple[int, int], int]:
    d = gcd(a, b)
    k = d
    a, b = a // d, b // d
    if b < 0 or (b == 0 and a < 0):
        a, b, k = -a, -b, -k
    return (a, b), k


@lru_cache(maxsize=None)
def piece_group(kind: PieceKind) -> SeifertPiece:
    """The (unfilled) piece group for a kind; cached, one instance each."""
    if isinstance(kind, TorusKnot):
        sig = FactorSignature((("u", kind.p), ("v", abs(kind.q))))
        carries = (1, 1 if kind.q > 0 else -1)
        return SeifertPiece(kind, sig, carries,
                            f"torus({kind.p},{kind.q})", ())
    if isinstance(kind, Cable):
        sig = FactorSignature((("c1", None), ("c2", kind.q)))
        return SeifertPiece(kind, sig, (0, -1),
                            f"cable({kind.p},{kind.q})",
                            ((("c1", 1), ("c2", 1)),))
    if isinstance(kind, Composing):
        sig = FactorSignature((("c", None), ("d", None)))
        return SeifertPiece(kind, sig, (0, 0), "sum",
                            ((("d", 1),), (("c", 1), ("d", 1))))
    raise ValueError(f"unsupported piece kind {kind!r}")
