"""Independent brute-force verifiers.

Nothing here shares code with the decision procedures it checks: coset
enumeration is plain HLT-style Todd-Coxeter (Holt, Eick, O'Brien,
"Handbook of Computational Group Theory", ch. 5), equivalence search is
breadth-first relator insertion, and the homology helpers run textbook
Smith normal form over the integers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .freeprod import FactorSignature, FPWord, fp_fold, fp_invert, fp_multiply

DEFAULT_CAP = 10**6

Term = tuple[str, int]
Word = tuple[Term, ...]


class OracleCapExceeded(RuntimeError):
    """An enumeration hit its coset cap; enlarge the bound and retry."""


@dataclass(frozen=True)
class FinitePresentation:
    generators: tuple[str, ...]
    relators: tuple[Word, ...]
    subgroup: tuple[Word, ...] = ()
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.cap < 1:
            raise ValueError("cap must be >= 1")
        for rel in self.relators + self.subgroup:
            for name, _ in rel:
                if name not in self.generators:
                    raise ValueError(f"unknown generator {name!r} in relator")


@dataclass
class Finished:
    count: int  # group order (trivial subgroup) or subgroup index
    table: list = field(default_factory=list)
    reps: list = field(default_factory=list)


@dataclass(frozen=True)
class CapExceeded:
    cap: int


def _letters(pres: FinitePresentation, word: Iterable[Term]) -> list[int]:
    out = []
    for name, exp in word:
        i = pres.generators.index(name)
        letter = 2 * i if exp > 0 else 2 * i + 1
        out.extend([letter] * abs(exp))
    return out


class _Table:
    def __init__(self, width: int, cap: int):
        self.rows: list[list[Optional[int]]] = [[None] * width]
        self.p = [0]
        self.width = width
        self.cap = cap

    def rep(self, k: int) -> int:
        l = k
        while self.p[l] != l:
            l = self.p[l]
        while self.p[k] != l:
            self.p[k], k = l, self.p[k]
        return l

    def define(self, a: int, x: int) -> int:
        if len(self.rows) >= self.cap:
            raise _Cap()
        b = len(self.rows)
        self.rows.append([None] * self.width)
        self.p.append(b)
        self.rows[a][x] = b
        self.rows[b][x ^ 1] = a
        return b

    def coincidence(self, a: int, b: int):
        stack = [(a, b)]
        while stack:
            a, b = stack.pop()
            a, b = self.rep(a), self.rep(b)
            if a == b:
                continue
            if a > b:
                a, b = b, a
            self.p[b] = a
            row = self.rows[b]
            for x in range(self.width):
                d = row[x]
                if d is None:
                    continue
                row[x] = None
                d = self.rep(d)
                back = self.rows[d][x ^ 1]
                if back is not None and self.rep(back) == b:
                    self.rows[d][x ^ 1] = None
                e = self.rows[a][x]
                if e is not None:
                    stack.append((d, self.rep(e)))
                elif d == b:
                    # entry pointed at the dying coset itself
                    self.rows[a][x] = a
                    self.rows[a][x ^ 1] = a
                else:
                    self.rows[a][x] = d
                    if self.rows[d][x ^ 1] is None:
                        self.rows[d][x ^ 1] = a
                    else:
                        stack.append((self.rep(self.rows[d][x ^ 1]), a))

    def scan_and_fill(self, alpha: int, word: Sequence[int]):
        f, i = alpha, 0
        b, j = alpha, len(word) - 1
        while True:
            while i <= j and self.rows[f][word[i]] is not None:
                f = self.rep(self.rows[f][word[i]])
                i += 1
            if i > j:
                if f != b:
                    self.coincidence(f, b)
                return
            while j >= i and self.rows[b][word[j] ^ 1] is not None:
                b = self.rep(self.rows[b][word[j] ^ 1])
                j -= 1
            if j < i:
                self.coincidence(f, b)
                return
            if i == j:
                self.rows[f][word[i]] = b
                self.rows[b][word[i] ^ 1] = f
                return
            f = self.define(f, word[i])
            i += 1

    def live(self) -> list[int]:
        return [k for k in range(len(self.rows)) if self.rep(k) == k]


class _Cap(Exception):
    pass


def coset_enumerate(pres: FinitePresentation):
    """HLT-style coset enumeration relative to ``pres.subgroup`` (the
    trivial subgroup by default, giving the group order).

    Returns :class:`Finished` or :class:`CapExceeded`; deterministic for
    identical inputs (fixed relator cycling, no lookahead).
    """
    width = 2 * len(pres.generators)
    table = _Table(width, pres.cap)
    relators = [_letters(pres, r) for r in pres.relators]
    try:
        for w in pres.subgroup:
            table.scan_and_fill(0, _letters(pres, w))
        alpha = 0
        while alpha < len(table.rows):
            if table.rep(alpha) != alpha:
                alpha += 1
                continue
            for rel in relators:
                if not rel:
                    continue
                table.scan_and_fill(alpha, rel)
                if table.rep(alpha) != alpha:
                    break
            if table.rep(alpha) == alpha:
                for x in range(width):
                    if table.rows[alpha][x] is None:
                        table.define(alpha, x)
            alpha += 1
    except _Cap:
        return CapExceeded(pres.cap)
    live = table.live()
    renumber = {c: i for i, c in enumerate(live)}
    rows = [[renumber[table.rep(table.rows[c][x])] for x in range(width)]
            for c in live]
    return Finished(count=len(live), table=rows, reps=live)


def trace_word(pres: FinitePresentation, result: Finished,
               word: Iterable[Term], start: int = 0) -> int:
    """Image coset of ``start`` under a word, in a finished enumeration."""
    c = start
    for letter in _letters(pres, word):
        c = result.table[c][letter]
    return c


def is_trivial_element(pres: FinitePresentation, result: Finished,
                       word: Iterable[Term]) -> bool:
    """With the trivial subgroup the cosets form the regular representation,
    so an element is trivial iff it fixes the base coset."""
    return trace_word(pres, result, word) == 0


# breadth-first relator-insertion search -------------------------------------

@dataclass(frozen=True)
class BfsEqual:
    depth: int


@dataclass(frozen=True)
class BfsDistinct:
    depth: int


def bfs_equivalence(signature: FactorSignature, relators: Sequence[FPWord],
                    u: FPWord, v: FPWord, depth: int,
                    state_cap: int = 2_000_000):
    """Search for ``u == v`` by inserting relators into u v^-1 and freely
    reducing, breadth-first up to ``depth`` insertions."""
    start = fp_multiply(u, fp_invert(v))
    if start.is_identity:
        return BfsEqual(0)
    variants = []
    for r in relators:
        variants.append(tuple(r.syllables))
        variants.append(tuple(fp_invert(r).syllables))
    if not variants:
        return BfsDistinct(depth)
    max_len = max(len(v_) for v_ in variants)
    frontier = {start.syllables}
    seen = {start.syllables}
    for d in range(1, depth + 1):
        budget = (depth - d) * max_len
        next_frontier = set()
        for syls in frontier:
            for i in range(len(syls) + 1):
                head, tail = syls[:i], syls[i:]
                for var in variants:
                    _, new = fp_fold(signature, head + var + tail)
                    if not new:
                        return BfsEqual(d)
                    if len(new) > budget or new in seen:
                        continue
                    seen.add(new)
                    next_frontier.add(new)
                    if len(seen) > state_cap:
                        raise OracleCapExceeded("bfs state cap exceeded")
        frontier = next_frontier
        if not frontier:
            break
    return BfsDistinct(depth)


# integer linear algebra ------------------------------------------------------

def smith_normal_form(rows: Sequence[Sequence[int]], ncols: int):
    """Diagonalise an integer relation matrix.

    Returns ``(diag, V)``: ``diag`` the invariant factors d_1 | d_2 | ...
    (nonnegative, zeros trimmed) and ``V`` the accumulated unimodular
    column transform, so a row vector v lies in the row lattice iff the
    coordinates of v @ V are divisible by the matching diagonal entries
    (and vanish past them).
    """
    m = [list(r) + [0] * (ncols - len(r)) for r in rows]
    nrows = len(m)
    v = [[int(i == j) for j in range(ncols)] for i in range(ncols)]

    def col_op(j, k, c):  # col_j += c * col_k
        for row in m:
            row[j] += c * row[k]
        for row in v:
            row[j] += c * row[k]

    def col_swap(j, k):
        for row in m:
            row[j], row[k] = row[k], row[j]
        for row in v:
            row[j], row[k] = row[k], row[j]

    def row_op(i, k, c):  # row_i += c * row_k
        m[i] = [a + c * b for a, b in zip(m[i], m[k])]

    def diagonalize():
        t = 0
        while t < min(nrows, ncols):
            pivot = next(((i, j) for i in range(t, nrows)
                          for j in range(t, ncols) if m[i][j]), None)
            if pivot is None:
                return t
            i, j = pivot
            m[t], m[i] = m[i], m[t]
            if j != t:
                col_swap(t, j)
            while True:
                for i in range(t + 1, nrows):
                    while m[i][t]:
                        row_op(i, t, -(m[i][t] // m[t][t]))
                        if m[i][t]:
                            m[t], m[i] = m[i], m[t]
                for j in range(t + 1, ncols):
                    while m[t][j]:
                        col_op(j, t, -(m[t][j] // m[t][t]))
                        if m[t][j]:
                            col_swap(t, j)
                if not any(m[i][t] for i in range(t + 1, nrows)):
                    break
            t += 1
        return t

    rank = diagonalize()
    while True:
        bad = next((i for i in range(rank - 1)
                    if m[i + 1][i + 1] % m[i][i]), None)
        if bad is None:
            break
        col_op(bad, bad + 1, 1)
        rank = diagonalize()
    diag = [abs(m[i][i]) for i in range(rank)]
    return diag, v


def cokernel(rows: Sequence[Sequence[int]], ncols: int):
    """Invariant factors of Z^ncols / row lattice: (torsion list, free rank)."""
    diag, _ = smith_normal_form(rows, ncols)
    torsion = [d for d in diag if d > 1]
    free = ncols - len(diag)
    return torsion, free


def in_row_lattice(rows: Sequence[Sequence[int]], ncols: int,
                   vec: Sequence[int]) -> bool:
    diag, v = smith_normal_form(rows, ncols)
    coords = [sum(vec[k] * v[k][j] for k in range(ncols)) for j in range(ncols)]
    for j in range(ncols):
        d = diag[j] if j < len(diag) else 0
        if d == 0:
            if coords[j]:
                return False
        elif coords[j] % d:
            return False
    return True


def replay_certificate(cert, start) -> bool:
    """Replay a triviality certificate against its start element.

    Accepts iff a Trivial trace ends at the identity with central exponent
    zero, and a NonTrivial witness is Dehn-reduced with no over-half
    relator piece.  Implemented next to the trace format definition.
    """
    from .filling import replay_certificate as _replay  # lazy: no import cycle

    return _replay(cert, start)
