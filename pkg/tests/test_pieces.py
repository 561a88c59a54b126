import random

import pytest

from knotfill.pieces import (
    Cable,
    Composing,
    Inner,
    NonPeripheral,
    Outer,
    TorusKnot,
    piece_group,
)

TREFOIL = piece_group(TorusKnot(2, 3))
CABLE23 = piece_group(Cable(2, 3))
SUM = piece_group(Composing())


def test_kind_validation():
    with pytest.raises(ValueError):
        TorusKnot(2, 4)
    with pytest.raises(ValueError):
        TorusKnot(3, 2)
    with pytest.raises(ValueError):
        Cable(2, 1)
    with pytest.raises(ValueError):
        Cable(3, 6)


def test_canonicalize_torus_wrap():
    g = TREFOIL.parse("u^3")
    assert (g.t_exp, str(g.word)) == (1, "u")


def test_canonicalize_torus_central():
    g = TREFOIL.parse("u^2 v^3")
    assert (g.t_exp, g.word.is_identity) == (2, True)


def test_canonicalize_composing_centrality():
    g = SUM.parse("c t^2 d t^-1 c")
    assert (g.t_exp, str(g.word)) == (1, "c d c")


def test_unknown_generator():
    with pytest.raises(ValueError):
        TREFOIL.parse("c1")


def test_multiply_torus_square():
    u = TREFOIL.parse("u")
    g = u * u
    assert (g.t_exp, g.word.is_identity) == (1, True)


def test_multiply_cable_carry():
    g = CABLE23.parse("c2^2") * CABLE23.parse("c2^2")
    assert (g.t_exp, str(g.word)) == (-1, "c2")


def test_multiply_inverse_composing():
    a = SUM.parse("t c d")
    b = SUM.parse("t^-1 d^-1 c^-1")
    assert (a * b).is_identity
    assert (a * a.inverse()).is_identity


def test_piece_mismatch():
    with pytest.raises(ValueError):
        TREFOIL.mul(TREFOIL.parse("u"), CABLE23.parse("c1"))


def random_terms(rng, names, max_len=10, max_exp=5):
    out = []
    for _ in range(rng.randrange(max_len + 1)):
        name = rng.choice(names)
        exp = rng.choice([e for e in range(-max_exp, max_exp + 1) if e])
        out.append((name, exp))
    return out


def rewrite_terms(rng, group, terms, rounds=5):
    """Insert defining relators: t-centrality swaps, x x^-1, and full
    finite-order wraps paid for by the matching central power."""
    terms = list(terms)
    finite = [(group.signature.name(f), group.signature.order(f), group.carries[f])
              for f in range(group.signature.arity)
              if group.signature.order(f) is not None]
    for _ in range(rounds):
        pos = rng.randrange(len(terms) + 1)
        choice = rng.random()
        if choice < 0.4 and finite:
            name, order, carry = rng.choice(finite)
            sign = rng.choice([-1, 1])
            terms[pos:pos] = [(name, sign * order), ("t", -sign * carry)]
        elif choice < 0.7:
            name = rng.choice([group.signature.name(f) for f in range(group.signature.arity)])
            e = rng.randrange(1, 4)
            terms[pos:pos] = [(name, e), (name, -e)]
        else:
            terms[pos:pos] = [("t", 1), ("t", -1)]
    # centrality: t-terms may be moved anywhere
    ts = [(n, e) for n, e in terms if n == "t"]
    rest = [(n, e) for n, e in terms if n != "t"]
    for t in ts:
        rest.insert(rng.randrange(len(rest) + 1), t)
    return rest


@pytest.mark.parametrize("group,names", [
    (TREFOIL, ["u", "v", "t"]),
    (CABLE23, ["c1", "c2", "t"]),
    (SUM, ["c", "d", "t"]),
], ids=["torus", "cable", "sum"])
def test_section_unique_on_rewritings(group, names):
    rng = random.Random(23)
    for _ in range(300):
        terms = random_terms(rng, names)
        g = group.canonicalize(terms)
        h = group.canonicalize(rewrite_terms(rng, group, terms))
        assert g == h


@pytest.mark.parametrize("group,names", [
    (TREFOIL, ["u", "v", "t"]),
    (CABLE23, ["c1", "c2", "t"]),
    (SUM, ["c", "d", "t"]),
], ids=["torus", "cable", "sum"])
def test_central_fiber_commutes(group, names):
    rng = random.Random(29)
    t = group.element(1, ())
    for _ in range(200):
        g = group.canonicalize(random_terms(rng, names))
        h = group.canonicalize(random_terms(rng, names))
        assert group.mul(group.mul(g, t), h) == group.mul(group.mul(g, h), t)
        assert group.mul(t, g) == group.mul(g, t)


def test_cyclic_reduce_round_trip():
    rng = random.Random(31)
    for group, names in [(TREFOIL, ["u", "v", "t"]), (CABLE23, ["c1", "c2", "t"]),
                         (SUM, ["c", "d", "t"])]:
        for _ in range(200):
            g = group.canonicalize(random_terms(rng, names))
            core, conj = group.cyclic_reduce(g)
            w = core.word
            assert len(w) <= 1 or w.syllables[0].factor != w.syllables[-1].factor
            assert group.mul(group.mul(conj, core), group.inv(conj)) == g


# peripheral structure -------------------------------------------------------

def test_classify_composing_outer_slope():
    # independent check first: (mu lam^2)^3 really is (t c^2)^3
    g = SUM.pow(SUM.mul(SUM.mu, SUM.pow(SUM.lam, 2)), 3)
    assert g == SUM.parse("t^3 c^6")
    got = SUM.classify_peripheral(g)
    assert got == Outer((1, 2), 3)


def test_classify_composing_inner_first():
    assert SUM.classify_peripheral(SUM.parse("d^5")) == Inner(1)


def test_classify_composing_inner_second():
    assert SUM.classify_peripheral(SUM.parse("c d")) == Inner(2)


def test_classify_cable_conjugate_nonperipheral():
    g = CABLE23.parse("c1 c2 c1^-1")
    core, _ = CABLE23.cyclic_reduce(g)
    assert str(core.word) == "c2"
    assert CABLE23.classify_peripheral(g) == NonPeripheral()


def test_classify_central_flagged():
    got = TREFOIL.classify_peripheral(TREFOIL.parse("t^5"))
    assert isinstance(got, Outer) and got.central
    assert got.slope == (6, 1) and got.power == 5


def test_classify_rotated_outer():
    # a conjugate of mu^2 whose core is a rotation of the mu-word pattern
    g = TREFOIL.mul(TREFOIL.parse("v"), TREFOIL.mul(TREFOIL.pow(TREFOIL.mu, 2),
                                                    TREFOIL.parse("v^-1")))
    got = TREFOIL.classify_peripheral(g)
    assert got == Outer((1, 0), 2)


def test_classify_identity_rejected():
    with pytest.raises(ValueError):
        SUM.classify_peripheral(SUM.identity)


def test_membership_composing():
    assert SUM.peripheral_membership(SUM.parse("t^7 d^-2"), 1)
    assert not SUM.peripheral_membership(SUM.parse("c d"), 1)
    assert SUM.peripheral_membership(SUM.parse("c d"), 2)


def test_membership_cable_inner():
    g = CABLE23.mul(CABLE23.element(4, ()), CABLE23.pow(CABLE23.parse("c1 c2"), 4))
    assert CABLE23.peripheral_membership(g, 1)
    assert not CABLE23.peripheral_membership(CABLE23.parse("c1 c2^2"), 1)


def test_membership_invalid_torus_index():
    with pytest.raises(ValueError):
        TREFOIL.peripheral_membership(TREFOIL.parse("u"), 1)


def test_inner_coords_round_trip():
    rng = random.Random(37)
    for group, count in [(CABLE23, 1), (SUM, 2)]:
        for _ in range(100):
            i = rng.randrange(1, count + 1)
            alpha, beta = rng.randrange(-4, 5), rng.randrange(-4, 5)
            g = group.from_inner_coords(i, alpha, beta)
            assert group.inner_coords(g, i) == (alpha, beta)


def test_outer_coords_round_trip():
    rng = random.Random(41)
    for group in [TREFOIL, CABLE23, SUM]:
        for _ in range(100):
            a, b = rng.randrange(-4, 5), rng.randrange(-4, 5)
            g = group.from_outer_coords(a, b)
            assert group.outer_coords(g) == (a, b)


# Bezout soundness ------------------------------------------------------------

def test_torus_meridian_bezout():
    a, b = TREFOIL.meridian_exponents
    assert a * 3 + b * 2 == 1
    mu, lam = TREFOIL.mu, TREFOIL.lam
    assert TREFOIL.mul(mu, lam) == TREFOIL.mul(lam, mu)
    # t = mu^{pq} lam
    assert TREFOIL.mul(TREFOIL.pow(mu, 6), lam) == TREFOIL.element(1, ())


def test_torus_abelianization_sends_mu_to_generator():
    # H_1 = Z via u -> q, v -> p, t -> pq (cokernel of the relation rows)
    def h1(g):
        vec = TREFOIL.abelian_vector(g)
        return vec[0] * 3 + vec[1] * 2 + vec[2] * 6

    assert h1(TREFOIL.mu) == 1
    assert h1(TREFOIL.lam) == 0
    assert h1(TREFOIL.parse("u v u^-1 v^-1")) == 0


def test_bezout_representatives_agree():
    # any Bezout pair differs by central multiples and gives the same mu
    a, b = TREFOIL.meridian_exponents
    other = TREFOIL.canonicalize([("u", a + 2), ("v", b - 3)])
    assert other == TREFOIL.mu
