import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from knotfill.freeprod import (
    FactorSignature,
    FPWord,
    ParseError,
    fp_cyclic_reduce,
    fp_invert,
    fp_is_power_of,
    fp_multiply,
    fp_normalize,
    fp_is_power_of,
    format_word,
    parse_terms,
    parse_word,
)

Z2Z3 = FactorSignature((("c1", 2), ("c2", 3)))
Z5Z = FactorSignature((("a", 5), ("b", None)))
ZZ = FactorSignature((("c", None), ("d", None)))

SIGNATURES = [Z2Z3, Z5Z, ZZ]


def w(sig, *raw):
    return fp_normalize(sig, raw)


def test_order_two_cancellation():
    assert w(Z2Z3, ("c1", 1), ("c1", 1)).is_identity


def test_exponent_mod_order():
    assert w(Z2Z3, ("c2", 4)) == w(Z2Z3, ("c2", 1))


def test_nested_cancellation():
    assert w(Z2Z3, ("c1", 1), ("c2", 2), ("c2", 1), ("c1", 1)).is_identity


def test_multiply_cancels():
    a = w(Z2Z3, ("c1", 1), ("c2", 1))
    b = w(Z2Z3, ("c2", 2), ("c1", 1))
    assert fp_multiply(a, b).is_identity


def test_invert_componentwise():
    a = w(Z2Z3, ("c1", 1), ("c2", 1))
    assert fp_invert(a) == w(Z2Z3, ("c2", 2), ("c1", 1))


def test_power_concatenation_length():
    cd = w(ZZ, ("c", 1), ("d", 1))
    a, b = cd**5, cd**6
    prod = fp_multiply(a, b)
    assert prod == cd**11
    assert len(prod) == 22


def test_cyclic_reduce_conjugate():
    a = w(Z2Z3, ("c1", 1), ("c2", 1), ("c1", 1))
    core, conj = fp_cyclic_reduce(a)
    assert core == w(Z2Z3, ("c2", 1))
    assert conj == w(Z2Z3, ("c1", 1))


def test_cyclic_reduce_already_reduced():
    a = w(Z2Z3, ("c1", 1), ("c2", 1))
    core, conj = fp_cyclic_reduce(a)
    assert core == a and conj.is_identity


def test_cyclic_reduce_empty():
    core, conj = fp_cyclic_reduce(w(Z2Z3))
    assert core.is_identity and conj.is_identity


def test_is_power_of_positive():
    cd = w(ZZ, ("c", 1), ("d", 1))
    assert fp_is_power_of(cd**3, cd) == 3


def test_is_power_of_mismatch():
    a = w(ZZ, ("c", 2), ("d", 1))
    cd = w(ZZ, ("c", 1), ("d", 1))
    assert fp_is_power_of(a, cd) is None


def test_is_power_of_zero():
    d = w(ZZ, ("d", 1))
    assert fp_is_power_of(w(ZZ), d) == 0


def test_is_power_of_negative():
    cd = w(ZZ, ("c", 1), ("d", 1))
    assert fp_is_power_of(cd**-4, cd) == -4


def test_is_power_of_single_syllable_mod():
    c2 = w(Z2Z3, ("c2", 1))
    assert fp_is_power_of(w(Z2Z3, ("c2", 2)), c2) == 2


def test_is_power_of_empty_base_rejected():
    with pytest.raises(ValueError):
        fp_is_power_of(w(ZZ), w(ZZ))


def random_raw(rng, sig, max_len=12, max_exp=6):
    out = []
    for _ in range(rng.randrange(max_len + 1)):
        f = rng.randrange(sig.arity)
        e = rng.choice([e for e in range(-max_exp, max_exp + 1) if e])
        out.append((f, e))
    return out


def random_word(rng, sig, max_len=12, max_exp=6):
    return fp_normalize(sig, random_raw(rng, sig, max_len, max_exp))


def insert_relators(rng, sig, raw, rounds=6):
    """Random legal insertions: x x^-1 pairs and order-m relators."""
    raw = list(raw)
    for _ in range(rounds):
        pos = rng.randrange(len(raw) + 1)
        f = rng.randrange(sig.arity)
        m = sig.order(f)
        if m is not None and rng.random() < 0.5:
            k = rng.choice([-1, 1])
            raw[pos:pos] = [(f, k * m)]
        else:
            e = rng.randrange(1, 5)
            raw[pos:pos] = [(f, e), (f, -e)]
    return raw


@pytest.mark.parametrize("sig", SIGNATURES, ids=["Z2*Z3", "Z5*Z", "Z*Z"])
def test_normalize_idempotent_and_insertion_invariant(sig):
    rng = random.Random(7)
    for _ in range(400):
        raw = random_raw(rng, sig)
        nf = fp_normalize(sig, raw)
        assert fp_normalize(sig, nf.syllables) == nf
        assert fp_normalize(sig, insert_relators(rng, sig, raw)) == nf


@pytest.mark.parametrize("sig", SIGNATURES, ids=["Z2*Z3", "Z5*Z", "Z*Z"])
def test_group_laws(sig):
    rng = random.Random(11)
    for _ in range(300):
        a, b, c = (random_word(rng, sig) for _ in range(3))
        assert fp_multiply(fp_multiply(a, b), c) == fp_multiply(a, fp_multiply(b, c))
        assert fp_multiply(a, fp_invert(a)).is_identity
        assert fp_multiply(fp_invert(a), a).is_identity
        assert len(fp_multiply(a, b)) <= len(a) + len(b)


@pytest.mark.parametrize("sig", SIGNATURES, ids=["Z2*Z3", "Z5*Z", "Z*Z"])
def test_cyclic_reduce_round_trip(sig):
    rng = random.Random(13)
    for _ in range(300):
        a = random_word(rng, sig)
        core, conj = fp_cyclic_reduce(a)
        assert len(core) <= 1 or core.syllables[0].factor != core.syllables[-1].factor
        back = fp_multiply(fp_multiply(conj, core), fp_invert(conj))
        assert back == a


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(-8, 8)), max_size=14))
@settings(max_examples=200)
def test_normal_form_invariants_hypothesis(raw):
    nf = fp_normalize(Z2Z3, raw)
    for i, s in enumerate(nf.syllables):
        assert s.exp != 0
        m = Z2Z3.order(s.factor)
        if m is not None:
            assert 1 <= s.exp <= m - 1
        if i:
            assert s.factor != nf.syllables[i - 1].factor


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(-5, 5)), max_size=8),
       st.integers(-4, 4))
@settings(max_examples=150)
def test_power_of_detects_constructed_powers(raw, k):
    base = fp_normalize(ZZ, raw)
    core, _ = fp_cyclic_reduce(base)
    if core.is_identity:
        return
    found = fp_is_power_of(core**k, core)
    assert found is not None
    assert core**found == core**k


def test_parse_and_format_round_trip():
    text = "c1 c2^2 c1 c2^-1"
    word = parse_word(Z2Z3, text)
    assert parse_word(Z2Z3, format_word(word)) == word


def test_parse_terms_positions():
    with pytest.raises(ParseError) as exc:
        parse_terms("c1 ^2")
    assert exc.value.position == 3


def test_parse_empty_is_identity():
    assert parse_word(Z2Z3, "").is_identity
    assert format_word(parse_word(Z2Z3, "")) == "1"
