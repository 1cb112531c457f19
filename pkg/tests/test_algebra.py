import random

import pytest
from fractions import Fraction

from sftstring.algebra import (
    KIND_Q,
    KIND_S,
    GradedSeries,
    GradedSymbol,
    NormalizationError,
    TruncationContext,
    koszul_sign,
    monomial_degree,
    mul,
    normalize,
)


def sym(name, degree, kind=KIND_Q, orbit=None, index=0):
    return GradedSymbol(name, degree, kind, orbit, index)


q1 = sym("q[1]", -1, orbit="1", index=0)
q2 = sym("q[2]", -1, orbit="2", index=1)
q3 = sym("q[3]", 2, orbit="3", index=2)  # an even generator
CTX = TruncationContext(max_p_degree=8, max_hbar=8, min_hbar=-4, max_word_length=10)


def test_koszul_sign_identity():
    assert koszul_sign([q1, q2, q3], [0, 1, 2]) == 1


def test_koszul_sign_odd_swap():
    assert koszul_sign([q1, q2], [1, 0]) == -1


def test_koszul_sign_even_odd_swap():
    assert koszul_sign([q1, q3], [1, 0]) == 1


def test_koszul_sign_composes():
    # the sign of a permutation is the product over any transposition chain
    syms = [q1, q2, q3, sym("q[4]", -3, orbit="4", index=3)]
    rng = random.Random(7)
    for _ in range(50):
        perm = list(range(4))
        rng.shuffle(perm)
        s = koszul_sign(syms, perm)
        # compose with one more odd-odd swap of positions 0,1 in the output
        perm2 = list(perm)
        perm2[0], perm2[1] = perm2[1], perm2[0]
        s2 = koszul_sign(syms, perm2)
        odd = syms[perm[0]].parity and syms[perm[1]].parity
        assert s2 == (-s if odd else s)


def test_normalize_sorts_with_sign():
    res = normalize([(q2, 1), (q1, 1)])
    assert res is not None
    sgn, mono = res
    assert sgn == -1
    assert mono == ((q1, 1), (q2, 1))


def test_normalize_odd_square_vanishes():
    assert normalize([(q1, 1), (q1, 1)]) is None
    assert normalize([(q1, 2)]) is None


def test_normalize_even_commutes():
    sgn, mono = normalize([(q3, 1), (q1, 1)])
    assert sgn == 1
    assert mono == ((q1, 1), (q3, 1))


def test_normalize_idempotent():
    sgn, mono = normalize([(q3, 1), (q2, 1), (q1, 1)])
    sgn2, mono2 = normalize(list(mono))
    assert sgn2 == 1 and mono2 == mono


def test_normalize_rejects_weyl_disorder():
    p1 = sym("p[1]", -1, kind="p", orbit="1", index=0)
    with pytest.raises(NormalizationError):
        normalize([(p1, 1), (q1, 1)])
    # q left of p is standard form, fine
    sgn, mono = normalize([(q1, 1), (p1, 1)])
    assert mono == ((q1, 1), (p1, 1))


def _random_series(rng, symbols, nterms=3):
    out = GradedSeries.zero()
    for _ in range(nterms):
        word = []
        for s in symbols:
            e = rng.randrange(0, 2 if s.parity else 3)
            if e:
                word.append((s, e))
        coeff = Fraction(rng.randrange(-4, 5), rng.randrange(1, 4))
        out = out + GradedSeries.from_word(word, coeff)
    return out


def test_mul_unit_and_zero():
    a = _random_series(random.Random(1), [q1, q2, q3])
    one = GradedSeries.unit()
    assert mul(one, a, CTX) == a
    assert mul(a, GradedSeries.zero(), CTX).is_zero()


def test_mul_graded_commutative_and_associative():
    rng = random.Random(5)
    syms = [q1, q2, q3, sym("q[4]", 1, orbit="4", index=3)]
    for _ in range(60):
        a = _random_series(rng, syms)
        b = _random_series(rng, syms)
        c = _random_series(rng, syms)
        assert mul(mul(a, b, CTX), c, CTX) == mul(a, mul(b, c, CTX), CTX)
        # graded commutativity on homogeneous pieces
        da, db = a.homogeneous_degree(), b.homogeneous_degree()
        if da is not None and db is not None:
            sign = -1 if (da % 2 and db % 2) else 1
            assert mul(a, b, CTX) == mul(b, a, CTX).scale(sign)


def test_mul_degree_additivity():
    a = GradedSeries.from_word([(q1, 1)])
    b = GradedSeries.from_word([(q3, 2)])
    prod = mul(a, b, CTX)
    assert prod.homogeneous_degree() == monomial_degree(((q1, 1),)) + 4


def test_odd_sum_squares_to_zero():
    a = GradedSeries.from_word([(q1, 1)]) + GradedSeries.from_word([(q2, 1)])
    assert mul(a, a, CTX).is_zero()


def test_truncation_window():
    ctx = TruncationContext(max_p_degree=2, max_hbar=1, min_hbar=0, max_word_length=2)
    s1 = sym("s[x]", -1, kind=KIND_S, index=0)
    s2 = sym("s[y]", -1, kind=KIND_S, index=1)
    s3 = sym("s[z]", -1, kind=KIND_S, index=2)
    a = GradedSeries.from_word([(s1, 1), (s2, 1)])
    b = GradedSeries.from_word([(s3, 1)])
    # word length 3 exceeds the cap and is dropped
    assert mul(a, b, ctx).is_zero()
