import math
import random

import pytest
import sympy
from hypothesis import assume, given, strategies as st
from sympy.matrices.normalforms import smith_normal_decomp

import _oracles as oracle
from classrank.abelian import inverse_unimodular, invariant_factors, smith_normal_form
from classrank.quadforms import (
    OracleRangeError,
    QuadForm,
    Rank2Certificate,
    compose,
    enumerate_class_group,
    form_order,
    inverse,
    is_principal,
    p_rank,
    power,
    principal_form,
    reduce,
    reduced_forms,
    verify_rank2,
)


def random_form(disc: int, rng: random.Random) -> QuadForm:
    """A random reduced form of ``disc`` pushed through a random SL2(Z) matrix."""
    f = rng.choice(reduced_forms(disc))
    return transform(f, random_sl2(rng))


def random_sl2(rng, steps=6):
    m = (1, 0, 0, 1)
    for _ in range(steps):
        k = rng.randint(-5, 5)
        step = (1, k, 0, 1) if rng.random() < 0.5 else (1, 0, k, 1)
        a, b, c, d = m
        p, q, r, s = step
        m = (a * p + b * r, a * q + b * s, c * p + d * r, c * q + d * s)
    return m


def transform(f: QuadForm, m) -> QuadForm:
    """f(alpha x + beta y, gamma x + delta y)."""
    A, B, C = f
    al, be, ga, de = m
    a = A * al * al + B * al * ga + C * ga * ga
    b = 2 * A * al * be + B * (al * de + be * ga) + 2 * C * ga * de
    c = A * be * be + B * be * de + C * de * de
    return QuadForm(a, b, c)


discs = st.integers(3, 30_000).map(lambda n: -n).filter(lambda d: d % 4 in (0, 1))


def test_validation():
    with pytest.raises(ValueError):
        QuadForm(0, 1, 1)
    with pytest.raises(ValueError):
        QuadForm(1, 3, 1)  # positive discriminant
    with pytest.raises(ValueError):
        QuadForm(-1, 1, -1)
    f = QuadForm(2, 1, 3)
    assert f.discriminant == -23 and f.is_primitive and f.is_reduced
    assert str(f) == "(2, 1, 3)"
    assert not QuadForm(2, 2, 2).is_primitive


def test_reduce_examples():
    assert reduce(QuadForm(3, 5, 81)) == QuadForm(3, -1, 79)
    assert reduce(QuadForm(2, -2, 3)) == QuadForm(2, 2, 3) or reduce(QuadForm(2, -2, 3)).is_reduced
    assert reduce(QuadForm(1, 1, 6)) == QuadForm(1, 1, 6)
    assert reduce(QuadForm(3, -3, 5)) == QuadForm(3, 3, 5)


@given(discs, st.integers(0, 10**6))
def test_reduce_matches_textbook_and_is_transform_invariant(d, seed):
    rng = random.Random(seed)
    f = random_form(d, rng)
    r = reduce(f)
    assert r.is_reduced and r.discriminant == d
    assert tuple(r) == oracle.brute_reduce(*f)
    assert reduce(transform(f, random_sl2(rng))) == r
    assert reduce(r) == r


def test_compose_examples():
    f = QuadForm(2, 1, 3)
    assert compose(f, f) == QuadForm(2, -1, 3)
    assert power(f, 3) == principal_form(-23)
    assert is_principal(power(f, 3)) and not is_principal(f)
    with pytest.raises(ValueError):
        compose(f, QuadForm(1, 1, 1))


@given(discs, st.integers(0, 10**6))
def test_compose_matches_ideal_multiplication(d, seed):
    rng = random.Random(seed)
    f, g = random_form(d, rng), random_form(d, rng)
    assume(f.is_primitive and g.is_primitive)
    h = compose(f, g)
    assert h.discriminant == d and h.is_reduced
    assert tuple(h) == oracle.ideal_compose(tuple(f), tuple(g))


@given(discs, st.integers(0, 10**6), st.integers(-40, 40))
def test_power_and_inverse(d, seed, k):
    rng = random.Random(seed)
    f = reduce(random_form(d, rng))
    assume(f.is_primitive)
    e = principal_form(d)
    assert compose(f, inverse(f)) == e
    expect = e
    for _ in range(abs(k)):
        expect = compose(expect, f if k > 0 else inverse(f))
    assert power(f, k) == expect


def test_reduced_forms_count_matches_brute_force():
    for n in range(3, 3000):
        d = -n
        if d % 4 not in (0, 1):
            continue
        assert len(reduced_forms(d)) == oracle.brute_class_number(d), d


def test_class_number_formula_agreement():
    for d in oracle.negative_fundamental_discriminants(3000):
        assert enumerate_class_group(d).class_number == oracle.class_number_formula(d), d


@pytest.mark.parametrize(
    "d, h, divisors",
    [
        (-3, 1, []),
        (-4, 1, []),
        (-23, 3, [3]),
        (-947, 5, [5]),
        (-420, 8, [2, 2, 2]),
        (-3299, 27, [3, 9]),
        (-11199, 100, [5, 20]),
    ],
)
def test_class_group_examples(d, h, divisors):
    G = enumerate_class_group(d)
    assert G.class_number == h and G.elementary_divisors == divisors
    assert math.prod(G.elementary_divisors) == h


@pytest.mark.parametrize("d", [-9240, -15015, -420, -1155, -23, -4 * 2 * 3 * 5 * 7 * 13])
def test_two_rank_from_genus_theory(d):
    # fundamental d with t distinct prime divisors has 2-rank t - 1
    assert d in oracle.negative_fundamental_discriminants(-d)
    t = len(sympy.primefactors(-d))
    assert enumerate_class_group(d).p_rank(2) == t - 1


def test_class_group_structure_is_consistent():
    G = enumerate_class_group(-11199)
    assert len(G.generators) == 2
    for f, v in G.coordinates.items():
        assert G.element(v) == f
        assert form_order(f, G.class_number) == G.order_of(f)
    with pytest.raises(ValueError):
        p_rank(G, 4)


def test_oracle_bound_and_bad_input():
    with pytest.raises(OracleRangeError):
        enumerate_class_group(-(10**7 + 3))
    with pytest.raises(ValueError):
        enumerate_class_group(5)
    with pytest.raises(ValueError):
        enumerate_class_group(-5)
    G = enumerate_class_group(-38713219, oracle_bound=10**8)
    assert G.class_number == 1400 and G.p_rank(5) == 2


@given(discs)
def test_lagrange(d):
    G = enumerate_class_group(d)
    for f in list(G.coordinates)[:20]:
        assert G.class_number % G.order_of(f) == 0
        assert is_principal(power(f, G.class_number))


# Smith normal form -------------------------------------------------------

matrices = st.integers(1, 4).flatmap(
    lambda n: st.lists(st.lists(st.integers(-30, 30), min_size=n, max_size=n), min_size=1, max_size=4)
)


@given(matrices)
def test_smith_normal_form_against_sympy(rows):
    diag, U, V = smith_normal_form(rows)
    A = sympy.Matrix(rows)
    D = sympy.Matrix(U) * A * sympy.Matrix(V)
    for i in range(D.rows):
        for j in range(D.cols):
            assert D[i, j] == (diag[i] if i == j else 0)
    assert abs(sympy.Matrix(U).det()) == 1 and abs(sympy.Matrix(V).det()) == 1
    nz = [x for x in diag if x]
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    ref = smith_normal_decomp(A)[0]
    ref_diag = sorted(abs(ref[i, i]) for i in range(min(ref.shape)))
    assert sorted(diag) == ref_diag


def test_invariant_factors_and_inverse():
    assert invariant_factors([[2, 0], [0, 3]]) == [6]
    assert invariant_factors([[4, 0], [0, 6]]) == [2, 12]
    M = [[2, 1], [1, 1]]
    Mi = inverse_unimodular(M)
    assert (sympy.Matrix(M) * sympy.Matrix(Mi)) == sympy.eye(2)
    with pytest.raises(ValueError):
        inverse_unimodular([[2, 0], [0, 1]])


# rank-2 certificates -------------------------------------------------------

GOLDEN_F1 = QuadForm(35, 13091, 35**4)
GOLDEN_F2 = QuadForm(25, 591, 25**4)


def test_verify_rank2_golden():
    cert = verify_rank2(5, GOLDEN_F1, GOLDEN_F2)
    assert cert.valid and cert.first_failure is None
    assert cert.discriminant == -38713219
    assert len(cert.transcript) == 2 + 2 + 5
    assert enumerate_class_group(cert.discriminant, oracle_bound=10**8).p_rank(5) >= 2


def test_verify_rank2_rejects_dependent_pair():
    cert = verify_rank2(5, GOLDEN_F1, power(GOLDEN_F1, 2))
    assert not cert.valid and cert.first_failure is not None
    same = verify_rank2(5, GOLDEN_F1, GOLDEN_F1)
    assert not same.valid


def test_certificate_round_trip():
    cert = verify_rank2(5, GOLDEN_F1, GOLDEN_F2)
    again = Rank2Certificate.from_dict(cert.to_dict())
    assert again == cert
    assert again.replay().transcript == cert.transcript
