import cmath
import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from bostconnes import bcdata, exactalg
from bostconnes.bcdata import Datum, QmodZ, WeilCycElem, WeilHatElem, HalfIntQmod2Z, GermElem
from bostconnes.errors import NotInImage
from bostconnes.exactalg import AlgebraElem, CycloNumber

from conftest import all_data, elements

F = Fraction
QZ = Datum("qmodz")


def qz(x):
    return QmodZ(F(x))


def e(x):
    return cmath.exp(2j * cmath.pi * float(x))


# -- cyclotomic polynomials

@pytest.mark.parametrize("N,want", [(1, [-1, 1]), (4, [1, 0, 1]), (6, [1, -1, 1])])
def test_cyclotomic_examples(N, want):
    assert exactalg.cyclotomic_poly(N) == want


@pytest.mark.parametrize("N", range(1, 61))
def test_cyclotomic_matches_sympy(N):
    x = sympy.Symbol("x")
    want = sympy.Poly(sympy.cyclotomic_poly(N, x), x).all_coeffs()[::-1]
    assert exactalg.cyclotomic_poly(N) == [int(c) for c in want]
    assert exactalg.euler_phi(N) == int(sympy.totient(N))


# -- field arithmetic

def test_i_squared():
    i = CycloNumber.root(4, F(1, 4))
    assert i * i == CycloNumber.root(4, F(1, 2)) == CycloNumber.const(-1, 4)


def test_cube_roots_sum_to_zero():
    z = CycloNumber.root(3, F(1, 3))
    assert (CycloNumber.const(1, 3) + z + z * z).is_zero()


def test_zeta12_order():
    assert CycloNumber.root(12, F(1, 12)) ** 12 == CycloNumber.const(1, 12)


def test_lift_preserves_value():
    z = CycloNumber.root(6, F(1, 6)) + CycloNumber.const(F(2, 3), 6)
    assert z.lift(24) == z
    assert abs(z.lift(24).to_complex() - z.to_complex()) < 1e-12


def test_json_roundtrip():
    z = CycloNumber.root(12, F(5, 12)) * F(3, 7) + 1
    assert CycloNumber.from_json(z.to_json()) == z


cyclo = st.builds(
    lambda N, cs: CycloNumber.from_terms(N, dict(enumerate(cs))),
    st.sampled_from([1, 2, 3, 4, 5, 6, 8, 12]),
    st.lists(st.fractions(-5, 5, max_denominator=4), min_size=1, max_size=6))


@given(cyclo, cyclo, cyclo)
def test_field_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == CycloNumber.const(0)


@given(cyclo)
def test_inverse(a):
    if a.is_zero():
        return
    assert a * a.inverse() == CycloNumber.const(1)


@given(cyclo, cyclo)
def test_complex_embedding_is_homomorphism(a, b):
    assert abs((a * b).to_complex() - a.to_complex() * b.to_complex()) < 1e-9
    assert abs((a + b).to_complex() - a.to_complex() - b.to_complex()) < 1e-9


# -- group algebra

def test_sigma_lin_example():
    a = AlgebraElem.monomial(qz("1/4"))
    assert exactalg.sigma_lin(QZ, 2, a) == AlgebraElem.monomial(qz("1/2"))


def test_sigma_lin_collects():
    a = AlgebraElem([(qz("1/6"), 1), (qz("2/3"), 1)])
    assert exactalg.sigma_lin(QZ, 2, a) == AlgebraElem.monomial(qz("1/3"), 2)


@pytest.mark.parametrize("d", all_data(), ids=str)
def test_sigma_one_is_identity(d):
    a = exactalg.random_algebra_elem(d, random.Random(1))
    assert exactalg.sigma_lin(d, 1, a) == a


def test_rho_lin_examples():
    assert exactalg.rho_lin(QZ, 2, AlgebraElem.monomial(qz("1/3"))) == \
        AlgebraElem([(qz("1/6"), 1), (qz("2/3"), 1)])
    assert exactalg.rho_lin(QZ, 3, AlgebraElem.monomial(qz(0))) == \
        AlgebraElem([(qz(0), 1), (qz("1/3"), 1), (qz("2/3"), 1)])


def test_rho_lin_not_in_image():
    with pytest.raises(NotInImage):
        exactalg.rho_lin(Datum("weil", 4), 2, AlgebraElem.monomial(WeilCycElem(qz(0), 1, 4)))


@pytest.mark.parametrize("d,n,s,factor", [
    (QZ, 4, qz("1/5"), 4),
    (Datum("weil_hat", 4), 2, WeilHatElem(qz(0), HalfIntQmod2Z(F(0)), 4), 4),
    (Datum("germ"), 9, GermElem(F(2, 3)), 1),
])
def test_sigma_rho_examples(d, n, s, factor):
    a = AlgebraElem.monomial(s)
    assert bcdata.alpha_of(d, n) == factor
    assert exactalg.check_sigma_rho(d, n, a)
    assert exactalg.sigma_lin(d, n, exactalg.rho_lin(d, n, a)) == a * factor


def test_rho_not_a_ring_map():
    a = AlgebraElem.monomial(qz("1/2"))
    lhs = exactalg.rho_lin(QZ, 2, a * a)
    rhs = exactalg.rho_lin(QZ, 2, a) * exactalg.rho_lin(QZ, 2, a)
    assert lhs != rhs


@pytest.mark.parametrize("d", all_data(), ids=str)
def test_sigma_rho_property(d):
    @given(st.lists(st.tuples(elements(d), st.fractions(-9, 9, max_denominator=6)), max_size=6),
           st.integers(1, 12))
    def prop(terms, n):
        a = AlgebraElem([(bcdata.sigma_apply(d, n, s), c) for s, c in terms])
        assert exactalg.check_sigma_rho(d, n, a)
    prop()


@pytest.mark.parametrize("d", all_data(), ids=str)
def test_sigma_is_ring_map(d):
    @given(st.lists(elements(d), max_size=4), st.lists(elements(d), max_size=4), st.integers(1, 8))
    def prop(xs, ys, n):
        a = AlgebraElem([(s, 1) for s in xs])
        b = AlgebraElem([(s, 2) for s in ys])
        assert exactalg.sigma_lin(d, n, a * b) == exactalg.sigma_lin(d, n, a) * exactalg.sigma_lin(d, n, b)
    prop()


@pytest.mark.parametrize("d", [x for x in all_data() if x.kind != "germ_alpha_one"], ids=str)
def test_galois_push_commutes_with_sigma(d):
    gal = bcdata.galois_group(d)

    @given(st.lists(elements(d), max_size=4), st.integers(1, 8), st.sampled_from(gal))
    def prop(xs, n, g):
        a = AlgebraElem([(s, 1) for s in xs])
        lhs = exactalg.galois_push(d, g, exactalg.sigma_lin(d, n, a))
        assert lhs == exactalg.sigma_lin(d, n, exactalg.galois_push(d, g, a))
    prop()


# -- zero-sum identity

def _zero_sum_complex(d, iota, n, m, s):
    """The same sum evaluated in floating point, straight from the definition.

    On the rank-two diagonal eps_{k,k} sees iota(s)^k, so the exponent is n.
    """
    e = (lambda k: k) if d.kind in ("weil_hat", "pair_switch", "rank_two") else (lambda k: bcdata.alpha_of(d, k))
    an, am = e(n), e(m)
    fib = bcdata.rho_fiber(d, n, s)
    total = sum(bcdata.iota_complex(d, iota, x) ** am for x in fib) / len(fib)
    want = bcdata.iota_complex(d, iota, s) ** (am // an) if am % an == 0 else 0
    return total, want


def test_zero_sum_examples():
    iota = bcdata.Embedding(12)
    assert exactalg.zero_sum_identity(QZ, iota, 2, 4, qz("1/3"))
    assert exactalg.zero_sum_identity(QZ, iota, 2, 3, qz("1/3"))
    total, want = _zero_sum_complex(QZ, iota, 2, 3, qz("1/3"))
    assert want == 0 and abs(total) < 1e-12
    for m in range(1, 7):
        assert exactalg.zero_sum_identity(QZ, iota, 1, m, qz("5/12"))


def test_zero_sum_sympy_oracle():
    # (1/2)(zeta_6^4 + zeta_3^4) computed symbolically
    z = sympy.exp(2 * sympy.pi * sympy.I * sympy.Rational(1, 6))
    w = sympy.exp(2 * sympy.pi * sympy.I * sympy.Rational(2, 3))
    lhs = sympy.nsimplify(sympy.expand_complex((z ** 4 + w ** 4) / 2))
    rhs = sympy.expand_complex(sympy.exp(2 * sympy.pi * sympy.I * sympy.Rational(2, 3)))
    assert sympy.simplify(lhs - rhs) == 0
    assert exactalg.zero_sum_identity(QZ, bcdata.Embedding(12), 2, 4, qz("1/3"))


@pytest.mark.parametrize("d", [Datum("qmodz"), Datum("weil", 4), Datum("weil_hat", 4),
                               Datum("pair_switch"), Datum("alg_num_model", generators=(2, 3))], ids=str)
def test_zero_sum_against_float(d):
    iota = bcdata.Embedding(720)
    rng = random.Random(7)
    for s in bcdata.sample_elements(d, 6, rng, level=12):
        for n in range(1, 5):
            t = bcdata.sigma_apply(d, n, s)
            for m in range(1, 5):
                assert exactalg.zero_sum_identity(d, iota, n, m, t)
                total, want = _zero_sum_complex(d, iota, n, m, t)
                assert abs(total - want) <= 1e-9 * max(1.0, abs(want))
