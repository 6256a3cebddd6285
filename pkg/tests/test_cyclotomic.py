from __future__ import annotations

import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lemniscate.cyclotomic import (
    CyclotomicElement,
    ExpLaurentPoly,
    GaussianRational,
    SemiholoPolynomial,
    UPolynomial,
    cyclo_mul,
    cyclo_to_gaussian,
    cyclotomic_polynomial,
    integerize,
    to_semiholo,
    totient,
    trig_term,
)
from lemniscate.errors import NonIntegerExponent, NotGaussian, OrderMismatch

Z = CyclotomicElement.zeta


def value(x: CyclotomicElement) -> complex:
    """Independent float oracle: evaluate the power basis at exp(2 pi i / N)."""
    w = cmath.exp(2j * math.pi / x.order)
    return sum(c * w**k for k, c in enumerate(x.nums)) / x.den


small = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@st.composite
def elements(draw, order=12):
    d = totient(order)
    nums = draw(st.lists(st.integers(-6, 6), min_size=d, max_size=d))
    den = draw(st.integers(1, 5))
    return CyclotomicElement(order, nums, den)


class TestCyclotomicPolynomial:
    def test_small_orders(self):
        assert cyclotomic_polynomial(1) == (-1, 1)
        assert cyclotomic_polynomial(4) == (1, 0, 1)
        assert cyclotomic_polynomial(12) == (1, 0, -1, 0, 1)

    @pytest.mark.parametrize("n", [3, 5, 8, 12, 20, 36, 60])
    def test_degree_and_roots(self, n):
        phi = cyclotomic_polynomial(n)
        assert len(phi) - 1 == totient(n)
        w = cmath.exp(2j * math.pi / n)
        assert abs(sum(c * w**k for k, c in enumerate(phi))) < 1e-9


class TestMultiplication:
    def test_i_squared(self):
        assert cyclo_mul(Z(4), Z(4)) == CyclotomicElement.from_rational(4, -1)

    def test_half_turn(self):
        one = CyclotomicElement.from_rational(12, 1)
        assert cyclo_mul(Z(12, 6), one) == CyclotomicElement.from_rational(12, -1)

    def test_difference_of_squares(self):
        one = CyclotomicElement.from_rational(12, 1)
        got = cyclo_mul(one + Z(12), one - Z(12))
        assert got == one - Z(12, 2)
        assert abs(value(got) - (1 - cmath.exp(1j * math.pi / 3))) < 1e-12

    def test_order_mismatch(self):
        with pytest.raises(OrderMismatch):
            cyclo_mul(Z(4), Z(12))

    @given(elements(), elements(), elements())
    def test_field_laws(self, x, y, z):
        assert x * y == y * x
        assert (x * y) * z == x * (y * z)
        assert x * (y + z) == x * y + x * z
        assert (x + y) - y == x

    @given(elements(), elements())
    def test_product_matches_float_oracle(self, x, y):
        assert abs(value(x * y) - value(x) * value(y)) < 1e-9 * (1 + abs(value(x)) * abs(value(y)))

    @given(elements(20))
    def test_conjugate_is_complex_conjugate(self, x):
        assert abs(value(x.conjugate()) - value(x).conjugate()) < 1e-9


class TestGaussian:
    def test_zeta4_is_i(self):
        assert cyclo_to_gaussian(Z(4)) == GaussianRational(0, 1)

    def test_two_cos(self):
        assert cyclo_to_gaussian(Z(12, 2) + Z(12, -2)) == GaussianRational(1, 0)

    def test_not_gaussian(self):
        with pytest.raises(NotGaussian):
            cyclo_to_gaussian(Z(12))

    @given(small, small, st.sampled_from([4, 8, 12, 20, 24, 60]))
    def test_round_trip(self, p, q, order):
        g = GaussianRational(p, q)
        assert cyclo_to_gaussian(CyclotomicElement.from_gaussian(order, g)) == g

    @given(small, small, small, small)
    def test_gaussian_division(self, a, b, c, d):
        x = GaussianRational(a, b)
        y = GaussianRational(c, d)
        if y:
            assert (x / y) * y == x


class TestTrigTerm:
    def test_cos_h(self):
        t = trig_term("cos", 1, 1)
        assert set(t.terms) == {1, -1}
        assert all(cyclo_to_gaussian(c) == GaussianRational(Fraction(1, 2)) for c in t.terms.values())

    def test_sin_with_phase(self):
        t = trig_term("sin", Fraction(1, 2), 2, 3, Fraction(1, 3), order=12)
        assert t.denom == 3 and set(t.terms) == {2, -2}
        h = np.random.default_rng(1).uniform(0, 2 * np.pi, 20)
        want = 0.5 * np.sin((2 * h + 2 * np.pi) / 3)
        assert np.max(np.abs(t(h) - want)) < 1e-12

    def test_constant(self):
        t = trig_term("cos", Fraction(3, 7), 0)
        assert set(t.terms) == {0}
        assert cyclo_to_gaussian(t.terms[0]) == GaussianRational(Fraction(3, 7))

    @given(
        st.sampled_from(["cos", "sin", "exp"]),
        small,
        st.integers(-6, 6),
        st.integers(1, 5),
        st.fractions(min_value=0, max_value=1, max_denominator=6),
    )
    def test_numeric_agreement(self, kind, amp, num, den, phase):
        t = trig_term(kind, amp, num, den, phase, order=120)
        h = np.linspace(0, 2 * np.pi, 9)
        arg = num * h / den + 2 * np.pi * float(phase)
        ref = {"cos": np.cos, "sin": np.sin, "exp": lambda x: np.exp(1j * x)}[kind](arg)
        assert np.max(np.abs(t(h) - float(amp) * ref)) < 1e-9


class TestLaurent:
    def test_identity(self):
        p = trig_term("cos", 2, 1, 3, order=12)
        one = ExpLaurentPoly.constant(1, 12, 3)
        assert p * one == p

    def test_phases_cancel(self):
        a = trig_term("exp", 1, 1, 3, Fraction(1, 3), order=12)
        b = trig_term("exp", 1, -1, 3, Fraction(2, 3), order=12)
        prod = a * b
        assert set(prod.terms) == {0}
        assert cyclo_to_gaussian(prod.terms[0]) == GaussianRational(1)

    def test_torus_pair(self):
        root = trig_term("exp", 1, 1, 2, order=4)
        p = UPolynomial.linear_factor(root) * UPolynomial.linear_factor(-root)
        f = to_semiholo(p)
        assert f == SemiholoPolynomial({(2, 0, 0): 1, (0, 1, 0): -1})

    def test_fractional_exponent_rejected(self):
        root = trig_term("exp", 1, 1, 2, order=4)
        with pytest.raises(NonIntegerExponent):
            to_semiholo(UPolynomial.linear_factor(root))

    def test_constant_passes_through(self):
        f = to_semiholo(UPolynomial([ExpLaurentPoly.constant(5, 4)]))
        assert f == SemiholoPolynomial({(0, 0, 0): 5})

    def test_non_gaussian_coefficient(self):
        bad = ExpLaurentPoly(1, 12, {1: Z(12)})
        with pytest.raises(NotGaussian):
            to_semiholo(UPolynomial([bad, ExpLaurentPoly.constant(1, 12)]))


class TestSemiholo:
    def test_no_mixed_terms(self):
        with pytest.raises(ValueError):
            SemiholoPolynomial({(0, 1, 1): 1})

    @given(st.dictionaries(
        st.tuples(st.integers(0, 4), st.integers(0, 3), st.just(0)) | st.tuples(st.integers(0, 4), st.just(0), st.integers(0, 3)),
        st.builds(GaussianRational, small, small),
        max_size=8,
    ))
    def test_json_round_trip(self, terms):
        f = SemiholoPolynomial(terms)
        assert SemiholoPolynomial.from_json(f.to_json()) == f
        keys = [(r["eu"], r["ev"], r["evb"]) for r in f.to_records()]
        assert keys == sorted(keys, reverse=True)

    @given(st.dictionaries(
        st.tuples(st.integers(0, 3), st.integers(0, 2), st.just(0)),
        st.builds(GaussianRational, small, small),
        min_size=1, max_size=6,
    ))
    def test_integerize(self, terms):
        f = SemiholoPolynomial(terms)
        g, clearing = integerize(f)
        assert clearing > 0
        assert g == f.scale(clearing)
        assert all(c.re.denominator == 1 and c.im.denominator == 1 for c in g.terms.values())

    def test_evaluate_partials(self):
        f = SemiholoPolynomial({(2, 1, 0): GaussianRational(1, 2), (1, 0, 2): -3, (0, 0, 0): 1})
        cf = f.compile()
        u, v = 0.3 + 0.2j, -0.4 + 0.7j
        val, fu, fv, fvb = cf.evaluate(u, v)
        assert val == pytest.approx((1 + 2j) * u**2 * v - 3 * u * np.conj(v) ** 2 + 1)
        eps = 1e-6
        du = (cf(u + eps, v) - cf(u - eps, v)) / (2 * eps)
        assert fu == pytest.approx(du, rel=1e-6)
        # Wirtinger: df/dx = fv + fvb, df/dy = i (fv - fvb)
        dx = (cf(u, v + eps) - cf(u, v - eps)) / (2 * eps)
        dy = (cf(u, v + 1j * eps) - cf(u, v - 1j * eps)) / (2 * eps)
        assert fv + fvb == pytest.approx(dx, rel=1e-6)
        assert 1j * (fv - fvb) == pytest.approx(dy, rel=1e-6)

    def test_stretch(self):
        f = SemiholoPolynomial({(2, 0, 0): 1, (1, 1, 0): 1, (0, 0, 0): 1})
        g = f.stretch(Fraction(1, 2))
        assert g.coefficient(2) == GaussianRational(1)
        assert g.coefficient(1, 1) == GaussianRational(Fraction(1, 2))
        assert g.coefficient(0) == GaussianRational(Fraction(1, 4))

    def test_ratio(self):
        f = SemiholoPolynomial({(1, 0, 0): 2, (0, 1, 0): 4})
        assert f.is_ratio_of(f.scale(Fraction(1, 2))) == 2
        assert f.is_ratio_of(f.scale(-1)) is None
