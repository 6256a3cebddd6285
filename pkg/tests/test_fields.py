from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from lemniscate.braids import LemniscateSpec, lemniscate_strands, trefoil_cable_strands
from lemniscate.cyclotomic import SemiholoPolynomial, integerize
from lemniscate.errors import InvalidSpec, OddRepeats
from lemniscate.fields import (
    HopfionSpec,
    braid_polynomial,
    brauner_polynomial,
    build_field,
    equivariant_point,
    fig8hopf_denominator,
    hopfion_field,
    hopfion_grid,
    inverse_stereographic,
    milnor_polynomial,
    preset_field,
    preset_hopfion,
    preset_spec,
    reference_cable,
    reference_f4l3,
    reference_f5,
    reference_fig8,
    stereographic_point,
    stereographic_substitute,
    substitute_v_power,
)

U = SemiholoPolynomial({(1, 0, 0): 1})
V = SemiholoPolynomial({(0, 1, 0): 1})
TREFOIL = SemiholoPolynomial({(2, 0, 0): 1, (0, 3, 0): -1})


@st.composite
def small_specs(draw):
    s = draw(st.integers(2, 7))
    l = draw(st.integers(1, min(3, s - 1)))
    assume(math.gcd(s, l) == 1)
    return LemniscateSpec(s, draw(st.integers(1, 4)), l)


def root_product(f: SemiholoPolynomial, spec: LemniscateSpec, h: np.ndarray) -> float:
    """Largest |f(Z_j(h), e^{ih})| over the strands, relative to the leading coefficient."""
    g = f.compile()
    lead = abs(complex(f.coefficient(f.degree_u)))
    return max(float(np.max(np.abs(g(z(h), np.exp(1j * h))))) for z in lemniscate_strands(spec)) / lead


class TestReferenceForms:
    def test_fig8(self):
        g, c = integerize(build_field(LemniscateSpec(3, 2, 2)))
        assert c == 64 and g == reference_fig8(2)

    @pytest.mark.parametrize("r", [1, 2, 3])
    def test_three_lobes(self, r):
        g, c = integerize(preset_field("f4r3", r))
        assert c == 20736 and g == reference_f4l3(r)

    def test_cable(self):
        g, c = integerize(preset_field("cable-13n4587"))
        assert c == 256 and g == reference_cable()

    @pytest.mark.parametrize("r", [1, 2, 3])
    def test_five_strand_sign(self, r):
        spec = LemniscateSpec(5, r, 2)
        g, c = integerize(build_field(spec))
        assert c == 1024
        fixed = reference_f5(r) + SemiholoPolynomial({(1, 0, r): 400})
        assert g == fixed
        h = np.linspace(0, 2 * np.pi, 101)
        assert root_product(g, spec, h) < 1e-9
        assert root_product(reference_f5(r), spec, h) > 1e-2


class TestConstruction:
    def test_torus_polynomial(self):
        p = braid_polynomial(lemniscate_strands(LemniscateSpec(2, 3, 1)))
        assert p.degree == 2
        h = np.linspace(0, 4, 9)
        assert np.allclose(p(0.3 + 0.1j, h), (0.3 + 0.1j) ** 2 - np.exp(3j * h))
        assert build_field(LemniscateSpec(2, 3, 1)) == TREFOIL

    def test_single_zero_strand(self):
        zero = lemniscate_strands(LemniscateSpec(2, 1, 1))[0].scaled(0)
        assert build_field([zero]) == U

    @settings(max_examples=25)
    @given(small_specs())
    def test_degree_laws(self, spec):
        f = build_field(spec)
        assert f.degree_u == spec.s
        assert f.degree_v == spec.r * spec.l

    @settings(max_examples=20)
    @given(small_specs(), st.sampled_from([Fraction(1, 2), Fraction(2, 3), Fraction(3)]))
    def test_stretch(self, spec, lam):
        assert build_field(spec, lam) == build_field(spec).stretch(lam)

    @settings(max_examples=20)
    @given(small_specs(), st.integers(0, 2**32 - 1))
    def test_matches_root_product(self, spec, seed):
        rng = np.random.default_rng(seed)
        u = rng.normal(size=100) + 1j * rng.normal(size=100)
        h = rng.uniform(0, 2 * np.pi, 100)
        got = build_field(spec).compile()(u, np.exp(1j * h))
        want = np.ones(100, dtype=complex)
        for z in lemniscate_strands(spec):
            want *= u - z(h)
        assert np.max(np.abs(got - want)) < 1e-9 * max(1.0, np.max(np.abs(want)))

    def test_integerize(self):
        f = SemiholoPolynomial({(3, 0, 0): 1, (0, 0, 0): Fraction(-3, 4)})
        g, c = integerize(f)
        assert c == 4 and g == SemiholoPolynomial({(3, 0, 0): 4, (0, 0, 0): -3})
        assert integerize(TREFOIL) == (TREFOIL, 1)

    def test_v_power(self):
        assert substitute_v_power(TREFOIL, 2) == SemiholoPolynomial({(2, 0, 0): 1, (0, 6, 0): -1})

    def test_presets(self):
        assert preset_spec("cable-13n4587") is None
        assert preset_spec("borromean").components == 3
        with pytest.raises(InvalidSpec):
            preset_spec("nope")

    def test_wirtinger_partials(self):
        f = reference_fig8().compile()
        rng = np.random.default_rng(3)
        u = rng.normal(size=20) + 1j * rng.normal(size=20)
        v = rng.normal(size=20) + 1j * rng.normal(size=20)
        val, fu, fv, fvb = f.evaluate(u, v)
        e = 1e-6
        du = (f(u + e, v) - f(u - e, v)) / (2 * e)
        dx = (f(u, v + e) - f(u, v - e)) / (2 * e)
        dy = (f(u, v + 1j * e) - f(u, v - 1j * e)) / (2 * e)
        assert np.allclose(du, fu, rtol=1e-6)
        assert np.allclose((dx - 1j * dy) / 2, fv, rtol=1e-6, atol=1e-6)
        assert np.allclose((dx + 1j * dy) / 2, fvb, rtol=1e-6, atol=1e-6)

    def test_evaluate_examples(self):
        val, fu, _, _ = TREFOIL.compile().evaluate(1.0, 1.0)
        assert abs(val) < 1e-15 and abs(fu - 2) < 1e-15
        z1 = lemniscate_strands(LemniscateSpec(3, 2, 2))[0](0.0)
        assert abs(reference_fig8().compile()(z1, 1.0)) < 1e-10


class TestStereographic:
    @given(st.tuples(*[st.floats(-5, 5)] * 3))
    def test_round_trip(self, p):
        u, v = stereographic_point(*p)
        assert abs(abs(u) ** 2 + abs(v) ** 2 - 1) < 1e-12
        assert np.allclose(inverse_stereographic(u, v), p, atol=1e-8)

    def test_simple_substitutions(self):
        su = stereographic_substitute(U)
        assert su.denominator_power == 1
        assert su.integer_terms == {(2, 0, 0): (1, 0), (0, 2, 0): (1, 0), (0, 0, 2): (1, 0), (0, 0, 0): (-1, 0), (0, 0, 1): (0, 2)}
        sv = stereographic_substitute(V)
        assert sv.integer_terms == {(1, 0, 0): (2, 0), (0, 1, 0): (0, 2)}

    def test_trefoil_numerator(self):
        sp = stereographic_substitute(TREFOIL)
        rng = np.random.default_rng(0)
        x, y, z = rng.normal(size=(3, 50))
        u, v = stereographic_point(x, y, z)
        den = (x * x + y * y + z * z + 1) ** sp.denominator_power
        assert np.allclose(sp(x, y, z), TREFOIL.compile()(u, v) * den)
        d = sp.to_dict()
        assert d["clearing"] == 1 and d["denominator_power"] == 3


class TestMilnor:
    def test_fig8_polynomial(self):
        F = milnor_polynomial(build_field(LemniscateSpec(3, 2, 2)), LemniscateSpec(3, 2, 2))
        c = F.compiled()
        val, grad = c.evaluate(np.zeros(4))
        assert val == 0 and np.all(grad == 0)
        x = np.random.default_rng(1).normal(size=(10, 4))
        u, v = x[:, 0] + 1j * x[:, 1], x[:, 2] + 1j * x[:, 3]
        assert np.allclose(c(x), F.evaluate_complex_form(u, v))

    def test_odd_repeats(self):
        spec = LemniscateSpec(3, 3, 2)
        with pytest.raises(OddRepeats):
            milnor_polynomial(build_field(spec), spec)

    def test_brauner(self):
        F = brauner_polynomial(2, 3)
        x = np.array([[0.5, 0.2, -0.3, 0.7]])
        u, v = 0.5 + 0.2j, -0.3 + 0.7j
        assert np.allclose(F.compiled()(x), u**2 - v**3)


class TestHopfion:
    def test_vacuum_at_infinity(self):
        field = hopfion_field(preset_hopfion("fig8", N=1))
        phi = field(np.array([[1e4, 0, 0], [0, 0, -1e4]]))
        assert np.allclose(phi, [[0, 0, 1], [0, 0, 1]], atol=1e-6)

    def test_center_maps_to_minus_one(self):
        u, v = equivariant_point(np.zeros((1, 3)))
        assert np.allclose(u, -1) and np.allclose(v, 0)

    def test_pole_convention(self):
        spec = HopfionSpec(U, 1)
        field = hopfion_field(spec)
        # in the xy-plane where d(r) = pi/2 we have u = 0 and |v| = 1
        r0 = -math.log(math.tan(math.pi / 8))
        assert np.allclose(field(np.array([[r0, 0.0, 0.0]]))[0], [0, 0, -1], atol=1e-9)

    def test_unit_length_and_grid(self):
        field = hopfion_field(preset_hopfion("fig8hopf-paper", N=2))
        grid = hopfion_grid(field, 6, 3.0)
        assert grid.shape == (216, 6)
        assert np.allclose(np.linalg.norm(grid[:, 3:], axis=1), 1)

    def test_presets(self):
        spec = preset_hopfion("fig8hopf-paper", r=2, N=2)
        assert spec.numerator_constant == 64 and spec.f == fig8hopf_denominator(2)
        assert spec.predicted_charge == 6
        assert HopfionSpec(build_field(LemniscateSpec(3, 2, 2)), 1).predicted_charge == 3
        with pytest.raises(InvalidSpec):
            HopfionSpec(U, -1)

    def test_cable_strand_count(self):
        assert len(trefoil_cable_strands()) == 4
