from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lemniscate.braids import (
    BraidWord,
    LemniscateSpec,
    braid_permutation,
    braid_word,
    lemniscate_strands,
    rotating_braid_word,
    rotating_strands,
)
from lemniscate.cyclotomic import SemiholoPolynomial
from lemniscate.errors import (
    CurvesTooClose,
    DegenerateLeading,
    OddRepeats,
    VerificationError,
    WrongRootCount,
)
from lemniscate.fields import (
    HopfionSpec,
    brauner_polynomial,
    build_field,
    hopfion_field,
    milnor_polynomial,
)
from lemniscate.knot_polynomials import burau_of_word
from lemniscate.verify import (
    NodalCurve,
    arg_gradient,
    certify_spec,
    find_crossings,
    find_roots,
    fibration_scan,
    gauss_linking,
    hopf_charge,
    lambda_threshold_search,
    recover_braid_word,
    roots_batch,
    sphere_samples,
    target_point,
    trace_preimage,
    track_braid,
    verify_milnor_sphere,
    verify_nodal_on_sphere,
)

TREFOIL = SemiholoPolynomial({(2, 0, 0): 1, (0, 3, 0): -1})
FIG8 = LemniscateSpec(3, 2, 2)


def circle(center, normal_axis, radius=1.0, n=400):
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    a, b = [i for i in range(3) if i != normal_axis]
    p = np.zeros((n, 3))
    p[:, a] = radius * np.cos(t)
    p[:, b] = radius * np.sin(t)
    return NodalCurve(p + np.asarray(center, dtype=float), True, 0.0)


class TestRoots:
    def test_examples(self):
        assert np.allclose(sorted(find_roots([-1, 0, 1]), key=lambda z: z.real), [-1, 1])
        assert np.allclose(sorted(find_roots([1, 0, 1]), key=lambda z: z.imag), [-1j, 1j])

    def test_fig8_at_zero(self):
        cf = build_field(FIG8).compile()
        got = find_roots(cf.u_coefficients(np.array(1.0 + 0j)))
        want = [z(0.0) for z in lemniscate_strands(FIG8)]
        assert max(min(abs(g - w) for g in got) for w in want) < 1e-12

    @settings(max_examples=30)
    @given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), min_size=1, max_size=6))
    def test_recovers_chosen_roots(self, roots):
        roots = np.array(roots)
        coeffs = np.poly(roots)[::-1]
        got = find_roots(coeffs)
        assert np.max(np.abs(np.polyval(coeffs[::-1], got))) < 1e-8 * max(1, np.max(np.abs(roots)) ** len(roots))

    def test_degenerate_leading(self):
        with pytest.raises(DegenerateLeading):
            roots_batch(np.array([[1.0, 2.0, 0.0]]))


class TestTracking:
    def test_torus_residual(self):
        spec = LemniscateSpec(2, 3, 1)
        track = track_braid(build_field(spec), 1, 1024, strands=lemniscate_strands(spec))
        assert track.match_residual < 1e-9
        assert track.components == 1

    @pytest.mark.parametrize("spec", [(3, 2, 2), (4, 2, 3), (6, 3, 1), (3, 3, 2), (5, 4, 3)])
    def test_monodromy_cycles(self, spec):
        spec = LemniscateSpec(*spec)
        track = track_braid(build_field(spec), float(spec.lam), 1024)
        assert track.components == braid_permutation(braid_word(spec))[1]

    @pytest.mark.parametrize(
        "spec, word",
        [((3, 2, 2), [-1, 2, -1, 2]), ((2, 3, 1), [1, 1, 1]), ((4, 2, 3), [1, 3, -2, 1, 3, -2])],
    )
    def test_recovered_words(self, spec, word):
        spec = LemniscateSpec(*spec)
        track = track_braid(build_field(spec), float(spec.lam), 2048)
        assert recover_braid_word(track).to_signed() == word
        assert len(find_crossings(track)) == len(word)

    def test_mirror_word(self):
        spec = FIG8.with_(b=-FIG8.b)
        word = recover_braid_word(track_braid(build_field(spec), 1, 2048))
        assert word == braid_word(FIG8).mirror()

    @pytest.mark.parametrize("n", [1, -1, 2])
    def test_rotating_braid(self, n):
        strands = rotating_strands(FIG8, n)
        word = recover_braid_word(track_braid(build_field(strands), 1, 4096))
        assert burau_of_word(word) == burau_of_word(rotating_braid_word(FIG8, n))


class TestNodal:
    def test_fig8_certificate(self):
        cert = certify_spec(FIG8, steps=2048)
        assert cert.passed and cert.components == 1
        assert cert.word.to_signed() == [-1, 2, -1, 2]
        assert cert.min_du > 1e-6 and cert.min_dg > 1e-9
        pts = np.vstack([c.points4 for c in cert.curves])
        assert np.allclose(np.linalg.norm(pts, axis=1), 1, atol=1e-9)
        assert max(c.residual for c in cert.curves) < 1e-8

    def test_two_component_link(self):
        cert = certify_spec(LemniscateSpec(4, 2, 3), steps=2048)
        assert cert.passed and cert.components == 2 and len(cert.curves) == 2

    def test_large_lambda_fails(self):
        try:
            cert = verify_nodal_on_sphere(build_field(FIG8), 100, 1024, expected=braid_word(FIG8))
        except VerificationError:
            return
        assert not cert.passed

    def test_lambda_search(self):
        res = lambda_threshold_search(FIG8, steps=512, resolution=0.05)
        assert res.lam_star >= 1 and any(not p for _, p in res.tested)


class TestFibration:
    def test_samples_on_sphere(self):
        x = sphere_samples(1000, seed=1)
        assert x.shape == (1000, 4) and np.allclose(np.linalg.norm(x, axis=1), 1)

    def test_gradient_matches_finite_differences(self):
        cf = build_field(FIG8).compile()
        x = sphere_samples(32, seed=5)
        g = arg_gradient(cf, x)

        def phase(p):
            return np.angle(cf(p[..., 0] + 1j * p[..., 1], p[..., 2] + 1j * p[..., 3]))

        eps = 1e-6
        for i in range(len(x)):
            for t in np.linalg.svd(x[i : i + 1])[2][1:]:
                d = np.angle(np.exp(1j * (phase(x[i] + eps * t) - phase(x[i] - eps * t)))) / (2 * eps)
                assert abs(d - g[i] @ t) <= 1e-5 * max(1.0, abs(d))

    def test_trefoil(self):
        rep = fibration_scan(TREFOIL, samples=20_000)
        assert rep.margin_positive and rep.to_dict()["marginPositive"]

    def test_fig8(self):
        assert fibration_scan(build_field(FIG8), samples=20_000).margin_positive

    def test_constant(self):
        rep = fibration_scan(SemiholoPolynomial({(0, 0, 0): 1}), samples=1000)
        assert rep.min_grad_norm == 0 and not rep.margin_positive


class TestMilnor:
    @pytest.mark.parametrize("rho", [0.1, 0.01])
    def test_fig8(self, rho):
        F = milnor_polynomial(build_field(FIG8), FIG8)
        cert = verify_milnor_sphere(F, rho, expected=braid_word(FIG8))
        assert cert.passed and cert.word.to_signed() == [-1, 2, -1, 2]

    def test_brauner(self):
        cert = verify_milnor_sphere(brauner_polynomial(2, 3), 0.5)
        assert cert.word.to_signed() == [1, 1, 1] and cert.passed

    def test_odd_repeats(self):
        spec = LemniscateSpec(3, 3, 2)
        with pytest.raises(OddRepeats):
            milnor_polynomial(build_field(spec), spec)


class TestLinking:
    def test_unlinked(self):
        assert gauss_linking(circle((0, 0, 0), 2), circle((5, 0, 0), 2)).linking_number == 0

    def test_hopf_link(self):
        res = gauss_linking(circle((0, 0, 0), 2), circle((1, 0, 0), 1))
        assert abs(res.linking_number) == 1 and abs(abs(res.raw) - 1) < 1e-9

    def test_orientation_flips_sign(self):
        a, b = circle((0, 0, 0), 2), circle((1, 0, 0), 1)
        rev = NodalCurve(b.points4[::-1].copy(), True, 0.0)
        assert gauss_linking(a, rev).linking_number == -gauss_linking(a, b).linking_number

    def test_too_close(self):
        with pytest.raises(CurvesTooClose):
            gauss_linking(circle((0, 0, 0), 2, n=20), circle((0, 0, 0.05), 2, n=20))


class TestHopfion:
    U = SemiholoPolynomial({(1, 0, 0): 1})

    def test_planar_ring(self):
        field = hopfion_field(HopfionSpec(self.U, 1))
        curves = trace_preimage(field, (0, 0, -1), grid=48, half_width=4.0)
        assert len(curves) == 1
        p = curves[0].points4
        assert np.allclose(p[:, 2], 0, atol=1e-6)
        r = np.linalg.norm(p[:, :2], axis=1)
        assert np.ptp(r) < 1e-6

    @pytest.mark.parametrize("f, N, q", [({(1, 0, 0): 1}, 1, 1), ({(3, 0, 0): 1}, 1, 3), ({(2, 0, 0): 1}, 2, 4)])
    def test_rational_map_charges(self, f, N, q):
        field = hopfion_field(HopfionSpec(SemiholoPolynomial(f), N))
        res = hopf_charge(field, grid=48, half_width=4.0)
        assert res.charge == q and abs(res.raw - q) < 0.1

    def test_lemniscate_charge(self):
        field = hopfion_field(HopfionSpec(build_field(FIG8), 1))
        res = hopf_charge(field, grid=64, half_width=5.0)
        assert res.charge == res.predicted == 3

    def test_zero_charge(self):
        assert hopf_charge(hopfion_field(HopfionSpec(self.U, 0))).charge == 0

    def test_target_point(self):
        assert np.allclose(target_point(0), (0, 0, 1))
        assert np.allclose(target_point(1), (1, 0, 0))
