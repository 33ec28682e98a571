"""Fuchsian side-pairing groups: generators, circles, traces, sampling."""
from __future__ import annotations

import cmath
import dataclasses
import math

import numpy as np
import pytest

from punctorus.closedform import (
    LENGTH_THRESHOLD,
    quad_cr_cdf,
    sample_length_values,
)
from punctorus.hypgeom import MoebiusMap, cross_ratio
from punctorus.torusgroup import (
    angle_relation,
    commutator,
    commutator_trace_general,
    compose,
    inverse,
    isometric_circle,
    nonrectangular_pair,
    quad_cross_ratio_from_group,
    rectangular_generators,
    sample_torus,
    tangency_vertices,
)


def as_mat(m: MoebiusMap) -> np.ndarray:
    return np.array([[m.a, m.b], [m.c, m.d]], dtype=complex)


def tr(m: MoebiusMap) -> complex:
    return m.a + m.d


class TestRectangularPair:
    def test_printed_entries(self):
        pair = rectangular_generators(2.0)
        qa = math.sqrt(0.25 + 1.0)
        np.testing.assert_allclose(
            as_mat(pair.A), [[qa, 0.5], [0.5, qa]], rtol=1e-15)
        qb = math.sqrt(4.0 + 1.0)
        np.testing.assert_allclose(
            as_mat(pair.B), [[qb, 2.0j], [-2.0j, qb]], rtol=1e-15)

    def test_fixed_points(self):
        pair = rectangular_generators(0.7)
        for z in (1.0, -1.0):
            assert pair.A(z).as_complex() == pytest.approx(z, abs=1e-14)
        for z in (1.0j, -1.0j):
            assert pair.B(z).as_complex() == pytest.approx(z, abs=1e-14)

    @pytest.mark.parametrize("r", [1.0, 2.0, 0.37, 11.0])
    def test_commutator_is_parabolic(self, r):
        pair = rectangular_generators(r)
        com = commutator(pair.A, pair.B)
        assert complex(tr(com)) == pytest.approx(-2.0, abs=1e-12)

    def test_circle_geometry(self):
        pair = rectangular_generators(1.6)
        ca, ca_inv, cb, cb_inv = pair.circles()
        root = math.sqrt(1.6**2 + 1.0)
        assert ca.center.as_complex() == pytest.approx(-root, abs=1e-14)
        assert ca_inv.center.as_complex() == pytest.approx(root, abs=1e-14)
        assert ca.radius == pytest.approx(1.6, rel=1e-14)
        for c in (ca, ca_inv, cb, cb_inv):
            mod2 = abs(c.center.as_complex()) ** 2
            assert mod2 == pytest.approx(1.0 + c.radius**2, rel=1e-12)

    def test_isometric_circle_rejects_affine(self):
        with pytest.raises(ValueError):
            isometric_circle(MoebiusMap(2.0, 1.0, 0.0, 0.5))


class TestQuadCrossRatio:
    def test_known_radii(self):
        assert quad_cross_ratio_from_group(rectangular_generators(1.0)) == \
            pytest.approx(2.0, rel=1e-15)
        assert quad_cross_ratio_from_group(rectangular_generators(2.0)) == \
            pytest.approx(5.0, rel=1e-15)

    @pytest.mark.parametrize("r", [0.5, 1.0, 3.0])
    def test_vertex_recomputation(self, r):
        pair = rectangular_generators(r)
        verts = tangency_vertices(pair)
        raw = cross_ratio(*verts).value
        assert complex(raw).real == pytest.approx(1.0 + r * r, abs=1e-10)
        assert abs(complex(raw).imag) < 1e-10

    def test_nontangent_rejected(self):
        pair = rectangular_generators(1.5)
        broken = dataclasses.replace(pair, s=1.5)
        with pytest.raises(ValueError):
            tangency_vertices(broken)
        with pytest.raises(ValueError):
            quad_cross_ratio_from_group(broken)


class TestNonrectangularPair:
    def test_zero_twist_degenerates(self):
        r = 1.9
        pair = rectangular_generators(r)
        u, v = nonrectangular_pair(r, 0.0)
        np.testing.assert_allclose(as_mat(u), as_mat(pair.B), atol=1e-12)
        np.testing.assert_allclose(as_mat(v), as_mat(pair.A), atol=1e-12)

    def test_trace_displays(self):
        u, v = nonrectangular_pair(1.0, 1.0)
        assert complex(tr(u) ** 2 - 4).real == pytest.approx(12.0, rel=1e-12)
        assert complex(tr(v) ** 2 - 4).real == pytest.approx(12.0, rel=1e-12)
        rng = np.random.default_rng(2)
        for _ in range(25):
            r = math.exp(rng.uniform(-2, 2))
            lam = math.exp(rng.uniform(-2, 2))
            u, v = nonrectangular_pair(r, lam)
            want_u = 4.0 * (r * r + 1.0) * (lam * lam + 1.0) - 4.0
            want_v = 4.0 * (1.0 / r**2 + 1.0) * (lam * lam + 1.0) - 4.0
            assert complex(tr(u) ** 2 - 4).real == pytest.approx(want_u, rel=1e-11)
            assert complex(tr(v) ** 2 - 4).real == pytest.approx(want_v, rel=1e-11)

    def test_unit_determinants(self):
        u, v = nonrectangular_pair(0.45, 2.2)
        assert complex(u.det()) == pytest.approx(1.0, abs=1e-13)
        assert complex(v.det()) == pytest.approx(1.0, abs=1e-13)

    def test_fixed_points_antipodal_on_circle(self):
        for r, lam in ((1.3, 0.6), (0.2, 3.0), (5.0, 0.01)):
            u, _ = nonrectangular_pair(r, lam)
            z = cmath.sqrt(u.b / u.c)
            for zf in (z, -z):
                assert abs(abs(zf) - 1.0) < 1e-10
                assert u(zf).as_complex() == pytest.approx(zf, abs=1e-10)

    def test_composition_route(self):
        """u and v factor through half-translation conjugation.

        Conjugating the opposite-type sheared generator (twist 1/lam)
        by the half-translation along the other generator's axis
        reproduces the closed-form matrices; note the maps swap type,
        matching the zero-twist degeneration.
        """

        def sqf(r):
            d = 1.0 / math.sqrt(r * math.sqrt(r * r + 1.0) - r * r)
            o = math.sqrt(math.sqrt(1.0 / r**2 + 1.0) - 1.0)
            return np.array([[d, o], [o, d]]) / math.sqrt(2.0)

        def sqg(s):
            d = 1.0 / math.sqrt(s * (math.sqrt(s * s + 1.0) - s))
            o = math.sqrt(math.sqrt(1.0 / s**2 + 1.0) - 1.0)
            return np.array([[d, 1j * o], [-1j * o, d]]) / math.sqrt(2.0)

        def sheared_a(t):
            d = math.sqrt(1.0 / t**2 + 1.0)
            return np.array([[d, 1.0 / t], [1.0 / t, d]])

        def sheared_b(t):
            d = math.sqrt(1.0 / t**2 + 1.0)
            return np.array([[d, 1j / t], [-1j / t, d]])

        rng = np.random.default_rng(8)
        for _ in range(50):
            r = math.exp(rng.uniform(math.log(0.1), math.log(10.0)))
            lam = math.exp(rng.uniform(math.log(0.05), math.log(8.0)))
            u, v = nonrectangular_pair(r, lam)
            sf, sg = sqf(r), sqg(1.0 / r)
            np.testing.assert_allclose(sg @ sheared_a(1.0 / lam) @ sg,
                                       as_mat(u), atol=2e-11)
            np.testing.assert_allclose(sf @ sheared_b(1.0 / lam) @ sf,
                                       as_mat(v), atol=2e-11)


class TestGeneralCommutator:
    def test_parabolic_iff_equal_twists(self):
        assert commutator_trace_general(1.0, 1.0, 0.8) == pytest.approx(-4.0,
                                                                        rel=1e-14)
        assert commutator_trace_general(3.0, 3.0, 2.0) == pytest.approx(-4.0,
                                                                        rel=1e-14)
        assert commutator_trace_general(1.0, 2.0, 0.8) != pytest.approx(-4.0,
                                                                        abs=0.1)

    def test_matrix_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            r = math.exp(rng.uniform(-2.0, 2.0))
            lam = math.exp(rng.uniform(-1.5, 1.5))
            mu = math.exp(rng.uniform(-1.5, 1.5))
            u, _ = nonrectangular_pair(r, 1.0 / lam)
            _, v = nonrectangular_pair(r, 1.0 / mu)
            got = complex(tr(commutator(u, v))) - 2.0
            want = commutator_trace_general(lam, mu, r)
            assert got.real == pytest.approx(want, rel=1e-9, abs=1e-9)
            assert abs(got.imag) < 1e-9

    def test_r_independence(self):
        vals = [commutator_trace_general(1.0, 2.0, r) for r in (0.3, 1.0, 7.0)]
        assert vals[0] == vals[1] == vals[2]

    def test_zero_twist_rejected(self):
        with pytest.raises(ValueError):
            commutator_trace_general(0.0, 1.0, 1.0)

    def test_parabolicity_sweep(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            r = math.exp(rng.uniform(-2.5, 2.5))
            pair = rectangular_generators(r)
            assert abs(complex(tr(commutator(pair.A, pair.B))) + 2.0) < 2e-9
            lam = math.exp(rng.uniform(-2.0, 2.0))
            u, v = nonrectangular_pair(r, lam)
            assert abs(complex(tr(commutator(u, v))) + 2.0) < 2e-9


class TestComposeInverse:
    def test_inverse_roundtrip(self):
        m = MoebiusMap(3.0 + 1j, 2.0, 1.0 - 0.5j, 1.0)
        ident = compose(m, inverse(m))
        z = 0.3 + 0.2j
        assert ident(z).as_complex() == pytest.approx(z, abs=1e-12)

    def test_compose_matches_matrix_product(self):
        f = MoebiusMap(1.0, 2.0, 0.25, 1.0)
        g = MoebiusMap(0.0, 1.0, -1.0, 0.3)
        z = 1.7 - 0.4j
        assert compose(f, g)(z).as_complex() == pytest.approx(
            f(g(z).as_complex()).as_complex(), abs=1e-12)


class TestAngleRelation:
    def test_threshold_square_case(self):
        ell = 2.0 * math.asinh(1.0)
        rel = angle_relation(ell, ell)
        assert rel.theta == pytest.approx(math.pi / 2, rel=1e-12)
        assert rel.quad_cr == pytest.approx(2.0, rel=1e-12)

    def test_direct_evaluation(self):
        rel = angle_relation(3.0, 3.0)
        assert rel.theta == pytest.approx(math.asin(1.0 / math.sinh(1.5) ** 2),
                                          rel=1e-12)
        assert rel.quad_cr == pytest.approx(2.0, rel=1e-12)

    def test_equal_lengths_give_cr_two(self):
        assert angle_relation(2.0, 2.0).quad_cr == pytest.approx(2.0, rel=1e-14)

    def test_short_lengths_cannot_close(self):
        with pytest.raises(ValueError):
            angle_relation(0.5, 0.5)
        with pytest.raises(ValueError):
            angle_relation(-1.0, 2.0)


class TestSampleTorus:
    def test_invariant_and_ranges(self):
        rng = np.random.default_rng(12)
        for _ in range(300):
            s = sample_torus(rng)
            assert s.x_sigma > 0 and s.y_sigma > 0
            assert 0.0 < s.theta <= math.pi / 2
            closure = (math.sin(s.theta) * math.sinh(0.5 * s.x_sigma)
                       * math.sinh(0.5 * s.y_sigma))
            assert closure == pytest.approx(1.0, rel=1e-12)

    def test_deterministic_under_seed(self):
        a = sample_torus(77)
        b = sample_torus(77)
        assert (a.x_sigma, a.y_sigma, a.theta) == (b.x_sigma, b.y_sigma, b.theta)

    def test_short_branch_pushforward_is_quad_law(self):
        # the sampling mechanism: on the short branch the squared
        # coth of the half-length has exactly the quadrilateral law
        x = sample_length_values(1 << 18, np.random.default_rng(31))
        short = x[x <= LENGTH_THRESHOLD]
        q = np.sort(1.0 / np.tanh(0.5 * short) ** 2)
        f = np.asarray(quad_cr_cdf(np.maximum(q, 2.0)))
        n = len(q)
        d = np.max(np.abs(f - (np.arange(1, n + 1) - 0.5) / n))
        assert d < 0.005

    def test_short_branch_median(self):
        x = sample_length_values(1 << 18, np.random.default_rng(32))
        short = x[x <= LENGTH_THRESHOLD]
        assert np.median(short) == pytest.approx(0.99929, abs=0.01)
