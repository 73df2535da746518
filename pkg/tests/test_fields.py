import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import constants as sc

from mwtrap import _kernels, fields, txline
from mwtrap.errors import DomainError, OptimizationError, SingularityError
from mwtrap.fields import TwoWireModel, WireLayout, WireSegment, bfield_at, two_wire_field
from oracles import CA43_MASS, lamb_dicke_direct, quad_segment_field, scan_minimum, two_wire_bpar, v_slope

MU0 = sc.mu_0


def random_layout(rng, n=5, scale=1e-4):
    segs = []
    for _ in range(n):
        a = rng.normal(size=3) * scale
        b = a + rng.normal(size=3) * scale
        segs.append(WireSegment(tuple(a), tuple(b), complex(rng.normal(), rng.normal())))
    return WireLayout(segs)


def mirror_layout(half_sep=15e-6, length=1e-3, current=1.3 - 0.4j):
    """Two anti-parallel wires at x = -+L with equal |current|."""
    return WireLayout([
        WireSegment((-half_sep, 0, length), (-half_sep, 0, -length), current),
        WireSegment((half_sep, 0, -length), (half_sep, 0, length), current),
    ])


class TestSegments:
    def test_degenerate(self):
        with pytest.raises(DomainError):
            WireSegment((0, 0, 0), (0, 0, 0), 1)

    def test_nonfinite_current(self):
        with pytest.raises(DomainError):
            WireSegment((0, 0, 0), (1, 0, 0), complex(math.nan, 0))

    def test_empty_layout(self):
        with pytest.raises(DomainError):
            WireLayout([])

    def test_power_positive(self):
        with pytest.raises(DomainError):
            WireLayout([WireSegment((0, 0, 0), (1, 0, 0))], power_watts=0)

    def test_dict_roundtrip(self):
        lay = random_layout(np.random.default_rng(1))
        assert WireLayout.from_dict(lay.to_dict()) == lay


class TestBiotSavart:
    def test_infinite_wire_limit(self):
        r = 10e-6
        h = 1e4 * r
        lay = WireLayout([WireSegment((0, 0, -h), (0, 0, h), 2.5)])
        b = bfield_at(lay, [[r, 0, 0]]).b[0]
        ref = MU0 * 2.5 / (2 * math.pi * r)
        assert abs(np.linalg.norm(b) / ref - 1) < 1e-7

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_quadrature(self, seed):
        rng = np.random.default_rng(seed)
        a, b = rng.normal(size=3) * 1e-4, rng.normal(size=3) * 1e-4
        p = rng.normal(size=3) * 1e-4
        cur = complex(rng.normal(), rng.normal())
        got = bfield_at(WireLayout([WireSegment(tuple(a), tuple(b), cur)]), [p]).b[0]
        ref = quad_segment_field(p, a, b, cur.real) + 1j * quad_segment_field(p, a, b, cur.imag)
        assert np.allclose(got, ref, rtol=1e-9, atol=1e-9 * np.abs(ref).max())

    def test_symmetric_null_exact(self):
        lay = mirror_layout(current=1.0)
        b = bfield_at(lay, [[0.0, 40e-6, 0.0]]).b[0]
        assert b[0] == 0

    def test_doubling(self):
        lay = random_layout(np.random.default_rng(2))
        pts = np.random.default_rng(3).normal(size=(20, 3)) * 1e-4
        assert np.array_equal(bfield_at(lay.scaled(2), pts).b, 2 * bfield_at(lay, pts).b)

    # components are kept away from the subnormal range, where scaling is lossy
    parts = st.one_of(st.just(0.0), st.floats(1e-100, 1e3), st.floats(-1e3, -1e-100))

    @given(parts, parts, st.integers(0, 1000))
    def test_linearity(self, re, im, seed):
        alpha = complex(re, im)
        rng = np.random.default_rng(seed)
        lay = random_layout(rng)
        pts = rng.normal(size=(8, 3)) * 1e-4
        base = bfield_at(lay, pts).b
        got = bfield_at(lay.scaled(alpha), pts).b
        assert np.allclose(got, alpha * base, rtol=1e-13, atol=1e-13 * np.abs(alpha * base).max())

    @given(st.integers(0, 1000))
    def test_superposition(self, seed):
        rng = np.random.default_rng(seed)
        lay = random_layout(rng, n=6)
        pts = rng.normal(size=(8, 3)) * 1e-4
        total = bfield_at(lay, pts).b
        parts = sum(bfield_at(WireLayout([s]), pts).b for s in lay.segments)
        assert np.allclose(total, parts, rtol=1e-13, atol=1e-15 * np.abs(total).max())

    @given(st.floats(0.0, 30e-6), st.floats(10e-6, 80e-6), st.floats(-50e-6, 50e-6))
    def test_mirror_symmetry_odd(self, x, y, z):
        lay = mirror_layout()
        f = bfield_at(lay, [[x, y, z], [-x, y, z]])
        bpar = f.b_par
        peak = np.abs(bfield_at(lay, fields.transect_grid(y, (-60e-6, 60e-6), 241, z)).b_par).max()
        assert abs(bpar[0] + bpar[1]) < 1e-12 * peak

    def test_on_wire(self):
        lay = mirror_layout()
        with pytest.raises(SingularityError) as info:
            bfield_at(lay, [[0, 1e-5, 0], [15e-6, 0, 1e-4]])
        assert info.value.point_index == 1 and info.value.segment_index == 1

    def test_power_normalisation(self):
        lay = replace(mirror_layout(), power_watts=4.0)
        pts = [[1e-6, 40e-6, 0]]
        assert np.allclose(bfield_at(lay, pts, normalize_to=1.0).b, bfield_at(lay, pts).b / 2)

    def test_field_map_accessors(self):
        fm = bfield_at(mirror_layout(), fields.transect_grid(40e-6, n=11))
        s = fm[3]
        assert s.b_par == fm.b_par[3]
        assert s.b_perp == pytest.approx(fm.b_perp[3])
        assert len(list(fm)) == 11 and len(fm[2:5]) == 3
        assert np.all(fm.b_perp >= 0)

    def test_shapes(self):
        with pytest.raises(DomainError):
            bfield_at(mirror_layout(), np.zeros((4, 2)))


class TestBackends:
    @pytest.mark.skipif(not _kernels.NUMBA_AVAILABLE, reason="numba missing")
    def test_numba_matches_numpy(self):
        rng = np.random.default_rng(7)
        lay = random_layout(rng, n=9)
        pts = rng.normal(size=(5000, 3)) * 1e-4
        a = bfield_at(lay, pts, backend="numba").b
        b = bfield_at(lay, pts, backend="numpy").b
        assert np.allclose(a, b, rtol=1e-12, atol=1e-14 * np.abs(b).max())

    @pytest.mark.skipif(not _kernels.NUMBA_AVAILABLE, reason="numba missing")
    def test_parallel_bit_identical_to_sequential(self):
        # each point sums segments in the same order, so chunking cannot matter
        rng = np.random.default_rng(8)
        lay = random_layout(rng, n=9)
        pts = rng.normal(size=(3000, 3)) * 1e-4
        whole = bfield_at(lay, pts, backend="numba").b
        pieces = np.concatenate([bfield_at(lay, pts[i:i + 7], backend="numba").b
                                 for i in range(0, 3000, 7)])
        assert np.array_equal(whole, pieces)

    def test_set_backend(self):
        old = _kernels.get_backend()
        try:
            _kernels.set_backend("numpy")
            assert _kernels.get_backend() == "numpy"
            with pytest.raises(ValueError):
                _kernels.set_backend("fortran")
        finally:
            _kernels.set_backend(old)


class TestTwoWire:
    def test_layout_matches_closed_form(self):
        m = TwoWireModel()
        x = np.linspace(-10e-6, 10e-6, 9)
        pts = np.column_stack([x, np.full_like(x, m.ion_height), np.zeros_like(x)])
        lay = m.to_layout(half_length=1e4 * m.ion_height)
        assert np.allclose(bfield_at(lay, pts).b_par, two_wire_field(m, x), rtol=1e-6)

    def test_matches_oracle_formula(self):
        x = np.linspace(-5e-6, 10e-6, 31)
        for q in (math.inf, 10.0):
            m = TwoWireModel(q_tot=q)
            assert np.allclose(two_wire_field(m, x), two_wire_bpar(x, q_tot=q), rtol=1e-12)

    def test_symmetric_currents_zero(self):
        m = TwoWireModel(u1=-0.03, u2=-0.03, q_tot=7.0)
        assert two_wire_field(m, 0.0) == 0

    def test_validation(self):
        with pytest.raises(DomainError):
            TwoWireModel(u1=0.1)
        with pytest.raises(DomainError):
            TwoWireModel(ion_height=0)

    def test_lossless_null(self):
        m = TwoWireModel()
        res = fields.find_field_minimum(lambda x: two_wire_field(m, x), (-5e-6, 10e-6))
        x_scan, _, xs, mag = scan_minimum(two_wire_bpar)
        assert abs(res.x0 - x_scan) <= 1e-9
        assert res.x0 == pytest.approx(1.7e-6, abs=0.05e-6)
        assert res.b_min < 1e-12 * mag.max()
        assert not res.non_unimodal

    def test_lossy_minimum(self):
        res = fields.find_field_minimum(lambda x: two_wire_field(TwoWireModel(q_tot=10), x),
                                        (-5e-6, 10e-6))
        x_scan, b_scan, _, _ = scan_minimum(lambda x: two_wire_bpar(x, q_tot=10))
        assert res.b_min > 0
        assert abs(res.x0 - x_scan) <= 1e-9
        # the scan grid is 1 nm, so golden section can only do better
        assert res.b_min <= b_scan
        assert res.b_min == pytest.approx(b_scan, rel=1e-5)

    @given(st.floats(10, 1e4))
    def test_loss_broadens_without_moving(self, q):
        lossless = fields.find_field_minimum(lambda x: two_wire_field(TwoWireModel(), x),
                                             (-5e-6, 10e-6))
        lossy = fields.find_field_minimum(lambda x: two_wire_field(TwoWireModel(q_tot=q), x),
                                          (-5e-6, 10e-6))
        assert lossy.b_min > 0
        assert lossless.b_min < 1e-12 * abs(two_wire_field(TwoWireModel(), -5e-6))
        assert abs(lossy.x0 - lossless.x0) < 0.3e-6

    def test_gradient_matches_scan_slope(self):
        m = TwoWireModel()
        res = fields.find_field_minimum(lambda x: two_wire_field(m, x), (-5e-6, 10e-6))
        g = fields.field_gradient(lambda x: two_wire_field(m, x), res.x0)
        x0, _, xs, mag = scan_minimum(two_wire_bpar)
        slope = v_slope(xs, mag, int(np.argmin(mag)))
        assert abs(g) == pytest.approx(slope, rel=1e-3)


class TestMinimumFinder:
    def test_constructed_v(self):
        res = fields.find_field_minimum(lambda x: abs(x - 3e-6), (-10e-6, 10e-6))
        assert res.x0 == pytest.approx(3e-6, abs=0.5e-9)
        assert res.b_min == pytest.approx(0, abs=0.5e-9)

    def test_symmetric_model(self):
        m = TwoWireModel(u1=-0.03, u2=-0.03)
        res = fields.find_field_minimum(lambda x: two_wire_field(m, x), (-5e-6, 5e-6))
        assert res.x0 == pytest.approx(0, abs=0.5e-9)

    def test_sampled_input(self):
        x = np.linspace(-5e-6, 5e-6, 1001)
        res = fields.find_field_minimum((x, np.abs(x - 1e-6)), (-5e-6, 5e-6))
        assert res.x0 == pytest.approx(1e-6, abs=1e-9)

    def test_non_unimodal_flag(self):
        res = fields.find_field_minimum(lambda x: math.cos(x * 1e6) + 2, (-10e-6, 10e-6))
        assert res.non_unimodal

    def test_bad_interval(self):
        with pytest.raises(DomainError):
            fields.find_field_minimum(abs, (1.0, 1.0))


class TestGradient:
    def test_linear(self):
        assert fields.field_gradient(lambda x: 39.4 * x + 1e-4, 2e-6) == pytest.approx(39.4, rel=1e-9)

    def test_complex_linear(self):
        g = fields.field_gradient(lambda x: (3 - 2j) * x, 1e-5)
        assert g == pytest.approx(3 - 2j, rel=1e-9)

    def test_constant(self):
        assert fields.field_gradient(lambda x: 5e-5 + 0j, 1e-6) == 0


class TestLambDicke:
    def test_measured_values(self):
        eta = fields.lamb_dicke(39.4, 223.4e-6, CA43_MASS, 5.5e6)
        assert eta == pytest.approx(lamb_dicke_direct(39.4, 223.4e-6, CA43_MASS, 5.5e6), rel=1e-12)
        assert eta == pytest.approx(8.1e-4, abs=0.1e-4)

    def test_simulated_values(self):
        eta = fields.lamb_dicke(72, 108e-6, CA43_MASS, 5.5e6)
        assert eta == pytest.approx(lamb_dicke_direct(72, 108e-6, CA43_MASS, 5.5e6), rel=1e-12)
        assert eta == pytest.approx(3.1e-3, abs=0.05e-3)

    def test_halving(self):
        a = fields.lamb_dicke(39.4, 223.4e-6, CA43_MASS, 5.5e6)
        assert fields.lamb_dicke(39.4, 2 * 223.4e-6, CA43_MASS, 5.5e6) == pytest.approx(a / 2)

    @given(st.floats(1e-3, 1e3))
    def test_power_scaling_invariant(self, p):
        s = math.sqrt(p)
        a = fields.lamb_dicke(39.4, 223.4e-6, CA43_MASS, 5.5e6)
        assert fields.lamb_dicke(39.4 * s, 223.4e-6 * s, CA43_MASS, 5.5e6) == pytest.approx(a, rel=1e-13)

    def test_domain(self):
        with pytest.raises(DomainError):
            fields.lamb_dicke(0, 1e-4, CA43_MASS, 5e6)


class TestGrids:
    def test_transect(self):
        g = fields.transect_grid(40e-6, (-1e-6, 1e-6), 5)
        assert g.shape == (5, 3) and np.all(g[:, 1] == 40e-6)

    def test_plane_x_fastest(self):
        g = fields.plane_grid(40e-6, (-1, 1), (-2, 2), nx=3, nz=2)
        assert g[:3, 0].tolist() == [-1, 0, 1] and np.all(g[:3, 2] == -2)


class TestOptimizer:
    def test_gradient_prefers_low_ion(self):
        res = fields.optimize_geometry(TwoWireModel(), "gradient", {"ion_height": (20e-6, 80e-6)})
        assert res.params["ion_height"] == pytest.approx(20e-6, rel=1e-3)
        assert res.status == "bound-limited"

    def test_value_beats_seeds(self):
        res = fields.optimize_geometry(TwoWireModel(q_tot=10), "gradient",
                                       {"ion_height": (20e-6, 80e-6), "half_separation": (5e-6, 40e-6)})
        assert len(res.seed_values) == 5
        assert all(res.value >= v for v in res.seed_values)

    def test_amplitude_is_minimised(self):
        res = fields.optimize_geometry(TwoWireModel(q_tot=10), "amplitude", {"u2": (-0.1, -0.03)},
                                       eval_x=0.0)
        assert all(res.value <= v for v in res.seed_values)

    def test_symmetric_ratio_unbounded(self):
        res = fields.optimize_geometry(TwoWireModel(u1=-0.03, u2=-0.03), "ratio",
                                       {"half_separation": (5e-6, 30e-6)})
        assert res.unbounded and res.status == "unbounded"
        assert res.bound_limited == ["half_separation"]

    def test_layout_template(self):
        def build(p):
            return TwoWireModel(ion_height=40e-6, half_separation=p["half_separation"]).to_layout()

        res = fields.optimize_geometry(build, "gradient", {"half_separation": (5e-6, 40e-6)},
                                       eval_point=(0.0, 40e-6, 0.0), maxiter=60)
        assert 5e-6 <= res.params["half_separation"] <= 40e-6
        assert all(res.value >= v for v in res.seed_values)

    def test_nan_objective_raises(self):
        # a wire along x has no x field anywhere, so the ratio is 0/0
        def build(p):
            return WireLayout([WireSegment((-1, 0, p["z"]), (1, 0, p["z"]), 1.0)])

        with pytest.raises(OptimizationError) as info:
            fields.optimize_geometry(build, "ratio", {"z": (0.0, 1e-3)},
                                     eval_point=(0.0, 1e-4, 0.0), maxiter=5)
        assert set(info.value.params) == {"z"}

    def test_bounds_validation(self):
        with pytest.raises(DomainError):
            fields.optimize_geometry(TwoWireModel(), "gradient", {"ion_height": (1, math.inf)})
        with pytest.raises(DomainError):
            fields.optimize_geometry(TwoWireModel(), "speed", {"ion_height": (1, 2)})
