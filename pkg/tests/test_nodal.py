import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import ndimage

from nodalab.geometry import BoundaryData, boundary_angle
from nodalab.nodal import (
    check_local_zero_connectivity,
    check_nodal_count_bound,
    check_unique_continuation,
    default_tau,
    extract_nodal_decomposition,
    maximal_vanishing_set,
    nodal_lines_touch_boundary,
)
from nodalab.solver import ScalarField, solve_p_laplace

from conftest import disk, disk_solution, square


def field(dom, fn):
    return ScalarField.from_function(dom, fn)


def boundary_trace(dom, u):
    return BoundaryData(u.boundary_values)


class TestDecomposition:
    def test_zero_field(self):
        dom = square(1 / 16)
        d = extract_nodal_decomposition(dom, np.zeros(dom.shape), 0.0)
        assert d.counts == (0, 0)
        assert np.array_equal(d.zero, dom.interior)

    def test_sin2_solution(self):
        dom, _, u = disk_solution(2.0, 2)
        assert extract_nodal_decomposition(dom, u).counts == (2, 2)

    def test_coordinate_field(self):
        dom = square(1 / 16)
        X, _ = dom.xy
        d = extract_nodal_decomposition(dom, field(dom, lambda x, y: x - 0.5), 0.0)
        assert d.counts == (1, 1)
        assert np.array_equal(d.zero, dom.interior & np.isclose(X, 0.5))

    def test_default_tau(self):
        dom, _, u = disk_solution(2.0, 1)
        d = extract_nodal_decomposition(dom, u)
        assert d.tau == pytest.approx(1e-3 * np.nanmax(np.abs(u.values)))
        assert d.tau == default_tau(dom, u)

    def test_negative_tau(self):
        dom = square(1 / 16)
        with pytest.raises(ValueError):
            extract_nodal_decomposition(dom, np.zeros(dom.shape), -1.0)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            extract_nodal_decomposition(square(1 / 16), np.zeros((4, 4)), 0.0)

    def test_labels_are_signed_and_maximal(self):
        dom, _, u = disk_solution(3.0, 3)
        d = extract_nodal_decomposition(dom, u)
        for c in d.components:
            assert (d.labels[c.mask] == c.label).all()
            assert np.sign(c.label) == c.sign
            grown = ndimage.binary_dilation(c.mask, structure=ndimage.generate_binary_structure(2, 1))
            rim = grown & ~c.mask & dom.interior
            assert not (c.sign * u.values[rim] > d.tau).any()

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.0, 0.5))
    def test_completeness(self, seed, tau):
        dom = square(1 / 16)
        rng = np.random.default_rng(seed)
        vals = ndimage.gaussian_filter(rng.normal(size=dom.shape), 2.0)
        d = extract_nodal_decomposition(dom, vals, tau * np.abs(vals).max())
        total = d.zero.sum() + sum(c.size for c in d.components)
        assert total == dom.n_interior
        masks = [c.mask for c in d.components] + [d.zero]
        assert (np.sum(masks, axis=0) <= 1).all()

    @pytest.mark.parametrize("p,k", [(2.0, 2), (3.0, 3), (1.5, 2)])
    def test_threshold_nests_components(self, p, k):
        # each component at a larger tau sits inside exactly one component at a smaller tau
        dom, _, u = disk_solution(p, k)
        umax = np.nanmax(np.abs(u.values))
        decs = [extract_nodal_decomposition(dom, u, t * umax) for t in (1e-4, 1e-3, 1e-2, 1e-1)]
        for lo, hi in zip(decs, decs[1:]):
            assert not (lo.zero & ~hi.zero).any()
            for c in hi.components:
                owners = np.unique(lo.labels[c.mask])
                assert len(owners) == 1 and np.sign(owners[0]) == c.sign

    def test_counts_settle_at_moderate_tau(self):
        dom, _, u = disk_solution(3.0, 3)
        umax = np.nanmax(np.abs(u.values))
        counts = [extract_nodal_decomposition(dom, u, t * umax).counts for t in (1e-3, 1e-2, 1e-1)]
        assert counts == [(3, 3)] * 3

    def test_threshold_can_split_a_dumbbell(self):
        # raising tau cuts the low neck of a non-solution, so counts may grow
        dom = square(1 / 32)
        u = field(dom, lambda x, y: np.exp(-60 * ((x - 0.3) ** 2 + (y - 0.5) ** 2)) + np.exp(-60 * ((x - 0.7) ** 2 + (y - 0.5) ** 2)))
        assert extract_nodal_decomposition(dom, u, 0.05).counts[0] == 1
        assert extract_nodal_decomposition(dom, u, 0.5).counts[0] == 2

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_odd_symmetry(self, k):
        dom, _, u = disk_solution(2.0, k)
        vals = u.values
        assert np.allclose(vals[::-1], -vals, atol=1e-8, equal_nan=True)
        d = extract_nodal_decomposition(dom, u)
        pos = sorted(np.flatnonzero(c.mask[::-1]).tolist() for c in d.positive)
        neg = sorted(np.flatnonzero(c.mask).tolist() for c in d.negative)
        assert pos == neg


class TestSimplyConnected:
    def test_ring_is_flagged(self):
        dom = square(1 / 32)
        u = field(dom, lambda x, y: np.exp(-100 * (np.hypot(x - 0.5, y - 0.5) - 0.25) ** 2) - 0.5)
        d = extract_nodal_decomposition(dom, u, 0.0)
        ring = max(d.positive, key=lambda c: c.size)
        assert not ring.simply_connected

    def test_solutions_are_simply_connected(self):
        dom, _, u = disk_solution(3.0, 3)
        assert all(c.simply_connected for c in extract_nodal_decomposition(dom, u).components)


class TestNodalLines:
    def test_sin2_solution(self):
        dom, _, u = disk_solution(2.0, 2)
        verdicts = nodal_lines_touch_boundary(extract_nodal_decomposition(dom, u), dom)
        assert len(verdicts) == 4 and all(v.ok for v in verdicts)

    def test_island(self):
        dom = square(1 / 32)
        u = field(dom, lambda x, y: np.where(np.hypot(x - 0.5, y - 0.5) < 0.2, 1.0, -1.0))
        d = extract_nodal_decomposition(dom, u, 0.0)
        verdicts = {v.label: v for v in nodal_lines_touch_boundary(d, dom)}
        island = verdicts[d.positive[0].label]
        assert not island.ok
        assert np.hypot(island.witness[0] - 0.5, island.witness[1] - 0.5) < 0.25

    def test_coordinate_field(self):
        dom = square(1 / 16)
        d = extract_nodal_decomposition(dom, field(dom, lambda x, y: x - 0.5), 0.0)
        verdicts = nodal_lines_touch_boundary(d, dom)
        assert all(v.ok and v.pieces == 1 for v in verdicts)


class TestCountBound:
    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_sin_k(self, k):
        dom, g, u = disk_solution(2.0, k)
        v = check_nodal_count_bound(extract_nodal_decomposition(dom, u), g)
        assert v.ok and (v.n_positive, v.n_negative) == (k, k) and (v.n_maxima, v.n_minima) == (k, k)

    def test_constant_data(self):
        dom = disk(1 / 16)
        g = BoundaryData.constant(dom, 1.0)
        u = solve_p_laplace(dom, g, 2.0)
        v = check_nodal_count_bound(extract_nodal_decomposition(dom, u), g)
        assert v.ok and v.n_positive == 1 and (v.n_maxima, v.n_minima) == (1, 0)

    def test_sin_theta_p3(self):
        dom, g, u = disk_solution(3.0, 1)
        v = check_nodal_count_bound(extract_nodal_decomposition(dom, u), g)
        assert v.ok and (v.n_positive, v.n_negative) == (1, 1)

    def test_too_many_domains(self):
        dom = disk(1 / 32)
        g = BoundaryData(np.sin(boundary_angle(dom)))
        u = field(dom, lambda x, y: np.sin(3 * np.arctan2(y, x)) * np.hypot(x, y))
        v = check_nodal_count_bound(extract_nodal_decomposition(dom, u), g)
        assert not v.ok


class TestVanishingSet:
    def test_zero_field(self):
        dom = square(1 / 16)
        D = maximal_vanishing_set(dom, np.zeros(dom.shape), 0.0)
        assert np.array_equal(D.mask, dom.interior)
        edt = ndimage.distance_transform_edt(dom.interior) * dom.h
        assert np.allclose(D.radii[dom.interior], edt[dom.interior])

    def test_thin_zero_line(self):
        dom = square(1 / 16)
        assert maximal_vanishing_set(dom, field(dom, lambda x, y: x - 0.5), 1e-9) is None

    def test_dead_core(self):
        dom = square(1 / 32)
        X, _ = dom.xy
        u = field(dom, lambda x, y: np.maximum(x - 0.5, 0.0) ** 2)
        D = maximal_vanishing_set(dom, u, 0.0)
        assert D is not None and D.open
        assert (X[D.mask] <= 0.5 + 1e-12).all()
        core = dom.interior & (X <= 0.5)
        core = ndimage.binary_erosion(core, iterations=2, border_value=0)
        assert core[D.mask].sum() == core.sum()

    def test_negative_tau(self):
        dom = square(1 / 16)
        with pytest.raises(ValueError):
            maximal_vanishing_set(dom, np.zeros(dom.shape), -1.0)


class TestUniqueContinuation:
    def test_zero_solution(self):
        dom = square(1 / 16)
        g = BoundaryData.constant(dom, 0.0)
        u = solve_p_laplace(dom, g, 3.0)
        v = check_unique_continuation(dom, u, g, 0.0)
        assert v.ok and v.branch == "vanishes identically"

    def test_sin_theta(self):
        dom, g, u = disk_solution(2.0, 1)
        v = check_unique_continuation(dom, u, g, 1e-6)
        assert v.ok and v.branch == "no open vanishing set"

    def test_dead_core_flagged(self):
        dom = square(1 / 32)
        u = field(dom, lambda x, y: np.maximum(x - 0.5, 0.0) ** 2)
        v = check_unique_continuation(dom, u, boundary_trace(dom, u), 1e-9)
        assert not v.ok and v.vanishing_size > 0
        assert v.h == dom.h and v.tau == 1e-9


class TestZeroConnectivity:
    def test_line(self):
        dom = square(1 / 32)
        z = check_local_zero_connectivity(dom, field(dom, lambda x, y: x - 0.5), (0.5, 0.5), [0.1, 0.2, 0.3], 1e-9)
        assert all(z.connected) and z.r_x == 0.3

    def test_saddle(self):
        dom = disk(1 / 32)
        z = check_local_zero_connectivity(dom, field(dom, lambda x, y: x * y), (0.0, 0.0), [0.1, 0.25, 0.5], 1e-9)
        assert all(z.connected)

    def test_parallel_lines(self):
        dom = square(1 / 32)
        a = 0.125
        u = field(dom, lambda x, y: (x - 0.5) ** 2 - a**2)
        z = check_local_zero_connectivity(dom, u, (0.5, 0.5), [0.0625, 0.25], 1e-9)
        assert z.connected == [True, False]
        assert z.components == [0, 2]
        assert z.r_x == 0.0625

    def test_ball_must_fit(self):
        dom = square(1 / 32)
        with pytest.raises(ValueError):
            check_local_zero_connectivity(dom, np.zeros(dom.shape), (0.1, 0.5), [0.2], 0.0)
