"""Chebyshev grids, barycentric interpolation, Clenshaw-Curtis weights."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ksgreen.cheb import (
    bary_weights,
    chebyshev_nodes,
    clenshaw_curtis_row,
    interpolation_matrix,
)
from ksgreen.errors import KsgreenError


class TestChebyshevNodes:
    def test_n2_canonical(self):
        g = chebyshev_nodes(2)
        assert np.array_equal(g.nodes, [1.0, 0.0, -1.0])

    def test_n4_canonical(self):
        g = chebyshev_nodes(4)
        s = np.sqrt(2.0) / 2.0
        assert np.allclose(g.nodes, [1.0, s, 0.0, -s, -1.0], rtol=0, atol=1e-15)
        assert g.nodes[0] == 1.0 and g.nodes[4] == -1.0 and g.nodes[2] == 0.0

    def test_n2_left_subinterval(self):
        g = chebyshev_nodes(2, (-1.0, 0.0))
        assert np.array_equal(g.nodes, [0.0, -0.5, -1.0])

    def test_matches_cosine_formula(self):
        n = 17
        g = chebyshev_nodes(n)
        ref = np.cos(np.arange(n + 1) * np.pi / n)
        assert np.allclose(g.nodes, ref, rtol=0, atol=1e-15)

    def test_endpoints_exact_on_mapped_interval(self):
        g = chebyshev_nodes(9, (0.3, 0.7))
        assert g.nodes[0] == 0.7 and g.nodes[9] == 0.3

    def test_node_symmetry_exact(self):
        for n in (2, 5, 16, 33):
            g = chebyshev_nodes(n)
            assert np.array_equal(g.nodes, -g.nodes[::-1])

    def test_descending_order(self):
        g = chebyshev_nodes(12, (-2.0, 5.0))
        assert np.all(np.diff(g.nodes) < 0)

    def test_bary_weight_pattern(self):
        w = bary_weights(5)
        assert np.array_equal(w, [0.5, -1.0, 1.0, -1.0, 1.0, -0.5])
        w = bary_weights(4)
        assert np.array_equal(w, [0.5, -1.0, 1.0, -1.0, 0.5])

    def test_invalid_arguments(self):
        with pytest.raises(KsgreenError):
            chebyshev_nodes(0)
        with pytest.raises(KsgreenError):
            chebyshev_nodes(4, (1.0, 1.0))
        with pytest.raises(KsgreenError):
            chebyshev_nodes(4, (2.0, -1.0))


class TestInterpolationMatrix:
    def test_identity_on_source_nodes(self):
        g = chebyshev_nodes(10)
        mat = interpolation_matrix(g, g.nodes)
        assert np.array_equal(mat.entries, np.eye(11))

    def test_polynomial_exactness_to_subgrid(self):
        g = chebyshev_nodes(16)
        sub = chebyshev_nodes(8, (-1.0, 0.25))
        p = np.polynomial.Polynomial([1.0, 0.0, -3.0, 0.0, 0.0, 1.0])
        mat = interpolation_matrix(g, sub.nodes)
        got = mat.entries @ p(g.nodes)
        assert np.max(np.abs(got - p(sub.nodes))) < 1e-13

    def test_row_sums_one(self):
        g = chebyshev_nodes(20)
        rng = np.random.default_rng(1)
        targets = rng.uniform(-1.0, 1.0, 64)
        mat = interpolation_matrix(g, targets)
        assert np.max(np.abs(mat.entries.sum(axis=1) - 1.0)) < 1e-12

    def test_target_outside_interval_rejected(self):
        g = chebyshev_nodes(8)
        with pytest.raises(KsgreenError):
            interpolation_matrix(g, [1.5])

    def test_snap_gives_unit_row(self):
        g = chebyshev_nodes(8)
        shifted = g.nodes[3] + 5e-14
        mat = interpolation_matrix(g, [shifted], snap_tol=1e-13)
        row = np.zeros(9)
        row[3] = 1.0
        assert np.array_equal(mat.entries[0], row)

    def test_no_snap_when_outside_tolerance(self):
        g = chebyshev_nodes(8)
        shifted = g.nodes[3] + 1e-8
        mat = interpolation_matrix(g, [shifted], snap_tol=1e-13)
        assert not np.array_equal(mat.entries[0], np.eye(9)[3])
        assert abs(mat.entries[0].sum() - 1.0) < 1e-12

    @settings(max_examples=30, deadline=None)
    @given(
        n=st.integers(min_value=3, max_value=24),
        seed=st.integers(min_value=0, max_value=2**31),
    )
    def test_interpolates_random_polynomials_exactly(self, n, seed):
        rng = np.random.default_rng(seed)
        coeffs = rng.uniform(-1.0, 1.0, n + 1)
        p = np.polynomial.Polynomial(coeffs)
        g = chebyshev_nodes(n)
        targets = rng.uniform(-1.0, 1.0, 16)
        mat = interpolation_matrix(g, targets)
        assert np.max(np.abs(mat.entries @ p(g.nodes) - p(targets))) < 1e-11


class TestClenshawCurtis:
    def test_constant_function(self):
        for m in (1, 2, 7, 8, 33, 64):
            row = clenshaw_curtis_row(m, 2.0)
            assert abs(row.weights.sum() - 2.0) < 1e-13 * m

    def test_scaled_interval_length(self):
        row = clenshaw_curtis_row(16, 0.3)
        assert abs(row.weights.sum() - 0.3) < 1e-14

    def test_m2_weights(self):
        row = clenshaw_curtis_row(2, 2.0)
        assert np.allclose(row.weights, [1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0],
                           rtol=0, atol=1e-15)

    def test_x_squared_exact(self):
        g = chebyshev_nodes(8)
        row = clenshaw_curtis_row(8, 2.0)
        assert abs(row.weights @ g.nodes**2 - 2.0 / 3.0) < 1e-14

    def test_polynomial_degree_m_exact(self):
        m = 7
        g = chebyshev_nodes(m)
        rng = np.random.default_rng(5)
        coeffs = rng.uniform(-1.0, 1.0, m + 1)
        p = np.polynomial.Polynomial(coeffs)
        exact = p.integ()(1.0) - p.integ()(-1.0)
        row = clenshaw_curtis_row(m, 2.0)
        assert abs(row.weights @ p(g.nodes) - exact) < 1e-13

    def test_analytic_integrand_vs_composite_oracle(self):
        # oracle: composite midpoint rule at 10^6 panels
        f = lambda x: 1.0 / (1.0 + np.sin(np.pi * x) ** 2)
        xs = np.linspace(-1.0, 1.0, 2_000_001)
        mid = 0.5 * (xs[:-1] + xs[1:])
        ref = f(mid).sum() * (xs[1] - xs[0])
        g = chebyshev_nodes(64)
        row = clenshaw_curtis_row(64, 2.0)
        got = row.weights @ f(g.nodes)
        assert abs(got - ref) / abs(ref) < 1e-10

    def test_m_zero_rejected(self):
        with pytest.raises(KsgreenError):
            clenshaw_curtis_row(0, 1.0)
        with pytest.raises(KsgreenError):
            clenshaw_curtis_row(8, 0.0)

    def test_over_resolution_stability(self):
        # integrating via a finer sub-grid reproduces the direct result
        n = 24
        g = chebyshev_nodes(n)
        f = np.exp(g.nodes) * np.cos(2.0 * g.nodes)
        direct = clenshaw_curtis_row(n, 2.0).weights @ f
        for m in (n + 1, 2 * n, 3 * n):
            sub = chebyshev_nodes(m)
            mat = interpolation_matrix(g, sub.nodes)
            via = clenshaw_curtis_row(m, 2.0).weights @ (mat.entries @ f)
            assert abs(via - direct) < 1e-12
