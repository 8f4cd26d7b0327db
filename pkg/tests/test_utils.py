import numpy as np
import pytest

from uclab.errors import QuadratureError
from uclab.utils.quadrature import (
    gauss_legendre_panels,
    log_panel_sums,
    log_total,
    periodic_trapezoid,
    refine_log_integrals,
)
from uclab.utils.sampling import chunks, parallel_map, stream


class TestQuadrature:
    def test_gauss_legendre_polynomial(self):
        """Panels integrate polynomials exactly"""
        nodes, weights = gauss_legendre_panels(0.0, 2.0, 4)
        assert np.sum(weights * nodes ** 5) == pytest.approx(64 / 6, rel=1e-13)

    def test_periodic_trapezoid(self):
        """Trigonometric polynomials integrate exactly"""
        angles, weights = periodic_trapezoid(16)
        assert np.sum(weights * np.cos(angles) ** 2) == pytest.approx(np.pi, rel=1e-13)

    def test_log_space_sum(self):
        """Log-space reduction handles values far below underflow"""
        nodes, weights = gauss_legendre_panels(0.0, 1.0, 2)
        total = log_total(log_panel_sums(np.full(nodes.shape, -2000.0), weights))
        assert total == pytest.approx(-2000.0)

    def test_refinement_converges(self):
        """log of int_0^2 e^{-x} dx"""
        def evaluate(n):
            nodes, weights = gauss_legendre_panels(0.0, 2.0, n)
            return log_panel_sums(-nodes, weights)[None]

        totals, n_panels = refine_log_integrals(evaluate, 2, rtol=1e-10)
        assert totals[0] == pytest.approx(np.log1p(-np.exp(-2.0)), rel=1e-10)
        assert n_panels == 4

    def test_refinement_cap(self):
        """A drifting integral reports its worst cell"""
        def evaluate(n):
            return np.full((1, n), np.log(1.0 / n) + 0.01 * n)

        with pytest.raises(QuadratureError) as excinfo:
            refine_log_integrals(evaluate, 2, max_refinements=3)
        assert set(excinfo.value.worst_cell) == {'integral', 'panel', 'n_panels'}


    def test_nan_panel_raises_at_once(self):
        """A NaN contribution stops refinement on the first evaluation"""
        calls = []

        def evaluate(n):
            calls.append(n)
            values = np.zeros((2, n))
            values[1, n // 2] = np.nan
            return values

        with pytest.raises(QuadratureError) as excinfo:
            refine_log_integrals(evaluate, 4)
        assert calls == [4]
        assert excinfo.value.worst_cell == {'integral': 1, 'panel': 2, 'n_panels': 4}

    def test_vanishing_integral_converges(self):
        """An identically zero integrand sits next to a finite one"""
        def evaluate(n):
            nodes, weights = gauss_legendre_panels(0.0, 1.0, n)
            return np.stack([log_panel_sums(np.zeros(nodes.shape), weights),
                             np.full(n, -np.inf)])

        totals, _ = refine_log_integrals(evaluate, 2)
        assert totals[0] == pytest.approx(0.0, abs=1e-12)
        assert np.isneginf(totals[1])

class TestSampling:
    def test_streams_are_keyed(self):
        """Same key, same draws; different key, different draws"""
        a = stream(3, 1, 2).normal(size=4)
        np.testing.assert_array_equal(a, stream(3, 1, 2).normal(size=4))
        assert not np.array_equal(a, stream(3, 1, 3).normal(size=4))

    def test_chunks_cover(self):
        """Cells cover the range in order"""
        assert list(chunks(10, 4)) == [(0, 4), (1, 4), (2, 2)]

    def test_parallel_map_order(self):
        """Results come back in input order regardless of threads"""
        expected = [x * x for x in range(10)]
        assert parallel_map(lambda x: x * x, range(10), 4) == expected
        assert parallel_map(lambda x: x * x, range(10), 1) == expected
