#!/usr/bin/env python3
"""One-variable polynomial dynamics tests using pytest framework"""

import cmath
import math
import sys
from pathlib import Path

import numpy as np
import pytest

_test_dir = Path(__file__).parent
if str(_test_dir) not in sys.path:
    sys.path.insert(0, str(_test_dir))

from testdata.map_configs import random_polynomial

from henondyn.common.errors import DomainError
from henondyn.poly1d import (
    MonicCenteredPolynomial,
    argument_principle_count,
    backward_lyapunov_estimate,
    bottcher_p,
    cluster_roots,
    critical_points,
    escape_radius,
    green_p,
    linkage_labels,
    max_escape_rate,
    mp_lyapunov,
    polynomial_roots,
)


class TestPolynomial:
    """Construction and evaluation of monic centered polynomials"""

    def test_rejects_low_degree(self):
        with pytest.raises(DomainError):
            MonicCenteredPolynomial(1, ())

    def test_rejects_wrong_coefficient_count(self):
        with pytest.raises(DomainError):
            MonicCenteredPolynomial(3, (1.0,))

    def test_from_coefficients(self):
        p = MonicCenteredPolynomial.from_coefficients([1, 0, 2, 3])
        assert p.degree == 3
        assert p.coeffs == (3 + 0j, 2 + 0j)
        assert p(1) == pytest.approx(6)
        assert p.derivative(1) == pytest.approx(5)

    def test_from_coefficients_requires_centered(self):
        with pytest.raises(DomainError):
            MonicCenteredPolynomial.from_coefficients([1, 1, 0])


class TestRoots:
    """Aberth root finding, clustering and the argument principle"""

    def test_simple_roots(self):
        roots = np.sort_complex(polynomial_roots(np.poly([1, 2, -3])))
        np.testing.assert_allclose(roots, [-3, 1, 2], atol=1e-12)

    def test_roots_at_origin(self):
        roots = polynomial_roots([1, 0, -4, 0, 0])
        assert np.count_nonzero(np.abs(roots) < 1e-14) == 2
        assert sorted(abs(r) for r in roots)[-1] == pytest.approx(2)

    def test_double_root_cluster(self):
        roots = polynomial_roots(np.poly([1.5, 1.5, -1]))
        clusters = cluster_roots(roots, 1e-5)
        assert [size for _, size in clusters] == [1, 2]
        assert clusters[1][0] == pytest.approx(1.5, abs=1e-10)

    def test_linkage_labels_per_point_radius(self):
        points = np.array([0, 1e-3, 1.0, 1.0 + 1e-9j, 2.0])
        labels = linkage_labels(points, np.array([1e-2, 1e-8, 1e-8, 1e-8, 1e-8]))
        assert labels[0] == labels[1]
        assert labels[2] == labels[3]
        assert len(set(labels)) == 3
        assert linkage_labels(np.zeros(0, dtype=complex), 1.0).size == 0

    def test_argument_principle(self):
        cube = lambda z: z ** 3 - 1
        assert argument_principle_count(cube, 0j, 2.0) == 3
        assert argument_principle_count(cube, 0j, 0.5) == 0


class TestGreenFunction:
    """Green function, escape rate and Böttcher coordinate of p"""

    def test_critical_points(self):
        p = MonicCenteredPolynomial(3, (0, -3))
        crit = np.sort_complex(critical_points(p))
        np.testing.assert_allclose(crit, [-1, 1], atol=1e-12)

    def test_green_of_monomial(self):
        p = MonicCenteredPolynomial.monomial(2)
        assert green_p(p, 2) == pytest.approx(math.log(2), abs=1e-14)
        assert green_p(p, 0.5) == 0.0

    def test_green_functional_equation(self):
        rng = np.random.default_rng(7)
        worst = 0.0
        for _ in range(200):
            p = random_polynomial(rng, int(rng.integers(2, 5)))
            z = complex(3 * rng.normal(), 3 * rng.normal())
            worst = max(worst, abs(green_p(p, p(z)) - p.degree * green_p(p, z)))
        print(f"\n📐 max deviation {worst:.2e}")
        assert worst <= 1e-8

    def test_escape_rate(self):
        assert max_escape_rate(MonicCenteredPolynomial.quadratic(0)).M == 0.0
        rate = max_escape_rate(MonicCenteredPolynomial.quadratic(100))
        assert rate.M == pytest.approx(0.5 * math.log(100), abs=0.01)
        assert rate.R == pytest.approx(math.exp(rate.M))

    def test_rejects_nonpositive_tolerance(self):
        with pytest.raises(DomainError):
            green_p(MonicCenteredPolynomial.quadratic(0), 1.0, tol=0)

    def test_bottcher_of_monomial_is_identity(self):
        p = MonicCenteredPolynomial.monomial(3)
        z = 2.5 * cmath.exp(0.7j)
        assert abs(bottcher_p(p, z) - z) <= 1e-13

    def test_bottcher_functional_equation(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            p = random_polynomial(rng, int(rng.integers(2, 5)))
            z = 2.0 * escape_radius(p) * cmath.exp(2j * math.pi * rng.uniform())
            phi = bottcher_p(p, z)
            rhs = phi ** p.degree
            assert abs(bottcher_p(p, p(z)) - rhs) / abs(rhs) <= 1e-8
            assert math.log(abs(phi)) == pytest.approx(green_p(p, z), abs=1e-9)

    def test_bottcher_outside_domain(self):
        p = MonicCenteredPolynomial.quadratic(100)
        with pytest.raises(DomainError):
            bottcher_p(p, 0)


class TestEscapeEstimates:
    """Bounds relating |z|, phi_p, critical points and M(p)"""

    @staticmethod
    def _polynomials(seed, count=40):
        rng = np.random.default_rng(seed)
        for i in range(count):
            yield rng, random_polynomial(rng, int(rng.integers(2, 6)), scale=(0.5, 3.0, 20.0)[i % 3])

    def test_bottcher_sandwich(self):
        for rng, p in self._polynomials(21):
            R = max_escape_rate(p).R
            z = escape_radius(p) * rng.uniform(1.5, 3.0) * cmath.exp(2j * math.pi * rng.uniform())
            phi = abs(bottcher_p(p, z))
            assert abs(z) - 3 * R <= phi <= abs(z) + 2 * R

    def test_bottcher_close_to_identity(self):
        for rng, p in self._polynomials(22):
            R = max_escape_rate(p).R
            z = max(6 * R, escape_radius(p)) * rng.uniform(1.0, 3.0) * cmath.exp(2j * math.pi * rng.uniform())
            assert abs(bottcher_p(p, z) / z - 1) <= 6 * R ** 2 / abs(z) ** 2

    def test_polynomial_close_to_monomial(self):
        for rng, p in self._polynomials(23):
            d = p.degree
            R = max_escape_rate(p).R
            z = 6 * math.sqrt(d - 1) * R * rng.uniform(1.0, 4.0) * cmath.exp(2j * math.pi * rng.uniform())
            assert abs(p(z) / z ** d - 1) <= (12 * d + 2) * R ** 2 / abs(z) ** 2

    def test_escape_rate_against_critical_points(self):
        for _, p in self._polynomials(24):
            M = max_escape_rate(p).M
            size = max(max(abs(c) for c in critical_points(p)), abs(p.coeffs[0]) ** (1.0 / p.degree))
            log_plus = max(math.log(size), 0.0) if size > 0 else 0.0
            assert M - 2 * math.log(2) <= log_plus <= M + 3 * math.log(2)

    def test_critical_points_in_disk(self):
        for _, p in self._polynomials(25):
            R = max_escape_rate(p).R
            assert np.all(np.abs(critical_points(p)) <= 2 * R + 1e-9)

    def test_green_tail_bound(self):
        for rng, p in self._polynomials(27):
            R = max_escape_rate(p).R
            z = max(8 * R, escape_radius(p)) * rng.uniform(1.0, 3.0) * cmath.exp(2j * math.pi * rng.uniform())
            assert abs(green_p(p, z) - math.log(abs(z))) <= 5 * R / abs(z)


class TestLyapunov:
    """Lyapunov exponent of the equilibrium measure"""

    def test_range_from_escape_rate(self):
        rng = np.random.default_rng(26)
        for i in range(30):
            p = random_polynomial(rng, int(rng.integers(2, 6)), scale=(0.5, 3.0, 20.0)[i % 3])
            d, M = p.degree, max_escape_rate(p).M
            chi = mp_lyapunov(p)
            assert math.log(d) + M - 1e-9 <= chi <= math.log(d) + (d - 1) * M + 1e-9

    @pytest.mark.parametrize("degree", [2, 3, 4])
    def test_monomial(self, degree):
        p = MonicCenteredPolynomial.monomial(degree)
        assert abs(mp_lyapunov(p) - math.log(degree)) <= 1e-12

    def test_escaping_critical_point(self):
        p = MonicCenteredPolynomial.quadratic(100)
        assert mp_lyapunov(p) == pytest.approx(math.log(2) + green_p(p, 0))

    def test_backward_estimate_of_monomial(self):
        p = MonicCenteredPolynomial.monomial(2)
        estimate = backward_lyapunov_estimate(p, samples=20_000, chains=200, seed=3)
        assert estimate == pytest.approx(math.log(2), abs=1e-9)

    @pytest.mark.slow
    @pytest.mark.parametrize("c", [1.0, 2j, -3.0])
    def test_backward_estimate_agrees(self, c):
        p = MonicCenteredPolynomial.quadratic(c)
        estimate = backward_lyapunov_estimate(p, seed=5)
        print(f"\n🧪 c={c}: formula {mp_lyapunov(p):.5f}, backward iteration {estimate:.5f}")
        assert estimate == pytest.approx(mp_lyapunov(p), abs=1e-2)


if __name__ == "__main__":
    pytest.main([__file__, "-v", "-s", "--tb=short"])
