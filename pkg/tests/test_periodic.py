#!/usr/bin/env python3
"""Periodic point solver tests using pytest framework"""

import sys
from pathlib import Path

import numpy as np
import pytest

_test_dir = Path(__file__).parent
if str(_test_dir) not in sys.path:
    sys.path.insert(0, str(_test_dir))

from testdata.map_configs import HYPERBOLIC_QUADRATIC, degenerate_quartic, quadratic, random_map, two_factor_map

from henondyn.common.errors import BudgetExceededError, DomainError
from henondyn.henon_core import HenonComposition, iterate
from henondyn.periodic import (
    OrbitType,
    PeriodicOrbitRecord,
    classify,
    cluster_vectors,
    divisors,
    eigenpair,
    exact_period,
    fixed_points_henon,
    local_degree,
    mobius,
    mobius_exact_count,
    orbit_record,
    period2_points_henon,
    periodic_points,
)
from henondyn.spectra import match_multisets
from henondyn.tracking import CyclicSystem, orbit_vector


def _traces(records):
    return np.array([r.trace for r in records for _ in range(r.count)], dtype=complex)


class TestEigenvalues:
    """Eigenvalue pairs and orbit types"""

    def test_eigenpair_sorted_by_modulus(self):
        small, big = eigenpair(3, 2)
        assert small == pytest.approx(1)
        assert big == pytest.approx(2)

    def test_classify(self):
        assert classify((0.5, 0.2)) == OrbitType.ATTRACTING
        assert classify((3.0, 1.5)) == OrbitType.REPELLING
        assert classify((0.5, 2.0)) == OrbitType.SADDLE
        assert classify((1.0, 2.0)) == OrbitType.NEUTRAL_MIXED


class TestCounting:
    """Möbius inversion of the Bezout count"""

    def test_divisors(self):
        assert divisors(12) == [1, 2, 3, 4, 6, 12]

    def test_mobius(self):
        assert [mobius(n) for n in range(1, 11)] == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1]

    def test_exact_counts(self):
        assert [mobius_exact_count(2, n) for n in range(1, 5)] == [2, 2, 6, 12]


class TestClosedForms:
    """Fixed points and 2-cycles of single Hénon maps"""

    def test_quadratic_fixed_points(self):
        f = quadratic(HYPERBOLIC_QUADRATIC)
        records = fixed_points_henon(f)
        points = sorted((r.points[0] for r in records), key=lambda p: p[0].real)
        assert points[0] == pytest.approx((0, 0), abs=1e-14)
        assert points[1] == pytest.approx((0.95, 0.95), abs=1e-14)

    def test_fixed_point_count(self):
        rng = np.random.default_rng(8)
        for d in (2, 3, 4):
            f = random_map(rng, d)
            assert sum(r.count for r in fixed_points_henon(f)) == d

    def test_unit_jacobian_period2(self):
        f = HenonComposition.quadratic(1.0, -1.0)
        result = periodic_points(f, 2, method="auto")
        assert result.count == 4
        cycles = [r for r in period2_points_henon(f) if r.exact_period == 2]
        assert len(cycles) == 1
        assert {round(p[0].real, 9) for p in cycles[0].points} == {-1.0, 1.0}

    def test_closed_forms_match_general_solver(self):
        rng = np.random.default_rng(9)
        for i in range(6):
            f = random_map(rng, 2 + i % 3)
            for n in (1, 2):
                closed = periodic_points(f, n, method="auto")
                general = periodic_points(f, n, method="homotopy", seed=i)
                assert closed.method == "closed-form"
                assert closed.complete and general.complete
                u, v = _traces(closed), _traces(general)
                dist, _ = match_multisets(u, v)
                assert dist <= 1e-8 * (1.0 + np.max(np.abs(u)))

    @pytest.mark.parametrize("n", [4, 6])
    def test_exact_period_of_two_cycle(self, n):
        f = HenonComposition.quadratic(0.3, -1.0)
        cycle = next(r for r in period2_points_henon(f) if r.exact_period == 2)
        record = orbit_record(f, cycle.points[0], n)
        assert record.exact_period == 2
        assert exact_period(f, record) == 2
        assert len(record.points) == 2

    def test_closed_forms_need_single_map(self):
        with pytest.raises(DomainError):
            fixed_points_henon(two_factor_map())


class TestGeneralSolver:
    """Homotopy continuation on the cyclic system"""

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_completeness(self, n):
        rng = np.random.default_rng(100 + n)
        f = random_map(rng, 2)
        result = periodic_points(f, n, method="homotopy")
        assert result.complete
        assert result.count == 2 ** n
        assert sum(r.count for r in result.of_exact_period(n)) == mobius_exact_count(2, n)

    @pytest.mark.slow
    @pytest.mark.parametrize("n", [5, 6])
    def test_completeness_long_periods(self, n):
        rng = np.random.default_rng(100 + n)
        for _ in range(3):
            f = random_map(rng, 2)
            result = periodic_points(f, n, method="homotopy")
            print(f"\n🧪 period {n}: {result.count}/{2 ** n} points")
            assert result.count == 2 ** n
            assert sum(r.count for r in result.of_exact_period(n)) == mobius_exact_count(2, n)

    def test_points_are_periodic(self):
        f = HenonComposition.quadratic(0.2 + 0.1j, -0.3)
        for record in periodic_points(f, 3):
            for point in record.points:
                image = iterate(f, point, 3)
                assert abs(image[0] - point[0]) + abs(image[1] - point[1]) <= 1e-9

    def test_composition_fixed_points(self):
        result = periodic_points(two_factor_map(), 1)
        assert result.method == "homotopy"
        assert result.count == 4

    @pytest.mark.parametrize("n", [1, 2, 3, 4, pytest.param(5, marks=pytest.mark.slow),
                                   pytest.param(6, marks=pytest.mark.slow)])
    def test_hyperbolic_map_saddles(self, n):
        f = quadratic(HYPERBOLIC_QUADRATIC)
        result = periodic_points(f, n)
        assert result.complete
        for record in result:
            if record.exact_period == 1 and abs(record.points[0][0]) < 1e-6:
                continue
            assert record.is_saddle

    def test_double_fixed_points_match_local_degree(self):
        f = degenerate_quartic(0.8)
        result = periodic_points(f, 1, method="homotopy")
        assert result.complete
        assert sorted(r.multiplicity for r in result) == [2, 2]
        assert not any(r.degree_mismatch for r in result)

    def test_cluster_sizes_checked_against_local_degree(self):
        system = CyclicSystem((1.0,), (degenerate_quartic(0.8).factors[0].p,))
        vectors = np.array([[0.8 + 1e-7], [0.8 - 1e-7], [-0.8 + 1e-7j], [-0.8 - 1e-7j]])
        clusters = cluster_vectors(system, vectors, 1e-5)
        assert [c.size for c in clusters] == [2, 2]
        assert [c.local_degree for c in clusters] == [2, 2]
        assert not any(c.degree_mismatch for c in clusters)

    def test_cluster_size_mismatch_flagged(self):
        system = CyclicSystem((1.0,), (degenerate_quartic(0.8).factors[0].p,))
        vectors = np.array([[0.8 + 1e-7], [0.8 - 1e-7], [0.8 + 1e-7j], [-0.8]])
        clusters = cluster_vectors(system, vectors, 1e-5)
        assert [c.size for c in clusters] == [1, 3]
        assert clusters[0].local_degree is None
        assert clusters[1].local_degree == 2
        assert clusters[1].degree_mismatch

    def test_local_degree(self):
        p = degenerate_quartic(0.8).factors[0].p
        single = CyclicSystem((1.0,), (p,))
        assert local_degree(single, np.array([0.8]), 1e-3) == 2
        product = CyclicSystem((1.0, 1.0), (p, p))
        assert local_degree(product, np.array([0.8, 0.8]), 1e-3) == 4
        assert local_degree(product, np.array([0.8, -0.8]), 1e-3) == 4

    def test_local_degree_of_simple_point(self):
        f = two_factor_map()
        system = CyclicSystem.for_period(f, 1)
        record = periodic_points(f, 1)[0]
        assert local_degree(system, orbit_vector(f, record.points[0], 1), 1e-3) == 1

    def test_budget(self):
        with pytest.raises(BudgetExceededError):
            periodic_points(HenonComposition.quadratic(0.3), 13)

    def test_rejects_bad_input(self):
        f = HenonComposition.quadratic(0.3)
        with pytest.raises(DomainError):
            periodic_points(f, 0)
        with pytest.raises(DomainError):
            periodic_points(f, 1, method="newton")

    def test_record_model_round_trip(self):
        record = periodic_points(HenonComposition.quadratic(0.2 + 0.1j, -0.3), 2)[0]
        assert PeriodicOrbitRecord.from_model(record.to_model()) == record


if __name__ == "__main__":
    pytest.main([__file__, "-v", "-s", "--tb=short"])
