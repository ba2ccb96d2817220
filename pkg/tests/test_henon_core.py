#!/usr/bin/env python3
"""Hénon composition, inverse normal form and Green/Böttcher function tests"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

_test_dir = Path(__file__).parent
if str(_test_dir) not in sys.path:
    sys.path.insert(0, str(_test_dir))

from testdata.map_configs import map_document, random_map, two_factor_map, write_map

from henondyn.common.errors import DomainError, UncertifiedDomainError
from henondyn.henon_core import (
    HenonComposition,
    HenonFactor,
    bottcher_plus,
    differential,
    evaluate,
    green_minus,
    green_plus,
    inverse_conjugacy,
    inverse_evaluate,
    inverse_normal_form,
    jacobian_const,
    load_composition,
    mbar,
    escape_rate_M,
    unity_action,
    unity_group,
)
from henondyn.poly1d import MonicCenteredPolynomial


class TestComposition:
    """Evaluation, inverse and differential of compositions"""

    def test_rejects_zero_jacobian(self):
        with pytest.raises(DomainError):
            HenonFactor(0, MonicCenteredPolynomial.quadratic(1))

    def test_rejects_empty_composition(self):
        with pytest.raises(DomainError):
            HenonComposition(())

    def test_application_order(self):
        f = two_factor_map()
        h1, h2 = f.factors
        point = (0.3 - 0.2j, 1.1 + 0.4j)
        assert evaluate(f, point) == h2(*h1(*point))

    def test_inverse_round_trip(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            f = random_map(rng, int(rng.integers(2, 5)))
            point = (complex(*rng.normal(size=2)), complex(*rng.normal(size=2)))
            back = inverse_evaluate(f, evaluate(f, point))
            assert abs(back[0] - point[0]) + abs(back[1] - point[1]) <= 1e-9

    def test_constant_jacobian(self):
        f = two_factor_map()
        assert jacobian_const(f) == pytest.approx((0.2 + 0.1j) * -0.3)
        for point in [(0j, 0j), (1.5 - 1j, 0.2j), (-2.0, 3.0)]:
            assert np.linalg.det(differential(f, point)) == pytest.approx(jacobian_const(f), abs=1e-12)

    def test_rotation_is_conjugate(self):
        f = two_factor_map()
        g = f.rotated(1)
        h1 = f.factors[0]
        point = (0.25 + 0.5j, -0.4 + 0.1j)
        lhs = evaluate(g, h1(*point))
        rhs = h1(*evaluate(f, point))
        assert lhs == pytest.approx(rhs)


class TestUnityAction:
    """Conjugation by diagonal roots of unity"""

    def test_group_size(self):
        assert len(unity_group(2)) == 1
        assert len(unity_group(4)) == 3

    def test_action_is_conjugacy(self):
        f = HenonComposition.single(0.4 + 0.2j, MonicCenteredPolynomial(3, (0.5, -1.0 + 0.3j)))
        g = unity_action(f, -1)
        s = lambda x, y: (-x, -y)
        point = (0.7 - 0.1j, 0.3 + 0.9j)
        assert evaluate(g, point) == pytest.approx(s(*evaluate(f, s(*point))))

    def test_rejects_other_roots(self):
        f = HenonComposition.single(0.4, MonicCenteredPolynomial.monomial(3))
        with pytest.raises(DomainError):
            unity_action(f, 1j)

    @pytest.mark.parametrize("f", [
        HenonComposition.single(0.4 + 0.2j, MonicCenteredPolynomial(3, (0.5, -1.0 + 0.3j))),
        HenonComposition((HenonFactor(0.3, MonicCenteredPolynomial.quadratic(0.2 - 0.7j)),
                          HenonFactor(-0.5j, MonicCenteredPolynomial.quadratic(1.1)))),
    ], ids=["cubic", "two-factor"])
    def test_action_invariants(self, f):
        for alpha in unity_group(f.degree):
            g = unity_action(f, alpha)
            assert jacobian_const(g) == pytest.approx(jacobian_const(f), abs=1e-14)
            assert mbar(g) == pytest.approx(mbar(f), abs=1e-9)

    def test_mbar_strictly_above_escape_rate(self):
        c = -1.5
        g = HenonComposition((HenonFactor(1.0, MonicCenteredPolynomial.quadratic(c)),
                              HenonFactor(1.0, MonicCenteredPolynomial.monomial(2))))
        assert escape_rate_M(g).M == pytest.approx(0.0, abs=1e-12)
        assert mbar(g) > 0.2

    def test_mbar_at_least_escape_rate(self):
        f = HenonComposition((HenonFactor(1.0, MonicCenteredPolynomial.monomial(2)),
                              HenonFactor(1.0, MonicCenteredPolynomial.quadratic(1 + 1j))))
        assert mbar(f) >= escape_rate_M(f).M - 1e-12


class TestInverseNormalForm:
    """f^{-1} as a composition of monic centered factors"""

    def test_escape_rates_along_diverging_ray(self):
        rates, inverse_rates = [], []
        for j in range(1, 5):
            f = HenonComposition.quadratic(10.0 ** j, float(j))
            rates.append(escape_rate_M(f).M)
            inverse_rates.append(escape_rate_M(inverse_normal_form(f)).M)
        assert all(later > earlier for earlier, later in zip(rates, rates[1:]))
        assert max(inverse_rates) <= 1e-9

    def test_conjugacy_residual(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            form = inverse_conjugacy(random_map(rng, int(rng.integers(2, 4))))
            assert form.residual <= 1e-8

    def test_two_factor_map(self):
        f = two_factor_map()
        form = inverse_conjugacy(f)
        point = (0.2 + 0.3j, -0.5j)
        lhs = form.psi(evaluate(form.g, point))
        rhs = inverse_evaluate(f, form.psi(point))
        assert lhs == pytest.approx(rhs, abs=1e-10)


class TestGreenFunctions:
    """G^+, G^- and the Böttcher function phi_f"""

    def test_green_plus_values(self):
        f = HenonComposition.quadratic(0.05)
        assert green_plus(f, (0j, 0j)) == 0.0
        assert green_plus(f, (100.0, 0j)) == pytest.approx(math.log(100), abs=1e-3)

    def test_green_plus_functional_equation(self):
        f = HenonComposition.quadratic(0.3 - 0.2j, -0.5 + 0.1j)
        for point in [(3.0, 1.0), (1.5 + 2j, -0.5), (0.8j, 2.5)]:
            g = green_plus(f, point)
            assert green_plus(f, evaluate(f, point)) == pytest.approx(2 * g, abs=1e-8)

    def test_green_minus_functional_equation(self):
        f = HenonComposition.quadratic(0.3 - 0.2j, -0.5 + 0.1j)
        for point in [(0.1, 5.0), (1.0 - 1j, 2.5 + 1j)]:
            g = green_minus(f, point)
            assert g > 0
            assert green_minus(f, inverse_evaluate(f, point)) == pytest.approx(2 * g, abs=1e-8)

    def test_bottcher_plus(self):
        f = HenonComposition.quadratic(0.05)
        point = (50.0, 10.0)
        phi = bottcher_plus(f, point)
        assert math.log(abs(phi)) == pytest.approx(green_plus(f, point), abs=1e-9)
        image = evaluate(f, point)
        assert bottcher_plus(f, image) == pytest.approx(phi ** 2, rel=1e-9)

    def test_bottcher_plus_on_horizontal_axis(self):
        f = HenonComposition.quadratic(0.05)
        point = (30.0, 0j)
        phi = bottcher_plus(f, point)
        assert math.log(abs(phi)) == pytest.approx(green_plus(f, point), abs=1e-10)
        assert phi == pytest.approx(bottcher_plus(f, point, depth=12), rel=1e-12)
        assert abs(phi - 30.0) > 1e-6

    def test_bottcher_plus_bound(self):
        rng = np.random.default_rng(31)
        for _ in range(6):
            f = random_map(rng, int(rng.integers(2, 4)))
            R = escape_rate_M(f).R
            for _ in range(100):
                x = 12 * f.degree * R * rng.uniform(1.0, 5.0) * np.exp(2j * np.pi * rng.uniform())
                y = abs(x) * rng.choice([0.0, rng.uniform()]) * np.exp(2j * np.pi * rng.uniform())
                phi = bottcher_plus(f, (x, y))
                assert abs(phi / x - 1) <= 2 * R / abs(x)
                assert math.log(abs(phi)) == pytest.approx(green_plus(f, (x, y)), abs=1e-8)

    def test_bottcher_plus_truncation_depth(self):
        f = HenonComposition((HenonFactor(0.1, MonicCenteredPolynomial.quadratic(10.0)),
                              HenonFactor(0.1j, MonicCenteredPolynomial.quadratic(10.0))))
        R = escape_rate_M(f).R
        point = (24.0 * f.degree * R, 6.0 * f.degree * R * np.exp(0.4j))
        shallow = bottcher_plus(f, point, depth=6)
        deep = bottcher_plus(f, point, depth=12)
        assert abs(shallow - deep) <= 1e-10 * abs(deep)

    def test_bottcher_plus_uncertified(self):
        f = HenonComposition.quadratic(100.0)
        with pytest.raises(UncertifiedDomainError):
            bottcher_plus(f, (1e4, 0j))

    def test_bottcher_plus_outside_domain(self):
        with pytest.raises(DomainError):
            bottcher_plus(HenonComposition.quadratic(0.05), (1.0, 0j))


class TestMapFiles:
    """JSON map files"""

    def test_json_round_trip(self, tmp_path):
        f = two_factor_map()
        assert load_composition(write_map(tmp_path / "f.json", f)) == f

    def test_hand_written_file(self, tmp_path):
        path = tmp_path / "f.json"
        path.write_text(map_document(0.3, [-1.0]), encoding="utf-8")
        assert load_composition(path) == HenonComposition.quadratic(0.3, -1.0)

    def test_empty_factor_list(self):
        with pytest.raises(ValueError, match="factors"):
            HenonComposition.from_json('{"factors": []}')

    def test_wrong_coefficient_count(self, tmp_path):
        path = tmp_path / "f.json"
        path.write_text(map_document(0.3, [1.0, 2.0]), encoding="utf-8")
        with pytest.raises(ValueError, match="poly"):
            load_composition(path)

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "f.json"
        path.write_text('{"factors": [', encoding="utf-8")
        with pytest.raises(ValueError, match="line 1"):
            load_composition(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_composition(tmp_path / "missing.json")


if __name__ == "__main__":
    pytest.main([__file__, "-v", "-s", "--tb=short"])
