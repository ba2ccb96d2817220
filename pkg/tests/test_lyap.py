#!/usr/bin/env python3
"""Lyapunov estimates, sandwich bounds, crossed mappings and the fold certificate"""

import math
import sys
from pathlib import Path

import pytest

_test_dir = Path(__file__).parent
if str(_test_dir) not in sys.path:
    sys.path.insert(0, str(_test_dir))

from testdata.map_configs import ESCAPING_CONFIGS, HORSESHOE_QUADRATIC, HYPERBOLIC_QUADRATIC, quadratic

from henondyn.common.errors import DomainError, HypothesisError
from henondyn.henon_core import HenonComposition, HenonFactor, escape_rate_M
from henondyn.lyap import (
    chi_plus_periodic,
    chi_plus_via_inverse,
    crossed_map_check,
    escape_threshold,
    fold_certificate,
    lyapunov_bounds,
    verify_lyapunov_bounds,
)
from henondyn.poly1d import MonicCenteredPolynomial, argument_principle_count, max_escape_rate


def _escaping_params():
    return [pytest.param(cfg, id=cfg["name"], marks=[pytest.mark.slow] if cfg["slow"] else [])
            for cfg in ESCAPING_CONFIGS]


class TestBounds:
    """Escape-rate sandwich for chi^+"""

    def test_escape_threshold(self):
        assert escape_threshold(2) == 9.0
        assert escape_threshold(4) == 9.0
        assert escape_threshold(5) == pytest.approx(math.log(150 * 12 ** 2))

    def test_bounds_for_hyperbolic_map(self):
        bounds = lyapunov_bounds(quadratic(HYPERBOLIC_QUADRATIC))
        assert bounds.M == 0.0
        assert bounds.upper_applicable
        assert not bounds.lower_applicable
        assert bounds.upper == pytest.approx(math.log(2) + 2 * math.log(30))

    def test_verify_passes_and_fails(self):
        f = quadratic(HYPERBOLIC_QUADRATIC)
        assert verify_lyapunov_bounds(f, math.log(2)).passed is True
        report = verify_lyapunov_bounds(f, 100.0)
        assert report.passed is False
        assert report.upper_margin < 0

    def test_verify_not_applicable(self):
        report = verify_lyapunov_bounds(HenonComposition.quadratic(5.0), math.log(2))
        assert report.passed is None
        assert report.bounds.reasons


class TestPeriodicEstimates:
    """chi^+ from saddle cycles"""

    def test_hyperbolic_limit(self):
        f = quadratic(HYPERBOLIC_QUADRATIC)
        report = chi_plus_periodic(f, 5)
        print(f"\n🧪 chi+ ~ {report.chi_plus_estimate:.6f} from {report.saddle_count} saddles")
        assert report.status == "complete"
        assert abs(report.chi_plus_estimate - math.log(2)) <= 0.02
        assert report.chi_minus == pytest.approx(math.log(0.05) - report.chi_plus_estimate)

    @pytest.mark.parametrize("config", _escaping_params())
    def test_sandwich(self, config):
        f = quadratic(config)
        M = escape_rate_M(f).M
        report = chi_plus_periodic(f, 5)
        lower = math.log(2) + M - 0.5 * math.log(4.0 / 3.0)
        upper = math.log(2) + 2 * M + 2 * math.log(30)
        print(f"\n🧪 {config['name']}: {lower:.4f} <= {report.chi_plus_estimate:.4f} <= {upper:.4f}")
        assert lower <= report.chi_plus_estimate <= upper

    def test_inverse_route_agrees(self):
        f = quadratic(HORSESHOE_QUADRATIC)
        direct = chi_plus_periodic(f, 3)
        inverse = chi_plus_via_inverse(f, 3)
        assert direct.saddle_count == 6
        assert inverse.method == "inverse"
        assert inverse.chi_plus_estimate == pytest.approx(direct.chi_plus_estimate, abs=1e-8)


class TestCrossedMapping:
    """Vertical-boundary and degree checks of a single factor"""

    def _factor(self):
        return HenonFactor(0.1, MonicCenteredPolynomial.quadratic(10.0))

    def test_crossed_at_escape_scale(self):
        h = self._factor()
        R = max_escape_rate(h.p).R
        report = crossed_map_check(h, R)
        assert report.ok
        assert report.degree == 2
        assert report.witness is None

    def test_monotone_in_radius(self):
        h = self._factor()
        R = max_escape_rate(h.p).R
        assert crossed_map_check(h, 2 * R).ok

    def test_hypotheses(self):
        h = HenonFactor(1e6, MonicCenteredPolynomial.monomial(2))
        with pytest.raises(HypothesisError):
            crossed_map_check(h, 1.0)
        with pytest.raises(HypothesisError):
            crossed_map_check(self._factor(), 1.0)

    def test_sample_floor(self):
        h = self._factor()
        with pytest.raises(DomainError):
            crossed_map_check(h, max_escape_rate(h.p).R, samples=100)


class TestFoldCertificate:
    """Solenoidal fold around the dominant critical value"""

    def test_certified(self):
        f = HenonComposition.quadratic(0.001, 100.0)
        cert = fold_certificate(f, grid=401)
        print(f"\n🧪 fold: status={cert.status} q={cert.q} degrees={cert.horizontal_degrees}")
        assert cert.status == "certified"
        assert cert.q == 2
        assert len(cert.horizontal_degrees) == 10
        # for x^2 + C the component over D(v, r) through the critical point is the disk |x| < sqrt(r)
        p = f.factors[0].p
        counted = argument_principle_count(lambda t: p(t) - cert.critical_value, cert.critical_point,
                                           math.sqrt(cert.disk_radius))
        assert counted == 2
        assert cert.horizontal_degrees == [counted] * len(cert.horizontal_degrees)
        assert cert.projection == "linear"
        assert cert.annulus_index == 1
        assert cert.rigorous is False

    def test_connected_case(self):
        cert = fold_certificate(quadratic(HYPERBOLIC_QUADRATIC))
        assert cert.status == "hypotheses-unmet"
        assert not cert.certified

    def test_large_jacobian(self):
        cert = fold_certificate(HenonComposition.quadratic(1.0, 100.0), grid=201)
        assert cert.status == "hypotheses-unmet"
        assert "400" in cert.reason


if __name__ == "__main__":
    pytest.main([__file__, "-v", "-s", "--tb=short"])
