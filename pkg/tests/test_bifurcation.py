#!/usr/bin/env python3
"""Parameter-space tests: continuation, attracting-cycle scans and slices"""

import cmath
import math
import sys
from pathlib import Path

import numpy as np
import pytest

_test_dir = Path(__file__).parent
if str(_test_dir) not in sys.path:
    sys.path.insert(0, str(_test_dir))

from testdata.map_configs import HYPERBOLIC_QUADRATIC, PERIOD3_PARAM, PERIOD3_POINT_X, quadratic

from henondyn.bifurcation import (
    ESCAPE,
    UNDECIDED,
    attracting_cycle_scan,
    continue_orbit,
    iterate_orbits,
    quadratic_family,
    quadratic_family_fixed_analysis,
    render_slice,
    ring_scan,
    scan_parameter,
)
from henondyn.common.errors import DomainError
from henondyn.henon_core import HenonComposition
from henondyn.periodic import OrbitType


class TestFixedPointAnalysis:
    """alpha = (0, 0) and beta = (1 - a, 1 - a) of (a y + x^2, x)"""

    def test_attracting_alpha(self):
        report = quadratic_family_fixed_analysis(0.25)
        assert sorted(abs(v) for v in report.alpha.eigenvalues) == pytest.approx([0.5, 0.5])
        assert report.alpha.orbit_type == OrbitType.ATTRACTING

    def test_repelling_alpha(self):
        report = quadratic_family_fixed_analysis(4.0)
        assert report.alpha.orbit_type == OrbitType.REPELLING
        assert abs(report.alpha.eigenvalues[0]) == pytest.approx(2.0)

    def test_beta_saddle(self):
        report = quadratic_family_fixed_analysis(0.5)
        assert report.beta.point == pytest.approx((0.5, 0.5))
        expected = sorted([(1 - math.sqrt(3)) / 2, (1 + math.sqrt(3)) / 2], key=abs)
        assert [v.real for v in report.beta.eigenvalues] == pytest.approx(expected)
        assert report.beta.orbit_type == OrbitType.SADDLE

    def test_unit_circle(self):
        for theta in np.linspace(0.05, 2 * math.pi - 0.05, 37):
            report = quadratic_family_fixed_analysis(cmath.exp(1j * theta))
            for v in report.alpha.eigenvalues:
                assert abs(abs(v) - 1) <= 1e-12

    def test_siegel_candidate(self):
        golden = (math.sqrt(5) - 1) / 2
        assert quadratic_family_fixed_analysis(cmath.exp(2j * math.pi * golden)).siegel_candidate
        assert not quadratic_family_fixed_analysis(1j).siegel_candidate
        assert not quadratic_family_fixed_analysis(0.5j).siegel_candidate

    def test_zero_rejected(self):
        with pytest.raises(DomainError):
            quadratic_family_fixed_analysis(0)


class TestContinuation:
    """Following fixed points along parameter paths"""

    def test_alpha_crosses_unit_circle(self):
        direction = cmath.exp(1j * math.pi / 3)
        family = quadratic_family()
        track = continue_orbit(family, 0.5 * direction, (0j, 0j), [1.5 * direction], max_step=0.02, period=1)
        crossings = track.crossings()
        assert track.status == "complete"
        assert {e.eigenvalue_index for e in crossings} == {0, 1}
        for event in crossings:
            assert event.direction == "outward"
            assert abs(abs(event.param) - 1) <= 1e-6

    def test_beta_saddle_on_circle(self):
        family = quadratic_family()
        start = 0.5j
        loop = [start * cmath.exp(2j * math.pi * k / 12) for k in range(1, 13)]
        track = continue_orbit(family, start, (1 - start, 1 - start), loop, max_step=0.02, period=1)
        assert track.status == "complete"
        assert track.crossings() == []
        assert track.monodromy == [0]
        for step in track.steps:
            small, big = step.moduli
            assert small < 1 < big

    def test_step_bound(self):
        family = quadratic_family()
        track = continue_orbit(family, 0.3, (0.7, 0.7), [0.3 + 0.2j], max_step=0.01, period=1)
        params = track.path
        assert max(abs(b - a) for a, b in zip(params[:-1], params[1:])) <= 0.01 + 1e-12

    def test_rejects_non_orbit(self):
        with pytest.raises(DomainError):
            continue_orbit(quadratic_family(), 0.3, (5.0, -2.0), [0.4], period=1)

    def test_point_needs_period(self):
        with pytest.raises(DomainError):
            continue_orbit(quadratic_family(), 0.3, (0j, 0j), [0.4])


class TestOrbitClassification:
    """Batched iteration with Brent cycle detection"""

    def test_escape_and_capture(self):
        f = quadratic(HYPERBOLIC_QUADRATIC)
        escaped, periods, finals = iterate_orbits(f, np.array([0.1, 3.0, -0.2j]), max_iter=500)
        assert escaped.tolist() == [False, True, False]
        assert periods[0] > 0 and periods[2] > 0
        assert np.abs(finals[0]).max() < 1e-5


class TestScan:
    """Rings of parameters with extra attracting cycles"""

    def test_small_modulus_has_no_extra_cycles(self):
        summary = ring_scan(quadratic_family(), [0.2], angles_per_modulus=6, inits=400, max_iter=1000)
        assert summary.report.parameters_scanned == 6
        assert summary.counts == {0.2: 0}
        assert summary.first_modulus is None

    def test_thread_count_does_not_matter(self):
        family = quadratic_family()
        kwargs = dict(inits=100, max_iter=500, max_period=6)
        one = attracting_cycle_scan(family, [0.5], 4, workers=1, **kwargs)
        two = attracting_cycle_scan(family, [0.5], 4, workers=2, **kwargs)
        assert one.to_model() == two.to_model()

    def test_progress_callback(self):
        seen = []
        attracting_cycle_scan(quadratic_family(), [0.3], 3, inits=25, max_iter=200, progress=seen.append)
        assert seen == [1, 2, 3]

    def test_rejects_empty_angles(self):
        with pytest.raises(DomainError):
            attracting_cycle_scan(quadratic_family(), [0.3], 0)

    @pytest.mark.slow
    def test_period3_cycle(self):
        scan = scan_parameter(quadratic_family(), PERIOD3_PARAM, inits=10_000, max_iter=20_000)
        cycles = [c for c in scan.extra if c.exact_period == 3]
        print(f"\n🧪 extra cycles: {[c.exact_period for c in scan.extra]}")
        assert cycles
        xs = [p[0] for p in cycles[0].points]
        assert min(abs(x - PERIOD3_POINT_X) for x in xs) <= 1e-3

    @pytest.mark.slow
    def test_ring_near_unit_circle(self):
        summary = ring_scan(quadratic_family(), [0.99], angles_per_modulus=500, inits=10_000, max_iter=5000)
        hits = summary.report.hits
        print(f"\n🧪 |a|=0.99: {len(hits)} parameters with extra attracting cycles")
        assert len(hits) > 0
        # the family commutes with complex conjugation, so hits come in conjugate pairs
        params = [h.param for h in hits]
        for a in params:
            if abs(a.imag) > 1e-9:
                assert min(abs(b - a.conjugate()) for b in params) <= 1e-9


class TestSlice:
    """Pixel classification of the slice {y = 0}"""

    def test_hyperbolic_basin(self):
        image = render_slice(quadratic(HYPERBOLIC_QUADRATIC), resolution=(96, 96), max_iter=500)
        counts = image.class_counts()
        assert sum(counts.values()) == 96 * 96
        assert len(image.registry) == 1
        assert image.registry[0].points[0] == pytest.approx((0, 0), abs=1e-8)
        fraction = counts["basin-0"] / (96 * 96)
        assert fraction == pytest.approx(math.pi / 16, abs=0.03)

    def test_far_window_escapes(self):
        image = render_slice(quadratic(HYPERBOLIC_QUADRATIC), window=(20, 24, 20, 24), resolution=(8, 8))
        assert np.all(image.classes == ESCAPE)

    def test_refinement_is_monotone(self):
        f = HenonComposition.quadratic(0.2 - 0.1j, -0.1)
        short = render_slice(f, resolution=(48, 48), max_iter=100)
        long = render_slice(f, resolution=(48, 48), max_iter=200)
        decided = short.classes != UNDECIDED
        assert np.array_equal(short.classes[decided], long.classes[decided])

    def test_ppm_file(self, tmp_path):
        image = render_slice(quadratic(HYPERBOLIC_QUADRATIC), resolution=(8, 4), max_iter=100)
        path = image.write(tmp_path / "slice.ppm")
        data = path.read_bytes()
        header = b"P6\n8 4\n255\n"
        assert data.startswith(header)
        assert len(data) == len(header) + 8 * 4 * 3

    def test_png_file(self, tmp_path):
        from PIL import Image

        image = render_slice(quadratic(HYPERBOLIC_QUADRATIC), resolution=(8, 4), max_iter=100)
        path = image.write(tmp_path / "slice.png")
        with Image.open(path) as png:
            assert png.size == (8, 4)
            assert np.array_equal(np.asarray(png.convert("RGB")), image.to_rgb())

    def test_resolution_limit(self):
        with pytest.raises(DomainError):
            render_slice(quadratic(HYPERBOLIC_QUADRATIC), resolution=(0, 10))


if __name__ == "__main__":
    pytest.main([__file__, "-v", "-s", "--tb=short"])
