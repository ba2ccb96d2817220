"""
Invariant suite run by ``henondyn selftest``

Each check exercises one identity that must hold for any correct build:
functional equations of the Green and Böttcher functions, the constant
Jacobian, fixed-point counts, the constant spectrum of a degenerate family and
invariance of spectra under the unity action.
"""

from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from .common.logging import logger
from .common.schemas import CheckModel, SelftestModel
from .henon_core import (
    HenonComposition,
    HenonFactor,
    differential,
    evaluate,
    inverse_conjugacy,
    inverse_evaluate,
    jacobian_const,
    unity_action,
    unity_group,
)
from .periodic import fixed_points_henon, periodic_points
from .poly1d import MonicCenteredPolynomial, bottcher_p, escape_radius, green_p
from .spectra import spectra_equal, trace_spectrum

SEED = 20240611


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def to_model(self) -> CheckModel:
        return CheckModel(name=self.name, passed=self.passed, detail=self.detail)


@dataclass
class SelftestReport:
    checks: List[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_model(self) -> SelftestModel:
        return SelftestModel(passed=self.passed, checks=[c.to_model() for c in self.checks])


def _random_poly(rng, degree, scale=1.0) -> MonicCenteredPolynomial:
    coeffs = scale * (rng.normal(size=degree - 1) + 1j * rng.normal(size=degree - 1))
    return MonicCenteredPolynomial(degree, tuple(coeffs))


def _random_map(rng, degree, a_scale=0.4) -> HenonComposition:
    a = a_scale * complex(rng.uniform(0.2, 1.0)) * np.exp(2j * np.pi * rng.uniform())
    return HenonComposition.single(a, _random_poly(rng, degree))


def check_green_functional_equation(rng) -> CheckResult:
    worst = 0.0
    for _ in range(50):
        p = _random_poly(rng, int(rng.integers(2, 5)))
        z = complex(3 * rng.normal(), 3 * rng.normal())
        worst = max(worst, abs(green_p(p, p(z)) - p.degree * green_p(p, z)))
    return CheckResult("green functional equation", worst <= 1e-8, f"max deviation {worst:.2e}")


def check_bottcher_functional_equation(rng) -> CheckResult:
    worst = 0.0
    for _ in range(50):
        p = _random_poly(rng, int(rng.integers(2, 5)))
        z = 2.0 * escape_radius(p) * np.exp(2j * np.pi * rng.uniform())
        lhs = bottcher_p(p, p(z))
        rhs = bottcher_p(p, z) ** p.degree
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    return CheckResult("böttcher functional equation", worst <= 1e-8, f"max relative deviation {worst:.2e}")


def check_jacobian_identity(rng) -> CheckResult:
    worst = 0.0
    for _ in range(20):
        f = HenonComposition(tuple(HenonFactor(complex(rng.uniform(0.2, 2.0)), _random_poly(rng, 2 + i % 2))
                                   for i in range(int(rng.integers(1, 4)))))
        point = (complex(*(0.5 * rng.normal(size=2))), complex(*(0.5 * rng.normal(size=2))))
        det = np.linalg.det(differential(f, point))
        worst = max(worst, abs(det - jacobian_const(f)) / abs(jacobian_const(f)))
        image = evaluate(f, point)
        back = inverse_evaluate(f, image)
        scale = 1.0 + max(abs(image[0]), abs(image[1]))
        worst = max(worst, (abs(back[0] - point[0]) + abs(back[1] - point[1])) / scale)
    return CheckResult("jacobian identity and inverse", worst <= 1e-9, f"max deviation {worst:.2e}")


def check_inverse_normal_form(rng) -> CheckResult:
    worst = 0.0
    for _ in range(5):
        f = _random_map(rng, int(rng.integers(2, 4)))
        form = inverse_conjugacy(f)
        worst = max(worst, form.residual)
    return CheckResult("inverse normal form conjugacy", worst <= 1e-8, f"max residual {worst:.2e}")


def check_fixed_point_counts(rng) -> CheckResult:
    details = []
    ok = True
    for d in (2, 3, 4):
        f = _random_map(rng, d)
        fixed = sum(r.count for r in fixed_points_henon(f))
        period2 = periodic_points(f, 2, method="auto").count
        ok &= fixed == d and period2 == d * d
        details.append(f"d={d}: {fixed}/{d}, {period2}/{d * d}")
    return CheckResult("fixed-point counts", ok, "; ".join(details))


def check_degenerate_spectrum(rng) -> CheckResult:
    """(y + (x^2 - l^2)^2, x) has the same traces at periods 1 and 2 for every l"""
    tables = []
    for lam in (0.3, 0.7 + 0.2j, 1.1):
        p = MonicCenteredPolynomial(4, (lam ** 4, 0j, -2 * lam ** 2))
        tables.append(trace_spectrum(HenonComposition.single(1.0, p), 2))
    ok = all(spectra_equal(tables[0], t, tol=1e-9) for t in tables[1:])
    fixed = tables[0].traces[1]
    return CheckResult("constant spectrum of the degenerate family", ok,
                       f"fixed-point traces {np.round(fixed, 9).tolist()}")


def check_unity_invariance(rng) -> CheckResult:
    f = _random_map(rng, 3)
    base = trace_spectrum(f, 2)
    ok = True
    for alpha in unity_group(f.degree):
        ok &= bool(spectra_equal(base, trace_spectrum(unity_action(f, alpha), 2), tol=1e-8))
    return CheckResult("unity-action invariance", ok, f"{len(unity_group(f.degree))} roots of unity")


CHECKS: List[Callable] = [
    check_green_functional_equation,
    check_bottcher_functional_equation,
    check_jacobian_identity,
    check_inverse_normal_form,
    check_fixed_point_counts,
    check_degenerate_spectrum,
    check_unity_invariance,
]


def run_selftest(seed: int = SEED) -> SelftestReport:
    rng = np.random.default_rng(seed)
    results = []
    for check in CHECKS:
        try:
            result = check(rng)
        except Exception as e:  # a crashing check is a failed check
            result = CheckResult(check.__name__.replace("check_", "").replace("_", " "), False,
                                 f"{type(e).__name__}: {e}")
        (logger.success if result.passed else logger.error)(f"{result.name}: {result.detail}")
        results.append(result)
    return SelftestReport(results)
