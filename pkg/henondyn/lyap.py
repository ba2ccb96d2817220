"""
Lyapunov exponents of the equilibrium measure and the disconnectedness certificate

chi^+ is estimated from the unstable multipliers of saddle cycles of exact
period n; the estimate is checked against the escape-rate sandwich

    log d + M - (1 / min d_i) log(4/3)  <=  chi^+  <=  log d + d M + d log(15 d).

The geometric part verifies that a factor is a crossed mapping of degree d from
D(0, 10R)^2 onto D(0, 6^d R^d) x D(0, 10R) and builds the fold around a dominant
critical value whose component has horizontal degree q >= 2.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy import ndimage

from .common.errors import ConvergenceError, DomainError, HypothesisError
from .common.logging import logger
from .common.schemas import BoundsModel, CrossedMapModel, FoldModel, LyapunovModel, complex_to_pair
from .henon_core import (
    HenonComposition,
    HenonFactor,
    bottcher_plus,
    escape_rate_M,
    inverse_normal_form,
    jacobian_const,
)
from .periodic import BUDGET, periodic_points
from .poly1d import DEFAULT_TOL, argument_principle_count, critical_points, green_p, max_escape_rate, polynomial_roots

LYAPUNOV_SLACK = 0.05
CROSSED_SAMPLES = 4096
MIN_CROSSED_SAMPLES = 1024
CROSSED_MARGIN = 2.0
FOLD_GRID = 801
FOLD_LINES = 10
FOLD_FIBER_FRACTION = 0.25


def escape_threshold(d: int) -> float:
    """Escape rate M above which the fold construction is guaranteed to work"""
    if d <= 4:
        return 9.0
    radius = max((3200.0 * d) ** (1.0 / (d - 1)), 30.0 * d * 12.0 ** ((d - 1) / 2.0))
    return math.log(radius)


# --------------------------------------------------------------------------
# Sandwich bounds
# --------------------------------------------------------------------------

@dataclass
class LyapunovBounds:
    M: float
    lower: float
    upper: float
    lower_applicable: bool
    upper_applicable: bool
    reasons: List[str] = field(default_factory=list)


def lyapunov_bounds(f: HenonComposition, tol: float = DEFAULT_TOL) -> LyapunovBounds:
    """Both sides of the chi^+ sandwich together with their applicability"""
    rate = escape_rate_M(f, tol)
    d = f.degree
    dmin = min(f.multidegree)
    upper = math.log(d) + d * rate.M + d * math.log(15 * d)
    lower = math.log(d) + rate.M - math.log(4.0 / 3.0) / dmin
    reasons = []

    upper_ok = True
    lower_ok = True
    for i, h in enumerate(f.factors, start=1):
        bound = rate.R ** (h.degree - 1)
        if abs(h.a) > bound * (1 + 1e-12):
            upper_ok = False
            reasons.append(f"factor {i}: |a|={abs(h.a):.6g} > R^(d_i-1)={bound:.6g}")
        if abs(h.a) > bound / (400 * h.degree) * (1 + 1e-12):
            lower_ok = False
            reasons.append(f"factor {i}: |a|={abs(h.a):.6g} > R^(d_i-1)/(400 d_i)={bound / (400 * h.degree):.6g}")
    threshold = escape_threshold(max(f.multidegree))
    if rate.M < threshold:
        lower_ok = False
        reasons.append(f"M={rate.M:.6g} below the escape threshold {threshold:.6g}")
    return LyapunovBounds(M=rate.M, lower=lower, upper=upper, lower_applicable=lower_ok,
                          upper_applicable=upper_ok, reasons=reasons)


@dataclass
class BoundsReport:
    chi_estimate: float
    bounds: LyapunovBounds

    @property
    def lower_margin(self) -> float:
        return self.chi_estimate - self.bounds.lower

    @property
    def upper_margin(self) -> float:
        return self.bounds.upper - self.chi_estimate

    @property
    def passed(self) -> Optional[bool]:
        """None when neither bound applies"""
        checks = []
        if self.bounds.lower_applicable:
            checks.append(self.lower_margin >= 0)
        if self.bounds.upper_applicable:
            checks.append(self.upper_margin >= 0)
        return all(checks) if checks else None

    def to_model(self) -> BoundsModel:
        return BoundsModel(
            chi_estimate=self.chi_estimate, escape_rate=self.bounds.M,
            lower=self.bounds.lower, upper=self.bounds.upper,
            lower_applicable=self.bounds.lower_applicable, upper_applicable=self.bounds.upper_applicable,
            lower_margin=self.lower_margin, upper_margin=self.upper_margin,
            passed=self.passed, reasons=list(self.bounds.reasons))


def verify_lyapunov_bounds(f: HenonComposition, chi_estimate: float, tol: float = DEFAULT_TOL) -> BoundsReport:
    report = BoundsReport(chi_estimate=float(chi_estimate), bounds=lyapunov_bounds(f, tol))
    if report.passed is None:
        logger.warning("Lyapunov bounds not applicable: " + "; ".join(report.bounds.reasons))
    elif not report.passed:
        logger.warning(f"chi estimate {chi_estimate:.6g} outside the applicable bounds "
                       f"[{report.bounds.lower:.6g}, {report.bounds.upper:.6g}]")
    return report


# --------------------------------------------------------------------------
# chi^+ from saddle cycles
# --------------------------------------------------------------------------

@dataclass
class LyapunovReport:
    map: HenonComposition
    period_used: int
    saddle_count: int
    chi_plus_estimate: Optional[float]
    chi_minus: Optional[float]
    chi_minus_stable_mean: Optional[float]
    spread: Optional[float]
    bound_lower: Optional[float]
    bound_upper: Optional[float]
    hypotheses_ok: bool
    status: str
    method: str = "direct"

    def to_model(self) -> LyapunovModel:
        return LyapunovModel(
            map=self.map.to_model(), chi_plus_estimate=self.chi_plus_estimate, chi_minus=self.chi_minus,
            chi_minus_stable_mean=self.chi_minus_stable_mean, period_used=self.period_used,
            saddle_count=self.saddle_count, spread=self.spread, bound_lower=self.bound_lower,
            bound_upper=self.bound_upper, hypotheses_ok=self.hypotheses_ok, status=self.status,
            method=self.method)


def chi_plus_periodic(f: HenonComposition, n: int, method: str = "auto", budget: int = BUDGET,
                      seed: int = 0, workers: Optional[int] = None,
                      slack: float = LYAPUNOV_SLACK, tol: float = DEFAULT_TOL) -> LyapunovReport:
    """Mean of n^{-1} log|lambda^u| over the saddle points of exact period n"""
    found = periodic_points(f, n, method=method, budget=budget, seed=seed, workers=workers)
    saddles = found.saddles()
    bounds = lyapunov_bounds(f, tol)
    log_jac = math.log(abs(jacobian_const(f)))

    report = LyapunovReport(
        map=f, period_used=n, saddle_count=sum(r.count for r in saddles),
        chi_plus_estimate=None, chi_minus=None, chi_minus_stable_mean=None, spread=None,
        bound_lower=bounds.lower if bounds.lower_applicable else None,
        bound_upper=bounds.upper if bounds.upper_applicable else None,
        hypotheses_ok=bounds.lower_applicable and bounds.upper_applicable,
        status="inconclusive")
    if not saddles:
        logger.warning(f"no saddle cycles of exact period {n}; chi^+ estimate inconclusive")
        return report

    weights = np.array([r.count for r in saddles], dtype=float)
    unstable = np.array([r.chi_unstable() for r in saddles])
    stable = np.array([r.chi_stable() for r in saddles])
    chi = float(np.average(unstable, weights=weights))
    report.chi_plus_estimate = chi
    report.chi_minus = log_jac - chi
    report.chi_minus_stable_mean = float(np.average(stable, weights=weights))
    report.spread = float(unstable.max() - unstable.min())
    report.status = "complete" if found.complete else "partial"

    if chi < math.log(f.degree) - slack:
        logger.warning(f"chi^+ estimate {chi:.6g} below log d - {slack:g}; period {n} may be too small")
    logger.info(f"chi^+ ~ {chi:.6g} from {report.saddle_count} saddle points (spread {report.spread:.3g})")
    return report


def chi_plus_via_inverse(f: HenonComposition, n: int, method: str = "auto", budget: int = BUDGET,
                         seed: int = 0, workers: Optional[int] = None,
                         tol: float = DEFAULT_TOL) -> LyapunovReport:
    """chi^+(f) = log|jac f| + chi^+(g) with g the inverse normal form of f"""
    g = inverse_normal_form(f)
    inner = chi_plus_periodic(g, n, method=method, budget=budget, seed=seed, workers=workers, tol=tol)
    bounds = lyapunov_bounds(f, tol)
    log_jac = math.log(abs(jacobian_const(f)))
    report = LyapunovReport(
        map=f, period_used=n, saddle_count=inner.saddle_count,
        chi_plus_estimate=None, chi_minus=None, chi_minus_stable_mean=None, spread=inner.spread,
        bound_lower=bounds.lower if bounds.lower_applicable else None,
        bound_upper=bounds.upper if bounds.upper_applicable else None,
        hypotheses_ok=bounds.lower_applicable and bounds.upper_applicable,
        status=inner.status, method="inverse")
    if inner.chi_plus_estimate is not None:
        report.chi_minus = -inner.chi_plus_estimate
        report.chi_plus_estimate = log_jac + inner.chi_plus_estimate
        report.chi_minus_stable_mean = -inner.chi_minus_stable_mean
    return report


# --------------------------------------------------------------------------
# Crossed mappings
# --------------------------------------------------------------------------

@dataclass
class CrossedMapReport:
    ok: bool
    radius: float
    degree: Optional[int]
    min_ratio: float
    witness: Optional[tuple] = None

    def __bool__(self):
        return self.ok

    def to_model(self) -> CrossedMapModel:
        witness = None
        if self.witness is not None:
            witness = [complex_to_pair(self.witness[0]), complex_to_pair(self.witness[1])]
        return CrossedMapModel(ok=self.ok, radius=self.radius, degree=self.degree,
                               min_ratio=self.min_ratio, witness=witness)


def crossed_map_check(h: HenonFactor, R: float, samples: int = CROSSED_SAMPLES,
                      tol: float = DEFAULT_TOL) -> CrossedMapReport:
    """Sample the vertical boundary of D(0, 10R)^2 and count the horizontal degree.

    Passes when |p(x) + a y| >= 2 * 6^d R^d on {|x| = 10R, |y| <= 10R} and the
    image of every sampled horizontal line covers the target with degree d.
    """
    d = h.degree
    if samples < MIN_CROSSED_SAMPLES:
        raise DomainError(f"need at least {MIN_CROSSED_SAMPLES} boundary samples, got {samples}")
    R_h = max_escape_rate(h.p, tol).R
    if R < R_h * (1 - 1e-9):
        raise HypothesisError(f"radius {R:.6g} is below the escape scale R_h={R_h:.6g}")
    if abs(h.a) > R ** (d - 1) * (1 + 1e-12):
        raise HypothesisError(f"|a|={abs(h.a):.6g} exceeds R^(d-1)={R ** (d - 1):.6g}")

    outer = 10.0 * R
    target = (6.0 * R) ** d
    theta = 2 * np.pi * np.arange(samples) / samples
    xs = outer * np.exp(1j * theta)
    px = h.p(xs)
    # the minimum over |y| <= 10R of |p(x) + a y| is attained with a y antiparallel to p(x)
    ratios = (np.abs(px) - outer * abs(h.a)) / target
    worst = int(np.argmin(ratios))
    min_ratio = float(ratios[worst])
    ok = min_ratio >= CROSSED_MARGIN

    degrees = set()
    for y0 in (0j, outer * 0.5, outer * 1j, -outer):
        try:
            degrees.add(argument_principle_count(lambda x: h.p(x) + h.a * y0, 0j, outer, samples))
        except ConvergenceError:
            degrees.add(-1)
    degree = degrees.pop() if len(degrees) == 1 else None
    if degree != d:
        ok = False

    witness = None
    if not ok:
        x_w = complex(xs[worst])
        p_w = complex(px[worst])
        y_w = -outer * abs(h.a) * (p_w / abs(p_w)) / h.a if p_w != 0 else 0j
        witness = (x_w, y_w)
        logger.warning(f"crossed mapping check failed at R={R:.6g}: min ratio {min_ratio:.4g}, degree {degree}")
    return CrossedMapReport(ok=ok, radius=float(R), degree=degree, min_ratio=min_ratio, witness=witness)


# --------------------------------------------------------------------------
# Fold certificate
# --------------------------------------------------------------------------

@dataclass
class FoldCertificate:
    status: str
    reason: str = ""
    rigorous: bool = False
    s: Optional[float] = None
    s_star: Optional[float] = None
    annulus_index: Optional[int] = None
    q: Optional[int] = None
    critical_point: Optional[complex] = None
    critical_value: Optional[complex] = None
    disk_radius: Optional[float] = None
    escape_rate: Optional[float] = None
    factor_index: Optional[int] = None
    projection: Optional[str] = None
    horizontal_degrees: List[int] = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.status == "certified"

    def to_model(self) -> FoldModel:
        return FoldModel(
            status=self.status, reason=self.reason, rigorous=self.rigorous, s=self.s, s_star=self.s_star,
            annulus_index=self.annulus_index, q=self.q,
            critical_point=None if self.critical_point is None else complex_to_pair(self.critical_point),
            critical_value=None if self.critical_value is None else complex_to_pair(self.critical_value),
            disk_radius=self.disk_radius, escape_rate=self.escape_rate, factor_index=self.factor_index,
            projection=self.projection, horizontal_degrees=list(self.horizontal_degrees))


def _dominant_rotation(f: HenonComposition, tol: float) -> int:
    """Shift that moves the factor with the largest escape rate to the last position"""
    rates = [max_escape_rate(h.p, tol).M for h in f.factors]
    best = int(np.argmax(rates))
    return (best + 1) % f.k


def _select_annulus(v: complex, values: np.ndarray, disk: float, scale: float, d: int):
    """First of the 2d annuli around v, radii s_k scale with s_k = 1 + k/(2d), missing every critical-value disk"""
    dist = np.abs(values - v)
    for k in range(1, 2 * d + 1):
        inner = (1.0 + (k - 1) / (2.0 * d)) * scale
        outer = (1.0 + k / (2.0 * d)) * scale
        if np.all((dist + disk < inner) | (dist - disk > outer)):
            return k
    return None


def _pixel(xs: np.ndarray, t: complex):
    step = xs[1] - xs[0]
    col = int(round((t.real - xs[0]) / step))
    row = int(round((t.imag - xs[0]) / step))
    return row, col


def _label_at(labels: np.ndarray, xs: np.ndarray, t: complex) -> int:
    row, col = _pixel(xs, t)
    n = labels.shape[0]
    if not (0 <= row < n and 0 <= col < n):
        return 0
    if labels[row, col]:
        return int(labels[row, col])
    patch = labels[max(row - 1, 0):row + 2, max(col - 1, 0):col + 2]
    nonzero = np.unique(patch[patch > 0])
    return int(nonzero[0]) if nonzero.size == 1 else 0


def _bottcher_root(f: HenonComposition, h: HenonFactor, y: complex, w: complex, t0: complex,
                   tol: float, max_iter: int = 30) -> Optional[complex]:
    """Newton on t -> phi_f(h(t, y)) - w, started at t0"""
    t = t0
    for _ in range(max_iter):
        eps = 1e-7 * (1.0 + abs(t))
        g0 = bottcher_plus(f, h(t, y), tol) - w
        slope = (bottcher_plus(f, h(t + eps, y), tol) - bottcher_plus(f, h(t - eps, y), tol)) / (2 * eps)
        if slope == 0:
            return None
        step = g0 / slope
        t -= step
        if abs(step) <= 1e-12 * (1.0 + abs(t)):
            return t
    return None


def _component_degree(f, h, y, v, w, radius, c, R, projection, tol, grid) -> Optional[int]:
    """Horizontal degree of the component of h(D(0,10R) x {y}) over D(v, radius) through c"""
    xs = np.linspace(-10.0 * R, 10.0 * R, grid)
    plane = xs[None, :] + 1j * xs[:, None]
    with np.errstate(over="ignore", invalid="ignore"):
        mask = (np.abs(plane) <= 10.0 * R) & (np.abs(h.p(plane) + h.a * y - v) < radius)
    labels, _ = ndimage.label(mask)
    target = _label_at(labels, xs, c)
    if target == 0:
        return None

    coeffs = h.p.full_coefficients()
    coeffs[-1] += h.a * y - w
    roots = polynomial_roots(coeffs)
    if projection == "bottcher":
        polished = []
        for t0 in roots:
            t = _bottcher_root(f, h, y, w, complex(t0), tol)
            if t is None:
                return None
            polished.append(t)
        roots = np.array(polished)
    return sum(1 for t in roots if _label_at(labels, xs, complex(t)) == target)


def fold_certificate(f: HenonComposition, tol: float = DEFAULT_TOL, grid: int = FOLD_GRID,
                     lines: int = FOLD_LINES) -> FoldCertificate:
    """Solenoidal fold around a dominant critical value, certifying a disconnected Julia set.

    Returns a certificate with status 'certified' (q >= 2), 'hypotheses-unmet'
    or 'inconclusive'. The construction is rigorous when M(f) reaches the
    escape threshold; below it the same steps run as a numerical check.
    """
    rate = escape_rate_M(f, tol)
    M, R = rate.M, rate.R
    if M <= tol:
        return FoldCertificate(status="hypotheses-unmet", reason=f"M(f)={M:.3g} vanishes", escape_rate=M)
    for i, factor in enumerate(f.factors, start=1):
        bound = R ** (factor.degree - 1) / (400 * factor.degree)
        if abs(factor.a) > bound * (1 + 1e-12):
            return FoldCertificate(
                status="hypotheses-unmet", escape_rate=M,
                reason=f"factor {i}: |a|={abs(factor.a):.6g} > R^(d_i-1)/(400 d_i)={bound:.6g}")

    shift = _dominant_rotation(f, tol)
    g = f.rotated(shift)
    h = g.factors[-1]
    factor_index = (shift - 1) % f.k + 1
    d = h.degree
    crit = critical_points(h.p)
    greens = np.array([green_p(h.p, c0, tol) for c0 in crit])
    c = complex(crit[int(np.argmax(greens))])
    v = complex(h.p(c))
    disk = 10.0 * R * abs(h.a)
    scale = R ** d / 8.0
    cert = FoldCertificate(status="inconclusive", rigorous=M >= escape_threshold(d), critical_point=c,
                           critical_value=v, escape_rate=M, factor_index=factor_index)

    k_star = _select_annulus(v, h.p(crit), disk, scale, d)
    if k_star is None:
        cert.reason = "every annulus meets a critical-value disk"
        return cert
    s_star = 1.0 + (2 * k_star - 1) / (4.0 * d)
    cert.annulus_index = k_star
    cert.s_star = s_star
    cert.s = s_star - 1.0 / (100 * d)
    radius = s_star * scale
    cert.disk_radius = radius

    # vertical boundary of D(0, 10R)^2 must land outside the target disk
    edge = 10.0 * R * np.exp(2j * np.pi * np.arange(CROSSED_SAMPLES) / CROSSED_SAMPLES)
    if np.min(np.abs(h.p(edge) - v)) - 10.0 * R * abs(h.a) <= radius:
        cert.reason = "vertical boundary meets the target disk"
        return cert

    cert.projection = "bottcher" if abs(v) - radius >= 12.0 * g.degree * R else "linear"
    lines_y = [0j] + [9.0 * R * cmath.exp(2j * math.pi * j / (lines - 1)) for j in range(1, lines)]
    degrees = []
    for j, y in enumerate(lines_y):
        w = v + FOLD_FIBER_FRACTION * cert.s * scale * cmath.exp(2j * math.pi * (j + 0.5) / lines)
        try:
            q_j = _component_degree(g, h, y, v, w, radius, c, R, cert.projection, tol, grid)
        except (ConvergenceError, DomainError) as e:
            logger.warning(f"fold: degree count failed on line y={y:.4g}: {e}")
            q_j = None
        if q_j is None:
            cert.reason = f"degree count failed on the horizontal line y={y:.6g}"
            return cert
        degrees.append(q_j)
    cert.horizontal_degrees = degrees

    if len(set(degrees)) != 1:
        cert.reason = f"unstable degree count {degrees}"
        logger.warning(f"fold: {cert.reason}")
        return cert
    cert.q = degrees[0]
    if cert.q >= 2:
        cert.status = "certified"
        logger.success(f"solenoidal component of degree q={cert.q} around v={v:.6g}")
    else:
        cert.reason = "component through the critical point has degree 1"
    return cert
