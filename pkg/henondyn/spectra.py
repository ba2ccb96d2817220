"""
Trace and multiplier spectra

A SpectrumTable holds, for each period n <= P, the multiset of traces of
D f^n over Fix(f^n) (with multiplicity) together with its exact-period
partition and the unstable multipliers of saddles of exact period n.
Multisets are compared by optimal assignment.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial
from scipy.ndimage import minimum_filter
from scipy.optimize import least_squares, linear_sum_assignment

from .common.errors import BudgetExceededError, DomainError
from .common.logging import logger
from .common.schemas import (
    ExceptionalModel,
    IsospectralMatchModel,
    IsospectralModel,
    SpectrumComparisonModel,
    SpectrumModel,
    complex_to_pair,
)
from .common.utils import resolve_workers
from .henon_core import HenonComposition, HenonFactor, differential, evaluate, jacobian_const, unity_action, unity_group
from .periodic import BUDGET, periodic_points
from .poly1d import MonicCenteredPolynomial, polynomial_roots

MAX_CELLS = 250_000
MAX_CANDIDATES = 64
POLISH_TOL = 1e-7
DEDUP_TOL = 1e-6


@dataclass
class SpectrumTable:
    jacobian: complex
    degree: int
    max_period: int
    traces: Dict[int, np.ndarray]
    unstable: Dict[int, np.ndarray]
    status: Dict[int, str]
    exact_traces: Dict[int, Dict[int, np.ndarray]] = field(default_factory=dict)
    flagged: Dict[int, int] = field(default_factory=dict)
    flagged_traces: Dict[int, np.ndarray] = field(default_factory=dict, repr=False)
    map: Optional[HenonComposition] = None

    @property
    def complete(self) -> bool:
        return all(s == "complete" for s in self.status.values())

    def formal_traces(self, n: int) -> np.ndarray:
        """Traces at exact period n plus the flagged lower-period entries kept in Per_n^*"""
        parts = [self.exact_traces.get(n, {}).get(n, np.empty(0, dtype=complex))]
        if self.flagged.get(n):
            parts.append(self.flagged_traces.get(n, np.empty(0, dtype=complex)))
        return np.concatenate(parts)

    def to_model(self) -> SpectrumModel:
        def pairs(values):
            return [complex_to_pair(v) for v in values]

        return SpectrumModel(
            map=self.map.to_model(),
            jacobian=complex_to_pair(self.jacobian),
            degree=self.degree,
            max_period=self.max_period,
            traces={str(n): pairs(v) for n, v in self.traces.items()},
            exact_traces={str(n): {str(m): pairs(v) for m, v in parts.items()}
                          for n, parts in self.exact_traces.items()},
            unstable={str(n): pairs(v) for n, v in self.unstable.items()},
            status={str(n): s for n, s in self.status.items()},
            flagged={str(n): c for n, c in self.flagged.items()},
        )


def trace_spectrum(f: HenonComposition, P: int, method: str = "auto", budget: int = BUDGET,
                   seed: int = 0, workers: Optional[int] = None) -> SpectrumTable:
    if f.degree ** P > budget:
        raise BudgetExceededError(
            f"d^P = {f.degree ** P} exceeds the budget {budget}", requested=f.degree ** P, budget=budget)
    table = SpectrumTable(jacobian=jacobian_const(f), degree=f.degree, max_period=P,
                          traces={}, unstable={}, status={}, map=f)
    for n in range(1, P + 1):
        result = periodic_points(f, n, method=method, budget=budget, seed=seed, workers=workers)
        table.traces[n] = np.array([r.trace for r in result for _ in range(r.count)], dtype=complex)
        parts: Dict[int, List[complex]] = {}
        flagged: List[complex] = []
        for r in result:
            parts.setdefault(r.exact_period, []).extend([r.trace] * r.count)
            if r.exact_period < n and r.unit_eigenvalue:
                flagged.extend([r.trace] * r.count)
        table.exact_traces[n] = {m: np.array(v, dtype=complex) for m, v in sorted(parts.items())}
        table.unstable[n] = np.array([r.unstable for r in result.saddles() for _ in range(r.count)],
                                     dtype=complex)
        table.status[n] = result.status
        table.flagged[n] = len(flagged)
        table.flagged_traces[n] = np.array(flagged, dtype=complex)
    return table


# --------------------------------------------------------------------------
# Comparison
# --------------------------------------------------------------------------

@dataclass
class SpectrumComparison:
    equal: bool
    max_distance: float
    worst_period: Optional[int] = None
    worst_pair: Optional[Tuple[complex, complex]] = None
    reason: str = ""

    def __bool__(self):
        return self.equal

    def to_model(self) -> SpectrumComparisonModel:
        return SpectrumComparisonModel(
            equal=self.equal, max_distance=self.max_distance, worst_period=self.worst_period,
            worst_pair=None if self.worst_pair is None else [complex_to_pair(v) for v in self.worst_pair],
            reason=self.reason)


def match_multisets(u: Sequence[complex], v: Sequence[complex]) -> Tuple[float, Optional[Tuple[complex, complex]]]:
    """Largest distance of the optimal assignment between two equal-size multisets"""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.size == 0:
        return 0.0, None
    cost = np.abs(u[:, None] - v[None, :])
    rows, cols = linear_sum_assignment(cost)
    matched = cost[rows, cols]
    worst = int(np.argmax(matched))
    return float(matched[worst]), (complex(u[rows[worst]]), complex(v[cols[worst]]))


def spectra_equal(s1: SpectrumTable, s2: SpectrumTable, tol: float = 1e-8) -> SpectrumComparison:
    if s1.degree != s2.degree or s1.max_period != s2.max_period:
        return SpectrumComparison(False, math.inf, reason=(
            f"tables differ in shape: degree {s1.degree} vs {s2.degree}, "
            f"max period {s1.max_period} vs {s2.max_period}"))
    notes = []
    worst = SpectrumComparison(True, 0.0)
    for n in range(1, s1.max_period + 1):
        u, v = s1.traces[n], s2.traces[n]
        if u.size != v.size:
            return SpectrumComparison(False, math.inf, worst_period=n,
                                      reason=f"period {n}: multiset sizes {u.size} vs {v.size}")
        if s1.status.get(n) != "complete" or s2.status.get(n) != "complete":
            notes.append(f"period {n} partial")
        dist, pair = match_multisets(u, v)
        if dist >= worst.max_distance:
            worst = SpectrumComparison(True, dist, worst_period=n, worst_pair=pair)
    worst.equal = worst.max_distance <= tol
    if not worst.equal:
        notes.insert(0, f"period {worst.worst_period}: traces {worst.worst_pair[0]:.6g} and "
                        f"{worst.worst_pair[1]:.6g} differ by {worst.max_distance:.3e}")
    worst.reason = "; ".join(notes)
    return worst


# --------------------------------------------------------------------------
# Batched closed-form traces for single Hénon maps, periods 1 and 2
# --------------------------------------------------------------------------

def _batched_roots(coeffs: np.ndarray) -> np.ndarray:
    """Roots of each row (highest degree first) via companion-matrix eigenvalues"""
    c = coeffs / coeffs[:, :1]
    m = c.shape[1] - 1
    companion = np.zeros((c.shape[0], m, m), dtype=complex)
    companion[:, 0, :] = -c[:, 1:]
    companion[:, np.arange(1, m), np.arange(m - 1)] = 1.0
    return np.linalg.eigvals(companion)


def _batched_polyval(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    acc = np.broadcast_to(coeffs[:, :1], x.shape).astype(complex)
    for j in range(1, coeffs.shape[1]):
        acc = acc * x + coeffs[:, j:j + 1]
    return acc


def _batched_polymul(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    out = np.zeros((u.shape[0], u.shape[1] + v.shape[1] - 1), dtype=complex)
    for i in range(u.shape[1]):
        out[:, i:i + v.shape[1]] += u[:, i:i + 1] * v
    return out


def _batched_self_compose(q: np.ndarray) -> np.ndarray:
    """Coefficients of q o q for each row"""
    out = q[:, :1].astype(complex)
    for j in range(1, q.shape[1]):
        out = _batched_polymul(out, q)
        out[:, -1] += q[:, j]
    return out


def closed_form_traces(a: np.ndarray, coeffs: np.ndarray, P: int) -> Dict[int, np.ndarray]:
    """Fix-level trace multisets of (a y + p(x), x) for a batch of maps.

    a has shape (B,), coeffs (B, d-1) holds a_0 .. a_{d-2}. Fix(f^2) traces are
    p'(x) p'(q(x)) + 2a over the roots of q o q(x) = x, q = p/(1-a), fixed
    points included; at a = 1 they are p'(x0) p'(x1) + 2 over pairs of roots of p.
    """
    a = np.asarray(a, dtype=complex)
    coeffs = np.asarray(coeffs, dtype=complex)
    batch, d = coeffs.shape[0], coeffs.shape[1] + 1
    ones = np.ones((batch, 1), dtype=complex)
    p_high = np.concatenate([ones, np.zeros((batch, 1)), coeffs[:, ::-1]], axis=1)
    dp_high = p_high[:, :-1] * np.arange(d, 0, -1)

    fixed = p_high.copy()
    fixed[:, -2] -= 1.0 - a
    out = {1: _batched_polyval(dp_high, _batched_roots(fixed))}
    if P < 2:
        return out

    unit = np.abs(a - 1.0) < 1e-14
    safe_a = np.where(unit, 0.5, a)
    q = p_high / (1.0 - safe_a)[:, None]
    qq = _batched_self_compose(q)
    qq[:, -2] -= 1.0
    x = _batched_roots(qq)
    traces2 = _batched_polyval(dp_high, x) * _batched_polyval(dp_high, _batched_polyval(q, x)) + 2 * a[:, None]
    if unit.any():
        roots = _batched_roots(p_high[unit])
        dpr = _batched_polyval(dp_high[unit], roots)
        traces2[unit] = (dpr[:, :, None] * dpr[:, None, :]).reshape(-1, d * d) + 2 * a[unit, None]
    out[2] = traces2
    return out


def symmetric_features(values: np.ndarray) -> np.ndarray:
    """Coefficients e_1 .. e_m of prod (t - v_i), smooth in the parameters even where values collide"""
    coeffs = np.ones((values.shape[0], 1), dtype=complex)
    for j in range(values.shape[1]):
        factor = np.stack([np.ones(values.shape[0], dtype=complex), -values[:, j]], axis=1)
        coeffs = _batched_polymul(coeffs, factor)
    return coeffs[:, 1:]


# --------------------------------------------------------------------------
# Isospectral search
# --------------------------------------------------------------------------

SEARCH_MODES = ("fixed-jac", "free-jac", "huguin-p2")


@dataclass
class SearchBox:
    """Cube of half-width ``radius`` around ``center`` in complex parameter coordinates.

    Without a family the coordinates are the polynomial coefficients of all
    factors (fixed-jac, huguin-p2) or the Jacobian parameters followed by the
    coefficients (free-jac). A family maps a coordinate vector to a composition.
    """

    radius: float
    center: Optional[Sequence[complex]] = None
    family: Optional[Callable[[np.ndarray], HenonComposition]] = None


@dataclass
class IsospectralMatch:
    map: HenonComposition
    params: np.ndarray
    distance: float


@dataclass
class IsospectralResult:
    base: HenonComposition
    mode: str
    max_period: int
    matches: List[IsospectralMatch]
    cells_scanned: int
    status: str = "complete"

    def __iter__(self):
        return iter(self.matches)

    def __len__(self):
        return len(self.matches)

    def __getitem__(self, item):
        return self.matches[item]

    def to_model(self) -> IsospectralModel:
        return IsospectralModel(
            base=self.base.to_model(), mode=self.mode, max_period=self.max_period,
            cells_scanned=self.cells_scanned, status=self.status,
            matches=[IsospectralMatchModel(map=m.map.to_model(), distance=m.distance) for m in self.matches])


class _Coordinates:
    def __init__(self, base: HenonComposition, mode: str, box: SearchBox):
        self.base = base
        self.mode = mode
        self.family = box.family
        if box.family is not None:
            if box.center is None:
                raise DomainError("a family search box needs an explicit center")
            self.center = np.asarray(box.center, dtype=complex)
        else:
            self.center = self._default_center() if box.center is None else np.asarray(box.center, dtype=complex)
            if self.center.size != self._default_center().size:
                raise DomainError(f"box center needs {self._default_center().size} coordinates")

    def _default_center(self) -> np.ndarray:
        coeffs = [c for h in self.base.factors for c in h.p.coeffs]
        if self.mode == "free-jac":
            return np.array(list(self.base.multi_jacobian) + coeffs, dtype=complex)
        return np.array(coeffs, dtype=complex)

    def build(self, params: np.ndarray) -> Optional[HenonComposition]:
        if self.family is not None:
            return self.family(params)
        params = list(params)
        if self.mode == "free-jac":
            jacs, params = params[:self.base.k], params[self.base.k:]
        else:
            jacs = list(self.base.multi_jacobian)
        if any(abs(a) < 1e-12 for a in jacs):
            return None
        factors = []
        for a, h in zip(jacs, self.base.factors):
            n = h.degree - 1
            factors.append(HenonFactor(a, MonicCenteredPolynomial(h.degree, tuple(params[:n]))))
            params = params[n:]
        return HenonComposition(tuple(factors))


def _features_closed_form(maps: List[HenonComposition], P: int, mode: str) -> np.ndarray:
    a = np.array([f.factors[0].a for f in maps], dtype=complex)
    coeffs = np.array([f.factors[0].p.coeffs for f in maps], dtype=complex)
    traces = closed_form_traces(a, coeffs, P)
    if mode == "huguin-p2":
        traces = {1: traces[1] / (1 - a)[:, None], 2: (traces[2] - 2 * a[:, None]) / ((1 - a) ** 2)[:, None]}
    return np.concatenate([symmetric_features(traces[n]) for n in sorted(traces)], axis=1)


def _features_general(f: HenonComposition, P: int) -> np.ndarray:
    table = trace_spectrum(f, P, method="auto")
    return np.concatenate([symmetric_features(table.traces[n][None, :])[0] for n in range(1, P + 1)])


class _Objective:
    def __init__(self, coords: _Coordinates, P: int, mode: str, workers: int):
        self.coords = coords
        self.P = P
        self.mode = mode
        self.workers = workers
        base_maps = [coords.base]
        self.closed = coords.base.k == 1 and P <= 2
        self.target = self.features(base_maps)[0]
        self.weights = 1.0 / (1.0 + np.abs(self.target))

    def features(self, maps: List[Optional[HenonComposition]]) -> np.ndarray:
        """Feature rows for a batch of maps; rows of missing maps are NaN"""
        valid_idx = [i for i, m in enumerate(maps) if m is not None]
        if not valid_idx:
            return np.full((len(maps), self.target.size), np.nan, dtype=complex)
        valid = [maps[i] for i in valid_idx]
        degree = self.coords.base.degree
        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            if self.closed and all(m.k == 1 and m.degree == degree for m in valid):
                chunks = np.array_split(np.arange(len(valid)), min(self.workers, len(valid)))
                feats = np.concatenate(list(executor.map(
                    lambda idx: _features_closed_form([valid[i] for i in idx], self.P, self.mode), chunks)))
            else:
                feats = np.array(list(executor.map(lambda m: _features_general(m, self.P), valid)))
        out = np.full((len(maps), feats.shape[1]), np.nan, dtype=complex)
        out[valid_idx] = feats
        return out

    def mismatch(self, maps) -> np.ndarray:
        diff = (self.features(maps) - self.target) * self.weights
        with np.errstate(invalid="ignore"):
            norm = np.max(np.abs(diff), axis=1)
        return np.where(np.isfinite(norm), norm, np.inf)

    def residual_real(self, x: np.ndarray) -> np.ndarray:
        params = x[0::2] + 1j * x[1::2]
        f = self.coords.build(params)
        if f is None:
            return np.full(2 * self.target.size, 1e6)
        diff = (self.features([f])[0] - self.target) * self.weights
        if not np.all(np.isfinite(diff)):
            return np.full(2 * self.target.size, 1e6)
        return np.concatenate([diff.real, diff.imag])


def _params_equal(u: np.ndarray, v: np.ndarray) -> bool:
    return u.shape == v.shape and float(np.max(np.abs(u - v))) <= DEDUP_TOL


def _same_up_to_unity(f: HenonComposition, g: HenonComposition) -> bool:
    def flat(h):
        return np.array(list(h.multi_jacobian) + [c for x in h.factors for c in x.p.coeffs], dtype=complex)

    target = flat(g)
    return any(_params_equal(flat(unity_action(f, alpha)), target) for alpha in unity_group(f.degree))


def isospectral_search(f0: HenonComposition, P: int, box: SearchBox, grid: int = 50, tol: float = 1e-6,
                       mode: str = "fixed-jac", max_cells: int = MAX_CELLS,
                       max_candidates: int = MAX_CANDIDATES, workers: Optional[int] = None) -> IsospectralResult:
    """Grid scan plus least-squares polishing of the trace-matching system.

    The smooth objective compares the coefficients of prod (t - tr) per period,
    so colliding traces do not create kinks. Every polished candidate is
    confirmed with spectra_equal at tolerance tol and deduplicated modulo the
    action of the (d-1)-th roots of unity.
    """
    if mode not in SEARCH_MODES:
        raise DomainError(f"mode must be one of {SEARCH_MODES}, got {mode!r}")
    if mode == "huguin-p2":
        if f0.k != 1 or f0.factors[0].a == 1:
            raise DomainError("huguin-p2 mode needs a single Hénon map with a != 1")
        P = 2
    workers = resolve_workers(workers)
    coords = _Coordinates(f0, mode, box)
    objective = _Objective(coords, P, mode, workers)
    dims = 2 * coords.center.size
    status = "complete"

    if box.radius <= 0:
        grid = 1
    if grid ** dims > max_cells:
        coarse = max(1, int(math.floor(max_cells ** (1.0 / dims))))
        logger.warning(f"grid {grid}^{dims} exceeds {max_cells} cells, coarsened to {coarse}^{dims}")
        grid, status = coarse, "partial"

    real_center = np.empty(dims)
    real_center[0::2], real_center[1::2] = coords.center.real, coords.center.imag
    axes = [np.linspace(c - box.radius, c + box.radius, grid) if grid > 1 else np.array([c]) for c in real_center]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dims)
    with logger.stage_context(f"Scanning {len(mesh)} cells"):
        maps = [coords.build(row[0::2] + 1j * row[1::2]) for row in mesh]
        landscape = objective.mismatch(maps)

    shaped = landscape.reshape((grid,) * dims)
    minima = (minimum_filter(shaped, size=3, mode="nearest") == shaped) & np.isfinite(shaped)
    order = np.argsort(landscape)
    candidates = [i for i in order if minima.reshape(-1)[i]][:max_candidates]

    base_table = trace_spectrum(f0, P, method="auto")
    lower = real_center - box.radius - 1e-12
    upper = real_center + box.radius + 1e-12
    matches: List[IsospectralMatch] = []
    for idx in candidates:
        x0 = mesh[idx]
        if box.radius > 0:
            fit = least_squares(objective.residual_real, x0, bounds=(lower, upper),
                                xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400)
            x = fit.x
        else:
            x = x0
        params = x[0::2] + 1j * x[1::2]
        f = coords.build(params)
        if f is None or objective.mismatch([f])[0] > POLISH_TOL:
            continue
        if any(_params_equal(params, m.params) for m in matches):
            continue
        if coords.family is None and any(_same_up_to_unity(f, m.map) for m in matches):
            continue
        comparison = spectra_equal(trace_spectrum(f, P, method="auto"), base_table, tol)
        if comparison.equal:
            matches.append(IsospectralMatch(map=f, params=params, distance=comparison.max_distance))
    logger.info(f"isospectral search: {len(candidates)} candidates polished, {len(matches)} matches")
    return IsospectralResult(base=f0, mode=mode, max_period=P, matches=matches,
                             cells_scanned=len(mesh), status=status)


# --------------------------------------------------------------------------
# Exceptional maps
# --------------------------------------------------------------------------

@dataclass
class ExceptionalResult:
    kappa: Optional[complex]
    status: str
    roots_of_unity: int = 1
    max_deviation: Optional[float] = None

    def to_model(self) -> ExceptionalModel:
        return ExceptionalModel(
            status=self.status, roots_of_unity=self.roots_of_unity, max_deviation=self.max_deviation,
            kappa=None if self.kappa is None else complex_to_pair(self.kappa))


def exceptional_test(source: Union[SpectrumTable, HenonComposition], P: int, tol: float = 1e-8,
                     roots_of_unity: int = 1) -> ExceptionalResult:
    """Look for kappa with λ^u in kappa^n F_q for every saddle of exact period n <= P.

    F_q is the group of q-th roots of unity (q = roots_of_unity), tested as
    (λ^u)^q = (kappa^q)^n. Candidates come from the smallest period with
    saddles; a branch-aligned log fit refines them before the strict check.
    """
    table = source if isinstance(source, SpectrumTable) else trace_spectrum(source, P)
    q = int(roots_of_unity)
    if q < 1:
        raise DomainError("roots_of_unity must be >= 1")
    data = {n: np.asarray(table.unstable.get(n, []), dtype=complex) ** q
            for n in range(1, P + 1) if len(table.unstable.get(n, []))}
    if not data:
        return ExceptionalResult(None, "inconclusive", q)

    n0 = min(data)
    first = complex(data[n0][0])
    best = None
    for j in range(n0):
        cand = cmath.exp((cmath.log(first) + 2j * math.pi * j) / n0)
        log_k = cmath.log(cand)
        num, den = 0j, 0
        for n, values in data.items():
            for v in values:
                lv = cmath.log(v)
                shift = round((n * log_k - lv).imag / (2 * math.pi))
                num += lv + 2j * math.pi * shift
                den += n
        big_k = cmath.exp(num / den)
        deviation = max(float(np.max(np.abs(values - big_k ** n) / abs(big_k ** n)))
                        for n, values in data.items())
        if best is None or deviation < best[1]:
            best = (big_k, deviation)

    big_k, deviation = best
    if deviation <= tol:
        return ExceptionalResult(big_k ** (1.0 / q), "exceptional", q, deviation)
    return ExceptionalResult(None, "not-exceptional", q, deviation)


# --------------------------------------------------------------------------
# One-variable reduction and trace growth
# --------------------------------------------------------------------------

@dataclass
class HuguinReport:
    q: Polynomial
    fixed_multipliers: np.ndarray
    period2_multipliers: np.ndarray
    fixed_residual: float
    period2_residual: float


def huguin_reduction(f: HenonComposition) -> HuguinReport:
    """q = p/(1-a), with fixed-point and period-2 traces of f checked against q.

    Traces at fixed points equal (1-a) q'(x0); traces of D f^2 at (x0, q(x0))
    equal (1-a)^2 (q o q)'(x0) + 2a, both sides computed independently.
    """
    if f.k != 1:
        raise DomainError("the one-variable reduction applies to a single Hénon map")
    h = f.factors[0]
    if h.a == 1:
        raise DomainError("a = 1 (Jacobian -1): q = p/(1-a) is undefined and the period-1/2 "
                          "data need not determine p")
    q = Polynomial(np.array(h.p.horner[::-1], dtype=complex) / (1 - h.a))
    dq = q.deriv()
    ident = Polynomial([0, 1])

    fixed = polynomial_roots((q - ident).coef[::-1])
    fixed_mult = dq(fixed)
    fixed_res = 0.0
    for x0, m in zip(fixed, fixed_mult):
        direct = np.trace(differential(f, (x0, x0)))
        fixed_res = max(fixed_res, abs(direct - (1 - h.a) * m))

    roots2 = polynomial_roots((q(q) - ident).coef[::-1])
    period2_mult = dq(q(roots2)) * dq(roots2)
    period2_res = 0.0
    for x0, m in zip(roots2, period2_mult):
        z = (x0, q(x0))
        direct = np.trace(differential(f, evaluate(f, z)) @ differential(f, z))
        period2_res = max(period2_res, abs(direct - ((1 - h.a) ** 2 * m + 2 * h.a)))
    return HuguinReport(q=q, fixed_multipliers=fixed_mult, period2_multipliers=period2_mult,
                        fixed_residual=float(fixed_res), period2_residual=float(period2_res))


def max_trace_growth(f: HenonComposition, n: int, method: str = "auto", seed: int = 0) -> float:
    """max over points of exact period n of n^{-1} log|tr D f^n|"""
    result = periodic_points(f, n, method=method, seed=seed)
    logs = [math.log(abs(r.trace)) / n for r in result.of_exact_period(n) if r.trace != 0]
    return max(logs) if logs else -math.inf
