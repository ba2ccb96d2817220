"""
Periodic points of Hénon compositions

Closed forms handle periods 1 and 2 of a single Hénon map; everything else
goes through a total-degree homotopy on the cyclic recurrence, whose Bezout
number equals #Fix(f^n) = d^n. Results are grouped into cycles, each carrying
the eigenvalues of D f^n and a multiplicity such that the counts add up to d^n.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from .common.errors import BudgetExceededError, ConvergenceError, DomainError
from .common.logging import logger
from .common.schemas import OrbitRecordModel, PeriodicSetModel, complex_to_hex, hex_to_complex
from .common.utils import resolve_workers
from .henon_core import HenonComposition, differential, escape_rate_M, evaluate, iterate, jacobian_const, sup_norm
from .poly1d import argument_principle_count, cluster_roots, linkage_labels, polynomial_roots
from .tracking import (CyclicSystem, TotalDegreeHomotopy, TrackerSettings, damped_newton, multistart_newton,
                       vector_point)

BUDGET = 4096
CLUSTER_FACTOR = 1e-6
SINGULAR_CLUSTER_FACTOR = 1e-4
SINGULAR_CONDITION = 1e7
NEUTRAL_MARGIN = 1e-9
UNIT_EIGEN_TOL = 1e-6
MULTISTART_FACTOR = 8

# Local degree check of multiple clusters; the ball radius is in singular cluster radii
LOCAL_DEGREE_SHIFT = 1e-12
LOCAL_DEGREE_RADIUS = 10.0
LOCAL_DEGREE_STARTS = 16
LOCAL_DEGREE_MERGE = 1e-8


class OrbitType(str, Enum):
    SADDLE = "saddle"
    ATTRACTING = "attracting"
    REPELLING = "repelling"
    NEUTRAL_MIXED = "neutral-mixed"


def eigenpair(trace: complex, det: complex) -> Tuple[complex, complex]:
    """Roots of λ^2 - trace λ + det, ordered by modulus; the small one is det / big"""
    trace, det = complex(trace), complex(det)
    disc = cmath.sqrt(trace * trace - 4 * det)
    plus, minus = trace + disc, trace - disc
    big = 0.5 * (plus if abs(plus) >= abs(minus) else minus)
    if big == 0:
        return 0j, 0j
    return det / big, big


def classify(eigenvalues: Sequence[complex], margin: float = NEUTRAL_MARGIN) -> OrbitType:
    lo, hi = sorted(abs(v) for v in eigenvalues)
    if hi < 1 - margin:
        return OrbitType.ATTRACTING
    if lo > 1 + margin:
        return OrbitType.REPELLING
    if lo < 1 - margin and hi > 1 + margin:
        return OrbitType.SADDLE
    return OrbitType.NEUTRAL_MIXED


@dataclass
class PeriodicOrbitRecord:
    """A cycle inside Fix(f^n).

    ``points`` is the distinct cycle (length ``exact_period``, a divisor of
    ``period``); ``eigenvalues`` belong to D f^period and are sorted by modulus.
    ``count`` is the contribution of the cycle to #Fix(f^n) with multiplicity.
    ``degree_mismatch`` marks a cycle whose solution clusters disagree with the local
    degree of the periodic-point equations.
    """

    period: int
    points: Tuple[Tuple[complex, complex], ...]
    eigenvalues: Tuple[complex, complex]
    trace: complex
    orbit_type: OrbitType
    multiplicity: int
    residual: float
    exact_period: int
    unit_eigenvalue: bool = False
    count: int = 0
    degree_mismatch: bool = False

    def __post_init__(self):
        if not self.count:
            self.count = len(self.points) * self.multiplicity

    @property
    def stable(self) -> complex:
        return self.eigenvalues[0]

    @property
    def unstable(self) -> complex:
        return self.eigenvalues[1]

    @property
    def is_saddle(self) -> bool:
        return self.orbit_type == OrbitType.SADDLE

    def chi_unstable(self) -> float:
        return math.log(abs(self.unstable)) / self.period

    def chi_stable(self) -> float:
        return math.log(abs(self.stable)) / self.period

    def to_model(self) -> OrbitRecordModel:
        return OrbitRecordModel(
            period=self.period,
            exact_period=self.exact_period,
            points=[[complex_to_hex(x), complex_to_hex(y)] for x, y in self.points],
            eigenvalues=[complex_to_hex(v) for v in self.eigenvalues],
            trace=complex_to_hex(self.trace),
            orbit_type=self.orbit_type.value,
            multiplicity=self.multiplicity,
            residual=self.residual,
            unit_eigenvalue=self.unit_eigenvalue,
            degree_mismatch=self.degree_mismatch,
        )

    @classmethod
    def from_model(cls, model: OrbitRecordModel) -> "PeriodicOrbitRecord":
        points = tuple((hex_to_complex(x), hex_to_complex(y)) for x, y in model.points)
        return cls(
            period=model.period,
            points=points,
            eigenvalues=tuple(hex_to_complex(v) for v in model.eigenvalues),
            trace=hex_to_complex(model.trace),
            orbit_type=OrbitType(model.orbit_type),
            multiplicity=model.multiplicity,
            residual=model.residual,
            exact_period=model.exact_period,
            unit_eigenvalue=model.unit_eigenvalue,
            degree_mismatch=model.degree_mismatch,
        )


@dataclass
class PeriodicSearchResult:
    """Records of Fix(f^n); behaves like the list of records"""

    period: int
    records: List[PeriodicOrbitRecord]
    expected_count: int
    status: str = "complete"
    method: str = "homotopy"

    @property
    def count(self) -> int:
        return sum(r.count for r in self.records)

    @property
    def deficit(self) -> int:
        return self.expected_count - self.count

    @property
    def complete(self) -> bool:
        return self.status == "complete"

    def __iter__(self) -> Iterator[PeriodicOrbitRecord]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, item):
        return self.records[item]

    def of_exact_period(self, m: Optional[int] = None) -> List[PeriodicOrbitRecord]:
        m = self.period if m is None else m
        return [r for r in self.records if r.exact_period == m]

    def saddles(self) -> List[PeriodicOrbitRecord]:
        """Saddles of exact period n"""
        return [r for r in self.of_exact_period() if r.is_saddle]

    def to_model(self, f: HenonComposition) -> PeriodicSetModel:
        return PeriodicSetModel(
            map=f.to_model(), period=self.period, status=self.status,
            expected_count=self.expected_count, count=self.count,
            records=[r.to_model() for r in self.records])


# --------------------------------------------------------------------------
# Records from points
# --------------------------------------------------------------------------

def divisors(n: int) -> List[int]:
    return [m for m in range(1, n + 1) if n % m == 0]


def period_tolerance(point, residual: float = 0.0) -> float:
    return max(1e-7 * (1.0 + sup_norm(point)), 10.0 * residual)


def _exact_period_of(f: HenonComposition, point, n: int, residual: float) -> int:
    tol = period_tolerance(point, residual)
    for m in divisors(n):
        if sup_norm(np.subtract(iterate(f, point, m), point)) <= tol:
            return m
    return n


def orbit_record(f: HenonComposition, point, n: int, multiplicity: int = 1,
                 count: int = 0) -> PeriodicOrbitRecord:
    """Build the record of the cycle through point, viewed inside Fix(f^n)"""
    z = (complex(point[0]), complex(point[1]))
    orbit = [z]
    monodromy = np.eye(2, dtype=complex)
    w = z
    for _ in range(n):
        monodromy = differential(f, w) @ monodromy
        w = evaluate(f, w)
        orbit.append(w)
    residual = sup_norm((w[0] - z[0], w[1] - z[1]))
    m = _exact_period_of(f, z, n, residual)
    lam = eigenpair(np.trace(monodromy), jacobian_const(f) ** n)
    return PeriodicOrbitRecord(
        period=n,
        points=tuple(orbit[:m]),
        eigenvalues=lam,
        trace=lam[0] + lam[1],
        orbit_type=classify(lam),
        multiplicity=multiplicity,
        residual=residual,
        exact_period=m,
        unit_eigenvalue=any(abs(v - 1) <= UNIT_EIGEN_TOL for v in lam),
        count=count,
    )


def exact_period(f: HenonComposition, record: PeriodicOrbitRecord) -> int:
    """Smallest divisor m of record.period with |f^m(z) - z| within tolerance"""
    return _exact_period_of(f, record.points[0], record.period, record.residual)


def mobius(n: int) -> int:
    result, m, p = 1, n, 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            result = -result
        p += 1
    return -result if m > 1 else result


def mobius_exact_count(d: int, n: int) -> int:
    """Generic number of points of exact period n: sum over m | n of mu(n/m) d^m"""
    return sum(mobius(n // m) * d ** m for m in divisors(n))


def _require_single(f: HenonComposition):
    if f.k != 1:
        raise DomainError(f"closed forms need a single Hénon map, got {f.k} factors")


def _cluster_radius(f: HenonComposition) -> float:
    return CLUSTER_FACTOR * (1.0 + 2.0 * escape_rate_M(f).R)


# --------------------------------------------------------------------------
# Closed forms for single Hénon maps
# --------------------------------------------------------------------------

def fixed_points_henon(f: HenonComposition) -> List[PeriodicOrbitRecord]:
    """Fixed points (x0, x0) with p(x0) = (1 - a) x0"""
    _require_single(f)
    h = f.factors[0]
    coeffs = np.array(h.p.horner, dtype=complex)
    coeffs[-2] -= 1.0 - h.a
    clusters = cluster_roots(polynomial_roots(coeffs), _cluster_radius(f))
    return [orbit_record(f, (x0, x0), 1, multiplicity=size) for x0, size in clusters]


def _nearest(clusters, value) -> Tuple[int, float]:
    dist = [abs(c - value) for c, _ in clusters]
    j = int(np.argmin(dist))
    return j, dist[j]


def period2_points_henon(f: HenonComposition) -> List[PeriodicOrbitRecord]:
    """Points of Fix(f^2) \\ Fix(f), as 2-cycles {(x0, x1), (x1, x0)}.

    For a != 1 the x-coordinates are the roots of (q o q(x) - x) / (q(x) - x)
    with q = p / (1 - a), paired by x1 = q(x0). For a = 1 they are pairs of
    roots of p. Formal period-2 solutions sitting on a fixed point come back
    as records of exact period 1 (then 1 or -1 is an eigenvalue of Df).
    """
    _require_single(f)
    h = f.factors[0]
    radius = _cluster_radius(f)
    records: List[PeriodicOrbitRecord] = []

    if h.a == 1:
        clusters = cluster_roots(polynomial_roots(h.p.full_coefficients()), radius)
        for i, (ri, mi) in enumerate(clusters):
            if mi > 1:
                records.append(orbit_record(f, (ri, ri), 2, multiplicity=mi * mi - mi, count=mi * mi - mi))
            for rj, mj in clusters[i + 1:]:
                records.append(orbit_record(f, (ri, rj), 2, multiplicity=mi * mj, count=2 * mi * mj))
        return records

    q = Polynomial(np.array(h.p.horner[::-1], dtype=complex) / (1.0 - h.a))
    ident = Polynomial([0, 1])
    quotient, _ = divmod(q(q) - ident, q - ident)
    clusters = cluster_roots(polynomial_roots(quotient.coef[::-1]), radius)
    used = [False] * len(clusters)
    for i, (ci, si) in enumerate(clusters):
        if used[i]:
            continue
        used[i] = True
        j, _ = _nearest(clusters, q(ci))
        if j == i:
            # q(ci) = ci: formal period 2 on a fixed point
            records.append(orbit_record(f, (ci, ci), 2, multiplicity=si, count=si))
            continue
        if used[j]:
            logger.warning(f"period-2 pairing: partner of x0={ci:.6g} already paired")
            records.append(orbit_record(f, (ci, q(ci)), 2, multiplicity=si, count=si))
            continue
        used[j] = True
        sj = clusters[j][1]
        if si != sj:
            logger.warning(f"period-2 pairing: cluster sizes {si} and {sj} differ at x0={ci:.6g}")
        records.append(orbit_record(f, (ci, clusters[j][0]), 2, multiplicity=min(si, sj), count=si + sj))
    return records


def _closed_form_points(f: HenonComposition, n: int) -> List[PeriodicOrbitRecord]:
    fixed = fixed_points_henon(f)
    if n == 1:
        return fixed
    lifted = [orbit_record(f, r.points[0], 2, multiplicity=r.multiplicity) for r in fixed]
    return lifted + period2_points_henon(f)


# --------------------------------------------------------------------------
# General solver
# --------------------------------------------------------------------------

@dataclass
class _Cluster:
    vector: np.ndarray
    size: int
    singular: bool
    local_degree: Optional[int] = None

    @property
    def degree_mismatch(self) -> bool:
        return self.local_degree is not None and self.local_degree != self.size


def _singular_mask(system: CyclicSystem, vectors: np.ndarray) -> np.ndarray:
    sv = np.linalg.svd(system.jacobian(vectors), compute_uv=False)
    with np.errstate(divide="ignore"):
        return sv[:, 0] / np.maximum(sv[:, -1], 1e-300) > SINGULAR_CONDITION


def local_degree(system: CyclicSystem, center: np.ndarray, radius: float, seed: int = 0) -> int:
    """Local degree of the cyclic residual at an isolated zero ``center``.

    With one unknown this is the argument-principle count on |x - center| = radius.
    Otherwise it is the number of solutions of F(x) = b within ``radius`` of the
    center for a small generic right-hand side b, found by Newton from seeded
    starts around the center.
    """
    center = np.asarray(center, dtype=complex)
    if system.size == 1:
        return argument_principle_count(lambda z: system.residual(z[:, None])[:, 0], complex(center[0]), radius)

    rng = np.random.default_rng(seed)
    size = system.size
    scale = float(system.scale(center[None, :])[0])
    rhs = LOCAL_DEGREE_SHIFT * scale * np.exp(2j * np.pi * rng.uniform(size=size)) * rng.uniform(0.5, 1.0, size)
    floor = LOCAL_DEGREE_MERGE * (1.0 + np.max(np.abs(center)))
    count = LOCAL_DEGREE_STARTS * size
    directions = rng.normal(size=(count, size)) + 1j * rng.normal(size=(count, size))
    directions /= np.max(np.abs(directions), axis=1, keepdims=True)
    lengths = np.exp(rng.uniform(np.log(floor), np.log(max(0.5 * radius, 2.0 * floor)), size=(count, 1)))
    roots, done, rel = damped_newton(system.shifted(rhs), center + lengths * directions)
    # near a multiple zero the Newton steps stall at rounding level before the tolerance
    solved = done | (rel <= 1e-2 * LOCAL_DEGREE_SHIFT)
    roots = roots[solved & (np.max(np.abs(roots - center), axis=1) < radius)]
    if len(roots) == 0:
        return 0
    return int(np.unique(linkage_labels(roots, floor)).size)


def _check_local_degrees(system: CyclicSystem, clusters: List[_Cluster], radius: float):
    """Compare the size of every multiple cluster with the local degree at its centroid"""
    centers = np.array([c.vector for c in clusters])
    for i, cluster in enumerate(clusters):
        if cluster.size < 2:
            continue
        ball = LOCAL_DEGREE_RADIUS * radius * SINGULAR_CLUSTER_FACTOR / CLUSTER_FACTOR
        others = np.delete(centers, i, axis=0)
        if len(others):
            ball = min(ball, 0.5 * float(np.min(np.max(np.abs(others - cluster.vector), axis=1))))
        try:
            cluster.local_degree = local_degree(system, cluster.vector, ball, seed=i)
        except ConvergenceError as e:
            logger.debug(f"local degree at cluster {i} unavailable: {e}")
            continue
        if cluster.degree_mismatch:
            logger.warning(f"cluster of {cluster.size} solutions at {vector_point(cluster.vector)} "
                           f"has local degree {cluster.local_degree}")


def cluster_vectors(system: CyclicSystem, vectors: np.ndarray, radius: float) -> List[_Cluster]:
    """Group solution vectors by the point (x_0, x_{N-1}) they represent.

    Two endpoints join when their max-norm distance is below the larger of their
    radii; endpoints with a near-singular Jacobian get the wider radius since
    multiple solutions converge only to about eps^(1/m). Clusters of more than
    one solution are checked against the local degree of the residual.
    """
    if len(vectors) == 0:
        return []
    singular = _singular_mask(system, vectors)
    radii = np.where(singular, radius * SINGULAR_CLUSTER_FACTOR / CLUSTER_FACTOR, radius)
    labels = linkage_labels(vectors[:, [0, -1]], radii)
    clusters = []
    for label in np.unique(labels):
        members = labels == label
        clusters.append(_Cluster(vector=vectors[members].mean(axis=0), size=int(members.sum()),
                                 singular=bool(singular[members].any())))
    clusters.sort(key=lambda c: tuple(np.round([c.vector[0].real, c.vector[0].imag,
                                                c.vector[-1].real, c.vector[-1].imag], 9)))
    _check_local_degrees(system, clusters, radius)
    return clusters


def _merge_multistart(clusters, roots, radius, missing):
    added = 0
    for root in roots:
        if added >= missing:
            break
        point = root[[0, -1]]
        if all(np.max(np.abs(point - c.vector[[0, -1]])) > radius for c in clusters):
            clusters.append(_Cluster(vector=root, size=1, singular=False))
            added += 1
    return added


def _group_cycles(f: HenonComposition, n: int, clusters: List[_Cluster], radius: float) -> List[PeriodicOrbitRecord]:
    points = [tuple(complex(v) for v in c.vector[[0, -1]]) for c in clusters]
    assigned = [False] * len(clusters)
    records = []
    for i, z in enumerate(points):
        if assigned[i]:
            continue
        assigned[i] = True
        record = orbit_record(f, z, n)
        members = [i]
        w = z
        for _ in range(record.exact_period - 1):
            w = evaluate(f, w)
            free = [j for j in range(len(points)) if not assigned[j]]
            if not free:
                break
            j = min(free, key=lambda j: sup_norm(np.subtract(points[j], w)))
            if sup_norm(np.subtract(points[j], w)) > 100 * radius:
                logger.warning(f"cycle through {z} leaves the solution set at step {len(members)}")
                break
            assigned[j] = True
            members.append(j)
        count = sum(clusters[j].size for j in members)
        multiplicity = max(1, count // record.exact_period)
        if count % record.exact_period:
            logger.warning(f"uneven multiplicities along the cycle through {z}")
        record.multiplicity = multiplicity
        record.count = count
        record.degree_mismatch = any(clusters[j].degree_mismatch for j in members)
        records.append(record)
    return records


def _solve_cyclic(f: HenonComposition, n: int, seed: int, workers: int) -> Tuple[List[PeriodicOrbitRecord], int]:
    expected = f.degree ** n
    system = CyclicSystem.for_period(f, n)
    radius = 2.0 * escape_rate_M(f).R + 1.0
    cluster_radius = _cluster_radius(f)
    rng = np.random.default_rng(seed)
    gamma = cmath.exp(2j * math.pi * rng.uniform())

    homotopy = TotalDegreeHomotopy(system, radius, gamma)
    result = homotopy.track(homotopy.start_points(), TrackerSettings(), workers=workers)
    endpoints = result.endpoints[result.converged]
    if result.failures:
        logger.warning(f"period {n}: {result.failures} of {expected} homotopy paths failed")
    clusters = cluster_vectors(system, endpoints, cluster_radius)
    found = sum(c.size for c in clusters)

    if found < expected:
        roots, _ = multistart_newton(system, radius, MULTISTART_FACTOR * expected, seed)
        added = _merge_multistart(clusters, roots, cluster_radius, expected - found)
        if added:
            logger.info(f"period {n}: multi-start Newton recovered {added} solutions")
            found += added
    return _group_cycles(f, n, clusters, cluster_radius), found


def periodic_points(f: HenonComposition, n: int, method: str = "homotopy", budget: int = BUDGET,
                    seed: int = 0, workers: Optional[int] = None) -> PeriodicSearchResult:
    """All points of Fix(f^n) grouped into cycles.

    method: 'homotopy' always runs the general solver; 'auto' uses the closed
    forms for single Hénon maps at n <= 2.
    """
    if n < 1:
        raise DomainError(f"period must be positive, got {n}")
    if method not in ("auto", "homotopy"):
        raise DomainError(f"unknown method {method!r}")
    expected = f.degree ** n
    if expected > budget:
        raise BudgetExceededError(
            f"d^n = {expected} exceeds the budget {budget}", requested=expected, budget=budget)

    if method == "auto" and f.k == 1 and n <= 2:
        records = _closed_form_points(f, n)
        used = "closed-form"
    else:
        records, _ = _solve_cyclic(f, n, seed, resolve_workers(workers))
        used = "homotopy"

    out = PeriodicSearchResult(period=n, records=records, expected_count=expected, method=used)
    if out.count != expected:
        out.status = "partial"
        logger.warning(f"period {n}: found {out.count} of {expected} points (deficit {out.deficit})")
    return out
