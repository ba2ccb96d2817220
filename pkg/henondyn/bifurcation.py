"""
Parameter-space experiments

Continuation of periodic orbits along parameter paths, the attracting-cycle
scan over rings |a| = const of a one-parameter family, and slices of the
filled Julia set by the line {y = 0}.

Orbit iteration for scans and slices runs on torch complex128 tensors, one
tensor entry per initial condition; cycle bookkeeping happens afterwards in
numpy, in initial-condition order, so results do not depend on the device or
the number of workers.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import torch

from .common.errors import DomainError
from .common.logging import logger
from .common.schemas import (
    CycleModel,
    FixedPointModel,
    QuadraticAnalysisModel,
    ScanHitModel,
    ScanModel,
    SliceModel,
    TrackEventModel,
    TrackModel,
    TrackStepModel,
    complex_to_hex,
    complex_to_pair,
)
from .common.utils import resolve_workers
from .henon_core import HenonComposition, differential, evaluate, iterate, orbit_escape_radius, sup_norm
from .periodic import (
    OrbitType,
    PeriodicOrbitRecord,
    UNIT_EIGEN_TOL,
    classify,
    eigenpair,
    orbit_record,
)
from .tracking import CyclicSystem, damped_newton, newton_polish, orbit_vector, vector_point

Point = Tuple[complex, complex]

BRENT_TOL = 1e-6
ATTRACTING_MARGIN = 1e-6
MATCH_TOL = 1e-3
POLISH_RESIDUAL = 1e-10
MAX_RESOLUTION = 16384
SLICE_CHUNK_ROWS = 64
DEFAULT_WINDOW = (-2.0, 2.0, -2.0, 2.0)

ESCAPE = -1
UNDECIDED = -2

ESCAPE_RGB = (255, 255, 255)
UNDECIDED_RGB = (128, 128, 128)
BASIN_PALETTE = (
    (0, 0, 0),
    (220, 20, 20),
    (30, 90, 220),
    (20, 160, 60),
    (230, 160, 0),
    (150, 40, 180),
    (0, 170, 170),
    (120, 70, 30),
)

CONTINUATION_POINT_JUMP = 0.25
CONTINUATION_EIGEN_JUMP = 0.2
CONTINUATION_RESIDUAL = 1e-9
CONTINUATION_MIN_STEP = 1e-10
CROSSING_TOL = 1e-10


# --------------------------------------------------------------------------
# Families
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ParameterFamily:
    """a -> f_a, with an optional base point whose cycle scans ignore"""

    name: str
    build: Callable[[complex], HenonComposition]
    base_point: Optional[Callable[[complex], Point]] = None

    def __call__(self, a: complex) -> HenonComposition:
        return self.build(complex(a))


def quadratic_family(c: complex = 0j) -> ParameterFamily:
    """f_a(x, y) = (a y + x^2 + c, x); for c = 0 the base point is alpha_a = (0, 0)"""
    c = complex(c)
    if c == 0:
        return ParameterFamily("quadratic", lambda a: HenonComposition.quadratic(a, 0j),
                               base_point=lambda a: (0j, 0j))
    return ParameterFamily(f"quadratic(c={c:g})", lambda a: HenonComposition.quadratic(a, c))


FAMILIES: Dict[str, Callable[..., ParameterFamily]] = {
    "quadratic": quadratic_family,
}


# --------------------------------------------------------------------------
# Cycles
# --------------------------------------------------------------------------

def cycle_to_model(record: PeriodicOrbitRecord) -> CycleModel:
    return CycleModel(
        period=record.exact_period,
        points=[[complex_to_hex(x), complex_to_hex(y)] for x, y in record.points],
        eigenvalues=[complex_to_hex(v) for v in record.eigenvalues])


def is_attracting(record: PeriodicOrbitRecord, margin: float = ATTRACTING_MARGIN) -> bool:
    return max(abs(v) for v in record.eigenvalues) < 1 - margin


def _cycle_differential(f: HenonComposition, point: Point, n: int) -> np.ndarray:
    jac = np.eye(2, dtype=complex)
    for _ in range(n):
        jac = differential(f, point) @ jac
        point = evaluate(f, point)
    return jac


def polish_cycle(f: HenonComposition, point: Point, period: int) -> Optional[PeriodicOrbitRecord]:
    """Newton on f^period(z) = z from an approximate cycle point"""
    def residual(z):
        w = iterate(f, (z[0], z[1]), period)
        return np.array([w[0] - z[0], w[1] - z[1]])

    def jacobian(z):
        return _cycle_differential(f, (z[0], z[1]), period) - np.eye(2)

    z, res = newton_polish(residual, jacobian, np.array(point, dtype=complex))
    if not np.isfinite(res) or res > POLISH_RESIDUAL * (1.0 + float(np.max(np.abs(z)))):
        return None
    return orbit_record(f, (complex(z[0]), complex(z[1])), period)


def _sort_key(record: PeriodicOrbitRecord):
    first = min(record.points, key=lambda p: (round(p[0].real, 9), round(p[0].imag, 9)))
    return record.exact_period, round(first[0].real, 9), round(first[0].imag, 9)


class CycleRegistry:
    """Attracting cycles found among orbit end states, plus rejected candidates"""

    def __init__(self, f: HenonComposition):
        self.f = f
        self.cycles: List[PeriodicOrbitRecord] = []
        self._rejected: List[np.ndarray] = []

    def _stack(self, record_points) -> np.ndarray:
        return np.array(record_points, dtype=complex).reshape(-1, 2)

    def _matches(self, points: np.ndarray, cycle_points: np.ndarray) -> np.ndarray:
        diff = np.abs(points[:, None, :] - cycle_points[None, :, :]).max(axis=2)
        scale = 1.0 + np.abs(points).max(axis=1)
        return (diff <= MATCH_TOL * scale[:, None]).any(axis=1)

    def resolve(self, periods: np.ndarray, finals: np.ndarray, max_period: int) -> np.ndarray:
        """Basin labels (registry index or UNDECIDED) for detected end states, in input order"""
        labels = np.full(len(periods), UNDECIDED, dtype=int)
        pending = np.flatnonzero((periods > 0) & (periods <= max_period))
        for k, rec in enumerate(self.cycles):
            if pending.size == 0:
                break
            hit = self._matches(finals[pending], self._stack(rec.points))
            labels[pending[hit]] = k
            pending = pending[~hit]
        for rejected in self._rejected:
            if pending.size == 0:
                break
            pending = pending[~self._matches(finals[pending], rejected)]

        while pending.size:
            i = pending[0]
            point = (complex(finals[i, 0]), complex(finals[i, 1]))
            record = polish_cycle(self.f, point, int(periods[i]))
            if record is not None and is_attracting(record):
                self.cycles.append(record)
                cycle_points = self._stack(record.points)
                label = len(self.cycles) - 1
            else:
                cycle_points = self._stack(record.points if record is not None else [point])
                self._rejected.append(cycle_points)
                label = UNDECIDED
            hit = self._matches(finals[pending], cycle_points)
            hit[0] = True
            labels[pending[hit]] = label
            pending = pending[~hit]
        return labels

    def canonical_order(self) -> np.ndarray:
        """Sort cycles by (period, leading point); returns old -> new index map"""
        order = sorted(range(len(self.cycles)), key=lambda k: _sort_key(self.cycles[k]))
        remap = np.empty(len(order), dtype=int)
        remap[order] = np.arange(len(order))
        self.cycles = [self.cycles[k] for k in order]
        return remap


# --------------------------------------------------------------------------
# Batched orbit iteration
# --------------------------------------------------------------------------

def _brent_cap(max_period: int) -> int:
    cap = 1
    while cap < 2 * max_period:
        cap *= 2
    return cap


def iterate_orbits(f: HenonComposition, x0: np.ndarray, y0: Optional[np.ndarray] = None,
                   max_iter: int = 5000, max_period: int = 12, device: str = "cpu",
                   tol: float = BRENT_TOL) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Iterate a batch of initial points; returns (escaped, detected period, end states (B, 2)).

    Cycles are found by Brent's power-of-two scheme with the saved point
    refreshed every cap steps, cap the first power of two >= 2 max_period.
    Period 0 means no cycle was detected.
    """
    escape_r = orbit_escape_radius(f)
    x = torch.as_tensor(np.asarray(x0, dtype=np.complex128), device=device)
    y = torch.zeros_like(x) if y0 is None else torch.as_tensor(np.asarray(y0, dtype=np.complex128), device=device)
    factors = [(h.a, h.p.horner[1:]) for h in f.factors]

    escaped = torch.zeros(x.shape, dtype=torch.bool, device=device)
    period = torch.zeros(x.shape, dtype=torch.int64, device=device)
    lam = torch.zeros_like(period)
    power = torch.ones_like(period)
    cap = _brent_cap(max_period)
    sx, sy = x.clone(), y.clone()
    zero = torch.zeros_like(x)

    for step in range(max_iter):
        for a, horner in factors:
            acc = torch.ones_like(x)
            for c in horner:
                acc = acc * x + c
            x, y = a * y + acc, x
        size = torch.maximum(torch.abs(x), torch.abs(y))
        escaped |= ~torch.isfinite(size) | (size > escape_r)
        x = torch.where(escaped, zero, x)
        y = torch.where(escaped, zero, y)
        size = torch.where(escaped, torch.zeros_like(size), size)

        lam += 1
        gap = torch.maximum(torch.abs(x - sx), torch.abs(y - sy))
        close = (gap <= tol * (1.0 + size)) & (period == 0) & ~escaped
        period = torch.where(close, lam, period)
        reset = (lam == power) & (period == 0)
        sx = torch.where(reset, x, sx)
        sy = torch.where(reset, y, sy)
        power = torch.where(reset & (power < cap), 2 * power, power)
        lam = torch.where(reset, torch.zeros_like(lam), lam)

        if step % 64 == 63 and bool(torch.all(escaped | (period > 0))):
            break

    finals = torch.stack([x, y], dim=-1)
    return escaped.cpu().numpy(), period.cpu().numpy(), finals.cpu().numpy()


def classify_points(f: HenonComposition, x0: np.ndarray, max_iter: int, max_period: int,
                    device: str = "cpu", registry: Optional[CycleRegistry] = None,
                    workers: int = 1, chunk: int = 0) -> Tuple[np.ndarray, CycleRegistry]:
    """ESCAPE / UNDECIDED / registry index for every initial point (x, 0)"""
    registry = registry or CycleRegistry(f)
    x0 = np.asarray(x0, dtype=complex).ravel()
    if chunk and len(x0) > chunk:
        pieces = [x0[i:i + chunk] for i in range(0, len(x0), chunk)]
    else:
        pieces = [x0]

    def run(piece):
        return iterate_orbits(f, piece, max_iter=max_iter, max_period=max_period, device=device)

    if workers > 1 and len(pieces) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            parts = list(executor.map(run, pieces))
    else:
        parts = [run(p) for p in pieces]
    escaped = np.concatenate([p[0] for p in parts])
    periods = np.concatenate([p[1] for p in parts])
    finals = np.concatenate([p[2] for p in parts])

    labels = registry.resolve(np.where(escaped, 0, periods), finals, max_period)
    labels[escaped] = ESCAPE
    return labels, registry


def lattice(window: Sequence[float], nx: int, ny: int) -> np.ndarray:
    """Pixel-center lattice of the window (xmin, xmax, ymin, ymax), top row first"""
    xmin, xmax, ymin, ymax = window
    re = xmin + (np.arange(nx) + 0.5) * (xmax - xmin) / nx
    im = ymax - (np.arange(ny) + 0.5) * (ymax - ymin) / ny
    return re[None, :] + 1j * im[:, None]


# --------------------------------------------------------------------------
# Attracting-cycle scan
# --------------------------------------------------------------------------

@dataclass
class ScanHit:
    param: complex
    modulus: float
    angle_index: int
    cycles: List[PeriodicOrbitRecord]

    def to_model(self) -> ScanHitModel:
        return ScanHitModel(param=complex_to_pair(self.param), modulus=self.modulus,
                            angle_index=self.angle_index, cycles=[cycle_to_model(c) for c in self.cycles])


@dataclass
class ParameterScan:
    """Outcome for one parameter: attracting cycles found and the undecided share"""

    param: complex
    cycles: List[PeriodicOrbitRecord]
    extra: List[PeriodicOrbitRecord]
    undecided_fraction: float


@dataclass
class ScanReport:
    family: str
    moduli: List[float]
    angles_per_modulus: int
    inits: int
    max_iter: int
    max_period: int
    parameters_scanned: int
    undecided_fraction: float
    hits: List[ScanHit] = field(default_factory=list)

    def hits_at(self, modulus: float) -> List[ScanHit]:
        return [h for h in self.hits if abs(h.modulus - modulus) <= 1e-12]

    def to_model(self) -> ScanModel:
        return ScanModel(
            family=self.family, moduli=list(self.moduli), angles_per_modulus=self.angles_per_modulus,
            inits=self.inits, max_iter=self.max_iter, max_period=self.max_period,
            parameters_scanned=self.parameters_scanned, undecided_fraction=self.undecided_fraction,
            hits=[h.to_model() for h in self.hits])


def _contains_point(record: PeriodicOrbitRecord, point: Point, tol: float = 1e-6) -> bool:
    return any(sup_norm((p[0] - point[0], p[1] - point[1])) <= tol * (1.0 + sup_norm(point))
               for p in record.points)


def scan_parameter(family: ParameterFamily, a: complex, inits: int = 10_000, max_iter: int = 5000,
                   max_period: int = 12, window: Sequence[float] = DEFAULT_WINDOW,
                   device: str = "cpu") -> ParameterScan:
    """Classify a sqrt(inits) x sqrt(inits) lattice of initial points (x, 0) for f_a"""
    f = family(a)
    side = max(1, int(round(math.sqrt(inits))))
    labels, registry = classify_points(f, lattice(window, side, side), max_iter, max_period, device=device)
    base = family.base_point(a) if family.base_point is not None else None
    extra = [c for c in registry.cycles if base is None or not _contains_point(c, base)]
    undecided = float(np.count_nonzero(labels == UNDECIDED)) / labels.size
    return ParameterScan(param=complex(a), cycles=registry.cycles, extra=extra, undecided_fraction=undecided)


def attracting_cycle_scan(family: ParameterFamily, moduli: Sequence[float], angles_per_modulus: int,
                          inits: int = 10_000, max_iter: int = 5000, max_period: int = 12,
                          window: Sequence[float] = DEFAULT_WINDOW, device: str = "cpu",
                          workers: Optional[int] = None,
                          progress: Optional[Callable[[int], None]] = None) -> ScanReport:
    """Parameters a = |a| e^{2 pi i j / angles} admitting an attracting cycle besides the base one"""
    if angles_per_modulus < 1 or inits < 1:
        raise DomainError("angles_per_modulus and inits must be positive")
    workers = resolve_workers(workers)
    params = [(float(m), j, float(m) * cmath.exp(2j * math.pi * j / angles_per_modulus))
              for m in moduli for j in range(angles_per_modulus)]

    def run(item):
        return scan_parameter(family, item[2], inits, max_iter, max_period, window, device)

    results = []
    with ThreadPoolExecutor(max_workers=workers) as executor:
        for done, result in enumerate(executor.map(run, params), start=1):
            results.append(result)
            if progress is not None:
                progress(done)

    hits = [ScanHit(param=res.param, modulus=m, angle_index=j, cycles=res.extra)
            for (m, j, _), res in zip(params, results) if res.extra]
    undecided = float(np.mean([r.undecided_fraction for r in results])) if results else 0.0
    for m in moduli:
        logger.info(f"|a|={m:g}: {sum(1 for h in hits if h.modulus == float(m))} parameters with extra attracting cycles")
    return ScanReport(family=family.name, moduli=[float(m) for m in moduli], angles_per_modulus=angles_per_modulus,
                      inits=inits, max_iter=max_iter, max_period=max_period, parameters_scanned=len(params),
                      undecided_fraction=undecided, hits=hits)


@dataclass
class RingScanSummary:
    report: ScanReport
    counts: Dict[float, int]
    first_modulus: Optional[float]


def ring_scan(family: ParameterFamily, moduli: Sequence[float], angles_per_modulus: int = 500,
              **kwargs) -> RingScanSummary:
    """Scan several rings and report the smallest modulus with extra attracting cycles"""
    report = attracting_cycle_scan(family, sorted(moduli), angles_per_modulus, **kwargs)
    counts = {m: len(report.hits_at(m)) for m in report.moduli}
    first = next((m for m in report.moduli if counts[m]), None)
    if first is None:
        logger.info("no extra attracting cycles on any scanned ring")
    else:
        logger.info(f"extra attracting cycles first appear at |a|={first:g}")
    return RingScanSummary(report=report, counts=counts, first_modulus=first)


# --------------------------------------------------------------------------
# Slices of the filled Julia set
# --------------------------------------------------------------------------

@dataclass
class SliceImage:
    window: Tuple[float, float, float, float]
    resolution: Tuple[int, int]
    max_iter: int
    classes: np.ndarray
    registry: List[PeriodicOrbitRecord]

    def class_counts(self) -> Dict[str, int]:
        counts = {"escape": int(np.count_nonzero(self.classes == ESCAPE)),
                  "undecided": int(np.count_nonzero(self.classes == UNDECIDED))}
        for k in range(len(self.registry)):
            counts[f"basin-{k}"] = int(np.count_nonzero(self.classes == k))
        return counts

    def to_rgb(self) -> np.ndarray:
        rgb = np.empty(self.classes.shape + (3,), dtype=np.uint8)
        rgb[self.classes == ESCAPE] = ESCAPE_RGB
        rgb[self.classes == UNDECIDED] = UNDECIDED_RGB
        for k in range(len(self.registry)):
            rgb[self.classes == k] = BASIN_PALETTE[k % len(BASIN_PALETTE)]
        return rgb

    def write_ppm(self, path) -> Path:
        """Binary P6 pixmap, rows top to bottom"""
        path = Path(path)
        width, height = self.resolution
        with open(path, "wb") as fh:
            fh.write(f"P6\n{width} {height}\n255\n".encode("ascii"))
            fh.write(self.to_rgb().tobytes())
        return path

    def write_png(self, path) -> Path:
        from PIL import Image

        path = Path(path)
        Image.fromarray(self.to_rgb()).save(path)
        return path

    def write(self, path) -> Path:
        if str(path).lower().endswith(".png"):
            return self.write_png(path)
        return self.write_ppm(path)

    def to_model(self, image_path: Optional[str] = None) -> SliceModel:
        return SliceModel(window=list(self.window), resolution=list(self.resolution), max_iter=self.max_iter,
                          class_counts=self.class_counts(), registry=[cycle_to_model(c) for c in self.registry],
                          image_path=image_path)


def render_slice(f: HenonComposition, window: Sequence[float] = DEFAULT_WINDOW,
                 resolution: Tuple[int, int] = (512, 512), max_iter: int = 5000, max_period: int = 12,
                 device: str = "cpu", workers: Optional[int] = None,
                 progress: Optional[Callable[[int], None]] = None) -> SliceImage:
    """Classify every pixel (x, 0) of the window: escape, basin of a registered cycle, or undecided"""
    width, height = (int(v) for v in resolution)
    if not (1 <= width <= MAX_RESOLUTION and 1 <= height <= MAX_RESOLUTION):
        raise DomainError(f"resolution must be within 1..{MAX_RESOLUTION} per side, got {width}x{height}")
    xmin, xmax, ymin, ymax = (float(v) for v in window)
    if not (xmin < xmax and ymin < ymax):
        raise DomainError(f"empty window {window}")
    workers = resolve_workers(workers)

    grid = lattice((xmin, xmax, ymin, ymax), width, height)
    bands = [grid[r:r + SLICE_CHUNK_ROWS] for r in range(0, height, SLICE_CHUNK_ROWS)]

    def run(band):
        return iterate_orbits(f, band.ravel(), max_iter=max_iter, max_period=max_period, device=device)

    parts = []
    with ThreadPoolExecutor(max_workers=workers) as executor:
        for done, part in enumerate(executor.map(run, bands), start=1):
            parts.append(part)
            if progress is not None:
                progress(done)
    escaped = np.concatenate([p[0] for p in parts])
    periods = np.concatenate([p[1] for p in parts])
    finals = np.concatenate([p[2] for p in parts])

    registry = CycleRegistry(f)
    labels = registry.resolve(np.where(escaped, 0, periods), finals, max_period)
    remap = registry.canonical_order()
    basins = labels >= 0
    labels[basins] = remap[labels[basins]]
    labels[escaped] = ESCAPE

    image = SliceImage(window=(xmin, xmax, ymin, ymax), resolution=(width, height), max_iter=max_iter,
                       classes=labels.reshape(height, width), registry=registry.cycles)
    logger.info(f"slice {width}x{height}: {image.class_counts()}")
    return image


# --------------------------------------------------------------------------
# Continuation
# --------------------------------------------------------------------------

@dataclass
class TrackStep:
    param: complex
    points: Tuple[Point, ...]
    eigenvalues: Tuple[complex, complex]

    @property
    def moduli(self) -> Tuple[float, float]:
        return abs(self.eigenvalues[0]), abs(self.eigenvalues[1])

    def to_model(self) -> TrackStepModel:
        return TrackStepModel(param=complex_to_pair(self.param),
                              points=[[complex_to_hex(x), complex_to_hex(y)] for x, y in self.points],
                              eigenvalues=[complex_to_hex(v) for v in self.eigenvalues],
                              moduli=list(self.moduli))


@dataclass
class TrackEvent:
    step: int
    kind: str
    eigenvalue_index: int
    direction: str
    param: complex

    def to_model(self) -> TrackEventModel:
        return TrackEventModel(step=self.step, kind=self.kind, eigenvalue_index=self.eigenvalue_index,
                               direction=self.direction, param=complex_to_pair(self.param))


@dataclass
class ContinuationTrack:
    family: str
    period: int
    steps: List[TrackStep] = field(default_factory=list)
    events: List[TrackEvent] = field(default_factory=list)
    status: str = "complete"
    reason: str = ""
    monodromy: Optional[List[int]] = None

    @property
    def path(self) -> List[complex]:
        return [s.param for s in self.steps]

    def crossings(self) -> List[TrackEvent]:
        return [e for e in self.events if e.kind == "unit-crossing"]

    def to_model(self) -> TrackModel:
        return TrackModel(family=self.family, period=self.period, status=self.status, reason=self.reason,
                          steps=[s.to_model() for s in self.steps], events=[e.to_model() for e in self.events],
                          monodromy=self.monodromy)


class _PiecewisePath:
    """Arc-length parametrization of the polygon through the waypoints"""

    def __init__(self, waypoints: Sequence[complex]):
        self.points = [complex(p) for p in waypoints]
        lengths = [abs(b - a) for a, b in zip(self.points[:-1], self.points[1:])]
        self.cumulative = np.concatenate([[0.0], np.cumsum(lengths)])

    @property
    def length(self) -> float:
        return float(self.cumulative[-1])

    def __call__(self, s: float) -> complex:
        s = min(max(s, 0.0), self.length)
        j = int(np.searchsorted(self.cumulative, s, side="right")) - 1
        j = min(j, len(self.points) - 2)
        seg = self.cumulative[j + 1] - self.cumulative[j]
        if seg == 0:
            return self.points[j]
        return self.points[j] + (s - self.cumulative[j]) / seg * (self.points[j + 1] - self.points[j])


def _match_eigenvalues(new: Tuple[complex, complex], old: Tuple[complex, complex]) -> Tuple[complex, complex]:
    straight = abs(new[0] - old[0]) + abs(new[1] - old[1])
    swapped = abs(new[1] - old[0]) + abs(new[0] - old[1])
    return new if straight <= swapped else (new[1], new[0])


def _eigenvalues_at(f: HenonComposition, xvec: np.ndarray, n: int) -> Tuple[complex, complex]:
    jac = _cycle_differential(f, vector_point(xvec), n)
    return eigenpair(np.trace(jac), np.linalg.det(jac))


def _correct(family: ParameterFamily, a: complex, guess: np.ndarray, n: int):
    """Newton on the cyclic system of f_a^n; returns the vector or None"""
    f = family(a)
    system = CyclicSystem.for_period(f, n)
    xs, done, rel = damped_newton(system, guess[None, :], max_iter=40)
    x = xs[0]
    if not (done[0] and np.all(np.isfinite(x))):
        return None
    z = vector_point(x)
    w = iterate(f, z, n)
    if sup_norm((w[0] - z[0], w[1] - z[1])) > CONTINUATION_RESIDUAL * (1.0 + sup_norm(z)):
        return None
    return x


def _locate_crossing(family, path, n, s0, x0, eig0, s1, x1, index):
    """Bisection on log|lambda_index| between two accepted steps"""
    lo, hi = s0, s1
    x_lo, x_hi = x0, x1
    eig_lo = eig0
    while abs(path(hi) - path(lo)) > CROSSING_TOL:
        mid = 0.5 * (lo + hi)
        guess = 0.5 * (x_lo + x_hi)
        x_mid = _correct(family, path(mid), guess, n)
        if x_mid is None:
            break
        eig_mid = _match_eigenvalues(_eigenvalues_at(family(path(mid)), x_mid, n), eig_lo)
        if (abs(eig_mid[index]) < 1) == (abs(eig_lo[index]) < 1):
            lo, x_lo, eig_lo = mid, x_mid, eig_mid
        else:
            hi, x_hi = mid, x_mid
    return path(0.5 * (lo + hi))


def continue_orbit(family: ParameterFamily, start_param: complex, orbit0, path: Sequence[complex],
                   max_step: float = 0.01, period: Optional[int] = None) -> ContinuationTrack:
    """Follow a periodic orbit of f_a as a moves along the polygon start_param -> path[0] -> ...

    orbit0 is a PeriodicOrbitRecord or a point of the cycle (then ``period``
    is required). Steps are halved when the corrector fails, the orbit jumps or
    an eigenvalue changes by more than 20 percent; each sign change of
    log|lambda_i| is located by bisection and recorded as an event. An
    eigenvalue equal to 1 stops the track at a branch point.
    """
    if isinstance(orbit0, PeriodicOrbitRecord):
        point, n = orbit0.points[0], orbit0.exact_period
    else:
        if period is None:
            raise DomainError("period is required when orbit0 is a point")
        point, n = (complex(orbit0[0]), complex(orbit0[1])), int(period)
    if max_step <= 0:
        raise DomainError("max_step must be positive")

    start_param = complex(start_param)
    route = _PiecewisePath([start_param] + [complex(p) for p in path])
    track = ContinuationTrack(family=family.name, period=n)

    f0 = family(start_param)
    x = _correct(family, start_param, orbit_vector(f0, point, n), n)
    moved = math.inf if x is None else sup_norm(np.subtract(vector_point(x), point))
    if moved > CONTINUATION_POINT_JUMP * (1.0 + sup_norm(point)):
        raise DomainError(f"orbit0 is not a period-{n} orbit of the family at a={start_param}")
    eig = _eigenvalues_at(f0, x, n)
    if any(abs(v - 1) <= UNIT_EIGEN_TOL for v in eig):
        raise DomainError(f"orbit0 has an eigenvalue equal to 1 at a={start_param}; not a simple orbit")
    initial_points = orbit_record(f0, vector_point(x), n).points
    track.steps.append(TrackStep(start_param, initial_points, eig))

    s, h, h_prev = 0.0, max_step, None
    x_prev = None
    while s < route.length - 1e-15:
        h_try = min(h, route.length - s)
        s1 = s + h_try
        a1 = route(s1)
        guess = x if x_prev is None else x + (x - x_prev) * (h_try / h_prev)
        x1 = _correct(family, a1, guess, n)
        ok = x1 is not None
        if ok:
            f1 = family(a1)
            eig1 = _match_eigenvalues(_eigenvalues_at(f1, x1, n), eig)
            jump = np.max(np.abs(x1 - x)) / (1.0 + np.max(np.abs(x)))
            eig_jump = max(abs(eig1[i] - eig[i]) / max(abs(eig[i]), 1e-12) for i in range(2))
            ok = jump <= CONTINUATION_POINT_JUMP and eig_jump <= CONTINUATION_EIGEN_JUMP
        if not ok:
            h *= 0.5
            if h < CONTINUATION_MIN_STEP:
                track.status = "aborted"
                track.reason = f"corrector failed below the step floor at a={route(s):.6g}"
                logger.warning(f"continuation: {track.reason}")
                break
            continue

        step_index = len(track.steps)
        for i in range(2):
            if (abs(eig[i]) < 1) != (abs(eig1[i]) < 1):
                where = _locate_crossing(family, route, n, s, x, eig, s1, x1, i)
                direction = "outward" if abs(eig1[i]) > 1 else "inward"
                track.events.append(TrackEvent(step_index, "unit-crossing", i, direction, where))
                logger.info(f"eigenvalue {i} crosses the unit circle ({direction}) at a={where:.10g}")

        points = orbit_record(f1, vector_point(x1), n).points
        track.steps.append(TrackStep(a1, points, eig1))
        if any(abs(v - 1) <= UNIT_EIGEN_TOL for v in eig1):
            index = int(np.argmin([abs(v - 1) for v in eig1]))
            track.events.append(TrackEvent(step_index, "branch-point", index, "none", a1))
            track.status = "aborted"
            track.reason = f"eigenvalue 1 at a={a1:.6g}"
            logger.warning(f"continuation stopped at a branch point a={a1:.6g}")
            break

        x_prev, x, eig = x, x1, eig1
        s, h_prev = s1, h_try
        h = min(2.0 * h, max_step)

    if track.status == "complete" and abs(route(route.length) - start_param) <= 1e-12:
        track.monodromy = _monodromy(initial_points, track.steps[-1].points)
        if track.monodromy is None:
            logger.warning("closed path ended on a different cycle")
    return track


def _monodromy(initial: Sequence[Point], final: Sequence[Point]) -> Optional[List[int]]:
    if len(initial) != len(final):
        return None
    perm = []
    for p in final:
        match = [j for j, q in enumerate(initial)
                 if sup_norm((p[0] - q[0], p[1] - q[1])) <= 1e-6 * (1.0 + sup_norm(q))]
        if len(match) != 1:
            return None
        perm.append(match[0])
    return perm


# --------------------------------------------------------------------------
# Fixed points of the quadratic family
# --------------------------------------------------------------------------

SIEGEL_MAX_ORDER = 1000


@dataclass
class FixedPointInfo:
    point: Point
    eigenvalues: Tuple[complex, complex]
    orbit_type: OrbitType

    def to_model(self) -> FixedPointModel:
        return FixedPointModel(point=[complex_to_pair(self.point[0]), complex_to_pair(self.point[1])],
                               eigenvalues=[complex_to_pair(v) for v in self.eigenvalues],
                               orbit_type=self.orbit_type.value)


@dataclass
class QuadraticFixedAnalysis:
    a: complex
    alpha: FixedPointInfo
    beta: FixedPointInfo
    siegel_candidate: bool
    neutral_arc: bool

    def to_model(self) -> QuadraticAnalysisModel:
        return QuadraticAnalysisModel(a=complex_to_pair(self.a), alpha=self.alpha.to_model(),
                                      beta=self.beta.to_model(), siegel_candidate=self.siegel_candidate,
                                      neutral_arc=self.neutral_arc)


def quadratic_family_fixed_analysis(a: complex, unit_tol: float = 1e-12) -> QuadraticFixedAnalysis:
    """alpha = (0, 0) with eigenvalues +-sqrt(a); beta = (1 - a, 1 - a) with lambda^2 - 2(1 - a) lambda - a = 0"""
    a = complex(a)
    if a == 0:
        raise DomainError("a must be nonzero")
    root = cmath.sqrt(a)
    alpha_eig = tuple(sorted((root, -root), key=abs))
    beta_eig = eigenpair(2 * (1 - a), -a)
    alpha = FixedPointInfo((0j, 0j), alpha_eig, classify(alpha_eig))
    beta = FixedPointInfo((1 - a, 1 - a), beta_eig, classify(beta_eig))

    on_circle = abs(abs(a) - 1) <= unit_tol
    root_of_unity = any(abs(a ** q - 1) <= 1e-9 for q in range(1, SIEGEL_MAX_ORDER + 1))
    siegel = on_circle and not root_of_unity
    neutral_arc = on_circle and abs(cmath.phase(a)) <= math.pi / 3 + unit_tol
    return QuadraticFixedAnalysis(a=a, alpha=alpha, beta=beta, siegel_candidate=siegel, neutral_arc=neutral_arc)
