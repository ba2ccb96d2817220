"""
Batched Newton iteration and homotopy path tracking

Periodic orbits of a composition are solutions of the cyclic recurrence

    F_j(x) = x_{j+1} - a_j x_{j-1} - p_j(x_j),   j = 0, ..., N-1 (indices mod N)

over N = n k factor steps. Everything here works on whole batches of
candidate vectors of shape (B, N) at once.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Tuple

import numpy as np

from .common.logging import logger
from .henon_core import HenonComposition
from .poly1d import MonicCenteredPolynomial, eval_poly, eval_poly_derivative

# Paths are only split across threads above this batch size
MIN_PARALLEL_BATCH = 64


@dataclass(frozen=True)
class CyclicSystem:
    a: Tuple[complex, ...]
    polys: Tuple[MonicCenteredPolynomial, ...]
    rhs: Tuple[complex, ...] = ()

    @classmethod
    def for_period(cls, f: HenonComposition, n: int) -> "CyclicSystem":
        steps = f.factors * n
        return cls(tuple(h.a for h in steps), tuple(h.p for h in steps))

    @property
    def size(self) -> int:
        return len(self.polys)

    @property
    def degrees(self) -> np.ndarray:
        return np.array([p.degree for p in self.polys])

    def shifted(self, rhs) -> "CyclicSystem":
        """The system F(x) = rhs"""
        return replace(self, rhs=tuple(complex(v) for v in rhs))

    def residual(self, x: np.ndarray) -> np.ndarray:
        px = np.stack([eval_poly(p, x[:, j]) for j, p in enumerate(self.polys)], axis=1)
        out = np.roll(x, -1, axis=1) - np.asarray(self.a) * np.roll(x, 1, axis=1) - px
        return out - np.asarray(self.rhs) if self.rhs else out

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        batch, n = x.shape
        jac = np.zeros((batch, n, n), dtype=complex)
        for j, p in enumerate(self.polys):
            jac[:, j, (j + 1) % n] += 1.0
            jac[:, j, j] -= eval_poly_derivative(p, x[:, j])
            jac[:, j, (j - 1) % n] -= self.a[j]
        return jac

    def scale(self, x: np.ndarray) -> np.ndarray:
        """Natural size of the residual at x, 1 + max_j |x_j|^d_j"""
        return 1.0 + np.max(np.abs(x) ** self.degrees, axis=1)


def orbit_vector(f: HenonComposition, point, n: int) -> np.ndarray:
    """(x_0, ..., x_{N-1}) along the factor steps of f^n starting at point = (x_0, x_{-1})"""
    x, y = complex(point[0]), complex(point[1])
    out = []
    for _ in range(n):
        for h in f.factors:
            out.append(x)
            x, y = h(x, y)
    return np.array(out, dtype=complex)


def vector_point(xvec: np.ndarray):
    return complex(xvec[0]), complex(xvec[-1])


def batched_solve(jac: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(jac, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        return np.einsum("bij,bj->bi", np.linalg.pinv(jac), rhs)


def _row_norm(v: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        out = np.max(np.abs(v), axis=1)
    return np.where(np.isfinite(out), out, np.inf)


def damped_newton(system: CyclicSystem, x: np.ndarray, max_iter: int = 60,
                  tol: float = 1e-13) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Newton with backtracking on the max-norm residual.

    Returns the iterates, a convergence mask (last step below tol relative to
    the iterate) and the final relative residuals |F(x)| / scale(x).
    """
    x = np.array(x, dtype=complex, copy=True)
    res = system.residual(x)
    norm = _row_norm(res)
    done = np.zeros(len(x), dtype=bool)
    for _ in range(max_iter):
        active = np.flatnonzero(~done & np.isfinite(norm))
        if active.size == 0:
            break
        xa = x[active]
        step = batched_solve(system.jacobian(xa), res[active])
        lam = np.ones(active.size)
        trial = xa - step
        trial_res = system.residual(trial)
        trial_norm = _row_norm(trial_res)
        for _ in range(12):
            worse = ~(trial_norm <= norm[active])
            if not worse.any():
                break
            lam[worse] *= 0.5
            trial[worse] = xa[worse] - lam[worse, None] * step[worse]
            trial_res[worse] = system.residual(trial[worse])
            trial_norm[worse] = _row_norm(trial_res[worse])
        x[active] = trial
        res[active] = trial_res
        norm[active] = trial_norm
        moved = _row_norm(lam[:, None] * step)
        small = moved <= tol * (1.0 + _row_norm(trial))
        done[active[small | (trial_norm == 0)]] = True
    return x, done, norm / system.scale(x)


@dataclass
class TrackerSettings:
    initial_step: float = 0.01
    max_step: float = 0.05
    min_step: float = 1e-13
    corrector_iterations: int = 4
    corrector_tol: float = 1e-8
    max_jump: float = 0.02
    max_steps: int = 20000
    endgame_start: float = 0.9
    accept_residual: float = 1e-9


@dataclass
class TrackResult:
    endpoints: np.ndarray
    converged: np.ndarray
    residuals: np.ndarray
    endgame: np.ndarray

    @property
    def failures(self) -> int:
        return int(np.count_nonzero(~self.converged))


class TotalDegreeHomotopy:
    """H(x, t) = (1 - t) gamma G(x) + t F(x), G_j = x_j^{d_j} - radius^{d_j}.

    The start system has prod d_j regular solutions on the polycircle of the
    given radius; a generic unit gamma keeps every path smooth on [0, 1).
    """

    def __init__(self, system: CyclicSystem, radius: float, gamma: complex):
        self.system = system
        self.radius = float(radius)
        self.gamma = complex(gamma)
        self.degrees = system.degrees
        self.shift = self.radius ** self.degrees

    def start_points(self) -> np.ndarray:
        axes = [self.radius * np.exp(2j * np.pi * np.arange(e) / e) for e in self.degrees]
        return np.array(list(itertools.product(*axes)), dtype=complex).reshape(-1, self.system.size)

    def _start_residual(self, x):
        return x ** self.degrees - self.shift

    def _value(self, x, t):
        s = t[:, None]
        return (1 - s) * self.gamma * self._start_residual(x) + s * self.system.residual(x)

    def _jacobian(self, x, t):
        s = t[:, None, None]
        diag = np.zeros(x.shape + (x.shape[1],), dtype=complex)
        idx = np.arange(x.shape[1])
        diag[:, idx, idx] = self.degrees * x ** (self.degrees - 1)
        return (1 - s) * self.gamma * diag + s * self.system.jacobian(x)

    def _tangent(self, x, t):
        ht = self.system.residual(x) - self.gamma * self._start_residual(x)
        return -batched_solve(self._jacobian(x, t), ht)

    def _predict(self, x, t, h):
        """Classical Runge-Kutta step along dx/dt"""
        hh = h[:, None]
        k1 = self._tangent(x, t)
        k2 = self._tangent(x + 0.5 * hh * k1, t + 0.5 * h)
        k3 = self._tangent(x + 0.5 * hh * k2, t + 0.5 * h)
        k4 = self._tangent(x + hh * k3, t + h)
        return x + hh / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)

    def _correct(self, x, t, settings: TrackerSettings):
        first = None
        size = None
        contracting = np.ones(len(x), dtype=bool)
        with np.errstate(all="ignore"):
            for _ in range(settings.corrector_iterations):
                step = batched_solve(self._jacobian(x, t), self._value(x, t))
                x = x - step
                new_size = _row_norm(step) / (1.0 + _row_norm(x))
                if first is None:
                    first = new_size
                else:
                    contracting &= (new_size <= 0.5 * size) | (new_size <= 1e-12)
                size = new_size
        ok = np.isfinite(x).all(axis=1) & (size <= settings.corrector_tol) \
            & (first <= settings.max_jump) & contracting
        return x, ok

    def _track_batch(self, starts: np.ndarray, settings: TrackerSettings) -> TrackResult:
        x = np.array(starts, dtype=complex, copy=True)
        batch = len(x)
        t = np.zeros(batch)
        h = np.full(batch, settings.initial_step)
        streak = np.zeros(batch, dtype=int)
        state = np.zeros(batch, dtype=np.int8)  # 0 running, 1 reached t = 1, 2 stalled

        for _ in range(settings.max_steps):
            act = np.flatnonzero(state == 0)
            if act.size == 0:
                break
            ta = t[act]
            ha = np.minimum(h[act], 1.0 - ta)
            with np.errstate(all="ignore"):
                pred = self._predict(x[act], ta, ha)
            t1 = np.where(ha >= 1.0 - ta, 1.0, ta + ha)
            corr, ok = self._correct(pred, t1, settings)

            good = act[ok]
            x[good] = corr[ok]
            t[good] = t1[ok]
            streak[good] += 1
            grow = good[streak[good] >= 3]
            h[grow] = np.minimum(2.0 * h[grow], settings.max_step)
            streak[grow] = 0
            state[good[t[good] >= 1.0]] = 1

            bad = act[~ok]
            h[bad] *= 0.5
            streak[bad] = 0
            state[bad[h[bad] < settings.min_step]] = 2

        endgame = (state != 1) & (t >= settings.endgame_start)
        finish = (state == 1) | endgame
        converged = np.zeros(batch, dtype=bool)
        residuals = np.full(batch, np.inf)
        if finish.any():
            polished, _, rel = damped_newton(self.system, x[finish])
            x[finish] = polished
            residuals[finish] = rel
            converged[finish] = rel <= settings.accept_residual
        return TrackResult(endpoints=x, converged=converged, residuals=residuals, endgame=endgame)

    def track(self, starts: np.ndarray, settings: TrackerSettings = None, workers: int = 1) -> TrackResult:
        settings = settings or TrackerSettings()
        if workers <= 1 or len(starts) < MIN_PARALLEL_BATCH:
            result = self._track_batch(starts, settings)
        else:
            chunks = np.array_split(starts, workers)
            with ThreadPoolExecutor(max_workers=workers) as executor:
                parts = list(executor.map(lambda c: self._track_batch(c, settings), chunks))
            result = TrackResult(
                endpoints=np.concatenate([p.endpoints for p in parts]),
                converged=np.concatenate([p.converged for p in parts]),
                residuals=np.concatenate([p.residuals for p in parts]),
                endgame=np.concatenate([p.endgame for p in parts]))
        logger.debug(f"homotopy: {len(starts)} paths, {result.failures} failed, "
                     f"{int(np.count_nonzero(result.endgame))} finished by endgame Newton")
        return result


def multistart_newton(system: CyclicSystem, radius: float, count: int, seed: int,
                      max_iter: int = 80) -> Tuple[np.ndarray, np.ndarray]:
    """Damped Newton from a seeded shuffle of polydisk start points; returns (roots, relative residuals)"""
    rng = np.random.default_rng(seed)
    n = system.size
    moduli = radius * np.sqrt(rng.uniform(size=(count, n)))
    angles = 2 * np.pi * rng.uniform(size=(count, n))
    starts = moduli * np.exp(1j * angles)
    roots, done, rel = damped_newton(system, starts, max_iter=max_iter)
    keep = done & (rel <= 1e-9)
    return roots[keep], rel[keep]


def newton_polish(residual: Callable[[np.ndarray], np.ndarray],
                  jacobian: Callable[[np.ndarray], np.ndarray],
                  x: np.ndarray, max_iter: int = 50, tol: float = 1e-14) -> Tuple[np.ndarray, float]:
    """Plain Newton for a single small system given by callables; returns (x, |F(x)|)"""
    x = np.array(x, dtype=complex, copy=True)
    for _ in range(max_iter):
        fx = residual(x)
        try:
            step = np.linalg.solve(jacobian(x), fx)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jacobian(x), fx, rcond=None)[0]
        x = x - step
        if not np.all(np.isfinite(x)):
            break
        if np.max(np.abs(step)) <= tol * (1.0 + np.max(np.abs(x))):
            break
    return x, float(np.max(np.abs(residual(x))))
