#!/usr/bin/env python3
"""
henondyn Command Line Interface

One subcommand per operation. Results go to ``--out`` as JSON (``-`` for
stdout); logs, configuration panels and summaries go to stderr.

Exit codes: 0 success, 2 partial or inconclusive result (including unmet
hypotheses of a certificate), 1 error, 130 interrupted.
"""

import cmath
import math
import sys
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

from pydantic import BaseModel

from . import selftest
from .bifurcation import (FAMILIES, SLICE_CHUNK_ROWS, continue_orbit, quadratic_family_fixed_analysis, render_slice,
                          ring_scan)
from .common.args import RunConfig, parse_args
from .common.display import Display, display
from .common.errors import HypothesisError, UncertifiedDomainError
from .common.logging import Logger, logger
from .common.schemas import ErrorModel, GreenModel, GreenValueModel, complex_to_pair
from .common.utils import resolve_device, resolve_workers, write_output
from .henon_core import bottcher_plus, green_minus, green_plus, load_composition
from .lyap import chi_plus_periodic, chi_plus_via_inverse, fold_certificate, verify_lyapunov_bounds
from .poly1d import bottcher_p, green_p
from .spectra import SearchBox, isospectral_search, spectra_equal, trace_spectrum

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCOMPLETE = 2
EXIT_INTERRUPTED = 130


@dataclass
class Outcome:
    """What a handler hands back: the JSON record, a summary table and the exit code"""

    model: BaseModel
    rows: List[tuple]
    title: str
    exit_code: int = EXIT_OK


def _seed(args) -> int:
    return args.seed if args.seed is not None else 0


def _status_code(complete: bool) -> int:
    return EXIT_OK if complete else EXIT_INCOMPLETE


def _fmt(z: complex) -> str:
    z = complex(z)
    return f"{z.real:.6g}{z.imag:+.6g}i"


# --------------------------------------------------------------------------
# Handlers
# --------------------------------------------------------------------------

def run_spectrum(args) -> Outcome:
    f = load_composition(args.map_path)
    workers = resolve_workers(args.workers)
    with logger.stage_context(f"Trace spectrum up to period {args.max_period}"):
        table = trace_spectrum(f, args.max_period, method=args.method, budget=args.budget,
                               seed=_seed(args), workers=workers)
    rows = [("Jacobian", _fmt(table.jacobian), ""), ("Degree", table.degree, "")]
    for n in sorted(table.traces):
        rows.append((f"Period {n}", len(table.traces[n]), table.status[n]))

    if args.other_path is None:
        return Outcome(table.to_model(), rows, "Trace Spectrum", _status_code(table.complete))

    g = load_composition(args.other_path)
    with logger.stage_context("Trace spectrum of the compared map"):
        other = trace_spectrum(g, args.max_period, method=args.method, budget=args.budget,
                               seed=_seed(args), workers=workers)
    comparison = spectra_equal(table, other, tol=args.tol)
    rows += [("Spectra equal", comparison.equal, ""), ("Max distance", f"{comparison.max_distance:.3e}", "")]
    if comparison.reason:
        rows.append(("Reason", comparison.reason, ""))
    complete = table.complete and other.complete
    return Outcome(comparison.to_model(), rows, "Spectrum Comparison", _status_code(complete))


def run_isospectral(args) -> Outcome:
    f0 = load_composition(args.map_path)
    with logger.stage_context(f"Isospectral search ({args.mode}, grid {args.grid})"):
        result = isospectral_search(f0, args.max_period, SearchBox(radius=args.box_radius), grid=args.grid,
                                    tol=args.tol, mode=args.mode, workers=resolve_workers(args.workers))
    rows = [("Cells scanned", result.cells_scanned, ""), ("Matches", len(result), ""), ("Status", result.status, "")]
    for k, match in enumerate(result.matches):
        rows.append((f"Match {k}", str(match.map), f"d={match.distance:.2e}"))
    return Outcome(result.to_model(), rows, "Isospectral Search", _status_code(result.status == "complete"))


def run_lyapunov(args) -> Outcome:
    f = load_composition(args.map_path)
    estimator = chi_plus_via_inverse if args.via == "inverse" else chi_plus_periodic
    with logger.stage_context(f"Saddle points of period {args.period}"):
        report = estimator(f, args.period, method=args.method, budget=args.budget, seed=_seed(args),
                           workers=resolve_workers(args.workers), tol=args.tol)
    rows = [("chi+", report.chi_plus_estimate, ""), ("chi-", report.chi_minus, ""),
            ("Saddle points", report.saddle_count, ""), ("Spread", report.spread, ""),
            ("Lower bound", report.bound_lower, ""), ("Upper bound", report.bound_upper, ""),
            ("Status", report.status, "")]
    return Outcome(report.to_model(), rows, "Lyapunov Exponent", _status_code(report.status == "complete"))


def run_verify_bounds(args) -> Outcome:
    f = load_composition(args.map_path)
    chi = args.chi
    if chi is None:
        period = args.period or 5
        with logger.stage_context(f"Saddle points of period {period}"):
            estimate = chi_plus_periodic(f, period, method=args.method, budget=args.budget, seed=_seed(args),
                                         workers=resolve_workers(args.workers), tol=args.tol)
        if estimate.chi_plus_estimate is None:
            logger.warning("no estimate to verify")
            return Outcome(estimate.to_model(), [("Status", estimate.status, "")], "Lyapunov Bounds",
                           EXIT_INCOMPLETE)
        chi = estimate.chi_plus_estimate
    report = verify_lyapunov_bounds(f, chi, tol=args.tol)
    bounds = report.bounds
    rows = [("chi+", chi, ""), ("M(f)", bounds.M, ""),
            ("Lower bound", bounds.lower, "applicable" if bounds.lower_applicable else "not applicable"),
            ("Upper bound", bounds.upper, "applicable" if bounds.upper_applicable else "not applicable"),
            ("Passed", "n/a" if report.passed is None else report.passed, "")]
    if report.passed is None:
        code = EXIT_INCOMPLETE
    else:
        code = EXIT_OK if report.passed else EXIT_ERROR
    return Outcome(report.to_model(), rows, "Lyapunov Bounds", code)


def run_fold(args) -> Outcome:
    f = load_composition(args.map_path)
    with logger.stage_context("Solenoidal fold construction"):
        cert = fold_certificate(f, tol=args.tol, grid=args.grid, lines=args.lines)
    rows = [("Status", cert.status, ""), ("q", cert.q, ""), ("s", cert.s, ""),
            ("Rigorous", cert.rigorous, ""), ("Projection", cert.projection, "")]
    if cert.reason:
        rows.append(("Reason", cert.reason, ""))
    return Outcome(cert.to_model(), rows, "Fold Certificate", _status_code(cert.certified))


def _continuation_path(args) -> List[complex]:
    if args.loop is not None:
        if args.loop < 3:
            raise ValueError("--loop needs at least 3 waypoints")
        return [args.param * cmath.exp(2j * math.pi * k / args.loop) for k in range(1, args.loop + 1)]
    if not args.path:
        raise ValueError("continue needs --path or --loop")
    return list(args.path)


def run_continue(args) -> Outcome:
    family = FAMILIES[args.family](args.family_c)
    a = complex(args.param)
    if args.orbit is not None:
        if args.family_c != 0:
            raise ValueError("--orbit alpha/beta names fixed points of the family with c = 0")
        point = (0j, 0j) if args.orbit == "alpha" else (1 - a, 1 - a)
        period = 1
    elif args.point is not None:
        if args.period is None:
            raise ValueError("--point requires --period")
        point, period = tuple(args.point), args.period
    else:
        raise ValueError("continue needs --orbit or --point")

    with logger.stage_context(f"Continuation of a period-{period} orbit"):
        track = continue_orbit(family, a, point, _continuation_path(args), max_step=args.max_step, period=period)
    rows = [("Steps", len(track.steps), ""), ("Unit crossings", len(track.crossings()), ""),
            ("Status", track.status, "")]
    for event in track.crossings():
        rows.append((f"Eigenvalue {event.eigenvalue_index}", _fmt(event.param), event.direction))
    if track.monodromy is not None:
        rows.append(("Monodromy", track.monodromy, ""))
    if track.reason:
        rows.append(("Reason", track.reason, ""))
    return Outcome(track.to_model(), rows, "Continuation", _status_code(track.status == "complete"))


def run_scan(args) -> Outcome:
    family = FAMILIES[args.family](args.family_c)
    total = len(args.moduli) * args.angles
    with display.create_progress(total, label="Scanning") as progress:
        summary = ring_scan(family, args.moduli, args.angles, inits=args.inits, max_iter=args.max_iter,
                            max_period=args.max_period, window=args.window, device=resolve_device(args.device),
                            workers=resolve_workers(args.workers), progress=progress.advance)
    rows = [(f"|a| = {m:g}", count, "parameters") for m, count in summary.counts.items()]
    rows.append(("First modulus", "none" if summary.first_modulus is None else summary.first_modulus, ""))
    rows.append(("Undecided share", f"{summary.report.undecided_fraction:.3%}", ""))
    return Outcome(summary.report.to_model(), rows, "Attracting-Cycle Scan")


def run_slice(args) -> Outcome:
    if args.map_path is not None:
        f = load_composition(args.map_path)
    elif args.family is not None and args.param is not None:
        f = FAMILIES[args.family](args.family_c)(args.param)
    else:
        raise ValueError("slice needs --map, or --family with --param")
    width, height = args.resolution
    bands = -(-height // SLICE_CHUNK_ROWS)
    with display.create_progress(bands, label="Rendering") as progress:
        image = render_slice(f, window=args.window, resolution=(width, height), max_iter=args.max_iter,
                             max_period=args.max_period, device=resolve_device(args.device),
                             workers=resolve_workers(args.workers), progress=progress.advance)
    path = image.write(args.image)
    rows = [(name, count, "pixels") for name, count in image.class_counts().items()]
    rows.append(("Image", str(path), ""))
    return Outcome(image.to_model(str(path)), rows, "Slice")


def run_analyze_quadratic(args) -> Outcome:
    analysis = quadratic_family_fixed_analysis(args.param)
    rows = [("alpha", analysis.alpha.orbit_type.value, ", ".join(_fmt(v) for v in analysis.alpha.eigenvalues)),
            ("beta", analysis.beta.orbit_type.value, ", ".join(_fmt(v) for v in analysis.beta.eigenvalues)),
            ("Siegel candidate", analysis.siegel_candidate, ""), ("Neutral arc", analysis.neutral_arc, "")]
    return Outcome(analysis.to_model(), rows, "Quadratic Family Fixed Points")


def run_selftest(args) -> Outcome:
    report = selftest.run_selftest(args.seed if args.seed is not None else selftest.SEED)
    rows = [(c.name, c.passed, c.detail) for c in report.checks]
    return Outcome(report.to_model(), rows, "Self Test", EXIT_OK if report.passed else EXIT_ERROR)


def run_green(args) -> Outcome:
    f = load_composition(args.map_path)
    p = f.factors[0].p
    functions: Dict[str, Callable] = {
        "green-plus": lambda pt: green_plus(f, pt, args.tol),
        "green-minus": lambda pt: green_minus(f, pt, args.tol),
        "bottcher-plus": lambda pt: bottcher_plus(f, pt, args.tol),
        "green-p": lambda pt: green_p(p, pt[0], args.tol),
        "bottcher-p": lambda pt: bottcher_p(p, pt[0], args.tol),
    }
    evaluate = functions[args.function]
    values, rows = [], []
    for x, y in args.point:
        value = complex(evaluate((complex(x), complex(y))))
        values.append(GreenValueModel(point=[complex_to_pair(x), complex_to_pair(y)], value=complex_to_pair(value)))
        rows.append((f"({_fmt(x)}, {_fmt(y)})", _fmt(value) if value.imag else f"{value.real:.12g}", ""))
    return Outcome(GreenModel(map=f.to_model(), function=args.function, values=values), rows, args.function)


HANDLERS: Dict[str, Callable] = {
    "spectrum": run_spectrum,
    "isospectral": run_isospectral,
    "lyapunov": run_lyapunov,
    "verify-bounds": run_verify_bounds,
    "fold": run_fold,
    "continue": run_continue,
    "scan": run_scan,
    "slice": run_slice,
    "analyze-quadratic": run_analyze_quadratic,
    "selftest": run_selftest,
    "green": run_green,
}


# --------------------------------------------------------------------------
# Entry points
# --------------------------------------------------------------------------

def _configure_output(use_plain_mode: bool):
    for component in (Display, Logger):
        if not component.is_initialized():
            component.configure(use_plain_mode=use_plain_mode)


def _write_error(args, kind: str, error: BaseException):
    if getattr(args, "out", None) is None:
        return
    try:
        write_output(ErrorModel(error={"kind": kind, "type": type(error).__name__, "message": str(error)}), args.out)
    except OSError:
        pass


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand and return its exit code"""
    args = parse_args(argv)
    _configure_output(args.plain_output)

    try:
        config = RunConfig.from_namespace(args)
        display.render_config(config, title=f"henondyn {args.subcommand}")
        outcome = HANDLERS[args.subcommand](args)
        write_output(outcome.model, args.out)
        color = {EXIT_OK: "green", EXIT_INCOMPLETE: "yellow"}.get(outcome.exit_code, "red")
        display.render_results(outcome.rows, title=outcome.title, color=color)
        if outcome.exit_code == EXIT_INCOMPLETE:
            logger.warning("result is partial or inconclusive")
        return outcome.exit_code
    except (HypothesisError, UncertifiedDomainError) as e:
        logger.warning(f"Hypotheses not met: {e}", escape=True)
        _write_error(args, "hypotheses-unmet", e)
        return EXIT_INCOMPLETE
    except (ValueError, FileNotFoundError) as e:
        logger.error(f"Configuration error: {e}", escape=True)
        _write_error(args, "configuration", e)
        return EXIT_ERROR
    except RuntimeError as e:
        logger.error(f"Runtime error: {e}", escape=True)
        _write_error(args, "runtime", e)
        return EXIT_ERROR
    except KeyboardInterrupt:
        logger.warning("Interrupted by user")
        return EXIT_INTERRUPTED


def main():
    """Main entry point"""
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
