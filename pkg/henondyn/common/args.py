#!/usr/bin/env python3
"""
henondyn Argument Processing

Subcommand parsers for the command-line front end and the RunConfig record
built from the parsed namespace.
"""

import argparse
from typing import List, Optional, Sequence

from pydantic import BaseModel, ConfigDict

from .utils import ENV_PLAIN_OUTPUT, env_flag

SUBCOMMANDS = ("spectrum", "isospectral", "lyapunov", "verify-bounds", "fold", "continue",
               "scan", "slice", "analyze-quadratic", "selftest", "green")


def str2bool(v):
    """Convert string to boolean value"""
    if isinstance(v, bool):
        return v
    if v.lower() in ('yes', 'true', 't', 'y', '1'):
        return True
    elif v.lower() in ('no', 'false', 'f', 'n', '0'):
        return False
    else:
        raise argparse.ArgumentTypeError('Boolean value expected.')


def str2complex(v):
    """Parse '0.3', '-0.669+0.73j', '1-2i' or '0.5,0.25' into a complex number"""
    if isinstance(v, complex):
        return v
    text = v.strip().replace(" ", "")
    if "," in text:
        re_part, _, im_part = text.partition(",")
        try:
            return complex(float(re_part), float(im_part))
        except ValueError:
            raise argparse.ArgumentTypeError(f"Complex value expected, got {v!r}") from None
    text = text.replace("i", "j")
    try:
        return complex(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Complex value expected, got {v!r}") from None


def add_system_args(parser: argparse.ArgumentParser):
    """Worker pool, device, seed and output flags shared by every subcommand"""
    system_group = parser.add_argument_group('System Configuration')
    system_group.add_argument('--workers', type=int, default=None,
                              help='Worker-pool size (default: $HENONDYN_WORKERS or 1)')
    system_group.add_argument('--device', type=str, default=None, choices=['cpu', 'cuda'],
                              help='Torch device for orbit iteration (default: $HENONDYN_DEVICE or cpu)')
    system_group.add_argument('--seed', '--random-seed', '--random_seed', type=int, default=None,
                              help='Seed for start grids and shuffles (default: 0, selftest: its fixed seed)')
    system_group.add_argument('--out', type=str, default=None,
                              help="Write the JSON result to this file, or '-' for stdout")
    system_group.add_argument('--plain-output', '--plain_output', default=None,
                              type=str2bool, nargs='?', const=True,
                              help='Use plain text output (no colors/formatting) (default: $HENONDYN_PLAIN_OUTPUT or False)')


def add_map_args(parser: argparse.ArgumentParser, required: bool = True, *aliases: str):
    """Input map file, factors in application order"""
    map_group = parser.add_argument_group('Map Configuration')
    map_group.add_argument('--map', *aliases, dest='map_path', type=str, required=required, default=None,
                           help='JSON file holding the composition {"factors": [...]}')
    return map_group


def add_solver_args(group, period_required: bool = False, max_period: bool = False):
    """Periodic-point solver flags"""
    if max_period:
        group.add_argument('--max-period', '--max_period', type=int, default=2,
                           help='Largest period P (default: 2)')
    else:
        group.add_argument('--period', type=int, required=period_required, default=None,
                           help='Period n of the saddle points')
    group.add_argument('--method', type=str, default='auto', choices=['auto', 'homotopy'],
                       help="'auto' uses closed forms for single maps at n <= 2 (default: auto)")
    group.add_argument('--budget', type=int, default=4096,
                       help='Largest admissible d^n (default: 4096)')


def add_family_args(parser: argparse.ArgumentParser, required: bool = True):
    family_group = parser.add_argument_group('Family Configuration')
    family_group.add_argument('--family', type=str, default='quadratic' if required else None,
                              choices=['quadratic'],
                              help='Parameter family a -> f_a (default: quadratic)')
    family_group.add_argument('--c', '--family-c', '--family_c', dest='family_c', type=str2complex, default=0j,
                              help='Constant term c of the quadratic family (a y + x^2 + c, x) (default: 0)')
    return family_group


def add_iteration_args(group):
    group.add_argument('--max-iter', '--max_iter', type=int, default=5000,
                       help='Iteration cap per orbit (default: 5000)')
    group.add_argument('--max-period', '--max_period', type=int, default=12,
                       help='Longest detected cycle (default: 12)')
    group.add_argument('--window', type=float, nargs=4, default=[-2.0, 2.0, -2.0, 2.0],
                       metavar=('XMIN', 'XMAX', 'YMIN', 'YMAX'),
                       help='Window of complex initial values x (default: -2 2 -2 2)')


def create_parser() -> argparse.ArgumentParser:
    """Create the henondyn argument parser with one subparser per operation"""
    parser = argparse.ArgumentParser(prog='henondyn', description='henondyn: dynamics of complex Hénon maps')
    subparsers = parser.add_subparsers(dest='subcommand', metavar='SUBCOMMAND')
    subparsers.required = True

    # Trace spectra
    p = subparsers.add_parser('spectrum', help='Trace spectrum of a map up to a period')
    group = add_map_args(p)
    group.add_argument('--compare', '--other', dest='other_path', type=str, default=None,
                       help='Second map; report whether the two spectra agree')
    group.add_argument('--tol', type=float, default=1e-8, help='Matching tolerance (default: 1e-8)')
    add_solver_args(group, max_period=True)
    add_system_args(p)

    p = subparsers.add_parser('isospectral', help='Search a coefficient box for maps with the same spectrum')
    group = add_map_args(p, True, '--base')
    add_solver_args(group, max_period=True)
    search_group = p.add_argument_group('Isospectral Search')
    search_group.add_argument('--mode', type=str, default='fixed-jac', choices=['fixed-jac', 'free-jac', 'huguin-p2'],
                              help='Search coordinates (default: fixed-jac)')
    search_group.add_argument('--box-radius', '--box_radius', '--box', dest='box_radius', type=float, default=2.0,
                              help='Half-width of the coefficient box (default: 2.0)')
    search_group.add_argument('--grid', type=int, default=50, help='Grid points per coordinate (default: 50)')
    search_group.add_argument('--tol', type=float, default=1e-6, help='Acceptance tolerance (default: 1e-6)')
    add_system_args(p)

    # Lyapunov exponents and certificates
    p = subparsers.add_parser('lyapunov', help='chi^+ estimate from saddle points of one period')
    group = add_map_args(p)
    add_solver_args(group, period_required=True)
    group.add_argument('--via', type=str, default='direct', choices=['direct', 'inverse'],
                       help="'inverse' estimates through the inverse normal form (default: direct)")
    group.add_argument('--tol', type=float, default=1e-12, help='Escape-rate tolerance (default: 1e-12)')
    add_system_args(p)

    p = subparsers.add_parser('verify-bounds', help='Check a chi^+ estimate against the escape-rate sandwich')
    group = add_map_args(p)
    group.add_argument('--chi', type=float, default=None,
                       help='Estimate to verify (default: computed from saddles of --period)')
    add_solver_args(group)
    group.add_argument('--tol', type=float, default=1e-12, help='Escape-rate tolerance (default: 1e-12)')
    add_system_args(p)

    p = subparsers.add_parser('fold', help='Solenoidal fold certificate of a disconnected Julia set')
    group = add_map_args(p)
    group.add_argument('--grid', type=int, default=801, help='Labelling grid per side (default: 801)')
    group.add_argument('--lines', type=int, default=10, help='Sampled horizontal lines (default: 10)')
    group.add_argument('--tol', type=float, default=1e-12, help='Escape-rate tolerance (default: 1e-12)')
    add_system_args(p)

    # Parameter space
    p = subparsers.add_parser('continue', help='Continue a periodic orbit along a parameter path')
    group = add_family_args(p)
    group.add_argument('--param', '--start', dest='param', type=str2complex, required=True,
                       help='Starting parameter a')
    group.add_argument('--orbit', type=str, default=None, choices=['alpha', 'beta'],
                       help='Fixed point of the quadratic family to follow')
    group.add_argument('--point', type=str2complex, nargs=2, default=None, metavar=('X', 'Y'),
                       help='A point of the orbit to follow (requires --period)')
    group.add_argument('--period', type=int, default=None, help='Period of --point')
    group.add_argument('--path', type=str2complex, nargs='+', default=None,
                       help='Waypoints of the parameter path')
    group.add_argument('--loop', type=int, default=None, metavar='N',
                       help='Close the path around 0 through N rotations of the start parameter')
    group.add_argument('--max-step', '--max_step', type=float, default=0.01,
                       help='Largest arc-length step (default: 0.01)')
    add_system_args(p)

    p = subparsers.add_parser('scan', help='Rings of parameters with extra attracting cycles')
    add_family_args(p)
    scan_group = p.add_argument_group('Scan')
    scan_group.add_argument('--moduli', '--modulus', dest='moduli', type=float, nargs='+', required=True,
                            help='Moduli |a| of the scanned rings')
    scan_group.add_argument('--angles', type=int, default=500, help='Angles per modulus (default: 500)')
    scan_group.add_argument('--inits', type=int, default=10000, help='Initial points per parameter (default: 10000)')
    add_iteration_args(scan_group)
    add_system_args(p)

    p = subparsers.add_parser('slice', help='Render the slice y = 0 of basins and escape set')
    group = add_map_args(p, required=False)
    add_family_args(p, required=False)
    slice_group = p.add_argument_group('Slice')
    slice_group.add_argument('--param', type=str2complex, default=None, help='Parameter a of --family')
    slice_group.add_argument('--resolution', type=int, nargs=2, default=[512, 512], metavar=('W', 'H'),
                             help='Image size (default: 512 512)')
    slice_group.add_argument('--image', type=str, required=True, help='Output .ppm or .png file')
    add_iteration_args(slice_group)
    add_system_args(p)

    p = subparsers.add_parser('analyze-quadratic', help='Fixed points alpha and beta of (a y + x^2, x)')
    group = p.add_argument_group('Family Configuration')
    group.add_argument('--param', type=str2complex, required=True, help='Parameter a')
    add_system_args(p)

    p = subparsers.add_parser('selftest', help='Run the invariant suite')
    add_system_args(p)

    p = subparsers.add_parser('green', help='Green and Böttcher functions at given points')
    group = add_map_args(p)
    group.add_argument('--point', type=str2complex, nargs=2, action='append', required=True, metavar=('X', 'Y'),
                       help='Evaluation point; repeat for several points')
    group.add_argument('--function', type=str, default='green-plus',
                       choices=['green-plus', 'green-minus', 'bottcher-plus', 'green-p', 'bottcher-p'],
                       help="'green-p' and 'bottcher-p' use the first factor's polynomial at X (default: green-plus)")
    group.add_argument('--tol', type=float, default=1e-12, help='Truncation tolerance (default: 1e-12)')
    add_system_args(p)

    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """Parse arguments, filling plain-output from the environment when absent"""
    parser = create_parser()
    args = parser.parse_args(argv)
    if args.plain_output is None:
        args.plain_output = env_flag(ENV_PLAIN_OUTPUT)
    return args


class RunConfig(BaseModel):
    """Everything a run depends on; the seed fixes every random choice"""

    model_config = ConfigDict(extra='ignore')

    subcommand: str
    map_path: Optional[str] = None
    other_path: Optional[str] = None
    family: Optional[str] = None
    param: Optional[str] = None
    period: Optional[int] = None
    max_period: Optional[int] = None
    tol: Optional[float] = None
    budget: Optional[int] = None
    seed: Optional[int] = None
    mode: Optional[str] = None
    box_radius: Optional[float] = None
    grid: Optional[int] = None
    moduli: Optional[List[float]] = None
    angles: Optional[int] = None
    inits: Optional[int] = None
    max_iter: Optional[int] = None
    workers: Optional[int] = None
    device: Optional[str] = None
    plain_output: bool = False
    out: Optional[str] = None
    image: Optional[str] = None

    @classmethod
    def from_namespace(cls, args: argparse.Namespace) -> "RunConfig":
        data = dict(vars(args))
        if data.get('param') is not None:
            data['param'] = f"{complex(data['param']):g}"
        return cls.model_validate(data)
