"""
Command-line interface for cslrate.

Subcommands:
    rate      Collapse rate of a scenario file with a chosen method
    figure    CSV data behind one of the reference figures
    layering  η^{zz} report for a layered body
    sweep     One-variable sweep of a scenario or stack file
    em-error  Discrete-vs-continuum relative error over lattice constants

JSON reports go to stdout, CSV tables to the --out file, diagnostics to
stderr. Exit codes: 0 success, 2 invalid input, 3 computation undefined in
this regime, 4 I/O error.

Example Usage:
    python -m cslrate rate scenarios/cube.json --method gpr
    python -m cslrate figure fig2L --out fig2L.csv
    python -m cslrate layering scenarios/cantilever.json
    python -m cslrate sweep scenarios/cube.json --variable Delta --min 1e-10 --max 1e-4 --out sweep.csv
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import arrow

from . import __version__
from .continuum_rates import gamma_adler, gamma_continuous, gamma_gpr, gamma_small_delta
from .diffusion import (
    eta_zz_layered,
    gamma_layered_small_delta,
    layering_ratio,
    layering_reference,
    uniform_equivalent,
)
from .errors import (
    CslRateError,
    DomainError,
    InvalidGeometryError,
    InvalidParameterError,
    ScenarioError,
)
from .figures import FIGURES, FigureBuilder, SweepSpec, em_error_table, sweep_layers, sweep_scenario
from .lattice_rates import gamma_discrete
from .models import Method, PhysParams, RateResult
from .scenario import Scenario, StackFile, load_scenario, load_stack, stack_to_dict

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_REGIME = 3
EXIT_IO = 4


def _meta(command: str) -> Dict[str, str]:
    return {"command": command, "version": __version__, "generated_at": arrow.utcnow().isoformat()}


def _emit(report: Dict[str, Any]) -> None:
    sys.stdout.write(json.dumps(report, indent=2) + "\n")


def rate_for(scenario: Scenario, method: Method) -> RateResult:
    """
    Evaluate one rate method on a scenario.

    A scenario with a "layers" list describes a layered body; only the
    small-displacement rate is defined for it.

    Raises:
        ScenarioError: If the discrete method is asked for without a lattice block
        InvalidGeometryError: If a layered body is given any other method
    """
    geom, disp, params = scenario.geometry, scenario.displacement, scenario.params
    if scenario.stack is not None:
        if method is not Method.CONTINUOUS_SMALL_DELTA:
            raise InvalidGeometryError(
                f"method {method.value} is not available for layered bodies; use {Method.CONTINUOUS_SMALL_DELTA.value}"
            )
        return gamma_layered_small_delta(scenario.stack, disp, params)
    if method is Method.DISCRETE:
        if scenario.lattice is None:
            raise ScenarioError("the discrete method needs a lattice block", field="lattice")
        return gamma_discrete(scenario.lattice, disp, params)
    formulas: Dict[Method, Callable[..., RateResult]] = {
        Method.CONTINUOUS_EXACT: gamma_continuous,
        Method.CONTINUOUS_SMALL_DELTA: gamma_small_delta,
        Method.GPR: gamma_gpr,
        Method.ADLER: gamma_adler,
    }
    return formulas[method](geom, disp, params)


def cmd_rate(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    result = rate_for(scenario, Method(args.method))
    for name in result.violated():
        logger.warning("%s: regime flag %s violated", result.method.value, name)
    report = {"meta": _meta("rate"), **result.to_dict(), "inputs": scenario.to_dict()}
    if scenario.lattice is not None:
        report["lattice_sites"] = list(scenario.lattice.counts)
    _emit(report)
    return EXIT_OK


def _params_from_flags(args: argparse.Namespace) -> PhysParams:
    defaults = PhysParams()
    return PhysParams(
        lam=args.lam if args.lam is not None else defaults.lam,
        r_c=args.rc if args.rc is not None else defaults.r_c,
    )


def cmd_figure(args: argparse.Namespace) -> int:
    overrides = {"density": args.density, "d": args.d, "delta": args.delta, "l": args.l, "points": args.points}
    table = FigureBuilder(_params_from_flags(args), overrides).build(args.name)
    table.write(args.out)
    return EXIT_OK


def layering_report(stack_file: StackFile) -> Dict[str, Any]:
    """η^{zz} of the stack, its decomposition, and the comparison with uniform bodies."""
    stack, params = stack_file.stack, stack_file.params
    eta = eta_zz_layered(stack, params)
    reference = layering_reference(stack)
    same_mass = uniform_equivalent(stack)
    eta_uniform = eta_zz_layered(reference, params).total
    eta_same_mass = eta_zz_layered(same_mass, params).total
    pattern = stack.alternating_pattern()
    assumptions: Dict[str, Any] = {
        "layers": len(stack.layers),
        "interfaces": len(stack.layers) - 1,
        "uniform_density": reference.layers[0].density,
        "uniform_density_rule": "(rho_o + rho_e) / 2" if pattern else "thickness-weighted mean",
        "same_mass_density": same_mass.layers[0].density,
        **stack_file.notes,
    }
    if pattern is not None:
        assumptions["ratio_convention"] = "ratio is quoted against (rho_o + rho_e) / 2, as in the long-body formula"
    report = {
        "meta": _meta("layering"),
        **eta.to_dict(),
        "eta_zz_uniform": eta_uniform,
        "ratio": eta.total / eta_uniform,
        "eta_zz_same_mass": eta_same_mass,
        "ratio_same_mass": eta.total / eta_same_mass,
        "assumptions": assumptions,
        "inputs": {"params": params.to_dict(), **stack_to_dict(stack)},
    }
    if pattern is not None:
        rho_o, rho_e = pattern[0], pattern[1]
        report["ratio_long_body"] = layering_ratio(len(stack.layers) / 2.0, rho_o, rho_e)
    return report


def cmd_layering(args: argparse.Namespace) -> int:
    report = layering_report(load_stack(args.stack))
    logger.info("layering ratio %.4g", report["ratio"])
    _emit(report)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    spec = SweepSpec(args.variable, args.min, args.max, args.points, args.scale)
    if spec.variable == "N_layers":
        stack_file = load_stack(args.input)
        table = sweep_layers(stack_file.stack, stack_file.params, spec)
    else:
        table = sweep_scenario(load_scenario(args.input), spec)
    table.write(args.out)
    return EXIT_OK


def cmd_em_error(args: argparse.Namespace) -> int:
    params = _params_from_flags(args)
    side = args.side if args.side is not None else 10.0 * params.r_c
    delta = args.delta if args.delta is not None else 1e-3 * params.r_c
    spec = SweepSpec("l", args.min * params.r_c, args.max * params.r_c, args.points, "log")
    table = em_error_table(params, side, delta, spec)
    table.write(args.out)
    return EXIT_OK


def _add_physics_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--rc', type=float, help='Localization distance r_C in m (default 1e-7)')
    parser.add_argument('--lambda', dest='lam', type=float, help='Collapse rate lambda in 1/s (default 1e-8)')


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """
    Parse command line arguments.

    Args:
        argv (Optional[List[str]]): Arguments without the program name;
            sys.argv is used when omitted

    Returns:
        argparse.Namespace: Parsed arguments, with func set to the subcommand handler

    Raises:
        SystemExit: If arguments are missing or invalid
    """
    parser = argparse.ArgumentParser(
        prog='cslrate',
        description='Collapse rates and diffusion coefficients of rigid bodies in the CSL model.'
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('--verbose', action='store_true', help='Log progress (INFO)')
    parser.add_argument('--debug', action='store_true', help='Log numerical details (DEBUG)')
    commands = parser.add_subparsers(dest='command', required=True)

    rate = commands.add_parser('rate', help='Rate of a scenario file')
    rate.add_argument('scenario', type=Path, help='Scenario JSON file')
    rate.add_argument('--method', choices=[method.value for method in Method],
                      default=Method.CONTINUOUS_EXACT.value, help='Formula to evaluate')
    rate.set_defaults(func=cmd_rate)

    figure = commands.add_parser('figure', help='CSV data of a reference figure')
    figure.add_argument('name', choices=FIGURES, help='Figure and panel')
    figure.add_argument('--out', type=Path, required=True, help='Output CSV file')
    figure.add_argument('--density', type=float, help='Nucleon density in nucleons/m3')
    figure.add_argument('--d', type=float, help='Square face side in m')
    figure.add_argument('--delta', type=float, help='Displacement in m')
    figure.add_argument('--l', type=float, help='Lattice constant in m')
    figure.add_argument('--points', type=int, help='Number of grid points')
    _add_physics_flags(figure)
    figure.set_defaults(func=cmd_figure)

    layering = commands.add_parser('layering', help='Layering report of a stack file')
    layering.add_argument('stack', type=Path, help='Stack JSON file')
    layering.set_defaults(func=cmd_layering)

    sweep = commands.add_parser('sweep', help='Sweep one variable of a scenario or stack file')
    sweep.add_argument('input', type=Path, help='Scenario file, or stack file for N_layers')
    sweep.add_argument('--variable', choices=['L', 'Delta', 'l', 'N_layers'], required=True)
    sweep.add_argument('--min', type=float, required=True, help='First grid value (m or layer count)')
    sweep.add_argument('--max', type=float, required=True, help='Last grid value')
    sweep.add_argument('--points', type=int, default=50)
    sweep.add_argument('--scale', choices=['linear', 'log'], default='log')
    sweep.add_argument('--out', type=Path, required=True, help='Output CSV file')
    sweep.set_defaults(func=cmd_sweep)

    em_error = commands.add_parser('em-error', help='Relative error of the continuum picture vs l')
    em_error.add_argument('--side', type=float, help='Cube side in m (default 10 r_C)')
    em_error.add_argument('--delta', type=float, help='Displacement along z in m (default 1e-3 r_C)')
    em_error.add_argument('--min', type=float, default=0.02, help='Smallest l in units of r_C')
    em_error.add_argument('--max', type=float, default=0.5, help='Largest l in units of r_C')
    em_error.add_argument('--points', type=int, default=12)
    em_error.add_argument('--out', type=Path, required=True, help='Output CSV file')
    _add_physics_flags(em_error)
    em_error.set_defaults(func=cmd_em_error)

    return parser.parse_args(argv)


def exit_code(error: CslRateError) -> int:
    """Input errors map to 2, everything else the library raises to 3."""
    if isinstance(error, (ScenarioError, InvalidParameterError, DomainError)):
        return EXIT_INPUT
    return EXIT_REGIME


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one cslrate command.

    Results are written only after the computation has succeeded, so a
    failing command leaves no partial output on stdout.

    Returns:
        int: Process exit code
    """
    args = parse_args(argv)
    level = logging.DEBUG if args.debug else logging.INFO if args.verbose else logging.WARNING
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s', stream=sys.stderr)

    try:
        return args.func(args)
    except CslRateError as e:
        logger.error("%s", e)
        return exit_code(e)
    except OSError as e:
        logger.error("I/O error: %s", e)
        return EXIT_IO


if __name__ == '__main__':
    sys.exit(main())
