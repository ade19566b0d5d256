#!/usr/bin/env python3
"""
srvolume CLI - Hausdorff volume analysis of polynomial sub-Riemannian frames

This script drives every analysis of a problem manifest from the command line
and prints a text report or a machine-readable JSON document.

Features:
- Growth vectors and regular/singular classification at points
- Restricted flags and (strong) equiregularity of declared submanifolds
- Nonholonomic order of the volume along a submanifold (sigma)
- Privileged charts and nilpotent approximations
- Hausdorff dimension and finiteness verdicts
- Floating-point probes cross-checking the exact results
- Manifest validation

Usage:
    python sr_cli.py verdict manifests/martinet.yml --point origin
    python sr_cli.py flags --help
    python sr_cli.py validate-manifest manifests/r5_single_stratum.yml --param k=3

Exit codes: 0 success, 1 input or usage error, 2 inconclusive analysis.
"""

import sys
import argparse
import logging
import traceback
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml
from colorama import Fore, Style, init

from libs.errors import AnalysisError, InputError, NotRegularError, PreconditionError, \
    PrivilegeError, TruncationError
from libs.flags import PointClass, generic_growth, growth_vector, restricted_profile, sample_grid, \
    singular_locus_check, strong_equireg_check
from libs.manifest import Manifest, Options, manifest_issues, parse_manifest, parse_param_overrides
from libs.nilpotent import build_chart, hat_form, nilpotentize
from libs.orders import nu_on_submanifold, sigma_bounds
from libs.probe import ProbeConfig, dimension_probe, finiteness_probe, write_series_csv
from libs.report import (SAMPLED, Report, Section, assessment_sections, chart_section,
                         growth_section, notes_section, nu_section, order_section, probe_section,
                         restricted_section, tagged, verdict_section)
from libs.verdict import StratumDimension, assess_point, hausdorff_dimension, stratum_volume_finiteness

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[
        logging.StreamHandler()
    ]
)
logger = logging.getLogger(__name__)

init(autoreset=True)
_ERROR_STYLE   = Fore.RED + Style.BRIGHT + "\rError! "
_SUCCESS_STYLE = Fore.GREEN + Style.BRIGHT + "\r"
_WARNING_STYLE = Fore.YELLOW + Style.BRIGHT + "\rWarning! "


def load_defaults(path: str = "defaults.yml") -> Dict[str, Any]:
    """Load default configuration from defaults.yml file."""
    defaults_file = Path(path)

    # Default fallback values
    defaults = asdict(Options())

    if defaults_file.exists():
        try:
            with open(defaults_file, 'r') as f:
                loaded_defaults = yaml.safe_load(f) or {}
                defaults.update(loaded_defaults)
        except Exception as e:
            logger.error(f"Error loading {path}: {e}")
            defaults = asdict(Options())
    else:
        logger.info(f"{path} not found, using built-in defaults")

    return defaults


def cli_overrides(args) -> Dict[str, Any]:
    """Options given on the command line (unset flags are None and do not override)."""
    return {
        "cap_step": getattr(args, "cap_step", None),
        "cap_order": getattr(args, "cap_order", None),
        "samples": getattr(args, "samples", None),
        "seed": getattr(args, "seed", None),
        "format": getattr(args, "format", None),
    }


def load_problem(args) -> Tuple[Manifest, Options]:
    path = Path(args.manifest)
    if not path.exists():
        raise InputError(f"manifest {args.manifest} does not exist")
    manifest = parse_manifest(path.read_text(encoding="utf-8"), parse_param_overrides(args.param))
    options = Options.layered(load_defaults(), manifest.options, cli_overrides(args))
    return manifest, options


def manifest_echo(manifest: Manifest) -> Dict[str, Any]:
    return {
        "name": manifest.name,
        "dimension": manifest.dimension,
        "rank": manifest.rank,
        "coordinates": list(manifest.coordinates),
        "parameters": manifest.parameters,
        "frame": manifest.sources.get("frame", {}),
        "volume": manifest.sources.get("volume", "1"),
        "submanifolds": sorted(manifest.submanifolds),
        "points": {name: list(pt) for name, pt in manifest.points.items()},
    }


def selected_points(manifest: Manifest, args) -> List[Tuple[str, Tuple]]:
    if args.point:
        return [(spec, manifest.point(spec)) for spec in args.point]
    if not manifest.points:
        raise InputError("no points declared in the manifest; pass --point")
    return list(manifest.points.items())


def stratum_for(manifest: Manifest, args, point, required: bool):
    """The --submanifold if given, else the first declared submanifold through the point."""
    if args.submanifold:
        spec = manifest.submanifold(args.submanifold)
        if not spec.contains(point):
            raise InputError(f"point {[str(v) for v in point]} is not on submanifold {spec.name}")
        return spec
    if not required:
        return None
    through = manifest.submanifolds_through(point)
    if not through:
        return None
    logger.info(f"using submanifold {through[0].name} through the point")
    return through[0]


def emit(report: Report, options: Options, args) -> int:
    if options.format == "machine":
        print(report.to_json())
    else:
        print(report.to_text())
    if getattr(args, "out", None):
        report.write(args.out)
    if report.inconclusive:
        print(_WARNING_STYLE + "analysis inconclusive", file=sys.stderr)
    return report.exit_code


# ---------- Commands ----------

def cmd_flags(args):
    """Growth vectors at points, plus the restricted flag when a submanifold is given."""
    manifest, options = load_problem(args)
    report = Report("flags", manifest_echo(manifest), asdict(options))
    generic = generic_growth(manifest.frame, options.cap_step)
    for label, pt in selected_points(manifest, args):
        profile = growth_vector(manifest.frame, pt, options.cap_step)
        classification = PointClass.REGULAR if profile.dims == generic.dims else PointClass.SINGULAR
        report.add(growth_section(label, profile, generic, classification))
        spec = stratum_for(manifest, args, pt, required=False)
        if spec is not None:
            report.add(restricted_section(spec.name, restricted_profile(manifest.frame, spec,
                                                                        spec.params_of(pt),
                                                                        options.cap_step)))
    return emit(report, options, args)


def cmd_strata(args):
    """Equiregularity of each submanifold and the Hausdorff dimension of the stratification."""
    manifest, options = load_problem(args)
    report = Report("strata", manifest_echo(manifest), asdict(options))
    generic = generic_growth(manifest.frame, options.cap_step)
    names = [args.submanifold] if args.submanifold else sorted(manifest.submanifolds)
    strata = [StratumDimension("regular", generic.Q)]
    for name in names:
        spec = manifest.submanifold(name)
        grid = sample_grid(spec.dim, options.samples)
        on_n = [(label, pt) for label, pt in manifest.points.items() if spec.contains(pt)]
        anchors = [(label, spec.params_of(pt)) for label, pt in on_n] or [("sample", grid[0])]
        equireg = strong_equireg_check(manifest.frame, spec, grid + [t for _, t in anchors],
                                       options.cap_step)
        strata.append(StratumDimension(spec.name, equireg.Q_N_bar))
        for label, params in anchors:
            restricted = restricted_profile(manifest.frame, spec, params, options.cap_step)
            surrogate = None
            try:
                surrogate = singular_locus_check(manifest.frame, spec, restricted.point,
                                                 samples=options.samples, cap=options.cap_step, generic=generic)
            except PreconditionError as exc:
                logger.warning(f"surrogate check skipped: {exc}")
            report.add(restricted_section(spec.name, restricted, equireg, surrogate))
            if equireg.equiregular:
                verdict = stratum_volume_finiteness(manifest.frame, spec, restricted.point, equireg)
                report.add(verdict_section(label, verdict, f"Volume of the ball within {spec.name} at {label}"))
    dims = Section("dimension", "Hausdorff dimension")
    dims.fields = {"strata": tagged({s.name: s.q_bar for s in strata}, SAMPLED),
                   "dim_H": tagged(hausdorff_dimension(strata), SAMPLED)}
    report.add(dims)
    return emit(report, options, args)


def cmd_sigma(args):
    """Order of the volume along a submanifold; nu at the given points when they lie on it."""
    manifest, options = load_problem(args)
    if not args.submanifold:
        raise InputError("sigma needs --submanifold")
    spec = manifest.submanifold(args.submanifold)
    report = Report("sigma", manifest_echo(manifest), asdict(options))
    generic = generic_growth(manifest.frame, options.cap_step)
    order = sigma_bounds(manifest.frame, manifest.volume, spec, generic.Q, order_cap=options.cap_order,
                         bracket_len=options.bracket_len, sample_count=options.samples,
                         step_cap=options.cap_step, budget=options.family_budget)
    report.add(order_section(spec.name, order))
    for label, pt in (selected_points(manifest, args) if args.point else []):
        params = spec.params_of(pt)
        if params is None:
            raise InputError(f"point {label} is not on submanifold {spec.name}")
        try:
            report.add(nu_section(label, nu_on_submanifold(manifest.frame, manifest.volume, spec, params,
                                                           step_cap=options.cap_step,
                                                           budget=options.family_budget)))
        except NotRegularError as exc:
            report.add(notes_section(label, [f"nu not available: {exc}"]))
    return emit(report, options, args)


def cmd_nilpotent(args):
    """Privileged chart and nilpotent approximation at each point."""
    manifest, options = load_problem(args)
    report = Report("nilpotent", manifest_echo(manifest), asdict(options))
    for label, pt in selected_points(manifest, args):
        spec = stratum_for(manifest, args, pt, required=False)
        chart = build_chart(manifest.frame, pt, trunc=options.trunc, submanifold=spec, cap=options.cap_step)
        nil_frame = nilpotentize(manifest.frame, chart)
        hat = hat_form(chart, nil_frame, submanifold=spec, volume=manifest.volume)
        report.add(chart_section(label, chart, nil_frame, manifest.coordinates, hat))
    return emit(report, options, args)


def cmd_verdict(args):
    """Hausdorff dimension and finiteness of the volume of small balls at each point."""
    manifest, options = load_problem(args)
    report = Report("verdict", manifest_echo(manifest), asdict(options))
    for label, pt in selected_points(manifest, args):
        spec = stratum_for(manifest, args, pt, required=True)
        assessment = assess_point(manifest.frame, manifest.volume, pt, submanifold=spec,
                                  step_cap=options.cap_step, order_cap=options.cap_order,
                                  bracket_len=options.bracket_len, samples=options.samples,
                                  family_budget=options.family_budget)
        report.extend(assessment_sections(label, assessment))
    return emit(report, options, args)


def cmd_probe(args):
    """Floating-point cross-checks of Q(p) and of the finiteness verdict."""
    manifest, options = load_problem(args)
    probe_values = dict(options.probe)
    probe_values["seed"] = options.seed
    config = ProbeConfig.from_mapping(probe_values)
    report = Report("probe", manifest_echo(manifest), asdict(options))
    generic = generic_growth(manifest.frame, options.cap_step)
    for label, pt in selected_points(manifest, args):
        profile = growth_vector(manifest.frame, pt, options.cap_step)
        if args.kind in ("dimension", "both"):
            chart, notes = None, []
            if not args.raw:
                try:
                    chart = build_chart(manifest.frame, pt, trunc=options.trunc, cap=options.cap_step)
                except (TruncationError, PrivilegeError) as exc:
                    notes.append(f"no privileged chart, raw coordinates used: {exc}")
            result = dimension_probe(manifest.frame, pt, config, chart)
            report.add(probe_section(label, result, profile.Q if chart is not None else manifest.dimension))
            if notes:
                report.add(notes_section(label, notes))
            if args.csv_dir:
                write_series_csv(result, args.csv_dir, f"{manifest.name}_{label}")
        if args.kind in ("finiteness", "both") and profile.dims != generic.dims:
            spec = stratum_for(manifest, args, pt, required=True)
            if spec is None or spec.zeroed is None:
                report.add(notes_section(label, ["finiteness probe needs a coordinate-subspace submanifold"]))
                continue
            assessment = assess_point(manifest.frame, manifest.volume, pt, submanifold=spec,
                                      step_cap=options.cap_step, order_cap=options.cap_order,
                                      bracket_len=options.bracket_len, samples=options.samples,
                                      family_budget=options.family_budget)
            result = finiteness_probe(manifest.frame, manifest.volume, pt, spec.zeroed, generic.Q, config)
            report.add(probe_section(label, result, assessment.verdict.label))
            if args.csv_dir:
                write_series_csv(result, args.csv_dir, f"{manifest.name}_{label}")
    return emit(report, options, args)


def cmd_validate_manifest(args):
    """Validate a manifest file."""
    print("srvolume CLI - Validate Manifest")
    print("=" * 40)

    if not Path(args.manifest).exists():
        print(_ERROR_STYLE + f"Manifest file {args.manifest} does not exist")
        return 1

    print(f"Manifest file: {args.manifest}")
    print()

    text = Path(args.manifest).read_text(encoding="utf-8")
    try:
        overrides = parse_param_overrides(args.param)
    except InputError as e:
        print(_ERROR_STYLE + str(e))
        return 1
    issues = manifest_issues(text, overrides)

    if not issues:
        manifest = parse_manifest(text, overrides)
        print(_SUCCESS_STYLE + "SUCCESS: Manifest is valid!")
        print()
        print("Manifest summary:")
        print(f"  Name: {manifest.name}")
        print(f"  Dimension: {manifest.dimension}")
        print(f"  Rank: {manifest.rank}")
        print(f"  Frame: {', '.join(manifest.frame_names)}")
        print(f"  Parameters: {manifest.parameters or 'none'}")
        print(f"  Submanifolds: {sorted(manifest.submanifolds) or 'none'}")
        print(f"  Points: {sorted(manifest.points) or 'none'}")
        return 0
    else:
        print("X Manifest validation failed:")
        for issue in issues:
            print(f"  - {issue}")
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="srvolume CLI - Hausdorff volume analysis of polynomial sub-Riemannian frames",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Growth vectors at every declared point
  python sr_cli.py flags manifests/martinet.yml

  # Growth vector at an inline point
  python sr_cli.py flags manifests/martinet.yml --point 1,0,0

  # Equiregularity of the singular stratum
  python sr_cli.py strata manifests/martinet.yml --submanifold N

  # Order of the volume along a stratum, with a parameter
  python sr_cli.py sigma manifests/r5_single_stratum.yml --submanifold N --param k=3

  # Privileged chart adapted to a stratum
  python sr_cli.py nilpotent manifests/martinet.yml --point origin --submanifold N

  # Finiteness verdict as JSON
  python sr_cli.py verdict manifests/r4_double_martinet.yml --point origin --format machine --out r4.json

  # Numeric cross-checks with CSV series
  python sr_cli.py probe manifests/martinet.yml --point origin --csv-dir ./probe_series

  # Validate a manifest
  python sr_cli.py validate-manifest manifests/r5_corank_two.yml --param k=4
        """
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('manifest', help='Manifest file (YAML format)')
    common.add_argument('--param', action='append', metavar='NAME=INT', help='Bind a manifest parameter')
    common.add_argument('--verbose', action='store_true', help='Debug logging')
    common.add_argument('--quiet', action='store_true', help='Warnings and errors only')

    analysis = argparse.ArgumentParser(add_help=False)
    analysis.add_argument('--point', action='append',
                          help='Declared point name or inline coordinates such as 1,0,0 (repeatable)')
    analysis.add_argument('--submanifold', help='Declared submanifold name')
    analysis.add_argument('--cap-step', type=int, help='Largest bracket length explored')
    analysis.add_argument('--cap-order', type=int, help='Nonholonomic order cap')
    analysis.add_argument('--samples', type=int, help='Sample grid size on submanifolds')
    analysis.add_argument('--seed', type=int, help='Probe random seed')
    analysis.add_argument('--format', choices=['text', 'machine'], help='Report format')
    analysis.add_argument('--out', help='Also write the machine report to this file')
    analysis.add_argument('--csv-dir', help='Write probe series as CSV into this directory')

    subparsers = parser.add_subparsers(dest='command', help='Available commands')
    subparsers.add_parser('flags', parents=[common, analysis], help='Growth vectors at points')
    subparsers.add_parser('strata', parents=[common, analysis], help='Submanifold analysis')
    subparsers.add_parser('sigma', parents=[common, analysis], help='Order of the volume along a submanifold')
    subparsers.add_parser('nilpotent', parents=[common, analysis], help='Privileged chart and nilpotent frame')
    subparsers.add_parser('verdict', parents=[common, analysis], help='Dimension and finiteness verdict')
    probe_parser = subparsers.add_parser('probe', parents=[common, analysis], help='Numeric cross-checks')
    probe_parser.add_argument('--kind', choices=['dimension', 'finiteness', 'both'], default='both',
                              help='Which probe to run (default: both)')
    probe_parser.add_argument('--raw', action='store_true',
                              help='Dimension probe in raw coordinates instead of a privileged chart')
    subparsers.add_parser('validate-manifest', parents=[common], help='Validate a manifest file')
    return parser


COMMANDS = {
    'flags': cmd_flags,
    'strata': cmd_strata,
    'sigma': cmd_sigma,
    'nilpotent': cmd_nilpotent,
    'verdict': cmd_verdict,
    'probe': cmd_probe,
    'validate-manifest': cmd_validate_manifest,
}


def main(argv: Optional[List[str]] = None):
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return 1

    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    elif args.quiet:
        logging.getLogger().setLevel(logging.WARNING)

    try:
        return COMMANDS[args.command](args)
    except KeyboardInterrupt:
        print("\nOperation cancelled by user")
        return 1
    except InputError as e:
        print(_ERROR_STYLE + str(e), file=sys.stderr)
        return 1
    except AnalysisError as e:
        logger.error(f"Analysis failed: {e}")
        print(_ERROR_STYLE + str(e), file=sys.stderr)
        return 1
    except Exception as e:
        logger.error(f"Unexpected error: {e}")
        logger.error(f"Traceback: {traceback.format_exc()}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
