#!/usr/bin/env python3
"""
F4MS command line: validate, simulate and partition mixed SW/HW system
descriptions, and run the DRM demo.

Usage:
    # Check a system description
    python3 src/f4ms.py validate systems/drms_business_model.f4ms

    # Co-simulate under a mapping and write the trace
    python3 src/f4ms.py run systems/fork_join.f4ms --mapping all-sw --trace out.trace

    # Search the best SW/HW mapping
    python3 src/f4ms.py partition systems/drms_business_model.f4ms --weights 1,1,1,10 --area-budget 20

    # Scripted DRM scenarios
    python3 src/f4ms.py demo-drm --scenario renew --now 150

Exit status: 0 success, 1 diagnostics, 2 usage error, 3 runtime error.
"""

import argparse
import logging
import sys
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import List, Optional

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent))

from constants import (
    DEFAULT_SEED, DRMS_BEHAVIOR_NAMES, SECURITY_MIN, ExitStatus, get_available_scenarios, parse_kind,
)
from core.behaviors import default_registry
from core.engine import Engine, Mapping, SimConfig
from core.errors import F4msError
from core.graph import SystemModel
from core.trace import trace_export
from drm.crypto import DeterministicSuite
from drm.demo import build_demo_world, run_demo
from partition.evaluate import Constraints, PartitionObjective, Scenario
from partition.search import METHODS, optimize
from sysdesc.system import parse_system_file
from sysdesc.tree import SystemDescriptionError, load_file
from utils import LogManager, format_fixed, format_micro, verbosity_level
from utils.persistence import save_tree, write_text


logger = logging.getLogger("f4ms")

TRACE_FORMATS = ("lines", "structured")


class UsageError(Exception):
    """Bad flag value discovered after argument parsing."""


# =============================================================================
# Shared helpers
# =============================================================================

def load_model(path: str) -> Optional[SystemModel]:
    """Parse and validate a description, printing diagnostics to stderr on failure."""
    try:
        return parse_system_file(path, default_registry())
    except SystemDescriptionError as e:
        for diagnostic in e.diagnostics:
            print(diagnostic, file=sys.stderr)
    except OSError as e:
        print(f"{path}:1:1: IOError: {e.strerror or e}", file=sys.stderr)
    return None


def uses_drm(model: SystemModel) -> bool:
    return any(spec.behavior in DRMS_BEHAVIOR_NAMES for spec in model.components.values())


def drm_states(model: SystemModel, seed: int):
    """Fresh demo-world states for every DRM component (deterministic crypto)."""
    world = build_demo_world(DeterministicSuite(), seed)
    return world.service.states_for(model, world.user.user_id, world.content_id)


def resolve_mapping(model: SystemModel, spec: str) -> Mapping:
    if spec == "all-sw":
        return Mapping.all_software(model)
    if spec == "all-hw-where-allowed":
        return Mapping.all_hardware_where_allowed(model)
    try:
        tree = load_file(spec)
    except OSError as e:
        raise UsageError(f"cannot read mapping file {spec}: {e.strerror or e}") from None
    if isinstance(tree, dict) and isinstance(tree.get("mapping"), dict):
        tree = tree["mapping"]
    if not isinstance(tree, dict):
        raise UsageError(f"mapping file {spec} must hold a component -> SW|HW object")
    try:
        return Mapping.of({cid: parse_kind(kind) for cid, kind in tree.items()})
    except (ValueError, AttributeError) as e:
        raise UsageError(f"mapping file {spec}: {e}") from None


def parse_budget(text: Optional[str]) -> Optional[Decimal]:
    if text is None:
        return None
    try:
        return Decimal(text)
    except InvalidOperation:
        raise UsageError(f"--area-budget expects a number, got {text!r}") from None


# =============================================================================
# Commands
# =============================================================================

def cmd_validate(args) -> int:
    model = load_model(args.file)
    if model is None:
        return ExitStatus.DIAGNOSTICS
    logger.info("%s: %d component(s), %d connector(s), %d edge(s)", args.file,
                len(model.components), len(model.spg.connectors), len(model.ig.edges))
    return ExitStatus.SUCCESS


def cmd_run(args) -> int:
    model = load_model(args.file)
    if model is None:
        return ExitStatus.DIAGNOSTICS

    mapping = resolve_mapping(model, args.mapping)
    config = SimConfig(seed=args.seed, mapping=mapping)
    states = drm_states(model, args.seed) if uses_drm(model) else None

    trace = Engine(model, config, None, states, default_registry()).run()
    if args.trace:
        write_text(args.trace, trace_export(trace, args.format))
        logger.info("trace written to %s (%d events)", args.trace, len(trace.events))
    print(f"sim_time={format_micro(trace.sim_time)}")
    return ExitStatus.SUCCESS


def cmd_partition(args) -> int:
    model = load_model(args.file)
    if model is None:
        return ExitStatus.DIAGNOSTICS

    try:
        objective = PartitionObjective.parse(args.weights, args.refs)
        constraints = Constraints(parse_budget(args.area_budget), args.security_floor)
    except ValueError as e:
        raise UsageError(str(e)) from None

    scenario = Scenario(seed=DEFAULT_SEED)
    if uses_drm(model):
        scenario.states = lambda: drm_states(model, DEFAULT_SEED)

    best, report = optimize(model, scenario, objective, constraints, args.method)
    for cid, kind in best.mapping.assignment:
        print(f"{cid}={kind.value}")
    print(f"objective={format_fixed(best.objective_value)}")

    if args.report:
        tree = {"best": best.to_tree()}
        tree.update(report.to_tree())
        save_tree(args.report, tree)
        logger.info("report written to %s", args.report)
    return ExitStatus.SUCCESS


def cmd_demo_drm(args) -> int:
    result = run_demo(args.scenario, args.now)
    for line in result.lines:
        print(line)
    print(f"result={result.verdict}")
    if not result.ok:
        print(f"[!] {result.denial.describe()}", file=sys.stderr)
        return ExitStatus.RUNTIME
    return ExitStatus.SUCCESS


# =============================================================================
# Entry point
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="f4ms",
        description="F4MS mixed software/hardware composition engine",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="Examples:\n"
               "  python3 src/f4ms.py validate systems/chain.f4ms\n"
               "  python3 src/f4ms.py run systems/fork_join.f4ms --trace fork_join.trace\n"
               "  python3 src/f4ms.py partition systems/drms_business_model.f4ms --weights 1,1,1,10\n"
               "  python3 src/f4ms.py demo-drm --scenario consume --now 150\n\n"
               "Diagnostics go to standard error, data to standard output."
    )
    parser.add_argument(
        '--verbose', '-v',
        action='count',
        default=0,
        help='Log progress to standard error (-v info, -vv debug)'
    )
    parser.add_argument(
        '--log-dir',
        type=str,
        metavar='DIR',
        help='Also write a timestamped log file (and a copy of standard output) to DIR'
    )
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    validate = commands.add_parser('validate', help='Parse and validate a system description')
    validate.add_argument('file', help='System description (.f4ms)')
    validate.set_defaults(handler=cmd_validate)

    run = commands.add_parser('run', help='Co-simulate a system under a mapping')
    run.add_argument('file', help='System description (.f4ms)')
    run.add_argument(
        '--mapping',
        default='all-sw',
        metavar='FILE|all-sw|all-hw-where-allowed',
        help='Mapping file (component: "SW"|"HW") or a preset (default: all-sw)'
    )
    run.add_argument('--seed', type=int, default=DEFAULT_SEED, help='Engine seed (default: 0)')
    run.add_argument('--trace', metavar='PATH', help='Write the trace to PATH')
    run.add_argument('--format', choices=TRACE_FORMATS, default='lines', help='Trace format (default: lines)')
    run.set_defaults(handler=cmd_run)

    partition = commands.add_parser('partition', help='Search the best SW/HW mapping')
    partition.add_argument('file', help='System description (.f4ms)')
    partition.add_argument('--weights', default='1,1,1,1', metavar='T,A,E,S',
                           help='Objective weights for time, area, energy, security')
    partition.add_argument('--refs', default='1,1,1,1', metavar='T,A,E,S',
                           help='Normalization reference values')
    partition.add_argument('--area-budget', metavar='X', help='Maximum total hardware area')
    partition.add_argument('--security-floor', type=int, default=SECURITY_MIN, metavar='K',
                           help='Minimum security level of every component')
    partition.add_argument('--method', choices=METHODS, default='exhaustive', help='Search method')
    partition.add_argument('--report', metavar='PATH', help='Write the search report (evaluated count, best entries) to PATH')
    partition.set_defaults(handler=cmd_partition)

    demo = commands.add_parser('demo-drm', help='Run a scripted DRM scenario')
    demo.add_argument('--scenario', choices=get_available_scenarios(), default='issue',
                      help='Scenario to run (default: issue)')
    demo.add_argument('--now', type=int, default=0, help='Timestamp for plays and renewal (default: 0)')
    demo.set_defaults(handler=cmd_demo_drm)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    with LogManager(args.log_dir, f"f4ms_{args.command.replace('-', '_')}", verbosity_level(args.verbose)):
        try:
            return int(args.handler(args))
        except UsageError as e:
            print(f"f4ms: error: {e}", file=sys.stderr)
            return int(ExitStatus.USAGE)
        except F4msError as e:
            print(f"[!] {e.describe()}", file=sys.stderr)
            return int(ExitStatus.RUNTIME)
        except ValueError as e:
            print(f"f4ms: error: {e}", file=sys.stderr)
            return int(ExitStatus.USAGE)
        except KeyboardInterrupt:
            print("\n[!] Interrupted by user.", file=sys.stderr)
            return int(ExitStatus.RUNTIME)


if __name__ == "__main__":
    sys.exit(main())
