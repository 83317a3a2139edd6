"""Command-line interface for poe-sim.

Provides the `main` entry point used by the packaged console script,
handling argument parsing and invoking the harness application layer.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any

from core.application.harness.campaign import (
    CAMPAIGN_COLUMNS,
    DEFAULT_SIZES,
    CampaignSpec,
    parse_csv_list,
    parse_seed_range,
    run_campaign,
)
from core.application.harness.core import check_trace_file, execute_run, ledger_diff_files
from core.application.harness.latency import (
    DEFAULT_DECISIONS,
    LATENCY_COLUMNS,
    latency_grid,
)
from core.application.harness.report import (
    render_campaign_report,
    render_check_report,
    render_latency_report,
    render_run_report,
)
from core.cli.exit_codes import ExitCode, get_exit_code_for_exception
from core.domain.errors import ConfigInvalid
from core.domain.types import Scheme
from core.infrastructure.config.manager import ConfigManager
from core.infrastructure.config.resolver import resolve_run_options
from core.infrastructure.config.scenario import load_scenario
from core.infrastructure.formatters.csv_writer import write_rows
from core.infrastructure.formatters.json_writer import SummaryJsonWriter
from core.infrastructure.logging.structured import configure_root, get_logger
from core.resources import templates
from core.resources.templates import render_template
from core.simulation.adversary import CAMPAIGN_PROGRAMS, PROGRAMS
from core.simulation.scenario import AdversarySpec, Scenario
from core.ui.console import line, progress_bar, rule, summary_panel

COMMANDS = ("run", "campaign", "latency-bench", "check", "ledger-diff", "set")


def _print_config_applied(scope_name: str, key: str, value: str) -> None:
    print(render_template(templates.CONFIG_SET, scope=scope_name, key=key, value=value))


def _hint_for(exc: BaseException) -> str:
    if isinstance(exc, FileNotFoundError):
        return "Check that the path exists and is readable."
    if isinstance(exc, ConfigInvalid):
        return (
            "Fix the scenario or option and retry.\n"
            "- Generate a commented scenario: "
            "poe set --generate-template --scenario -o scenario.yaml"
        )
    if isinstance(exc, PermissionError):
        return "Permission denied; adjust permissions or choose another --out."
    return "Use --verbose to see the traceback."


def _handle_exception(exc: BaseException, command: str, verbose: bool = False) -> int:
    exit_code = get_exit_code_for_exception(exc)
    logger = get_logger(__name__)
    logger.error(
        f"{command} failed: {exc}",
        exit_code=int(exit_code),
        error_type=type(exc).__name__,
    )
    if exit_code is ExitCode.INTERNAL_ERROR and verbose:
        raise exc
    title = f"{command} error ({type(exc).__name__}): {exc}"
    print(render_template(templates.ERROR, title=title, hint=_hint_for(exc)), file=sys.stderr)
    return int(exit_code)


def _setup_logging(args: argparse.Namespace, options: dict[str, Any]) -> None:
    level = "DEBUG" if getattr(args, "verbose", False) else str(options["log_level"])
    configure_root(level, getattr(args, "log_file", None))


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", type=str, help="Output directory (default: run.out_dir)")
    parser.add_argument("--verbose", action="store_true", help="DEBUG logging and tracebacks")
    parser.add_argument("--log-file", type=str, dest="log_file", help="JSON log file")


def _scheme(value: str | None) -> Scheme | None:
    if value is None:
        return None
    try:
        return Scheme(value.lower())
    except ValueError as exc:
        raise ConfigInvalid(f"unknown scheme {value!r}; expected ts or mac") from exc


def _base_scenario(args: argparse.Namespace, options: dict[str, Any]) -> Scenario:
    scenario = load_scenario(args.scenario) if args.scenario else Scenario()
    fields: dict[str, Any] = {}
    if getattr(args, "seed", None) is not None:
        fields["seed"] = args.seed
    scheme = _scheme(args.scheme) if args.scheme else None
    if scheme is not None:
        fields["scheme"] = scheme
    elif not args.scenario:
        fields["scheme"] = _scheme(str(options["scheme"]))
    if getattr(args, "adversary", None):
        fields["adversary"] = AdversarySpec.of(args.adversary)
    if getattr(args, "window", None) is not None:
        fields["pipeline_depth"] = args.window
    scenario = replace(scenario, **fields)
    scenario.validate()
    return scenario


def _print_main_help_rich() -> None:
    rule("poe — Help")
    summary_panel("Usage", "Usage\npoe <command> [options]\nCommands: " + ", ".join(COMMANDS))
    sub = (
        "Subcommands\n"
        "run            Simulate one scenario, check it, write artifacts\n"
        "campaign       Seeds x adversaries x schemes x sizes safety grid\n"
        "latency-bench  Decisions per unit of virtual time per (n, delay, window)\n"
        "check          Re-check a stored trace file\n"
        "ledger-diff    Compare two exported ledgers\n"
        "set            Configure run defaults (local/global scopes)"
    )
    summary_panel("Subcommands", sub)
    codes = (
        "Exit codes\n"
        "0 pass | 1 invariant violation | 2 config error | 3 input error | 4 internal error"
    )
    summary_panel("Exit codes", codes)
    ex = (
        "Examples\n"
        "poe run --seed 7 --adversary equivocating-primary --out ./out\n"
        "poe campaign --seeds 0..99 --workers 4 --out ./campaign\n"
        "poe latency-bench --delays 1,2 --windows 1,250 --out ./latency\n"
        "poe check ./out/trace.txt"
    )
    summary_panel("Examples", ex)


# === run ===


def _cmd_run(argv: list[str]) -> int:
    parser = argparse.ArgumentParser(
        prog="poe run",
        description="Simulate one scenario, check its trace and write artifacts.",
    )
    parser.add_argument("--scenario", type=str, help="Scenario YAML/JSON file")
    parser.add_argument("--seed", type=int, help="Override the scenario seed")
    parser.add_argument("--scheme", type=str, help="ts | mac")
    parser.add_argument(
        "--adversary", type=str, choices=sorted(PROGRAMS), help="Adversary program (defaults)"
    )
    parser.add_argument("--window", type=int, help="Primary pipeline depth")
    _add_common(parser)
    args = parser.parse_args(argv)

    try:
        options, _prov = resolve_run_options({"out_dir": args.out})
        _setup_logging(args, options)
        scenario = _base_scenario(args, options)
        outcome = execute_run(scenario, out_dir=options["out_dir"])
        render_run_report(outcome, verbose=args.verbose)
    except Exception as e:  # noqa: BLE001
        return _handle_exception(e, "run", args.verbose)
    return int(ExitCode.SUCCESS if outcome.ok else ExitCode.INVARIANT_VIOLATION)


# === campaign ===


def _cmd_campaign(argv: list[str]) -> int:
    parser = argparse.ArgumentParser(
        prog="poe campaign",
        description="Run the safety campaign and aggregate violation counts.",
    )
    parser.add_argument("--scenario", type=str, help="Base scenario file")
    parser.add_argument(
        "--seeds", "--seed", dest="seeds", type=str, default="0..9", help="e.g. 0..999 or 1,2,3"
    )
    parser.add_argument(
        "--adversary",
        type=str,
        help="Comma-separated programs (default: " + ",".join(CAMPAIGN_PROGRAMS) + ")",
    )
    parser.add_argument("--scheme", type=str, help="ts | mac (default: both)")
    parser.add_argument("--sizes", type=str, help="Comma-separated n values (default: 4,7,10)")
    parser.add_argument("--workers", type=int, help="Process pool size (default: run.workers)")
    _add_common(parser)
    args = parser.parse_args(argv)

    try:
        options, _prov = resolve_run_options({"out_dir": args.out, "workers": args.workers})
        _setup_logging(args, options)
        base = load_scenario(args.scenario) if args.scenario else Scenario()
        schemes = (_scheme(args.scheme),) if args.scheme else (Scheme.TS, Scheme.MAC)
        try:
            default = [str(n) for n in DEFAULT_SIZES]
            sizes = tuple(int(s) for s in parse_csv_list(args.sizes, default))
        except ValueError as exc:
            raise ConfigInvalid(f"invalid --sizes {args.sizes!r}") from exc
        spec = CampaignSpec(
            seeds=parse_seed_range(args.seeds),
            adversaries=parse_csv_list(args.adversary, CAMPAIGN_PROGRAMS),
            schemes=tuple(s for s in schemes if s is not None),
            sizes=sizes,
            base=base,
        )
        spec.validate()
        total = len(spec.seeds) * len(spec.adversaries) * len(spec.schemes) * len(spec.sizes)
        with progress_bar("campaign", total) as prog:
            task = prog.task_ids[0]
            summary = run_campaign(
                spec, workers=int(options["workers"]), on_row=lambda _row: prog.advance(task)
            )
        out = Path(str(options["out_dir"])).expanduser().resolve()
        paths = {
            "json": SummaryJsonWriter("campaign.json").write(summary.to_dict(), out),
            "csv": write_rows(out / "campaign.csv", CAMPAIGN_COLUMNS, summary.rows),
        }
        render_campaign_report(summary.totals(), paths)
    except Exception as e:  # noqa: BLE001
        return _handle_exception(e, "campaign", args.verbose)
    return int(ExitCode.SUCCESS if summary.violations == 0 else ExitCode.INVARIANT_VIOLATION)


# === latency-bench ===


def _cmd_latency(argv: list[str]) -> int:
    parser = argparse.ArgumentParser(
        prog="poe latency-bench",
        description="Message-delay throughput grid (decisions per unit of virtual time).",
    )
    parser.add_argument("--sizes", type=str, default="4", help="Comma-separated n values")
    parser.add_argument("--delays", type=str, default="1", help="Comma-separated message delays")
    parser.add_argument(
        "--windows", "--window", dest="windows", type=str, default="1,250", help="Pipeline depths"
    )
    parser.add_argument("--decisions", type=int, default=DEFAULT_DECISIONS)
    _add_common(parser)
    args = parser.parse_args(argv)

    try:
        options, _prov = resolve_run_options({"out_dir": args.out})
        _setup_logging(args, options)
        try:
            sizes = [int(v) for v in parse_csv_list(args.sizes, ["4"])]
            delays = [float(v) for v in parse_csv_list(args.delays, ["1"])]
            windows = [int(v) for v in parse_csv_list(args.windows, ["1", "250"])]
        except ValueError as exc:
            raise ConfigInvalid(f"invalid latency grid: {exc}") from exc
        if args.decisions < 1 or any(d <= 0 for d in delays) or any(w < 1 for w in windows):
            raise ConfigInvalid("decisions, delays and windows must be positive")
        total = len(sizes) * len(delays) * len(windows)
        with progress_bar("latency-bench", total) as prog:
            task = prog.task_ids[0]
            rows = latency_grid(
                sizes, delays, windows, args.decisions, on_row=lambda _row: prog.advance(task)
            )
        out = Path(str(options["out_dir"])).expanduser().resolve()
        path = write_rows(out / "latency.csv", LATENCY_COLUMNS, rows)
        render_latency_report(rows, path)
    except Exception as e:  # noqa: BLE001
        return _handle_exception(e, "latency-bench", args.verbose)
    return int(ExitCode.SUCCESS)


# === check / ledger-diff ===


def _cmd_check(argv: list[str]) -> int:
    parser = argparse.ArgumentParser(prog="poe check", description="Re-check a stored trace.")
    parser.add_argument("trace", type=str, help="trace.txt written by `poe run`")
    parser.add_argument("--verbose", action="store_true")
    parser.add_argument("--log-file", type=str, dest="log_file")
    args = parser.parse_args(argv)

    try:
        options, _prov = resolve_run_options()
        _setup_logging(args, options)
        report = check_trace_file(args.trace)
        render_check_report(args.trace, report.counts(), len(report.violations), report.transitions)
        if args.verbose:
            for v in report.violations:
                line(f"[{v.index}] {v.kind}: {v.detail}")
    except Exception as e:  # noqa: BLE001
        return _handle_exception(e, "check", args.verbose)
    return int(ExitCode.SUCCESS if report.ok else ExitCode.INVARIANT_VIOLATION)


def _cmd_ledger_diff(argv: list[str]) -> int:
    parser = argparse.ArgumentParser(
        prog="poe ledger-diff", description="Compare two exported ledgers."
    )
    parser.add_argument("a", type=str)
    parser.add_argument("b", type=str)
    parser.add_argument("--verbose", action="store_true")
    args = parser.parse_args(argv)

    try:
        diff = ledger_diff_files(args.a, args.b)
    except Exception as e:  # noqa: BLE001
        return _handle_exception(e, "ledger-diff", args.verbose)
    if diff.first_divergence is None:
        state = "identical" if diff.identical else "prefix-consistent"
        line(f"ledger-diff={state} | a={diff.length_a} blocks | b={diff.length_b} blocks")
        return int(ExitCode.SUCCESS)
    line(
        f"ledger-diff=diverged at seq {diff.first_divergence} "
        f"| a={diff.length_a} blocks | b={diff.length_b} blocks"
    )
    return int(ExitCode.INVARIANT_VIOLATION)


# === set ===


def _perform_set_action(args: argparse.Namespace, scope_name: str, mgr: ConfigManager) -> None:
    if args.generate_template:
        sample = templates.SCENARIO_SAMPLE if args.scenario else templates.CONFIG_SAMPLE
        content = render_template(sample)
        if args.output:
            p = args.output
            Path(p).expanduser().resolve().write_text(content, encoding="utf-8")
            _print_config_applied(scope_name, "template", p)
        else:
            print(content)
        return

    if args.file:
        mgr.apply_yaml(args.file, reset=bool(args.reset))
        _print_config_applied(scope_name, "yaml", args.file)
        return

    if args.entry:
        if "=" not in args.entry:
            raise ConfigInvalid("entry must be in the form key=value")
        key, value = args.entry.split("=", 1)
        mgr.set(key.strip(), value.strip())
        _print_config_applied(scope_name, key.strip(), value.strip())
        return

    raise ConfigInvalid("nothing to do; provide --generate-template, --file or key=value")


def _cmd_set(argv: list[str]) -> int:
    parser = argparse.ArgumentParser(
        prog="poe set",
        description="Configure run defaults (local or global scope)",
        formatter_class=argparse.RawTextHelpFormatter,
        epilog=(
            "Examples:\n"
            "  poe set run.scheme=mac\n"
            "  poe set --global run.workers=4\n"
            "  poe set --generate-template -o poe.yaml\n"
            "  poe set --generate-template --scenario -o scenario.yaml\n"
            "  poe set --file poe.yaml --reset\n"
        ),
    )
    scope = parser.add_mutually_exclusive_group()
    scope.add_argument("--local", action="store_true", help="Local scope (.poe/config.json)")
    scope.add_argument(
        "--global",
        dest="use_global",
        action="store_true",
        help="Global scope (~/.config/poe-sim/config.json)",
    )
    mode = parser.add_mutually_exclusive_group()
    mode.add_argument(
        "--generate-template", action="store_true", help="Print a YAML template (or write to -o)"
    )
    mode.add_argument("--file", type=str, help="Apply settings from YAML file")
    parser.add_argument("entry", nargs="?", help="Single entry in the form key=value")
    parser.add_argument(
        "--scenario", action="store_true", help="With --generate-template: scenario template"
    )
    parser.add_argument("-o", "--output", type=str, help="Output path for generated template")
    parser.add_argument("--reset", action="store_true", help="Replace existing config with YAML")

    args = parser.parse_args(argv)
    scope_name = "global" if args.use_global else "local"
    mgr = ConfigManager(scope=scope_name)

    try:
        _perform_set_action(args, scope_name, mgr)
        return 0
    except Exception as e:  # noqa: BLE001
        return _handle_exception(e, "set")


_HANDLERS = {
    "run": _cmd_run,
    "campaign": _cmd_campaign,
    "latency-bench": _cmd_latency,
    "check": _cmd_check,
    "ledger-diff": _cmd_ledger_diff,
    "set": _cmd_set,
}


def main(argv: list[str] | None = None) -> int:
    """poe CLI entry point.

    Args:
        argv: Argument list (for tests). Uses `sys.argv` when None.

    Returns:
        Process exit code (see `ExitCode`).
    """
    arglist = list(argv) if argv is not None else sys.argv[1:]
    if arglist and arglist[0] in _HANDLERS:
        try:
            return _HANDLERS[arglist[0]](arglist[1:])
        except SystemExit as exc:
            # argparse usage errors
            return int(ExitCode.CONFIG_ERROR) if exc.code not in (0, None) else 0
    if arglist and not any(x in ("-h", "--help") for x in arglist):
        print(
            render_template(
                templates.ERROR, title=f"unknown command {arglist[0]!r}", hint="Use poe --help."
            ),
            file=sys.stderr,
        )
        return int(ExitCode.CONFIG_ERROR)
    _print_main_help_rich()
    return 0


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
