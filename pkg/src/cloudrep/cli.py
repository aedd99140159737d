"""Command-line entry point: ``cloudrep run|compare|init|validate``.

Exit status is 0 on success, 1 for configuration or input errors and 2 for
failures while simulating. Data goes to files (or stdout for the one-line
summary); diagnostics go to stderr. Set ``TCDRM_LOG`` to a logging level name
(``DEBUG``, ``INFO``...) for more detail.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

from .engine import run, write_events
from .metrics import ReportError, SimReport, compare, export, load_report
from .scenario import Scenario, default_scenario_text, load_scenario
from .strategy import STRATEGIES
from .topology import ConfigError

logger = logging.getLogger("cloudrep")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
FORMATS = ("csv", "json")


@dataclass(frozen=True)
class RunRequest:
    scenario: Path
    strategy: str = "tcdrm"
    out: Path = Path(".")
    formats: tuple = FORMATS
    events: bool = False
    seed: Optional[int] = None


class UsageError(Exception):
    """Bad input detected before any simulation started."""


def _formats(text: str) -> tuple:
    parts = tuple(p.strip().lower() for p in text.split(",") if p.strip())
    bad = [p for p in parts if p not in FORMATS]
    if bad or not parts:
        raise argparse.ArgumentTypeError(f"formats must be a comma list of {FORMATS}, got {text!r}")
    return parts


def _load(req: RunRequest) -> Scenario:
    scenario = load_scenario(req.scenario)
    if req.seed is not None:
        if not 0 <= req.seed < 2**64:
            raise ConfigError(f"--seed: expected an unsigned 64-bit integer, got {req.seed}")
        scenario = scenario.with_seed(req.seed)
    return scenario


def _write_outputs(report: SimReport, req: RunRequest, events=None) -> List[Path]:
    req.out.mkdir(parents=True, exist_ok=True)
    written = [export(report, fmt, req.out / f"{report.strategy}.{fmt}") for fmt in req.formats]
    if events is not None:
        path = req.out / f"{report.strategy}.events.jsonl"
        write_events(events, path)
        written.append(path)
    return written


def _summary(report: SimReport) -> str:
    agg = report.aggregates
    return (
        f"{report.strategy}: queries={agg['queries']} total_cost={agg['total_cost'].total} "
        f"avg_t_q={agg['avg_response_time']:.6f}s final_replicas={agg['final_replicas']}"
    )


def _simulate(scenario: Scenario, req: RunRequest, strategy: str) -> SimReport:
    report, state = run(scenario, strategy, keep_events=req.events)
    for path in _write_outputs(report, req, state.events if req.events else None):
        logger.info("wrote %s", path)
    return report


def cmd_run(req: RunRequest) -> int:
    scenario = _load(req)
    report = _simulate(scenario, req, req.strategy)
    print(_summary(report))
    return EXIT_OK


def _write_comparison(result: dict, out: Path) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / "comparison.json"
    path.write_text(json.dumps(result, indent=1, sort_keys=True) + "\n")
    return path


def _comparison_line(result: dict) -> str:
    return (
        f"bandwidth_cost_reduction={result['bandwidth_cost_reduction']:.4f} "
        f"response_time_reduction={result['response_time_reduction']:.4f} "
        f"final_quartile={result['response_time_reduction_final_quartile']:.4f}"
    )


def cmd_compare(req: RunRequest) -> int:
    scenario = _load(req)
    reports = {kind: _simulate(scenario, req, kind) for kind in ("tcdrm", "noreplc")}
    result = compare(reports["tcdrm"], reports["noreplc"])
    logger.info("wrote %s", _write_comparison(result, req.out))
    for r in reports.values():
        print(_summary(r))
    print(_comparison_line(result))
    return EXIT_OK


def cmd_compare_reports(tcdrm_path: Path, baseline_path: Path, out: Path) -> int:
    try:
        tcdrm = load_report(tcdrm_path)
        baseline = load_report(baseline_path)
    except FileNotFoundError as e:
        raise UsageError(f"{e.filename}: report not found") from None
    result = compare(tcdrm, baseline)
    _write_comparison(result, out)
    print(_comparison_line(result))
    return EXIT_OK


def cmd_init_config(path: Path, force: bool = False) -> int:
    if path.exists() and not force:
        raise UsageError(f"{path}: already exists (use --force to overwrite)")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(default_scenario_text())
    print(f"wrote {path}")
    return EXIT_OK


def cmd_validate(path: Path) -> int:
    scenario = load_scenario(path)
    print(
        f"{path}: ok ({len(scenario.topology.region_keys)} regions, "
        f"{len(scenario.relations)} relations, fingerprint {scenario.fingerprint})"
    )
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # bad flags are input errors: exit 1, keeping 2 for simulation failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cloudrep", description="Multi-cloud data replication simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    def sim_args(p, with_strategy: bool):
        p.add_argument("--scenario", type=Path, required=True, help="scenario JSON file")
        if with_strategy:
            p.add_argument("--strategy", choices=sorted(STRATEGIES), default="tcdrm")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
        p.add_argument("--format", type=_formats, default=FORMATS, help="comma list of csv,json")
        p.add_argument("--events", action="store_true", help="also write the JSONL event log")
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")

    sim_args(sub.add_parser("run", help="simulate one strategy"), True)

    p = sub.add_parser("compare", help="simulate TCDRM and NoRepLc on the same workload")
    p.add_argument("--scenario", type=Path, help="scenario JSON file")
    p.add_argument("--from-reports", nargs=2, type=Path, metavar=("TCDRM_JSON", "BASELINE_JSON"),
                   help="compare two existing JSON reports instead of simulating")
    p.add_argument("--out", type=Path, default=Path("."))
    p.add_argument("--format", type=_formats, default=FORMATS)
    p.add_argument("--events", action="store_true")
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("init", help="write the bundled default scenario")
    p.add_argument("path", type=Path, nargs="?", default=Path("table1-default.json"))
    p.add_argument("--force", action="store_true", help="overwrite an existing file")

    p = sub.add_parser("validate", help="check a scenario file without running it")
    p.add_argument("path", type=Path)
    return parser


def _configure_logging() -> None:
    level_name = os.environ.get("TCDRM_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "init":
        return cmd_init_config(args.path, args.force)
    if args.command == "validate":
        return cmd_validate(args.path)
    if args.command == "compare" and args.from_reports:
        return cmd_compare_reports(args.from_reports[0], args.from_reports[1], args.out)
    if args.scenario is None:
        raise UsageError("--scenario is required")
    req = RunRequest(
        scenario=args.scenario,
        strategy=getattr(args, "strategy", "tcdrm"),
        out=args.out,
        formats=args.format,
        events=args.events,
        seed=args.seed,
    )
    return cmd_run(req) if args.command == "run" else cmd_compare(req)


def main(argv: Optional[Sequence[str]] = None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ConfigError, ReportError, UsageError) as e:
        print(f"cloudrep: error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:  # noqa: BLE001 - any failure mid-simulation maps to exit 2
        logger.debug("runtime failure", exc_info=True)
        print(f"cloudrep: runtime error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
