"""Command-line driver: analyze one litmus file, run a benchmark directory
against expected verdicts, or enumerate oracle outcomes.

Exit codes: 0 all assertions proved, 1 some possibly violated, 2 parse or
semantic error, 3 internal error (divergence, budget, soundness failure).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import engine, interference, oracle
from .litmus import ParseError, SemanticError, parse, unroll
from .posets import TooLarge
from .transfer import AnalysisError, TransferConfig

EXIT_PROVED = 0
EXIT_VIOLATED = 1
EXIT_INPUT_ERROR = 2
EXIT_INTERNAL = 3


@dataclass
class RunReport:
    file: str
    config: dict
    verdicts: dict
    overall: str
    iterations_total: int
    iterations_effective: int
    states_per_label: dict
    widened: list
    elapsed_s: float

    def to_json(self) -> str:
        d = dict(self.__dict__)
        return json.dumps(d, sort_keys=True, indent=2)


def _config_dict(args) -> dict:
    return {
        "unroll": args.unroll,
        "widen_after": args.widen_after,
        "mode": args.mode,
        "prune": not args.no_prune,
        "abstract_mo": args.abstract_mo,
        "rmw_critical": args.rmw_critical,
        "max_iterations": args.max_iterations,
    }


def analyze_file(path: Path, args) -> tuple:
    program = parse(path.read_text())
    program = unroll(program, args.unroll)
    tc = TransferConfig(abstract_mo=args.abstract_mo,
                        rmw_critical=args.rmw_critical,
                        widening_threshold=args.widen_after)
    start = time.perf_counter()
    if args.mode == "combinations":
        result = engine.analyze_with_combinations(program, tc,
                                                  max_iterations=args.max_iterations,
                                                  prune=not args.no_prune)
    else:
        result = engine.tmai(program, tc, max_iterations=args.max_iterations)
    elapsed = time.perf_counter() - start
    if args.oracle_check:
        report = oracle.check_soundness(program, result)
        report.raise_if_unsound()
    verdicts = {site: str(v) for site, v in sorted(result.verdicts.items())}
    overall = "Proved" if result.all_proved else "PossiblyViolated"
    return RunReport(
        file=str(path),
        config=_config_dict(args),
        verdicts=verdicts,
        overall=overall,
        iterations_total=result.iterations_total,
        iterations_effective=result.iterations_effective,
        states_per_label=result.states.counts(),
        widened=sorted(str(l) for l in result.widened),
        elapsed_s=round(elapsed, 4),
    ), result


def expected_verdict(path: Path) -> str | None:
    for line in path.read_text().splitlines():
        stripped = line.strip()
        if stripped.startswith("# expect:"):
            return stripped.split(":", 1)[1].strip()
        if stripped and not stripped.startswith("#"):
            break
    return None


def bench(directory: Path, args) -> int:
    files = sorted(directory.glob("*.lit"))
    rows = []
    mismatches = 0
    for f in files:
        expect = expected_verdict(f)
        try:
            report, _ = analyze_file(f, args)
        except Exception as exc:  # keep the table going; report the failure
            rows.append((f.name, expect or "-", f"error: {exc}", "FAIL", "-", "-"))
            mismatches += 1
            continue
        got = "proved" if report.overall == "Proved" else "violated"
        ok = (expect is None) or (got == expect)
        if not ok:
            mismatches += 1
        rows.append((f.name, expect or "-", got, "ok" if ok else "MISMATCH",
                     f"{report.iterations_effective}/{report.iterations_total}",
                     f"{report.elapsed_s:.2f}s"))
    if args.json:
        print(json.dumps([{"file": r[0], "expect": r[1], "verdict": r[2],
                           "status": r[3], "iterations": r[4], "time": r[5]}
                          for r in rows], indent=2))
    else:
        widths = [max(len(str(r[i])) for r in rows + [("file", "expect", "verdict",
                                                       "status", "it", "time")])
                  for i in range(6)] if rows else []
        header = ("file", "expect", "verdict", "status", "it", "time")
        if rows:
            print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
            for r in rows:
                print("  ".join(str(c).ljust(w) for c, w in zip(r, widths)))
        else:
            print("(no .lit files)")
    return EXIT_VIOLATED if mismatches else EXIT_PROVED


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ramosaic",
                                 description="Thread-modular analyzer for "
                                             "release-acquire litmus programs")
    ap.add_argument("path", help="litmus file, or a directory to benchmark")
    ap.add_argument("--unroll", type=int, default=2, metavar="N",
                    help="loop unrolling bound (default 2)")
    ap.add_argument("--widen-after", type=int, default=3, metavar="N",
                    help="widen loop heads after N visits (default 3)")
    ap.add_argument("--mode", choices=["per-load", "combinations"],
                    default="per-load")
    ap.add_argument("--no-prune", action="store_true",
                    help="disable feasibility pruning in combinations mode")
    ap.add_argument("--abstract-mo", action=argparse.BooleanOptionalAction,
                    default=True,
                    help="forget older same-thread stores in posets (default on)")
    ap.add_argument("--rmw-critical", action=argparse.BooleanOptionalAction,
                    default=True,
                    help="treat rmw events as critical (default on)")
    ap.add_argument("--max-iterations", type=int, default=1000)
    ap.add_argument("--dump-states", action="store_true")
    ap.add_argument("--json", action="store_true")
    ap.add_argument("--oracle-check", action="store_true",
                    help="cross-check the result against the execution oracle")
    return ap


def main(argv=None) -> int:
    args = build_arg_parser().parse_args(argv)
    path = Path(args.path)
    if not path.exists():
        print(f"ramosaic: {path}: no such file or directory", file=sys.stderr)
        return EXIT_INPUT_ERROR
    try:
        if path.is_dir():
            return bench(path, args)
        report, result = analyze_file(path, args)
    except (ParseError, SemanticError) as exc:
        print(f"ramosaic: {path}: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except (engine.Divergence, interference.CombinationBudgetExceeded,
            AnalysisError, oracle.SoundnessViolation, TooLarge) as exc:
        print(f"ramosaic: {path}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    if args.json:
        print(report.to_json())
    else:
        for site, verdict in report.verdicts.items():
            print(f"{site}: {verdict}")
        print(f"overall: {report.overall}  "
              f"(iterations {report.iterations_effective} effective / "
              f"{report.iterations_total} total, {report.elapsed_s:.3f}s)")
    if args.dump_states:
        print(result.states.dump())
    return EXIT_PROVED if report.overall == "Proved" else EXIT_VIOLATED


def oracle_main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="ra-oracle",
                                 description="Enumerate release-acquire "
                                             "executions of a loop-free litmus file")
    ap.add_argument("path")
    ap.add_argument("--outcomes", action="store_true",
                    help="print the sorted set of final register valuations")
    ap.add_argument("--unroll", type=int, default=2)
    ap.add_argument("--guard", type=int, default=14)
    args = ap.parse_args(argv)
    path = Path(args.path)
    if not path.exists():
        print(f"ra-oracle: {path}: no such file", file=sys.stderr)
        return EXIT_INPUT_ERROR
    try:
        program = unroll(parse(path.read_text()), args.unroll)
        execs = oracle.enumerate_executions(program, guard=args.guard)
    except (ParseError, SemanticError) as exc:
        print(f"ra-oracle: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except Exception as exc:
        print(f"ra-oracle: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    if args.outcomes:
        for regs in sorted(oracle.outcomes(execs)):
            print(" ".join(f"{k}={v}" for k, v in regs))
    violated = sorted({site for e in execs for site in e.violations})
    print(f"executions: {len(execs)}")
    if violated:
        print("violated: " + ", ".join(violated))
        return EXIT_VIOLATED
    return EXIT_PROVED


if __name__ == "__main__":
    sys.exit(main())
