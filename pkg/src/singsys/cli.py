"""Command-line front end: ``singsys COMMAND FILE... [options]``.

Exit codes: 0 success, 2 input error, 3 inconsistent dynamics, 4 indeterminate
or unstabilized result. With several files the largest code wins.
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor

from .errors import InputError, ParseError
from .problem import load
from .report import COMMANDS, EXIT_INPUT, Settings, build_report, to_json, to_text


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="singsys",
        description="Constraint analysis for singular velocity-quadratic Lagrangians.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("files", nargs="+", metavar="FILE", help="problem file(s)")
    ap.add_argument("--json", metavar="PATH", help="also write the report(s) as JSON")
    ap.add_argument("--seed", type=int, help="sampling seed (file value, else 0)")
    ap.add_argument("--max-generations", type=int, help="stabilization cap (file value, else 10)")
    ap.add_argument("--trials", type=int, help="sample points per weak test (file value, else 20)")
    ap.add_argument("--jobs", type=int, default=1, help="analyze files in parallel")
    return ap


def run_one(command: str, path: str, overrides: dict) -> tuple[int, dict | None, str, str]:
    """Analyze one file; returns (exit code, report, text, diagnostics)."""
    try:
        prob = load(path)
    except (InputError, ParseError) as exc:
        return EXIT_INPUT, None, "", f"error: {exc}\n"
    engine = dict(prob.engine)
    engine.update({k: v for k, v in overrides.items() if v is not None})
    for key, low in (("max_generations", 1), ("trials", 1)):
        if engine[key] < low:
            return EXIT_INPUT, None, "", f"error: {key} must be at least {low}\n"
    settings = Settings(engine["max_generations"], engine["trials"], engine["seed"])
    report, code = build_report(prob, command, settings)
    msg = report["outcome"]["message"]
    diag = f"error: {msg}\n" if code and msg else ""
    return code, report, to_text(report), diag


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    overrides = {"seed": args.seed, "max_generations": args.max_generations, "trials": args.trials}
    jobs = max(1, args.jobs)
    if jobs > 1 and len(args.files) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_one, [args.command] * len(args.files), args.files,
                                    [overrides] * len(args.files)))
    else:
        results = [run_one(args.command, f, overrides) for f in args.files]

    reports = []
    worst = 0
    for code, report, text, diag in results:
        if text:
            sys.stdout.write(text)
        if diag:
            sys.stderr.write(diag)
        reports.append(report)
        worst = max(worst, code)
    if args.json:
        payload = reports[0] if len(reports) == 1 else reports
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(to_json(payload))
    return worst


if __name__ == "__main__":
    sys.exit(main())
