"""Command-line interface: ``schrodinger-isp {run-example, verify, synthesize}``.

Exit codes: 0 success, 1 verification or convergence failure, 2 usage
error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from .errors import SolverError
from .experiments import EXAMPLES, ExperimentConfig, run_experiment, synthesize
from .measurement import NOISE_MODELS
from .adjoint import ADJOINT_MODES

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("schrodinger_isp")


class UsageError(Exception):
    pass


def _noise_list(text: str) -> list[float]:
    try:
        levels = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid noise list {text!r}") from None
    if not levels or any(lv < 0 for lv in levels):
        raise argparse.ArgumentTypeError("noise levels must be a nonempty list of values >= 0")
    return levels


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="schrodinger-isp",
        description="Source reconstruction for the 1D Schrodinger equation with dynamic "
                    "boundary conditions from final-time data.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log every iteration")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run-example", help="reconstruct a builtin or configured example")
    run.add_argument("name", choices=sorted(EXAMPLES) + ["custom"])
    run.add_argument("--config", type=Path, help="JSON config; flags override its values")
    run.add_argument("--noise", type=_noise_list, help="comma-separated noise levels, e.g. 0.01,0.03")
    run.add_argument("--seed", type=int)
    run.add_argument("--e-j", dest="e_j", type=float, help="stopping tolerance on the cost")
    run.add_argument("--max-iter", dest="max_iter", type=int)
    run.add_argument("--out", dest="output_dir", help="output directory")
    run.add_argument("--noise-model", dest="noise_model", choices=NOISE_MODELS)
    run.add_argument("--adjoint-mode", dest="adjoint_mode", choices=ADJOINT_MODES)
    run.add_argument("--measured-dir", type=Path,
                     help="read noisy_p*.csv written by 'synthesize' instead of generating data")
    run.add_argument("--jobs", type=int, default=1, help="noise levels run in parallel")

    ver = sub.add_parser("verify", help="run the numerical property suites")
    ver.add_argument("--level", choices=("fast", "full"), default="fast")
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--report", type=Path, help="write the JSON report here")

    syn = sub.add_parser("synthesize", help="write exact and noisy measurement files")
    syn.add_argument("--config", type=Path, required=True)
    syn.add_argument("--out", dest="output_dir")
    return parser


def _load_config(name: str, path: Path | None, overrides: dict) -> ExperimentConfig:
    try:
        if path is None:
            return ExperimentConfig.for_example(name, **overrides)
        data = json.loads(path.read_text())
    except OSError:
        raise
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    if not isinstance(data, dict):
        raise UsageError(f"{path}: config must be a JSON object")
    data.setdefault("example", name)
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig.from_dict(data)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc


def cmd_run_example(args) -> int:
    overrides = {"noise_levels": args.noise, "seed": args.seed, "e_j": args.e_j,
                 "max_iter": args.max_iter, "output_dir": args.output_dir,
                 "noise_model": args.noise_model, "adjoint_mode": args.adjoint_mode}
    try:
        config = _load_config(args.name, args.config, overrides)
        config.problem()
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    results = run_experiment(config, args.measured_dir, jobs=args.jobs)
    ok = True
    for res in results:
        bound_ok = config.error_bound is not None and res.relative_l2_error <= config.error_bound
        passed = res.converged or bound_ok
        ok &= passed
        print(f"p={res.noise_level:<6g} k={res.iterations:<5d} J={res.final_cost:.3e} "
              f"err={res.relative_l2_error:.4f} {res.termination:<22s} "
              f"{res.runtime_s:6.2f}s {'ok' if passed else 'FAIL'}")
        if res.error:
            print(f"  {res.error}", file=sys.stderr)
    print(f"artifacts in {Path(config.output_dir).resolve()}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify(args) -> int:
    from .verification import run_suite

    start = time.perf_counter()
    reports = run_suite(args.level, seed=args.seed)
    elapsed = time.perf_counter() - start
    for rep in reports:
        print(f"{'PASS' if rep.passed else 'FAIL'}  {rep.check:<36s} "
              f"value={rep.value:.3e} tol={rep.tolerance:.1e}")
    n_pass = int(sum(bool(r.passed) for r in reports))
    print(f"{n_pass}/{len(reports)} checks passed in {elapsed:.1f}s")
    if args.report is not None:
        payload = {"level": args.level, "seed": args.seed,
                   "checks": [r.to_dict() for r in reports],
                   "pass": n_pass == len(reports)}
        args.report.parent.mkdir(parents=True, exist_ok=True)
        args.report.write_text(json.dumps(payload, indent=2))
    return EXIT_OK if n_pass == len(reports) else EXIT_FAIL


def cmd_synthesize(args) -> int:
    config = _load_config("custom", args.config, {"output_dir": args.output_dir})
    try:
        paths = synthesize(config)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    for p in paths:
        print(p)
    return EXIT_OK


COMMANDS = {"run-example": cmd_run_example, "verify": cmd_verify, "synthesize": cmd_synthesize}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
