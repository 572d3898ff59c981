"""Command-line interface: ``verify``, ``sample``, ``dimension`` and ``suite``.

Exit codes: 0 pass, 1 verification failure, 2 invalid configuration or
constraint violation, 3 I/O error.
"""

from __future__ import annotations

import argparse
import io
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, build_field, load_config
from .core import FlowError
from .fields import evaluate_values
from .flows import solution_space_dimension
from .residuals import default_system, residual, sample_grid
from .suite import EXIT_CONFIG, EXIT_IO, EXIT_PASS, dumps, run_case, run_suite, suite_report, suite_text

FLOAT_FORMAT = ".17g"


def _write(path: str | Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def _emit_report(record: dict, text: str, out: str | None) -> int:
    """Print ``text`` and write JSON plus text reports; returns an I/O exit code or 0."""
    sys.stdout.write(text)
    if out is None:
        return EXIT_PASS
    try:
        _write(out, dumps(record))
        _write(Path(out).with_suffix(".txt"), text)
    except OSError as exc:
        sys.stderr.write(f"cannot write report: {exc}\n")
        return EXIT_IO
    return EXIT_PASS


def _load(args) -> RunConfig:
    run = load_config(args.config)
    return run.with_seed(args.seed)


def _failure(kind: int, exc: BaseException, out: str | None) -> int:
    record = {"exit_code": kind, "error": {"type": type(exc).__name__, "message": str(exc)}}
    io_code = _emit_report(record, f"ERROR {type(exc).__name__}: {exc}\n", out)
    return io_code or kind


def cmd_verify(args) -> int:
    try:
        run = _load(args)
    except OSError as exc:
        return _failure(EXIT_IO, exc, None)
    except (FlowError, ValueError) as exc:
        return _failure(EXIT_CONFIG, exc, args.out)
    result = run_case(run, args.workers)
    out = args.out or run.output.get("report")
    io_code = _emit_report(result.to_dict(), result.summary_line() + "\n", out)
    return io_code or result.exit_code


def sample_table(run: RunConfig, workers: int = 1) -> tuple[list[str], np.ndarray]:
    """Header and rows of the sample CSV (rows in lexicographic grid order)."""
    if run.grid is None:
        raise ConfigError("sampling needs a 'grid' block")
    fld = build_field(run.flow, run.params)
    n = fld.dim
    shape = run.grid["shape"]
    if len(shape) not in (1, n):
        raise ConfigError(f"grid shape must have 1 or {n} entries")
    box = run.grid.get("box", list(run.sampler.box))
    points = sample_grid(n, shape, box)
    times = [float(t) for t in run.grid.get("times", [0.0])]
    t = np.repeat(np.asarray(times), points.shape[0])
    x = np.tile(points, (len(times), 1))
    system = run.system or default_system(fld)

    def rows(idx):
        tt, xx = t[idx], x[idx]
        v, p, b, _ = evaluate_values(fld, tt, xx)
        res = residual(fld, system, tt, xx)
        cols = [tt[:, None], xx, v, p[:, None], b[:, None], res.momentum, res.continuity[:, None], res.buoyancy[:, None]]
        return np.hstack(cols)

    idx_all = np.arange(t.shape[0])
    if workers <= 1:
        table = rows(idx_all)
    else:
        chunks = [c for c in np.array_split(idx_all, workers) if c.size]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            table = np.vstack(list(pool.map(rows, chunks)))
    header = ["t"] + [f"x{i + 1}" for i in range(n)] + [f"v{i + 1}" for i in range(n)] + ["p", "b"]
    header += [f"res_mom_{i + 1}" for i in range(n)] + ["res_div", "res_buoy"]
    # adding 0.0 turns negative zeros into zeros
    return header, table + 0.0


def format_csv(header: list[str], table: np.ndarray) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in table:
        buf.write(",".join(format(float(v), FLOAT_FORMAT) for v in row) + "\n")
    return buf.getvalue()


def cmd_sample(args) -> int:
    try:
        run = _load(args)
        header, table = sample_table(run, args.workers)
    except OSError as exc:
        return _failure(EXIT_IO, exc, None)
    except (FlowError, ValueError) as exc:
        return _failure(EXIT_CONFIG, exc, None)
    out = args.out or run.output.get("csv")
    text = format_csv(header, table)
    if out is None:
        sys.stdout.write(text)
        return EXIT_PASS
    try:
        _write(out, text)
    except OSError as exc:
        sys.stderr.write(f"cannot write CSV: {exc}\n")
        return EXIT_IO
    sys.stdout.write(f"wrote {table.shape[0]} rows to {out}\n")
    return EXIT_PASS


def cmd_dimension(args) -> int:
    try:
        count = solution_space_dimension(args.family, args.n, args.N, args.M)
    except (FlowError, ValueError) as exc:
        sys.stderr.write(f"ERROR {type(exc).__name__}: {exc}\n")
        return EXIT_CONFIG
    sys.stdout.write(f"core {count.core}\nbonus {count.bonus}\n")
    return EXIT_PASS


def cmd_suite(args) -> int:
    try:
        results, code = run_suite(args.seed, args.workers)
    except OSError as exc:
        return _failure(EXIT_IO, exc, None)
    except (FlowError, ValueError) as exc:
        return _failure(EXIT_CONFIG, exc, args.out)
    io_code = _emit_report(suite_report(results, code), suite_text(results, code), args.out)
    return io_code or code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="planewave-flows", description="Verify explicit plane-wave flow solutions.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--seed", type=int, default=None, help="override the sampler seed")
        p.add_argument("--workers", type=int, default=1, help="threads for sample evaluation")
        p.add_argument("--out", default=None, help="output path (report JSON or CSV)")

    common(sub.add_parser("verify", help="verify one configured flow"))
    common(sub.add_parser("sample", help="sample a flow on a grid to CSV"))
    dim = sub.add_parser("dimension", help="solution-space dimension of a family")
    dim.add_argument("--family", required=True)
    dim.add_argument("--n", type=int, required=True)
    dim.add_argument("--N", type=int, default=1)
    dim.add_argument("--M", type=int, nargs="*", default=[])
    common(sub.add_parser("suite", help="run the bundled acceptance matrix"), config=False)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors, matching the config-error code
        return int(exc.code or 0)
    if getattr(args, "workers", 1) < 1:
        sys.stderr.write("--workers must be positive\n")
        return EXIT_CONFIG
    handlers = {"verify": cmd_verify, "sample": cmd_sample, "dimension": cmd_dimension, "suite": cmd_suite}
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
