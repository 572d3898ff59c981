"""Verification of configured cases and the bundled acceptance matrix.

Each case is checked three times: with the exact jets, and with the
finite-difference oracle at steps ``h`` and ``h/2``.  A positive case passes
when the exact residual is within the analytic tolerance, the FD residual is
within the FD tolerance and halving ``h`` shrinks it by at least the
required ratio (skipped when the FD residual is already at rounding level).
Negative controls pass the matrix when they *fail* verification with a
witness above the witness threshold; ``expect: incompatible`` cases pass
when superposition is refused.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .config import RunConfig, build_field, bundled_config_paths, load_config
from .core import FlowError, IncompatibleSuperpositionError
from .residuals import verify

EXIT_PASS = 0
EXIT_VERIFY = 1
EXIT_CONFIG = 2
EXIT_IO = 3
# below this FD residual the convergence ratio is dominated by rounding
RATIO_FLOOR = 1e-9


@dataclass
class CaseResult:
    name: str
    family: str
    expect: str
    exit_code: int
    met_expectation: bool
    analytic: dict | None = None
    fd: dict | None = None
    fd_half: dict | None = None
    fd_ratio: float | None = None
    witness: dict | None = None
    error: dict | None = None
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "family": self.family,
            "expect": self.expect,
            "exit_code": self.exit_code,
            "met_expectation": self.met_expectation,
            "analytic": self.analytic,
            "fd": self.fd,
            "fd_half": self.fd_half,
            "fd_ratio": self.fd_ratio,
            "witness": self.witness,
            "error": self.error,
            "notes": self.notes,
        }

    def summary_line(self) -> str:
        status = "PASS" if self.met_expectation else "FAIL"
        if self.error is not None and self.analytic is None:
            detail = f"error={self.error['type']}"
        else:
            a = max(self.analytic["max_abs"].values())
            f = max(self.fd["max_abs"].values())
            ratio = "n/a" if self.fd_ratio is None else f"{self.fd_ratio:.2f}"
            detail = f"analytic={a:.2e} fd={f:.2e} ratio={ratio}"
        return f"{status} {self.name:<36} {self.expect:<12} exit={self.exit_code} {detail}"


def _error_record(exc: BaseException) -> dict:
    return {"type": type(exc).__name__, "message": str(exc)}


def run_case(run: RunConfig, workers: int = 1) -> CaseResult:
    """Build and verify one configured case."""
    family = run.flow.get("family", "?")
    try:
        fld = build_field(run.flow, run.params)
    except IncompatibleSuperpositionError as exc:
        rec = _error_record(exc)
        rec["pair"] = list(exc.pair)
        return CaseResult(run.name, family, run.expect, EXIT_CONFIG, run.expect == "incompatible", witness=exc.witness, error=rec)
    except FlowError as exc:
        return CaseResult(run.name, family, run.expect, EXIT_CONFIG, False, error=_error_record(exc))

    tol = run.tolerances
    h = run.fd_step
    kwargs = {"system": run.system, "sampler": run.sampler, "workers": workers}
    analytic = verify(fld, tolerance=tol["analytic"], oracle="analytic", **kwargs)
    fd = verify(fld, tolerance=tol["fd"], oracle="fd", h=h, **kwargs)
    fd_half = verify(fld, tolerance=tol["fd"], oracle="fd", h=0.5 * h, **kwargs)
    fd_max = max(fd.max_abs.values())
    half_max = max(fd_half.max_abs.values())
    ratio = None if fd_max <= RATIO_FLOOR else (fd_max / half_max if half_max > 0 else float("inf"))
    converged = ratio is None or ratio >= tol["fd_ratio"]
    ok = analytic.passed and fd.passed and converged
    worst = max(analytic.max_abs.values())
    if run.expect == "fail":
        met = (not analytic.passed) and worst >= tol["witness"]
    else:
        met = ok and run.expect == "pass"
    notes = {"converged": converged}
    if fld.non_solution:
        notes["broken_invariant"] = fld.meta.get("broken_invariant")
        notes["expected_failure"] = fld.meta.get("expected_failure")
    return CaseResult(
        run.name,
        fld.family,
        run.expect,
        EXIT_PASS if ok else EXIT_VERIFY,
        met,
        analytic=analytic.to_dict(),
        fd=fd.to_dict(),
        fd_half=fd_half.to_dict(),
        fd_ratio=ratio,
        witness=analytic.witness,
        notes=notes,
    )


def run_suite(seed: int | None = None, workers: int = 1, paths=None) -> tuple[list[CaseResult], int]:
    """Run every bundled configuration; exit code 0 iff all meet expectations."""
    results = []
    for path in paths if paths is not None else bundled_config_paths():
        results.append(run_case(load_config(path).with_seed(seed), workers))
    code = EXIT_PASS if all(r.met_expectation for r in results) else EXIT_VERIFY
    return results, code


def suite_report(results: list[CaseResult], code: int) -> dict[str, Any]:
    return {
        "exit_code": code,
        "passed": sum(r.met_expectation for r in results),
        "total": len(results),
        "cases": [r.to_dict() for r in results],
    }


def suite_text(results: list[CaseResult], code: int) -> str:
    lines = [r.summary_line() for r in results]
    failed = [r.name for r in results if not r.met_expectation]
    lines.append(f"{len(results) - len(failed)}/{len(results)} cases met expectations")
    if failed:
        lines.append("failing cases: " + ", ".join(failed))
    return "\n".join(lines) + "\n"


def dumps(record: dict) -> str:
    return json.dumps(record, indent=2, sort_keys=True) + "\n"
