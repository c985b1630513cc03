"""
Execution of a parsed ``RunSpec``: bench, verify and amdahl.
"""

import math
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional

import numpy as np
import structlog
from dotenv import dotenv_values
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from ..bench.analysis import amdahl_limit, amdahl_speedup, fit_parallel_fraction, speedup_table
from ..bench.report import emit_plot, write_report
from ..bench.timing import time_kernel
from ..config.settings import Settings
from ..exceptions import PargridError, UsageError
from ..kernels.registry import get_kernel
from ..kernels.sar import form_image_reference, form_image_serial, make_phase_history
from ..models.configs import KernelConfig, SarConfig, SqifParams, TransferCurve
from ..models.records import SpeedupRow
from ..models.run_spec import RunSpec
from ..transport.launcher import launch
from ..utils.hardware_detector import HardwareDetector

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3

SQIF_KEYS = {"J", "xe_min", "xe_max", "xe_points", "M", "dt", "beta_n", "Nsquid", "var_size", "tmax", "seed"}

CONFIG_KEYS = {
    "batch": {"n_items", "work_cost", "seed"},
    "sar": {"n_rows", "n_cols", "seed"},
    "sqif-tp": SQIF_KEYS,
    "sqif-dp": SQIF_KEYS,
}

# Direct-summation oracle size for the sar suite
ORACLE_SHAPE = (12, 16)
ORACLE_TOLERANCE = 1e-12

console = Console()
err_console = Console(stderr=True)


def read_config_file(path: Path) -> Dict[str, str]:
    """``key=value`` lines; comments and ``export`` prefixes as python-dotenv reads them."""

    path = Path(path)
    if not path.is_file():
        raise UsageError(f"config file {path} does not exist")
    values = dotenv_values(path)
    missing = sorted(key for key, value in values.items() if value is None)
    if missing:
        raise UsageError(f"config file {path}: keys without a value: {', '.join(missing)}")
    return dict(values)


def load_kernel_config(kernel_id: str, config_path: Optional[Path] = None, seed: Optional[int] = None) -> KernelConfig:
    """Kernel config from model defaults, then the config file, then the seed flag."""

    kernel = get_kernel(kernel_id)
    values: Dict[str, Any] = read_config_file(config_path) if config_path else {}

    unknown = sorted(set(values) - CONFIG_KEYS[kernel_id])
    if unknown:
        raise UsageError(
            f"unknown {kernel_id} config key(s) {', '.join(unknown)}; "
            f"expected {', '.join(sorted(CONFIG_KEYS[kernel_id]))}"
        )
    if seed is not None:
        values["seed"] = seed

    try:
        if kernel.config_model is SqifParams:
            xe_min = float(values.pop("xe_min", -1.0))
            xe_max = float(values.pop("xe_max", 1.0))
            xe_points = int(values.pop("xe_points", 32))
            return SqifParams.from_range(xe_min, xe_max, xe_points, **values)
        return kernel.config_model.model_validate(values)
    except ValueError as e:
        raise UsageError(f"invalid {kernel_id} config: {e}") from e


# Verification


class CaseResult(NamedTuple):
    case: str
    workers: Optional[int]
    max_abs_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_abs_error <= self.tolerance


def _as_array(result: Any) -> Optional[np.ndarray]:
    if result is None:
        return None
    if isinstance(result, TransferCurve):
        return np.asarray(result.v, dtype=np.float64)
    return np.asarray(result)


def max_abs_error(expected: Any, actual: Any) -> float:
    """Largest elementwise deviation; infinite when shapes disagree or a result is missing."""

    expected, actual = _as_array(expected), _as_array(actual)
    if expected is None or actual is None or expected.shape != actual.shape:
        return math.inf
    if expected.size == 0:
        return 0.0
    deviation = float(np.max(np.abs(expected - actual)))
    return math.inf if math.isnan(deviation) else deviation


def verify_kernel(
    kernel_id: str,
    config: KernelConfig,
    workers: List[int],
    backend: Optional[str] = None,
    timeout_s: Optional[float] = None,
    settings: Optional[Settings] = None,
) -> List[CaseResult]:
    """Parallel result at every P against the serial oracle (plus the DFT oracle for sar)."""

    kernel = get_kernel(kernel_id)
    expected = kernel.serial(config)
    cases = []

    if kernel_id == "sar":
        small = SarConfig(n_rows=ORACLE_SHAPE[0], n_cols=ORACLE_SHAPE[1], seed=config.seed)
        F = make_phase_history(small)
        error = max_abs_error(form_image_reference(F), form_image_serial(F, small))
        cases.append(CaseResult("serial vs direct DFT", None, error, ORACLE_TOLERANCE))

    for P in dict.fromkeys(workers):
        actual = launch(P, kernel.parallel, config, backend=backend, timeout_s=timeout_s, settings=settings)[0]
        case = CaseResult("parallel vs serial", P, max_abs_error(expected, actual), kernel.tolerance)
        logger.info(
            "verify case",
            kernel=kernel_id,
            workers=P,
            max_abs_error=case.max_abs_error,
            passed=case.passed,
        )
        cases.append(case)
    return cases


def _verdict_table(kernel_id: str, cases: List[CaseResult]) -> Table:
    table = Table(title=f"verify {kernel_id}")
    table.add_column("case")
    table.add_column("workers", justify="right")
    table.add_column("max abs error", justify="right")
    table.add_column("tolerance", justify="right")
    table.add_column("verdict")
    for case in cases:
        table.add_row(
            case.case,
            "-" if case.workers is None else str(case.workers),
            f"{case.max_abs_error:.3g}",
            f"{case.tolerance:.0e}" if case.tolerance else "exact",
            "PASS" if case.passed else "FAIL",
        )
    return table


def _fitted_fraction(row: SpeedupRow) -> str:
    # Parallel fraction implied by the measured speedup; undefined at the baseline.
    if row.workers == 1 or row.speedup <= 0:
        return "-"
    return f"{fit_parallel_fraction(row.speedup, row.workers):.4g}"


def _speedup_table_view(rows: List[SpeedupRow]) -> Table:
    table = Table(title=f"bench {rows[0].kernel_id}" if rows else "bench")
    for column in ("workers", "mean time (s)", "speedup", "efficiency", "amdahl bound", "fitted fraction"):
        table.add_column(column, justify="right")
    for row in rows:
        table.add_row(
            str(row.workers),
            f"{row.mean_time_s:.6g}",
            f"{row.speedup:.4g}",
            f"{row.efficiency:.4g}",
            f"{row.amdahl_bound:.4g}",
            _fitted_fraction(row),
        )
    return table


def _run_bench(spec: RunSpec, settings: Optional[Settings]) -> int:
    config = load_kernel_config(spec.kernel_id, spec.config_path, spec.seed)
    logger.info("bench host", **HardwareDetector.detect_system_info())
    if max(spec.workers) > HardwareDetector.recommended_max_workers():
        logger.warning(
            "worker count exceeds physical cores; speedup will flatten",
            workers=max(spec.workers),
            physical_cores=HardwareDetector.physical_cores(),
        )

    records = []
    for P in dict.fromkeys(spec.workers):
        records.extend(
            time_kernel(
                spec.kernel_id,
                config,
                P,
                trials=spec.trials,
                backend=spec.backend,
                timeout_s=spec.timeout_s,
                settings=settings,
            )
        )

    rows = speedup_table(records, spec.fraction)
    console.print(_speedup_table_view(rows))
    if spec.output_path:
        write_report(rows, spec.output_path)
    if spec.plot_path:
        emit_plot(rows, spec.fraction, spec.plot_path, title=f"{spec.kernel_id} speedup")
    return EXIT_OK


def _run_verify(spec: RunSpec, settings: Optional[Settings]) -> int:
    config = load_kernel_config(spec.kernel_id, spec.config_path, spec.seed)
    cases = verify_kernel(
        spec.kernel_id,
        config,
        spec.workers,
        backend=spec.backend,
        timeout_s=spec.timeout_s,
        settings=settings,
    )
    console.print(_verdict_table(spec.kernel_id, cases))
    failed = [case for case in cases if not case.passed]
    if failed:
        err_console.print(f"{len(failed)} of {len(cases)} verification case(s) failed", markup=False)
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def _run_amdahl(spec: RunSpec) -> int:
    f = spec.fraction
    limit = f"{amdahl_limit(f):.9g}" if f < 1 else "unbounded"
    console.print(f"Amdahl limit for f={f:g}: {limit}", markup=False, highlight=False)

    table = Table()
    table.add_column("workers", justify="right")
    table.add_column("speedup bound", justify="right")
    for P in dict.fromkeys(spec.workers):
        table.add_row(str(P), f"{amdahl_speedup(f, P):.9g}")
    console.print(table)
    return EXIT_OK


def run(spec: RunSpec, settings: Optional[Settings] = None) -> int:
    """Execute one CLI invocation and return its exit code."""

    try:
        if spec.subcommand == "amdahl":
            return _run_amdahl(spec)
        if spec.subcommand == "bench":
            return _run_bench(spec, settings)
        return _run_verify(spec, settings)
    except UsageError as e:
        err_console.print(f"usage error: {e}", markup=False)
        return EXIT_USAGE
    except (PargridError, ValidationError) as e:
        logger.error("run failed", subcommand=spec.subcommand, kernel=spec.kernel_id, error=str(e))
        err_console.print(f"error: {e}", markup=False)
        return EXIT_RUNTIME
