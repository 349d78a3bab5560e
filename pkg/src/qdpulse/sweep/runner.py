"""Parallel (Gamma0/gamma, p) grid sweeps"""

import csv
import dataclasses
import logging
import os
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np
from scipy.stats import spearmanr
from tqdm import tqdm

from qdpulse.core.dynamics import SimConfig, evolve
from qdpulse.core.errors import ConfigInvalid, EmptyWindow, QdpulseError, StepUnstable
from qdpulse.core.metrics import trajectory_maxima
from qdpulse.pulses.base import PulseShape, PulseSpec

logger = logging.getLogger(__name__)

STATUS_OK = "ok"
STATUS_FAILED = "failed"

SWEEP_CSV_COLUMNS = (
    "gamma0_over_gamma",
    "p",
    "max_pop_0110",
    "max_fidelity",
    "max_negativity",
    "max_negativity_2x",
    "theta_at_max_neg",
    "status",
)


class ExecutorKind(str, Enum):
    PROCESS = "process"
    THREAD = "thread"


def resolve_executor(value: Any) -> ExecutorKind:
    """Map a config value to an ExecutorKind

    Raises:
        ConfigInvalid: if the name is not process or thread
    """
    try:
        return ExecutorKind(value)
    except ValueError:
        raise ConfigInvalid("sweep.executor", f"{value!r} not one of: process, thread")


def point_seed(base_seed: int, i: int, j: int) -> int:
    """64-bit seed mixed from the base seed and the grid coordinates"""
    state = np.random.SeedSequence([int(base_seed), int(i), int(j)]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def _strictly_increasing(values) -> bool:
    return all(b > a for a, b in zip(values[:-1], values[1:]))


@dataclass(frozen=True)
class SweepGrid:
    """Grid over pulse intensity and width around a template SimConfig

    Attributes:
        gamma0_over_gamma: Intensity axis (index i)
        p_values: Width axis sigma_theta / 2 pi (index j)
        base_config: Template for every grid point
        pulse_shape: Envelope family used at every point
        base_seed: Mixed with (i, j) into per-point noise seeds
        workers: Pool size; None uses all CPUs, 1 runs serially
        executor: Process or thread pool
        pop_window: theta window for max_pop_0110 / max_fidelity; None is the full run
        negativity_window: theta window for max_negativity; None is the full run
    """

    gamma0_over_gamma: Tuple[float, ...]
    p_values: Tuple[float, ...]
    base_config: SimConfig
    pulse_shape: PulseShape = PulseShape.SQUARE
    base_seed: int = 0
    workers: Optional[int] = None
    executor: ExecutorKind = ExecutorKind.PROCESS
    pop_window: Optional[Tuple[float, float]] = None
    negativity_window: Optional[Tuple[float, float]] = None

    def validate(self) -> None:
        """Raise ConfigInvalid on empty, unsorted or non-positive axes"""
        for name, values in (("sweep.gamma0_over_gamma", self.gamma0_over_gamma),
                             ("sweep.width_over_2pi", self.p_values)):
            if not values:
                raise ConfigInvalid(name, "grid must not be empty")
            if not _strictly_increasing(values):
                raise ConfigInvalid(name, "grid must be strictly increasing")
        if self.gamma0_over_gamma[0] < 0:
            raise ConfigInvalid("sweep.gamma0_over_gamma", "values must be >= 0")
        if self.p_values[0] <= 0:
            raise ConfigInvalid("sweep.width_over_2pi", "values must be > 0")
        if self.workers is not None and self.workers < 1:
            raise ConfigInvalid("sweep.workers", "must be >= 1")

    @property
    def shape(self) -> Tuple[int, int]:
        """(len(gamma0_over_gamma), len(p_values))"""
        return len(self.gamma0_over_gamma), len(self.p_values)

    def cells(self) -> Iterator[Tuple[int, int]]:
        """Grid coordinates (i, j) in row-major order"""
        for i in range(len(self.gamma0_over_gamma)):
            for j in range(len(self.p_values)):
                yield i, j


def point_config(grid: SweepGrid, i: int, j: int) -> SimConfig:
    """SimConfig of grid cell (i, j)

    The Gaussian center and the noise step keep their ratio to the pulse width.
    """
    base = grid.base_config
    base_pulse = base.pulse
    center_ratio = None
    if base_pulse.center_theta is not None:
        center_ratio = base_pulse.center_theta / base_pulse.width_theta
    pulse = PulseSpec.from_ratios(grid.pulse_shape, grid.gamma0_over_gamma[i], grid.p_values[j],
                                  base.params.gamma, center_over_width=center_ratio)
    step = base.noise.step_theta
    if step is not None:
        step = step * pulse.width_theta / base_pulse.width_theta
    noise = dataclasses.replace(base.noise, step_theta=step, seed=point_seed(grid.base_seed, i, j))
    return dataclasses.replace(base, pulse=pulse, noise=noise, store_rhos=False)


@dataclass(frozen=True)
class SweepRecord:
    """Maxima of one grid cell"""

    i: int
    j: int
    gamma0_over_gamma: float
    p: float
    max_pop_0110: float
    max_fidelity: float
    max_negativity: float
    theta_at_max_neg: float
    status: str = STATUS_OK
    error: str = ""

    @property
    def max_negativity_2x(self) -> float:
        """Peak negativity on the doubled scale (Bell state: 1.0)"""
        return 2.0 * self.max_negativity

    @property
    def ok(self) -> bool:
        """True when the cell finished without a numerical failure"""
        return self.status == STATUS_OK

    @classmethod
    def failed(cls, i: int, j: int, gamma0_over_gamma: float, p: float, error: str) -> "SweepRecord":
        """Record for a cell whose evaluation raised

        Args:
            i: Row index
            j: Column index
            gamma0_over_gamma: Row coordinate
            p: Column coordinate
            error: Message stored in the record

        Returns:
            SweepRecord with NaN metrics and status failed
        """
        nan = float("nan")
        return cls(i=i, j=j, gamma0_over_gamma=gamma0_over_gamma, p=p, max_pop_0110=nan,
                   max_fidelity=nan, max_negativity=nan, theta_at_max_neg=nan,
                   status=STATUS_FAILED, error=error)

    def row(self) -> List[str]:
        """CSV row in SWEEP_CSV_COLUMNS order"""
        values = [self.gamma0_over_gamma, self.p, self.max_pop_0110, self.max_fidelity,
                  self.max_negativity, self.max_negativity_2x, self.theta_at_max_neg]
        return [repr(float(v)) for v in values] + [self.status]


def evaluate_point(grid: SweepGrid, i: int, j: int) -> SweepRecord:
    """Run one grid cell; integration failures become a failed record"""
    g0, p = grid.gamma0_over_gamma[i], grid.p_values[j]
    cfg = point_config(grid, i, j)
    try:
        traj = evolve(cfg)
        pop_report = trajectory_maxima(traj, grid.pop_window)
        neg_report = trajectory_maxima(traj, grid.negativity_window)
    except StepUnstable as e:
        err = e.with_coordinates((g0, p))
        logger.warning(f"Grid point failed: {err}")
        return SweepRecord.failed(i, j, g0, p, str(err))
    except EmptyWindow as e:
        logger.warning(f"Grid point ({g0:g}, {p:g}) has an empty window: {e}")
        return SweepRecord.failed(i, j, g0, p, str(e))

    logger.debug(f"Point ({g0:g}, {p:g}): max pop {pop_report.max_pop_0110:.4f}, "
                 f"max N {neg_report.max_negativity:.4f}")
    return SweepRecord(
        i=i, j=j, gamma0_over_gamma=g0, p=p,
        max_pop_0110=pop_report.max_pop_0110,
        max_fidelity=pop_report.max_fidelity,
        max_negativity=neg_report.max_negativity,
        theta_at_max_neg=neg_report.theta_max_negativity,
    )


@dataclass
class SweepResult:
    """Records ordered by (i, j) plus sweep metadata"""

    records: List[SweepRecord]
    pulse_shape: PulseShape
    base_seed: int
    dtheta: float
    theta_max: float

    def __len__(self) -> int:
        return len(self.records)

    @property
    def failed(self) -> List[SweepRecord]:
        """Records whose status is failed"""
        return [r for r in self.records if not r.ok]

    def _ok_records(self) -> List[SweepRecord]:
        ok = [r for r in self.records if r.ok]
        if not ok:
            raise QdpulseError("sweep has no successful grid points")
        return ok

    def column(self, name: str) -> np.ndarray:
        """Values of ``name`` over the successful records"""
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def argmax(self, column: str) -> SweepRecord:
        """Successful record with the largest ``column`` (first in grid order on ties)"""
        ok = self._ok_records()
        values = [getattr(r, column) for r in ok]
        return ok[int(np.argmax(values))]

    def global_max(self, column: str) -> float:
        """Largest value of ``column`` over the successful records

        Raises:
            QdpulseError: if every cell failed
        """
        return float(getattr(self.argmax(column), column))

    def rank_correlation(self, a: str, b: str) -> float:
        """Spearman rank correlation of two columns over successful records"""
        ok = self._ok_records()
        if len(ok) < 3:
            raise QdpulseError("rank correlation needs at least 3 successful grid points")
        rho, _ = spearmanr([getattr(r, a) for r in ok], [getattr(r, b) for r in ok])
        return float(rho)

    @property
    def metadata(self) -> Dict[str, Any]:
        """Shape, seed, step and length of the sweep plus the failed-cell count"""
        return {
            "pulse_shape": self.pulse_shape.value,
            "base_seed": self.base_seed,
            "dtheta": self.dtheta,
            "theta_max": self.theta_max,
            "points": len(self.records),
            "failed": len(self.failed),
        }

    def to_csv(self, path: str) -> None:
        """Write one row per grid point with a header

        Args:
            path: Destination file
        """
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(SWEEP_CSV_COLUMNS)
            writer.writerows(r.row() for r in self.records)
        logger.debug(f"Wrote {len(self.records)} sweep records to {path}")


def run_sweep(grid: SweepGrid, progress: bool = True) -> SweepResult:
    """Evaluate every grid cell and merge the records by coordinate

    Args:
        grid: Sweep definition
        progress: Show a tqdm progress bar

    Returns:
        SweepResult independent of worker count and scheduling order
    """
    grid.validate()
    cells = list(grid.cells())
    workers = min(grid.workers or os.cpu_count() or 1, len(cells))
    logger.info(f"Sweeping {grid.shape[0]}x{grid.shape[1]} {grid.pulse_shape.value} grid "
                f"with {workers} {grid.executor.value} worker(s)")

    records: List[SweepRecord] = []
    desc = f"Sweep ({grid.pulse_shape.value})"

    # Single worker, skip pool overhead
    if workers == 1:
        for i, j in tqdm(cells, desc=desc, unit="pt", disable=not progress):
            records.append(evaluate_point(grid, i, j))
    else:
        pool_type = ProcessPoolExecutor if grid.executor is ExecutorKind.PROCESS else ThreadPoolExecutor
        with pool_type(max_workers=workers) as executor:
            future_to_cell = {
                executor.submit(evaluate_point, grid, i, j): (i, j)
                for i, j in cells
            }
            with tqdm(total=len(cells), desc=desc, unit="pt", disable=not progress) as pbar:
                for future in as_completed(future_to_cell):
                    i, j = future_to_cell[future]
                    try:
                        records.append(future.result())
                    except Exception as e:
                        logger.error(f"Unexpected error at grid point ({i}, {j}): {e}")
                        records.append(SweepRecord.failed(
                            i, j, grid.gamma0_over_gamma[i], grid.p_values[j], str(e)))
                    pbar.update(1)

    records.sort(key=lambda r: (r.i, r.j))
    result = SweepResult(records=records, pulse_shape=grid.pulse_shape, base_seed=grid.base_seed,
                         dtheta=grid.base_config.dtheta, theta_max=grid.base_config.theta_max)
    if result.failed:
        logger.warning(f"{len(result.failed)} of {len(records)} grid point(s) failed")
    return result
