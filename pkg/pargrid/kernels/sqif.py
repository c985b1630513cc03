"""
Flux sweep over a chain of coupled phase units.

Stand-in dynamics for unit i (overdamped, nearest-neighbour coupled)::

    dphi_i/dt = J - beta_n * sin(phi_i + 2*pi*xe*(1 + var_size*s_i))
                + M * (phi_{i-1} - 2*phi_i + phi_{i+1})

s_i in [-1, 1] is a fixed per-unit spread derived from (seed, i). The
chain ends are reflective (the missing neighbour equals the unit itself).
Each sweep point integrates from phi = 0 with fixed-step RK4 for
ceil(tmax/dt) steps, discards the first half as transient, and reports the
time-averaged dphi/dt over units: the point's mean voltage.

Two decompositions produce the same curve:

- task parallel: flux points split across ranks, every rank integrates
  all units for its points;
- data parallel: units split across ranks, every rank integrates its
  slice for every point, exchanging one-element halos before each RK
  stage.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Tuple

import numpy as np
import structlog

from ..distribution.dist_map import BlockRange, DistMap, active_neighbors, block_partition, local_range
from ..exceptions import DistributionError, DivergenceError
from ..models.configs import SqifParams, TransferCurve
from ..transport.context import HALO_TAG_BASE, WorkerCtx
from .batch import mix64, unit_interval

logger = structlog.get_logger(__name__)

# Halo traffic: values travelling to the right neighbour / to the left neighbour.
HALO_RIGHTWARD_TAG = HALO_TAG_BASE
HALO_LEFTWARD_TAG = HALO_TAG_BASE + 1

SPREAD_STREAM = 0x5151F5E7D

HaloExchange = Callable[[np.ndarray], Tuple[float, float]]


@dataclass(frozen=True)
class SliceVoltage:
    """Time-averaged dphi/dt summed over a slice of units."""

    total: float
    units: int

    @property
    def mean(self) -> float:
        return self.total / self.units if self.units else 0.0


@lru_cache(maxsize=64)
def _spread(seed: int, start: int, length: int) -> np.ndarray:
    values = [
        2.0 * unit_interval(mix64((seed ^ mix64(SPREAD_STREAM + index)) & ((1 << 64) - 1))) - 1.0
        for index in range(start, start + length)
    ]
    spread = np.array(values, dtype=np.float64)
    spread.setflags(write=False)
    return spread


def unit_spread(seed: int, units: BlockRange) -> np.ndarray:
    """Per-unit spread s_i in [-1, 1] for the global unit indices of ``units``."""

    return _spread(seed, units.start, units.len)


def sqif_rhs(
    phi_ext: np.ndarray,
    p: SqifParams,
    unit_offset: int,
    xe_point: float,
    spread: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Derivative of a slice given its halo-padded state ``[left, phi..., right]``.

    ``unit_offset`` is the global index of the slice's first unit.
    """

    phi_ext = np.asarray(phi_ext, dtype=np.float64)
    phi = phi_ext[1:-1]
    if spread is None:
        spread = unit_spread(p.seed, BlockRange(start=unit_offset, len=len(phi)))

    flux_phase = 2.0 * math.pi * xe_point * (1.0 + p.var_size * spread)
    coupling = phi_ext[:-2] - 2.0 * phi + phi_ext[2:]
    return p.J - p.beta_n * np.sin(phi + flux_phase) + p.M * coupling


def _reflective_halos(state: np.ndarray) -> Tuple[float, float]:
    return state[0], state[-1]


def series_sqif(
    xe_point: float,
    p: SqifParams,
    owned_range: Optional[BlockRange] = None,
    halo_exchange: Optional[HaloExchange] = None,
) -> SliceVoltage:
    """Integrate one flux point over ``owned_range`` (default: every unit).

    ``halo_exchange(state)`` must return the (left, right) neighbour values
    of the slice, handling the chain ends itself; it is required when the
    slice is a proper subset of the chain.
    """

    owned_range = owned_range or BlockRange(start=0, len=p.Nsquid)
    if owned_range.stop > p.Nsquid:
        raise DistributionError(f"units {owned_range.start}..{owned_range.stop} exceed Nsquid={p.Nsquid}")
    if owned_range.len == 0:
        return SliceVoltage(total=0.0, units=0)

    if halo_exchange is None:
        if owned_range.len != p.Nsquid:
            raise DistributionError("a partial slice needs a halo exchange")
        halo_exchange = _reflective_halos

    spread = unit_spread(p.seed, owned_range)
    dt = p.dt
    n_steps = p.n_steps
    first_kept = n_steps // 2
    padded = np.empty(owned_range.len + 2)

    def rate(state: np.ndarray) -> np.ndarray:
        padded[0], padded[-1] = halo_exchange(state)
        padded[1:-1] = state
        return sqif_rhs(padded, p, owned_range.start, xe_point, spread)

    phi = np.zeros(owned_range.len)
    accumulated = np.zeros(owned_range.len)
    for step in range(n_steps):
        k1 = rate(phi)
        k2 = rate(phi + 0.5 * dt * k1)
        k3 = rate(phi + 0.5 * dt * k2)
        k4 = rate(phi + dt * k3)
        velocity = (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        phi = phi + dt * velocity
        if not np.all(np.isfinite(phi)):
            raise DivergenceError(step, xe_point)
        if step >= first_kept:
            accumulated += velocity

    retained = n_steps - first_kept
    return SliceVoltage(total=float(np.sum(accumulated)) / retained, units=owned_range.len)


def sqif_sweep_serial(p: SqifParams) -> TransferCurve:
    voltages = [series_sqif(xe_point, p).mean for xe_point in p.xe]
    return TransferCurve(xe=list(p.xe), v=voltages)


def sqif_sweep_tp(ctx: WorkerCtx, p: SqifParams) -> Optional[TransferCurve]:
    """Flux points split across ranks; the curve is returned on rank 0."""

    mine = block_partition(len(p.xe), ctx.world_size)[ctx.rank]
    logger.debug("sqif task slice", rank=ctx.rank, start=mine.start, count=mine.len)

    voltages = [series_sqif(p.xe[i], p).mean for i in range(mine.start, mine.stop)]
    gathered = ctx.gather(0, voltages)
    if gathered is None:
        return None
    return TransferCurve(xe=list(p.xe), v=gathered.values.tolist())


def make_halo_exchange(ctx: WorkerCtx, unit_map: DistMap, n_units: int) -> HaloExchange:
    """Nearest-neighbour exchange between the ranks owning adjacent non-empty slices."""

    left_rank, right_rank = active_neighbors(unit_map, n_units, ctx.rank)

    def exchange(state: np.ndarray) -> Tuple[float, float]:
        if left_rank is not None:
            ctx.post_reserved(left_rank, HALO_LEFTWARD_TAG, state[:1])
        if right_rank is not None:
            ctx.post_reserved(right_rank, HALO_RIGHTWARD_TAG, state[-1:])
        left = state[0] if left_rank is None else ctx.recv(left_rank, HALO_RIGHTWARD_TAG)[0, 0]
        right = state[-1] if right_rank is None else ctx.recv(right_rank, HALO_LEFTWARD_TAG)[0, 0]
        return left, right

    return exchange


def sqif_sweep_dp(ctx: WorkerCtx, p: SqifParams) -> Optional[TransferCurve]:
    """Units split across ranks; per-point slice totals are summed at rank 0."""

    unit_map = DistMap.for_world(ctx.world_size)
    mine = local_range(unit_map, p.Nsquid, ctx.rank)
    exchange = make_halo_exchange(ctx, unit_map, p.Nsquid)
    logger.debug("sqif data slice", rank=ctx.rank, start=mine.start, count=mine.len)

    totals = np.array([series_sqif(xe_point, p, mine, exchange).total for xe_point in p.xe])
    combined = ctx.reduce(0, "sum", totals)
    if combined is None:
        return None
    return TransferCurve(xe=list(p.xe), v=(combined / p.Nsquid).tolist())
