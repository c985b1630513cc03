"""
Worker context: point-to-point messaging and collectives.

One ``WorkerCtx`` exists per worker. It is the only channel to other
workers and must be used from that worker alone.

Collectives are linear and rooted: contributions travel to the root one
rank at a time and are combined in ascending rank order, so results are
bit-reproducible for fixed inputs and world size.
"""

import queue
import time
from collections import defaultdict, deque
from dataclasses import dataclass
from enum import Enum
from itertools import count
from typing import Deque, Dict, List, Optional, Tuple, Union

import numpy as np
import structlog

from ..exceptions import CollectiveError, DeadlockSuspectedError, InvalidRankError, TransportError
from .codec import Message, Payload, decode_frame, encode_frame

logger = structlog.get_logger(__name__)

# Tags at or above this value belong to collectives and distributed arrays.
RESERVED_TAG_BASE = 1 << 30

BARRIER_ENTER_TAG = RESERVED_TAG_BASE + 1
BARRIER_RELEASE_TAG = RESERVED_TAG_BASE + 2
BROADCAST_TAG = RESERVED_TAG_BASE + 3
REDUCE_TAG = RESERVED_TAG_BASE + 4
GATHER_TAG = RESERVED_TAG_BASE + 5
HALO_TAG_BASE = RESERVED_TAG_BASE + 16

# DArray plumbing: each array owns a block of DARRAY_TAG_STRIDE tags.
DARRAY_TAG_BASE = RESERVED_TAG_BASE + (1 << 20)
DARRAY_TAG_STRIDE = 16
DARRAY_MAX_IDS = ((1 << 32) - DARRAY_TAG_BASE) // DARRAY_TAG_STRIDE


class ReduceOp(str, Enum):
    """Elementwise combination used by ``reduce``."""

    SUM = "sum"
    MIN = "min"
    MAX = "max"

    def combine(self, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        if self is ReduceOp.SUM:
            return left + right
        if self is ReduceOp.MIN:
            return np.minimum(left, right)
        return np.maximum(left, right)


def _encode_shape(shape: Tuple[int, ...]) -> bytes:
    return ",".join(str(extent) for extent in shape).encode()


def _decode_shape(header: bytes) -> Tuple[int, ...]:
    return tuple(int(extent) for extent in header.decode().split(",") if extent)


@dataclass(frozen=True)
class GatherResult:
    """Per-rank arrays concatenated in rank order, with their lengths."""

    values: np.ndarray
    lengths: List[int]


class WorkerCtx:
    """A worker's identity and its handle to the communication fabric."""

    def __init__(self, rank: int, world_size: int, endpoint, timeout_s: float = 60.0):
        if world_size < 1:
            raise InvalidRankError("world_size must be ≥ 1")
        if not 0 <= rank < world_size:
            raise InvalidRankError(f"rank {rank} outside [0, {world_size})")
        self.rank = rank
        self.world_size = world_size
        self.endpoint = endpoint
        self.timeout_s = timeout_s
        self._pending: Dict[Tuple[int, int], Deque[Message]] = defaultdict(deque)
        self._array_ids = count()

    def __repr__(self) -> str:
        return f"WorkerCtx(rank={self.rank}, world_size={self.world_size})"

    @property
    def is_root(self) -> bool:
        return self.rank == 0

    def next_array_id(self) -> int:
        """Ids for distributed arrays; identical across ranks that create arrays in the same order."""

        return next(self._array_ids) % DARRAY_MAX_IDS

    # Point-to-point

    def _check_peer(self, peer: int, role: str) -> None:
        if not 0 <= peer < self.world_size:
            raise InvalidRankError(f"rank {self.rank}: {role} {peer} outside [0, {self.world_size})")
        if peer == self.rank:
            raise InvalidRankError(f"rank {self.rank}: {role} equals own rank (self-messaging is not allowed)")

    def post_reserved(self, dest: int, tag: int, payload: Payload) -> None:
        self._check_peer(dest, "dest")
        self.endpoint.post(dest, encode_frame(self.rank, tag, payload))

    def send(self, dest: int, tag: int, payload: Payload) -> None:
        """Enqueue ``payload`` for ``dest``. The payload is copied before this returns."""

        if not 0 <= tag < RESERVED_TAG_BASE:
            raise TransportError(f"user tags must lie in [0, {RESERVED_TAG_BASE}), got {tag}")
        self.post_reserved(dest, tag, payload)

    def recv_message(self, source: int, tag: int, timeout_s: Optional[float] = None) -> Message:
        """Block until a frame from ``source`` with ``tag`` arrives."""

        self._check_peer(source, "source")
        key = (source, tag)
        if self._pending[key]:
            return self._pending[key].popleft()

        limit = self.timeout_s if timeout_s is None else timeout_s
        deadline = time.monotonic() + limit
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise self._deadlock(source, tag, limit)
            try:
                frame = self.endpoint.fetch(remaining)
            except queue.Empty:
                raise self._deadlock(source, tag, limit) from None

            message = decode_frame(frame)
            if (message.source, message.tag) == key:
                return message
            self._pending[(message.source, message.tag)].append(message)

    def recv(self, source: int, tag: int, timeout_s: Optional[float] = None) -> Union[bytes, np.ndarray]:
        """Payload of the next matching message: ``bytes`` or a 2-D array."""

        return self.recv_message(source, tag, timeout_s).data

    def _deadlock(self, source: int, tag: int, limit: float) -> DeadlockSuspectedError:
        logger.error("receive timed out", rank=self.rank, source=source, tag=tag, timeout_s=limit)
        return DeadlockSuspectedError(self.rank, source, tag, limit)

    # Collectives

    def _check_root(self, root: int) -> None:
        if not 0 <= root < self.world_size:
            raise InvalidRankError(f"root {root} outside [0, {self.world_size})")

    def barrier(self) -> None:
        """Return only after every rank has entered."""

        if self.world_size == 1:
            return
        if self.rank == 0:
            for peer in range(1, self.world_size):
                self.recv_message(peer, BARRIER_ENTER_TAG)
            for peer in range(1, self.world_size):
                self.post_reserved(peer, BARRIER_RELEASE_TAG, b"")
        else:
            self.post_reserved(0, BARRIER_ENTER_TAG, b"")
            self.recv_message(0, BARRIER_RELEASE_TAG)

    def broadcast(self, root: int, payload: Optional[Payload] = None) -> Union[bytes, np.ndarray]:
        """Every rank returns the root's payload (numeric payloads as 2-D arrays)."""

        self._check_root(root)
        if self.rank != root:
            return self.recv(root, BROADCAST_TAG)

        frame = encode_frame(self.rank, BROADCAST_TAG, payload)
        for peer in range(self.world_size):
            if peer != root:
                self.endpoint.post(peer, frame)
        return decode_frame(frame).data

    def reduce(self, root: int, op: Union[ReduceOp, str], value) -> Optional[np.ndarray]:
        """Elementwise combination over ranks at ``root``; ``None`` elsewhere.

        Contributions are folded left to right in ascending rank order.
        """

        self._check_root(root)
        op = ReduceOp(op)
        own = np.array(value, dtype=np.float64)
        if self.rank != root:
            # The wire flattens shapes to 2-D; the true shape travels first.
            self.post_reserved(root, REDUCE_TAG, _encode_shape(own.shape))
            self.post_reserved(root, REDUCE_TAG, own)
            return None

        combined: Optional[np.ndarray] = None
        for peer in range(self.world_size):
            if peer == root:
                contribution = own
            else:
                shape = _decode_shape(self.recv(peer, REDUCE_TAG))
                values = self.recv(peer, REDUCE_TAG)
                if shape != own.shape:
                    raise CollectiveError(
                        f"reduce: rank {peer} contributed shape {shape}, root expects {own.shape}",
                        offending_rank=peer,
                    )
                contribution = values.reshape(shape)
            combined = contribution.copy() if combined is None else op.combine(combined, contribution)
        return np.asarray(combined).reshape(own.shape)

    def gather(self, root: int, value) -> Optional[GatherResult]:
        """Concatenate per-rank arrays at ``root`` in rank order; ``None`` elsewhere."""

        self._check_root(root)
        own = np.array(value, dtype=np.float64).reshape(-1)
        if self.rank != root:
            self.post_reserved(root, GATHER_TAG, own)
            return None

        parts = []
        for peer in range(self.world_size):
            parts.append(own if peer == root else self.recv_message(peer, GATHER_TAG).vector())
        return GatherResult(values=np.concatenate(parts), lengths=[len(part) for part in parts])
