# Transport Package

from .codec import ElemKind, Message, decode_frame, encode_frame
from .context import RESERVED_TAG_BASE, GatherResult, ReduceOp, WorkerCtx
from .launcher import launch

__all__ = [
    "ElemKind",
    "GatherResult",
    "Message",
    "RESERVED_TAG_BASE",
    "ReduceOp",
    "WorkerCtx",
    "decode_frame",
    "encode_frame",
    "launch",
]
