"""
Launch-time communication fabrics.

A backend is created by the launching process before any worker starts.
Each worker then opens its own endpoint, which offers two operations:
``post(dest, frame)`` (never blocks on the receiver) and
``fetch(timeout)`` (next frame addressed to this rank, raising
``queue.Empty`` on timeout). Frames are opaque bytes produced by
:mod:`pargrid.transport.codec`.
"""

import queue
import socket
import threading
from typing import Any, Dict, List, Tuple

import structlog

from ..exceptions import LaunchError, TransportError
from .codec import read_frame

logger = structlog.get_logger(__name__)

Address = Tuple[str, int]


class InprocEndpoint:
    """Endpoint over one multiprocessing queue per rank."""

    def __init__(self, rank: int, inboxes: List[Any]):
        self.rank = rank
        self._inboxes = inboxes

    def post(self, dest: int, frame: bytes) -> None:
        self._inboxes[dest].put(frame)

    def fetch(self, timeout: float) -> bytes:
        return self._inboxes[self.rank].get(timeout=timeout)

    def close(self) -> None:
        # Queue feeder threads flush pending frames when the worker exits.
        pass


class InprocBackend:
    """Workers on one host exchanging frames through process queues."""

    name = "inproc"

    def __init__(self, world_size: int, mp_context):
        self.world_size = world_size
        self._inboxes = [mp_context.Queue() for _ in range(world_size)]

    def endpoint_args(self, rank: int):
        return InprocEndpoint, (rank, self._inboxes)

    def after_start(self) -> None:
        pass

    def close(self) -> None:
        for inbox in self._inboxes:
            inbox.cancel_join_thread()
            inbox.close()


class SocketEndpoint:
    """Endpoint over loopback TCP, one connection per (source, dest) pair.

    A single connection per ordered pair keeps frames of one channel in
    send order. Inbound connections are drained by reader threads into a
    local queue.
    """

    ACCEPT_POLL_S = 0.2

    def __init__(self, rank: int, listener: socket.socket, addresses: List[Address]):
        self.rank = rank
        self._listener = listener
        self._addresses = addresses
        self._inbox: "queue.Queue[bytes]" = queue.Queue()
        self._outgoing: Dict[int, socket.socket] = {}
        self._closed = threading.Event()

        self._listener.settimeout(self.ACCEPT_POLL_S)
        self._acceptor = threading.Thread(
            target=self._accept_loop, name=f"pargrid-accept-{rank}", daemon=True
        )
        self._acceptor.start()

    def _accept_loop(self) -> None:
        while not self._closed.is_set():
            try:
                conn, _ = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            conn.settimeout(None)
            threading.Thread(
                target=self._read_loop, args=(conn,), name=f"pargrid-read-{self.rank}", daemon=True
            ).start()

    def _read_loop(self, conn: socket.socket) -> None:
        with conn, conn.makefile("rb") as stream:
            while True:
                try:
                    frame = read_frame(stream)
                except (OSError, TransportError) as e:
                    if not self._closed.is_set():
                        logger.error("socket read failed", rank=self.rank, error=str(e))
                    return
                if frame is None:
                    return
                self._inbox.put(frame)

    def _connection(self, dest: int) -> socket.socket:
        conn = self._outgoing.get(dest)
        if conn is None:
            try:
                conn = socket.create_connection(self._addresses[dest])
            except OSError as e:
                raise TransportError(f"rank {self.rank}: cannot connect to rank {dest} at {self._addresses[dest]}: {e}") from e
            conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            self._outgoing[dest] = conn
        return conn

    def post(self, dest: int, frame: bytes) -> None:
        self._connection(dest).sendall(frame)

    def fetch(self, timeout: float) -> bytes:
        return self._inbox.get(timeout=timeout)

    def close(self) -> None:
        self._closed.set()
        for conn in self._outgoing.values():
            try:
                conn.shutdown(socket.SHUT_WR)
            except OSError:
                pass
            conn.close()
        self._outgoing.clear()
        self._listener.close()


class SocketBackend:
    """Workers reachable at explicit loopback addresses.

    Listening sockets are bound by the launcher so every address is known
    before the first worker starts.
    """

    name = "socket"

    def __init__(self, world_size: int, host: str = "127.0.0.1"):
        self.world_size = world_size
        self._listeners: List[socket.socket] = []
        try:
            for rank in range(world_size):
                listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
                try:
                    listener.bind((host, 0))
                    listener.listen(max(world_size, 1))
                except OSError as e:
                    listener.close()
                    raise LaunchError(f"cannot bind socket on {host}: {e}", rank=rank) from e
                self._listeners.append(listener)
        except LaunchError:
            self.close()
            raise
        self.addresses: List[Address] = [listener.getsockname()[:2] for listener in self._listeners]
        logger.debug("socket backend bound", addresses=self.addresses)

    def endpoint_args(self, rank: int):
        return SocketEndpoint, (rank, self._listeners[rank], self.addresses)

    def after_start(self) -> None:
        # Workers own their listeners now.
        self.close()

    def close(self) -> None:
        for listener in self._listeners:
            listener.close()
        self._listeners = []


def create_backend(name: str, world_size: int, mp_context, host: str = "127.0.0.1"):
    if name == "inproc":
        return InprocBackend(world_size, mp_context)
    if name == "socket":
        return SocketBackend(world_size, host=host)
    raise LaunchError(f"unknown backend {name!r} (expected 'inproc' or 'socket')")
