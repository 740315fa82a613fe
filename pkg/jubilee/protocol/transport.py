"""
Message transports for protocol parties.

Every party owns one transport. ``send`` delivers a message to its
receiver's inbox; ``receive`` blocks until the message for a given
(round, sender, kind) has arrived, in whatever order the round's
messages came in.
"""

from __future__ import annotations

import logging
import socket
import threading
import time
from abc import ABC, abstractmethod

from jubilee.errors import MalformedMessageError, PartyConnectionError, PartyTimeoutError, ProtocolError
from jubilee.protocol.messages import HEADER, MAX_FRAME, Message, MessageKind, decode_frame, decode_payload, encode_frame

logger = logging.getLogger(__name__)

CONNECT_RETRY_S = 0.05

InboxKey = tuple[int, str, MessageKind]


class Inbox:
    """Buffer of received messages, at most one per (round, sender, kind)."""

    def __init__(self, owner: str) -> None:
        self.owner = owner
        self._messages: dict[InboxKey, Message] = {}
        self._failure: ProtocolError | None = None
        self._ready = threading.Condition()

    def put(self, message: Message) -> None:
        if message.receiver != self.owner:
            raise MalformedMessageError(f"{self.owner} received a message addressed to {message.receiver}")
        key = (message.round, message.sender, message.kind)
        with self._ready:
            if key in self._messages:
                raise MalformedMessageError(
                    f"duplicate {message.kind} message from {message.sender} in round {message.round}"
                )
            self._messages[key] = message
            self._ready.notify_all()

    def fail(self, error: ProtocolError) -> None:
        """Wake every waiter with ``error``."""
        with self._ready:
            if self._failure is None:
                self._failure = error
            self._ready.notify_all()

    def take(self, round_number: int, sender: str, kind: MessageKind, timeout: float) -> Message:
        key = (round_number, sender, kind)
        deadline = time.monotonic() + timeout
        with self._ready:
            while key not in self._messages:
                if self._failure is not None:
                    raise self._failure
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    raise PartyTimeoutError(
                        f"{self.owner} timed out after {timeout:g}s waiting for {kind} from {sender} "
                        f"in round {round_number}"
                    )
                self._ready.wait(remaining)
            return self._messages.pop(key)


class Transport(ABC):
    """Point-to-point channel endpoint of one party."""

    def __init__(self, owner: str, session: str, timeout: float) -> None:
        self.owner = owner
        self.session = session
        self.timeout = timeout
        self.inbox = Inbox(owner)

    @abstractmethod
    def send(self, message: Message) -> None:
        """Deliver ``message`` to its receiver."""

    def receive(self, round_number: int, sender: str, kind: MessageKind) -> Message:
        return self.inbox.take(round_number, sender, kind, self.timeout)

    def start(self) -> None:  # noqa: B027
        """Open listeners; a no-op for in-process transports."""

    def close(self) -> None:  # noqa: B027
        """Release sockets and threads."""

    def __enter__(self) -> Transport:
        self.start()
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()


class LocalNetwork:
    """
    In-process network joining every party of one session.

    Messages still pass through the frame codec, so in-process runs
    exercise the same bytes as TCP ones.
    """

    def __init__(self, session: str, timeout: float = 10.0) -> None:
        self.session = session
        self.timeout = timeout
        self._endpoints: dict[str, LocalTransport] = {}

    def endpoint(self, owner: str) -> LocalTransport:
        if owner not in self._endpoints:
            self._endpoints[owner] = LocalTransport(self, owner)
        return self._endpoints[owner]

    def deliver(self, frame: bytes) -> None:
        message = decode_frame(frame, self.session)
        target = self._endpoints.get(message.receiver)
        if target is None:
            raise PartyConnectionError(f"no party {message.receiver} on the local network")
        target.inbox.put(message)


class LocalTransport(Transport):
    def __init__(self, network: LocalNetwork, owner: str) -> None:
        super().__init__(owner, network.session, network.timeout)
        self._network = network

    def send(self, message: Message) -> None:
        self._network.deliver(encode_frame(message))


def _recv_exact(conn: socket.socket, size: int) -> bytes | None:
    buf = b""
    while len(buf) < size:
        chunk = conn.recv(size - len(buf))
        if not chunk:
            return None
        buf += chunk
    return buf


def read_frame(conn: socket.socket, session: str | None = None) -> Message | None:
    """Read one frame; None when the peer closed the connection cleanly."""
    header = _recv_exact(conn, HEADER.size)
    if header is None:
        return None
    (length,) = HEADER.unpack(header)
    if length > MAX_FRAME:
        raise MalformedMessageError(f"frame of {length} bytes exceeds the {MAX_FRAME}-byte limit")
    payload = _recv_exact(conn, length)
    if payload is None:
        raise MalformedMessageError("connection closed mid-frame")
    return decode_payload(payload, session)


def parse_endpoint(value: str) -> tuple[str, int]:
    host, _, port = value.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"endpoint must be host:port, got {value!r}")
    return host, int(port)


class TcpTransport(Transport):
    """
    Loopback or LAN transport: one listening socket per party and one
    persistent outgoing connection per peer.

    Outgoing connections are retried until the round timeout so parties
    may start in any order.
    """

    def __init__(self, owner: str, session: str, endpoints: dict[str, str], timeout: float) -> None:
        super().__init__(owner, session, timeout)
        if owner not in endpoints:
            raise PartyConnectionError(f"no endpoint configured for {owner}")
        self.endpoints = {role: parse_endpoint(value) for role, value in endpoints.items()}
        self._listener: socket.socket | None = None
        self._outgoing: dict[str, socket.socket] = {}
        self._incoming: list[socket.socket] = []
        self._threads: list[threading.Thread] = []
        self._closed = threading.Event()
        self._lock = threading.Lock()

    def start(self) -> None:
        host, port = self.endpoints[self.owner]
        listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            listener.bind((host, port))
        except OSError as e:
            listener.close()
            raise PartyConnectionError(f"{self.owner} cannot listen on {host}:{port}: {e}") from e
        listener.listen()
        listener.settimeout(0.2)
        self._listener = listener
        self._spawn(self._accept_loop, f"{self.owner}-accept")
        logger.debug("%s listening on %s:%d", self.owner, host, port)

    def _spawn(self, target: object, name: str, *args: object) -> None:
        thread = threading.Thread(target=target, args=args, name=name, daemon=True)  # type: ignore[arg-type]
        thread.start()
        self._threads.append(thread)

    def _accept_loop(self) -> None:
        assert self._listener is not None
        while not self._closed.is_set():
            try:
                conn, _ = self._listener.accept()
            except TimeoutError:
                continue
            except OSError:
                return
            conn.settimeout(None)
            with self._lock:
                self._incoming.append(conn)
            self._spawn(self._read_loop, f"{self.owner}-reader", conn)

    def _read_loop(self, conn: socket.socket) -> None:
        while not self._closed.is_set():
            try:
                message = read_frame(conn, self.session)
            except ProtocolError as e:
                logger.error("%s: %s", self.owner, e)
                self.inbox.fail(e)
                return
            except OSError:
                return
            if message is None:
                return
            try:
                self.inbox.put(message)
            except ProtocolError as e:
                self.inbox.fail(e)
                return

    def _connect(self, receiver: str) -> socket.socket:
        if receiver not in self.endpoints:
            raise PartyConnectionError(f"no endpoint configured for {receiver}")
        address = self.endpoints[receiver]
        deadline = time.monotonic() + self.timeout
        last_error: OSError | None = None
        while time.monotonic() < deadline and not self._closed.is_set():
            try:
                return socket.create_connection(address, timeout=self.timeout)
            except OSError as e:
                last_error = e
                time.sleep(CONNECT_RETRY_S)
        raise PartyConnectionError(
            f"{self.owner} could not reach {receiver} at {address[0]}:{address[1]}: {last_error}"
        )

    def send(self, message: Message) -> None:
        receiver = message.receiver
        with self._lock:
            conn = self._outgoing.get(receiver)
        if conn is None:
            conn = self._connect(receiver)
            with self._lock:
                self._outgoing[receiver] = conn
        try:
            conn.sendall(encode_frame(message))
        except OSError as e:
            raise PartyConnectionError(f"{self.owner} lost connection to {receiver}: {e}") from e

    def close(self) -> None:
        self._closed.set()
        with self._lock:
            sockets = [*self._outgoing.values(), *self._incoming]
            self._outgoing.clear()
            self._incoming.clear()
        for conn in sockets:
            try:
                conn.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            conn.close()
        if self._listener is not None:
            self._listener.close()
            self._listener = None
        for thread in self._threads:
            thread.join(timeout=1.0)
