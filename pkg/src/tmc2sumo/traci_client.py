"""Minimal TraCI protocol client.

Implements just the command subset the validation workflow needs: version
handshake, simulation stepping, last-step vehicle-id retrieval per edge, and
session close. Wire format per the published protocol: length-prefixed
messages in network byte order, commands with ubyte (or 0-escaped int32)
length headers, strings as int32 length plus UTF-8 bytes.
"""

from __future__ import annotations

import socket
import struct
from dataclasses import dataclass

from .errors import TraciCommandError, TraciConnectionError, TraciProtocolError

CMD_GETVERSION = 0x00
CMD_SIMSTEP = 0x02
CMD_GET_EDGE_VARIABLE = 0xAA
RESPONSE_GET_EDGE_VARIABLE = 0xBA
CMD_CLOSE = 0x7F

VAR_LAST_STEP_VEHICLE_IDS = 0x12
TYPE_STRINGLIST = 0x0E

STATUS_OK = 0x00


def _pack_command(command: int, content: bytes) -> bytes:
    length = 2 + len(content)
    if length <= 255:
        return struct.pack("!BB", length, command) + content
    return struct.pack("!BiB", 0, length + 4, command) + content


def _pack_string(value: str) -> bytes:
    raw = value.encode("utf-8")
    return struct.pack("!i", len(raw)) + raw


class _Reader:
    """Sequential reader over one response message payload."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def remaining(self) -> int:
        return len(self.data) - self.pos

    def take(self, n: int) -> bytes:
        if self.remaining() < n:
            raise TraciProtocolError(
                f"truncated message: wanted {n} bytes, {self.remaining()} left"
            )
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def ubyte(self) -> int:
        return self.take(1)[0]

    def int32(self) -> int:
        return struct.unpack("!i", self.take(4))[0]

    def double(self) -> float:
        return struct.unpack("!d", self.take(8))[0]

    def string(self) -> str:
        n = self.int32()
        if n < 0:
            raise TraciProtocolError(f"negative string length {n}")
        return self.take(n).decode("utf-8")

    def command_header(self) -> tuple[int, int]:
        """Returns (command id, content length in bytes)."""
        length = self.ubyte()
        if length == 0:
            length = self.int32()
            header = 6
        else:
            header = 2
        command = self.ubyte()
        content = length - header
        if content < 0:
            raise TraciProtocolError(f"command 0x{command:02x} with negative content length")
        return command, content


@dataclass
class TraciVersion:
    api_version: int
    software_version: str


class TraciClient:
    """One synchronous request/response session with a TraCI server."""

    def __init__(self, host: str, port: int, timeout: float = 30.0):
        try:
            self._sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as exc:
            raise TraciConnectionError(f"cannot connect to {host}:{port}: {exc}") from exc
        self._closed = False

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()

    def _recv_exact(self, n: int) -> bytes:
        chunks = []
        got = 0
        while got < n:
            try:
                chunk = self._sock.recv(n - got)
            except OSError as exc:
                raise TraciProtocolError(f"socket error mid-message: {exc}") from exc
            if not chunk:
                raise TraciProtocolError("server closed the connection mid-message")
            chunks.append(chunk)
            got += len(chunk)
        return b"".join(chunks)

    def _exchange(self, command: int, content: bytes) -> _Reader:
        """Send one command, read one message, check its status command."""
        payload = _pack_command(command, content)
        message = struct.pack("!i", len(payload) + 4) + payload
        try:
            self._sock.sendall(message)
        except OSError as exc:
            raise TraciProtocolError(f"send failed: {exc}") from exc

        total = struct.unpack("!i", self._recv_exact(4))[0]
        if total < 4:
            raise TraciProtocolError(f"nonsense message length {total}")
        reader = _Reader(self._recv_exact(total - 4))

        status_cmd, content_len = reader.command_header()
        if status_cmd != command:
            raise TraciProtocolError(
                f"status for 0x{status_cmd:02x} while awaiting 0x{command:02x}"
            )
        result = reader.ubyte()
        description = reader.string()
        if result != STATUS_OK:
            raise TraciCommandError(command, description or f"status {result}")
        return reader

    def get_version(self) -> TraciVersion:
        reader = self._exchange(CMD_GETVERSION, b"")
        cmd, _ = reader.command_header()
        if cmd != CMD_GETVERSION:
            raise TraciProtocolError(f"unexpected version response command 0x{cmd:02x}")
        return TraciVersion(api_version=reader.int32(), software_version=reader.string())

    def simulation_step(self) -> None:
        """Advance the simulation by one step."""
        reader = self._exchange(CMD_SIMSTEP, struct.pack("!d", 0.0))
        # Remainder is the subscription-result block; nothing subscribed here.
        if reader.remaining() >= 4:
            count = reader.int32()
            for _ in range(count):
                _, content = reader.command_header()
                reader.take(content)

    def edge_vehicle_ids(self, edge_id: str) -> list[str]:
        """Vehicle ids present on an edge during the last simulation step."""
        content = struct.pack("!B", VAR_LAST_STEP_VEHICLE_IDS) + _pack_string(edge_id)
        reader = self._exchange(CMD_GET_EDGE_VARIABLE, content)
        cmd, _ = reader.command_header()
        if cmd != RESPONSE_GET_EDGE_VARIABLE:
            raise TraciProtocolError(f"unexpected edge response command 0x{cmd:02x}")
        variable = reader.ubyte()
        returned_edge = reader.string()
        value_type = reader.ubyte()
        if variable != VAR_LAST_STEP_VEHICLE_IDS or returned_edge != edge_id:
            raise TraciProtocolError("edge response does not match the request")
        if value_type != TYPE_STRINGLIST:
            raise TraciProtocolError(f"unexpected value type 0x{value_type:02x}")
        return [reader.string() for _ in range(reader.int32())]

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        try:
            self._exchange(CMD_CLOSE, b"")
        except (TraciProtocolError, TraciCommandError):
            pass
        finally:
            self._sock.close()


def traci_collect(
    host: str, port: int, edge_ids: list[str], steps: int, timeout: float = 30.0
) -> dict[str, set[str]]:
    """Step a live simulation and collect vehicle ids seen on monitored edges.

    After each of ``steps`` advances, every monitored edge's last-step vehicle
    ids are read; the per-edge union over all steps is returned and the
    session is closed cleanly. Zero steps collects nothing.
    """
    per_edge: dict[str, set[str]] = {edge: set() for edge in edge_ids}
    with TraciClient(host, port, timeout=timeout) as client:
        client.get_version()
        for _ in range(steps):
            client.simulation_step()
            for edge in edge_ids:
                per_edge[edge].update(client.edge_vehicle_ids(edge))
    return per_edge
