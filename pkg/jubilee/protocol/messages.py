"""
Party roles, protocol messages and the wire codec.

A frame is a 4-byte big-endian length followed by UTF-8 JSON:

    {"v": 1, "session": "...", "from": "...", "to": "...", "kind": "...", "body": {...}}

Field elements travel as decimal strings inside ``body``; every body
carries the protocol ``round`` it belongs to.
"""

from __future__ import annotations

import json
import struct
from enum import Enum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from jubilee.errors import MalformedMessageError, ProtocolVersionMismatchError

WIRE_VERSION = 1
HEADER = struct.Struct("!I")
MAX_FRAME = 1 << 20
TRUSTED_PARTY = "trusted-party"


class RoleKind(str, Enum):
    CREDITOR = "creditor"
    DEBTOR = "debtor"
    EVALUATOR = "evaluator"

    def __str__(self) -> str:
        return self.value


class PartyRole(BaseModel):
    """
    A participant: ``creditor-<k>``, ``debtor`` or ``evaluator-<k>``.

    Indices are 1-based in role names.
    """

    model_config = ConfigDict(frozen=True)

    kind: RoleKind
    index: int | None = Field(default=None, ge=1)

    @classmethod
    def parse(cls, name: str) -> PartyRole:
        kind, _, index = name.partition("-")
        try:
            role_kind = RoleKind(kind)
        except ValueError as e:
            raise ValueError(f"unknown role {name!r}") from e
        if role_kind is RoleKind.DEBTOR:
            if index:
                raise ValueError(f"debtor takes no index, got {name!r}")
            return cls(kind=role_kind)
        if not index.isdigit():
            raise ValueError(f"role {name!r} needs a numeric index")
        role = cls(kind=role_kind, index=int(index))
        if role_kind is RoleKind.EVALUATOR and role.index not in (1, 2):
            raise ValueError(f"evaluators are evaluator-1 and evaluator-2, got {name!r}")
        return role

    @classmethod
    def creditor(cls, index: int) -> PartyRole:
        return cls(kind=RoleKind.CREDITOR, index=index)

    @classmethod
    def evaluator(cls, index: int) -> PartyRole:
        return cls(kind=RoleKind.EVALUATOR, index=index)

    @classmethod
    def debtor(cls) -> PartyRole:
        return cls(kind=RoleKind.DEBTOR)

    @property
    def name(self) -> str:
        return self.kind.value if self.index is None else f"{self.kind.value}-{self.index}"

    def __str__(self) -> str:
        return self.name


def session_roles(n: int) -> list[PartyRole]:
    """All roles of a session in canonical order: creditors, evaluators, debtor."""
    return [
        *(PartyRole.creditor(k) for k in range(1, n + 1)),
        PartyRole.evaluator(1),
        PartyRole.evaluator(2),
        PartyRole.debtor(),
    ]


def role_rank(name: str, n: int) -> int:
    """Position of a role name in canonical order; the trusted party sorts last."""
    names = [role.name for role in session_roles(n)]
    return names.index(name) if name in names else len(names)


class MessageKind(str, Enum):
    SHARE = "share"
    MASK = "mask"
    REVEAL = "reveal"
    OUTCOME = "outcome"
    REPORT = "report"

    def __str__(self) -> str:
        return self.value


class Message(BaseModel):
    """One protocol message."""

    model_config = ConfigDict(frozen=True, populate_by_name=True, extra="forbid")

    v: int = Field(default=WIRE_VERSION)
    session: str
    sender: str = Field(alias="from")
    receiver: str = Field(alias="to")
    kind: MessageKind
    body: dict[str, Any]

    @property
    def round(self) -> int:
        return int(self.body["round"])

    def field_values(self) -> list[int]:
        """Decimal-string field elements in ``body["values"]``."""
        try:
            return [int(v) for v in self.body["values"]]
        except (KeyError, TypeError, ValueError) as e:
            raise MalformedMessageError(f"{self.kind} message from {self.sender} has no field values") from e

    def to_wire(self) -> dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True)

    def sort_key(self, n: int) -> tuple[int, int, int]:
        return (self.round, role_rank(self.sender, n), role_rank(self.receiver, n))


def field_body(round_number: int, values: list[int], **extra: Any) -> dict[str, Any]:
    return {"round": round_number, "values": [str(v) for v in values], **extra}


def encode_frame(message: Message) -> bytes:
    raw = json.dumps(message.to_wire(), separators=(",", ":"), sort_keys=True).encode("utf-8")
    return HEADER.pack(len(raw)) + raw


def decode_payload(raw: bytes, session: str | None = None) -> Message:
    """Parse a frame payload (without the length header)."""
    try:
        data = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise MalformedMessageError(f"frame is not UTF-8 JSON: {e}") from e
    if not isinstance(data, dict):
        raise MalformedMessageError("frame payload must be a JSON object")
    if data.get("v") != WIRE_VERSION:
        raise ProtocolVersionMismatchError(f"peer speaks wire version {data.get('v')}, expected {WIRE_VERSION}")
    try:
        message = Message.model_validate(data)
    except ValidationError as e:
        raise MalformedMessageError(f"invalid message: {e}") from e
    if not isinstance(message.body.get("round"), int):
        raise MalformedMessageError(f"{message.kind} message from {message.sender} has no round")
    if session is not None and message.session != session:
        raise MalformedMessageError(f"message for session {message.session!r}, expected {session!r}")
    return message


def decode_frame(frame: bytes, session: str | None = None) -> Message:
    """Parse a complete frame, header included."""
    if len(frame) < HEADER.size:
        raise MalformedMessageError("frame shorter than its header")
    (length,) = HEADER.unpack(frame[: HEADER.size])
    payload = frame[HEADER.size :]
    if length != len(payload):
        raise MalformedMessageError(f"frame declares {length} bytes, carries {len(payload)}")
    return decode_payload(payload, session)
