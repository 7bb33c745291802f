"""Three-party XOR computation protocols with fully recorded transcripts.

Party 1 (Alice) holds x, party 2 (Bob) holds y, party 3 (Charlie) must
output x xor y. Each run returns the decoded output together with a
transcript of every message in schedule order; message payloads are always
computed from the sending party's own inputs, its private randomness, and
the messages it has already received, so a transcript can be replayed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from random import Random

from .codes import LinearCode
from .errors import ConfigurationError, ContractViolation
from .gf2 import Gf2Vector, random_vector
from .source import DsbsParams, sample_pair

__all__ = [
    "PartyId",
    "Message",
    "Transcript",
    "RunOutcome",
    "PROTOCOL_IDS",
    "run_secure_km",
    "run_plain_km",
    "run_zero_error_otp",
    "run_with_sampling",
    "output_from_transcript",
    "key_length",
    "nominal_rates",
    "format_transcript",
    "parse_transcript",
]

PROTOCOL_IDS = ("secure-km", "plain-km", "zero-error-otp")


class PartyId(IntEnum):
    ALICE = 1
    BOB = 2
    CHARLIE = 3


@dataclass(frozen=True, slots=True)
class Message:
    round: int
    sender: PartyId
    receiver: PartyId
    payload: Gf2Vector
    declared_length: int = -1

    def __post_init__(self):
        if self.declared_length == -1:
            object.__setattr__(self, "declared_length", self.payload.n)
        elif self.declared_length != self.payload.n:
            raise ContractViolation(
                f"declared length {self.declared_length} != payload length {self.payload.n}"
            )
        if self.sender == self.receiver:
            raise ContractViolation("a party cannot message itself")


@dataclass(frozen=True)
class Transcript:
    messages: tuple[Message, ...]
    randomness_used: dict[PartyId, Gf2Vector] = field(default_factory=dict)

    def link_messages(self, a: PartyId, b: PartyId) -> tuple[Message, ...]:
        pair = {a, b}
        return tuple(m for m in self.messages if {m.sender, m.receiver} == pair)

    def link_length(self, a: PartyId, b: PartyId) -> int:
        return sum(m.declared_length for m in self.link_messages(a, b))

    def link_payload(self, a: PartyId, b: PartyId) -> Gf2Vector:
        """Payload bits of one link concatenated in schedule order."""
        out = Gf2Vector.zeros(0)
        for m in self.link_messages(a, b):
            out = out.concat(m.payload)
        return out

    @property
    def l12(self) -> int:
        return self.link_length(PartyId.ALICE, PartyId.BOB)

    @property
    def l13(self) -> int:
        return self.link_length(PartyId.ALICE, PartyId.CHARLIE)

    @property
    def l23(self) -> int:
        return self.link_length(PartyId.BOB, PartyId.CHARLIE)

    def randomness_bits(self, party: PartyId) -> int:
        v = self.randomness_used.get(party)
        return 0 if v is None else v.n


@dataclass(frozen=True)
class RunOutcome:
    z_hat: Gf2Vector
    transcript: Transcript
    correct: bool


def key_length(protocol_id: str, n: int, m: int | None) -> int:
    """Private random bits the protocol consumes for one run."""
    if protocol_id == "secure-km":
        if m is None:
            raise ConfigurationError("secure-km needs a code")
        return m
    if protocol_id == "zero-error-otp":
        return n
    if protocol_id == "plain-km":
        return 0
    raise ConfigurationError(f"unknown protocol id: {protocol_id!r}")


def nominal_rates(protocol_id: str, n: int, m: int | None) -> tuple[float, float, float, float]:
    """(r13, r23, r12, rho) fixed by the schedule and randomness accounting."""
    if protocol_id == "secure-km":
        if m is None:
            raise ConfigurationError("secure-km needs a code")
        return (m / n, m / n, m / n, m / n)
    if protocol_id == "plain-km":
        if m is None:
            raise ConfigurationError("plain-km needs a code")
        return (m / n, m / n, 0.0, 0.0)
    if protocol_id == "zero-error-otp":
        return (1.0, 1.0, 1.0, 1.0)
    raise ConfigurationError(f"unknown protocol id: {protocol_id!r}")


def output_from_transcript(protocol_id: str, transcript: Transcript, code: LinearCode | None = None) -> Gf2Vector:
    """Charlie's output computed from the messages on his two links alone."""
    m13 = transcript.link_payload(PartyId.ALICE, PartyId.CHARLIE)
    m23 = transcript.link_payload(PartyId.BOB, PartyId.CHARLIE)
    if protocol_id == "zero-error-otp":
        return m13 ^ m23
    if protocol_id in ("secure-km", "plain-km"):
        if code is None:
            raise ConfigurationError(f"{protocol_id} needs a code to decode")
        return code.decode(m13 ^ m23)
    raise ConfigurationError(f"unknown protocol id: {protocol_id!r}")


def run_secure_km(code: LinearCode, x: Gf2Vector, y: Gf2Vector, k: Gf2Vector) -> RunOutcome:
    """Masked syndrome scheme: both syndromes travel one-time-padded with k."""
    if x.n != code.n or y.n != code.n:
        raise ContractViolation(f"inputs must have length {code.n}, got {x.n} and {y.n}")
    if k.n != code.m:
        raise ContractViolation(f"mask must have length {code.m}, got {k.n}")
    m12 = Message(1, PartyId.ALICE, PartyId.BOB, k)
    m13 = Message(1, PartyId.ALICE, PartyId.CHARLIE, k ^ code.syndrome(x))
    # Bob masks with the bits he received, not with Alice's local variable.
    m23 = Message(2, PartyId.BOB, PartyId.CHARLIE, m12.payload ^ code.syndrome(y))
    transcript = Transcript((m12, m13, m23), {PartyId.ALICE: k})
    z_hat = output_from_transcript("secure-km", transcript, code)
    return RunOutcome(z_hat, transcript, z_hat == x ^ y)


def run_plain_km(code: LinearCode, x: Gf2Vector, y: Gf2Vector) -> RunOutcome:
    """Unmasked syndrome scheme; the 1-2 link stays silent."""
    if x.n != code.n or y.n != code.n:
        raise ContractViolation(f"inputs must have length {code.n}, got {x.n} and {y.n}")
    m13 = Message(1, PartyId.ALICE, PartyId.CHARLIE, code.syndrome(x))
    m23 = Message(1, PartyId.BOB, PartyId.CHARLIE, code.syndrome(y))
    transcript = Transcript((m13, m23))
    z_hat = output_from_transcript("plain-km", transcript, code)
    return RunOutcome(z_hat, transcript, z_hat == x ^ y)


def run_zero_error_otp(x: Gf2Vector, y: Gf2Vector, k: Gf2Vector) -> RunOutcome:
    """Uncoded one-time-pad scheme; exact for every input pair."""
    if y.n != x.n or k.n != x.n:
        raise ContractViolation(f"inputs and pad must share one length, got {x.n}, {y.n}, {k.n}")
    m12 = Message(1, PartyId.ALICE, PartyId.BOB, k)
    m13 = Message(1, PartyId.ALICE, PartyId.CHARLIE, k ^ x)
    m23 = Message(2, PartyId.BOB, PartyId.CHARLIE, m12.payload ^ y)
    transcript = Transcript((m12, m13, m23), {PartyId.ALICE: k})
    z_hat = output_from_transcript("zero-error-otp", transcript)
    return RunOutcome(z_hat, transcript, z_hat == x ^ y)


def run_with_sampling(
    protocol_id: str,
    params: DsbsParams,
    code: LinearCode | None = None,
    rng: Random | None = None,
) -> RunOutcome:
    """Sample (x, y) and any private randomness, then run the named protocol."""
    if protocol_id not in PROTOCOL_IDS:
        raise ConfigurationError(f"unknown protocol id: {protocol_id!r}")
    if rng is None:
        raise ContractViolation("an explicit rng is required")
    if protocol_id in ("secure-km", "plain-km"):
        if code is None:
            raise ConfigurationError(f"{protocol_id} needs a code")
        if code.n != params.n:
            raise ContractViolation(f"code length {code.n} != source length {params.n}")
    x, y = sample_pair(params, rng)
    if protocol_id == "secure-km":
        return run_secure_km(code, x, y, random_vector(code.m, rng))
    if protocol_id == "plain-km":
        return run_plain_km(code, x, y)
    return run_zero_error_otp(x, y, random_vector(params.n, rng))


def format_transcript(transcript: Transcript) -> str:
    """One line per message: round,from,to,length,payload-bits."""
    return "\n".join(
        f"{m.round},{int(m.sender)},{int(m.receiver)},{m.declared_length},{m.payload.to_string()}"
        for m in transcript.messages
    )


def parse_transcript(text: str) -> tuple[Message, ...]:
    messages = []
    for line in text.splitlines():
        if not line.strip():
            continue
        rnd, snd, rcv, length, payload = line.split(",")
        vec = Gf2Vector.from_string(payload)
        if vec.n != int(length):
            raise ContractViolation(f"length field {length} != payload length {vec.n}")
        messages.append(Message(int(rnd), PartyId(int(snd)), PartyId(int(rcv)), vec))
    return tuple(messages)
