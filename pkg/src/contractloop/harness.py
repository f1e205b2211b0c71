"""Subprocess execution harness for subjects under contract.

Wire protocol: newline-delimited JSON over the subject's stdin/stdout.
The subject prints one handshake line on startup:

    {"protocol_version": 1, "units": ["Account.new", ...]}

then answers one request per line:

    -> {"call_id": "...", "unit": "Account.new", "args": {...}}
    <- {"call_id": "...", "status": "returned", "result": ..., "post_state": {...}}
    <- {"call_id": "...", "status": "raised", "error": {"kind": "...", "message": "..."}}

Decimals ride as JSON numbers except NaN and the infinities, which are the
sentinel texts "NaN", "Infinity", "-Infinity"; the declared semantic type
of each parameter/field disambiguates them from ordinary text.
"""

from __future__ import annotations

import json
import math
import queue
import subprocess
import sys
import threading
import time
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from .errors import HandshakeError, LaunchError, ProtocolError, SessionDeadError
from .ids import new_id

PROTOCOL_VERSION = 1
DEFAULT_DEADLINE = 5.0

SEMANTIC_TYPES = ("int", "decimal", "text", "bool")

_FLOAT_SENTINELS = {"NaN": float("nan"), "Infinity": float("inf"), "-Infinity": float("-inf")}


@dataclass(frozen=True)
class UnitSignature:
    unit_name: str
    unit_kind: str  # "constructor" | "method"
    params: Tuple[Tuple[str, str], ...]  # (name, semantic type)
    observable_fields: Tuple[Tuple[str, str], ...]

    def __post_init__(self):
        names = [n for n, _ in self.params]
        if len(names) != len(set(names)):
            raise ValueError(f"duplicate parameter names in {self.unit_name}")
        fields = [n for n, _ in self.observable_fields]
        if len(fields) != len(set(fields)):
            raise ValueError(f"duplicate observable fields in {self.unit_name}")


@dataclass(frozen=True)
class SubjectDescriptor:
    subject_id: str
    launch_command: Tuple[str, ...]
    units: Tuple[UnitSignature, ...]
    variant_tag: Optional[str] = None

    def __post_init__(self):
        names = [u.unit_name for u in self.units]
        if len(names) != len(set(names)):
            raise ValueError("duplicate unit names in subject")

    def unit(self, unit_name):
        for signature in self.units:
            if signature.unit_name == unit_name:
                return signature
        return None


@dataclass(frozen=True)
class Returned:
    result: object
    post_state: Dict[str, object]


@dataclass(frozen=True)
class Raised:
    error_kind: str
    message: str = ""

    def __post_init__(self):
        if not self.error_kind:
            raise ValueError("Raised requires a non-empty error_kind")


@dataclass(frozen=True)
class CallRecord:
    call_id: str
    unit_name: str
    args: Dict[str, object]
    pre_state: Dict[str, object]
    outcome: object  # Returned | Raised
    duration_ms: float


def wire_encode(value, semantic_type):
    if semantic_type == "decimal" and isinstance(value, (int, float)) and not isinstance(value, bool):
        value = float(value)
        if math.isnan(value):
            return "NaN"
        if math.isinf(value):
            return "Infinity" if value > 0 else "-Infinity"
        return value
    return value


def wire_decode(value, semantic_type):
    if semantic_type == "decimal":
        if isinstance(value, str) and value in _FLOAT_SENTINELS:
            return _FLOAT_SENTINELS[value]
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
    return value


def _type_compatible(value, semantic_type):
    if value is None:
        return semantic_type == "text"  # null only makes sense for reference-ish values
    if semantic_type == "int":
        return isinstance(value, int) and not isinstance(value, bool)
    if semantic_type == "decimal":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if semantic_type == "text":
        return isinstance(value, str)
    if semantic_type == "bool":
        return isinstance(value, bool)
    return False


class Session:
    """One live subject subprocess; one in-flight call at a time."""

    def __init__(self, descriptor, process, deadline=DEFAULT_DEADLINE):
        self.descriptor = descriptor
        self.process = process
        self.deadline = deadline
        self.dead = False
        self._lock = threading.Lock()
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def _read_loop(self):
        try:
            for line in self.process.stdout:
                self._lines.put(line)
        finally:
            self._lines.put(None)  # EOF marker

    def _next_line(self, timeout):
        try:
            line = self._lines.get(timeout=timeout)
        except queue.Empty:
            raise TimeoutError
        if line is None:
            raise EOFError
        return line

    def handshake(self, timeout=10.0):
        try:
            raw = self._next_line(timeout)
        except (TimeoutError, EOFError):
            raise HandshakeError("subject produced no handshake line") from None
        try:
            message = json.loads(raw)
        except ValueError:
            raise HandshakeError(f"handshake is not JSON: {raw!r}") from None
        if message.get("protocol_version") != PROTOCOL_VERSION:
            raise HandshakeError(
                f"protocol version mismatch: subject speaks "
                f"{message.get('protocol_version')!r}, harness speaks {PROTOCOL_VERSION}"
            )
        advertised = set(message.get("units", []))
        expected = {u.unit_name for u in self.descriptor.units}
        if advertised != expected:
            missing = sorted(expected - advertised)
            extra = sorted(advertised - expected)
            raise HandshakeError(
                f"unit list mismatch: missing {missing}, unexpected {extra}"
            )

    def call(self, unit_name: str, args: Dict[str, object]) -> CallRecord:
        signature = self.descriptor.unit(unit_name)
        if signature is None:
            raise ValueError(f"unit {unit_name} is not part of this subject")
        declared = dict(signature.params)
        if set(args) != set(declared):
            raise ValueError(
                f"args must bind exactly {sorted(declared)}, got {sorted(args)}"
            )
        for name, value in args.items():
            if not _type_compatible(value, declared[name]):
                raise ValueError(
                    f"argument {name} is not compatible with type {declared[name]}: {value!r}"
                )
        with self._lock:
            if self.dead or self.process.poll() is not None:
                self.dead = True
                raise SessionDeadError("subject process is gone")
            call_id = new_id("call")
            request = {
                "call_id": call_id,
                "unit": unit_name,
                "args": {n: wire_encode(v, declared[n]) for n, v in args.items()},
            }
            started = time.monotonic()
            try:
                self.process.stdin.write(json.dumps(request) + "\n")
                self.process.stdin.flush()
            except (BrokenPipeError, OSError):
                self.dead = True
                raise SessionDeadError("subject stdin closed") from None
            try:
                raw = self._next_line(self.deadline)
            except TimeoutError:
                self._kill()
                return CallRecord(
                    call_id,
                    unit_name,
                    dict(args),
                    {},
                    Raised("timeout", f"no reply within {self.deadline}s"),
                    (time.monotonic() - started) * 1000,
                )
            except EOFError:
                self.dead = True
                raise SessionDeadError("subject exited mid-call") from None
            duration_ms = (time.monotonic() - started) * 1000
        return self._decode_reply(raw, call_id, unit_name, args, signature, duration_ms)

    def _decode_reply(self, raw, call_id, unit_name, args, signature, duration_ms):
        try:
            reply = json.loads(raw)
        except ValueError:
            raise ProtocolError(f"subject reply is not JSON: {raw!r}") from None
        if not isinstance(reply, dict) or reply.get("call_id") != call_id:
            raise ProtocolError(f"reply call_id mismatch: {raw!r}")
        status = reply.get("status")
        if status == "returned":
            raw_state = reply.get("post_state")
            if not isinstance(raw_state, dict):
                raise ProtocolError("returned reply lacks a post_state object")
            field_types = dict(signature.observable_fields)
            missing = set(field_types) - set(raw_state)
            if missing:
                raise ProtocolError(f"post_state missing declared fields: {sorted(missing)}")
            post_state = {
                name: wire_decode(raw_state[name], field_types[name]) for name in field_types
            }
            pre_state = {}
            raw_pre = reply.get("pre_state")
            if isinstance(raw_pre, dict):
                pre_state = {
                    name: wire_decode(value, field_types.get(name, "text"))
                    for name, value in raw_pre.items()
                }
            outcome = Returned(reply.get("result"), post_state)
            return CallRecord(call_id, unit_name, dict(args), pre_state, outcome, duration_ms)
        if status == "raised":
            error = reply.get("error")
            if not isinstance(error, dict) or not error.get("kind"):
                raise ProtocolError(f"raised reply lacks error.kind: {raw!r}")
            outcome = Raised(error["kind"], error.get("message", ""))
            return CallRecord(call_id, unit_name, dict(args), {}, outcome, duration_ms)
        raise ProtocolError(f"unknown reply status: {status!r}")

    def _kill(self):
        self.dead = True
        try:
            self.process.kill()
        except OSError:
            pass

    def close(self):
        with self._lock:
            self.dead = True
            try:
                self.process.stdin.close()
            except OSError:
                pass
            try:
                self.process.wait(timeout=2)
            except subprocess.TimeoutExpired:
                self._kill()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def spawn(descriptor: SubjectDescriptor, deadline: float = DEFAULT_DEADLINE) -> Session:
    try:
        process = subprocess.Popen(
            list(descriptor.launch_command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            text=True,
            bufsize=1,
        )
    except OSError as error:
        raise LaunchError(f"cannot launch {descriptor.launch_command}: {error}") from error
    session = Session(descriptor, process, deadline)
    try:
        session.handshake()
    except HandshakeError:
        session.close()
        raise
    return session


ACCOUNT_CTOR_SIGNATURE = UnitSignature(
    unit_name="Account.new",
    unit_kind="constructor",
    params=(("accountNumber", "text"), ("pin", "int"), ("balance", "decimal")),
    observable_fields=(("accountNumber", "text"), ("pin", "int"), ("balance", "decimal")),
)


def reference_subject(variant: str) -> SubjectDescriptor:
    """Bundled ATM-style Account constructor subject.

    fixed: rejects empty/null account numbers, pins outside [0, 9999], and
    negative/NaN/infinite balances. buggy: stores everything verbatim.
    """
    if variant not in ("buggy", "fixed"):
        raise ValueError(f"variant must be buggy or fixed, got {variant!r}")
    return SubjectDescriptor(
        subject_id=f"reference-account-{variant}",
        launch_command=(
            sys.executable,
            "-m",
            "contractloop.reference_subject",
            "--variant",
            variant,
        ),
        units=(ACCOUNT_CTOR_SIGNATURE,),
        variant_tag=variant,
    )


def descriptor_to_record(descriptor: SubjectDescriptor) -> dict:
    return {
        "subject_id": descriptor.subject_id,
        "launch_command": list(descriptor.launch_command),
        "variant_tag": descriptor.variant_tag,
        "units": [
            {
                "unit_name": u.unit_name,
                "unit_kind": u.unit_kind,
                "params": [list(p) for p in u.params],
                "observable_fields": [list(f) for f in u.observable_fields],
            }
            for u in descriptor.units
        ],
    }


def descriptor_from_record(record: dict) -> SubjectDescriptor:
    if "reference_variant" in record:
        return reference_subject(record["reference_variant"])
    return SubjectDescriptor(
        subject_id=record["subject_id"],
        launch_command=tuple(record["launch_command"]),
        variant_tag=record.get("variant_tag"),
        units=tuple(
            UnitSignature(
                unit_name=u["unit_name"],
                unit_kind=u["unit_kind"],
                params=tuple((n, t) for n, t in u["params"]),
                observable_fields=tuple((n, t) for n, t in u["observable_fields"]),
            )
            for u in record["units"]
        ),
    )
