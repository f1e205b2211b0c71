"""Provider abstraction for the four LLM touchpoints: intent decomposition,
contract generation, code generation, and repair.

Two providers ship with the package: an HTTP provider speaking the common
chat-completions wire format, and a scripted mock that replays fixture files
so the whole pipeline runs offline and deterministically.
"""

from __future__ import annotations

import json
import re
import string
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from .errors import (
    MissingVariableError,
    NoPayloadError,
    NormalizationError,
    SchemaError,
    ScriptExhaustedError,
    TransportError,
)
from .lang import normalize

PURPOSES = ("decompose_intent", "generate_contracts", "generate_code", "repair_code")

# correctness-critical purposes run cold; exploratory ones get a little heat
DEFAULT_TEMPERATURE = {
    "decompose_intent": 0.2,
    "generate_contracts": 0.0,
    "generate_code": 0.2,
    "repair_code": 0.0,
}

DEFAULT_MAX_OUTPUT_TOKENS = 4096

CLAUSE_KINDS = ("precondition", "postcondition", "invariant")
UNIT_KINDS = ("constructor", "method", "module")

_TEMPLATES = {
    "decompose_intent": (
        "You are planning an implementation.\n"
        "User intent:\n${intent}\n\n"
        "Break the intent into an ordered list of small, independently testable "
        "implementation tasks.\n"
        "Respond with a JSON object: {\"tasks\": [{\"title\": ..., "
        "\"description\": ..., \"unit_kind\": \"constructor\"|\"method\"|\"module\"}]}\n"
    ),
    "generate_contracts": (
        "You are writing formal contracts for one implementation task.\n"
        "Task: ${task_title}\n"
        "Unit signature: ${signature}\n\n"
        "Produce preconditions, postconditions, and invariants that fully "
        "constrain the unit's observable behavior.\n"
        "Respond with a JSON object: {\"clauses\": [{\"kind\": "
        "\"precondition\"|\"postcondition\"|\"invariant\", \"element\": ..., "
        "\"contract_text\": ...}]}\n"
    ),
    "generate_code": (
        "You are implementing one task under explicit contracts.\n"
        "Task: ${task_title}\n"
        "Unit signature: ${signature}\n\n"
        "The implementation must satisfy every contract below.\n"
        "```contracts\n${contracts_block}\n```\n\n"
        "Respond with a JSON object: {\"artifact\": {\"descriptor\": <subject "
        "descriptor>, \"source\": <source text>}}\n"
    ),
    "repair_code": (
        "Your previous implementation of this task violated its contracts.\n"
        "Task: ${task_title}\n\n"
        "The contracts in force:\n"
        "```contracts\n${contracts_block}\n```\n\n"
        "Observed violations:\n${violation_report}\n\n"
        "Produce a corrected implementation that satisfies every contract.\n"
        "Respond with a JSON object: {\"artifact\": {\"descriptor\": <subject "
        "descriptor>, \"source\": <source text>}}\n"
    ),
}

_FORMAT_REMINDER = (
    "\n\nReminder: respond with exactly one JSON object matching the requested "
    "schema, optionally inside a fenced code block, with no other JSON in the reply."
)


@dataclass(frozen=True)
class PromptRequest:
    purpose: str
    variables: Dict[str, str] = field(default_factory=dict)
    temperature: Optional[float] = None
    max_output_tokens: int = DEFAULT_MAX_OUTPUT_TOKENS
    template_id: Optional[str] = None

    def __post_init__(self):
        if self.purpose not in PURPOSES:
            raise ValueError(f"unknown purpose: {self.purpose}")
        if self.temperature is not None and not 0.0 <= self.temperature <= 1.0:
            raise ValueError(f"temperature out of range: {self.temperature}")
        if self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be positive")

    @property
    def effective_temperature(self):
        if self.temperature is None:
            return DEFAULT_TEMPERATURE[self.purpose]
        return self.temperature

    @property
    def effective_template_id(self):
        return self.template_id or self.purpose


@dataclass(frozen=True)
class ProviderResponse:
    raw_text: Optional[str]
    finish_reason: str  # complete | truncated | provider_error
    usage: Optional[Dict[str, int]] = None

    def __post_init__(self):
        if (self.raw_text is None) != (self.finish_reason == "provider_error"):
            raise ValueError("raw_text must be present iff the provider succeeded")


def template_placeholders(template_id: str) -> frozenset:
    template = _TEMPLATES[template_id]
    return frozenset(
        name for _, name, _, _ in string.Template.pattern.findall(template) if name
    ) | frozenset(
        braced for _, _, braced, _ in string.Template.pattern.findall(template) if braced
    )


def render_prompt(request: PromptRequest) -> str:
    """Deterministic prompt text; raises MissingVariableError when any
    template placeholder is unbound."""
    template_id = request.effective_template_id
    if template_id not in _TEMPLATES:
        raise ValueError(f"unknown template: {template_id}")
    needed = template_placeholders(template_id)
    missing = needed - set(request.variables)
    if missing:
        raise MissingVariableError(missing)
    if template_id == "repair_code" and not request.variables["violation_report"].strip():
        raise MissingVariableError({"violation_report"})
    return string.Template(_TEMPLATES[template_id]).substitute(request.variables)


def contracts_block(clauses) -> str:
    """The verbatim clause listing embedded in codegen and repair prompts."""
    lines = []
    for clause in clauses:
        lines.append(f"{clause.kind.value} [{clause.element}]: {clause.normalized_text}")
    return "\n".join(lines)


class MockScriptProvider:
    """Replays fixture files named `NN-<purpose>.txt` from a directory,
    in numeric order, independently per purpose. Deterministic and offline."""

    def __init__(self, script_dir):
        self.script_dir = Path(script_dir)
        self._lock = threading.Lock()
        self._scripts: Dict[str, List[str]] = {purpose: [] for purpose in PURPOSES}
        self._cursors: Dict[str, int] = {purpose: 0 for purpose in PURPOSES}
        pattern = re.compile(r"^(\d+)-(\w+)\.txt$")
        entries = []
        for path in sorted(self.script_dir.iterdir()):
            match = pattern.match(path.name)
            if not match:
                continue
            number, purpose = int(match.group(1)), match.group(2)
            if purpose not in PURPOSES:
                raise ValueError(f"fixture {path.name}: unknown purpose {purpose}")
            entries.append((number, purpose, path))
        for number, purpose, path in sorted(entries):
            self._scripts[purpose].append(path.read_text())

    def complete(self, request: PromptRequest, prompt: str) -> ProviderResponse:
        with self._lock:
            cursor = self._cursors[request.purpose]
            script = self._scripts[request.purpose]
            if cursor >= len(script):
                raise ScriptExhaustedError(
                    f"mock script for {request.purpose} exhausted after {cursor} calls"
                )
            self._cursors[request.purpose] += 1
            return ProviderResponse(raw_text=script[cursor], finish_reason="complete")


class HttpProvider:
    """Chat-completions-style HTTPS provider."""

    def __init__(self, base_url, api_key, model, timeout=60.0):
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.model = model
        self.timeout = timeout

    def complete(self, request: PromptRequest, prompt: str) -> ProviderResponse:
        import requests

        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": request.effective_temperature,
            "max_tokens": request.max_output_tokens,
        }
        try:
            response = requests.post(
                f"{self.base_url}/chat/completions",
                json=body,
                headers={"Authorization": f"Bearer {self.api_key}"},
                timeout=self.timeout,
            )
        except requests.Timeout as error:
            raise TimeoutError(f"provider timed out after {self.timeout}s") from error
        except requests.RequestException as error:
            raise TransportError(0, str(error)) from error
        if response.status_code >= 400:
            raise TransportError(response.status_code, response.text[:500])
        document = response.json()
        choice = document["choices"][0]
        return ProviderResponse(
            raw_text=choice["message"]["content"],
            finish_reason="truncated" if choice.get("finish_reason") == "length" else "complete",
            usage=document.get("usage"),
        )


# --- structured payload extraction ---

@dataclass(frozen=True)
class TaskList:
    tasks: tuple  # of {"title", "description", "unit_kind"}


@dataclass(frozen=True)
class ClauseList:
    clauses: tuple  # of {"kind", "element", "contract_text"} (normalized)


@dataclass(frozen=True)
class CodeArtifact:
    descriptor: dict
    source: str


_FENCE = re.compile(r"```[a-zA-Z]*\n(.*?)```", re.DOTALL)


def _candidate_blocks(raw_text: str):
    for match in _FENCE.finditer(raw_text):
        yield match.group(1)
    # bare JSON objects: scan balanced braces from each opening brace
    decoder = json.JSONDecoder()
    index = 0
    while True:
        start = raw_text.find("{", index)
        if start == -1:
            return
        try:
            _, end = decoder.raw_decode(raw_text[start:])
            yield raw_text[start:start + end]
            index = start + end
        except ValueError:
            index = start + 1


def _validate_task_list(document) -> TaskList:
    tasks = document.get("tasks")
    if not isinstance(tasks, list) or not tasks:
        raise SchemaError("tasks", "must be a non-empty list")
    for index, task in enumerate(tasks):
        if not isinstance(task, dict):
            raise SchemaError(f"tasks[{index}]", "must be an object")
        for key in ("title", "description", "unit_kind"):
            if not isinstance(task.get(key), str) or not task[key]:
                raise SchemaError(f"tasks[{index}].{key}", "must be a non-empty string")
        if task["unit_kind"] not in UNIT_KINDS:
            raise SchemaError(
                f"tasks[{index}].unit_kind", f"must be one of {UNIT_KINDS}"
            )
    return TaskList(tuple({k: t[k] for k in ("title", "description", "unit_kind")}
                          for t in tasks))


def _validate_clause_list(document) -> ClauseList:
    clauses = document.get("clauses")
    if not isinstance(clauses, list) or not clauses:
        raise SchemaError("clauses", "must be a non-empty list")
    out = []
    for index, clause in enumerate(clauses):
        if not isinstance(clause, dict):
            raise SchemaError(f"clauses[{index}]", "must be an object")
        kind = clause.get("kind")
        if kind not in CLAUSE_KINDS:
            raise SchemaError(f"clauses[{index}].kind", f"must be one of {CLAUSE_KINDS}")
        element = clause.get("element")
        if not isinstance(element, str) or not element:
            raise SchemaError(f"clauses[{index}].element", "must be a non-empty string")
        text = clause.get("contract_text")
        if not isinstance(text, str) or not text.strip():
            raise SchemaError(f"clauses[{index}].contract_text", "must be non-empty")
        try:
            normalized = normalize(text, dialect="java_like")
        except NormalizationError as error:
            raise NormalizationError(
                error.idiom, f"clauses[{index}]: {error}"
            ) from error
        out.append({"kind": kind, "element": element, "contract_text": normalized})
    return ClauseList(tuple(out))


def _validate_code_artifact(document) -> CodeArtifact:
    artifact = document.get("artifact")
    if not isinstance(artifact, dict):
        raise SchemaError("artifact", "must be an object")
    descriptor = artifact.get("descriptor")
    if not isinstance(descriptor, dict) or not descriptor:
        raise SchemaError("artifact.descriptor", "must be a non-empty object")
    source = artifact.get("source")
    if not isinstance(source, str):
        raise SchemaError("artifact.source", "must be a string")
    return CodeArtifact(descriptor=descriptor, source=source)


_VALIDATORS = {
    "decompose_intent": _validate_task_list,
    "generate_contracts": _validate_clause_list,
    "generate_code": _validate_code_artifact,
    "repair_code": _validate_code_artifact,
}


def extract_payload(purpose: str, raw_text: str):
    """First well-formed structured block in raw_text, validated against the
    purpose's schema. Prose around the block is tolerated; a parseable block
    that violates the schema is a SchemaError, never silently skipped."""
    if purpose not in PURPOSES:
        raise ValueError(f"unknown purpose: {purpose}")
    validator = _VALIDATORS[purpose]
    found_block = False
    for block in _candidate_blocks(raw_text):
        try:
            document = json.loads(block)
        except ValueError:
            continue
        if not isinstance(document, dict):
            continue
        found_block = True
        return validator(document)
    if found_block:  # pragma: no cover - validator either returns or raises
        raise NoPayloadError("structured block rejected")
    raise NoPayloadError("no parseable structured block in response")


def serialize_payload(payload) -> str:
    """Canonical text form of a payload; extract_payload round-trips it."""
    if isinstance(payload, TaskList):
        return json.dumps({"tasks": list(payload.tasks)}, indent=2)
    if isinstance(payload, ClauseList):
        return json.dumps({"clauses": list(payload.clauses)}, indent=2)
    if isinstance(payload, CodeArtifact):
        return json.dumps(
            {"artifact": {"descriptor": payload.descriptor, "source": payload.source}},
            indent=2,
        )
    raise TypeError(f"not a payload: {payload!r}")


def complete_structured(provider, request: PromptRequest):
    """render -> complete -> extract, with one automatic re-ask carrying a
    format reminder when extraction fails, then the error surfaces."""
    prompt = render_prompt(request)
    response = provider.complete(request, prompt)
    try:
        return extract_payload(request.purpose, response.raw_text)
    except (NoPayloadError, SchemaError):
        retry_response = provider.complete(request, prompt + _FORMAT_REMINDER)
        return extract_payload(request.purpose, retry_response.raw_text)
