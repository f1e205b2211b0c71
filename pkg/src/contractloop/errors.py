"""Exception hierarchy shared across the toolchain."""


class ContractLoopError(Exception):
    """Base class for all toolchain errors."""


# --- expression language ---

class ExprSyntaxError(ContractLoopError):
    """Malformed contract expression."""

    def __init__(self, message, offset, expected=()):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.expected = frozenset(expected)


class NormalizationError(ContractLoopError):
    """A source idiom outside the supported rewrite table."""

    def __init__(self, idiom, message=None):
        super().__init__(message or f"unsupported idiom: {idiom}")
        self.idiom = idiom


class ClauseValidationError(ContractLoopError):
    """A clause breaks a structural rule for its kind."""


# --- trace model / store ---

class ValidationError(ContractLoopError):
    """Node payload violates its kind's invariants."""


class DanglingRefError(ContractLoopError):
    """Link endpoint does not resolve in the store."""


class KindMismatchError(ContractLoopError):
    """Link endpoints do not match the edge kind's signature."""


class UnknownNodeError(ContractLoopError):
    """Node id not present in the store."""


# --- contract registry ---

class UnknownTaskError(ContractLoopError):
    pass


class UnknownContractError(ContractLoopError):
    pass


class IllegalTransitionError(ContractLoopError):
    """Review decision not allowed from the record's current status."""


# --- llm gateway ---

class MissingVariableError(ContractLoopError):
    """Prompt template placeholders left unbound."""

    def __init__(self, placeholders):
        super().__init__(f"unbound placeholders: {sorted(placeholders)}")
        self.placeholders = frozenset(placeholders)


class TransportError(ContractLoopError):
    """Provider HTTP failure."""

    def __init__(self, status, body_excerpt=""):
        super().__init__(f"provider returned status {status}: {body_excerpt[:200]}")
        self.status = status
        self.body_excerpt = body_excerpt


class ScriptExhaustedError(ContractLoopError):
    """Mock provider ran out of fixtures for a purpose."""


class NoPayloadError(ContractLoopError):
    """No parseable structured block in the provider response."""


class SchemaError(ContractLoopError):
    """Structured block parses but violates the purpose schema."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


# --- subject harness ---

class LaunchError(ContractLoopError):
    pass


class HandshakeError(ContractLoopError):
    pass


class ProtocolError(ContractLoopError):
    """Malformed subject reply (distinct from the subject reporting an error)."""


class SessionDeadError(ContractLoopError):
    pass


# --- test generation ---

class SaturationError(ContractLoopError):
    """Rejection sampling gave up; preconditions likely unsatisfiable."""

    def __init__(self, clause_id, rejections, message=None):
        super().__init__(
            message
            or f"no admissible input found after {rejections} rejections; "
            f"dominant rejecting clause: {clause_id}"
        )
        self.clause_id = clause_id
        self.rejections = rejections


# --- runtime checking ---

class UnitMismatchError(ContractLoopError):
    pass


class EmptyReportError(ContractLoopError):
    pass


# --- orchestration ---

class PipelineError(ContractLoopError):
    """A phase failed; carries the phase name."""

    def __init__(self, phase, cause):
        super().__init__(f"phase {phase} failed: {cause}")
        self.phase = phase
        self.cause = cause


class ProjectLockedError(ContractLoopError):
    pass
