"""Exception types shared across the package."""

from __future__ import annotations


class DocstructError(Exception):
    """Base class for all docstruct errors."""


class MalformedActionError(DocstructError):
    """An action string (or action construction) is outside the action grammar."""


class InvalidTreeError(DocstructError):
    """A logical tree violates a structural invariant."""


class InvalidTransitionError(DocstructError):
    """An action cannot be applied to the current stack/tree state.

    Raised by the engine only when constraint validation was bypassed;
    repaired sequences never trigger it.
    """


class ConstraintViolationError(DocstructError):
    """Strict-mode constraint failure, pointing at the offending action."""

    def __init__(self, index: int, rule: str, message: str = ""):
        self.index = index
        self.rule = rule
        super().__init__(message or f"action {index} violates rule '{rule}'")


class MismatchError(DocstructError):
    """A generated action block does not parse to the expected count.

    ``parsed`` carries the actions recovered before the failure, for
    diagnostics.
    """

    def __init__(self, expected: int, parsed: list, message: str = ""):
        self.expected = expected
        self.parsed = parsed
        super().__init__(
            message or f"expected {expected} actions, recovered {len(parsed)}"
        )


class FormatError(DocstructError):
    """A corpus file is malformed; ``line`` is 1-based."""

    def __init__(self, path: str, line: int, cause: str):
        self.path = path
        self.line = line
        self.cause = cause
        super().__init__(f"{path}:{line}: {cause}")


class PredictorError(DocstructError):
    """A predictor backend failed (transport, timeout, malformed response)."""

    def __init__(
        self,
        message: str,
        *,
        step_index: int | None = None,
        status: int | None = None,
        attempts: int | None = None,
    ):
        self.step_index = step_index
        self.status = status
        self.attempts = attempts
        super().__init__(message)


class CursorExhaustedError(DocstructError):
    """An oracle predictor was asked for actions beyond its gold sequence."""


class LivelockError(DocstructError):
    """A shift-reduce run exceeded its transition budget without consuming input."""


class JoinError(DocstructError):
    """Predicted and gold corpora do not cover the same doc_ids."""

    def __init__(self, missing_pred: list[str], missing_gold: list[str]):
        self.missing_pred = missing_pred
        self.missing_gold = missing_gold
        super().__init__(
            f"doc_ids missing from predictions: {missing_pred!r}; "
            f"missing from gold: {missing_gold!r}"
        )


class EmptyCorpusError(DocstructError):
    """A metric was asked to aggregate over zero documents."""
