"""Action predictors: the pluggable contract plus three implementations.

Predictors see exactly what a generative model would see, a rendered prompt,
and return raw continuation text. Parsing and constraint enforcement happen
downstream in the engine, so a real model server can be swapped in without
touching anything upstream.
"""

from __future__ import annotations

import os
import re
import time
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

import requests

from .errors import CursorExhaustedError, PredictorError
from .model import CONCATENATION, NEW_PARAGRAPH, Action
from .prompts import format_action_block, parse_prompt_sections

# Covers the sentence-final marks of both English and Chinese corpora.
TERMINAL_PUNCTUATION = frozenset({".", "!", "?", ":", ";", "。", "！", "？"})


@dataclass(frozen=True)
class ConstraintHints:
    """Decoding hints a masking-capable backend may honor."""

    first_tokens: frozenset[str]
    profile: str


@dataclass(frozen=True)
class PredictionRequest:
    prompt: str
    expected_actions: int
    constraint_hints: ConstraintHints | None = None

    def __post_init__(self) -> None:
        if self.expected_actions < 1:
            raise ValueError("expected_actions must be >= 1")


@dataclass(frozen=True)
class PredictionResponse:
    """Raw generated text after the action header; may be malformed."""

    action_lines: str
    latency_ms: float = 0.0


class ActionPredictor(Protocol):
    def predict(self, request: PredictionRequest) -> PredictionResponse: ...


class OraclePredictor:
    """Replays a gold action sequence, slicing it to each request's window.

    ``commit_window`` is how many of the returned actions the engine will
    commit per step (the output action window); the cursor advances by that
    amount per call. Leave it unset in one-pass mode, where every returned
    action is committed.
    """

    def __init__(self, gold_actions: Sequence[Action], commit_window: int | None = None):
        if commit_window is not None and commit_window < 1:
            raise ValueError("commit_window must be >= 1")
        self._gold = list(gold_actions)
        self._commit_window = commit_window
        self._cursor = 0

    def predict(self, request: PredictionRequest) -> PredictionResponse:
        start = time.perf_counter()
        end = self._cursor + request.expected_actions
        if end > len(self._gold):
            raise CursorExhaustedError(
                f"gold sequence has {len(self._gold)} actions; "
                f"requested {self._cursor}..{end}"
            )
        text = format_action_block(self._gold[self._cursor : end])
        self._cursor += self._commit_window or request.expected_actions
        return PredictionResponse(text, (time.perf_counter() - start) * 1000.0)


def _dotted_depth(match: re.Match) -> int:
    return match.group(0).rstrip(". ").count(".") + 1


# (pattern, depth function); a depth of None means "deepest legal level".
DEFAULT_NUMBERING_PATTERNS: tuple[tuple[re.Pattern, Callable[[re.Match], int | None]], ...] = (
    (re.compile(r"^(?:chapter|part)\s+\d+\b", re.IGNORECASE), lambda m: 1),
    (re.compile(r"^\d+(?:\.\d+)*\.?(?=\s|$)"), _dotted_depth),
    (re.compile(r"^\(\d+\)(?=\s|$)"), lambda m: None),
)


class HeuristicPredictor:
    """Deterministic rule-based predictor; a pure function of the prompt text.

    Per segment, in order: a numbering pattern opens a heading at the
    pattern's depth (clamped to one past the current maximum level); an
    unfinished paragraph above it continues via concatenation; everything
    else starts a new paragraph.
    """

    def __init__(self, patterns=DEFAULT_NUMBERING_PATTERNS):
        self._patterns = tuple(patterns)

    def _numbering_depth(self, text: str) -> tuple[bool, int | None]:
        for pattern, depth_fn in self._patterns:
            match = pattern.match(text)
            if match:
                return True, depth_fn(match)
        return False, None

    def predict(self, request: PredictionRequest) -> PredictionResponse:
        start = time.perf_counter()
        stack_lines, segment_lines = parse_prompt_sections(request.prompt)

        max_level = 0
        prev_kind: str | None = None
        prev_text = ""
        for line in stack_lines:
            symbol, _, text = line.partition(" ")
            if symbol and set(symbol) == {"+"}:
                max_level = len(symbol)
                prev_kind, prev_text = "heading", text
            else:
                prev_kind, prev_text = "paragraph", text

        actions: list[Action] = []
        for text in segment_lines:
            matched, depth = self._numbering_depth(text)
            if matched:
                level = max_level + 1 if depth is None else min(depth, max_level + 1)
                level = max(level, 1)
                actions.append(Action.heading(level))
                max_level = level
                prev_kind, prev_text = "heading", text
            elif (
                prev_kind == "paragraph"
                and prev_text
                and prev_text[-1] not in TERMINAL_PUNCTUATION
            ):
                actions.append(CONCATENATION)
                prev_text = text
            else:
                actions.append(NEW_PARAGRAPH)
                prev_kind, prev_text = "paragraph", text

        text_out = format_action_block(actions)
        return PredictionResponse(text_out, (time.perf_counter() - start) * 1000.0)


class RemotePredictor:
    """Client for a text-generation HTTP endpoint.

    POSTs ``{"prompt", "max_new_tokens", "stop"}`` and expects ``{"text"}``
    back. Transport failures and 5xx responses are retried with exponential
    backoff; the response text is forwarded unparsed for the engine to
    validate.
    """

    def __init__(
        self,
        base_url: str,
        *,
        timeout_s: float = 30.0,
        max_attempts: int = 3,
        max_new_tokens_per_action: int = 8,
        backoff_s: float = 0.25,
        session: requests.Session | None = None,
    ):
        if max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        self._base_url = base_url
        self._timeout_s = timeout_s
        self._max_attempts = max_attempts
        self._per_action = max_new_tokens_per_action
        self._backoff_s = backoff_s
        self._session = session or requests.Session()
        token = os.environ.get("DOCSTRUCT_REMOTE_TOKEN")
        self._headers = {"Authorization": f"Bearer {token}"} if token else {}

    def predict(self, request: PredictionRequest) -> PredictionResponse:
        payload = {
            "prompt": request.prompt,
            "max_new_tokens": self._per_action * request.expected_actions,
            "stop": ["###"],
        }
        start = time.perf_counter()
        last_status: int | None = None
        last_error = "no attempts made"
        for attempt in range(1, self._max_attempts + 1):
            try:
                response = self._session.post(
                    self._base_url,
                    json=payload,
                    timeout=self._timeout_s,
                    headers=self._headers,
                )
            except requests.RequestException as exc:
                last_error = f"transport failure: {exc}"
            else:
                last_status = response.status_code
                if response.ok:
                    try:
                        text = response.json()["text"]
                    except (ValueError, KeyError, TypeError):
                        raise PredictorError(
                            "backend returned a malformed body (no 'text' field)",
                            status=last_status,
                            attempts=attempt,
                        ) from None
                    if not isinstance(text, str):
                        raise PredictorError(
                            "backend 'text' field is not a string",
                            status=last_status,
                            attempts=attempt,
                        )
                    latency = (time.perf_counter() - start) * 1000.0
                    return PredictionResponse(text, latency)
                last_error = f"HTTP {last_status}"
            if attempt < self._max_attempts:
                time.sleep(self._backoff_s * (2 ** (attempt - 1)))
        raise PredictorError(
            f"backend failed after {self._max_attempts} attempts: {last_error}",
            status=last_status,
            attempts=self._max_attempts,
        )
