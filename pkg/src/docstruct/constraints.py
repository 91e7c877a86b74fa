"""Decoding validity rules: legal-next-token masks and action-sequence repair.

Two enforcement surfaces are exposed. ``allowed_next_tokens`` is the
token-level mask a generation backend can apply while decoding (the allowed
set depends on the model's tokenizer, since multi-plus strings may or may not
exist as single tokens). ``validate_and_repair`` is the sequence-level net
for predictor outputs that were produced without masks: it rewrites a
concatenation aimed at the bare root into a new paragraph and clamps heading
levels so no heading ever skips past the current maximum level plus one.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .errors import ConstraintViolationError
from .model import NEW_PARAGRAPH, Action, ContextStack

NEWLINE = "\n"
EOS_TOKEN = "</s>"

# Selfcheck negative-control hook: when set, level clamping is skipped so the
# post-clamp safety property fails with a witness. Never set outside tests.
_DISABLE_CLAMP_ENV = "DOCSTRUCT_SELFCHECK_DISABLE_CLAMP"


def _clamp_enabled() -> bool:
    return os.environ.get(_DISABLE_CLAMP_ENV, "") in ("", "0")


@dataclass(frozen=True)
class TokenizerProfile:
    """Which plus-run strings a tokenizer can emit as single tokens."""

    name: str
    plus_tokens: frozenset[str]

    def __post_init__(self) -> None:
        if "+" not in self.plus_tokens:
            raise ValueError("plus_tokens must contain the single '+' token")
        for token in self.plus_tokens:
            if not token or set(token) != {"+"}:
                raise ValueError(f"plus token must be a run of '+', got {token!r}")

    @property
    def atomic_tokens(self) -> frozenset[str]:
        return frozenset({NEWLINE, "*", "=", EOS_TOKEN})

    @property
    def all_tokens(self) -> frozenset[str]:
        return self.plus_tokens | self.atomic_tokens

    def to_json_obj(self) -> dict:
        return {"name": self.name, "plus_tokens": sorted(self.plus_tokens, key=len)}

    @staticmethod
    def from_json_obj(obj: dict) -> "TokenizerProfile":
        return TokenizerProfile(obj["name"], frozenset(obj["plus_tokens"]))

    @staticmethod
    def load(path: str) -> "TokenizerProfile":
        with open(path, encoding="utf-8") as handle:
            return TokenizerProfile.from_json_obj(json.load(handle))


GPT2_MEDIUM = TokenizerProfile("gpt2-medium", frozenset({"+", "++", "++++"}))
BAICHUAN_7B = TokenizerProfile("baichuan-7b", frozenset({"+", "++"}))
BUILTIN_PROFILES = {p.name: p for p in (GPT2_MEDIUM, BAICHUAN_7B)}


@dataclass(frozen=True)
class DecoderState:
    """Decoding position for the token mask.

    ``last_token`` is ``None`` at the start of the output. ``window_size``
    is the number of actions requested this step; end-of-sequence becomes
    legal only once that many actions have been emitted.
    """

    last_token: str | None
    actions_emitted: int
    stack_is_root_only: bool
    current_max_level: int
    window_size: int

    def __post_init__(self) -> None:
        if self.window_size < 1:
            raise ValueError("window_size must be >= 1")
        if not 0 <= self.actions_emitted <= self.window_size:
            raise ValueError("actions_emitted must be in 0..window_size")


@dataclass(frozen=True)
class ConstraintPolicy:
    """How predictor output is checked: token masks, silent repair, or rejection."""

    mode: str = "repair"
    profile: TokenizerProfile = field(default=BAICHUAN_7B)

    def __post_init__(self) -> None:
        if self.mode not in ("mask", "repair", "strict"):
            raise ValueError(f"unknown constraint mode {self.mode!r}")


def allowed_next_tokens(state: DecoderState, profile: TokenizerProfile) -> frozenset[str]:
    """Legal next tokens for the given decoding position.

    Action-line starters follow the per-tokenizer table; ``*`` and ``=``
    close their line immediately; plus tokens may chain before the line
    break. The first action of a document (root-only stack) may only open a
    level-1 heading or a paragraph, and end-of-sequence is legal only after
    a line break once the requested number of actions has been emitted.
    """
    starters = profile.plus_tokens | {"*", "="}
    last = state.last_token
    if last is None or last == NEWLINE:
        if state.stack_is_root_only and state.actions_emitted == 0:
            allowed = {"+", "*"}
        else:
            allowed = set(starters)
        if last == NEWLINE and state.actions_emitted == state.window_size:
            allowed.add(EOS_TOKEN)
        return frozenset(allowed)
    if last in profile.plus_tokens:
        return frozenset(profile.plus_tokens | {NEWLINE})
    if last in ("*", "="):
        return frozenset({NEWLINE})
    if last == EOS_TOKEN:
        return frozenset()
    raise ValueError(f"token {last!r} is not in profile {profile.name!r}")


def clamp_heading_level(action: Action, stack: ContextStack) -> Action:
    """Cap a heading's level at the stack's current maximum heading level plus 1."""
    if not action.is_heading:
        raise ValueError("clamp_heading_level applies to heading actions only")
    ceiling = stack.max_heading_level + 1
    if action.level <= ceiling:
        return action
    return Action.heading(ceiling)


def validate_and_repair(
    actions: list[Action], stack: ContextStack, policy: ConstraintPolicy
) -> list[Action]:
    """Check a decoded action sequence against the evolving stack.

    In repair (and mask) mode violations are rewritten; in strict mode the
    first violation raises ConstraintViolationError with its index and rule.
    The returned sequence always executes without InvalidTransitionError.
    """
    strict = policy.mode == "strict"
    root_only = stack.is_root_only
    max_level = stack.max_heading_level
    repaired: list[Action] = []
    for index, action in enumerate(actions):
        if action.is_concat and root_only:
            if strict:
                raise ConstraintViolationError(
                    index, "concat-at-root", "concatenation with only the root on the stack"
                )
            action = NEW_PARAGRAPH
        if action.is_heading and action.level > max_level + 1:
            if strict:
                raise ConstraintViolationError(
                    index,
                    "level-skip",
                    f"level-{action.level} heading skips past {max_level + 1}",
                )
            if _clamp_enabled():
                action = Action.heading(max_level + 1)
        if action.is_heading:
            max_level = action.level
            root_only = False
        elif action.is_paragraph:
            root_only = False
        repaired.append(action)
    return repaired
