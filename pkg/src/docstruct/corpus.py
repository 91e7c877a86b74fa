"""Line-delimited JSON corpus files: segment, action, and tree documents.

One document per line. Readers validate aggressively, duplicate doc_ids,
malformed JSON, schema violations, and tree-invariant failures are all
rejected with the offending line number, so nothing invalid ever reaches
the engine.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Iterable

from .errors import FormatError, InvalidTreeError, MalformedActionError
from .model import (
    Action,
    LogicalTree,
    TextSegment,
    action_to_string,
    string_to_action,
    tree_from_json_obj,
    tree_to_json_obj,
)


@dataclass(frozen=True)
class SegmentDocument:
    doc_id: str
    segments: tuple[TextSegment, ...]


@dataclass(frozen=True)
class ActionDocument:
    doc_id: str
    actions: tuple[Action, ...]


@dataclass(frozen=True)
class TreeDocument:
    doc_id: str
    tree: LogicalTree


def _read_jsonl(path: str, decode: Callable[[dict, int], object]) -> list:
    records = []
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                raise FormatError(path, line_no, "blank line")
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(path, line_no, f"invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise FormatError(path, line_no, "line is not a JSON object")
            doc_id = obj.get("doc_id")
            if not isinstance(doc_id, str) or not doc_id:
                raise FormatError(path, line_no, "missing or empty 'doc_id'")
            if doc_id in seen_ids:
                raise FormatError(path, line_no, f"duplicate doc_id {doc_id!r}")
            seen_ids.add(doc_id)
            try:
                records.append(decode(obj, line_no))
            except FormatError:
                raise
            except (InvalidTreeError, MalformedActionError, ValueError, KeyError, TypeError) as exc:
                raise FormatError(path, line_no, str(exc) or repr(exc)) from exc
    return records


def _write_jsonl(path: str, objs: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for obj in objs:
            handle.write(json.dumps(obj, ensure_ascii=False))
            handle.write("\n")


def read_segments(path: str) -> list[SegmentDocument]:
    def decode(obj: dict, line_no: int) -> SegmentDocument:
        raw = obj.get("segments")
        if not isinstance(raw, list) or not all(isinstance(t, str) for t in raw):
            raise FormatError(path, line_no, "'segments' must be a list of strings")
        segments = tuple(
            TextSegment(obj["doc_id"], index, text) for index, text in enumerate(raw)
        )
        return SegmentDocument(obj["doc_id"], segments)

    return _read_jsonl(path, decode)


def write_segments(path: str, documents: Iterable[SegmentDocument]) -> None:
    _write_jsonl(
        path,
        (
            {"doc_id": doc.doc_id, "segments": [s.text for s in doc.segments]}
            for doc in documents
        ),
    )


def read_actions(path: str) -> list[ActionDocument]:
    def decode(obj: dict, line_no: int) -> ActionDocument:
        raw = obj.get("actions")
        if not isinstance(raw, list) or not all(isinstance(t, str) for t in raw):
            raise FormatError(path, line_no, "'actions' must be a list of strings")
        return ActionDocument(obj["doc_id"], tuple(string_to_action(s) for s in raw))

    return _read_jsonl(path, decode)


def write_actions(path: str, documents: Iterable[ActionDocument]) -> None:
    _write_jsonl(
        path,
        (
            {"doc_id": doc.doc_id, "actions": [action_to_string(a) for a in doc.actions]}
            for doc in documents
        ),
    )


def read_trees(path: str) -> list[TreeDocument]:
    def decode(obj: dict, line_no: int) -> TreeDocument:
        if "tree" not in obj:
            raise FormatError(path, line_no, "missing 'tree'")
        return TreeDocument(obj["doc_id"], tree_from_json_obj(obj["tree"]))

    return _read_jsonl(path, decode)


def write_trees(path: str, documents: Iterable[TreeDocument]) -> None:
    _write_jsonl(
        path,
        (
            {"doc_id": doc.doc_id, "tree": tree_to_json_obj(doc.tree)}
            for doc in documents
        ),
    )
