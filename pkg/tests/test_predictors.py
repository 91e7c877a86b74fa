"""Oracle replay, numbering heuristic, and the remote HTTP client."""

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from docstruct import (
    Action,
    CursorExhaustedError,
    HeuristicPredictor,
    NEW_PARAGRAPH,
    OraclePredictor,
    PredictionRequest,
    PredictorError,
    RemotePredictor,
    StructuringConfig,
    parse_action_block,
    render_prompt,
    string_to_action,
    structure_document,
)

from conftest import segments


def request_for(prompt="### STACK:\n\n### SEGMENT:\nx\n\n### ACTION:\n", expected=1):
    return PredictionRequest(prompt, expected_actions=expected)


class TestOraclePredictor:
    def test_slices_and_advances_by_commit_window(self):
        gold = [string_to_action(s) for s in ["+", "*", "="]]
        oracle = OraclePredictor(gold, commit_window=2)
        first = oracle.predict(request_for(expected=2))
        assert first.action_lines == "+\n*\n"
        second = oracle.predict(request_for(expected=1))
        assert second.action_lines == "=\n"

    def test_look_ahead_slice_overlaps(self):
        gold = [string_to_action(s) for s in ["+", "*", "=", "*"]]
        oracle = OraclePredictor(gold, commit_window=1)
        assert oracle.predict(request_for(expected=3)).action_lines == "+\n*\n=\n"
        assert oracle.predict(request_for(expected=3)).action_lines == "*\n=\n*\n"

    def test_exhaustion(self):
        oracle = OraclePredictor([NEW_PARAGRAPH], commit_window=1)
        oracle.predict(request_for(expected=1))
        with pytest.raises(CursorExhaustedError):
            oracle.predict(request_for(expected=1))

    def test_overlong_request_raises(self):
        oracle = OraclePredictor([NEW_PARAGRAPH, NEW_PARAGRAPH])
        with pytest.raises(CursorExhaustedError):
            oracle.predict(request_for(expected=3))

    def test_deterministic_without_commit_window(self):
        gold = [string_to_action(s) for s in ["*", "=", "="]]
        a = OraclePredictor(gold)
        b = OraclePredictor(gold)
        req = request_for(expected=3)
        assert a.predict(req).action_lines == b.predict(req).action_lines


def heuristic_output(stack_lines, segment_texts):
    prompt = "### STACK:\n"
    for line in stack_lines:
        prompt += line + "\n"
    prompt += "\n### SEGMENT:\n"
    for text in segment_texts:
        prompt += text + "\n"
    prompt += "\n### ACTION:\n"
    predictor = HeuristicPredictor()
    response = predictor.predict(PredictionRequest(prompt, expected_actions=len(segment_texts)))
    return parse_action_block(response.action_lines, len(segment_texts))


class TestHeuristicPredictor:
    def test_chapter_numbering_clamped_under_deep_stack(self):
        actions = heuristic_output(
            ["+ Summary", "++ Chapter 2 Purpose", "+++ 2. Principles", "++++ Risk Principle"],
            ["Chapter 3 Basis and Scope for Determining the Holders of Employee Stock Ownership Plans"],
        )
        assert actions == [Action.heading(1)]  # "Chapter N" pattern pins level 1

    def test_unfinished_paragraph_continues(self):
        actions = heuristic_output(
            [
                "+ Government Bonds Credit Rating Report",
                "* The funds raised from the Government Bonds are for projects related to agriculture,",
            ],
            ["forestry, water resources and social services."],
        )
        assert [a.is_concat for a in actions] == [True]

    def test_finished_paragraph_starts_new_one(self):
        actions = heuristic_output(
            ["+ Heading", "* lorem ipsum."],
            ["more prose."],
        )
        assert actions == [NEW_PARAGRAPH]

    def test_dotted_numbering_depth(self):
        actions = heuristic_output(
            ["+ 1. Overview"],
            ["1.1 Detail", "1.1.1 Deeper", "plain prose."],
        )
        assert actions == [Action.heading(2), Action.heading(3), NEW_PARAGRAPH]

    def test_dotted_numbering_clamped_to_max_plus_one(self):
        actions = heuristic_output([], ["1.1.1 Deep start"])
        assert actions == [Action.heading(1)]

    def test_parenthesized_numbering_goes_deepest(self):
        actions = heuristic_output(["+ 1. Overview", "++ 1.1 Detail"], ["(2) Item"])
        assert actions == [Action.heading(3)]

    def test_pure_function_of_prompt(self):
        predictor = HeuristicPredictor()
        request = request_for(
            "### STACK:\n+ A\n\n### SEGMENT:\n2.1 Next\nprose.\n\n### ACTION:\n", expected=2
        )
        assert (
            predictor.predict(request).action_lines
            == predictor.predict(request).action_lines
            == HeuristicPredictor().predict(request).action_lines
        )

    def test_full_window_mixes_rules(self):
        actions = heuristic_output(
            ["+ Chapter 1 Overview", "* The first payment was delayed until"],
            ["March of next year.", "1.1 Scope", "The scope is broad."],
        )
        assert [a.is_concat for a in actions] == [True, False, False]
        assert actions[1] == Action.heading(2)
        assert actions[2] == NEW_PARAGRAPH


class _StubHandler(BaseHTTPRequestHandler):
    script = []  # list of (status, body_dict_or_str) consumed per request
    seen = []

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        type(self).seen.append(json.loads(self.rfile.read(length)))
        status, body = self.script.pop(0) if self.script else (200, {"text": "*\n"})
        payload = json.dumps(body) if isinstance(body, dict) else body
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(payload.encode("utf-8"))

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _StubHandler.script = []
    _StubHandler.seen = []
    yield server
    server.shutdown()
    thread.join()


def stub_url(server):
    return f"http://127.0.0.1:{server.server_address[1]}/generate"


class TestRemotePredictor:
    def test_forwards_text_verbatim(self, stub_server):
        _StubHandler.script = [(200, {"text": "*\n"})]
        predictor = RemotePredictor(stub_url(stub_server), backoff_s=0.0)
        response = predictor.predict(request_for(expected=1))
        assert response.action_lines == "*\n"
        assert _StubHandler.seen[0]["max_new_tokens"] == 8
        assert _StubHandler.seen[0]["stop"] == ["###"]

    def test_retries_then_succeeds(self, stub_server):
        _StubHandler.script = [(500, "oops"), (200, {"text": "=\n"})]
        predictor = RemotePredictor(stub_url(stub_server), max_attempts=3, backoff_s=0.0)
        assert predictor.predict(request_for(expected=1)).action_lines == "=\n"
        assert len(_StubHandler.seen) == 2

    def test_exhausted_attempts_raise_with_count(self, stub_server):
        _StubHandler.script = [(500, "a"), (502, "b"), (503, "c")]
        predictor = RemotePredictor(stub_url(stub_server), max_attempts=3, backoff_s=0.0)
        with pytest.raises(PredictorError) as info:
            predictor.predict(request_for(expected=1))
        assert info.value.attempts == 3
        assert info.value.status == 503

    def test_malformed_body_raises(self, stub_server):
        _StubHandler.script = [(200, {"output": "nope"})]
        predictor = RemotePredictor(stub_url(stub_server), backoff_s=0.0)
        with pytest.raises(PredictorError, match="malformed"):
            predictor.predict(request_for(expected=1))

    def test_wrong_count_forwarded_and_engine_skips(self, stub_server):
        # Backend answers two lines for three expected segments: the engine
        # records the step's committed window as skipped and continues.
        _StubHandler.script = [(200, {"text": "*\n*\n"}), (200, {"text": "*\n*\n*\n"})]
        predictor = RemotePredictor(stub_url(stub_server), backoff_s=0.0)
        texts = [f"line {i}." for i in range(6)]
        tree, report = structure_document(
            segments(texts), predictor, StructuringConfig(w_i=3, w_o=3)
        )
        assert report.skipped_segment_indices == [0, 1, 2]
        assert report.steps == 2
        assert len(tree) - 1 == 3

    def test_unreachable_endpoint(self):
        predictor = RemotePredictor(
            "http://127.0.0.1:1/generate", max_attempts=2, backoff_s=0.0, timeout_s=0.2
        )
        with pytest.raises(PredictorError) as info:
            predictor.predict(request_for(expected=1))
        assert info.value.attempts == 2
