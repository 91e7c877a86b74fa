"""Self-verification property suite.

Runs the package's structural laws end to end, oracle round trips, the
step-count law, token-mask conformance, clamp safety, template fidelity, an
independent brute-force check of the edit-distance kernel, metric
consistency, the prediction-economy comparison against the shift-reduce
baseline, mismatch skipping, and a heuristic end-to-end smoke run. Each
check returns a result with a reproducible witness on failure.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass
from functools import lru_cache

from .constraints import (
    BAICHUAN_7B,
    GPT2_MEDIUM,
    EOS_TOKEN,
    NEWLINE,
    ConstraintPolicy,
    DecoderState,
    allowed_next_tokens,
    validate_and_repair,
)
from .datagen import SyntheticSpec, generate_synthetic_corpus, tree_to_actions
from .engine import EngineState, apply_action, structure_document
from .errors import InvalidTransitionError
from .metrics import evaluate_corpus, teds
from .model import (
    CONCATENATION,
    NEW_PARAGRAPH,
    Action,
    LogicalTree,
    StructuringConfig,
    TextSegment,
    tree_equal,
)
from .predictors import (
    HeuristicPredictor,
    OraclePredictor,
    PredictionRequest,
    PredictionResponse,
)
from .prompts import format_action_block, parse_action_block, render_prompt
from .tracer import TracerGoldPredictor, tracer_gold_actions, tracer_structure_document
from .treedist import tree_distance

WINDOW_PAIRS = [
    (w_i, w_o) for w_i in range(1, 6) for w_o in range(1, 6) if w_o <= w_i
]


@dataclass
class PropertyResult:
    name: str
    passed: bool
    detail: str = ""
    elapsed_s: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        suffix = f": {self.detail}" if (self.detail and not self.passed) else ""
        return f"{status} {self.name} ({self.elapsed_s:.2f}s){suffix}"


def _timed(name: str, fn) -> PropertyResult:
    started = time.perf_counter()
    try:
        passed, detail = fn()
    except Exception as exc:
        passed, detail = False, f"unhandled {type(exc).__name__}: {exc}"
    return PropertyResult(name, passed, detail, time.perf_counter() - started)


def _segments(texts: list[str], doc_id: str = "doc") -> list[TextSegment]:
    return [TextSegment(doc_id, i, t) for i, t in enumerate(texts)]


# --- round trips -----------------------------------------------------------

def check_round_trip(trials: int = 1000, seed: int = 0) -> PropertyResult:
    """Gold actions replayed through the engine rebuild the source tree exactly,
    for every window configuration."""

    def run():
        corpus = generate_synthetic_corpus(
            SyntheticSpec(doc_count=trials, max_depth=6, seed=seed)
        )
        for index, tree in enumerate(corpus):
            texts, actions = tree_to_actions(tree)
            segments = _segments(texts, f"rt-{index}")
            for w_i, w_o in WINDOW_PAIRS:
                config = StructuringConfig(w_i=w_i, w_o=w_o)
                predictor = OraclePredictor(actions, commit_window=w_o)
                rebuilt, report = structure_document(segments, predictor, config)
                if report.skipped_segment_indices:
                    return False, f"doc {index} (w_i={w_i}, w_o={w_o}): unexpected skips"
                if not tree_equal(rebuilt, tree):
                    return False, f"doc {index} (w_i={w_i}, w_o={w_o}): tree differs"
        return True, f"{trials} trees x {len(WINDOW_PAIRS)} window configs"

    return _timed("oracle-round-trip", run)


def check_step_count_law(max_n: int = 50) -> PropertyResult:
    """A run over N segments takes exactly ceil(N / w_o) prediction steps."""

    class CountingParagraphs:
        def __init__(self):
            self.calls = 0

        def predict(self, request: PredictionRequest) -> PredictionResponse:
            self.calls += 1
            return PredictionResponse("*\n" * request.expected_actions)

    def run():
        for n in range(1, max_n + 1):
            segments = _segments([f"line {i}." for i in range(n)])
            for w_i, w_o in WINDOW_PAIRS:
                predictor = CountingParagraphs()
                _, report = structure_document(
                    segments, predictor, StructuringConfig(w_i=w_i, w_o=w_o)
                )
                expected = -(-n // w_o)
                if report.steps != expected or predictor.calls != expected:
                    return False, (
                        f"N={n} w_i={w_i} w_o={w_o}: steps={report.steps} "
                        f"calls={predictor.calls} expected={expected}"
                    )
        return True, f"N in 1..{max_n}, {len(WINDOW_PAIRS)} window configs"

    return _timed("step-count-law", run)


# --- constraint conformance --------------------------------------------------

# Published legal-next-token matrices, row label -> allowed set, for states
# where the row is not further restricted (mid-document, window complete).
TOKEN_TABLES = {
    "gpt2-medium": {
        NEWLINE: {"+", "++", "++++", "*", "=", EOS_TOKEN},
        "+": {NEWLINE, "+", "++", "++++"},
        "++": {NEWLINE, "+", "++", "++++"},
        "++++": {NEWLINE, "+", "++", "++++"},
        "*": {NEWLINE},
        "=": {NEWLINE},
    },
    "baichuan-7b": {
        NEWLINE: {"+", "++", "*", "=", EOS_TOKEN},
        "+": {NEWLINE, "+", "++"},
        "++": {NEWLINE, "+", "++"},
        "*": {NEWLINE},
        "=": {NEWLINE},
    },
}


def check_token_mask_conformance() -> PropertyResult:
    """allowed_next_tokens reproduces both published matrices exactly, plus
    the first-token and end-of-sequence gating rules."""

    def run():
        for profile in (GPT2_MEDIUM, BAICHUAN_7B):
            table = TOKEN_TABLES[profile.name]
            candidates = sorted(profile.all_tokens)
            for last, expected in table.items():
                state = DecoderState(
                    last_token=last,
                    actions_emitted=3,
                    stack_is_root_only=False,
                    current_max_level=2,
                    window_size=3,
                )
                got = allowed_next_tokens(state, profile)
                for candidate in candidates:
                    if (candidate in got) != (candidate in expected):
                        return False, (
                            f"{profile.name}: last={last!r} candidate={candidate!r} "
                            f"allowed={candidate in got} table={candidate in expected}"
                        )
                # Before the window is filled the row must lose only </s>.
                mid = DecoderState(last, 1, False, 2, 3)
                if allowed_next_tokens(mid, profile) != frozenset(expected - {EOS_TOKEN}):
                    return False, f"{profile.name}: EOS gating wrong after {last!r}"
            start_root = DecoderState(None, 0, True, 0, 3)
            if allowed_next_tokens(start_root, profile) != frozenset({"+", "*"}):
                return False, f"{profile.name}: first-token restriction wrong"
            start_mid = DecoderState(None, 0, False, 2, 3)
            expected_start = frozenset(profile.plus_tokens | {"*", "="})
            if allowed_next_tokens(start_mid, profile) != expected_start:
                return False, f"{profile.name}: start-of-step row wrong"
        return True, "both profiles, all rows"

    return _timed("token-mask-conformance", run)


def check_clamp_safety(sequences: int = 10000, seed: int = 0) -> PropertyResult:
    """Repair-mode validation makes any action sequence executable, and every
    clamped heading lands at most one past the previous stack maximum."""

    def run():
        rng = random.Random(seed)
        for trial in range(sequences):
            length = rng.randint(1, 30)
            actions = []
            for _ in range(length):
                roll = rng.random()
                if roll < 0.45:
                    actions.append(Action.heading(rng.randint(1, 12)))
                elif roll < 0.7:
                    actions.append(NEW_PARAGRAPH)
                else:
                    actions.append(CONCATENATION)
            state = EngineState.initial()
            repaired = validate_and_repair(actions, state.stack, ConstraintPolicy())
            max_level = 0
            for position, action in enumerate(repaired):
                if action.is_heading and action.level > max_level + 1:
                    return False, (
                        f"seed={seed} trial={trial}: clamped level {action.level} "
                        f"> {max_level + 1} at action {position}"
                    )
                try:
                    apply_action(
                        state, action, TextSegment("clamp", position, f"t{position}")
                    )
                except InvalidTransitionError as exc:
                    original = [a.kind.value + str(a.level or "") for a in actions]
                    return False, (
                        f"seed={seed} trial={trial}: InvalidTransition ({exc}); "
                        f"witness sequence {original}"
                    )
                max_level = state.stack.max_heading_level
        return True, f"{sequences} adversarial sequences"

    return _timed("clamp-safety", run)


# --- template fidelity -------------------------------------------------------

DEMO_STACK_TEXTS = [
    (1, "Government Bonds Credit Rating Report"),
    (2, "Credit Quality Analysis for this Series"),
    (3, "Use of Proceeds"),
]
DEMO_PARAGRAPH = (
    "The funds raised from the Government Bonds are ... and projects related to agriculture,"
)
DEMO_SEGMENTS = [
    "forestry, water resources and social services.",
    "Payment Security Analysis",
    "The proceeds for the projects funded by this bond issue are derived from project operational revenues",
]
DEMO_PROMPT = (
    "### STACK:\n"
    "+ Government Bonds Credit Rating Report\n"
    "++ Credit Quality Analysis for this Series\n"
    "+++ Use of Proceeds\n"
    "* The funds raised from the Government Bonds are ... and projects related to agriculture,\n"
    "\n"
    "### SEGMENT:\n"
    "forestry, water resources and social services.\n"
    "Payment Security Analysis\n"
    "The proceeds for the projects funded by this bond issue are derived from project operational revenues\n"
    "\n"
    "### ACTION:\n"
)
DEMO_ACTION_BLOCK = "=\n+++\n*\n"


def demo_state() -> EngineState:
    """The documented mid-run state: three nested headings and an open paragraph."""
    state = EngineState.initial()
    for level, text in DEMO_STACK_TEXTS:
        apply_action(state, Action.heading(level), TextSegment("demo", level - 1, text))
    apply_action(state, NEW_PARAGRAPH, TextSegment("demo", 3, DEMO_PARAGRAPH))
    return state


def check_template_fidelity() -> PropertyResult:
    """The documented example renders byte-for-byte and its action block inverts."""

    def run():
        state = demo_state()
        segments = _segments(DEMO_SEGMENTS, "demo")
        prompt = render_prompt(state.stack, state.tree, segments, StructuringConfig())
        if prompt != DEMO_PROMPT:
            return False, f"prompt differs: {prompt!r}"
        actions = parse_action_block(DEMO_ACTION_BLOCK, 3)
        if actions != [CONCATENATION, Action.heading(3), NEW_PARAGRAPH]:
            return False, f"action block parsed to {actions!r}"
        if format_action_block(actions) != DEMO_ACTION_BLOCK:
            return False, "action block does not round-trip"
        return True, ""

    return _timed("template-fidelity", run)


# --- edit-distance oracle ----------------------------------------------------

def _to_tuple_tree(tree: LogicalTree, node_id: int, separator: str) -> tuple:
    node = tree.node(node_id)
    label = (node.kind, separator.join(node.content))
    return (label, tuple(_to_tuple_tree(tree, c, separator) for c in node.children))


@lru_cache(maxsize=None)
def _forest_size(forest: tuple) -> int:
    return sum(1 + _forest_size(children) for _, children in forest)


@lru_cache(maxsize=None)
def _forest_dist(f1: tuple, f2: tuple) -> int:
    """Recursive ordered-forest edit distance, independent of the kernels.

    Works on leftmost roots: delete it (children splice into the forest),
    insert the other side's, or match the two and recurse on child forests
    and remainders.
    """
    if not f1 and not f2:
        return 0
    if not f1:
        return _forest_size(f2)
    if not f2:
        return _forest_size(f1)
    (label1, kids1), rest1 = f1[0], f1[1:]
    (label2, kids2), rest2 = f2[0], f2[1:]
    delete = _forest_dist(kids1 + rest1, f2) + 1
    insert = _forest_dist(f1, kids2 + rest2) + 1
    match = (
        _forest_dist(kids1, kids2)
        + _forest_dist(rest1, rest2)
        + (0 if label1 == label2 else 1)
    )
    return min(delete, insert, match)


def brute_force_tree_distance(
    pred: LogicalTree, gold: LogicalTree, separator: str = " "
) -> int:
    """Reference ordered tree edit distance by exhaustive forest recursion."""
    t1 = _to_tuple_tree(pred, pred.root, separator)
    t2 = _to_tuple_tree(gold, gold.root, separator)
    return _forest_dist((t1,), (t2,))


def _random_small_tree(rng: random.Random, max_nodes: int = 6) -> LogicalTree:
    tree = LogicalTree()
    budget = rng.randint(1, max_nodes - 1)
    headings = [(tree.root, 0)]
    labels = ["alpha", "beta", "gamma", "delta", "epsilon"]
    for _ in range(budget):
        parent, level = rng.choice(headings)
        text = rng.choice(labels)
        if rng.random() < 0.5:
            node = tree.add_heading(parent, level + 1, text)
            headings.append((node, level + 1))
        else:
            tree.add_paragraph(parent, text)
    return tree


def check_ted_oracle(pairs: int = 500, seed: int = 0) -> PropertyResult:
    """The selected kernel agrees exactly with the brute-force enumerator."""

    def run():
        rng = random.Random(seed)
        for trial in range(pairs):
            a = _random_small_tree(rng)
            b = _random_small_tree(rng)
            fast = tree_distance(a, b)
            slow = brute_force_tree_distance(a, b)
            if fast != slow:
                return False, f"seed={seed} trial={trial}: kernel {fast} != oracle {slow}"
            expected_similarity = max(0.0, 1.0 - slow / max(len(a), len(b)))
            if abs(teds(a, b) - expected_similarity) > 1e-12:
                return False, f"seed={seed} trial={trial}: similarity mismatch"
        return True, f"{pairs} random pairs"

    return _timed("edit-distance-oracle", run)


# --- metric consistency ------------------------------------------------------

def _perturb(tree: LogicalTree, rng: random.Random) -> LogicalTree:
    """Rebuild the tree from its gold actions with one random local change."""
    texts, actions = tree_to_actions(tree)
    choice = rng.random()
    if choice < 0.34 and len(texts) > 1:
        drop = rng.randrange(len(texts))
        texts = texts[:drop] + texts[drop + 1 :]
        actions = actions[:drop] + actions[drop + 1 :]
    elif choice < 0.67:
        flip = rng.randrange(len(actions))
        actions = list(actions)
        actions[flip] = NEW_PARAGRAPH if not actions[flip].is_paragraph else Action.heading(1)
    else:
        edit = rng.randrange(len(texts))
        texts = list(texts)
        texts[edit] = texts[edit] + " perturbed"
    segments = _segments(texts, "perturbed")
    config = StructuringConfig(w_i=1, w_o=1)
    predictor = OraclePredictor(actions, commit_window=1)
    rebuilt, _ = structure_document(segments, predictor, config)
    return rebuilt


def check_metric_consistency(corpora: int = 100, seed: int = 0) -> PropertyResult:
    """Identity corpora score 1.0 everywhere, and perfect document accuracy
    forces every other metric to 1.0."""

    def run():
        base = generate_synthetic_corpus(SyntheticSpec(doc_count=8, max_depth=5, seed=seed))
        identity = [(f"doc-{i}", t, t) for i, t in enumerate(base)]
        report = evaluate_corpus(identity)
        ones = [
            report.heading.f1,
            report.paragraph.f1,
            report.total.f1,
            report.heading_detection.f1,
            report.teds_mean,
            report.doc_acc,
        ]
        if any(abs(v - 1.0) > 0 for v in ones):
            return False, f"identity corpus scored {ones}"

        rng = random.Random(seed + 1)
        saw_perfect = False
        for corpus_index in range(corpora):
            pairs = []
            for doc_index, tree in enumerate(base):
                # Some corpora are left untouched so the implication is not vacuous.
                if corpus_index % 10 == 0 or rng.random() < 0.3:
                    pairs.append((f"doc-{doc_index}", tree, tree))
                else:
                    pairs.append((f"doc-{doc_index}", _perturb(tree, rng), tree))
            report = evaluate_corpus(pairs)
            if report.doc_acc == 1.0:
                saw_perfect = True
                others = [
                    report.heading.f1,
                    report.paragraph.f1,
                    report.total.f1,
                    report.heading_detection.f1,
                    report.teds_mean,
                ]
                if any(v != 1.0 for v in others):
                    return False, (
                        f"seed={seed} corpus={corpus_index}: doc_acc=1 but metrics {others}"
                    )
        if not saw_perfect:
            return False, "no perturbation corpus exercised the doc_acc=1 branch"
        return True, f"identity + {corpora} perturbation corpora"

    return _timed("metric-consistency", run)


# --- prediction economy ------------------------------------------------------

def _has_deep_sibling_headings(tree: LogicalTree) -> bool:
    depth = max((tree.depth(n) for n in tree.preorder()), default=0)
    if depth < 2:
        return False
    for node_id in tree.preorder():
        children = tree.node(node_id).children
        headings = [c for c in children if tree.node(c).kind == "heading"]
        if len(headings) >= 2:
            return True
    return False


def check_prediction_economy(trials: int = 200, seed: int = 0) -> PropertyResult:
    """One committed action per segment, versus N plus reduce pops for the
    shift-reduce baseline; strictly more whenever sibling headings force pops."""

    def run():
        corpus = generate_synthetic_corpus(
            SyntheticSpec(doc_count=trials, max_depth=6, seed=seed)
        )
        config = StructuringConfig(w_i=1, w_o=1)
        for index, tree in enumerate(corpus):
            texts, actions = tree_to_actions(tree)
            segments = _segments(texts, f"econ-{index}")
            rebuilt, report = structure_document(
                segments, OraclePredictor(actions, commit_window=1), config
            )
            committed = len(texts) - len(report.skipped_segment_indices)
            if committed != len(texts):
                return False, f"doc {index}: committed {committed} != N {len(texts)}"

            tracer_texts, tracer_actions = tracer_gold_actions(tree)
            if tracer_texts != texts:
                return False, f"doc {index}: baseline segment order differs"
            tracer_tree, tracer_report = tracer_structure_document(
                segments, TracerGoldPredictor(tracer_actions), config
            )
            if not tree_equal(tracer_tree, tree):
                return False, f"doc {index}: baseline gold replay differs"
            reduces = tracer_report.reduces or 0
            if tracer_report.transitions != len(texts) + reduces:
                return False, f"doc {index}: transitions != N + reduces"
            if tracer_report.transitions < len(texts):
                return False, f"doc {index}: baseline used fewer than N transitions"
            if _has_deep_sibling_headings(tree) and tracer_report.transitions <= len(texts):
                return False, (
                    f"doc {index}: sibling headings at depth >= 2 but no extra transitions"
                )
        return True, f"{trials} documents"

    return _timed("prediction-economy", run)


# --- mismatch handling -------------------------------------------------------

class WrongCountPredictor:
    """Returns one action too few for a chosen step, valid output otherwise."""

    def __init__(self, bad_step: int):
        self.bad_step = bad_step
        self.calls = 0

    def predict(self, request: PredictionRequest) -> PredictionResponse:
        step = self.calls
        self.calls += 1
        count = request.expected_actions
        if step == self.bad_step:
            count = max(0, count - 1)
        return PredictionResponse("*\n" * count)


def check_mismatch_handling() -> PropertyResult:
    """A wrong-count step skips exactly its committed segments and the run continues."""

    def run():
        for w_i, w_o in WINDOW_PAIRS:
            if w_i < 2:
                continue
            n = 4 * w_o + 1
            segments = _segments([f"line {i}." for i in range(n)])
            predictor = WrongCountPredictor(bad_step=1)
            tree, report = structure_document(
                segments, predictor, StructuringConfig(w_i=w_i, w_o=w_o)
            )
            expected_skips = list(range(w_o, 2 * w_o))
            if report.skipped_segment_indices != expected_skips:
                return False, (
                    f"w_i={w_i} w_o={w_o}: skipped {report.skipped_segment_indices}, "
                    f"expected {expected_skips}"
                )
            if report.steps != -(-n // w_o):
                return False, f"w_i={w_i} w_o={w_o}: run did not continue to the end"
            non_root = len(tree) - 1
            if non_root != n - w_o:
                return False, f"w_i={w_i} w_o={w_o}: {non_root} nodes for {n - w_o} segments"
        return True, "all window configs with w_i >= 2"

    return _timed("mismatch-skip", run)


# --- heuristic end-to-end ----------------------------------------------------

def check_heuristic_smoke(docs: int = 1000, seed: int = 42) -> PropertyResult:
    """Full structure-and-evaluate pipeline with the rule-based predictor clears
    a sanity floor on the numbering-rich corpus."""

    def run():
        corpus = generate_synthetic_corpus(SyntheticSpec(doc_count=docs, seed=seed))
        config = StructuringConfig(w_i=3, w_o=3)
        predictor = HeuristicPredictor()
        pairs = []
        for index, gold in enumerate(corpus):
            texts, _ = tree_to_actions(gold)
            segments = _segments(texts, f"smoke-{index}")
            pred, _ = structure_document(segments, predictor, config)
            pairs.append((f"smoke-{index}", pred, gold))
        report = evaluate_corpus(pairs)
        if report.total.f1 <= 0.5:
            return False, f"total F1 {report.total.f1:.3f} <= 0.5"
        return True, f"{docs} docs, total F1 {report.total.f1:.3f}"

    return _timed("heuristic-smoke", run)


def run_all(
    trials: int = 1000, seed: int = 0, include_baseline: bool = True
) -> list[PropertyResult]:
    """Run every property; baseline comparisons can be switched off."""
    results = [
        check_round_trip(trials=trials, seed=seed),
        check_step_count_law(),
        check_token_mask_conformance(),
        check_clamp_safety(seed=seed),
        check_template_fidelity(),
        check_ted_oracle(seed=seed),
        check_metric_consistency(seed=seed),
        check_mismatch_handling(),
        check_heuristic_smoke(docs=min(trials, 1000)),
    ]
    if include_baseline:
        results.insert(7, check_prediction_economy(trials=min(trials, 200), seed=seed))
    return results
