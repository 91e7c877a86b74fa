"""docstruct: transition-based document logical structuring.

Turns an ordered run of extracted text lines into a tree of headings and
paragraphs by executing per-segment structuring actions, with pluggable
action predictors, decoding constraints, a tree-to-actions data generator,
and structural evaluation metrics.
"""

from .constraints import (
    BAICHUAN_7B,
    BUILTIN_PROFILES,
    GPT2_MEDIUM,
    ConstraintPolicy,
    DecoderState,
    TokenizerProfile,
    allowed_next_tokens,
    clamp_heading_level,
    validate_and_repair,
)
from .datagen import (
    SyntheticSpec,
    TrainingExample,
    emit_training_examples,
    generate_synthetic_corpus,
    tree_to_actions,
)
from .engine import (
    EngineState,
    RunReport,
    apply_action,
    structure_document,
    update_stack,
)
from .errors import (
    ConstraintViolationError,
    CursorExhaustedError,
    DocstructError,
    EmptyCorpusError,
    FormatError,
    InvalidTransitionError,
    InvalidTreeError,
    JoinError,
    LivelockError,
    MalformedActionError,
    MismatchError,
    PredictorError,
)
from .metrics import (
    EvalReport,
    Score,
    doc_acc,
    evaluate_corpus,
    heading_detection_f1,
    node_f1,
    teds,
)
from .model import (
    CONCATENATION,
    MAX_HEADING_LEVEL,
    NEW_PARAGRAPH,
    Action,
    ActionKind,
    ContextStack,
    LogicalTree,
    Node,
    StructuringConfig,
    TextSegment,
    action_to_string,
    string_to_action,
    tree_equal,
    tree_from_json_obj,
    tree_to_json_obj,
    validate_tree,
)
from .predictors import (
    ActionPredictor,
    ConstraintHints,
    HeuristicPredictor,
    OraclePredictor,
    PredictionRequest,
    PredictionResponse,
    RemotePredictor,
)
from .prompts import (
    format_action_block,
    parse_action_block,
    render_prompt,
)
from .tracer import (
    TracerAction,
    TracerGoldPredictor,
    TracerState,
    tracer_allowed_actions,
    tracer_gold_actions,
    tracer_step,
    tracer_structure_document,
)
from .treedist import kernel_name

__version__ = "0.1.0"

__all__ = [
    "Action",
    "ActionKind",
    "ActionPredictor",
    "BAICHUAN_7B",
    "BUILTIN_PROFILES",
    "CONCATENATION",
    "ConstraintHints",
    "ConstraintPolicy",
    "ConstraintViolationError",
    "ContextStack",
    "CursorExhaustedError",
    "DecoderState",
    "DocstructError",
    "EmptyCorpusError",
    "EngineState",
    "EvalReport",
    "FormatError",
    "GPT2_MEDIUM",
    "HeuristicPredictor",
    "InvalidTransitionError",
    "InvalidTreeError",
    "JoinError",
    "LivelockError",
    "LogicalTree",
    "MAX_HEADING_LEVEL",
    "MalformedActionError",
    "MismatchError",
    "NEW_PARAGRAPH",
    "Node",
    "OraclePredictor",
    "PredictionRequest",
    "PredictionResponse",
    "PredictorError",
    "RemotePredictor",
    "RunReport",
    "Score",
    "StructuringConfig",
    "SyntheticSpec",
    "TextSegment",
    "TokenizerProfile",
    "TracerAction",
    "TracerGoldPredictor",
    "TracerState",
    "TrainingExample",
    "action_to_string",
    "allowed_next_tokens",
    "apply_action",
    "clamp_heading_level",
    "doc_acc",
    "emit_training_examples",
    "evaluate_corpus",
    "format_action_block",
    "generate_synthetic_corpus",
    "heading_detection_f1",
    "kernel_name",
    "node_f1",
    "parse_action_block",
    "render_prompt",
    "string_to_action",
    "structure_document",
    "teds",
    "tracer_allowed_actions",
    "tracer_gold_actions",
    "tracer_step",
    "tracer_structure_document",
    "tree_equal",
    "tree_from_json_obj",
    "tree_to_actions",
    "tree_to_json_obj",
    "update_stack",
    "validate_and_repair",
    "validate_tree",
]
