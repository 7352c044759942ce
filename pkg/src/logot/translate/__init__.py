"""Few-shot prompts, the LLM client, ASP extraction and the deterministic reference translators."""

from .bank import (
    Example,
    ExampleBank,
    PuzzleInstance,
    build_default_bank,
    check_question,
    load_bank,
    puzzle_description,
    puzzle_instance,
    question_text,
)
from .extract import Extraction, ExtractionError, extract_asp, extract_asp_report
from .llm import (
    MODES,
    Completion,
    FixtureMissError,
    FixtureStore,
    LlmConfig,
    LlmError,
    Usage,
    format_cost,
    llm_complete,
    prompt_hash,
)
from .prompts import TEMPLATE_VERSION, PromptError, build_rule_prompt, build_state_prompt, cot_prompt, load_template
from .reference import (
    bw_goal_rules,
    encoding_sections,
    encoding_text,
    reference_rules,
    reference_state_text,
    reference_translate_state,
    strip_facts,
)

__all__ = [
    "Example",
    "ExampleBank",
    "PuzzleInstance",
    "build_default_bank",
    "check_question",
    "load_bank",
    "puzzle_description",
    "puzzle_instance",
    "question_text",
    "Extraction",
    "ExtractionError",
    "extract_asp",
    "extract_asp_report",
    "MODES",
    "Completion",
    "FixtureMissError",
    "FixtureStore",
    "LlmConfig",
    "LlmError",
    "Usage",
    "format_cost",
    "llm_complete",
    "prompt_hash",
    "TEMPLATE_VERSION",
    "PromptError",
    "build_rule_prompt",
    "build_state_prompt",
    "cot_prompt",
    "load_template",
    "bw_goal_rules",
    "encoding_sections",
    "encoding_text",
    "reference_rules",
    "reference_state_text",
    "reference_translate_state",
    "strip_facts",
]
