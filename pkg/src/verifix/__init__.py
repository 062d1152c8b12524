"""Verifiable instruction following: deterministic constraint checkers,
a divide-verify-refine loop, dataset synthesis, and evaluation metrics.
"""

from .analysis import Span, detect_language
from .constraints import (
    Category,
    ComparisonMode,
    ConstraintSpec,
    ConstraintType,
    canonical_category,
    conflicts,
    parse_tool_expression,
)
from .verifiers import (
    ContentSpec,
    Feedback,
    ToolInstance,
    Verdict,
    instantiate,
    render_feedback,
    verify,
    verify_all,
)

__version__ = "0.1.0"

__all__ = [
    "Category",
    "ComparisonMode",
    "ConstraintSpec",
    "ConstraintType",
    "ContentSpec",
    "Feedback",
    "Span",
    "ToolInstance",
    "Verdict",
    "canonical_category",
    "conflicts",
    "detect_language",
    "instantiate",
    "parse_tool_expression",
    "render_feedback",
    "verify",
    "verify_all",
]
