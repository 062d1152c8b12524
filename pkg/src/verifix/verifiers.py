"""The checker tools: bind a constraint to a verifier, verify a response,
and render directional feedback a model can act on.

All 21 canonical checkers are pure local functions. Content checkers
(topic, sentiment) call a pluggable classifier client and share the same
verdict and feedback shapes.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

from . import analysis
from .analysis import Span, detect_language
from .constraints import (
    ComparisonMode,
    ConstraintSpec,
    ConstraintType,
    surface_name,
)


class UnsupportedType(KeyError):
    """No checker is registered for the tool's constraint type."""


class NotApplicable(ValueError):
    """Feedback was requested for a satisfied verdict."""


@dataclass(frozen=True)
class Feedback:
    """What is wrong and how to change it, with supporting evidence."""

    constraint: object
    error_description: str
    direction: str
    evidence: tuple[Span, ...] = ()


@dataclass(frozen=True)
class Verdict:
    satisfied: bool
    observed: Optional[Union[int, str]] = None
    feedback: Optional[Feedback] = None

    def __post_init__(self) -> None:
        if self.satisfied and self.feedback is not None:
            raise ValueError("satisfied verdicts carry no feedback")
        if not self.satisfied and self.feedback is None:
            raise ValueError("unsatisfied verdicts must carry feedback")


@dataclass(frozen=True)
class ToolInstance:
    """A verifier bound to its parameters, e.g. Bullet_points(4)."""

    spec: ConstraintSpec
    display_name: str

    @property
    def constraint_type(self) -> str:
        return self.spec.type.value


@dataclass(frozen=True)
class ContentSpec:
    """A content requirement checked by an external classifier."""

    kind: str  # "topic" or "sentiment"
    label: str

    def __post_init__(self) -> None:
        if self.kind not in ("topic", "sentiment"):
            raise ValueError(f"unknown content kind: {self.kind!r}")
        if not self.label:
            raise ValueError("content label must be nonempty")

    def to_json(self) -> dict:
        return {"type": self.kind, "label": self.label}

    @classmethod
    def from_json(cls, obj: dict) -> "ContentSpec":
        return cls(kind=obj["type"], label=obj["label"])


@dataclass(frozen=True)
class ContentTool:
    """A classifier-backed verifier for a topic or sentiment requirement."""

    spec: ContentSpec
    classifier: Callable[[str, str], str] = field(compare=False)

    @property
    def display_name(self) -> str:
        return f'{self.spec.kind.capitalize()}("{self.spec.label}")'

    @property
    def constraint_type(self) -> str:
        return self.spec.kind


def instantiate(spec: ConstraintSpec) -> ToolInstance:
    """Bind a well-formed spec to its checker under a call-style name."""
    t = spec.type
    if t in (ConstraintType.BULLET_POINTS, ConstraintType.SEPARATOR_PARAGRAPHS):
        args = [str(spec.int_param)]
    elif t in (
        ConstraintType.WORD_COUNT,
        ConstraintType.SENTENCE_COUNT,
        ConstraintType.CAPITAL_WORD_FREQUENCY,
        ConstraintType.PLACEHOLDER,
        ConstraintType.HIGHLIGHTED,
    ):
        args = [spec.comparison.value, str(spec.int_param)]
    elif t in (ConstraintType.LETTER_FREQUENCY, ConstraintType.KEYWORD_FREQUENCY):
        args = [f'"{spec.text_param}"', spec.comparison.value, str(spec.int_param)]
    elif t is ConstraintType.FIXED_RESPONSES:
        args = [f'"{opt}"' for opt in spec.options]
    elif spec.text_param is not None:
        args = [f'"{spec.text_param}"']
    else:
        args = []
    return ToolInstance(spec, f"{surface_name(t)}({', '.join(args)})")


def content_tool(spec: ContentSpec, classifier: Callable[[str, str], str]) -> ContentTool:
    return ContentTool(spec, classifier)


def tool_for(spec, classifier: Optional[Callable[[str, str], str]] = None):
    """Dispatch a ConstraintSpec or ContentSpec to the right tool kind."""
    if isinstance(spec, ConstraintSpec):
        return instantiate(spec)
    if isinstance(spec, ContentSpec):
        if classifier is None:
            raise ValueError("content constraints require a classifier client")
        return content_tool(spec, classifier)
    raise TypeError(f"not a constraint spec: {spec!r}")


def _plural(n: int, noun: str) -> str:
    return noun if n == 1 else noun + "s"


def _threshold_met(mode: ComparisonMode, observed: int, required: int) -> bool:
    if mode is ComparisonMode.AT_LEAST:
        return observed >= required
    if mode is ComparisonMode.LESS_THAN:
        return observed < required
    return observed == required


# Each checker returns (satisfied, observed, error, direction, evidence).
_CheckResult = tuple[bool, Optional[Union[int, str]], str, str, tuple[Span, ...]]


def _check_word_count(spec: ConstraintSpec, response: str) -> _CheckResult:
    n, req = analysis.count_words(response), spec.int_param
    ok = _threshold_met(spec.comparison, n, req)
    if spec.comparison is ComparisonMode.AT_LEAST:
        delta = req - n
        error = f"The response contains {n} {_plural(n, 'word')}, but at least {req} {_plural(req, 'word')} are required."
        direction = f"Please add at least {delta} more {_plural(delta, 'word')}."
    else:
        delta = n - req + 1
        error = f"The response contains {n} {_plural(n, 'word')}, but fewer than {req} words are required."
        direction = f"Please remove at least {delta} {_plural(delta, 'word')}."
    return ok, n, error, direction, ()


def _check_sentence_count(spec: ConstraintSpec, response: str) -> _CheckResult:
    spans = analysis.split_sentences(response)
    n, req = len(spans), spec.int_param
    ok = _threshold_met(spec.comparison, n, req)
    if spec.comparison is ComparisonMode.AT_LEAST:
        delta = req - n
        error = f"The response contains {n} {_plural(n, 'sentence')}, but at least {req} {_plural(req, 'sentence')} are required."
        direction = f"Please add at least {delta} more {_plural(delta, 'sentence')}."
    else:
        delta = n - req + 1
        error = f"The response contains {n} {_plural(n, 'sentence')}, but fewer than {req} sentences are required."
        direction = f"Please remove at least {delta} {_plural(delta, 'sentence')}."
    return ok, n, error, direction, tuple(spans)


def _check_paragraphs(spec: ConstraintSpec, response: str) -> _CheckResult:
    parts = analysis.split_paragraphs(response)
    n, req = len(parts), spec.int_param
    ok = n == req
    error = f"The response contains {n} {_plural(n, 'part')} separated by ***, but exactly {req} {_plural(req, 'part')} are required."
    if n < req:
        delta = req - n
        direction = f"Please split the response into {delta} more {_plural(delta, 'part')} using *** as the separator."
    else:
        delta = n - req
        direction = f"Please merge or remove {delta} {_plural(delta, 'part')} so that exactly {req} remain."
    return ok, n, error, direction, tuple(parts)


def _check_bullets(spec: ConstraintSpec, response: str) -> _CheckResult:
    bullets = analysis.parse_bullets(response)
    n, req = len(bullets), spec.int_param
    ok = n == req
    if n < req:
        delta = req - n
        error = f"The response only contains {n} bullet {_plural(n, 'point')}."
        direction = f"{delta} more bullet {_plural(delta, 'point')} should be added."
    else:
        delta = n - req
        error = f"The response contains {n} bullet {_plural(n, 'point')}."
        direction = f"{delta} bullet {_plural(delta, 'point')} should be removed."
    return ok, n, error, direction, tuple(bullets)


def _check_placeholders(spec: ConstraintSpec, response: str) -> _CheckResult:
    found = analysis.find_placeholders(response)
    n, req = len(found), spec.int_param
    ok = _threshold_met(spec.comparison, n, req)
    if spec.comparison is ComparisonMode.AT_LEAST:
        delta = req - n
        error = f"The response contains {n} {_plural(n, 'placeholder')} in square brackets, but at least {req} are required."
        direction = f"Please add {delta} more {_plural(delta, 'placeholder')} such as [name]."
    else:
        delta = n - req + 1
        error = f"The response contains {n} {_plural(n, 'placeholder')} in square brackets, but fewer than {req} are allowed."
        direction = f"Please remove at least {delta} {_plural(delta, 'placeholder')}."
    return ok, n, error, direction, tuple(found)


def _check_highlights(spec: ConstraintSpec, response: str) -> _CheckResult:
    found = analysis.find_highlights(response)
    n, req = len(found), spec.int_param
    ok = _threshold_met(spec.comparison, n, req)
    if spec.comparison is ComparisonMode.AT_LEAST:
        delta = req - n
        error = f"The response contains {n} highlighted {_plural(n, 'section')}, but at least {req} are required."
        direction = f"Please highlight {delta} more {_plural(delta, 'section')} using *highlighted section*."
    else:
        delta = n - req + 1
        error = f"The response contains {n} highlighted {_plural(n, 'section')}, but fewer than {req} are allowed."
        direction = f"Please remove the highlight markers from at least {delta} {_plural(delta, 'section')}."
    return ok, n, error, direction, tuple(found)


def _check_title(spec: ConstraintSpec, response: str) -> _CheckResult:
    span = analysis.find_title(response)
    ok = span is not None
    error = "The response does not contain a title wrapped in double angular brackets."
    direction = "Please add a title such as <<title>>."
    return ok, 1 if ok else 0, error, direction, (span,) if span else ()


def _check_json(spec: ConstraintSpec, response: str) -> _CheckResult:
    try:
        json.loads(response.strip())
        ok = True
    except (json.JSONDecodeError, ValueError):
        ok = False
    error = "The response is not a single valid JSON document."
    direction = "Please reformat the entire response as valid JSON."
    return ok, None, error, direction, ()


def _check_quoted(spec: ConstraintSpec, response: str) -> _CheckResult:
    t = response.strip()
    ok = len(t) >= 2 and t.startswith('"') and t.endswith('"')
    error = "The response is not wrapped in double quotation marks."
    direction = "Please wrap the entire response in double quotation marks."
    return ok, None, error, direction, ()


def _check_end_phrase(spec: ConstraintSpec, response: str) -> _CheckResult:
    ok = response.rstrip().endswith(spec.text_param)
    error = f"The response does not end with the required phrase: {spec.text_param}"
    direction = f"Please make the response end exactly with: {spec.text_param}"
    return ok, None, error, direction, ()


POSTSCRIPT_MARKERS = ("P.S.", "P.P.S.")

_POSTSCRIPT_RE = re.compile(
    r"(?:^|\s)(" + "|".join(re.escape(m) for m in POSTSCRIPT_MARKERS) + ")",
    re.MULTILINE,
)


def _check_postscript(spec: ConstraintSpec, response: str) -> _CheckResult:
    m = _POSTSCRIPT_RE.search(response)
    ok = m is not None
    error = "The response does not contain a postscript starting with P.S."
    direction = "Please add a postscript starting with P.S. at the end of the response."
    evidence = (analysis.Span(m.start(1), m.end(1), m.group(1)),) if m else ()
    return ok, None, error, direction, evidence


def _check_no_commas(spec: ConstraintSpec, response: str) -> _CheckResult:
    commas = analysis.find_commas(response)
    n = len(commas)
    ok = n == 0
    contexts = " ".join(f"({span.text})" for span in commas)
    error = f"The response contains {n} comma(s). Here are the detected commas: {contexts}."
    direction = "Please remove all commas."
    return ok, n, error, direction, tuple(commas)


def _check_all_capital(spec: ConstraintSpec, response: str) -> _CheckResult:
    n = sum(1 for c in response if c.islower())
    ok = n == 0
    error = f"The response contains {n} lowercase {_plural(n, 'letter')}."
    direction = "Please convert the entire response to all capital letters."
    return ok, n, error, direction, ()


def _check_all_lowercase(spec: ConstraintSpec, response: str) -> _CheckResult:
    n = sum(1 for c in response if c.isupper())
    ok = n == 0
    error = f"The response contains {n} uppercase {_plural(n, 'letter')}."
    direction = "Please convert the entire response to all lowercase letters."
    return ok, n, error, direction, ()


def _check_capital_words(spec: ConstraintSpec, response: str) -> _CheckResult:
    n, req = analysis.count_capital_words(response), spec.int_param
    ok = _threshold_met(spec.comparison, n, req)
    if spec.comparison is ComparisonMode.AT_LEAST:
        delta = req - n
        error = f"The response contains {n} fully capitalized {_plural(n, 'word')}, but at least {req} are required."
        direction = f"Please add {delta} more fully capitalized {_plural(delta, 'word')}."
    else:
        error = f"The response contains {n} fully capitalized {_plural(n, 'word')}, but fewer than {req} are allowed."
        direction = f"Please reduce the number of fully capitalized words to fewer than {req}."
    return ok, n, error, direction, ()


def _check_letter_frequency(spec: ConstraintSpec, response: str) -> _CheckResult:
    letter = spec.text_param
    n, req = analysis.count_letter(response, letter), spec.int_param
    ok = _threshold_met(spec.comparison, n, req)
    if spec.comparison is ComparisonMode.AT_LEAST:
        delta = req - n
        error = f"The letter '{letter}' appears {n} {_plural(n, 'time')} in the response, but at least {req} {_plural(req, 'time')} are required."
        direction = f"Please use the letter '{letter}' at least {delta} more {_plural(delta, 'time')}."
    else:
        error = f"The letter '{letter}' appears {n} {_plural(n, 'time')} in the response, but fewer than {req} are allowed."
        direction = f"Please reduce occurrences of the letter '{letter}' to fewer than {req}."
    return ok, n, error, direction, ()


def _check_include_keyword(spec: ConstraintSpec, response: str) -> _CheckResult:
    spans = analysis.find_keyword(response, spec.text_param)
    ok = len(spans) >= 1
    error = f"The keyword '{spec.text_param}' does not appear in the response."
    direction = f"Please include the keyword '{spec.text_param}' in the response."
    return ok, len(spans), error, direction, tuple(spans)


def _check_exclude_keyword(spec: ConstraintSpec, response: str) -> _CheckResult:
    spans = analysis.find_keyword(response, spec.text_param)
    n = len(spans)
    ok = n == 0
    error = f"The word '{spec.text_param}' appears {n} {_plural(n, 'time')} in the response."
    direction = f"Please remove every occurrence of the word '{spec.text_param}'."
    return ok, n, error, direction, tuple(spans)


def _check_keyword_frequency(spec: ConstraintSpec, response: str) -> _CheckResult:
    kw = spec.text_param
    spans = analysis.find_keyword(response, kw)
    n, req = len(spans), spec.int_param
    ok = _threshold_met(spec.comparison, n, req)
    if spec.comparison is ComparisonMode.AT_LEAST:
        delta = req - n
        error = f"The word '{kw}' appears {n} {_plural(n, 'time')} in the response, but at least {req} {_plural(req, 'time')} are required."
        direction = f"Please use the word '{kw}' at least {delta} more {_plural(delta, 'time')}."
    else:
        error = f"The word '{kw}' appears {n} {_plural(n, 'time')} in the response, but fewer than {req} are allowed."
        direction = f"Please reduce occurrences of the word '{kw}' to fewer than {req}."
    return ok, n, error, direction, tuple(spans)


def _check_fixed_responses(spec: ConstraintSpec, response: str) -> _CheckResult:
    options = spec.options
    ok = response.strip() in options
    error = "The response is not one of the allowed answers."
    direction = "Please answer with exactly one of: " + ", ".join(options) + "."
    return ok, None, error, direction, ()


def _make_language_checker(detector):
    def check(spec: ConstraintSpec, response: str) -> _CheckResult:
        observed = detector(response)
        ok = observed == spec.text_param
        error = f"The detected language of the response is '{observed}', which does not match the required language '{spec.text_param}'."
        direction = f"Please rewrite the entire response in the required language '{spec.text_param}'."
        return ok, observed, error, direction, ()

    return check


CHECKERS: dict[ConstraintType, Callable[[ConstraintSpec, str], _CheckResult]] = {
    ConstraintType.WORD_COUNT: _check_word_count,
    ConstraintType.SENTENCE_COUNT: _check_sentence_count,
    ConstraintType.SEPARATOR_PARAGRAPHS: _check_paragraphs,
    ConstraintType.BULLET_POINTS: _check_bullets,
    ConstraintType.PLACEHOLDER: _check_placeholders,
    ConstraintType.HIGHLIGHTED: _check_highlights,
    ConstraintType.TITLE_FORMAT: _check_title,
    ConstraintType.JSON_FORMAT: _check_json,
    ConstraintType.QUOTED_RESPONSE: _check_quoted,
    ConstraintType.END_PHRASE: _check_end_phrase,
    ConstraintType.POSTSCRIPT: _check_postscript,
    ConstraintType.NO_COMMAS: _check_no_commas,
    ConstraintType.ALL_CAPITAL: _check_all_capital,
    ConstraintType.ALL_LOWERCASE: _check_all_lowercase,
    ConstraintType.CAPITAL_WORD_FREQUENCY: _check_capital_words,
    ConstraintType.LETTER_FREQUENCY: _check_letter_frequency,
    ConstraintType.INCLUDE_KEYWORD: _check_include_keyword,
    ConstraintType.EXCLUDE_KEYWORD: _check_exclude_keyword,
    ConstraintType.KEYWORD_FREQUENCY: _check_keyword_frequency,
    ConstraintType.FIXED_RESPONSES: _check_fixed_responses,
    ConstraintType.LANGUAGE_RESTRICTION: _make_language_checker(detect_language),
}


def verify(
    tool: Union[ToolInstance, ContentTool],
    response: str,
    *,
    language_detector: Optional[Callable[[str], str]] = None,
) -> Verdict:
    """Run one tool against a response and produce a verdict.

    Deterministic tools never touch the network; content tools call their
    bound classifier. Raises UnsupportedType when no checker is registered
    for the tool's type.
    """
    if isinstance(tool, ContentTool):
        return _verify_content(tool, response)
    checker = CHECKERS.get(tool.spec.type)
    if checker is None:
        raise UnsupportedType(tool.spec.type.value)
    if tool.spec.type is ConstraintType.LANGUAGE_RESTRICTION and language_detector:
        checker = _make_language_checker(language_detector)
    ok, observed, error, direction, evidence = checker(tool.spec, response)
    if ok:
        return Verdict(True, observed)
    return Verdict(
        False, observed, Feedback(tool.spec, error, direction, tuple(evidence))
    )


def _verify_content(tool: ContentTool, response: str) -> Verdict:
    observed = tool.classifier(tool.spec.kind, response)
    if observed == tool.spec.label:
        return Verdict(True, observed)
    if tool.spec.kind == "sentiment":
        error = f"The sentiment of the text is '{observed}', which does not match the required sentiment '{tool.spec.label}'."
        direction = f"Please adjust the sentiment of the text to be more '{tool.spec.label}'."
    else:
        error = f"The detected topic of the response is {observed}, which does not match the expected topic {tool.spec.label}."
        direction = f"Please adjust the content to align more closely with the topic {tool.spec.label}."
    return Verdict(False, observed, Feedback(tool.spec, error, direction))


def verify_all(
    toolset: Sequence[Union[ToolInstance, ContentTool]],
    response: str,
    *,
    language_detector: Optional[Callable[[str], str]] = None,
) -> list[Verdict]:
    """Run every tool, in order, with no short-circuiting."""
    verdicts = []
    for idx, tool in enumerate(toolset):
        try:
            verdicts.append(verify(tool, response, language_detector=language_detector))
        except UnsupportedType as exc:
            raise UnsupportedType(f"tool {idx}: {exc.args[0]}") from exc
    return verdicts


def render_feedback(verdict: Verdict) -> str:
    """The feedback message for an unsatisfied verdict: error then direction."""
    if verdict.satisfied:
        raise NotApplicable("satisfied verdicts have no feedback to render")
    fb = verdict.feedback
    return f"{fb.error_description} {fb.direction}"
