"""Constraint vocabulary: the 21 checkable constraint types, their parameters,
comparison modes, conflict rules, and the parser for tool-call expressions.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from typing import Optional


class Category(str, Enum):
    KEYWORDS = "Keywords"
    LENGTH = "Length"
    DETECTABLE_CONTENT = "Detectable Content"
    DETECTABLE_FORMAT = "Detectable Format"
    CHANGE_CASES = "Change Cases"
    STARTEND = "Startend"
    PUNCTUATION = "Punctuation"
    LANGUAGE = "Language"


class ConstraintType(str, Enum):
    POSTSCRIPT = "postscript"
    PLACEHOLDER = "placeholder"
    INCLUDE_KEYWORD = "include_keyword"
    EXCLUDE_KEYWORD = "exclude_keyword"
    LETTER_FREQUENCY = "letter_frequency"
    KEYWORD_FREQUENCY = "keyword_frequency"
    SENTENCE_COUNT = "sentence_count"
    WORD_COUNT = "word_count"
    SEPARATOR_PARAGRAPHS = "separator_paragraphs"
    BULLET_POINTS = "bullet_points"
    FIXED_RESPONSES = "fixed_responses"
    HIGHLIGHTED = "highlighted"
    JSON_FORMAT = "json_format"
    TITLE_FORMAT = "title_format"
    QUOTED_RESPONSE = "quoted_response"
    END_PHRASE = "end_phrase"
    NO_COMMAS = "no_commas"
    ALL_CAPITAL = "all_capital"
    ALL_LOWERCASE = "all_lowercase"
    CAPITAL_WORD_FREQUENCY = "capital_word_frequency"
    LANGUAGE_RESTRICTION = "language_restriction"

    @property
    def category(self) -> Category:
        return TYPE_CATEGORY[self]

    @property
    def canonical_phrase(self) -> str:
        """The phrase a selection model is told to answer with for this type."""
        return CANONICAL_PHRASES[self]


TYPE_CATEGORY: dict[ConstraintType, Category] = {
    ConstraintType.INCLUDE_KEYWORD: Category.KEYWORDS,
    ConstraintType.KEYWORD_FREQUENCY: Category.KEYWORDS,
    ConstraintType.EXCLUDE_KEYWORD: Category.KEYWORDS,
    ConstraintType.LETTER_FREQUENCY: Category.KEYWORDS,
    ConstraintType.WORD_COUNT: Category.LENGTH,
    ConstraintType.SENTENCE_COUNT: Category.LENGTH,
    ConstraintType.SEPARATOR_PARAGRAPHS: Category.LENGTH,
    ConstraintType.POSTSCRIPT: Category.DETECTABLE_CONTENT,
    ConstraintType.PLACEHOLDER: Category.DETECTABLE_CONTENT,
    ConstraintType.BULLET_POINTS: Category.DETECTABLE_FORMAT,
    ConstraintType.TITLE_FORMAT: Category.DETECTABLE_FORMAT,
    ConstraintType.FIXED_RESPONSES: Category.DETECTABLE_FORMAT,
    ConstraintType.HIGHLIGHTED: Category.DETECTABLE_FORMAT,
    ConstraintType.JSON_FORMAT: Category.DETECTABLE_FORMAT,
    ConstraintType.ALL_CAPITAL: Category.CHANGE_CASES,
    ConstraintType.ALL_LOWERCASE: Category.CHANGE_CASES,
    ConstraintType.CAPITAL_WORD_FREQUENCY: Category.CHANGE_CASES,
    ConstraintType.END_PHRASE: Category.STARTEND,
    ConstraintType.QUOTED_RESPONSE: Category.STARTEND,
    ConstraintType.NO_COMMAS: Category.PUNCTUATION,
    ConstraintType.LANGUAGE_RESTRICTION: Category.LANGUAGE,
}

# Phrases a selection model must answer with, exactly (after trim/case-fold).
CANONICAL_PHRASES: dict[ConstraintType, str] = {
    ConstraintType.POSTSCRIPT: "postscript",
    ConstraintType.PLACEHOLDER: "placeholder",
    ConstraintType.INCLUDE_KEYWORD: "include keyword",
    ConstraintType.EXCLUDE_KEYWORD: "exclude keyword",
    ConstraintType.LETTER_FREQUENCY: "letter frequency",
    ConstraintType.KEYWORD_FREQUENCY: "keyword frequency",
    ConstraintType.SENTENCE_COUNT: "sentence count constraint",
    ConstraintType.WORD_COUNT: "word count constraint",
    ConstraintType.SEPARATOR_PARAGRAPHS: "*** separator",
    ConstraintType.BULLET_POINTS: "bullet points",
    ConstraintType.FIXED_RESPONSES: "fixed responses",
    ConstraintType.HIGHLIGHTED: "highlighted",
    ConstraintType.JSON_FORMAT: "json format",
    ConstraintType.TITLE_FORMAT: "title format",
    ConstraintType.QUOTED_RESPONSE: "quoted response",
    ConstraintType.END_PHRASE: "end phrase",
    ConstraintType.NO_COMMAS: "no commas",
    ConstraintType.ALL_CAPITAL: "all capital letters",
    ConstraintType.ALL_LOWERCASE: "all lowercase",
    ConstraintType.CAPITAL_WORD_FREQUENCY: "capital word frequency",
    ConstraintType.LANGUAGE_RESTRICTION: "language restriction",
}

_PHRASE_TO_TYPE = {phrase: t for t, phrase in CANONICAL_PHRASES.items()}


class ComparisonMode(str, Enum):
    AT_LEAST = "at_least"
    LESS_THAN = "less_than"
    EXACTLY = "exactly"
    NONE = "none"


# Count-style types carrying an at_least/less_than threshold.
THRESHOLD_TYPES = frozenset(
    {
        ConstraintType.LETTER_FREQUENCY,
        ConstraintType.KEYWORD_FREQUENCY,
        ConstraintType.SENTENCE_COUNT,
        ConstraintType.WORD_COUNT,
        ConstraintType.CAPITAL_WORD_FREQUENCY,
        ConstraintType.PLACEHOLDER,
        ConstraintType.HIGHLIGHTED,
    }
)

# Types requiring an exact count.
EXACT_COUNT_TYPES = frozenset(
    {ConstraintType.BULLET_POINTS, ConstraintType.SEPARATOR_PARAGRAPHS}
)

# Types whose text_param is mandatory.
TEXT_PARAM_TYPES = frozenset(
    {
        ConstraintType.INCLUDE_KEYWORD,
        ConstraintType.EXCLUDE_KEYWORD,
        ConstraintType.KEYWORD_FREQUENCY,
        ConstraintType.LETTER_FREQUENCY,
        ConstraintType.END_PHRASE,
        ConstraintType.FIXED_RESPONSES,
        ConstraintType.LANGUAGE_RESTRICTION,
    }
)


class SpecError(ValueError):
    """A ConstraintSpec violates the parameter rules of its type."""


class UnknownCategory(KeyError):
    """A free-form category string matched no canonical phrase."""


class ParseError(ValueError):
    """A tool-call expression is malformed."""


class ArityError(ParseError):
    """A tool-call expression has the wrong number of arguments."""


@dataclass(frozen=True)
class ConstraintSpec:
    """One atomic, mechanically checkable requirement on a response."""

    type: ConstraintType
    comparison: ComparisonMode = ComparisonMode.NONE
    int_param: Optional[int] = None
    text_param: Optional[str] = None

    def __post_init__(self) -> None:
        t, cmp = self.type, self.comparison
        if t in THRESHOLD_TYPES:
            if cmp not in (ComparisonMode.AT_LEAST, ComparisonMode.LESS_THAN):
                raise SpecError(f"{t.value} requires at_least or less_than, got {cmp.value}")
            if self.int_param is None or self.int_param < 0:
                raise SpecError(f"{t.value} requires a non-negative count threshold")
        elif t in EXACT_COUNT_TYPES:
            if cmp is not ComparisonMode.EXACTLY:
                raise SpecError(f"{t.value} requires an exact count, got {cmp.value}")
            if self.int_param is None or self.int_param < 0:
                raise SpecError(f"{t.value} requires a non-negative count")
        else:
            if cmp is not ComparisonMode.NONE:
                raise SpecError(f"{t.value} takes no comparison mode, got {cmp.value}")
            if self.int_param is not None:
                raise SpecError(f"{t.value} takes no count parameter")
        if t in TEXT_PARAM_TYPES:
            if not self.text_param:
                raise SpecError(f"{t.value} requires a text parameter")
        elif self.text_param is not None:
            raise SpecError(f"{t.value} takes no text parameter")
        if t is ConstraintType.LETTER_FREQUENCY:
            if len(self.text_param) != 1 or not self.text_param.isalpha():
                raise SpecError("letter_frequency requires a single alphabetic character")

    @property
    def options(self) -> list[str]:
        """Deserialized option list (fixed_responses only)."""
        if self.type is not ConstraintType.FIXED_RESPONSES:
            raise SpecError("options only apply to fixed_responses")
        return json.loads(self.text_param)

    def to_json(self) -> dict:
        return {
            "type": self.type.value,
            "comparison": self.comparison.value,
            "int_param": self.int_param,
            "text_param": self.text_param,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ConstraintSpec":
        return cls(
            type=ConstraintType(obj["type"]),
            comparison=ComparisonMode(obj.get("comparison", "none")),
            int_param=obj.get("int_param"),
            text_param=obj.get("text_param"),
        )


def fixed_responses_spec(options: list[str]) -> ConstraintSpec:
    """Build a fixed_responses spec from an option list (serialized as JSON)."""
    if not options:
        raise SpecError("fixed_responses requires at least one option")
    return ConstraintSpec(
        ConstraintType.FIXED_RESPONSES, text_param=json.dumps(list(options))
    )


def canonical_category(name: str) -> ConstraintType:
    """Map a free-form category string onto a constraint type.

    Matching is exact on the canonical phrase list after trimming and
    case-folding; anything else raises UnknownCategory so the caller can
    record a selection failure instead of guessing.
    """
    cleaned = name.strip().strip(".").strip().casefold()
    try:
        return _PHRASE_TO_TYPE[cleaned]
    except KeyError:
        raise UnknownCategory(name) from None


# Surface tool names a model emits in call expressions, mapped onto types.
SURFACE_NAMES: dict[str, ConstraintType] = {
    "bullet_points": ConstraintType.BULLET_POINTS,
    "keywords": ConstraintType.INCLUDE_KEYWORD,
    "capitalwords": ConstraintType.CAPITAL_WORD_FREQUENCY,
    "word_count": ConstraintType.WORD_COUNT,
    "sentence_count": ConstraintType.SENTENCE_COUNT,
    "paragraphs": ConstraintType.SEPARATOR_PARAGRAPHS,
    "letter_freq": ConstraintType.LETTER_FREQUENCY,
    "title": ConstraintType.TITLE_FORMAT,
    "placeholders": ConstraintType.PLACEHOLDER,
    "highlights": ConstraintType.HIGHLIGHTED,
    "json": ConstraintType.JSON_FORMAT,
    "quoted": ConstraintType.QUOTED_RESPONSE,
    "end_phrase": ConstraintType.END_PHRASE,
    "no_commas": ConstraintType.NO_COMMAS,
    "uppercase": ConstraintType.ALL_CAPITAL,
    "lowercase": ConstraintType.ALL_LOWERCASE,
    "postscript": ConstraintType.POSTSCRIPT,
    "language": ConstraintType.LANGUAGE_RESTRICTION,
    "options": ConstraintType.FIXED_RESPONSES,
    "keyword_freq": ConstraintType.KEYWORD_FREQUENCY,
    "exclude_keyword": ConstraintType.EXCLUDE_KEYWORD,
}

_TYPE_TO_SURFACE = {
    ConstraintType.BULLET_POINTS: "Bullet_points",
    ConstraintType.INCLUDE_KEYWORD: "Keywords",
    ConstraintType.CAPITAL_WORD_FREQUENCY: "Capitalwords",
    ConstraintType.WORD_COUNT: "Word_count",
    ConstraintType.SENTENCE_COUNT: "Sentence_count",
    ConstraintType.SEPARATOR_PARAGRAPHS: "Paragraphs",
    ConstraintType.LETTER_FREQUENCY: "Letter_freq",
    ConstraintType.TITLE_FORMAT: "Title",
    ConstraintType.PLACEHOLDER: "Placeholders",
    ConstraintType.HIGHLIGHTED: "Highlights",
    ConstraintType.JSON_FORMAT: "Json",
    ConstraintType.QUOTED_RESPONSE: "Quoted",
    ConstraintType.END_PHRASE: "End_phrase",
    ConstraintType.NO_COMMAS: "No_commas",
    ConstraintType.ALL_CAPITAL: "Uppercase",
    ConstraintType.ALL_LOWERCASE: "Lowercase",
    ConstraintType.POSTSCRIPT: "Postscript",
    ConstraintType.LANGUAGE_RESTRICTION: "Language",
    ConstraintType.FIXED_RESPONSES: "Options",
    ConstraintType.KEYWORD_FREQUENCY: "Keyword_freq",
    ConstraintType.EXCLUDE_KEYWORD: "Exclude_keyword",
}


def surface_name(t: ConstraintType) -> str:
    return _TYPE_TO_SURFACE[t]


_CALL_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*\((.*)\)\s*$", re.DOTALL)

_COMPARISON_TOKENS = {
    "at_least": ComparisonMode.AT_LEAST,
    "at least": ComparisonMode.AT_LEAST,
    "less_than": ComparisonMode.LESS_THAN,
    "less than": ComparisonMode.LESS_THAN,
    "fewer than": ComparisonMode.LESS_THAN,
    "exactly": ComparisonMode.EXACTLY,
}


def _split_args(body: str) -> list[str]:
    """Split a call body on top-level commas, honoring quoted strings."""
    args: list[str] = []
    buf: list[str] = []
    quote: Optional[str] = None
    for ch in body:
        if quote:
            if ch == quote:
                quote = None
            buf.append(ch)
        elif ch in "\"'":
            quote = ch
            buf.append(ch)
        elif ch == ",":
            args.append("".join(buf).strip())
            buf = []
        else:
            buf.append(ch)
    if quote:
        raise ParseError(f"unterminated quote in arguments: {body!r}")
    last = "".join(buf).strip()
    if last or args:
        args.append(last)
    if any(a == "" for a in args):
        raise ParseError(f"empty argument in {body!r}")
    return args


def _unquote(arg: str) -> str:
    if len(arg) >= 2 and arg[0] == arg[-1] and arg[0] in "\"'":
        return arg[1:-1]
    return arg


def _as_int(arg: str, expr: str) -> int:
    try:
        return int(_unquote(arg))
    except ValueError:
        raise ArityError(f"expected an integer argument in {expr!r}, got {arg!r}") from None


def _as_comparison(arg: str, expr: str) -> ComparisonMode:
    token = _unquote(arg).strip().casefold().replace("-", " ")
    if token in _COMPARISON_TOKENS:
        return _COMPARISON_TOKENS[token]
    raise ArityError(f"expected a comparison mode in {expr!r}, got {arg!r}")


def parse_tool_expression(text: str):
    """Parse a call-style expression like ``Bullet_points(4)`` into a tool.

    Accepts the surface names a selection model emits (case-insensitive) and
    returns a bound ToolInstance. Raises ParseError for malformed expressions
    and ArityError when the argument count does not fit the type.
    """
    from .verifiers import instantiate

    m = _CALL_RE.match(text)
    if not m:
        raise ParseError(f"not a tool-call expression: {text!r}")
    name, body = m.group(1), m.group(2)
    ctype = SURFACE_NAMES.get(name.casefold())
    if ctype is None:
        raise ParseError(f"unknown tool name: {name!r}")
    args = _split_args(body)

    def need(n: int) -> None:
        if len(args) != n:
            raise ArityError(
                f"{name} expects {n} argument(s), got {len(args)} in {text!r}"
            )

    if ctype in EXACT_COUNT_TYPES:
        need(1)
        spec = ConstraintSpec(ctype, ComparisonMode.EXACTLY, _as_int(args[0], text))
    elif ctype in (
        ConstraintType.WORD_COUNT,
        ConstraintType.SENTENCE_COUNT,
        ConstraintType.CAPITAL_WORD_FREQUENCY,
        ConstraintType.PLACEHOLDER,
        ConstraintType.HIGHLIGHTED,
    ):
        need(2)
        spec = ConstraintSpec(ctype, _as_comparison(args[0], text), _as_int(args[1], text))
    elif ctype in (ConstraintType.LETTER_FREQUENCY, ConstraintType.KEYWORD_FREQUENCY):
        need(3)
        spec = ConstraintSpec(
            ctype,
            _as_comparison(args[1], text),
            _as_int(args[2], text),
            text_param=_unquote(args[0]),
        )
    elif ctype in (
        ConstraintType.INCLUDE_KEYWORD,
        ConstraintType.EXCLUDE_KEYWORD,
        ConstraintType.END_PHRASE,
        ConstraintType.LANGUAGE_RESTRICTION,
    ):
        need(1)
        spec = ConstraintSpec(ctype, text_param=_unquote(args[0]))
    elif ctype is ConstraintType.FIXED_RESPONSES:
        if not args:
            raise ArityError(f"Options expects at least one option in {text!r}")
        spec = fixed_responses_spec([_unquote(a) for a in args])
    else:
        need(0)
        spec = ConstraintSpec(ctype)
    try:
        return instantiate(spec)
    except SpecError as exc:
        raise ArityError(str(exc)) from exc


def _mandatory_text(spec: ConstraintSpec) -> Optional[str]:
    """Text a compliant response is forced to contain, if any."""
    if spec.type in (ConstraintType.INCLUDE_KEYWORD, ConstraintType.END_PHRASE):
        return spec.text_param
    if (
        spec.type is ConstraintType.KEYWORD_FREQUENCY
        and spec.comparison is ComparisonMode.AT_LEAST
        and spec.int_param > 0
    ):
        return spec.text_param
    return None


_JSON_INCOMPATIBLE = frozenset(
    {
        ConstraintType.BULLET_POINTS,
        ConstraintType.TITLE_FORMAT,
        ConstraintType.HIGHLIGHTED,
        ConstraintType.SEPARATOR_PARAGRAPHS,
        ConstraintType.QUOTED_RESPONSE,
        ConstraintType.END_PHRASE,
    }
)


def conflicts(a: ConstraintSpec, b: ConstraintSpec) -> bool:
    """True iff the two constraints are jointly unsatisfiable or share a type.

    The rule table is conservative: it exists to guarantee that every
    synthesized constraint set admits at least one compliant response.
    """
    return _conflicts_directed(a, b) or _conflicts_directed(b, a)


def _conflicts_directed(a: ConstraintSpec, b: ConstraintSpec) -> bool:
    from .analysis import count_keyword, count_letter, count_words

    ta, tb = a.type, b.type
    if ta == tb:
        return True
    if ta is ConstraintType.FIXED_RESPONSES:
        return True
    if ta is ConstraintType.ALL_CAPITAL and tb is ConstraintType.ALL_LOWERCASE:
        return True
    if ta is ConstraintType.JSON_FORMAT and tb in _JSON_INCOMPATIBLE:
        return True
    if ta is ConstraintType.QUOTED_RESPONSE and tb is ConstraintType.END_PHRASE:
        return True
    # A postscript marker carries capital letters by definition.
    if ta is ConstraintType.POSTSCRIPT and tb is ConstraintType.ALL_LOWERCASE:
        return True
    # Capital-word limits cannot survive forcing every word to capitals.
    if (
        ta is ConstraintType.ALL_CAPITAL
        and tb is ConstraintType.CAPITAL_WORD_FREQUENCY
        and b.comparison is ComparisonMode.LESS_THAN
    ):
        return True
    if (
        ta is ConstraintType.ALL_LOWERCASE
        and tb is ConstraintType.CAPITAL_WORD_FREQUENCY
        and b.comparison is ComparisonMode.AT_LEAST
        and b.int_param > 0
    ):
        return True
    # A mandatory phrase or keyword can force violations of the other side.
    forced = _mandatory_text(b)
    if forced is not None:
        if ta is ConstraintType.ALL_CAPITAL and any(c.islower() for c in forced):
            return True
        if ta is ConstraintType.ALL_LOWERCASE and any(c.isupper() for c in forced):
            return True
        if ta is ConstraintType.NO_COMMAS and "," in forced:
            return True
        if ta is ConstraintType.EXCLUDE_KEYWORD and count_keyword(forced, a.text_param) > 0:
            return True
        if ta is ConstraintType.LETTER_FREQUENCY and a.comparison is ComparisonMode.LESS_THAN:
            repeats = b.int_param if b.type is ConstraintType.KEYWORD_FREQUENCY else 1
            if count_letter(forced, a.text_param) * repeats >= a.int_param:
                return True
        if ta is ConstraintType.WORD_COUNT and a.comparison is ComparisonMode.LESS_THAN:
            repeats = b.int_param if b.type is ConstraintType.KEYWORD_FREQUENCY else 1
            if count_words(forced) * repeats >= a.int_param:
                return True
    return False


def pairwise_conflict_free(specs: list[ConstraintSpec]) -> bool:
    return all(
        not conflicts(specs[i], specs[j])
        for i in range(len(specs))
        for j in range(i + 1, len(specs))
    )
