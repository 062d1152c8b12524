"""Complex-instruction synthesis: rewrite seed instructions, sample
conflict-free constraint sets per difficulty level, render natural-language
instructions with diversified phrasings, and attach ground-truth specs.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

from .constraints import (
    ComparisonMode,
    ConstraintSpec,
    ConstraintType,
    fixed_responses_spec,
    pairwise_conflict_free,
)
from .verifiers import ContentSpec


class MissingTemplate(KeyError):
    """A constraint type has no phrasing templates."""


class DatasetError(ValueError):
    """A dataset line failed validation."""


@dataclass(frozen=True)
class Instruction:
    """A rendered instruction with its ground-truth constraint set."""

    id: str
    text: str
    level: int
    seed: str
    ground_truth: tuple = ()

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "level": self.level,
            "seed": self.seed,
            "instruction": self.text,
            "ground_truth": [spec.to_json() for spec in self.ground_truth],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Instruction":
        specs = []
        for item in obj.get("ground_truth", []):
            if item.get("type") in ("topic", "sentiment"):
                specs.append(ContentSpec.from_json(item))
            else:
                specs.append(ConstraintSpec.from_json(item))
        return cls(
            id=obj["id"],
            text=obj["instruction"],
            level=int(obj["level"]),
            seed=obj.get("seed", ""),
            ground_truth=tuple(specs),
        )


@dataclass(frozen=True)
class PhrasingTemplate:
    """One way of phrasing a constraint type, with parameter slots."""

    type: ConstraintType
    text: str

    @property
    def slots(self) -> frozenset[str]:
        return frozenset(re.findall(r"\{(\w+)\}", self.text))


_COMPARISON_PHRASES = {
    ComparisonMode.AT_LEAST: "at least",
    ComparisonMode.LESS_THAN: "less than",
}

LANGUAGE_NAMES = {
    "en": "English",
    "de": "German",
    "it": "Italian",
    "fr": "French",
    "es": "Spanish",
    "pt": "Portuguese",
    "ja": "Japanese",
    "zh": "Chinese",
    "ko": "Korean",
    "ru": "Russian",
}

# Eight phrasings per constraint type. The first entries follow the wording
# that instruction-following benchmarks commonly use; the rest are
# paraphrases so rendered datasets do not collapse onto one surface form.
_TEMPLATE_BANK: dict[ConstraintType, tuple[str, ...]] = {
    ConstraintType.POSTSCRIPT: (
        "At the end of your response, please explicitly add a postscript starting with P.S.",
        "please explicitly add a note starting with P.S.",
        "At the end of your answer, explicitly add a postscript that begins with P.S.",
        "Finish your response with a postscript starting with P.S.",
        "Add a postscript beginning with P.S. after the main text.",
        "Your response must end with a note that starts with P.S.",
        "Please attach a postscript introduced by P.S. at the end.",
        "Include a postscript starting with P.S. at the bottom of your response.",
    ),
    ConstraintType.PLACEHOLDER: (
        "make sure it contains {cmp} {n} placeholders represented by square brackets, such as [name].",
        "Your answer must have {cmp} {n} placeholders, wrapped in square brackets, such as [author].",
        "Use square brackets for placeholders, like [username1], [username2]. Please include {cmp} {n} placeholders in the response.",
        "Make sure to include {cmp} {n} placeholder represented by square brackets, such as [address], [name].",
        "The response must contain {cmp} {n} placeholders in square brackets, for example [city].",
        "Include {cmp} {n} bracketed placeholders such as [date] in your answer.",
        "Your reply should feature {cmp} {n} placeholders written inside square brackets, like [item].",
        "Insert {cmp} {n} placeholders denoted by square brackets, e.g. [title], into the response.",
    ),
    ConstraintType.INCLUDE_KEYWORD: (
        "Make sure to include the words '{keyword}'.",
        "Don't forget to include the keywords {keyword}.",
        "Make sure to include the word '{keyword}'.",
        'Please also include the keywords "{keyword}" in the response.',
        "The word '{keyword}' must appear in your response.",
        "Include the term '{keyword}' somewhere in your answer.",
        "Your response has to mention the word '{keyword}'.",
        "Be sure to work the word '{keyword}' into your reply.",
    ),
    ConstraintType.EXCLUDE_KEYWORD: (
        'The word "{keyword}" should not appear in your response.',
        "The word '{keyword}' should not appear in your response.",
        "Do not use the word '{keyword}' anywhere in your answer.",
        "Your response must not contain the word '{keyword}'.",
        "Avoid the word '{keyword}' in your reply.",
        "Make sure the word '{keyword}' never appears in the response.",
        "Keep the word '{keyword}' out of your response.",
        "The term '{keyword}' is forbidden in your answer.",
    ),
    ConstraintType.LETTER_FREQUENCY: (
        "be sure the letter '{letter}' appears {cmp} {n} times in your response.",
        "In your entire response, the letter {letter} should appear {cmp} {n} times.",
        "Make sure the letter '{letter}' shows up {cmp} {n} times in your answer.",
        "The letter '{letter}' must occur {cmp} {n} times in the response.",
        "Use the letter '{letter}' {cmp} {n} times across your reply.",
        "Across the whole response, the letter '{letter}' has to appear {cmp} {n} times.",
        "Check that the letter '{letter}' appears {cmp} {n} times in what you write.",
        "Your response should contain the letter '{letter}' {cmp} {n} times.",
    ),
    ConstraintType.KEYWORD_FREQUENCY: (
        'Mention the word "{keyword}" for {cmp} {n} times.',
        "The word '{keyword}' should appear {cmp} {n} times in your response.",
        "Use the word '{keyword}' {cmp} {n} times.",
        "Make sure the word '{keyword}' occurs {cmp} {n} times in your answer.",
        "Your reply must mention '{keyword}' {cmp} {n} times.",
        "Include the word '{keyword}' {cmp} {n} times in the response.",
        "The term '{keyword}' needs to show up {cmp} {n} times.",
        "Repeat the word '{keyword}' {cmp} {n} times across your response.",
    ),
    ConstraintType.SENTENCE_COUNT: (
        "The number of sentences in your response should be {cmp} {n}.",
        "Your answer must contain {cmp} {n} sentences.",
        "Write {cmp} {n} sentences in your response.",
        "Make sure the response consists of {cmp} {n} sentences.",
        "Your reply should be made up of {cmp} {n} sentences.",
        "Keep the response to {cmp} {n} sentences.",
        "The response has to include {cmp} {n} sentences.",
        "Compose your answer using {cmp} {n} sentences.",
    ),
    ConstraintType.WORD_COUNT: (
        "make sure the response has {cmp} {n} words.",
        "The total number of words in your response should be {cmp} {n}.",
        "Your answer should contain {cmp} {n} words.",
        "Make sure your reply is {cmp} {n} words long.",
        "Use {cmp} {n} words in your response.",
        "Your response must consist of {cmp} {n} words.",
        "Keep the total word count {cmp} {n}.",
        "Write a response that contains {cmp} {n} words.",
    ),
    ConstraintType.SEPARATOR_PARAGRAPHS: (
        "Separate your response into {n} parts, where each part is separated with ***.",
        "There should be exactly {n} paragraphs in your response, separated by the markdown divider: ***.",
        "Put the response into {n} sections, separated using 3 asterisks ***.",
        "Divide your answer into exactly {n} parts, using *** on its own line between parts.",
        "Your response must have exactly {n} sections separated by ***.",
        "Structure the reply as {n} parts divided by the *** separator.",
        "Split your response into exactly {n} paragraphs with *** between them.",
        "Write the answer in {n} parts, placing *** between consecutive parts.",
    ),
    ConstraintType.BULLET_POINTS: (
        "Your answer must contain exactly {n} bullet point in Markdown using the following format:\n* Bullet point one.\n* Bullet point two.\n...",
        "Response must also contain exactly {n} bullet points in markdown format. Use * to indicate bullets, like:\n* xyz.\n* abc.\n* opq.",
        "Include exactly {n} bullet points in your response, formatted as markdown bullets like:\n* first point.",
        "Your reply should list exactly {n} markdown bullet points, each on its own line starting with * .",
        "Make sure the answer contains exactly {n} bullet points. Use * to mark each bullet.",
        "Present exactly {n} points as markdown bullets (lines starting with * ).",
        "The response must feature exactly {n} bullet points written with * markers.",
        "Format exactly {n} ideas as bullet points, one per line, using * .",
    ),
    ConstraintType.FIXED_RESPONSES: (
        "Answer with one of the following options: {options}",
        "Your entire response must be exactly one of the following phrases: {options}",
        "Reply using only one of these options: {options}",
        "Choose exactly one of the following as your whole answer: {options}",
        "Respond with precisely one of these phrases and nothing else: {options}",
        "Your answer must match one of the following options exactly: {options}",
        "Pick one of the allowed responses: {options}",
        "The only valid responses are: {options} Answer with exactly one of them.",
    ),
    ConstraintType.HIGHLIGHTED: (
        "Highlight {cmp} {n} text sections, i.e. *highlighted section*.",
        "Make sure to highlight {cmp} {n} sections in your answer with markdown, i.e. use *highlighted section*.",
        "Your response should include {cmp} {n} highlighted sections marked like *this*.",
        "Use asterisks to highlight {cmp} {n} sections, e.g. *highlighted text*.",
        "Emphasize {cmp} {n} parts of your answer using *highlighted section* markers.",
        "There must be {cmp} {n} sections wrapped in single asterisks, like *important note*.",
        "Mark {cmp} {n} passages as highlighted using the *section* style.",
        "Include {cmp} {n} highlighted segments, each written as *highlighted section*.",
    ),
    ConstraintType.JSON_FORMAT: (
        "Put your entire answer in JSON format.",
        "Your whole response must be a single valid JSON document.",
        "Format the entire reply as JSON.",
        "Output your full answer as valid JSON.",
        "The response must parse as one JSON document.",
        "Write the entire response in JSON.",
        "Respond with nothing but well-formed JSON.",
        "Wrap all of your output in a single JSON value.",
    ),
    ConstraintType.TITLE_FORMAT: (
        "Your answer must have a title contained in double angular brackets, such as <<title>>.",
        "Include a title wrapped in double angular brackets, i.e. <<title>>.",
        "the response must contain a title wrapped in double angular brackets, i.e. <<title>>.",
        "Give your response a title enclosed in double angular brackets, like <<title>>.",
        "Start with a title in double angular brackets, e.g. <<my title>>.",
        "Your reply needs a title set inside double angular brackets: <<title>>.",
        "Add a title to the answer, formatted as <<title>>.",
        "A title wrapped in << and >> must appear in your response.",
    ),
    ConstraintType.QUOTED_RESPONSE: (
        "Wrap your entire response in double quotation marks.",
        "Put the whole answer inside double quotes.",
        "Your full response must begin and end with a double quotation mark.",
        "Enclose everything you write in double quotation marks.",
        "The entire reply should be surrounded by double quotation marks.",
        "Surround your complete answer with double quotes.",
        'Your response must be one quoted passage, starting and ending with ".',
        "Deliver the whole response inside a pair of double quotation marks.",
    ),
    ConstraintType.END_PHRASE: (
        "The very end of your entire response should read exactly like: {phrase}",
        "Finish your response with this exact phrase: {phrase}",
        "Your answer must end with the exact sentence: {phrase}",
        "End your reply precisely with: {phrase}",
        "The final words of your response must be: {phrase}",
        "Conclude the response so that it ends exactly with: {phrase}",
        "Close your answer with the exact line: {phrase}",
        "Make sure the response's last sentence reads exactly: {phrase}",
    ),
    ConstraintType.NO_COMMAS: (
        "Make sure you don't use any commas.",
        "You are not allowed to use any commas in your response.",
        "There should be no commas in your reply.",
        "Do not use a single comma anywhere in the answer.",
        "Write the entire response without commas.",
        "Commas are forbidden in your response.",
        "Avoid commas completely in your reply.",
        "Your answer must be completely free of commas.",
    ),
    ConstraintType.ALL_CAPITAL: (
        "Your entire response should be in all capital letters.",
        "Write everything in uppercase letters only.",
        "The whole answer must be in capital letters, with no lowercase letters at all.",
        "Respond using only uppercase characters.",
        "Every letter in your reply must be capitalized.",
        "Your response should contain no lowercase letters whatsoever.",
        "Compose the answer entirely in capital letters.",
        "Use all caps for the entire response.",
    ),
    ConstraintType.ALL_LOWERCASE: (
        "The answer should be in all lowercase letters, with no capitalization.",
        "Your entire response should be in all lowercase letters (no capital letters whatsoever).",
        "The answer should be in all lowercase letters, with no capitalizations.",
        "Write the whole reply in lowercase only.",
        "Do not use any capital letters in your response.",
        "Everything you write must be lowercase.",
        "Respond entirely in lowercase characters.",
        "Your answer must contain no uppercase letters at all.",
    ),
    ConstraintType.CAPITAL_WORD_FREQUENCY: (
        "make sure that words with all capital letters appear {cmp} {n} times.",
        "Words written in all capital letters should appear {cmp} {n} times in your response.",
        "Use fully capitalized words {cmp} {n} times.",
        "Your reply must contain {cmp} {n} words in all caps.",
        "Ensure that all-uppercase words occur {cmp} {n} times.",
        "The number of words in all capital letters should be {cmp} {n}.",
        "Include stress words in full capitals {cmp} {n} times.",
        "All-caps words must show up {cmp} {n} times in the answer.",
    ),
    ConstraintType.LANGUAGE_RESTRICTION: (
        "Your entire response should be written in {language}.",
        "Respond only in {language}.",
        "Write your whole answer in {language}.",
        "The response must be in {language}, no other language is allowed.",
        "Please reply entirely in {language}.",
        "Compose the full response in {language}.",
        "Answer using the {language} language only.",
        "Every sentence of your reply must be in {language}.",
    ),
}

TEMPLATE_BANK: dict[ConstraintType, tuple[PhrasingTemplate, ...]] = {
    t: tuple(PhrasingTemplate(t, text) for text in texts)
    for t, texts in _TEMPLATE_BANK.items()
}

# Keyword pools keyed by a topic stem looked up in the seed text.
TOPIC_KEYWORDS: dict[str, tuple[str, ...]] = {
    "food": ("ingredients", "flavor", "recipes", "cooking", "spices", "kitchen"),
    "dining": ("reservations", "menu", "service", "cuisine", "dessert"),
    "sport": ("games", "training", "athletes", "teamwork", "stadium"),
    "tech": ("innovation", "software", "devices", "networks", "automation"),
    "scien": ("research", "mutations", "experiments", "discovery", "laboratory"),
    "cultur": ("traditions", "heritage", "festivals", "customs", "community"),
    "film": ("director", "screenplay", "cinema", "actors", "premiere"),
    "tv": ("series", "episodes", "broadcast", "viewers", "channel"),
    "music": ("melody", "rhythm", "concert", "albums", "harmony"),
    "art": ("gallery", "painting", "sculpture", "creativity", "exhibition"),
    "travel": ("journey", "destinations", "luggage", "passport", "adventure"),
    "entrepreneur": ("risk-taking", "startup", "investors", "venture", "founders"),
    "celebrit": ("fame", "interviews", "premieres", "fans", "spotlight"),
    "nature": ("wildlife", "forests", "rivers", "seasons", "habitat"),
    "health": ("exercise", "nutrition", "sleep", "wellness", "habits"),
    "history": ("archives", "empires", "artifacts", "chronicles", "heritage"),
    "fashion": ("fabric", "runway", "designers", "trends", "tailoring"),
    "education": ("students", "lessons", "curiosity", "teachers", "practice"),
    "finance": ("savings", "budget", "markets", "investment", "interest"),
    "gam": ("players", "levels", "strategy", "consoles", "quests"),
}

DEFAULT_KEYWORDS: tuple[str, ...] = (
    "quality",
    "balance",
    "details",
    "progress",
    "insight",
    "moments",
    "purpose",
    "context",
)

END_PHRASES: tuple[str, ...] = (
    "Is there anything else I can help with?",
    "Hope this helps.",
    "Let me know if you need more details.",
    "That is all.",
    "Thanks for reading.",
)

OPTION_SETS: tuple[tuple[str, ...], ...] = (
    ("My answer is yes.", "My answer is no.", "My answer is maybe."),
    ("Yes.", "No.", "Maybe."),
    ("I agree.", "I disagree.", "I am not sure."),
)

# Letters common enough that frequency targets stay satisfiable.
LETTER_POOL = "aeilmnorst"

_REWRITE_RE = re.compile(r"\b(?:paragraphs?|sentences?)\b", re.IGNORECASE)


def rewrite_seed(seed: str) -> str:
    """Neutralize hidden length constraints in a seed instruction by
    replacing the words "paragraph(s)" and "sentence(s)" with "text"."""
    return _REWRITE_RE.sub("text", seed)


def keywords_for_seed(seed: str) -> tuple[str, ...]:
    """The keyword pool linked to a seed's topic, plus generic fallbacks."""
    lowered = seed.casefold()
    for stem, words in TOPIC_KEYWORDS.items():
        if stem in lowered:
            return words + DEFAULT_KEYWORDS
    return DEFAULT_KEYWORDS


def _draw_spec(
    ctype: ConstraintType,
    rng: random.Random,
    keyword_pool: Sequence[str],
    used_keywords: set[str],
) -> ConstraintSpec:
    def pick_keyword() -> str:
        available = [k for k in keyword_pool if k not in used_keywords]
        if not available:
            available = list(keyword_pool)
        choice = rng.choice(available)
        used_keywords.add(choice)
        return choice

    def threshold(at_least_range, less_than_range) -> tuple[ComparisonMode, int]:
        if rng.random() < 0.5:
            return ComparisonMode.AT_LEAST, rng.randint(*at_least_range)
        return ComparisonMode.LESS_THAN, rng.randint(*less_than_range)

    if ctype is ConstraintType.WORD_COUNT:
        cmp, n = threshold((20, 80), (40, 120))
        return ConstraintSpec(ctype, cmp, n)
    if ctype is ConstraintType.SENTENCE_COUNT:
        cmp, n = threshold((2, 8), (3, 10))
        return ConstraintSpec(ctype, cmp, n)
    if ctype is ConstraintType.SEPARATOR_PARAGRAPHS:
        return ConstraintSpec(ctype, ComparisonMode.EXACTLY, rng.randint(2, 5))
    if ctype is ConstraintType.BULLET_POINTS:
        return ConstraintSpec(ctype, ComparisonMode.EXACTLY, rng.randint(2, 6))
    if ctype is ConstraintType.PLACEHOLDER:
        cmp, n = threshold((1, 4), (2, 5))
        return ConstraintSpec(ctype, cmp, n)
    if ctype is ConstraintType.HIGHLIGHTED:
        cmp, n = threshold((1, 4), (2, 5))
        return ConstraintSpec(ctype, cmp, n)
    if ctype is ConstraintType.LETTER_FREQUENCY:
        cmp, n = threshold((1, 10), (3, 10))
        return ConstraintSpec(ctype, cmp, n, text_param=rng.choice(LETTER_POOL))
    if ctype is ConstraintType.KEYWORD_FREQUENCY:
        cmp, n = threshold((1, 5), (2, 6))
        return ConstraintSpec(ctype, cmp, n, text_param=pick_keyword())
    if ctype is ConstraintType.CAPITAL_WORD_FREQUENCY:
        cmp, n = threshold((1, 3), (2, 5))
        return ConstraintSpec(ctype, cmp, n)
    if ctype is ConstraintType.INCLUDE_KEYWORD:
        return ConstraintSpec(ctype, text_param=pick_keyword())
    if ctype is ConstraintType.EXCLUDE_KEYWORD:
        return ConstraintSpec(ctype, text_param=pick_keyword())
    if ctype is ConstraintType.END_PHRASE:
        return ConstraintSpec(ctype, text_param=rng.choice(END_PHRASES))
    if ctype is ConstraintType.LANGUAGE_RESTRICTION:
        return ConstraintSpec(ctype, text_param=rng.choice(sorted(LANGUAGE_NAMES)))
    if ctype is ConstraintType.FIXED_RESPONSES:
        return fixed_responses_spec(list(rng.choice(OPTION_SETS)))
    return ConstraintSpec(ctype)


_MAX_SAMPLE_ATTEMPTS = 1000


def sample_constraints(
    level: int,
    rng: random.Random,
    keyword_pool: Optional[Sequence[str]] = None,
) -> list[ConstraintSpec]:
    """Exactly `level` specs with distinct types and no pairwise conflicts.

    Conflicting draws are rejected and resampled, so the result is
    deterministic for a given rng state.
    """
    if not 1 <= level <= 6:
        raise ValueError(f"level must be 1..6, got {level}")
    pool = list(ConstraintType)
    if level >= 2:
        # An exact-answer requirement is incompatible with everything else.
        pool.remove(ConstraintType.FIXED_RESPONSES)
    keyword_pool = list(keyword_pool or DEFAULT_KEYWORDS)
    for _ in range(_MAX_SAMPLE_ATTEMPTS):
        used_keywords: set[str] = set()
        chosen = rng.sample(pool, level)
        specs = [_draw_spec(t, rng, keyword_pool, used_keywords) for t in chosen]
        if pairwise_conflict_free(specs):
            return specs
    raise RuntimeError(f"could not sample a conflict-free level-{level} set")


def _fill_template(template: PhrasingTemplate, spec: ConstraintSpec) -> str:
    values: dict[str, str] = {}
    if "cmp" in template.slots:
        values["cmp"] = _COMPARISON_PHRASES[spec.comparison]
    if "n" in template.slots:
        values["n"] = str(spec.int_param)
    if "keyword" in template.slots:
        values["keyword"] = spec.text_param
    if "letter" in template.slots:
        values["letter"] = spec.text_param
    if "phrase" in template.slots:
        values["phrase"] = spec.text_param
    if "language" in template.slots:
        values["language"] = LANGUAGE_NAMES[spec.text_param]
    if "options" in template.slots:
        values["options"] = " ".join(spec.options)
    return template.text.format(**values)


def render_instruction(
    seed: str,
    specs: Sequence[ConstraintSpec],
    rng: random.Random,
    instruction_id: str = "",
) -> Instruction:
    """Rewrite the seed, then append one randomly chosen phrasing per spec."""
    parts = [rewrite_seed(seed).strip()]
    for spec in specs:
        bank = TEMPLATE_BANK.get(spec.type)
        if not bank:
            raise MissingTemplate(spec.type.value)
        parts.append(_fill_template(rng.choice(bank), spec))
    return Instruction(
        id=instruction_id,
        text=" ".join(p for p in parts if p),
        level=len(specs),
        seed=seed,
        ground_truth=tuple(specs),
    )


def validate_instruction(instr: Instruction) -> None:
    """Raise DatasetError unless the instruction meets every invariant."""
    if not 1 <= instr.level <= 6:
        raise DatasetError(f"{instr.id}: level {instr.level} out of range")
    if len(instr.ground_truth) != instr.level:
        raise DatasetError(
            f"{instr.id}: {len(instr.ground_truth)} constraints for level {instr.level}"
        )
    deterministic = [s for s in instr.ground_truth if isinstance(s, ConstraintSpec)]
    types = [s.type for s in deterministic]
    if len(set(types)) != len(types):
        raise DatasetError(f"{instr.id}: duplicate constraint types")
    if not pairwise_conflict_free(deterministic):
        raise DatasetError(f"{instr.id}: conflicting constraints")
    if not instr.text.strip():
        raise DatasetError(f"{instr.id}: empty instruction text")


def load_seeds(path: Union[str, Path]) -> list[str]:
    """Plain-text seed file, one seed instruction per line."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    seeds = [line.strip() for line in lines if line.strip()]
    if not seeds:
        raise DatasetError(f"no seeds found in {path}")
    return seeds


def default_seeds_path() -> Path:
    return Path(__file__).parent / "data" / "seeds.txt"


def build_dataset(
    seeds_path: Union[str, Path],
    out_path: Union[str, Path],
    per_level: int = 1000,
    seed: int = 0,
    levels: Sequence[int] = (1, 2, 3, 4, 5, 6),
) -> int:
    """Write a JSONL dataset of synthesized instructions; returns line count.

    The build is a pure function of the seed: regeneration with the same
    arguments produces a byte-identical file.
    """
    seeds = load_seeds(seeds_path)
    rng = random.Random(seed)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with out_path.open("w", encoding="utf-8", newline="\n") as fh:
        for level in levels:
            for i in range(per_level):
                seed_text = rng.choice(seeds)
                specs = sample_constraints(level, rng, keywords_for_seed(seed_text))
                instr = render_instruction(
                    seed_text, specs, rng, instruction_id=f"L{level}-{i:04d}"
                )
                validate_instruction(instr)
                fh.write(json.dumps(instr.to_json(), ensure_ascii=False) + "\n")
                count += 1
    return count


def load_dataset(path: Union[str, Path], validate: bool = True) -> list[Instruction]:
    instructions = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                instr = Instruction.from_json(json.loads(line))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise DatasetError(f"{path}:{lineno}: {exc}") from exc
            if validate:
                validate_instruction(instr)
            instructions.append(instr)
    return instructions
