"""Deterministic stand-ins for a chat model.

fabricate_response builds a compliant response for any conflict-free
constraint set, which lets the improving mock simulate a model whose repair
ability depends on how informative the feedback is: detailed feedback always
repairs the named constraint, naming alone repairs only the easier tiers,
and a bare boolean signal repairs only the easiest tier.
"""

from __future__ import annotations

import hashlib
import json
import random
import threading
from typing import Optional, Sequence

from .analysis import count_letter, count_words, detect_language, split_sentences
from .constraints import (
    ComparisonMode,
    ConstraintSpec,
    ConstraintType,
    ParseError,
    parse_tool_expression,
)
from .gateway import ChatReply, ChatRequest
from .orchestrator import UNKNOWN_CONSTRAINT, WHICH_CONSTRAINT_FEEDBACK
from .synthesis import Instruction
from .verifiers import ContentSpec, tool_for, verify, verify_all


class FabricationError(RuntimeError):
    """A compliant response could not be constructed for a constraint set."""


# Word pools per language, comma-free and disjoint from the keyword
# lexicons; stopword-heavy so the language detector locks on.
WORD_FILLER: dict[str, tuple[str, ...]] = {
    "en": (
        "the", "and", "with", "from", "this", "that", "is", "was", "here",
        "now", "would", "could", "about", "when", "some", "more", "other",
        "into", "only", "then", "them", "both", "under", "again", "how",
        "why", "who", "will", "had", "has", "can", "our", "your", "out",
        "over", "just", "also", "very", "down", "up",
    ),
    "de": (
        "der", "die", "das", "und", "ist", "mit", "auf", "den", "ein",
        "eine", "von", "als", "auch", "bei", "oder", "wir", "sie", "es",
        "wie", "wird", "nach", "aus", "am", "um", "nur", "noch", "schon",
        "man", "hier", "dort", "heute", "gut", "bald", "wald", "haus",
        "berg", "jahr", "zeit", "welt", "hand",
    ),
    "it": (
        "il", "lo", "gli", "le", "di", "che", "non", "sono", "per", "tra",
        "fra", "anche", "molto", "dove", "ogni", "tutto", "essere", "fare",
        "già", "ancora", "questo", "quella", "loro", "sua", "suo", "noi",
        "voi", "lui", "lei", "mare", "campo", "vita", "casa", "tempo",
    ),
    "fr": (
        "le", "les", "des", "du", "dans", "sur", "pour", "par", "avec",
        "sans", "sous", "et", "est", "sont", "très", "aussi", "comme",
        "tout", "bien", "chaque", "toujours", "ici", "même", "encore",
        "autre", "quand", "dont", "oui", "jour", "nuit", "eau", "vent",
    ),
    "es": (
        "el", "los", "las", "es", "son", "un", "con", "por", "para",
        "pero", "muy", "sin", "sobre", "este", "esta", "cada", "donde",
        "cuando", "todo", "ya", "casa", "luz", "mar", "sol", "campo",
        "viento", "tiempo", "ciudad", "camino", "cielo",
    ),
    "pt": (
        "o", "os", "as", "do", "da", "em", "não", "são", "foi", "até",
        "onde", "quando", "tudo", "muito", "também", "ainda", "sempre",
        "aqui", "isso", "isto", "já", "ele", "ela", "seu", "sua", "dos",
        "das", "uma", "num", "rio", "céu", "vida",
    ),
    "ru": (
        "это", "и", "не", "на", "что", "как", "мы", "вы", "они", "день",
        "мир", "дом", "лес", "свет", "вода", "небо", "слово", "город",
        "время", "жизнь", "рука", "земля", "путь", "ночь", "утро",
    ),
}

# Whole-sentence units for languages written without spaces.
UNIT_FILLER: dict[str, tuple[str, ...]] = {
    "ja": (
        "これはとても良い文章です",
        "今日は天気がすばらしいです",
        "新しい技術が世界を変えます",
        "私たちは毎日学び続けます",
        "この話はみんなに役立ちます",
    ),
    "zh": (
        "这是一段简单的中文文本",
        "今天天气十分晴朗",
        "科技改变未来生活",
        "我们每天都在学习新知识",
        "这个话题值得认真思考",
    ),
    "ko": (
        "이것은 한국어 문장입니다",
        "오늘은 날씨가 정말 좋습니다",
        "새로운 기술이 세상을 바꿉니다",
        "우리는 매일 배우고 있습니다",
    ),
}

CAPS_POOL = ("NOTE", "TODAY", "REALLY", "IMPORTANT", "ALWAYS", "URGENT", "FOCUS", "BOLD")
TITLE_POOL = ("Notes", "Ideas", "Story", "Vision", "Plans", "Focus", "Drift", "Humor",
              "Light", "Waves")
PLACEHOLDER_POOL = ("[name]", "[date]", "[city]", "[item]", "[user]", "[spot]",
                    "[code]", "[unit]")

_MAX_REPAIR_STEPS = 60


def _screen(words: Sequence[str], forbidden_letters: set[str]) -> list[str]:
    kept = [
        w
        for w in words
        if not any(count_letter(w, letter) for letter in forbidden_letters if letter)
    ]
    return kept or list(words)


class _Builder:
    """Mutable component state assembled into a response on demand."""

    def __init__(self, specs: Sequence[ConstraintSpec], rng: random.Random):
        self.by_type = {s.type: s for s in specs}
        self.rng = rng
        bt = self.by_type
        self.lang = (
            bt[ConstraintType.LANGUAGE_RESTRICTION].text_param
            if ConstraintType.LANGUAGE_RESTRICTION in bt
            else "en"
        )
        self.upper = ConstraintType.ALL_CAPITAL in bt
        self.lower = ConstraintType.ALL_LOWERCASE in bt
        self.json_mode = ConstraintType.JSON_FORMAT in bt
        self.quoted = ConstraintType.QUOTED_RESPONSE in bt
        self.forbidden = {
            s.text_param.casefold()
            for s in specs
            if s.type is ConstraintType.LETTER_FREQUENCY
            and s.comparison is ComparisonMode.LESS_THAN
        }
        self.unit_mode = self.lang in UNIT_FILLER
        pool = UNIT_FILLER.get(self.lang) or WORD_FILLER[self.lang]
        self.words = _screen(pool, self.forbidden)
        # component state
        self.title: Optional[str] = None
        self.bullets: list[str] = []
        self.inline: list[str] = []  # highlight/placeholder/caps/keyword lines
        self.sentence_units: list[str] = []
        self.base_units: list[str] = []
        self.pad: list[str] = []
        self.letter_token: Optional[str] = None
        self.postscript: Optional[str] = None
        self.end_phrase: Optional[str] = None
        self._build_components()

    def _word(self) -> str:
        return self.rng.choice(self.words)

    def _build_components(self) -> None:
        bt, rng = self.by_type, self.rng
        if ConstraintType.TITLE_FORMAT in bt:
            choices = _screen(TITLE_POOL, self.forbidden)
            self.title = f"<<{rng.choice(choices)}>>"
        if ConstraintType.BULLET_POINTS in bt:
            n = bt[ConstraintType.BULLET_POINTS].int_param
            self.bullets = [f"* {self._word()}" for _ in range(n)]
        if ConstraintType.HIGHLIGHTED in bt:
            spec = bt[ConstraintType.HIGHLIGHTED]
            if spec.comparison is ComparisonMode.AT_LEAST:
                marks = " ".join(f"*{self._word()}*" for _ in range(spec.int_param))
                if marks.startswith("* "):  # never look like a bullet line
                    marks = "x" + marks
                self.inline.append(marks)
        if ConstraintType.PLACEHOLDER in bt:
            spec = bt[ConstraintType.PLACEHOLDER]
            if spec.comparison is ComparisonMode.AT_LEAST:
                names = _screen(PLACEHOLDER_POOL, self.forbidden)
                self.inline.append(
                    " ".join(rng.choice(names) for _ in range(spec.int_param))
                )
        if ConstraintType.CAPITAL_WORD_FREQUENCY in bt:
            spec = bt[ConstraintType.CAPITAL_WORD_FREQUENCY]
            if spec.comparison is ComparisonMode.AT_LEAST:
                caps = _screen(CAPS_POOL, self.forbidden)
                self.inline.append(
                    " ".join(rng.choice(caps) for _ in range(spec.int_param))
                )
        for ctype in (ConstraintType.INCLUDE_KEYWORD, ConstraintType.KEYWORD_FREQUENCY):
            if ctype in bt:
                spec = bt[ctype]
                repeats = 1
                if ctype is ConstraintType.KEYWORD_FREQUENCY:
                    if spec.comparison is ComparisonMode.AT_LEAST:
                        repeats = spec.int_param
                    else:
                        repeats = 1 if spec.int_param > 1 else 0
                if repeats:
                    self.inline.append(" ".join([spec.text_param] * repeats))
        if not self.unit_mode:
            self.base_units = [f"{self._word()} {self._word()} {self._word()}."]
        else:
            self.base_units = [u + "." for u in rng.sample(self.words, 2)]
        if ConstraintType.POSTSCRIPT in bt:
            self.postscript = f"P.S. {self._word()}"
        if ConstraintType.END_PHRASE in bt:
            self.end_phrase = bt[ConstraintType.END_PHRASE].text_param
        # Drawn once so assemble() stays a pure function of builder state.
        self.spare_words = [self._word() for _ in range(12)]

    def content_lines(self) -> list[str]:
        lines: list[str] = []
        if self.title:
            lines.append(self.title)
        lines.extend(self.bullets)
        lines.extend(self.inline)
        if self.letter_token:
            lines.append(self.letter_token)
        base = list(self.base_units)
        if self.pad and base:
            # Padding joins an existing sentence; it must never add one.
            last = base[-1]
            padding = " ".join(self.pad)
            if last.endswith("."):
                base[-1] = f"{last[:-1].rstrip()} {padding}."
            else:
                base[-1] = f"{last} {padding}"
        lines.extend(base)
        lines.extend(self.sentence_units)
        if self.postscript:
            lines.append(self.postscript)
        if self.end_phrase:
            lines.append(self.end_phrase)
        return lines

    def assemble(self) -> str:
        lines = self.content_lines()
        if self.quoted and lines and lines[0].lstrip().startswith("* "):
            # The opening quote would glue onto the bullet marker.
            lines.insert(0, self.spare_words[0])
        if self.json_mode:
            body = " ".join(lines)
            body = self._apply_case(body)
            return json.dumps(body, ensure_ascii=False)
        parts_spec = self.by_type.get(ConstraintType.SEPARATOR_PARAGRAPHS)
        if parts_spec:
            n_parts = parts_spec.int_param
            fixed_tail = int(bool(self.postscript)) + int(bool(self.end_phrase))
            head = lines[: len(lines) - fixed_tail] if fixed_tail else lines
            spare = iter(self.spare_words)
            while len(head) < n_parts:
                head = head + [next(spare)]
            chunks = [list() for _ in range(n_parts)]
            for i, line in enumerate(head):
                chunks[min(i * n_parts // max(len(head), 1), n_parts - 1)].append(line)
            for chunk in chunks:
                if not chunk:
                    chunk.append(next(spare))
            if fixed_tail:
                chunks[-1].extend(lines[len(lines) - fixed_tail:])
            text = "\n***\n".join("\n".join(chunk) for chunk in chunks)
        else:
            text = "\n".join(lines)
        text = self._apply_case(text)
        if self.quoted:
            text = f'"{text}"'
        return text

    def _apply_case(self, text: str) -> str:
        if self.upper:
            return text.upper()
        if self.lower:
            return text.lower()
        return text


def fabricate_response(specs: Sequence[ConstraintSpec], rng: random.Random) -> str:
    """Construct a response satisfying every spec in a conflict-free set.

    Builds the structural skeleton first, then repairs measured quantities
    (language detection, sentence count, letter count, word count) until the
    full set verifies; raises FabricationError if it cannot.
    """
    specs = list(specs)
    for spec in specs:
        if isinstance(spec, ContentSpec):
            raise TypeError("content constraints need a live classifier, not a mock")
    if not specs:
        return "Nothing to check here."
    bt = {s.type: s for s in specs}
    if ConstraintType.FIXED_RESPONSES in bt:
        if len(specs) > 1:
            raise FabricationError("fixed_responses cannot combine with other specs")
        return rng.choice(bt[ConstraintType.FIXED_RESPONSES].options)

    b = _Builder(specs, rng)

    if ConstraintType.LANGUAGE_RESTRICTION in bt:
        for _ in range(_MAX_REPAIR_STEPS):
            if detect_language(b.assemble()) == b.lang:
                break
            if b.unit_mode:
                b.sentence_units.append(b.rng.choice(b.words) + ".")
            else:
                b.base_units.append(
                    f"{b._word()} {b._word()} {b._word()} {b._word()}."
                )

    sentence_spec = bt.get(ConstraintType.SENTENCE_COUNT)
    if sentence_spec:
        target = sentence_spec.int_param
        if sentence_spec.comparison is ComparisonMode.AT_LEAST:
            for _ in range(_MAX_REPAIR_STEPS):
                if len(split_sentences(b.assemble())) >= target:
                    break
                b.sentence_units.append(b._word() + ".")
        else:
            for _ in range(_MAX_REPAIR_STEPS):
                if len(split_sentences(b.assemble())) < target:
                    break
                if b.sentence_units:
                    b.sentence_units.pop()
                elif any("." in u for u in b.base_units):
                    b.base_units = [u.rstrip(".") for u in b.base_units]
                else:
                    break

    letter_spec = bt.get(ConstraintType.LETTER_FREQUENCY)
    if letter_spec and letter_spec.comparison is ComparisonMode.AT_LEAST:
        have = count_letter(b.assemble(), letter_spec.text_param)
        deficit = letter_spec.int_param - have
        if deficit > 0:
            b.letter_token = letter_spec.text_param * deficit

    word_spec = bt.get(ConstraintType.WORD_COUNT)
    if word_spec:
        target = word_spec.int_param
        if word_spec.comparison is ComparisonMode.AT_LEAST:
            while count_words(b.assemble()) < target:
                b.pad.append(b._word())
        else:
            for _ in range(_MAX_REPAIR_STEPS):
                if count_words(b.assemble()) < target:
                    break
                if b.pad:
                    b.pad.pop()
                elif len(b.base_units) > 1:
                    b.base_units.pop()
                elif b.base_units and count_words(b.base_units[0]) > 1:
                    tokens = b.base_units[0].rstrip(".").split()
                    b.base_units[0] = " ".join(tokens[:-1]) + "."
                else:
                    break

    response = b.assemble()
    verdicts = verify_all([tool_for(s) for s in specs], response)
    failed = [s.type.value for s, v in zip(specs, verdicts) if not v.satisfied]
    if failed:
        raise FabricationError(f"could not satisfy {failed} for {response!r}")
    return response


def _stable_int(key: str) -> int:
    return int.from_bytes(hashlib.sha256(key.encode("utf-8")).digest()[:8], "big")


def _between(text: str, start_marker: str, end_marker: str) -> Optional[str]:
    start = text.rfind(start_marker)
    if start < 0:
        return None
    start += len(start_marker)
    end = text.find(end_marker, start)
    if end < 0:
        return None
    return text[start:end]


class ImprovingMock:
    """A chat-model stand-in whose repairs depend on feedback informativeness.

    Every (instruction, constraint type) pair gets a repair tier from a
    seeded hash: tier 1 problems get fixed even from a bare boolean signal,
    tier 2 need the violated constraint named, tier 3 need detailed
    directional feedback. Initial generations satisfy a random subset of the
    ground truth, so strategies with better feedback finish more
    instructions. Thread-safe; all behavior derives from the root seed.
    """

    GENERATE_DROPS = (0, 1, 1, 2)

    def __init__(self, instructions: Sequence[Instruction], root_seed: int = 0):
        self._by_text = {instr.text: instr for instr in instructions}
        self._seed = root_seed
        self._lock = threading.Lock()
        self._generate_calls: dict[str, int] = {}
        self._sentence_map: dict[str, tuple[Instruction, ConstraintSpec]] = {}

    def chat(self, request: ChatRequest) -> ChatReply:
        prompt = request.messages[-1][1]
        if prompt.endswith("#Modified Response:"):
            return ChatReply(self._refine(prompt))
        if prompt.endswith("Response:"):
            return ChatReply(self._generate(prompt))
        if prompt.endswith("Format Constraints:"):
            return ChatReply(self._decompose(prompt))
        if prompt.endswith("Category:"):
            return ChatReply(self._select(prompt))
        if prompt.endswith("Tool call:"):
            return ChatReply(self._parameters(prompt))
        if prompt.endswith("#Review:"):
            return ChatReply("The response may not satisfy every constraint.")
        return ChatReply("I cannot help with that.")

    def _instruction_for(self, text: Optional[str]) -> Optional[Instruction]:
        if text is None:
            return None
        return self._by_text.get(text.strip())

    def _fabricate(self, instr: Instruction, specs: Sequence[ConstraintSpec]) -> str:
        key = ",".join(sorted(s.type.value for s in specs))
        rng = random.Random(f"{self._seed}:fab:{instr.id}:{key}")
        return fabricate_response(specs, rng)

    def _satisfied_specs(self, instr: Instruction, response: str) -> list[ConstraintSpec]:
        keep = []
        for spec in instr.ground_truth:
            if not isinstance(spec, ConstraintSpec):
                continue
            if verify(tool_for(spec), response).satisfied:
                keep.append(spec)
        return keep

    def _tier(self, instr: Instruction, type_id: str) -> int:
        return 1 + _stable_int(f"{self._seed}:tier:{instr.id}:{type_id}") % 3

    def _generate(self, prompt: str) -> str:
        text = _between(prompt, "#Prompt: ", "\n\nResponse:")
        instr = self._instruction_for(text)
        if instr is None:
            return "Here is a generic response."
        with self._lock:
            call_no = self._generate_calls.get(instr.id, 0) + 1
            self._generate_calls[instr.id] = call_no
        rng = random.Random(f"{self._seed}:drop:{instr.id}:{call_no}")
        specs = [s for s in instr.ground_truth if isinstance(s, ConstraintSpec)]
        k = min(rng.choice(self.GENERATE_DROPS), len(specs))
        dropped = set(rng.sample(range(len(specs)), k)) if k else set()
        subset = [s for i, s in enumerate(specs) if i not in dropped]
        return self._fabricate(instr, subset)

    def _refine(self, prompt: str) -> str:
        text = _between(prompt, "#Prompt: ", "\n\n#Original Response:")
        instr = self._instruction_for(text)
        response = _between(prompt, "#Original Response: ",
                            "\n\n#It does not satisfy the constraint:")
        label = _between(prompt, "#It does not satisfy the constraint: ",
                         "\n\n#Analysis:")
        feedback = _between(prompt, "#Analysis: ", "\n\n#Modified Response:")
        if instr is None or response is None or label is None or feedback is None:
            return response or "Sorry, I cannot refine this."
        satisfied = self._satisfied_specs(instr, response)
        target = self._target_spec(instr, response, label)
        if target is None:
            return response
        if label.strip() == UNKNOWN_CONSTRAINT:
            needed_tier = 1
        elif feedback.strip() == WHICH_CONSTRAINT_FEEDBACK:
            needed_tier = 2
        else:
            needed_tier = 3
        if self._tier(instr, target.type.value) > needed_tier:
            return response
        keep = {id(s) for s in satisfied}
        new_set = [
            s
            for s in instr.ground_truth
            if isinstance(s, ConstraintSpec) and (id(s) in keep or s == target)
        ]
        return self._fabricate(instr, new_set)

    def _target_spec(
        self, instr: Instruction, response: str, label: str
    ) -> Optional[ConstraintSpec]:
        specs = [s for s in instr.ground_truth if isinstance(s, ConstraintSpec)]
        if label.strip() != UNKNOWN_CONSTRAINT:
            try:
                tool = parse_tool_expression(label.strip())
            except (ParseError, ValueError):
                tool = None
            if tool is not None:
                for spec in specs:
                    if spec == tool.spec:
                        return spec
                for spec in specs:
                    if spec.type == tool.spec.type:
                        return spec
        # Blind repair: aim at the first failing constraint in ground-truth
        # order, mirroring the loop's own target choice.
        for spec in specs:
            if not verify(tool_for(spec), response).satisfied:
                return spec
        return None

    def _decompose(self, prompt: str) -> str:
        text = _between(prompt, "Instruction:\n\n", "\n\nFormat Constraints:")
        instr = self._instruction_for(text)
        if instr is None:
            return "No constraints found."
        from .synthesis import TEMPLATE_BANK, _fill_template

        lines = []
        for i, spec in enumerate(instr.ground_truth, 1):
            if not isinstance(spec, ConstraintSpec):
                continue
            sentence = _fill_template(TEMPLATE_BANK[spec.type][0], spec)
            with self._lock:
                self._sentence_map[sentence] = (instr, spec)
            lines.append(f"#{i}. {sentence}")
        return "\n".join(lines)

    def _select(self, prompt: str) -> str:
        sentence = _between(prompt, "Prompt: ", "\n\nCategory:")
        with self._lock:
            entry = self._sentence_map.get((sentence or "").strip())
        if entry is None:
            return "unknown"
        return entry[1].type.canonical_phrase

    def _parameters(self, prompt: str) -> str:
        sentence = _between(prompt, "Constraint: ", "\nCategory:")
        with self._lock:
            entry = self._sentence_map.get((sentence or "").strip())
        if entry is None:
            return "Unknown()"
        return tool_for(entry[1]).display_name
