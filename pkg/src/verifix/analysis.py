"""Deterministic text primitives the verifiers build on.

Every function here is a pure function of its inputs. The rules are
deliberately simple and stated exactly, so an independent brute-force
implementation can reproduce them.
"""

from __future__ import annotations

import re
import string
import unicodedata
from dataclasses import dataclass
from typing import Callable, Optional


@dataclass(frozen=True)
class Span:
    """A substring located by byte offsets: text == source[start:end]."""

    start: int
    end: int
    text: str

    def __post_init__(self) -> None:
        if not (0 <= self.start <= self.end):
            raise ValueError(f"invalid span bounds [{self.start}, {self.end})")


def _span(source: str, start: int, end: int) -> Span:
    return Span(start, end, source[start:end])


def count_words(text: str) -> int:
    """Number of whitespace-delimited tokens containing an alphanumeric.

    Bare markup tokens like "***" or "--" do not count, so format markers
    never inflate length measurements.
    """
    return sum(1 for tok in text.split() if any(c.isalnum() for c in tok))


_TERMINATORS = ".!?"


def split_sentences(text: str) -> list[Span]:
    """Split into sentence spans.

    A sentence ends at a run of '.', '!', '?' that is followed by whitespace
    or end-of-text; the run belongs to the sentence it closes ("?!" closes
    one sentence). Trailing text without a terminator is one sentence.
    Empty segments are dropped and spans are trimmed of edge whitespace.
    """
    spans: list[Span] = []
    n = len(text)
    seg_start = 0
    i = 0
    while i < n:
        if text[i] in _TERMINATORS:
            j = i
            while j < n and text[j] in _TERMINATORS:
                j += 1
            if j >= n or text[j].isspace():
                spans.extend(_trimmed(text, seg_start, j))
                seg_start = j
                i = j
                continue
            i = j
        else:
            i += 1
    spans.extend(_trimmed(text, seg_start, n))
    return spans


def _trimmed(source: str, start: int, end: int) -> list[Span]:
    """A single trimmed span for [start, end), or nothing if blank."""
    while start < end and source[start].isspace():
        start += 1
    while end > start and source[end - 1].isspace():
        end -= 1
    return [_span(source, start, end)] if end > start else []


def _iter_lines(text: str):
    """Yield (line_start_offset, line_text) pairs without the newline."""
    offset = 0
    for line in text.split("\n"):
        yield offset, line
        offset += len(line) + 1


def split_paragraphs(text: str) -> list[Span]:
    """Split on lines whose trimmed content is exactly "***".

    Returns trimmed, nonempty parts; an inline "***" does not split.
    """
    parts: list[Span] = []
    part_start = 0
    for offset, line in _iter_lines(text):
        if line.strip() == "***":
            parts.extend(_trimmed(text, part_start, offset))
            part_start = offset + len(line) + 1
    parts.extend(_trimmed(text, min(part_start, len(text)), len(text)))
    return parts


def parse_bullets(text: str) -> list[Span]:
    """One span per line that, after left-trim, starts with "* ".

    A single asterisk followed by a space marks a bullet; "**" does not.
    """
    spans = []
    for offset, line in _iter_lines(text):
        stripped = line.lstrip()
        if stripped.startswith("* "):
            start = offset + (len(line) - len(stripped))
            spans.append(_span(text, start, offset + len(line)))
    return spans


_PLACEHOLDER_RE = re.compile(r"\[[^\[\]]+\]")


def find_placeholders(text: str) -> list[Span]:
    """Non-overlapping "[...]" pairs with nonempty, bracket-free interiors."""
    return [_span(text, m.start(), m.end()) for m in _PLACEHOLDER_RE.finditer(text)]


def find_highlights(text: str) -> list[Span]:
    """Non-overlapping single-line "*...*" pairs with nonempty interiors.

    An asterisk adjacent to another asterisk never opens or closes a
    highlight, and the marker of a bullet line is not a highlight delimiter.
    """
    spans: list[Span] = []
    for offset, line in _iter_lines(text):
        stars = [
            i
            for i, ch in enumerate(line)
            if ch == "*"
            and (i == 0 or line[i - 1] != "*")
            and (i + 1 == len(line) or line[i + 1] != "*")
        ]
        stripped = line.lstrip()
        if stripped.startswith("* "):
            marker = len(line) - len(stripped)
            stars = [i for i in stars if i != marker]
        k = 0
        while k + 1 < len(stars):
            a, b = stars[k], stars[k + 1]
            if b > a + 1:
                spans.append(_span(text, offset + a, offset + b + 1))
                k += 2
            else:
                k += 1
    return spans


_TITLE_RE = re.compile(r"<<(.+?)>>", re.DOTALL)


def find_title(text: str) -> Optional[Span]:
    """First "<<...>>" with a nonempty interior, or None."""
    m = _TITLE_RE.search(text)
    return _span(text, m.start(), m.end()) if m else None


def count_letter(text: str, letter: str, case_sensitive: bool = False) -> int:
    """Occurrences of a single alphabetic character, case-insensitive by default."""
    if len(letter) != 1 or not letter.isalpha():
        raise ValueError(f"letter must be a single alphabetic character, got {letter!r}")
    if case_sensitive:
        return text.count(letter)
    folded = letter.casefold()
    return sum(1 for c in text if c.casefold() == folded)


def find_keyword(text: str, keyword: str) -> list[Span]:
    """Case-insensitive whole-word occurrences of a keyword, as spans.

    A word boundary is a non-alphanumeric character or the text edge;
    multiword keywords match as contiguous token sequences separated by
    any whitespace.
    """
    if not keyword:
        raise ValueError("keyword must be nonempty")
    pattern = re.compile(
        r"\s+".join(re.escape(tok) for tok in keyword.split()), re.IGNORECASE
    )
    spans = []
    for m in pattern.finditer(text):
        before = text[m.start() - 1] if m.start() > 0 else ""
        after = text[m.end()] if m.end() < len(text) else ""
        if (not before or not before.isalnum()) and (not after or not after.isalnum()):
            spans.append(_span(text, m.start(), m.end()))
    return spans


def count_keyword(text: str, keyword: str) -> int:
    """Number of whole-word occurrences of a keyword (see find_keyword)."""
    return len(find_keyword(text, keyword))


def count_capital_words(text: str) -> int:
    """Whitespace tokens of >=2 alphabetic characters, all uppercase.

    Surrounding punctuation is stripped before the check, so "WORD!" counts.
    """
    count = 0
    for tok in text.split():
        core = tok.strip(string.punctuation)
        if len(core) >= 2 and core.isalpha() and core.isupper():
            count += 1
    return count


_COMMA_CONTEXT = 15


def find_commas(text: str) -> list[Span]:
    """Every ',' with up to 15 characters of context either side."""
    return [
        _span(text, max(0, i - _COMMA_CONTEXT), min(len(text), i + _COMMA_CONTEXT + 1))
        for i, ch in enumerate(text)
        if ch == ","
    ]


SUPPORTED_LANGUAGES = ("en", "de", "it", "fr", "es", "pt", "ja", "zh", "ko", "ru")

# Function words with reasonable mutual exclusivity between the Latin-script
# languages; scoring is a plain hit count over lowercased word tokens.
_STOPWORDS: dict[str, frozenset[str]] = {
    "en": frozenset(
        """the and is are was were be been of to in that it for on with as at by
        this from or an have has had not but they you we he she which their there
        what about when would could should can will all more some other into only
        than then them these those its his her our your my me him us out up down
        over very just also because while where after before between both each
        any most much many such through during against own same so if do does did
        doing how why who whom being under again further once here now""".split()
    ),
    "de": frozenset(
        """der die das und ist nicht mit für auf den eine ein zu von als auch
        sich dem des bei oder wir sie er es dass wie wird werden kann können
        über nach vor aus an am um doch nur noch schon sind war waren hat haben
        hatte ich du ihr euch uns mich dich sein ihre seinem einem einen einer
        im zum zur beim durch gegen ohne unter zwischen wenn aber denn sondern
        diese dieser dieses jeder alle viele mehr sehr heute hier dort man""".split()
    ),
    "it": frozenset(
        """il lo la gli le un uno una di a da in con su per tra fra e che non
        si sono è era erano ha hanno aveva come più anche ma o se questo questa
        questi queste quello quella loro suo sua suoi sue mio mia noi voi lui
        lei io tu ci vi ne al allo alla agli alle del dello della degli delle
        nel nello nella negli nelle sul sullo sulla molto dove quando perché
        cosa tutto tutti ogni essere fare può già ancora sempre""".split()
    ),
    "fr": frozenset(
        """le la les un une des du de à dans sur pour par avec sans sous entre
        et ou mais donc car ne pas plus moins très est sont était étaient être
        avoir a ont avait je tu il elle nous vous ils elles se ce cette ces cet
        son sa ses mon ma mes ton ta tes notre votre leur leurs qui que quoi
        dont où quand comment pourquoi si oui non aussi comme tout tous toute
        toutes autre autres même déjà encore toujours ici là bien""".split()
    ),
    "es": frozenset(
        """el la los las un una unos unas de a en que y o pero no sí es son era
        eran ser estar está están fue fueron por para con sin sobre entre desde
        hasta yo tú él ella nosotros vosotros ellos ellas se su sus mi mis tu
        tus nuestro nuestra este esta estos estas ese esa esos esas lo le les
        me te nos os al del como más menos muy también cuando donde porque qué
        cómo todo todos toda todas otro otra cada ya aún siempre aquí""".split()
    ),
    "pt": frozenset(
        """o a os as um uma uns umas de do da dos das em no na nos nas que e ou
        mas não sim é são era eram ser estar está estão foi foram por para com
        sem sobre entre desde até eu tu ele ela nós vós eles elas se seu sua
        seus suas meu minha meus minhas este esta estes estas esse essa esses
        essas isso isto aquilo lhe lhes me te ao à às como mais menos muito
        também quando onde porque tudo todos toda todas outro outra cada já
        ainda sempre aqui""".split()
    ),
}

_WORD_RE = re.compile(r"[^\W\d_]+", re.UNICODE)


def _script_fractions(text: str) -> dict[str, float]:
    counts = {"latin": 0, "cyrillic": 0, "kana": 0, "cjk": 0, "hangul": 0}
    total = 0
    for ch in text:
        if not ch.isalpha():
            continue
        total += 1
        code = ord(ch)
        if 0x3040 <= code <= 0x30FF:
            counts["kana"] += 1
        elif 0x4E00 <= code <= 0x9FFF or 0x3400 <= code <= 0x4DBF:
            counts["cjk"] += 1
        elif 0xAC00 <= code <= 0xD7AF or 0x1100 <= code <= 0x11FF:
            counts["hangul"] += 1
        elif 0x0400 <= code <= 0x04FF:
            counts["cyrillic"] += 1
        elif code < 0x0250 or unicodedata.name(ch, "").startswith("LATIN"):
            counts["latin"] += 1
    if total == 0:
        return {k: 0.0 for k in counts}
    return {k: v / total for k, v in counts.items()}


def detect_language(text: str) -> str:
    """Detect the dominant language from a fixed supported set.

    Non-Latin scripts are decided by character-range statistics (any
    meaningful kana share means Japanese, otherwise CJK ideographs mean
    Chinese; Hangul means Korean; Cyrillic means Russian). Latin-script text
    is scored by stopword hits per language: the winner needs at least two
    hits and a strict lead. Returns "und" when no rule decides.
    """
    frac = _script_fractions(text)
    if frac["kana"] >= 0.05:
        return "ja"
    if frac["hangul"] >= 0.3:
        return "ko"
    if frac["cjk"] >= 0.3:
        return "zh"
    if frac["cyrillic"] >= 0.3:
        return "ru"
    if frac["latin"] < 0.5:
        return "und"
    tokens = [t.casefold() for t in _WORD_RE.findall(text)]
    if not tokens:
        return "und"
    scores = {
        lang: sum(1 for t in tokens if t in vocab) for lang, vocab in _STOPWORDS.items()
    }
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    best_lang, best = ranked[0]
    runner_up = ranked[1][1]
    if best >= 2 and best > runner_up:
        return best_lang
    return "und"


LanguageDetector = Callable[[str], str]
