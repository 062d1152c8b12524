"""Prompt templates for the loop: response generation, constraint
decomposition, tool selection, parameter filling, refinement, and the
self-review prompt used by the reflection baseline.

Templates are assembled by concatenation, never str.format, so response
texts containing braces can never corrupt a prompt.
"""

from __future__ import annotations

from dataclasses import dataclass

from .constraints import CANONICAL_PHRASES, ConstraintType

PROMPT_IDS = ("generate", "decompose", "select", "parameters", "refine", "reflect")


class MissingSlot(KeyError):
    """A required prompt slot was not provided."""


@dataclass(frozen=True)
class RefinementExample:
    """One worked refinement shown to the model as a demonstration."""

    instruction: str
    response_before: str
    constraint: str
    feedback: str
    response_after: str


# Demonstrations for initial response generation: five fixed prompt/response
# pairs, each of which satisfies its own stated constraints.
GENERATION_DEMOS: tuple[tuple[str, str], ...] = (
    (
        "Generate a text that touch on arts. make sure the response has less than 40 "
        "words. make sure it contains at least 2 placeholders represented by square "
        "brackets, such as [name]. Include a title wrapped in double angular brackets, "
        "i.e. <<title>>.",
        "<<The Beauty of Expression>>\n"
        "Art, from [name]'s perspective, transforms emotions into visual narratives. "
        "[another name]'s masterpieces illustrate this beautifully.",
    ),
    (
        "Generate sth. about celebrity or pop culture. the response must contain a "
        "title wrapped in double angular brackets, i.e. <<title>>. The answer should "
        "be in all lowercase letters, with no capitalizations. The word "
        '"entertainment" should not appear in your response. In your entire response, '
        "the letter m should appear at least 3 times. Your answer must have at least "
        "2 placeholders, wrapped in square brackets, such as [author].",
        "<<moments of fame>>\n"
        "modern fame moves fast. [celebrity] made headlines this month while "
        "[another star] amazed fans at many midnight premieres.",
    ),
    (
        "Write something about healthy cooking. Your answer must contain exactly 3 "
        "bullet points in Markdown. Use * to indicate bullets, like:\n* xyz.\n* abc.\n"
        "You are not allowed to use any commas in your response.",
        "Healthy cooking starts with fresh ingredients and simple methods.\n"
        "* Steam vegetables to keep their nutrients.\n"
        "* Choose whole grains over refined flour.\n"
        "* Season with herbs instead of extra salt.",
    ),
    (
        "Produce a short text about travel. The total number of words in your "
        "response should be at least 25. The very end of your entire response should "
        "read exactly like: Is there anything else I can help with?",
        "Travel rewards the curious with new flavors and unfamiliar streets. Pack "
        "light and plan loosely so every detour becomes part of the story rather "
        "than a problem. Is there anything else I can help with?",
    ),
    (
        "Write a brief note about teamwork. Your entire response should be in all "
        "capital letters. Make sure to include the word 'trust'.",
        "GREAT TEAMS ARE BUILT ON TRUST AND CLEAR GOALS. EVERY MEMBER LISTENS FIRST "
        "AND THEN ACTS TOGETHER.",
    ),
)

# Fallback refinement demonstrations used when the repository has nothing
# to offer for the violated constraint type (cold start).
FIXED_REFINEMENT_DEMOS: tuple[RefinementExample, ...] = (
    RefinementExample(
        instruction=(
            "I'm looking for text that explores arts or culture, can you assist? "
            "please explicitly add a note starting with P.S. There should be exactly "
            "2 paragraphs in your response, separated by the markdown divider: ***. "
            "Make sure to include at least 2 placeholder represented by square "
            "brackets, such as [address], [name]. Highlight at least 2 text sections, "
            "i.e. *highlighted section*. There should be no commas in your reply."
        ),
        response_before=(
            "Art has the power to bring people together and transcend cultural "
            "boundaries. It can evoke emotions and spark conversations that might not "
            "be possible through other means. *At the [address] museum, visitors can "
            "experience this firsthand by exploring the diverse collection of art "
            "from around the world.*\n***\nFrom paintings to sculptures to "
            "installations, each piece tells a unique story that can be interpreted "
            "in many ways. *The work of [name] is a great example of this, as it "
            "challenges viewers to think critically about the world around them.* "
            "Whether you're an art enthusiast or just looking for a new perspective, "
            "the [address] museum is a must-visit destination. P.S. Don't forget to "
            "check out the museum's events calendar for upcoming exhibitions and "
            "performances!"
        ),
        constraint="There should be no commas in your reply.",
        feedback=(
            "The response contains 4 comma(s). Here are the detected commas: "
            "( museum, visitors) (tallations, each ) ( of this, as it ) "
            "(perspective, the [address). Please remove all commas."
        ),
        response_after=(
            "Art has the power to bring people together and transcend cultural "
            "boundaries. It can evoke emotions and spark conversations that might not "
            "be possible through other means. *At the [address] museum visitors can "
            "experience this firsthand by exploring the diverse collection of art "
            "from around the world.*\n***\nFrom paintings to sculptures to "
            "installations each piece tells a unique story that can be interpreted "
            "in many ways. *The work of [name] is a great example of this as it "
            "challenges viewers to think critically about the world around them.* "
            "Whether you're an art enthusiast or just looking for a new perspective "
            "the [address] museum is a must-visit destination. P.S. Don't forget to "
            "check out the museum's events calendar for upcoming exhibitions and "
            "performances!"
        ),
    ),
    RefinementExample(
        instruction=(
            "Tell me about the benefits of morning exercise. Your answer must contain "
            "exactly 4 bullet points in Markdown. Use * to indicate bullets, like:\n"
            "* Bullet point one.\n* Bullet point two."
        ),
        response_before=(
            "Morning exercise sharpens focus for the whole day.\n"
            "* It boosts your energy before work.\n"
            "* It builds a steady routine."
        ),
        constraint="Your answer must contain exactly 4 bullet points in Markdown.",
        feedback=(
            "The response only contains 2 bullet points. 2 more bullet points "
            "should be added."
        ),
        response_after=(
            "Morning exercise sharpens focus for the whole day.\n"
            "* It boosts your energy before work.\n"
            "* It builds a steady routine.\n"
            "* It improves your mood through endorphins.\n"
            "* It frees your evenings for rest."
        ),
    ),
    RefinementExample(
        instruction=(
            "Produce a text with a focus on food. Your answer must have a title "
            "contained in double angular brackets, such as <<title>>."
        ),
        response_before=(
            "Fresh bread with ripe tomatoes makes a simple meal feel generous. "
            "A drizzle of olive oil completes it."
        ),
        constraint=(
            "Your answer must have a title contained in double angular brackets, "
            "such as <<title>>."
        ),
        feedback=(
            "The response does not contain a title wrapped in double angular "
            "brackets. Please add a title such as <<title>>."
        ),
        response_after=(
            "<<A Simple Feast>>\n"
            "Fresh bread with ripe tomatoes makes a simple meal feel generous. "
            "A drizzle of olive oil completes it."
        ),
    ),
    RefinementExample(
        instruction=(
            "Write a short post about rainy days. The answer should be in all "
            "lowercase letters, with no capitalization."
        ),
        response_before=(
            "Rainy days slow the city down. Umbrellas bloom on every corner and the "
            "streets shine like glass."
        ),
        constraint=(
            "The answer should be in all lowercase letters, with no capitalization."
        ),
        feedback=(
            "The response contains 2 uppercase letters. Please convert the entire "
            "response to all lowercase letters."
        ),
        response_after=(
            "rainy days slow the city down. umbrellas bloom on every corner and the "
            "streets shine like glass."
        ),
    ),
    RefinementExample(
        instruction=(
            "Can you provide me with some information about dining? Make sure to "
            "include the word 'reservations'."
        ),
        response_before=(
            "A good dinner out starts with picking the right place and arriving "
            "hungry. Ask the staff what they love on the menu."
        ),
        constraint="Make sure to include the word 'reservations'.",
        feedback=(
            "The keyword 'reservations' does not appear in the response. Please "
            "include the keyword 'reservations' in the response."
        ),
        response_after=(
            "A good dinner out starts with picking the right place and arriving "
            "hungry. Make reservations early and ask the staff what they love on "
            "the menu."
        ),
    ),
)

_GENERATE_HEAD = (
    "You are an AI assistant that generates responses based on given prompts.\n"
    "For each prompt, provide a response that adheres to the specified constraints.\n"
)

_DECOMPOSE_HEAD = (
    "You are an advanced assistant specializing in identifying and listing output "
    "constraints from provided instructions. The instructions typically include a "
    "task related to generating content on a specific topic and one (or multiple) "
    "format constraint(s). Your goal is to focus only on extracting and listing all "
    "the format constraints required for the output, ignoring the content-related "
    "task.\n"
)

_DECOMPOSE_DEMOS: tuple[tuple[str, tuple[str, ...]], ...] = (
    (
        "Please generate a few lines of text that touch on the topic of tv. Put your "
        "entire answer in JSON format. The word 'show' should not appear in your "
        "response. Use square brackets for placeholders, like [username1], "
        "[username2]. Please include at least 2 placeholders in the thread. You are "
        "not allowed to use any commas in your response.",
        (
            "Put your entire answer in JSON format.",
            "The word 'show' should not appear in your response.",
            "Use square brackets for placeholders, like [username1], [username2]. "
            "Please include at least 2 placeholders in the thread.",
            "You are not allowed to use any commas in your response.",
        ),
    ),
    (
        "Write a text with a technology theme. be sure the letter 'l' appears at "
        "least 7 times in your response. Your entire response should be in all "
        "lowercase letters (no capital letters whatsoever). The word \"artificial\" "
        "should not appear in your response. make sure the response has less than 82 "
        "words.",
        (
            "be sure the letter 'l' appears at least 7 times in your response.",
            "Your entire response should be in all lowercase letters (no capital "
            "letters whatsoever).",
            'The word "artificial" should not appear in your response.',
            "make sure the response has less than 82 words.",
        ),
    ),
)

_SELECT_HEAD = (
    "You will be given a list of constraints. Each constraint belongs to a specific "
    "category. Your task is to recognize and categorize each constraint. Only output "
    "the category from the following options:\n\n"
    "postscript, placeholder, include keyword, exclude keyword, letter frequency, "
    "keyword frequency, sentence count constraint, word count constraint, "
    "*** separator, bullet points, fixed responses, highlighted, JSON format, "
    "title format, quoted response, end phrase, no commas, all capital letters, "
    "all lowercase, capital word frequency, language restriction\n\n"
    "Please ensure to categorize each constraint accurately according to its "
    "description. There is definitely a valid category option for each constraint. "
    "Here are examples for each type of constraint:\n"
)

# One worked selection example per constraint type.
SELECTION_DEMOS: dict[ConstraintType, str] = {
    ConstraintType.POSTSCRIPT: (
        "At the end of your response, please explicitly add a postscript starting "
        "with P.S."
    ),
    ConstraintType.PLACEHOLDER: (
        "Make sure it contains at least 2 placeholders represented by square "
        "brackets, such as [name]."
    ),
    ConstraintType.INCLUDE_KEYWORD: "Make sure to include the word 'mutations'.",
    ConstraintType.EXCLUDE_KEYWORD: (
        'The word "artificial" should not appear in your response.'
    ),
    ConstraintType.LETTER_FREQUENCY: (
        "be sure the letter 'l' appears at least 7 times in your response."
    ),
    ConstraintType.KEYWORD_FREQUENCY: (
        'Mention the word "research" for less than 4 times.'
    ),
    ConstraintType.SENTENCE_COUNT: (
        "The number of sentences in your response should be less than 5."
    ),
    ConstraintType.WORD_COUNT: (
        "Limit the number of words you use to fewer than 65 words."
    ),
    ConstraintType.SEPARATOR_PARAGRAPHS: (
        "Separate your response into 2 parts, where each part is separated with ***."
    ),
    ConstraintType.BULLET_POINTS: (
        "Your answer must contain exactly 4 bullet points in Markdown."
    ),
    ConstraintType.FIXED_RESPONSES: (
        "Answer with one of the following options: My answer is yes. My answer is "
        "no. My answer is maybe."
    ),
    ConstraintType.HIGHLIGHTED: (
        "Highlight at least 3 text sections, i.e. *highlighted section*."
    ),
    ConstraintType.JSON_FORMAT: "Put your entire answer in JSON format.",
    ConstraintType.TITLE_FORMAT: (
        "Your answer must have a title contained in double angular brackets, such "
        "as <<title>>."
    ),
    ConstraintType.QUOTED_RESPONSE: (
        "Wrap your entire response in double quotation marks."
    ),
    ConstraintType.END_PHRASE: (
        "The very end of your entire response should read exactly like: Is there "
        "anything else I can help with?"
    ),
    ConstraintType.NO_COMMAS: (
        "You are not allowed to use any commas in your response."
    ),
    ConstraintType.ALL_CAPITAL: (
        "Your entire response should be in all capital letters."
    ),
    ConstraintType.ALL_LOWERCASE: (
        "The answer should be in all lowercase letters, with no capitalization."
    ),
    ConstraintType.CAPITAL_WORD_FREQUENCY: (
        "Make sure that words with all capital letters appear less than 2 times."
    ),
    ConstraintType.LANGUAGE_RESTRICTION: (
        "Your entire response should be written in German."
    ),
}

_PARAMETERS_HEAD = (
    "You will be given a single output constraint and the name of the verification "
    "tool category it belongs to. Write the tool call for that constraint with its "
    "parameters filled in. Only output the tool call.\n\n"
    "The available tool calls are:\n"
    "Postscript(), Placeholders(at_least|less_than, count), Keywords(\"keyword\"), "
    "Exclude_keyword(\"keyword\"), Letter_freq(\"letter\", at_least|less_than, "
    "count), Keyword_freq(\"keyword\", at_least|less_than, count), "
    "Sentence_count(at_least|less_than, count), Word_count(at_least|less_than, "
    "count), Paragraphs(count), Bullet_points(count), Options(\"option\", ...), "
    "Highlights(at_least|less_than, count), Json(), Title(), Quoted(), "
    "End_phrase(\"phrase\"), No_commas(), Uppercase(), Lowercase(), "
    "Capitalwords(at_least|less_than, count), Language(\"code\")\n"
)

_PARAMETERS_DEMOS: tuple[tuple[str, str, str], ...] = (
    (
        "Your answer must contain exactly 4 bullet points in Markdown.",
        "bullet points",
        "Bullet_points(4)",
    ),
    (
        "Make sure to include the word 'mutations'.",
        "include keyword",
        'Keywords("mutations")',
    ),
    (
        "make sure the response has less than 82 words.",
        "word count constraint",
        "Word_count(less_than, 82)",
    ),
    (
        "be sure the letter 'l' appears at least 7 times in your response.",
        "letter frequency",
        'Letter_freq("l", at_least, 7)',
    ),
)

_REFINE_HEAD = (
    "You are an AI assistant responsible for refining a given response. Given a "
    "prompt, its original response, and the analysis of the response, your task is "
    "to modify the response according to the analysis.\n"
)

_REFLECT_HEAD = (
    "You are an AI assistant that reviews its own responses. Given a prompt and a "
    "response, check carefully whether the response satisfies every constraint in "
    "the prompt. If it does, output exactly: true. Otherwise, describe what is "
    "wrong with the response and how it should be changed.\n"
)

MAX_REFINEMENT_EXAMPLES = 8


def _require(slots: dict, *names: str) -> None:
    for name in names:
        if slots.get(name) is None:
            raise MissingSlot(name)


def _render_refinement_block(ex: RefinementExample) -> str:
    return (
        f"#Prompt: {ex.instruction}\n\n"
        f"#Original Response: {ex.response_before}\n\n"
        f"#It does not satisfy the constraint: {ex.constraint}\n\n"
        f"#Analysis: {ex.feedback}\n\n"
        f"#Modified Response: {ex.response_after}\n"
    )


def render_prompt(prompt_id: str, **slots) -> str:
    """Render one of the prompt templates with its slots filled.

    The refinement prompt interleaves up to 8 retrieved examples and falls
    back to the fixed demonstrations when none are supplied.
    """
    if prompt_id == "generate":
        _require(slots, "instruction")
        demos = "\n".join(
            f"#Prompt: {p}\n\nResponse: {r}\n" for p, r in GENERATION_DEMOS
        )
        return (
            f"{_GENERATE_HEAD}\n{demos}\n"
            f"#Prompt: {slots['instruction']}\n\nResponse:"
        )
    if prompt_id == "decompose":
        _require(slots, "instruction")
        demos = "\n".join(
            "Instruction:\n\n"
            + instruction
            + "\n\nFormat Constraints:\n\n"
            + "\n".join(f"#{i}. {c}" for i, c in enumerate(constraints, 1))
            + "\n"
            for instruction, constraints in _DECOMPOSE_DEMOS
        )
        return (
            f"{_DECOMPOSE_HEAD}\n{demos}\n"
            f"Instruction:\n\n{slots['instruction']}\n\nFormat Constraints:"
        )
    if prompt_id == "select":
        _require(slots, "constraint")
        demos = "\n".join(
            f"Prompt: {SELECTION_DEMOS[t]}\n\nCategory: {CANONICAL_PHRASES[t]}\n"
            for t in ConstraintType
        )
        return f"{_SELECT_HEAD}\n{demos}\nPrompt: {slots['constraint']}\n\nCategory:"
    if prompt_id == "parameters":
        _require(slots, "constraint", "category")
        demos = "\n".join(
            f"Constraint: {c}\nCategory: {cat}\nTool call: {call}\n"
            for c, cat, call in _PARAMETERS_DEMOS
        )
        return (
            f"{_PARAMETERS_HEAD}\n{demos}\n"
            f"Constraint: {slots['constraint']}\n"
            f"Category: {slots['category']}\nTool call:"
        )
    if prompt_id == "refine":
        _require(slots, "instruction", "response", "constraint", "feedback")
        examples = slots.get("examples") or list(FIXED_REFINEMENT_DEMOS)
        examples = examples[:MAX_REFINEMENT_EXAMPLES]
        blocks = "\n".join(_render_refinement_block(ex) for ex in examples)
        return (
            f"{_REFINE_HEAD}\n{blocks}\n"
            f"#Prompt: {slots['instruction']}\n\n"
            f"#Original Response: {slots['response']}\n\n"
            f"#It does not satisfy the constraint: {slots['constraint']}\n\n"
            f"#Analysis: {slots['feedback']}\n\n"
            f"#Modified Response:"
        )
    if prompt_id == "reflect":
        _require(slots, "instruction", "response")
        return (
            f"{_REFLECT_HEAD}\n"
            f"#Prompt: {slots['instruction']}\n\n"
            f"#Response: {slots['response']}\n\n"
            f"#Review:"
        )
    raise ValueError(f"unknown prompt id: {prompt_id!r}")
