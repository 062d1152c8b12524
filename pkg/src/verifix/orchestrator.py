"""The end-to-end loop: generate a response, prepare verifier tools,
verify, and refine one unsatisfied constraint at a time until everything
passes or the trial budget runs out. Also hosts the baseline strategies
and the feedback ablations.
"""

from __future__ import annotations

import hashlib
import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

from .constraints import (
    ArityError,
    ConstraintSpec,
    ParseError,
    SpecError,
    UnknownCategory,
    canonical_category,
    parse_tool_expression,
)
from .gateway import (
    ChatModel,
    GatewayError,
    clean_model_output,
    parse_decomposition,
    user_request,
)
from .prompts import RefinementExample, render_prompt
from .repository import RefinementRecord, RefinementRepository
from .synthesis import Instruction
from .verifiers import (
    ContentSpec,
    ContentTool,
    ToolInstance,
    Verdict,
    render_feedback,
    tool_for,
    verify_all,
)

STRATEGIES = (
    "vanilla",
    "reflexion",
    "rejection_sampling",
    "boolean_feedback",
    "which_constraint",
    "dvr",
)

# Feedback texts for the uninformative modes: the boolean signal hides even
# which constraint failed; the which-constraint mode names it and no more.
BOOLEAN_FEEDBACK = (
    "The response does not satisfy all constraints in the instruction. "
    "Please generate a better response."
)
WHICH_CONSTRAINT_FEEDBACK = (
    "The response does not satisfy this constraint. Please revise the "
    "response so that it satisfies the constraint."
)
UNKNOWN_CONSTRAINT = "unknown"


class ToolsetEmpty(RuntimeError):
    """No usable verifier tool could be prepared for an instruction."""


@dataclass
class RunConfig:
    """Knobs for one batch: strategy, trial budget, and the two ablations.

    The full loop uses detailed feedback and the repository; the ablation
    modes clear one or both flags while keeping the same loop shape.
    """

    strategy: str = "dvr"
    trials: int = 5
    detailed_feedback: bool = True
    use_repository: bool = True
    refine_few_shots: int = 8
    use_ground_truth_tools: bool = False
    max_rounds: Optional[int] = None
    model: str = "default"
    temperature: float = 0.8
    max_tokens: int = 1024

    def __post_init__(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.trials < 1:
            raise ValueError("trials must be positive")


@dataclass
class RunResult:
    """Outcome of one instruction run, scored by ground-truth tools."""

    instruction_id: str
    level: int
    strategy: str
    final_response: str
    constraint_types: list[str] = field(default_factory=list)
    verdicts: list[bool] = field(default_factory=list)
    satisfied_all: bool = False
    llm_calls: int = 0
    trace: list[dict] = field(default_factory=list)
    selected_types: list[str] = field(default_factory=list)
    unverified: list[str] = field(default_factory=list)
    stored_records: int = 0
    error: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "id": self.instruction_id,
            "level": self.level,
            "strategy": self.strategy,
            "final_response": self.final_response,
            "verdicts": [
                {"type": t, "satisfied": v}
                for t, v in zip(self.constraint_types, self.verdicts)
            ],
            "satisfied_all": self.satisfied_all,
            "llm_calls": self.llm_calls,
            "selected_types": self.selected_types,
            "unverified": self.unverified,
            "stored_records": self.stored_records,
            "error": self.error,
            "trace": self.trace,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RunResult":
        return cls(
            instruction_id=obj["id"],
            level=int(obj.get("level", 0)),
            strategy=obj.get("strategy", ""),
            final_response=obj.get("final_response", ""),
            constraint_types=[v["type"] for v in obj.get("verdicts", [])],
            verdicts=[bool(v["satisfied"]) for v in obj.get("verdicts", [])],
            satisfied_all=bool(obj.get("satisfied_all", False)),
            llm_calls=int(obj.get("llm_calls", 0)),
            trace=obj.get("trace", []),
            selected_types=obj.get("selected_types", []),
            unverified=obj.get("unverified", []),
            stored_records=int(obj.get("stored_records", 0)),
            error=obj.get("error"),
        )


def _text_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]


@dataclass
class ToolsetPreparation:
    toolset: list[Union[ToolInstance, ContentTool]]
    selected_types: list[str]
    unverified: list[str]
    events: list[dict]
    llm_calls: int


def prepare_toolset(
    instruction: Instruction,
    chat: ChatModel,
    *,
    model: str = "default",
    temperature: float = 0.8,
    max_tokens: int = 1024,
) -> ToolsetPreparation:
    """Decompose the instruction, select a tool per constraint, and fill
    parameters. Constraints that cannot be mapped onto a tool are recorded
    as unverified instead of guessed."""

    calls = 0

    def call(prompt: str) -> str:
        nonlocal calls
        calls += 1
        req = user_request(
            prompt, model=model, temperature=temperature, max_tokens=max_tokens
        )
        return chat.chat(req).content

    events: list[dict] = []
    toolset: list[Union[ToolInstance, ContentTool]] = []
    unverified: list[str] = []
    reply = call(render_prompt("decompose", instruction=instruction.text))
    sentences = parse_decomposition(reply)
    events.append({"event": "decompose", "round": 0, "constraints": len(sentences)})
    for sentence in sentences:
        category_raw = clean_model_output(
            call(render_prompt("select", constraint=sentence))
        )
        try:
            ctype = canonical_category(category_raw)
        except UnknownCategory:
            unverified.append(sentence)
            events.append(
                {"event": "unverified", "round": 0, "constraint": sentence,
                 "category": category_raw}
            )
            continue
        expression = clean_model_output(
            call(
                render_prompt(
                    "parameters",
                    constraint=sentence,
                    category=ctype.canonical_phrase,
                )
            )
        )
        try:
            tool = parse_tool_expression(expression)
        except (ParseError, ArityError, SpecError) as exc:
            unverified.append(sentence)
            events.append(
                {"event": "unverified", "round": 0, "constraint": sentence,
                 "category": ctype.value, "error": str(exc)}
            )
            continue
        toolset.append(tool)
        events.append(
            {"event": "select", "round": 0, "constraint": sentence,
             "tool": tool.display_name}
        )
    return ToolsetPreparation(
        toolset=toolset,
        selected_types=[t.constraint_type for t in toolset],
        unverified=unverified,
        events=events,
        llm_calls=calls,
    )


def ground_truth_toolset(
    instruction: Instruction,
    classifier: Optional[Callable[[str, str], str]] = None,
) -> list[Union[ToolInstance, ContentTool]]:
    return [tool_for(spec, classifier) for spec in instruction.ground_truth]


def _first_unsatisfied(verdicts: Sequence[Verdict]) -> Optional[int]:
    for i, verdict in enumerate(verdicts):
        if not verdict.satisfied:
            return i
    return None


def _records_to_examples(records: Sequence[RefinementRecord]) -> list[RefinementExample]:
    examples = []
    for rec in records:
        examples.append(
            RefinementExample(
                instruction=rec.instruction,
                response_before=rec.response_before,
                constraint=tool_for_record(rec).display_name,
                feedback=rec.feedback_text,
                response_after=rec.response_after,
            )
        )
    return examples


def tool_for_record(record: RefinementRecord):
    if isinstance(record.spec, ConstraintSpec):
        return tool_for(record.spec)
    return ContentTool(record.spec, classifier=lambda kind, text: "")


def run_instruction(
    instruction: Instruction,
    config: RunConfig,
    chat: ChatModel,
    *,
    repository: Optional[RefinementRepository] = None,
    classifier: Optional[Callable[[str, str], str]] = None,
    rng: Optional[random.Random] = None,
    toolset: Optional[Sequence[Union[ToolInstance, ContentTool]]] = None,
) -> RunResult:
    """Run one instruction under the configured strategy.

    Feedback comes from the supplied or LLM-prepared toolset; the final
    verdicts always come from the ground-truth tools so scoring stays
    independent of selection errors.
    """
    rng = rng or random.Random(0)
    result = RunResult(
        instruction_id=instruction.id,
        level=instruction.level,
        strategy=config.strategy,
        final_response="",
    )

    def call(prompt: str) -> str:
        result.llm_calls += 1
        req = user_request(
            prompt,
            model=config.model,
            temperature=config.temperature,
            max_tokens=config.max_tokens,
        )
        return chat.chat(req).content

    try:
        final = _run_strategy(
            instruction, config, chat, call, result, repository, classifier,
            rng, toolset,
        )
    except GatewayError as exc:
        result.error = str(exc)
        result.trace.append({"event": "error", "round": -1, "message": str(exc)})
        return result
    result.final_response = final
    score_tools = ground_truth_toolset(instruction, classifier)
    verdicts = verify_all(score_tools, final)
    result.constraint_types = [t.constraint_type for t in score_tools]
    result.verdicts = [v.satisfied for v in verdicts]
    result.satisfied_all = all(result.verdicts)
    return result


def _run_strategy(
    instruction: Instruction,
    config: RunConfig,
    chat: ChatModel,
    call: Callable[[str], str],
    result: RunResult,
    repository: Optional[RefinementRepository],
    classifier: Optional[Callable[[str, str], str]],
    rng: random.Random,
    toolset: Optional[Sequence[Union[ToolInstance, ContentTool]]],
) -> str:
    trace = result.trace

    response = call(render_prompt("generate", instruction=instruction.text))
    trace.append({"event": "generate", "round": 0, "text_hash": _text_hash(response)})

    if config.strategy == "vanilla":
        trace.append({"event": "return", "round": 0, "reason": "vanilla"})
        return response

    if config.strategy == "reflexion":
        return _run_reflexion(instruction, config, call, trace, response)

    if toolset is None:
        if config.use_ground_truth_tools:
            toolset = ground_truth_toolset(instruction, classifier)
            result.selected_types = [t.constraint_type for t in toolset]
        else:
            prep = prepare_toolset(
                instruction,
                chat,
                model=config.model,
                temperature=config.temperature,
                max_tokens=config.max_tokens,
            )
            result.llm_calls += prep.llm_calls
            result.selected_types = prep.selected_types
            result.unverified = prep.unverified
            trace.extend(prep.events)
            toolset = prep.toolset
    else:
        toolset = list(toolset)
        result.selected_types = [t.constraint_type for t in toolset]

    if not toolset:
        trace.append({"event": "toolset_empty", "round": 0})
        trace.append({"event": "return", "round": 0, "reason": "toolset_empty"})
        return response

    if config.strategy == "rejection_sampling":
        return _run_rejection(instruction, config, call, trace, response, toolset)

    return _run_refine_loop(
        instruction, config, call, trace, result, response, toolset,
        repository, rng,
    )


def _run_reflexion(instruction, config, call, trace, response: str) -> str:
    for round_no in range(1, config.trials + 1):
        review = call(
            render_prompt("reflect", instruction=instruction.text, response=response)
        )
        trace.append({"event": "reflect", "round": round_no,
                      "text_hash": _text_hash(review)})
        if clean_model_output(review).casefold().startswith("true"):
            trace.append({"event": "return", "round": round_no, "reason": "self_pass"})
            return response
        response = call(
            render_prompt(
                "refine",
                instruction=instruction.text,
                response=response,
                constraint=UNKNOWN_CONSTRAINT,
                feedback=review,
                examples=None,
            )
        )
        trace.append({"event": "refine", "round": round_no,
                      "text_hash": _text_hash(response)})
    trace.append({"event": "return", "round": config.trials, "reason": "exhausted"})
    return response


def _run_rejection(instruction, config, call, trace, response: str, toolset) -> str:
    candidate = response
    for round_no in range(1, config.trials + 1):
        verdicts = verify_all(toolset, candidate)
        trace.append({"event": "verify", "round": round_no - 1,
                      "satisfied": sum(v.satisfied for v in verdicts),
                      "total": len(verdicts)})
        if all(v.satisfied for v in verdicts):
            trace.append({"event": "return", "round": round_no - 1,
                          "reason": "satisfied"})
            return candidate
        if round_no == config.trials:
            break
        candidate = call(render_prompt("generate", instruction=instruction.text))
        trace.append({"event": "generate", "round": round_no,
                      "text_hash": _text_hash(candidate)})
    trace.append({"event": "return", "round": config.trials, "reason": "exhausted"})
    return candidate


def _feedback_for(config: RunConfig, tool, verdict: Verdict) -> tuple[str, str]:
    """The (feedback text, constraint label) pair shown to the model."""
    if config.strategy == "boolean_feedback":
        return BOOLEAN_FEEDBACK, UNKNOWN_CONSTRAINT
    if config.strategy == "which_constraint" or not config.detailed_feedback:
        return WHICH_CONSTRAINT_FEEDBACK, tool.display_name
    return render_feedback(verdict), tool.display_name


def _run_refine_loop(
    instruction: Instruction,
    config: RunConfig,
    call: Callable[[str], str],
    trace: list[dict],
    result: RunResult,
    response: str,
    toolset: Sequence[Union[ToolInstance, ContentTool]],
    repository: Optional[RefinementRepository],
    rng: random.Random,
) -> str:
    """Verify-refine loop with a trial counter that resets after every
    successful single-constraint fix."""
    use_repo = (
        config.strategy == "dvr" and config.use_repository and repository is not None
    )
    verdicts = verify_all(toolset, response)
    trace.append({"event": "verify", "round": 0,
                  "satisfied": sum(v.satisfied for v in verdicts),
                  "total": len(verdicts)})
    remaining = config.trials
    round_no = 0
    candidates: list[str] = [response]
    while True:
        target = _first_unsatisfied(verdicts)
        if target is None:
            trace.append({"event": "return", "round": round_no, "reason": "satisfied"})
            return response
        if remaining <= 0:
            break
        if config.max_rounds is not None and round_no >= config.max_rounds:
            trace.append({"event": "return", "round": round_no,
                          "reason": "round_limit"})
            return _best_candidate(instruction, candidates)
        remaining -= 1
        round_no += 1
        tool = toolset[target]
        feedback_text, label = _feedback_for(config, tool, verdicts[target])
        examples = None
        if use_repo:
            records = repository.retrieve(
                tool.constraint_type, config.refine_few_shots, rng
            )
            examples = _records_to_examples(records) if records else None
        refined = call(
            render_prompt(
                "refine",
                instruction=instruction.text,
                response=response,
                constraint=label,
                feedback=feedback_text,
                examples=examples,
            )
        )
        trace.append({"event": "refine", "round": round_no,
                      "tool": tool.display_name, "text_hash": _text_hash(refined)})
        new_verdicts = verify_all(toolset, refined)
        trace.append({"event": "verify", "round": round_no,
                      "satisfied": sum(v.satisfied for v in new_verdicts),
                      "total": len(new_verdicts)})
        candidates.append(refined)
        if new_verdicts[target].satisfied:
            if use_repo:
                repository.store(
                    RefinementRecord(
                        spec=tool.spec,
                        instruction=instruction.text,
                        response_before=response,
                        feedback_text=feedback_text,
                        response_after=refined,
                    )
                )
                result.stored_records += 1
            remaining = config.trials
            trace.append({"event": "store", "round": round_no,
                          "tool": tool.display_name,
                          "trials_remaining": remaining,
                          "stored": use_repo})
            response = refined
            verdicts = new_verdicts
    trace.append({"event": "return", "round": round_no, "reason": "exhausted"})
    return _best_candidate(instruction, candidates)


def _best_candidate(instruction: Instruction, candidates: Sequence[str]) -> str:
    """On exhaustion: the candidate satisfying the most ground-truth
    constraints, ties going to the latest one."""
    deterministic = [
        s for s in instruction.ground_truth if isinstance(s, ConstraintSpec)
    ]
    if not deterministic:
        return candidates[-1]
    tools = [tool_for(s) for s in deterministic]
    best, best_score = candidates[-1], -1
    for candidate in candidates:
        score = sum(v.satisfied for v in verify_all(tools, candidate))
        if score >= best_score:
            best, best_score = candidate, score
    return best


def run_batch(
    dataset: Sequence[Instruction],
    config: RunConfig,
    chat: ChatModel,
    *,
    repository: Optional[RefinementRepository] = None,
    classifier: Optional[Callable[[str, str], str]] = None,
    root_seed: int = 0,
    parallelism: int = 1,
) -> list[RunResult]:
    """Run a dataset; results come back in dataset order regardless of
    scheduling, and per-run rng streams derive from the root seed."""

    def one(instruction: Instruction) -> RunResult:
        rng = random.Random(f"{root_seed}:{instruction.id}")
        try:
            return run_instruction(
                instruction, config, chat,
                repository=repository, classifier=classifier, rng=rng,
            )
        except Exception as exc:  # per-instruction isolation
            return RunResult(
                instruction_id=instruction.id,
                level=instruction.level,
                strategy=config.strategy,
                final_response="",
                error=f"{type(exc).__name__}: {exc}",
            )

    if parallelism <= 1:
        return [one(instr) for instr in dataset]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(one, dataset))


def save_results(results: Sequence[RunResult], path) -> None:
    from pathlib import Path

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for res in results:
            fh.write(json.dumps(res.to_json(), ensure_ascii=False) + "\n")


def load_results(path) -> list[RunResult]:
    from pathlib import Path

    results = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                results.append(RunResult.from_json(json.loads(line)))
    return results
