"""Command-line surface: synthesize datasets, verify responses, run
batches, evaluate results, and manage the refinement repository.

Exit codes: 0 success, 1 domain error (including failed verification),
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .constraints import ArityError, ConstraintSpec, ParseError, parse_tool_expression
from .evaluation import build_report, render_report
from .gateway import ClientConfig, HttpChatModel, LoopSettings
from .orchestrator import (
    STRATEGIES,
    RunConfig,
    load_results,
    run_batch,
    save_results,
)
from .repository import RefinementRepository
from .synthesis import build_dataset, default_seeds_path, load_dataset
from .verifiers import instantiate, render_feedback, verify


def _parse_levels(raw: str) -> list[int]:
    if "-" in raw:
        lo, hi = raw.split("-", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in raw.split(",") if x]


def _cmd_synth(args: argparse.Namespace) -> int:
    seeds = args.seeds or str(default_seeds_path())
    count = build_dataset(
        seeds_path=seeds,
        out_path=args.out,
        per_level=args.per_level,
        seed=args.seed,
        levels=_parse_levels(args.levels),
    )
    print(f"wrote {count} instructions to {args.out}")
    return 0


def _load_tools(raw: str):
    path = Path(raw)
    if path.exists():
        specs = [ConstraintSpec.from_json(obj) for obj in json.loads(path.read_text())]
        return [instantiate(spec) for spec in specs]
    return [
        parse_tool_expression(chunk.strip())
        for chunk in raw.split(";")
        if chunk.strip()
    ]


def _cmd_verify(args: argparse.Namespace) -> int:
    try:
        tools = _load_tools(args.constraints)
    except (ParseError, ArityError, ValueError) as exc:
        print(f"bad constraint expression: {exc}", file=sys.stderr)
        return 1
    response = (
        sys.stdin.read() if args.response == "-" else Path(args.response).read_text()
    )
    all_ok = True
    for tool in tools:
        verdict = verify(tool, response)
        if verdict.satisfied:
            print(f"{tool.display_name}: satisfied")
        else:
            all_ok = False
            print(f"{tool.display_name}: unsatisfied")
            print(render_feedback(verdict))
    return 0 if all_ok else 1


def _make_chat(args: argparse.Namespace, dataset):
    if args.mock == "improving":
        from .mocks import ImprovingMock

        return ImprovingMock(dataset, root_seed=args.seed)
    config = ClientConfig.from_env()
    if args.model:
        config.model = args.model
    if args.config:
        settings = LoopSettings.from_file(args.config)
        config.temperature = settings.temperature
        config.max_tokens = settings.max_tokens
        config.timeout = settings.timeout
        config.retries = settings.retries
        if settings.model != "default":
            config.model = settings.model
    return HttpChatModel(config)


def _cmd_run(args: argparse.Namespace) -> int:
    dataset = load_dataset(args.dataset)
    settings = LoopSettings.from_file(args.config) if args.config else LoopSettings()
    if args.trials:
        settings.max_trials = args.trials
    chat = _make_chat(args, dataset)
    config = RunConfig(
        strategy=args.strategy,
        trials=settings.max_trials,
        detailed_feedback=not args.no_detailed_feedback,
        use_repository=not args.no_repository,
        refine_few_shots=settings.refine_few_shots,
        use_ground_truth_tools=args.ground_truth_tools,
        model=args.model or settings.model,
        temperature=settings.temperature,
        max_tokens=settings.max_tokens,
    )
    repo_path = args.repository or f"repository.{config.model}.jsonl"
    repository = RefinementRepository.load(repo_path)
    results = run_batch(
        dataset,
        config,
        chat,
        repository=repository,
        root_seed=args.seed,
        parallelism=args.parallel,
    )
    save_results(results, args.out)
    if not args.no_repository:
        repository.save(repo_path)
    errors = sum(1 for r in results if r.error)
    print(
        f"ran {len(results)} instructions with {config.strategy}: "
        f"{sum(r.satisfied_all for r in results)} fully satisfied, {errors} errors"
    )
    print(f"results written to {args.out}; repository at {repo_path}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    results = load_results(args.results)
    if not results:
        print("no results to evaluate", file=sys.stderr)
        return 1
    truth = None
    if args.truth_selection:
        dataset = {i.id: i for i in load_dataset(args.truth_selection)}
        truth = []
        for res in results:
            instr = dataset.get(res.instruction_id)
            if instr is None:
                print(f"no ground truth for {res.instruction_id}", file=sys.stderr)
                return 1
            truth.append(
                [
                    spec.type.value
                    for spec in instr.ground_truth
                    if isinstance(spec, ConstraintSpec)
                ]
            )
    report = build_report(results, truth_selection=truth, averaging=args.averaging)
    rendered = render_report(report, fmt=args.format)
    if args.out:
        Path(args.out).write_text(rendered + "\n", encoding="utf-8")
    print(rendered)
    return 0


def _cmd_repo(args: argparse.Namespace) -> int:
    if args.action == "stats":
        repo = RefinementRepository.load(args.path, revalidate=False)
        print(f"{repo.size()} records in {args.path}")
        for type_id, count in repo.type_counts().items():
            print(f"  {type_id:<24} {count}")
        return 0
    if args.action == "validate":
        repo = RefinementRepository.load(args.path, revalidate=True)
        print(f"{repo.size()} valid records; {len(repo.load_errors)} rejected")
        for message in repo.load_errors:
            print(f"  {message}", file=sys.stderr)
        return 0 if not repo.load_errors else 1
    if args.action == "merge":
        if not args.into:
            print("merge requires --into", file=sys.stderr)
            return 2
        merged = RefinementRepository()
        for path in [args.path] + (args.extra or []):
            part = RefinementRepository.load(path)
            for record in part.records():
                merged.store(record)
        merged.save(args.into)
        print(f"merged {merged.size()} records into {args.into}")
        return 0
    print(f"unknown repo action {args.action!r}", file=sys.stderr)
    return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="verifix",
        description="Verify, refine, and evaluate constraint-following responses.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="synthesize an instruction dataset")
    p_synth.add_argument("--seeds", help="seed file, one instruction per line")
    p_synth.add_argument("--per-level", type=int, default=1000)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--levels", default="1-6")
    p_synth.add_argument("--out", required=True)
    p_synth.set_defaults(func=_cmd_synth)

    p_verify = sub.add_parser("verify", help="verify a response file")
    p_verify.add_argument(
        "--constraints",
        required=True,
        help="semicolon-separated tool expressions, or a JSON spec file",
    )
    p_verify.add_argument("--response", required=True, help="response file or -")
    p_verify.set_defaults(func=_cmd_verify)

    p_run = sub.add_parser("run", help="run a strategy over a dataset")
    p_run.add_argument("--dataset", required=True)
    p_run.add_argument("--strategy", choices=STRATEGIES, default="dvr")
    p_run.add_argument("--config", help="JSON/TOML settings file")
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--parallel", type=int, default=1)
    p_run.add_argument("--trials", type=int, default=0)
    p_run.add_argument("--repository", help="repository JSONL path")
    p_run.add_argument("--mock", choices=["none", "improving"], default="none")
    p_run.add_argument("--model", default="")
    p_run.add_argument("--ground-truth-tools", action="store_true",
                       help="drive feedback with ground-truth tools")
    p_run.add_argument("--no-detailed-feedback", action="store_true")
    p_run.add_argument("--no-repository", action="store_true")
    p_run.set_defaults(func=_cmd_run)

    p_eval = sub.add_parser("eval", help="aggregate metrics from results")
    p_eval.add_argument("--results", required=True)
    p_eval.add_argument("--truth-selection", help="dataset file with ground truth")
    p_eval.add_argument("--format", choices=["table", "json"], default="table")
    p_eval.add_argument("--averaging", choices=["micro", "macro"], default="micro")
    p_eval.add_argument("--out")
    p_eval.set_defaults(func=_cmd_eval)

    p_repo = sub.add_parser("repo", help="manage the refinement repository")
    p_repo.add_argument("action", choices=["stats", "validate", "merge"])
    p_repo.add_argument("--path", required=True)
    p_repo.add_argument("--extra", nargs="*", help="additional inputs for merge")
    p_repo.add_argument("--into", help="output path for merge")
    p_repo.set_defaults(func=_cmd_repo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"file not found: {exc.filename or exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
