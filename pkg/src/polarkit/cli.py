"""``polarkit`` command line.

Every subcommand reads a shared JSON config (``--config``); flags override
it. Per-language commands accept ``--lang`` several times and path templates
containing ``{lang}``, and run languages in parallel up to ``--jobs``.

Exit codes: 0 success, 1 usage/config error, 2 data validation error,
3 external-service failure. Errors go to stderr prefixed ``ERROR[<code>]``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Sequence, TypeVar

from . import __version__
from .calibration import calibration_report
from .config import RunConfig, load_config
from .core import (
    Dataset,
    align,
    read_dataset,
    read_predictions,
    write_dataset,
    write_jsonl,
    write_text_atomic,
)
from .ensemble import (
    StrategyId,
    TunedDecision,
    combine,
    read_decisions,
    select_strategy,
    write_decisions,
)
from .errors import ConfigError, DataValidationError, PolarError
from .metrics import score_at
from .quality import FileBackedProvider, HashEmbeddingProvider, HttpEmbeddingProvider, run_pipeline
from .reporting import (
    ResultTable,
    combine_best,
    leaderboard_compare,
    load_table6,
    read_leaderboard,
    read_table,
    render,
    render_histogram,
    render_leaderboard,
    strategy_histogram,
    write_table,
)
from .split_mix import mix_synthetic, stratified_split
from .synth import ChatClient, TopicCatalog, TranslationClient, default_prompt_specs
from .synth.generate import describe_requests, plan_batch, run_batch
from .thresholds import tune_threshold

logger = logging.getLogger("polarkit")

T = TypeVar("T")

COMMANDS = ("split", "mix", "generate", "filter", "tune", "select", "evaluate", "calibrate",
            "combine", "report")


class UsageError(PolarError):
    exit_code = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit 2, which we reserve for bad data
        self.print_usage(sys.stderr)
        raise UsageError(message)


# --- helpers ------------------------------------------------------------------

def _expand(template: str, lang: str) -> str:
    return template.replace("{lang}", lang)


def _per_lang(langs: Sequence[str], jobs: int, fn: Callable[[str], T]) -> list[T]:
    if jobs <= 1 or len(langs) <= 1:
        return [fn(lang) for lang in langs]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, langs))


def _langs(args: argparse.Namespace, cfg: RunConfig) -> list[str]:
    langs = list(dict.fromkeys(args.lang or []))
    if not langs:
        raise UsageError("at least one --lang is required")
    unknown = [l for l in langs if l not in cfg.languages]
    if unknown:
        raise ConfigError(f"language(s) not in the configured registry: {', '.join(unknown)}")
    return langs


def _read_dataset(path: str, cfg: RunConfig, lang: str | None = None) -> Dataset:
    return read_dataset(path, lang=lang, registry=cfg.languages)


def _write_json(path: str | Path, obj: Any) -> None:
    write_text_atomic(path, json.dumps(obj, indent=2, ensure_ascii=False) + "\n")


def _emit(text: str, out: str | None) -> None:
    if out:
        write_text_atomic(out, text)
    else:
        sys.stdout.write(text)


# --- subcommands -----------------------------------------------------------

def cmd_split(args: argparse.Namespace, cfg: RunConfig) -> int:
    data = _read_dataset(args.data, cfg)
    result = stratified_split(data, cfg.split_ratio, cfg.seed)
    write_dataset(result.train, args.train_out)
    write_dataset(result.validation, args.val_out)
    print(json.dumps({"lang": data.lang, "train": len(result.train),
                      "validation": len(result.validation), "seed": cfg.seed}))
    return 0


def cmd_mix(args: argparse.Namespace, cfg: RunConfig) -> int:
    train = _read_dataset(args.train, cfg)
    pool = _read_dataset(args.pool, cfg)
    mixed, plan = mix_synthetic(train, pool, cfg.synth_ratio, cfg.seed)
    write_dataset(mixed, args.out)
    _write_json(args.plan_out or f"{args.out}.plan.json", plan.to_dict())
    print(json.dumps(plan.to_dict()))
    return 0


def _chat_client(cfg: RunConfig, args: argparse.Namespace) -> ChatClient:
    return ChatClient(
        args.llm_url or cfg.llm_base_url,
        args.model or cfg.llm_model,
        timeout=cfg.request_timeout,
        max_retries=cfg.max_retries,
        backoff_base=cfg.backoff_base,
        backoff_factor=cfg.backoff_factor,
        jitter_seed=cfg.seed,
    )


def cmd_generate(args: argparse.Namespace, cfg: RunConfig) -> int:
    lang = _langs(args, cfg)
    if len(lang) != 1:
        raise UsageError("generate takes exactly one --lang")
    lang = lang[0]
    train = _read_dataset(args.train, cfg, lang) if args.train else None
    catalog = TopicCatalog.from_file(args.topics) if args.topics else TopicCatalog.default()
    specs = default_prompt_specs(args.templates)
    if args.pivots:
        cfg = cfg.with_overrides(pivots=tuple(p.strip() for p in args.pivots.split(",") if p.strip()))
    plan = plan_batch(lang, cfg, train, catalog, args.n, args.backtranslate)

    if args.dry_run:
        print(json.dumps({"plan": plan.summary()}, ensure_ascii=False))
        for req in describe_requests(plan, cfg, specs):
            print(json.dumps(req, ensure_ascii=False))
        return 0
    if not args.out:
        raise UsageError("generate needs --out unless --dry-run is given")

    chat = _chat_client(cfg, args)
    translator = None
    if args.backtranslate:
        translator = TranslationClient(args.mt_url or cfg.mt_base_url, timeout=cfg.request_timeout,
                                       max_retries=cfg.max_retries, backoff_base=cfg.backoff_base,
                                       backoff_factor=cfg.backoff_factor, jitter_seed=cfg.seed)
    try:
        samples, report = run_batch(plan, chat, cfg, translator, specs)
    finally:
        chat.close()
        if translator is not None:
            translator.close()
    write_dataset(samples, args.out)
    _write_json(args.report_out or f"{args.out}.report.json", report.to_dict())
    print(json.dumps({"lang": lang, "produced": report.produced, "failures": len(report.failures),
                      "requests": report.requests}))
    return 0


def _provider(args: argparse.Namespace, cfg: RunConfig):
    if args.provider == "test":
        return HashEmbeddingProvider(args.dim or 64)
    if args.provider == "file":
        if not args.embeddings:
            raise UsageError("--provider file needs --embeddings")
        return FileBackedProvider.from_file(args.embeddings)
    return HttpEmbeddingProvider(args.embed_url or cfg.embed_base_url, args.dim,
                                 batch_size=cfg.embed_batch_size, concurrency=cfg.concurrency_limit,
                                 timeout=cfg.request_timeout, max_retries=cfg.max_retries,
                                 backoff_base=cfg.backoff_base, backoff_factor=cfg.backoff_factor,
                                 jitter_seed=cfg.seed)


def cmd_filter(args: argparse.Namespace, cfg: RunConfig) -> int:
    synthetic = _read_dataset(args.synthetic, cfg)
    reference = _read_dataset(args.reference, cfg, synthetic.lang)
    kept, report = run_pipeline(synthetic, reference, cfg, _provider(args, cfg))
    # only written once every stage has succeeded
    write_dataset(kept, args.out)
    _write_json(args.report_out or f"{args.out}.report.json", report.to_dict())
    print(json.dumps({"input": len(synthetic), "kept": len(kept)}))
    return 0


def cmd_tune(args: argparse.Namespace, cfg: RunConfig) -> int:
    def run(lang: str) -> TunedDecision:
        data = _read_dataset(_expand(args.dev_data, lang), cfg, lang)
        al = align(data, read_predictions(_expand(args.dev_preds, lang), cfg.languages))
        choice = tune_threshold(al.labels, al.probs, cfg.threshold_grid)
        return TunedDecision(lang, StrategyId("model_a_tuned"), choice.threshold, choice.dev_f1)

    decisions = _per_lang(_langs(args, cfg), args.jobs, run)
    write_decisions(decisions, args.out)
    return 0


def _aligned_pair(data: Dataset, path_a: str, path_b: str, cfg: RunConfig):
    a = align(data, read_predictions(path_a, cfg.languages))
    b = align(data, read_predictions(path_b, cfg.languages))
    return a.labels, a.probs, b.probs


def cmd_select(args: argparse.Namespace, cfg: RunConfig) -> int:
    def run(lang: str) -> TunedDecision:
        data = _read_dataset(_expand(args.dev_data, lang), cfg, lang)
        truth, pa, pb = _aligned_pair(data, _expand(args.preds_a, lang), _expand(args.preds_b, lang), cfg)
        return select_strategy(truth, pa, pb, cfg, lang=lang)

    decisions = _per_lang(_langs(args, cfg), args.jobs, run)
    write_decisions(decisions, args.out)
    if args.candidates_out:
        rows = [{"lang": d.lang, "strategy": c.strategy.kind, "weight": c.strategy.weight,
                 "threshold": c.threshold, "dev_f1": c.dev_f1}
                for d in decisions for c in d.candidate_table]
        write_jsonl(args.candidates_out, rows)
    return 0


def cmd_evaluate(args: argparse.Namespace, cfg: RunConfig) -> int:
    decisions = {d.lang: d for d in read_decisions(args.decisions)}
    langs = list(dict.fromkeys(args.lang)) if args.lang else sorted(decisions)
    missing = [l for l in langs if l not in decisions]
    if missing:
        raise DataValidationError(f"no decision recorded for: {', '.join(missing)}")

    def run(lang: str) -> tuple[str, float]:
        d = decisions[lang]
        data = _read_dataset(_expand(args.data, lang), cfg, lang)
        a = align(data, read_predictions(_expand(args.preds_a, lang), cfg.languages))
        if d.strategy.kind == "model_a_tuned":
            probs = a.probs
        else:
            if not args.preds_b:
                raise UsageError(f"{lang}: strategy {d.strategy} needs --preds-b")
            b = align(data, read_predictions(_expand(args.preds_b, lang), cfg.languages))
            probs = combine(d.strategy, a.probs, b.probs)
        return lang, score_at(a.labels, probs, d.threshold).macro_f1

    table = ResultTable(args.name, dict(_per_lang(langs, args.jobs, run)))
    write_table(table, args.out)
    return 0


def cmd_calibrate(args: argparse.Namespace, cfg: RunConfig) -> int:
    def run(lang: str) -> dict[str, Any]:
        preds = read_predictions(_expand(args.preds, lang), cfg.languages)
        if args.data:
            data = _read_dataset(_expand(args.data, lang), cfg, lang)
            al = align(data, preds)
            report = calibration_report(al.probs, al.labels, lang, cfg.calibration_band)
        else:
            report = calibration_report([r.prob for r in preds.records], None, lang, cfg.calibration_band)
        return report.to_dict()

    rows = _per_lang(_langs(args, cfg), args.jobs, run)
    if args.out:
        write_jsonl(args.out, rows)
    else:
        for row in rows:
            print(json.dumps(row, ensure_ascii=False))
    return 0


def cmd_combine(args: argparse.Namespace, cfg: RunConfig) -> int:
    tables = [read_table(p) for p in args.tables]
    best = combine_best(tables, args.name)
    write_table(best, args.out)
    print(json.dumps({"mean": best.mean}))
    return 0


def cmd_report(args: argparse.Namespace, cfg: RunConfig) -> int:
    parts: list[str] = []
    if args.fixtures:
        fx = load_table6()
        best = combine_best([fx.sub1, fx.sub4], "best_of")
        parts.append(render([fx.sub1, fx.sub4], args.format))
        parts.append(render(best, args.format))
        parts.append(render_histogram(strategy_histogram(fx.decisions), args.format))
    if args.tables:
        parts.append(render([read_table(p) for p in args.tables], args.format))
    if args.decisions:
        parts.append(render_histogram(strategy_histogram(read_decisions(args.decisions)), args.format))
    if args.leaderboard or args.fixtures:
        lb = read_leaderboard(args.leaderboard)
        rows, summary = leaderboard_compare(lb.ours, lb.best, lb.ranks, lb.overall_best, lb.overall_ours)
        parts.append(render_leaderboard(rows, summary, args.format))
    if not parts:
        raise UsageError("report needs --tables, --decisions, --leaderboard or --fixtures")
    _emit("\n".join(parts), args.out)
    return 0


HANDLERS = {
    "split": cmd_split,
    "mix": cmd_mix,
    "generate": cmd_generate,
    "filter": cmd_filter,
    "tune": cmd_tune,
    "select": cmd_select,
    "evaluate": cmd_evaluate,
    "calibrate": cmd_calibrate,
    "combine": cmd_combine,
    "report": cmd_report,
}


# --- parser ---------------------------------------------------------------

def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="JSON run configuration file")
    parser.add_argument("--seed", type=int, default=default, help="override the configured seed")
    parser.add_argument("--jobs", type=int, default=argparse.SUPPRESS if suppress else 1,
                        help="languages processed in parallel (default 1)")
    parser.add_argument("--dry-run", action="store_true",
                        default=argparse.SUPPRESS if suppress else False,
                        help="generate: print the request plan without network calls")
    parser.add_argument("-v", "--verbose", action="count",
                        default=argparse.SUPPRESS if suppress else 0,
                        help="more logging (repeat for debug output)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="polarkit", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    def add(name: str, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help, description=help)
        _global_flags(p, suppress=True)
        return p

    p = add("split", "Stratified train/validation split of real data.")
    p.add_argument("--data", required=True, help="input dataset (JSONL, real samples only)")
    p.add_argument("--train-out", required=True, help="where to write the training portion")
    p.add_argument("--val-out", required=True, help="where to write the validation portion")
    p.add_argument("--ratio", type=float, help="train fraction (default from config, 0.8)")

    p = add("mix", "Add synthetic samples to a training set at a target ratio.")
    p.add_argument("--train", required=True, help="real training dataset")
    p.add_argument("--pool", required=True, help="filtered synthetic pool")
    p.add_argument("--out", required=True, help="mixed training set (JSONL)")
    p.add_argument("--ratio", type=float, help="synthetic share of the final set, in [0, 1)")
    p.add_argument("--plan-out", help="where to write the mix plan (default <out>.plan.json)")

    p = add("generate", "Generate synthetic samples through a chat-completions endpoint.")
    p.add_argument("--lang", action="append", required=True,
                   help="language code; repeat for several (paths may use {lang})")
    p.add_argument("--train", help="real training data (paraphrase and backtranslation sources)")
    p.add_argument("--n", type=int, help="samples to generate (default from config, 1000)")
    p.add_argument("--out", help="output dataset")
    p.add_argument("--report-out", help="generation report (default <out>.report.json)")
    p.add_argument("--backtranslate", type=int, default=0, metavar="K",
                   help="also produce K backtranslated samples")
    p.add_argument("--pivots", help="comma-separated pivot chain, e.g. eng,deu,fra,spa")
    p.add_argument("--topics", help="topic catalog JSON (default: built-in catalog)")
    p.add_argument("--templates", help="directory with direct/paraphrase/contrastive .txt templates")
    p.add_argument("--llm-url", help="chat endpoint base URL")
    p.add_argument("--model", help="chat model name")
    p.add_argument("--mt-url", help="translation endpoint base URL")

    p = add("filter", "Run the four-stage quality filter over synthetic samples.")
    p.add_argument("--synthetic", required=True, help="synthetic dataset to filter")
    p.add_argument("--reference", required=True, help="real training data to deduplicate against")
    p.add_argument("--out", required=True, help="surviving samples (JSONL)")
    p.add_argument("--report-out", help="filter report (default <out>.report.json)")
    p.add_argument("--provider", choices=("test", "file", "http"), default="test",
                   help="embedding backend: deterministic hash, sidecar file or HTTP service")
    p.add_argument("--embeddings", help="sidecar JSON of sha256(text) -> vector (file provider)")
    p.add_argument("--embed-url", help="embedding endpoint base URL (http provider)")
    p.add_argument("--dim", type=int, help="embedding dimension")

    p = add("tune", "Tune the decision threshold of one model per language.")
    p.add_argument("--lang", action="append", required=True,
                   help="language code; repeat for several (paths may use {lang})")
    p.add_argument("--dev-data", required=True, help="dev dataset path; {lang} is substituted")
    p.add_argument("--dev-preds", required=True, help="dev predictions path; {lang} is substituted")
    p.add_argument("--out", required=True, help="decision file (JSONL, one line per language)")

    p = add("select", "Pick the best ensemble strategy and threshold per language.")
    p.add_argument("--lang", action="append", required=True,
                   help="language code; repeat for several (paths may use {lang})")
    p.add_argument("--dev-data", required=True, help="dev dataset path; {lang} is substituted")
    p.add_argument("--preds-a", required=True, help="model A dev predictions")
    p.add_argument("--preds-b", required=True, help="model B dev predictions")
    p.add_argument("--out", required=True, help="decision file")
    p.add_argument("--candidates-out", help="also write every (strategy, threshold, dev_f1) candidate")

    p = add("evaluate", "Apply recorded decisions to held-out predictions and score them.")
    p.add_argument("--decisions", required=True, help="decision file written by tune or select")
    p.add_argument("--lang", action="append", help="restrict to these languages")
    p.add_argument("--data", required=True, help="labelled evaluation dataset; {lang} is substituted")
    p.add_argument("--preds-a", required=True, help="model A predictions on that data")
    p.add_argument("--preds-b", help="model B predictions (needed by ensemble decisions)")
    p.add_argument("--name", default="eval", help="name of the result table")
    p.add_argument("--out", required=True, help="result table (JSON)")

    p = add("calibrate", "Calibration diagnostics for prediction files.")
    p.add_argument("--lang", action="append", required=True,
                   help="language code; repeat for several (paths may use {lang})")
    p.add_argument("--preds", required=True, help="predictions to diagnose; {lang} is substituted")
    p.add_argument("--data", help="labels, to fill reliability rates and ECE")
    p.add_argument("--out", help="JSONL report (default stdout)")

    p = add("combine", "Best-per-language combination of result tables.")
    p.add_argument("--tables", nargs="+", required=True, help="two or more result tables (JSON)")
    p.add_argument("--name", default="best", help="name of the combined table")
    p.add_argument("--out", required=True, help="combined result table (JSON)")

    p = add("report", "Render result tables, strategy counts and leaderboard comparisons.")
    p.add_argument("--tables", nargs="+", help="result tables to render side by side")
    p.add_argument("--decisions", help="decision file for the strategy histogram")
    p.add_argument("--leaderboard", help="leaderboard CSV (lang,rank,ours,best[,delta])")
    p.add_argument("--fixtures", action="store_true",
                   help="render the shipped reference result tables and leaderboard")
    p.add_argument("--format", choices=("markdown", "csv"), default="markdown", help="output format")
    p.add_argument("--out", help="output file (default stdout)")
    return parser


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config)
    overrides: dict[str, Any] = {"seed": args.seed}
    if args.command == "split":
        overrides["split_ratio"] = args.ratio
    elif args.command == "mix":
        overrides["synth_ratio"] = args.ratio
    return cfg.with_overrides(**overrides)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            raise UsageError("no subcommand given")
        logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                            format="%(levelname)s %(name)s: %(message)s")
        cfg = _resolve_config(args)
        return HANDLERS[args.command](args, cfg)
    except PolarError as exc:
        print(f"ERROR[{exc.exit_code}] {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"ERROR[1] {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
