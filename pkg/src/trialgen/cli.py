"""Single entry point exposing the pipeline and harness as subcommands:
ingest, retrieve, generate, split, evaluate, analyze.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import zipfile
from pathlib import Path

from . import analysis, corpus, datasets, llm, metrics, pipeline, retrieval
from .config import ConfigError, load_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def _iter_xml_texts(source: Path):
    """Yield (name, xml text) from a directory of .xml files or a .zip archive."""
    if source.is_dir():
        for path in sorted(source.glob("*.xml")):
            yield path.name, path.read_text("utf-8")
    elif source.suffix == ".zip":
        with zipfile.ZipFile(source) as archive:
            for name in sorted(archive.namelist()):
                if name.endswith(".xml"):
                    yield name, archive.read(name).decode("utf-8")
    else:
        raise UsageError(f"--xml must be a directory or .zip archive, got {source}")


def cmd_ingest(args) -> int:
    labels = corpus.load_labels(args.labels)
    records = []
    for name, xml_text in _iter_xml_texts(Path(args.xml)):
        try:
            records.append(corpus.parse_trial_xml(xml_text))
        except corpus.CorpusError as exc:
            logger.warning("skipping %s: %s", name, exc)
    built = corpus.build_labeled_corpus(records, labels)
    corpus.write_corpus_jsonl(built, args.out)
    logger.info("wrote %d labeled trials to %s", len(built), args.out)
    return EXIT_OK


def cmd_retrieve(args) -> int:
    built = corpus.load_corpus_jsonl(args.corpus)
    vocab = retrieval.load_drug_vocab(args.vocab)
    index = retrieval.index_by_intervention(built, vocab)
    names = retrieval.write_eligibility_report(index, args.out, args.min_pos, args.min_neg)
    logger.info("%d eligible interventions written to %s", len(names), args.out)
    return EXIT_OK


def _build_client(config) -> llm.ChatClient:
    if config.llm.mock_mode:
        if not config.llm.mock_fixture:
            raise ConfigError("mock_mode set but no mock_fixture path given")
        transport = llm.load_mock_transport(config.llm.mock_fixture)
    else:
        transport = llm.HttpTransport(config.llm.base_url)
    return llm.ChatClient(
        transport=transport,
        model_name=config.llm.model,
        temperature=config.llm.temperature,
        token_budget=config.llm.token_budget,
        max_retries=config.llm.retry_cap,
    )


def cmd_generate(args) -> int:
    config = load_config(args.config)
    if args.mock_fixture:
        config.llm.mock_mode = "scripted"
        config.llm.mock_fixture = args.mock_fixture
    if args.total is not None:
        config.plan.total_trials = args.total
    if args.seed is not None:
        config.plan.seed = args.seed
    if args.label_policy:
        config.plan.label_policy = args.label_policy

    built = corpus.load_corpus_jsonl(args.corpus)
    vocab = retrieval.load_drug_vocab(args.vocab)
    plan = pipeline.GenerationPlan(
        total_trials=config.plan.total_trials,
        per_intervention_cap=config.plan.per_intervention_cap or None,
        label_policy=config.plan.label_policy,
        seed=config.plan.seed,
        fixed_label=config.plan.fixed_label,
    )
    client = _build_client(config)
    # Mock runs pin the provenance timestamp so reruns are byte-identical;
    # live runs record wall-clock time.
    if config.llm.mock_mode:
        clock = lambda: pipeline.EPOCH_TIMESTAMP  # noqa: E731
    else:
        from datetime import datetime, timezone

        clock = lambda: datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")  # noqa: E731
    synthetic = pipeline.run_generation(
        built,
        vocab,
        plan,
        client,
        min_pos=args.min_pos,
        min_neg=args.min_neg,
        token_budget=config.llm.token_budget,
        clock=clock,
    )

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus_path = out_dir / "synthetic.jsonl"
    pipeline.export_synthetic(synthetic, corpus_path)

    index = retrieval.index_by_intervention(built, vocab)
    eligible = retrieval.eligible_interventions(index, args.min_pos, args.min_neg)
    schedule = pipeline.build_schedule(eligible, plan)
    generated_by_unit = {t.provenance.unit_index: t.trial_id for t in synthetic}
    manifest = {
        "config": config.as_dict(),
        "plan": {
            "total_trials": plan.total_trials,
            "per_intervention_cap": plan.per_intervention_cap,
            "label_policy": plan.label_policy,
            "fixed_label": plan.fixed_label,
            "seed": plan.seed,
        },
        "model": config.llm.model,
        "counts": {
            "scheduled": len(schedule),
            "generated": len(synthetic),
            "failed": len(schedule) - len(synthetic),
        },
        "units": [
            {
                "index": unit.index,
                "intervention": unit.intervention,
                "label": unit.label,
                "status": "ok" if unit.index in generated_by_unit else "failed",
                "trial_id": generated_by_unit.get(unit.index),
            }
            for unit in schedule
        ],
    }
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, ensure_ascii=False, indent=2)
        handle.write("\n")
    logger.info("generated %d/%d trials into %s", len(synthetic), len(schedule), corpus_path)
    return EXIT_OK


def cmd_split(args) -> int:
    built = corpus.load_corpus_jsonl(args.corpus)
    synthetic = pipeline.import_synthetic(args.synthetic)
    partition = datasets.partition_ab(built, pipeline.list_synthetic_interventions(synthetic))
    specs = datasets.build_experiment(
        args.kind,
        partition,
        synthetic,
        seed=args.seed,
        train_size=args.train_size,
        eval_size=args.eval_size,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for spec in specs:
        path = out_dir / f"{args.kind}_{spec.name}.json"
        datasets.write_split_manifest(spec, path)
        logger.info(
            "%s: train=%d (syn %d / real %d) val=%d test=%d -> %s",
            spec.name,
            len(spec.train),
            spec.composition[0],
            spec.composition[1],
            len(spec.val),
            len(spec.test),
            path,
        )
    return EXIT_OK


def cmd_evaluate(args) -> int:
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else None
    if seeds is not None and len(seeds) != len(args.pred):
        raise UsageError(f"--seeds lists {len(seeds)} values for {len(args.pred)} files")
    reports = []
    for position, path in enumerate(args.pred):
        records = metrics.load_predictions(path)
        seed = seeds[position] if seeds else position
        reports.append(metrics.evaluate(records, seed=seed))
    report = metrics.aggregate(reports)
    metrics.write_report_csv([(args.name, report)], args.out)
    for name in metrics.METRIC_NAMES:
        logger.info("%s: %.4f +/- %.4f", name, report.means[name], report.stds[name])
    return EXIT_OK


def cmd_analyze(args) -> int:
    real = analysis.load_embeddings(args.real)
    synthetic = analysis.load_embeddings(args.synthetic)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [
        ("real_real", real, None),
        ("syn_syn", synthetic, None),
        ("real_syn", real, synthetic),
    ]
    for mode, set_a, set_b in jobs:
        sample = analysis.sample_pairs(set_a, set_b, n=args.pairs, seed=args.seed, mode=mode)
        analysis.write_pairs_csv(sample, out_dir / f"pairs_{mode}.csv")
        binned = analysis.histogram(sample, bins=args.bins)
        analysis.write_histogram_csv(binned, out_dir / f"hist_{mode}.csv")
        logger.info("%s: %d pairs, histogram with %d bins", mode, len(sample.pairs), args.bins)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trialgen",
        description="Synthetic clinical trial generation pipeline and evaluation harness.",
    )
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse registry XML + labels into a corpus file")
    p.add_argument("--xml", required=True, help="directory of .xml files or a .zip archive")
    p.add_argument("--labels", required=True, help="CSV with header trial_id,label")
    p.add_argument("--out", required=True, help="output corpus JSON-lines path")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("retrieve", help="write the eligible-intervention report")
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab", required=True, help="drug vocabulary, one name per line")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--min-pos", type=int, default=3)
    p.add_argument("--min-neg", type=int, default=3)
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("generate", help="run the generation pipeline")
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--config", default=None, help="INI config file")
    p.add_argument("--mock-fixture", default=None, help="JSON mock-response fixture")
    p.add_argument("--total", type=int, default=None, help="override plan total_trials")
    p.add_argument("--seed", type=int, default=None, help="override plan seed")
    p.add_argument("--label-policy", default=None, choices=["alternate", "balanced", "fixed"])
    p.add_argument("--min-pos", type=int, default=3)
    p.add_argument("--min-neg", type=int, default=3)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("split", help="build experiment split manifests")
    p.add_argument("--corpus", required=True)
    p.add_argument("--synthetic", required=True)
    p.add_argument("--kind", required=True, choices=["in_distribution", "ratio", "generalization"])
    p.add_argument("--seed", type=int, default=40)
    p.add_argument("--train-size", type=int, default=datasets.DEFAULT_TRAIN_SIZE)
    p.add_argument("--eval-size", type=int, default=datasets.DEFAULT_EVAL_SIZE)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("evaluate", help="compute metrics over prediction CSVs")
    p.add_argument("--pred", required=True, nargs="+", help="prediction CSV, one per seed")
    p.add_argument("--out", required=True, help="output report CSV")
    p.add_argument("--name", default="run", help="value for the fine_tuning column")
    p.add_argument("--seeds", default=None, help="comma-separated seed labels")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("analyze", help="cosine-similarity pair analysis over embeddings")
    p.add_argument("--real", required=True, help="real-trial embedding JSON-lines")
    p.add_argument("--synthetic", required=True, help="synthetic-trial embedding JSON-lines")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--pairs", type=int, default=analysis.DEFAULT_PAIR_COUNT)
    p.add_argument("--bins", type=int, default=analysis.DEFAULT_BINS)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_analyze)

    return parser


DOMAIN_ERRORS = (
    corpus.CorpusError,
    retrieval.RetrievalError,
    llm.LlmError,
    pipeline.PipelineError,
    datasets.DatasetError,
    metrics.MetricsError,
    analysis.AnalysisError,
    ConfigError,
    ValueError,
    OSError,
)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DOMAIN_ERRORS as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
