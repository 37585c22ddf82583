"""Command-line entry points.

Paths may be given relative to the data root in $DERMPATH_DATA.  The
``run`` verb accepts a TOML config file; explicit flags win over file
values.
"""

from __future__ import annotations

import json
import os
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path

import click

from .anonymizer import anonymize_document, generate_review_partition, load_lexicons
from .cascade import (
    Mode,
    enumerate_schedules,
    infer_cascade,
    load_cascade,
    save_cascade,
    search_schedules,
    train_cascade,
)
from .corpus import LabeledCorpus, SplitSpec, filter_by_min_frequency, load_corpus, stratified_split
from .learner import TrainConfig
from .metrics import evaluate_single_label
from .ontology import (
    RelationTriple,
    extract_relations,
    extract_relations_for_corpus,
    load_snapshot,
    load_translation_map,
    reference_snapshot,
    reference_translation_map,
)
from .pipeline import ExperimentConfig, run_pipeline, threshold_sweep as run_threshold_sweep
from .review import ReviewSession, VerdictStore


def _data_path(value: str | None) -> str | None:
    if value is None:
        return None
    path = Path(value)
    root = os.environ.get("DERMPATH_DATA")
    if root and not path.is_absolute() and not path.exists():
        candidate = Path(root) / path
        if candidate.exists():
            return str(candidate)
    return str(path)


def _ontology(snapshot_path, translation_path):
    snapshot = load_snapshot(_data_path(snapshot_path)) if snapshot_path else reference_snapshot()
    tmap = (
        load_translation_map(_data_path(translation_path))
        if translation_path
        else reference_translation_map()
    )
    return snapshot, tmap


@click.group()
def main():
    """Pathology-classification pipeline for Spanish clinical notes."""


@main.command()
@click.option("--in", "in_path", required=True, help="Input corpus (JSONL)")
@click.option("--out", "out_path", required=True, help="Output corpus (JSONL)")
@click.option("--lexicons", "lexicon_dir", required=True, help="Lexicon directory")
@click.option("--format", "fmt", default="jsonl", type=click.Choice(["jsonl", "csv"]))
def anonymize(in_path, out_path, lexicon_dir, fmt):
    """De-identify every document of a corpus."""
    from .corpus import save_corpus
    from .anonymizer import anonymize_corpus

    corpus = load_corpus(_data_path(in_path), fmt)
    lexicons = load_lexicons(_data_path(lexicon_dir))
    masked = anonymize_corpus(corpus, lexicons)
    save_corpus(masked, out_path, fmt)
    click.echo(f"anonymized {len(masked)} documents -> {out_path}")


@main.command("review-sample")
@click.option("--corpus", "corpus_path", required=True)
@click.option("--format", "fmt", default="jsonl", type=click.Choice(["jsonl", "csv"]))
@click.option("--fraction", default=0.1, show_default=True)
@click.option("--overlap", default=0.126, show_default=True)
@click.option("--seed", default=42, show_default=True)
@click.option("--out", "out_path", required=True)
def review_sample(corpus_path, fmt, fraction, overlap, seed, out_path):
    """Generate the stratified two-reviewer partition."""
    corpus = load_corpus(_data_path(corpus_path), fmt)
    partition = generate_review_partition(corpus, fraction, overlap, seed)
    payload = {
        "sample_ids": [r.id for r in partition.sample],
        "subset_a": sorted(partition.subset_a),
        "subset_b": sorted(partition.subset_b),
    }
    Path(out_path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    click.echo(
        f"sample={len(partition.sample)} shared={len(partition.shared_ids)} -> {out_path}"
    )


@main.command("serve-review")
@click.option("--corpus", "corpus_path", required=True)
@click.option("--format", "fmt", default="jsonl", type=click.Choice(["jsonl", "csv"]))
@click.option("--partition", "partition_path", required=True)
@click.option("--store", "store_path", required=True)
@click.option("--reviewers", default="reviewer-a,reviewer-b", show_default=True)
@click.option("--static", "static_dir", default=None, help="Frontend bundle directory")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8765, show_default=True)
def serve_review(corpus_path, fmt, partition_path, store_path, reviewers, static_dir, host, port):
    """Serve the adjudication API (and UI bundle, if provided)."""
    import uvicorn

    from .anonymizer import ReviewPartition
    from .server import create_app

    corpus = load_corpus(_data_path(corpus_path), fmt)
    spec = json.loads(Path(_data_path(partition_path)).read_text(encoding="utf-8"))
    sample_ids = set(spec["sample_ids"])
    partition = ReviewPartition(
        sample=LabeledCorpus([r for r in corpus if r.id in sample_ids]),
        subset_a=set(spec["subset_a"]),
        subset_b=set(spec["subset_b"]),
    )
    roster = tuple(reviewers.split(","))
    session = ReviewSession(partition, VerdictStore(store_path), roster)
    app = create_app(session, static_dir)
    uvicorn.run(app, host=host, port=port)


@main.command("extract-relations")
@click.option("--labels", "labels_path", required=True, help="One Spanish label per line")
@click.option("--snapshot", "snapshot_path", default=None)
@click.option("--translations", "translation_path", default=None)
@click.option("--out", "out_path", required=True)
def extract_relations_cmd(labels_path, snapshot_path, translation_path, out_path):
    """Map labels to (type, severity, site) triples via the snapshot."""
    snapshot, tmap = _ontology(snapshot_path, translation_path)
    labels = [
        l.strip()
        for l in Path(_data_path(labels_path)).read_text(encoding="utf-8").splitlines()
        if l.strip()
    ]
    rows = {}
    for label in labels:
        triple = extract_relations(label, tmap, snapshot)
        rows[label] = {"t": triple.path_type, "gr": triple.severity, "sit": triple.site}
    Path(out_path).write_text(
        json.dumps(rows, ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    click.echo(f"extracted {len(rows)} triples -> {out_path}")


def _train_options(fn):
    for deco in reversed(
        [
            click.option("--corpus", "corpus_path", required=True),
            click.option("--format", "fmt", default="jsonl", type=click.Choice(["jsonl", "csv"])),
            click.option("--snapshot", "snapshot_path", default=None),
            click.option("--translations", "translation_path", default=None),
            click.option("--min-count", default=61, show_default=True),
            click.option("--train-fraction", default=0.8, show_default=True),
            click.option("--seed", default=42, show_default=True),
            click.option("--batch-size", default=64, show_default=True),
            click.option("--learning-rate", default=0.001, show_default=True),
            click.option("--epochs", default=10, show_default=True),
            click.option("--k", default=2, show_default=True),
        ]
    ):
        fn = deco(fn)
    return fn


def _prepare(corpus_path, fmt, snapshot_path, translation_path, min_count, train_fraction, seed):
    corpus = load_corpus(_data_path(corpus_path), fmt)
    corpus = filter_by_min_frequency(corpus, min_count)
    train, test = stratified_split(corpus, SplitSpec(train_fraction, seed))
    snapshot, tmap = _ontology(snapshot_path, translation_path)
    triples = extract_relations_for_corpus(corpus.label_list(), tmap, snapshot)
    return train, test, triples


@main.command("train-cascade")
@_train_options
@click.option("--schedule", default="sit,gr,t", show_default=True)
@click.option("--out", "out_dir", required=True)
def train_cascade_cmd(
    corpus_path, fmt, snapshot_path, translation_path, min_count, train_fraction,
    seed, batch_size, learning_rate, epochs, k, schedule, out_dir,
):
    """Train one cascade for a fixed schedule and save the bundle."""
    train, _test, triples = _prepare(
        corpus_path, fmt, snapshot_path, translation_path, min_count, train_fraction, seed
    )
    config = TrainConfig(batch_size=batch_size, learning_rate=learning_rate, epochs=epochs, seed=seed)
    model = train_cascade(train, triples, tuple(schedule.split(",")), config)
    save_cascade(model, out_dir)
    click.echo(f"trained cascade {schedule} on {len(train)} docs -> {out_dir}")


@main.command("search-schedules")
@_train_options
@click.option("--max-len", default=3, show_default=True)
@click.option("--mode", default="PR", type=click.Choice(["OR", "PR"]), show_default=True)
@click.option("--metric", default="accuracy", show_default=True)
@click.option("--out", "out_path", default=None)
def search_schedules_cmd(
    corpus_path, fmt, snapshot_path, translation_path, min_count, train_fraction,
    seed, batch_size, learning_rate, epochs, k, max_len, mode, metric, out_path,
):
    """Train and rank every relation schedule."""
    train, test, triples = _prepare(
        corpus_path, fmt, snapshot_path, translation_path, min_count, train_fraction, seed
    )
    config = TrainConfig(batch_size=batch_size, learning_rate=learning_rate, epochs=epochs, seed=seed)
    ranking = search_schedules(
        train, test, triples, config=config, mode=Mode(mode), k=k,
        metric_key=metric, max_len=max_len,
    )
    rows = [
        {"schedule": list(s), "accuracy": r.accuracy, "micro_f1": r.micro_f1, "macro_f1": r.macro_f1}
        for s, r in ranking
    ]
    if out_path:
        Path(out_path).write_text(json.dumps(rows, indent=2) + "\n", encoding="utf-8")
    for row in rows:
        click.echo(f"{'->'.join(row['schedule']):<14} acc={row['accuracy']:.4f} macroF1={row['macro_f1']:.4f}")


def _parse_triple(raw: str) -> RelationTriple:
    parts = dict(p.split("=", 1) for p in raw.split(","))
    return RelationTriple(path_type=parts["t"], severity=parts["gr"], site=parts["sit"])


@main.command()
@click.option("--model", "model_dir", required=True)
@click.option("--mode", default="PR", type=click.Choice(["OR", "PR"]), show_default=True)
@click.option("--triple", default=None, help="OR mode: t=...,gr=...,sit=...")
@click.option("--k", default=2, show_default=True)
@click.option("--text", default=None, help="Report text (reads stdin when omitted)")
def infer(model_dir, mode, triple, k, text):
    """Rank diseases for one report."""
    model = load_cascade(_data_path(model_dir))
    if text is None:
        text = sys.stdin.read()
    oracle = _parse_triple(triple) if triple else None
    ranked = infer_cascade(model, text, Mode(mode), oracle, k)
    for label, score in ranked:
        click.echo(f"{score:.4f}\t{label}")


@main.command()
@click.option("--truth", "truth_path", required=True, help="One true label per line")
@click.option("--pred", "pred_path", required=True, help="JSONL: ranked label list per line")
@click.option("--k", default=2, show_default=True)
@click.option("--out", "out_path", required=True)
def evaluate(truth_path, pred_path, k, out_path):
    """Score ranked predictions against the truth labels."""
    truth = [
        l.strip()
        for l in Path(_data_path(truth_path)).read_text(encoding="utf-8").splitlines()
        if l.strip()
    ]
    predictions = [
        json.loads(line)
        for line in Path(_data_path(pred_path)).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    report = evaluate_single_label(truth, predictions, k)
    report.to_json(out_path)
    click.echo(
        f"accuracy={report.accuracy:.4f} microF1={report.micro_f1:.4f} "
        f"macroF1={report.macro_f1:.4f} top{k}={report.topk_accuracy:.4f}"
    )


@main.command("threshold-sweep")
@click.option("--config", "config_path", default=None)
@click.option("--corpus", "corpus_path", default=None)
@click.option("--thresholds", default="2,10,25,50,61,75,100", show_default=True)
@click.option("--out", "out_path", required=True)
def threshold_sweep_cmd(config_path, corpus_path, thresholds, out_path):
    """Per-threshold class counts and metrics."""
    config = _load_config(config_path, corpus_path=corpus_path, output_dir=".")
    rows = run_threshold_sweep(config, [int(t) for t in thresholds.split(",")])
    Path(out_path).write_text(json.dumps(rows, indent=2) + "\n", encoding="utf-8")
    for row in rows:
        click.echo(row)


def _load_config(config_path, **overrides) -> ExperimentConfig:
    values: dict = {}
    if config_path:
        with open(_data_path(config_path), "rb") as fh:
            values.update(tomllib.load(fh))
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    if "schedule" in values and isinstance(values["schedule"], str):
        values["schedule"] = tuple(values["schedule"].split(","))
    if "corpus_path" in values:
        values["corpus_path"] = _data_path(values["corpus_path"])
    return ExperimentConfig(**values)


@main.command()
@click.option("--config", "config_path", default=None, help="TOML config file")
@click.option("--corpus", "corpus_path", default=None)
@click.option("--out", "output_dir", default=None)
@click.option("--mode", default=None, type=click.Choice(["OR", "PR", "both"]))
@click.option("--min-count", default=None, type=int)
@click.option("--seed", default=None, type=int)
@click.option("--search/--no-search", default=None)
def run(config_path, corpus_path, output_dir, mode, min_count, seed, search):
    """Run the full pipeline and write reports plus a manifest."""
    config = _load_config(
        config_path,
        corpus_path=corpus_path,
        output_dir=output_dir,
        mode=mode,
        min_count=min_count,
        seed=seed,
        search=search,
    )
    bundle = run_pipeline(config)
    for name, report in sorted(bundle.reports.items()):
        click.echo(
            f"{name:<8} accuracy={report.accuracy:.4f} microF1={report.micro_f1:.4f} "
            f"macroF1={report.macro_f1:.4f} top{report.k}={report.topk_accuracy:.4f}"
        )
    click.echo(f"reports written to {bundle.output_dir}")


@main.command("list-schedules")
@click.option("--max-len", default=3, show_default=True)
def list_schedules(max_len):
    """Print every relation schedule."""
    for schedule in enumerate_schedules(("t", "gr", "sit"), max_len):
        click.echo("->".join(schedule))


if __name__ == "__main__":
    main()
