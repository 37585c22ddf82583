"""End-to-end experiment orchestration: load, anonymize, filter, split,
relation extraction, cascade training, evaluation and report export.

Every run writes a manifest capturing all config values and seeds; a run
re-executed from its manifest produces byte-identical reports (given the
same training-kernel backend, which the manifest records).
"""

from __future__ import annotations

import json
import shutil
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import _kernel
from .anonymizer import anonymize_corpus, load_lexicons
from .cascade import Mode, evaluate_cascade, search_schedules, train_cascade
from .corpus import LabeledCorpus, SplitSpec, filter_by_min_frequency, load_corpus, stratified_split
from .learner import TfidfSoftmaxClassifier, TrainConfig
from .metrics import MetricReport, evaluate_single_label
from .ontology import (
    extract_relations_for_corpus,
    load_snapshot,
    load_translation_map,
    reference_snapshot,
    reference_translation_map,
)


class PipelineError(Exception):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"pipeline stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class ExperimentConfig:
    corpus_path: str
    output_dir: str
    corpus_format: str = "jsonl"
    snapshot_path: str | None = None  # None -> shipped reference snapshot
    translation_path: str | None = None
    lexicon_dir: str | None = None
    anonymize: bool = False
    min_count: int = 61
    k: int = 2
    schedule: tuple[str, ...] | None = ("sit", "gr", "t")
    search: bool = False
    mode: str = "PR"
    train_fraction: float = 0.8
    seed: int = 42
    batch_size: int = 64
    learning_rate: float = 0.001
    epochs: int = 10
    l2: float = 1e-4
    max_features: int = 50_000

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            l2=self.l2,
            seed=self.seed,
            max_features=self.max_features,
        )

    def validate(self) -> None:
        if self.mode not in ("OR", "PR", "both"):
            raise ValueError(f"mode must be OR, PR or both, got {self.mode!r}")
        if not Path(self.corpus_path).exists():
            raise FileNotFoundError(f"corpus not found: {self.corpus_path}")
        if self.snapshot_path and not Path(self.snapshot_path).exists():
            raise FileNotFoundError(f"snapshot not found: {self.snapshot_path}")
        if self.translation_path and not Path(self.translation_path).exists():
            raise FileNotFoundError(f"translation map not found: {self.translation_path}")
        if self.anonymize and not self.lexicon_dir:
            raise ValueError("anonymize=True requires lexicon_dir")


def _write_json(path: Path, payload) -> None:
    path.write_text(
        json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


@dataclass
class RunBundle:
    output_dir: Path
    reports: dict[str, MetricReport] = field(default_factory=dict)
    schedule_ranking: list = field(default_factory=list)


def _resolve_ontology(config: ExperimentConfig):
    snapshot = load_snapshot(config.snapshot_path) if config.snapshot_path else reference_snapshot()
    tmap = (
        load_translation_map(config.translation_path)
        if config.translation_path
        else reference_translation_map()
    )
    return snapshot, tmap


def run_pipeline(config: ExperimentConfig, corpus: LabeledCorpus | None = None) -> RunBundle:
    """Execute the full experiment; aborts on the first failing stage with
    the stage name, removing any partial outputs."""
    config.validate()
    out = Path(config.output_dir)
    created = not out.exists()
    out.mkdir(parents=True, exist_ok=True)
    try:
        return _run_stages(config, out, corpus)
    except PipelineError:
        if created:
            shutil.rmtree(out, ignore_errors=True)
        raise


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except Exception as exc:
        raise PipelineError(name, exc) from exc


def _run_stages(config: ExperimentConfig, out: Path, corpus: LabeledCorpus | None) -> RunBundle:
    if corpus is None:
        corpus = _stage("load", load_corpus, config.corpus_path, config.corpus_format)
    if config.anonymize:
        lexicons = _stage("lexicons", load_lexicons, config.lexicon_dir)
        corpus = _stage("anonymize", anonymize_corpus, corpus, lexicons)
    corpus = _stage("filter", filter_by_min_frequency, corpus, config.min_count)
    train, test = _stage(
        "split", stratified_split, corpus, SplitSpec(config.train_fraction, config.seed)
    )
    snapshot, tmap = _stage("ontology", _resolve_ontology, config)
    triples = _stage(
        "relations", extract_relations_for_corpus, corpus.label_list(), tmap, snapshot
    )
    tc = config.train_config()
    bundle = RunBundle(out)

    # vanilla baseline: no relation markers at all
    vanilla = _stage("train-vanilla", lambda: TfidfSoftmaxClassifier(tc).fit(train.texts(), train.label_list()))
    vanilla_pred = _stage("eval-vanilla", vanilla.predict_topk_batch, test.texts(), config.k)
    vanilla_report = evaluate_single_label(test.label_list(), vanilla_pred, config.k)
    vanilla_report.extras["mode"] = "vanilla"
    bundle.reports["vanilla"] = vanilla_report

    if config.search:
        ranking = _stage(
            "search-schedules",
            search_schedules,
            train,
            test,
            triples,
            config=tc,
            mode=Mode(config.mode if config.mode != "both" else "PR"),
            k=config.k,
        )
        bundle.schedule_ranking = ranking
        schedule = ranking[0][0]
    else:
        schedule = tuple(config.schedule)
    model = _stage("train-cascade", train_cascade, train, triples, schedule, tc)
    modes = ["OR", "PR"] if config.mode == "both" else [config.mode]
    for mode_name in modes:
        report = _stage(
            f"eval-{mode_name}", evaluate_cascade, model, test, Mode(mode_name), triples, config.k
        )
        bundle.reports[mode_name] = report

    manifest = {
        "format_version": 1,
        "config": asdict(config),
        "kernel_backend": _kernel.BACKEND,
        "schedule_used": list(schedule),
        "n_records_after_filter": len(corpus),
        "n_train": len(train),
        "n_test": len(test),
        "reports": sorted(bundle.reports),
    }
    _write_json(out / "manifest.json", manifest)
    for name, report in bundle.reports.items():
        report.to_json(out / f"report_{name}.json")
        report.confusion.to_csv(out / f"confusion_{name}.csv")
    if bundle.schedule_ranking:
        _write_json(
            out / "schedule_ranking.json",
            [
                {"schedule": list(s), "accuracy": r.accuracy, "micro_f1": r.micro_f1, "macro_f1": r.macro_f1}
                for s, r in bundle.schedule_ranking
            ],
        )
    return bundle


def run_from_manifest(manifest_path: str | Path, output_dir: str | Path) -> RunBundle:
    """Re-run an experiment exactly as captured in its manifest."""
    manifest = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
    raw = dict(manifest["config"])
    raw["output_dir"] = str(output_dir)
    if raw.get("schedule") is not None:
        raw["schedule"] = tuple(raw["schedule"])
    config = ExperimentConfig(**raw)
    return run_pipeline(config)


def threshold_sweep(config: ExperimentConfig, thresholds) -> list[dict]:
    """Filter/retrain/evaluate per threshold; rows mirror the sweep table
    (threshold, class count, metrics).  Ascending threshold order."""
    thresholds = sorted(set(int(t) for t in thresholds))
    if any(t < 1 for t in thresholds):
        raise ValueError("thresholds must be positive")
    corpus = load_corpus(config.corpus_path, config.corpus_format)
    snapshot, tmap = _resolve_ontology(config)
    rows: list[dict] = []
    for threshold in thresholds:
        row: dict = {"threshold": threshold}
        try:
            filtered = filter_by_min_frequency(corpus, threshold)
        except Exception:
            row.update({"feasible": False, "class_count": 0})
            rows.append(row)
            continue
        row["class_count"] = len(filtered.label_counts)
        try:
            train, test = stratified_split(filtered, SplitSpec(config.train_fraction, config.seed))
            triples = extract_relations_for_corpus(filtered.label_list(), tmap, snapshot)
            model = train_cascade(train, triples, tuple(config.schedule), config.train_config())
            mode = Mode(config.mode if config.mode != "both" else "PR")
            report = evaluate_cascade(model, test, mode, triples, config.k)
            row.update(
                {
                    "feasible": True,
                    "accuracy": report.accuracy,
                    "micro_f1": report.micro_f1,
                    "macro_f1": report.macro_f1,
                    "topk_accuracy": report.topk_accuracy,
                    "topk_f1": report.topk_f1,
                }
            )
        except Exception as exc:
            row.update({"feasible": False, "error": str(exc)})
        rows.append(row)
    return rows


def class_counts_per_threshold(corpus: LabeledCorpus, thresholds) -> dict[int, int]:
    """Number of surviving classes per threshold (no training involved)."""
    counts = corpus.label_counts
    return {
        int(t): sum(1 for c in counts.values() if c >= int(t)) for t in thresholds
    }
