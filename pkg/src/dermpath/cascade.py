"""Staged classifier cascade over ontology relations.

Each schedule is an ordered, repetition-free subset of {t, gr, sit}.
Stage i learns to predict relation schedule[i] from the report text
augmented with the gold values of the earlier relations (teacher
forcing); a final model predicts the disease from the fully augmented
text.  At inference the predictive mode chains each stage's predicted
value into the next stage's input, while oracle mode injects the gold
triple directly and bypasses the stages.
"""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .corpus import LabeledCorpus
from .learner import (
    ConstantClassifier,
    TfidfSoftmaxClassifier,
    TrainConfig,
    classifier_from_dict,
)
from .metrics import MetricReport, evaluate_single_label
from .ontology import PATH_TYPES, RELATION_NAMES, SEVERITIES, SITES, RelationTriple

DEFAULT_MARKER_TEMPLATE = "⟦REL {name}={value}⟧"

_RELATION_VALUES = {"t": PATH_TYPES, "gr": SEVERITIES, "sit": SITES}


class CascadeError(Exception):
    pass


class Mode(Enum):
    OR = "OR"
    PR = "PR"


def enumerate_schedules(relations, max_len: int) -> list[tuple[str, ...]]:
    """All variations without repetition of lengths 1..max_len, in
    deterministic lexical order."""
    relations = sorted(set(relations))
    if not relations:
        raise CascadeError("relations must be non-empty")
    if not 1 <= max_len <= len(relations):
        raise CascadeError(f"max_len must be in [1, {len(relations)}], got {max_len}")
    schedules: list[tuple[str, ...]] = []
    for length in range(1, max_len + 1):
        schedules.extend(itertools.permutations(relations, length))
    return schedules


def augment_input(
    report_text: str, known_relations, template: str = DEFAULT_MARKER_TEMPLATE
) -> str:
    """Concatenate one relation marker per known relation to the report."""
    if not known_relations:
        return report_text
    markers = []
    for name, value in known_relations:
        allowed = _RELATION_VALUES.get(name)
        if allowed is None:
            raise CascadeError(f"unknown relation name: {name!r}")
        if value not in allowed:
            raise CascadeError(f"value {value!r} not valid for relation {name!r}")
        markers.append(template.format(name=name, value=value))
    return report_text + " " + " ".join(markers)


@dataclass
class CascadeModel:
    schedule: tuple[str, ...]
    stage_models: list
    final_model: object
    marker_template: str = DEFAULT_MARKER_TEMPLATE
    # first training document of each stage / the final model, kept for
    # structural inspection of what each model actually saw
    stage_input_examples: list[str] = field(default_factory=list)
    final_input_example: str = ""

    def __post_init__(self):
        if len(self.stage_models) != len(self.schedule):
            raise CascadeError("one stage model required per scheduled relation")


def _check_schedule(schedule) -> tuple[str, ...]:
    schedule = tuple(schedule)
    if not schedule or len(schedule) > len(RELATION_NAMES):
        raise CascadeError(f"schedule length must be 1..{len(RELATION_NAMES)}")
    if len(set(schedule)) != len(schedule):
        raise CascadeError(f"schedule has repeats: {schedule}")
    for rel in schedule:
        if rel not in RELATION_NAMES:
            raise CascadeError(f"unknown relation in schedule: {rel!r}")
    return schedule


def train_cascade(
    train: LabeledCorpus,
    triples: dict[str, RelationTriple],
    schedule,
    config: TrainConfig,
    marker_template: str = DEFAULT_MARKER_TEMPLATE,
    classifier_factory=None,
) -> CascadeModel:
    """Train stage models (teacher forced on gold upstream relations) and
    the final disease model on the fully augmented input."""
    schedule = _check_schedule(schedule)
    if classifier_factory is None:
        classifier_factory = lambda: TfidfSoftmaxClassifier(config)
    missing = sorted(set(train.label_list()) - set(triples))
    if missing:
        raise CascadeError("labels without relation triples: " + ", ".join(missing))

    texts = train.texts()
    labels = train.label_list()
    gold_pairs = [
        [(rel, triples[label].value(rel)) for rel in schedule] for label in labels
    ]

    stage_models: list = []
    stage_examples: list[str] = []
    for i, rel in enumerate(schedule):
        inputs = [
            augment_input(text, pairs[:i], marker_template)
            for text, pairs in zip(texts, gold_pairs)
        ]
        targets = [pairs[i][1] for pairs in gold_pairs]
        stage_examples.append(inputs[0])
        if len(set(targets)) == 1:
            warnings.warn(
                f"stage {rel!r} has a single relation value in training data; "
                "using a constant predictor"
            )
            stage_models.append(ConstantClassifier().fit(inputs, targets))
        else:
            stage_models.append(classifier_factory().fit(inputs, targets))

    final_inputs = [
        augment_input(text, pairs, marker_template) for text, pairs in zip(texts, gold_pairs)
    ]
    final_model = classifier_factory().fit(final_inputs, labels)
    return CascadeModel(
        schedule=schedule,
        stage_models=stage_models,
        final_model=final_model,
        marker_template=marker_template,
        stage_input_examples=stage_examples,
        final_input_example=final_inputs[0],
    )


def _oracle_pairs(model: CascadeModel, triple: RelationTriple):
    return [(rel, triple.value(rel)) for rel in model.schedule]


def infer_cascade(
    model: CascadeModel,
    report_text: str,
    mode: Mode,
    oracle_triple: RelationTriple | None = None,
    k: int = 2,
):
    """Ranked disease predictions for one report."""
    if mode is Mode.OR:
        if oracle_triple is None:
            raise CascadeError("oracle mode requires an oracle triple")
        pairs = _oracle_pairs(model, oracle_triple)
    elif mode is Mode.PR:
        if oracle_triple is not None:
            raise CascadeError("predictive mode forbids an oracle triple")
        pairs = []
        for i, rel in enumerate(model.schedule):
            staged = augment_input(report_text, pairs, model.marker_template)
            predicted = model.stage_models[i].predict_topk(staged, 1)[0][0]
            pairs.append((rel, predicted))
    else:
        raise CascadeError(f"unknown mode: {mode!r}")
    final_input = augment_input(report_text, pairs, model.marker_template)
    return model.final_model.predict_topk(final_input, k)


def infer_cascade_batch(
    model: CascadeModel,
    texts: list[str],
    mode: Mode,
    oracle_triples: list[RelationTriple] | None = None,
    k: int = 2,
) -> list:
    """Batched inference; semantics identical to per-document infer_cascade."""
    if mode is Mode.OR:
        if oracle_triples is None or len(oracle_triples) != len(texts):
            raise CascadeError("oracle mode requires one triple per document")
        all_pairs = [_oracle_pairs(model, t) for t in oracle_triples]
    elif mode is Mode.PR:
        if oracle_triples is not None:
            raise CascadeError("predictive mode forbids oracle triples")
        all_pairs = [[] for _ in texts]
        for i, rel in enumerate(model.schedule):
            staged = [
                augment_input(text, pairs, model.marker_template)
                for text, pairs in zip(texts, all_pairs)
            ]
            predictions = model.stage_models[i].predict_topk_batch(staged, 1)
            for pairs, ranked in zip(all_pairs, predictions):
                pairs.append((rel, ranked[0][0]))
    else:
        raise CascadeError(f"unknown mode: {mode!r}")
    final_inputs = [
        augment_input(text, pairs, model.marker_template)
        for text, pairs in zip(texts, all_pairs)
    ]
    return model.final_model.predict_topk_batch(final_inputs, k)


def evaluate_cascade(
    model: CascadeModel,
    corpus: LabeledCorpus,
    mode: Mode,
    triples: dict[str, RelationTriple] | None = None,
    k: int = 2,
) -> MetricReport:
    texts = corpus.texts()
    truth = corpus.label_list()
    oracle = None
    if mode is Mode.OR:
        if triples is None:
            raise CascadeError("oracle evaluation requires relation triples")
        oracle = [triples[label] for label in truth]
    rankings = infer_cascade_batch(model, texts, mode, oracle, k)
    report = evaluate_single_label(truth, rankings, k)
    report.extras["mode"] = mode.value
    report.extras["schedule"] = list(model.schedule)
    return report


def search_schedules(
    train: LabeledCorpus,
    validation: LabeledCorpus,
    triples: dict[str, RelationTriple],
    relations=RELATION_NAMES,
    config: TrainConfig | None = None,
    mode: Mode = Mode.PR,
    k: int = 2,
    metric_key: str = "accuracy",
    max_len: int | None = None,
) -> list[tuple[tuple[str, ...], MetricReport]]:
    """Train and evaluate one cascade per enumerated schedule, ranked by
    the configured metric (accuracy, micro_f1 or macro_f1)."""
    if metric_key not in ("accuracy", "micro_f1", "macro_f1"):
        raise CascadeError(f"unsupported ranking key: {metric_key!r}")
    config = config or TrainConfig()
    if max_len is None:
        max_len = len(set(relations))
    results: list[tuple[tuple[str, ...], MetricReport]] = []
    for schedule in enumerate_schedules(relations, max_len):
        model = train_cascade(train, triples, schedule, config)
        report = evaluate_cascade(model, validation, mode, triples, k)
        results.append((schedule, report))
    results.sort(key=lambda item: (-getattr(item[1], metric_key), item[0]))
    return results


# ---------------------------------------------------------------------------
# On-disk cascade bundle
# ---------------------------------------------------------------------------


def save_cascade(model: CascadeModel, directory: str | Path, metric_key: str = "accuracy") -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {
        "format_version": 1,
        "schedule": list(model.schedule),
        "marker_template": model.marker_template,
        "metric_key": metric_key,
        "stage_files": [f"stage_{i}_{rel}.json" for i, rel in enumerate(model.schedule)],
        "final_file": "final.json",
    }
    (directory / "manifest.json").write_text(
        json.dumps(manifest, ensure_ascii=False, sort_keys=True, indent=2), encoding="utf-8"
    )
    for fname, stage in zip(manifest["stage_files"], model.stage_models):
        (directory / fname).write_text(
            json.dumps(stage.to_dict(), ensure_ascii=False), encoding="utf-8"
        )
    (directory / "final.json").write_text(
        json.dumps(model.final_model.to_dict(), ensure_ascii=False), encoding="utf-8"
    )


def load_cascade(directory: str | Path) -> CascadeModel:
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text(encoding="utf-8"))
    stages = [
        classifier_from_dict(json.loads((directory / fname).read_text(encoding="utf-8")))
        for fname in manifest["stage_files"]
    ]
    final = classifier_from_dict(
        json.loads((directory / manifest["final_file"]).read_text(encoding="utf-8"))
    )
    return CascadeModel(
        schedule=tuple(manifest["schedule"]),
        stage_models=stages,
        final_model=final,
        marker_template=manifest["marker_template"],
    )
