"""Labeled-corpus ingestion, class-frequency filtering and stratified splitting.

A corpus is an ordered list of (id, text, label) records.  Labels are
normalized to lowercase with collapsed whitespace so that counts and
class thresholds behave predictably across CSV/JSONL exports.
"""

from __future__ import annotations

import csv
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

_WS = re.compile(r"\s+")


class CorpusError(Exception):
    """Raised on malformed corpus files or rows violating preconditions."""


def normalize_label(label: str) -> str:
    """Lowercase, trim and collapse internal whitespace."""
    return _WS.sub(" ", label.strip()).lower()


@dataclass(frozen=True)
class ClinicalRecord:
    """One de-identified report text plus its single pathology label."""

    id: str
    text: str
    label: str


@dataclass
class LabeledCorpus:
    records: list[ClinicalRecord] = field(default_factory=list)

    @property
    def label_counts(self) -> Counter:
        return Counter(r.label for r in self.records)

    @property
    def labels(self) -> list[str]:
        return sorted(self.label_counts)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def texts(self) -> list[str]:
        return [r.text for r in self.records]

    def label_list(self) -> list[str]:
        return [r.label for r in self.records]


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 42
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must be in (0,1), got {self.train_fraction}")


def _make_record(row_index: int, rid, text, label) -> ClinicalRecord:
    if label is None or not str(label).strip():
        raise CorpusError(f"row {row_index}: missing or blank label")
    if text is None:
        raise CorpusError(f"row {row_index}: missing text field")
    return ClinicalRecord(id=str(rid), text=str(text), label=normalize_label(str(label)))


def load_corpus(path: str | Path, format: str = "jsonl") -> LabeledCorpus:
    """Load a corpus from a JSONL or CSV export.

    JSONL rows carry keys id/text/label; CSV has a header ``id,text,label``.
    Row-level problems (blank label, missing field) are reported with the
    offending row index; file-level parse failures name the byte offset.
    """
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"corpus file not found: {path}")
    records: list[ClinicalRecord] = []
    seen_ids: set[str] = set()
    if format == "jsonl":
        offset = 0
        with open(path, "rb") as fh:
            for i, raw in enumerate(fh):
                line = raw.decode("utf-8").strip()
                if line:
                    try:
                        obj = json.loads(line)
                    except json.JSONDecodeError as exc:
                        raise CorpusError(
                            f"malformed JSON at byte offset {offset}: {exc}"
                        ) from exc
                    records.append(_make_record(i, obj.get("id", i), obj.get("text"), obj.get("label")))
                offset += len(raw)
    elif format == "csv":
        with open(path, encoding="utf-8", newline="") as fh:
            try:
                reader = csv.DictReader(fh)
                for i, row in enumerate(reader):
                    records.append(_make_record(i, row.get("id", i), row.get("text"), row.get("label")))
            except csv.Error as exc:
                raise CorpusError(f"malformed CSV near byte offset {fh.tell()}: {exc}") from exc
    else:
        raise CorpusError(f"unknown corpus format: {format!r} (expected jsonl or csv)")
    for rec in records:
        if rec.id in seen_ids:
            raise CorpusError(f"duplicate record id: {rec.id}")
        seen_ids.add(rec.id)
    return LabeledCorpus(records)


def save_corpus(corpus: LabeledCorpus, path: str | Path, format: str = "jsonl") -> None:
    path = Path(path)
    if format == "jsonl":
        with open(path, "w", encoding="utf-8") as fh:
            for r in corpus:
                fh.write(json.dumps({"id": r.id, "text": r.text, "label": r.label}, ensure_ascii=False) + "\n")
    elif format == "csv":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["id", "text", "label"])
            for r in corpus:
                writer.writerow([r.id, r.text, r.label])
    else:
        raise CorpusError(f"unknown corpus format: {format!r}")


def filter_by_min_frequency(corpus: LabeledCorpus, min_count: int) -> LabeledCorpus:
    """Keep the records whose label occurs at least ``min_count`` times.

    The threshold is inclusive and evaluated against the input corpus,
    which makes the operation idempotent. Relative record order is kept.
    """
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    counts = corpus.label_counts
    kept = [r for r in corpus if counts[r.label] >= min_count]
    if not kept:
        raise CorpusError(f"no classes survive threshold min_count={min_count}")
    return LabeledCorpus(kept)


def stratified_split(corpus: LabeledCorpus, spec: SplitSpec) -> tuple[LabeledCorpus, LabeledCorpus]:
    """Split into train/test, per-label when stratified.

    Per-label train count is round(train_fraction * count), clamped so
    both sides keep at least one record. Deterministic under the seed.
    """
    rng = np.random.default_rng(spec.seed)
    counts = corpus.label_counts
    if spec.stratified:
        singletons = sorted(l for l, c in counts.items() if c < 2)
        if singletons:
            raise CorpusError(
                "stratified split needs >= 2 records per label; offending labels: "
                + ", ".join(singletons)
            )
        train_ids: set[str] = set()
        by_label: dict[str, list[ClinicalRecord]] = {}
        for r in corpus:
            by_label.setdefault(r.label, []).append(r)
        for label in sorted(by_label):
            group = by_label[label]
            n = len(group)
            n_train = int(np.floor(spec.train_fraction * n + 0.5))
            n_train = max(1, min(n - 1, n_train))
            picked = rng.permutation(n)[:n_train]
            train_ids.update(group[i].id for i in picked)
        train = [r for r in corpus if r.id in train_ids]
        test = [r for r in corpus if r.id not in train_ids]
    else:
        n = len(corpus)
        n_train = max(1, min(n - 1, int(np.floor(spec.train_fraction * n + 0.5))))
        picked = set(rng.permutation(n)[:n_train].tolist())
        train = [r for i, r in enumerate(corpus) if i in picked]
        test = [r for i, r in enumerate(corpus) if i not in picked]
    return LabeledCorpus(train), LabeledCorpus(test)
