import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dermpath.corpus import (
    ClinicalRecord,
    CorpusError,
    LabeledCorpus,
    SplitSpec,
    filter_by_min_frequency,
    load_corpus,
    normalize_label,
    save_corpus,
    stratified_split,
)


def test_normalize_label():
    assert normalize_label("  Acné   Vulgar ") == "acné vulgar"
    assert normalize_label("MELANOMA") == "melanoma"
    assert normalize_label("a\t b\n c") == "a b c"


def test_jsonl_roundtrip(tmp_path, small_corpus):
    path = tmp_path / "c.jsonl"
    save_corpus(small_corpus, path, "jsonl")
    loaded = load_corpus(path, "jsonl")
    assert [(r.id, r.text, r.label) for r in loaded] == [
        (r.id, r.text, r.label) for r in small_corpus
    ]


def test_csv_roundtrip(tmp_path, small_corpus):
    path = tmp_path / "c.csv"
    save_corpus(small_corpus, path, "csv")
    loaded = load_corpus(path, "csv")
    assert [(r.id, r.text, r.label) for r in loaded] == [
        (r.id, r.text, r.label) for r in small_corpus
    ]


def test_load_normalizes_labels(tmp_path):
    path = tmp_path / "c.jsonl"
    path.write_text('{"id": "a", "text": "x", "label": "  MELANOMA  "}\n', encoding="utf-8")
    assert load_corpus(path).records[0].label == "melanoma"


def test_load_missing_file():
    with pytest.raises(CorpusError, match="not found"):
        load_corpus("/nonexistent/corpus.jsonl")


def test_load_bad_json_reports_byte_offset(tmp_path):
    path = tmp_path / "c.jsonl"
    good = '{"id": "a", "text": "x", "label": "l"}\n'
    path.write_text(good + "{broken\n", encoding="utf-8")
    with pytest.raises(CorpusError, match=f"byte offset {len(good.encode())}"):
        load_corpus(path)


def test_load_blank_label_reports_row(tmp_path):
    path = tmp_path / "c.jsonl"
    path.write_text(
        '{"id": "a", "text": "x", "label": "l"}\n{"id": "b", "text": "x", "label": "  "}\n',
        encoding="utf-8",
    )
    with pytest.raises(CorpusError, match="row 1"):
        load_corpus(path)


def test_load_duplicate_ids(tmp_path):
    path = tmp_path / "c.jsonl"
    row = '{"id": "a", "text": "x", "label": "l"}\n'
    path.write_text(row * 2, encoding="utf-8")
    with pytest.raises(CorpusError, match="duplicate record id"):
        load_corpus(path)


def test_unknown_format(tmp_path, small_corpus):
    with pytest.raises(CorpusError, match="unknown corpus format"):
        load_corpus(__file__, "xml")
    with pytest.raises(CorpusError, match="unknown corpus format"):
        save_corpus(small_corpus, tmp_path / "c.xml", "xml")


# -- frequency filter -------------------------------------------------------


def _corpus_from_counts(counts):
    recs = []
    i = 0
    for label, n in counts.items():
        for _ in range(n):
            recs.append(ClinicalRecord(f"r{i}", "texto", label))
            i += 1
    return LabeledCorpus(recs)


def test_filter_inclusive_threshold():
    corpus = _corpus_from_counts({"a": 5, "b": 4})
    kept = filter_by_min_frequency(corpus, 5)
    assert set(kept.label_counts) == {"a"}
    # inclusive: ==5 survives min_count=5


def test_filter_preserves_order():
    corpus = _corpus_from_counts({"a": 3, "b": 1, "c": 2})
    kept = filter_by_min_frequency(corpus, 2)
    ids = [r.id for r in kept]
    assert ids == sorted(ids, key=lambda x: int(x[1:]))


def test_filter_all_removed():
    corpus = _corpus_from_counts({"a": 2, "b": 2})
    with pytest.raises(CorpusError, match="no classes survive"):
        filter_by_min_frequency(corpus, 3)


def test_filter_rejects_bad_min_count(small_corpus):
    with pytest.raises(ValueError):
        filter_by_min_frequency(small_corpus, 0)


@settings(max_examples=50, deadline=None)
@given(
    counts=st.dictionaries(
        st.text(alphabet="abcde", min_size=1, max_size=3),
        st.integers(min_value=1, max_value=8),
        min_size=1,
        max_size=6,
    ),
    threshold=st.integers(min_value=1, max_value=8),
)
def test_filter_idempotent_and_antitone(counts, threshold):
    corpus = _corpus_from_counts(counts)
    try:
        once = filter_by_min_frequency(corpus, threshold)
    except CorpusError:
        return  # nothing survives; nothing further to check
    twice = filter_by_min_frequency(once, threshold)
    assert [r.id for r in twice] == [r.id for r in once]
    assert min(once.label_counts.values()) >= threshold
    if threshold > 1:
        weaker = filter_by_min_frequency(corpus, threshold - 1)
        assert set(r.id for r in once) <= set(r.id for r in weaker)


# -- stratified split -------------------------------------------------------


def test_split_deterministic(small_corpus):
    spec = SplitSpec(0.8, 42)
    t1, e1 = stratified_split(small_corpus, spec)
    t2, e2 = stratified_split(small_corpus, spec)
    assert [r.id for r in t1] == [r.id for r in t2]
    assert [r.id for r in e1] == [r.id for r in e2]


def test_split_seed_changes_partition(small_corpus):
    t1, _ = stratified_split(small_corpus, SplitSpec(0.8, 1))
    t2, _ = stratified_split(small_corpus, SplitSpec(0.8, 2))
    assert {r.id for r in t1} != {r.id for r in t2}


def test_split_disjoint_and_complete(small_corpus):
    train, test = stratified_split(small_corpus, SplitSpec(0.8, 42))
    train_ids = {r.id for r in train}
    test_ids = {r.id for r in test}
    assert not train_ids & test_ids
    assert train_ids | test_ids == {r.id for r in small_corpus}


def test_split_per_label_rounding():
    corpus = _corpus_from_counts({"a": 10, "b": 5})
    train, test = stratified_split(corpus, SplitSpec(0.8, 0))
    # round(8.0)=8 for a, round(4.0)=4 for b
    assert train.label_counts["a"] == 8 and test.label_counts["a"] == 2
    assert train.label_counts["b"] == 4 and test.label_counts["b"] == 1


def test_split_singleton_label_rejected():
    corpus = _corpus_from_counts({"a": 5, "b": 1})
    with pytest.raises(CorpusError, match="offending labels: b"):
        stratified_split(corpus, SplitSpec(0.8, 0))


def test_split_unstratified():
    corpus = _corpus_from_counts({"a": 5, "b": 1})
    train, test = stratified_split(corpus, SplitSpec(0.5, 0, stratified=False))
    assert len(train) + len(test) == 6 and len(train) == 3


def test_split_spec_validation():
    with pytest.raises(ValueError):
        SplitSpec(train_fraction=1.0)
    with pytest.raises(ValueError):
        SplitSpec(train_fraction=0.0)


@settings(max_examples=40, deadline=None)
@given(
    counts=st.dictionaries(
        st.text(alphabet="abcd", min_size=1, max_size=2),
        st.integers(min_value=2, max_value=12),
        min_size=1,
        max_size=5,
    ),
    fraction=st.floats(min_value=0.1, max_value=0.9),
    seed=st.integers(min_value=0, max_value=100),
)
def test_split_every_label_on_both_sides(counts, fraction, seed):
    corpus = _corpus_from_counts(counts)
    train, test = stratified_split(corpus, SplitSpec(fraction, seed))
    for label in counts:
        assert train.label_counts[label] >= 1
        assert test.label_counts[label] >= 1
        assert train.label_counts[label] + test.label_counts[label] == counts[label]
