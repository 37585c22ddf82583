import json

import pytest

from dermpath.corpus import save_corpus
from dermpath.fixtures import generate_synthetic_corpus
from dermpath.pipeline import (
    ExperimentConfig,
    PipelineError,
    class_counts_per_threshold,
    run_from_manifest,
    run_pipeline,
    threshold_sweep,
)


@pytest.fixture(scope="module")
def fixture_corpus_file(tmp_path_factory):
    corpus = generate_synthetic_corpus(n_docs=500, seed=3)
    path = tmp_path_factory.mktemp("data") / "corpus.jsonl"
    save_corpus(corpus, path)
    return path


def _config(corpus_path, out_dir, **overrides):
    values = dict(
        corpus_path=str(corpus_path),
        output_dir=str(out_dir),
        min_count=2,
        mode="both",
        schedule=("t", "sit"),
        epochs=3,
        learning_rate=0.5,
    )
    values.update(overrides)
    return ExperimentConfig(**values)


def test_run_pipeline_outputs(tmp_path, fixture_corpus_file):
    out = tmp_path / "run1"
    bundle = run_pipeline(_config(fixture_corpus_file, out))
    assert set(bundle.reports) == {"vanilla", "OR", "PR"}
    for name in ("vanilla", "OR", "PR"):
        assert (out / f"report_{name}.json").exists()
        assert (out / f"confusion_{name}.csv").exists()
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["schedule_used"] == ["t", "sit"]
    assert manifest["kernel_backend"] in ("cython", "numpy")
    assert manifest["n_train"] + manifest["n_test"] == manifest["n_records_after_filter"]


def test_manifest_rerun_byte_identical(tmp_path, fixture_corpus_file):
    out1 = tmp_path / "run1"
    out2 = tmp_path / "run2"
    run_pipeline(_config(fixture_corpus_file, out1))
    run_from_manifest(out1 / "manifest.json", out2)
    for name in ("report_vanilla.json", "report_OR.json", "report_PR.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name
    m1 = json.loads((out1 / "manifest.json").read_text(encoding="utf-8"))
    m2 = json.loads((out2 / "manifest.json").read_text(encoding="utf-8"))
    m1["config"].pop("output_dir")
    m2["config"].pop("output_dir")
    assert m1 == m2


def test_pipeline_search_writes_ranking(tmp_path, fixture_corpus_file):
    out = tmp_path / "run-search"
    bundle = run_pipeline(
        _config(fixture_corpus_file, out, search=True, mode="PR", epochs=2)
    )
    assert len(bundle.schedule_ranking) == 15
    ranking = json.loads((out / "schedule_ranking.json").read_text(encoding="utf-8"))
    assert len(ranking) == 15
    accs = [row["accuracy"] for row in ranking]
    assert accs == sorted(accs, reverse=True)


def test_pipeline_stage_error_names_stage_and_cleans_up(tmp_path):
    out = tmp_path / "run-fail"
    config = _config(tmp_path / "missing.jsonl", out)
    with pytest.raises(FileNotFoundError):
        config.validate()
    # force past validate by writing an empty-ish corpus that fails later
    bad = tmp_path / "bad.jsonl"
    bad.write_text(
        '{"id": "a", "text": "x", "label": "solo"}\n{"id": "b", "text": "y", "label": "solo"}\n',
        encoding="utf-8",
    )
    with pytest.raises(PipelineError) as excinfo:
        run_pipeline(_config(bad, out))
    assert excinfo.value.stage == "relations"
    assert not out.exists()  # partial outputs removed


def test_config_validation(tmp_path, fixture_corpus_file):
    with pytest.raises(ValueError, match="mode"):
        _config(fixture_corpus_file, tmp_path, mode="XX").validate()
    with pytest.raises(ValueError, match="lexicon_dir"):
        _config(fixture_corpus_file, tmp_path, anonymize=True).validate()


def test_threshold_sweep(fixture_corpus_file, tmp_path):
    config = _config(fixture_corpus_file, tmp_path / "sweep", epochs=1)
    rows = threshold_sweep(config, [2, 20, 10_000])
    assert [r["threshold"] for r in rows] == [2, 20, 10_000]
    assert rows[0]["feasible"] and rows[0]["class_count"] == 25
    assert rows[1]["feasible"] and rows[1]["class_count"] == 25  # 20 per class in 500 docs
    assert not rows[2]["feasible"]
    for key in ("accuracy", "micro_f1", "macro_f1"):
        assert key in rows[0]


def test_class_counts_per_threshold():
    corpus = generate_synthetic_corpus(n_docs=500, seed=0)
    counts = class_counts_per_threshold(corpus, [1, 20, 21])
    assert counts == {1: 25, 20: 25, 21: 0}
