"""Acceptance suite.

One test per acceptance criterion, each with its stated tolerance and
runtime budget.  A summary hook in conftest prints one PASS/FAIL line per
criterion at the end of the run.
"""

import os
import time
import warnings

import numpy as np
import pytest
import scipy.sparse as sp

from dermpath.anonymizer import Verdict, anonymize_document, compute_agreement
from dermpath.cascade import Mode, enumerate_schedules, evaluate_cascade, search_schedules, train_cascade
from dermpath.corpus import SplitSpec, load_corpus, stratified_split
from dermpath.fixtures import (
    FIXTURE_DISEASES,
    fixture_train_config,
    generate_anonymizer_fixture,
    generate_synthetic_corpus,
)
from dermpath.learner import LinearModel, TfidfSoftmaxClassifier, gradient_check
from dermpath.metrics import evaluate_single_label, topk_metrics
from dermpath.ontology import (
    derive_severity,
    extract_relations,
    reference_snapshot,
    reference_translation_map,
)
from dermpath.pipeline import class_counts_per_threshold

# Published disease nomenclature: (tipo, gravedad, sitio) per disease,
# transcribed independently of the shipped snapshot assets.
NOMENCLATURE = {
    "carcinoma de células basales": ("proceso neoplasico", "importante", "piel"),
    "psoriasis": ("proceso autoinmune", "inofensivo", "extremidades"),
    "nevus melanocítico": ("precancer", "inofensivo", "todo"),
    "acné": ("enfermedad", "leve", "todo"),
    "queratosis actínica": ("precancer", "inofensivo", "piel"),
    "carcinoma de células escamosas": ("proceso neoplasico", "extrema", "piel"),
    "eccema": ("enfermedad", "inofensivo", "mano"),
    "queratosis seborreica": ("tumor benigno", "inofensivo", "piel"),
    "dermatitis atópica": ("enfermedad", "inofensivo", "articulaciones"),
    "sin diagnóstico": ("sin enfermedad", "inofensivo", "todo"),
    "nevus melanocítico adquirido": ("proceso neoplasico", "inofensivo", "extremidades"),
    "melanoma": ("proceso neoplasico", "extrema", "todo"),
    "lupus eritematoso": ("proceso autoinmune", "extrema", "tejido conectivo"),
    "verruga periungueal": ("infeccion", "inofensivo", "mano"),
    "urticaria crónica": ("sintoma", "inofensivo", "todo"),
    "hemangioma": ("tumor benigno", "leve", "todo"),
    "alopecia areata": ("proceso autoinmune", "inofensivo", "cabeza"),
    "quiste epidérmico": ("anormalidad", "leve", "cara"),
    "fibroma": ("tumor benigno", "leve", "pierna"),
    "llaga": ("sintoma", "inofensivo", "boca"),
    "rosácea": ("enfermedad", "inofensivo", "cara"),
    "nevus melanocítico atípico": ("proceso neoplasico", "importante", "torso"),
    "granuloma": ("infeccion", "extrema", "genitales"),
    "lentigo pielar": ("sindrome", "leve", "todo"),
    "liquen escleroatrófico": ("proceso autoinmune", "leve", "genitales"),
    "ampollas": ("sintoma", "inofensivo", "mano"),
    "queratosis seborreica irritada": ("enfermedad", "inofensivo", "todo"),
    "pitiriasis rubra pilaris": ("proceso autoinmune", "leve", "articulaciones"),
    "alopecia cicatricial": ("enfermedad", "inofensivo", "cabeza"),
    "urticaria": ("funcion patologica", "leve", "todo"),
    "herpes zóster": ("infeccion", "importante", "torso"),
    "foliculitis": ("enfermedad", "inofensivo", "cabeza"),
    "queilitis actínica": ("precancer", "leve", "boca"),
    "acné noduloquístico": ("infeccion", "leve", "cara"),
    "prúrigo": ("sintoma", "inofensivo", "cabeza"),
    "alopecia androgenética": ("enfermedad", "inofensivo", "cabeza"),
    "nevus intradérmico": ("precancer", "inofensivo", "piel"),
    "dermatitis seborreica": ("proceso autoinmune", "inofensivo", "cara"),
    "vasculitis": ("proceso autoinmune", "extrema", "articulaciones"),
    "psoriasis palmoplantar": ("enfermedad", "leve", "extremidades"),
    "eccema crónico": ("enfermedad", "inofensivo", "mano"),
    "micosis": ("infeccion", "importante", "todo"),
    "melanoma in situ": ("proceso neoplasico", "inofensivo", "todo"),
    "reacción a fármacos": ("envenenamiento", "inofensivo", "todo"),
    "condiloma": ("infeccion", "leve", "genitales"),
    "hiperpigmentación": ("anormalidad", "inofensivo", "todo"),
    "dermatitis de contacto": ("enfermedad", "inofensivo", "mano"),
}


def test_nomenclature_reproduction():
    """47/47 (tipo, gravedad, sitio) triples exact, < 1 s."""
    assert len(NOMENCLATURE) == 47
    snapshot = reference_snapshot()
    tmap = reference_translation_map()
    start = time.perf_counter()
    mismatches = []
    for disease, (tipo, gravedad, sitio) in NOMENCLATURE.items():
        triple = extract_relations(disease, tmap, snapshot)
        got = (triple.path_type, triple.severity, triple.site)
        if got != (tipo, gravedad, sitio):
            mismatches.append((disease, got, (tipo, gravedad, sitio)))
    elapsed = time.perf_counter() - start
    assert not mismatches, mismatches
    assert elapsed < 1.0, f"took {elapsed:.3f}s"


def test_schedule_enumeration():
    """Exactly 15 schedules over three relations, < 1 ms."""
    start = time.perf_counter()
    schedules = enumerate_schedules(("t", "gr", "sit"), 3)
    elapsed = time.perf_counter() - start
    assert len(schedules) == 15
    assert len(set(schedules)) == 15
    assert elapsed < 1e-3, f"took {elapsed * 1e3:.3f} ms"


def test_severity_mapping():
    """All 8 flag subsets, strongest-wins precedence, exact."""
    table = {
        frozenset(): "inofensivo",
        frozenset({"minor"}): "leve",
        frozenset({"major"}): "importante",
        frozenset({"morbidity"}): "extrema",
        frozenset({"minor", "major"}): "importante",
        frozenset({"minor", "morbidity"}): "extrema",
        frozenset({"major", "morbidity"}): "extrema",
        frozenset({"minor", "major", "morbidity"}): "extrema",
    }
    assert len(table) == 8
    for flags, expected in table.items():
        assert derive_severity(flags) == expected, sorted(flags)


def test_metrics_oracle_equivalence():
    """200 random instances vs brute-force oracle, <= 1e-12, < 30 s."""
    from test_metrics import brute_force_metrics

    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    for trial in range(200):
        n_classes = int(rng.integers(2, 9))
        n_docs = int(rng.integers(1, 101))
        classes = [f"c{i}" for i in range(n_classes)]
        truth = [classes[rng.integers(n_classes)] for _ in range(n_docs)]
        rankings = [
            [classes[i] for i in rng.permutation(n_classes)] for _ in range(n_docs)
        ]
        for k in (1, 2, n_classes):
            if k > n_classes:
                continue
            oracle = brute_force_metrics(truth, rankings, k)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UserWarning)
                report = evaluate_single_label(truth, rankings, k)
            for key in ("accuracy", "micro_f1", "macro_f1", "topk_accuracy", "topk_f1"):
                assert abs(getattr(report, key) - oracle[key]) <= 1e-12, (trial, k, key)
            assert abs(report.micro_f1 - report.accuracy) <= 1e-12
        acc1, _ = topk_metrics(truth, rankings, 1)
        assert abs(acc1 - sum(1 for t, r in zip(truth, rankings) if t == r[0]) / n_docs) <= 1e-12
        acc_all, _ = topk_metrics(truth, rankings, n_classes)
        assert acc_all == 1.0  # full rankings always contain the truth
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0, f"took {elapsed:.1f}s"


def test_gradient_correctness():
    """Analytic vs central-difference gradients, < 1e-5 over 100 instances, < 1 min."""
    rng = np.random.default_rng(99)
    start = time.perf_counter()
    worst = 0.0
    for trial in range(100):
        n_classes = int(rng.integers(2, 6))
        n_features = int(rng.integers(2, 51))
        n_docs = int(rng.integers(2, 40))
        X = sp.random(
            n_docs,
            n_features,
            density=0.5,
            random_state=np.random.RandomState(trial),
            format="csr",
        )
        X.data = np.ascontiguousarray(X.data, dtype=np.float64)
        y = rng.integers(0, n_classes, size=n_docs).astype(np.int64)
        W = rng.normal(size=(n_classes, n_features)) * 0.5
        b = rng.normal(size=n_classes) * 0.5
        model = LinearModel(W, b, [f"c{i}" for i in range(n_classes)])
        err = gradient_check(model, X, y, epsilon=1e-6, n_coords=20, seed=trial)
        worst = max(worst, err)
        assert err < 1e-5, (trial, err)
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0, f"took {elapsed:.1f}s (worst rel err {worst:.2e})"


def test_anonymizer_guarantees():
    """1,000-doc fixture: no digits, all planted names masked, no
    exceptions masked, idempotent, < 10 s."""
    fixture = generate_anonymizer_fixture(n_docs=1000, seed=99)
    start = time.perf_counter()
    results = [anonymize_document(doc, fixture.lexicons) for doc in fixture.documents]
    elapsed = time.perf_counter() - start
    names_total = names_masked = 0
    exceptions_masked = 0
    for res, names, exceptions in zip(
        results, fixture.planted_names, fixture.planted_exceptions
    ):
        assert not any(c.isdigit() for c in res.masked_text)
        words = [w.lower() for w in res.masked_text.split()]
        for name in names:
            names_total += 1
            if name not in words:
                names_masked += 1
        for exc in exceptions:
            if exc not in words:
                exceptions_masked += 1
        again = anonymize_document(res.masked_text, fixture.lexicons)
        assert again.masked_text == res.masked_text
    assert names_total > 0
    assert names_masked == names_total, f"{names_masked}/{names_total} names masked"
    assert exceptions_masked == 0, f"{exceptions_masked} exception words masked"
    assert elapsed < 10.0, f"took {elapsed:.1f}s"


def test_agreement_arithmetic():
    """112 shared docs, 4 disagreements -> raw agreement 0.9643 +- 1e-4."""
    from dermpath.anonymizer import ReviewPartition
    from dermpath.corpus import ClinicalRecord, LabeledCorpus

    recs = [ClinicalRecord(f"s{i:03d}", "texto", "acné") for i in range(112)]
    ids = {r.id for r in recs}
    partition = ReviewPartition(LabeledCorpus(recs), set(ids), set(ids))
    verdicts = []
    for i, r in enumerate(recs):
        verdicts.append(Verdict(r.id, "rev-a", "correct"))
        other = "over-masked" if i < 4 else "correct"
        verdicts.append(Verdict(r.id, "rev-b", other))
    raw, _kappa, disagreements = compute_agreement(verdicts, partition)
    assert len(disagreements) == 4
    assert abs(raw - 0.9643) <= 1e-4, raw


def test_cascade_fixture_behavior():
    """Shipped synthetic corpus: OR >= 0.95; OR - vanilla >= 0.15;
    PR >= vanilla; top searched schedule includes t and sit; < 5 min."""
    start = time.perf_counter()
    snapshot = reference_snapshot()
    tmap = reference_translation_map()
    triples = {d: extract_relations(d, tmap, snapshot) for d in FIXTURE_DISEASES}
    corpus = generate_synthetic_corpus()
    assert len(corpus) == 5000 and len(corpus.label_counts) == 25
    train, test = stratified_split(corpus, SplitSpec(0.8, 42))
    config = fixture_train_config()

    vanilla = TfidfSoftmaxClassifier(config).fit(train.texts(), train.label_list())
    vanilla_report = evaluate_single_label(
        test.label_list(), vanilla.predict_topk_batch(test.texts(), 2), 2
    )
    model = train_cascade(train, triples, ("sit", "gr", "t"), config)
    or_report = evaluate_cascade(model, test, Mode.OR, triples, 2)
    pr_report = evaluate_cascade(model, test, Mode.PR, triples, 2)

    assert or_report.accuracy >= 0.95, f"OR accuracy {or_report.accuracy:.3f}"
    assert or_report.accuracy - vanilla_report.accuracy >= 0.15, (
        f"OR {or_report.accuracy:.3f} vs vanilla {vanilla_report.accuracy:.3f}"
    )
    assert pr_report.accuracy >= vanilla_report.accuracy, (
        f"PR {pr_report.accuracy:.3f} vs vanilla {vanilla_report.accuracy:.3f}"
    )

    ranking = search_schedules(train, test, triples, config=config, mode=Mode.PR, k=2)
    top_schedule = ranking[0][0]
    assert "t" in top_schedule and "sit" in top_schedule, top_schedule
    elapsed = time.perf_counter() - start
    assert elapsed < 300.0, f"took {elapsed:.1f}s"


def test_optional_dataset_checks():
    """Threshold table and corpus shape on the public dermatology dataset
    (skipped with notice when the dataset is not present)."""
    path = os.environ.get("DERMPATH_DERMATES", "")
    if not path or not os.path.exists(path):
        pytest.skip(
            "public dermatology dataset not available; set DERMPATH_DERMATES "
            "to a JSONL export (id/text/label) to enable this check"
        )
    corpus = load_corpus(path, "jsonl")
    assert len(corpus) == 8881
    assert len(corpus.label_counts) == 173
    expected = {2: 173, 10: 76, 25: 44, 50: 27, 61: 25, 75: 20, 100: 15}
    assert class_counts_per_threshold(corpus, expected) == expected


def test_reproducibility_manifest_rerun(tmp_path):
    """Re-running an experiment from its manifest gives byte-identical reports."""
    from dermpath.corpus import save_corpus
    from dermpath.pipeline import ExperimentConfig, run_from_manifest, run_pipeline

    corpus_path = tmp_path / "corpus.jsonl"
    save_corpus(generate_synthetic_corpus(n_docs=400, seed=17), corpus_path)
    config = ExperimentConfig(
        corpus_path=str(corpus_path),
        output_dir=str(tmp_path / "run1"),
        min_count=2,
        mode="both",
        schedule=("t", "sit"),
        epochs=3,
        learning_rate=0.5,
    )
    run_pipeline(config)
    run_from_manifest(tmp_path / "run1" / "manifest.json", tmp_path / "run2")
    for name in ("report_vanilla.json", "report_OR.json", "report_PR.json"):
        original = (tmp_path / "run1" / name).read_bytes()
        rerun = (tmp_path / "run2" / name).read_bytes()
        assert original == rerun, name
