import json

import pytest

_acceptance_results = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call" or "test_acceptance" not in str(item.fspath):
        return
    if report.skipped:
        _acceptance_results[item.name] = "SKIP"
    else:
        _acceptance_results[item.name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for name, outcome in _acceptance_results.items():
        terminalreporter.write_line(f"  {outcome}  {name}")

from dermpath.anonymizer import LexiconSet
from dermpath.corpus import ClinicalRecord, LabeledCorpus


@pytest.fixture
def small_corpus():
    recs = []
    for i in range(30):
        label = ["acné", "psoriasis", "melanoma"][i % 3]
        recs.append(ClinicalRecord(f"r{i:03d}", f"texto de prueba numero {i} sobre {label}", label))
    return LabeledCorpus(recs)


@pytest.fixture
def small_lexicons():
    return LexiconSet(
        given_names={"maría", "josé"},
        surnames={"garcía", "pérez", "seco"},
        places={"madrid", "oviedo"},
        frequent_words={"rosa"},
        domain_exceptions={"seco", "cabello", "benigno"},
    )


@pytest.fixture
def jsonl_corpus_file(tmp_path, small_corpus):
    path = tmp_path / "corpus.jsonl"
    with open(path, "w", encoding="utf-8") as fh:
        for r in small_corpus:
            fh.write(json.dumps({"id": r.id, "text": r.text, "label": r.label}, ensure_ascii=False) + "\n")
    return path
