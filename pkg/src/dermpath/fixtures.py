"""Deterministic synthetic fixtures.

The cascade fixture emits ~5,000 pseudo-clinical notes over 25 reference
diseases whose identity is a deterministic function of (pathology type,
anatomical site).  Each note carries at most one type token and one site
token, drawn from a wide per-value synonym pool, buried in filler.  The
wide pools make per-disease estimation data-starved for a direct 25-way
classifier, while stage models pool the same evidence across every
disease sharing a relation value.  Severity leaves no trace in the text.

The anonymizer fixture plants lexicon names, digits, titles and domain
exception words with a full record of what was planted where.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .anonymizer import LexiconSet
from .corpus import ClinicalRecord, LabeledCorpus

# 25 reference diseases with pairwise-distinct (type, site); disease is a
# deterministic function of the pair.
FIXTURE_DISEASES = (
    "carcinoma de células basales",
    "psoriasis",
    "nevus melanocítico",
    "acné",
    "queratosis actínica",
    "eccema",
    "queratosis seborreica",
    "dermatitis atópica",
    "sin diagnóstico",
    "nevus melanocítico adquirido",
    "melanoma",
    "lupus eritematoso",
    "verruga periungueal",
    "urticaria crónica",
    "hemangioma",
    "alopecia areata",
    "quiste epidérmico",
    "fibroma",
    "llaga",
    "rosácea",
    "nevus melanocítico atípico",
    "granuloma",
    "lentigo pielar",
    "liquen escleroatrófico",
    "pitiriasis rubra pilaris",
)

NOISE_WORDS = (
    "paciente consulta refiere presenta evolución tratamiento control revisión "
    "pauta crema tópica exploración aspecto zona lesión valoración alta seguimiento "
    "dermatología historia antecedentes familiares sin cambios mejoría persistencia "
    "aplicar semanas meses próxima cita derivación biopsia resultado pendiente "
    "observa aprecia compatible clínica diagnóstico impresión juicio plan continuar "
    "suspender iniciar respuesta parcial completa buena tolerancia efectos"
).split()

# Width of each per-value synonym pool.  40 synonyms per type/site value
# means a single (disease, synonym) pair is only seen a handful of times
# in 5k docs, while a (value, synonym) pair pooled over all diseases with
# that value is seen much more often.
SYNONYM_POOL = 40


def _synonym(prefix: str, value_idx: int, syn_idx: int) -> str:
    # letters only: the tokenizer drops digit-bearing tokens
    return prefix + chr(97 + value_idx) + "q" + chr(97 + syn_idx // 26) + chr(97 + syn_idx % 26)


def relation_vocabularies(triples: dict) -> tuple[dict, dict]:
    """Per-value synonym lists for type and site, keyed by relation value."""
    types = sorted({t.path_type for t in triples.values()})
    sites = sorted({t.site for t in triples.values()})
    type_vocab = {
        t: [_synonym("tipo", i, j) for j in range(SYNONYM_POOL)] for i, t in enumerate(types)
    }
    site_vocab = {
        s: [_synonym("sitio", i, j) for j in range(SYNONYM_POOL)] for i, s in enumerate(sites)
    }
    return type_vocab, site_vocab


def generate_synthetic_corpus(
    n_docs: int = 5000,
    seed: int = 1234,
    p_evidence: float = 0.9,
    triples=None,
) -> LabeledCorpus:
    """Build the cascade fixture corpus; deterministic under seed.

    Each note gets 10-19 filler words plus, with probability p_evidence
    each, one type synonym and one site synonym.  Severity is never
    mentioned.
    """
    from .ontology import extract_relations, reference_snapshot, reference_translation_map

    if triples is None:
        snapshot = reference_snapshot()
        tmap = reference_translation_map()
        triples = {d: extract_relations(d, tmap, snapshot) for d in FIXTURE_DISEASES}
    type_vocab, site_vocab = relation_vocabularies(triples)
    rng = np.random.default_rng(seed)
    diseases = list(FIXTURE_DISEASES)
    records = []
    for i in range(n_docs):
        disease = diseases[i % len(diseases)]
        triple = triples[disease]
        words = list(rng.choice(NOISE_WORDS, size=rng.integers(10, 20)))
        if rng.random() < p_evidence:
            words.append(type_vocab[triple.path_type][rng.integers(SYNONYM_POOL)])
        if rng.random() < p_evidence:
            words.append(site_vocab[triple.site][rng.integers(SYNONYM_POOL)])
        rng.shuffle(words)
        records.append(ClinicalRecord(id=f"syn-{i:05d}", text=" ".join(words), label=disease))
    return LabeledCorpus(records)


def fixture_train_config():
    """Training settings used when evaluating models on this fixture.

    The synonym-pool evidence is deliberately thin, so the fixture runs
    need a larger step size and budget than the production defaults to
    reach a converged comparison.
    """
    from .learner import TrainConfig

    return TrainConfig(seed=42, learning_rate=1.0, epochs=100)


# ---------------------------------------------------------------------------
# Anonymizer fixture
# ---------------------------------------------------------------------------

FIXTURE_GIVEN_NAMES = ["maría", "josé", "carmen", "antonio", "lucía", "manuel", "pilar", "javier"]
FIXTURE_SURNAMES = ["garcía", "fernández", "pérez", "lópez", "martínez", "sánchez", "gómez", "ruiz"]
FIXTURE_PLACES = ["madrid", "oviedo", "gijón", "sevilla", "valdecilla", "cabueñes"]
FIXTURE_EXCEPTIONS = ["cabello", "seco", "benigno", "mancha", "lunar", "costra", "prurito"]
FIXTURE_FILLER = (
    "revisión de la zona afectada con buena respuesta al tratamiento pautado se "
    "recomienda continuar con la crema y volver a consulta si hay cambios en la piel"
).split()


@dataclass
class AnonymizerFixture:
    documents: list[str]
    lexicons: LexiconSet
    planted_names: list[list[str]] = field(default_factory=list)
    planted_exceptions: list[list[str]] = field(default_factory=list)
    planted_digit_docs: list[bool] = field(default_factory=list)


def generate_anonymizer_fixture(n_docs: int = 1000, seed: int = 99) -> AnonymizerFixture:
    rng = np.random.default_rng(seed)
    lexicons = LexiconSet(
        given_names=set(FIXTURE_GIVEN_NAMES),
        surnames=set(FIXTURE_SURNAMES) | {"seco", "cabello", "benigno"},
        places=set(FIXTURE_PLACES),
        frequent_words=set(),
        domain_exceptions=set(FIXTURE_EXCEPTIONS),
    )
    fixture = AnonymizerFixture([], lexicons)
    for i in range(n_docs):
        words = list(rng.choice(FIXTURE_FILLER, size=rng.integers(8, 16)))
        names: list[str] = []
        exceptions: list[str] = []
        has_digits = False
        if rng.random() < 0.7:
            name = str(rng.choice(FIXTURE_GIVEN_NAMES + FIXTURE_SURNAMES + FIXTURE_PLACES))
            names.append(name)
            words.append(name.capitalize())
        if rng.random() < 0.5:
            exc = str(rng.choice(FIXTURE_EXCEPTIONS))
            exceptions.append(exc)
            words.append(exc)
        if rng.random() < 0.6:
            has_digits = True
            words.append(f"{rng.integers(1, 29)}/{rng.integers(1, 13)}/{rng.integers(1990, 2024)}")
        rng.shuffle(words)
        if rng.random() < 0.4:
            title = str(rng.choice(["dr", "dra", "doctor", "doctora"]))
            surname = str(rng.choice(FIXTURE_SURNAMES))
            names.append(surname)
            words.extend([title, surname.capitalize()])
        fixture.documents.append(" ".join(words))
        fixture.planted_names.append(names)
        fixture.planted_exceptions.append(exceptions)
        fixture.planted_digit_docs.append(has_digits)
    return fixture
