"""Rule-based de-identification and the two-reviewer validation workflow.

The masking pipeline runs in a fixed order: digit removal, lexicon-based
entity masking filtered by frequency/domain exception lists, then masking
of the token that follows a title trigger (dr, dra, doctor, doctora).
Surviving matches are replaced with the literal token ``[Entidad]``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import ClinicalRecord, LabeledCorpus

MASK_TOKEN = "[Entidad]"
_MASK_WORD = "entidad"
DEFAULT_TITLE_PATTERNS = ("dr", "dra", "doctor", "doctora")

_DIGITS = re.compile(r"[0-9]+")
_LETTER_RUN = re.compile(r"[^\W\d_]+", re.UNICODE)


class AnonymizerError(Exception):
    pass


@dataclass
class LexiconSet:
    """External word lists driving entity masking.

    All entries are lowercase and accent-preserving.  ``domain_exceptions``
    wins over the name/place lexicons: an excepted token is never masked.
    """

    given_names: set[str] = field(default_factory=set)
    surnames: set[str] = field(default_factory=set)
    places: set[str] = field(default_factory=set)
    frequent_words: set[str] = field(default_factory=set)
    domain_exceptions: set[str] = field(default_factory=set)
    title_patterns: tuple[str, ...] = DEFAULT_TITLE_PATTERNS

    def is_empty(self) -> bool:
        return not (self.given_names or self.surnames or self.places)


def _read_wordlist(path: Path) -> set[str]:
    words: set[str] = set()
    if not path.exists():
        return words
    for line in path.read_text(encoding="utf-8").splitlines():
        entry = line.split("#", 1)[0].strip().lower()
        if entry:
            words.add(entry)
    return words


def load_lexicons(directory: str | Path) -> LexiconSet:
    """Load the lexicon files from a directory.

    Expected files (one entry per line, ``#`` comments, UTF-8):
    given_names.txt, surnames.txt, places.txt, frequent_words.txt,
    domain_exceptions.txt and optionally title_patterns.txt.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise AnonymizerError(f"lexicon directory not found: {directory}")
    titles = _read_wordlist(directory / "title_patterns.txt")
    return LexiconSet(
        given_names=_read_wordlist(directory / "given_names.txt"),
        surnames=_read_wordlist(directory / "surnames.txt"),
        places=_read_wordlist(directory / "places.txt"),
        frequent_words=_read_wordlist(directory / "frequent_words.txt"),
        domain_exceptions=_read_wordlist(directory / "domain_exceptions.txt"),
        title_patterns=tuple(sorted(titles)) if titles else DEFAULT_TITLE_PATTERNS,
    )


@dataclass
class AnonymizationResult:
    masked_text: str
    mask_count: int
    digit_stripped_count: int
    applied_rules: list[tuple[tuple[int, int], str]]


def anonymize_document(text: str, lexicons: LexiconSet) -> AnonymizationResult:
    """Mask sensitive content in one document.

    Rule order: (1) delete digit runs; (2) match given names, surnames and
    places on whole tokens, case-insensitively; (3) drop matches listed in
    frequent_words or domain_exceptions; (4) replace survivors with
    ``[Entidad]``; (5) mask the token following a title trigger.
    """
    if not text:
        return AnonymizationResult("", 0, 0, [])

    stripped, n_digit_chars = _DIGITS.subn("", text)
    digit_count = len(text) - len(stripped) if n_digit_chars else 0

    entity_words = lexicons.given_names | lexicons.surnames | lexicons.places
    protected = lexicons.frequent_words | lexicons.domain_exceptions | {_MASK_WORD}

    tokens = [(m.start(), m.end(), m.group()) for m in _LETTER_RUN.finditer(stripped)]
    to_mask: dict[int, str] = {}
    for i, (start, end, tok) in enumerate(tokens):
        low = tok.lower()
        if low in protected:
            continue
        if low in entity_words:
            to_mask[i] = "lexicon"
    titles = set(lexicons.title_patterns)
    for i, (start, end, tok) in enumerate(tokens):
        if tok.lower() in titles and i + 1 < len(tokens):
            nxt = tokens[i + 1]
            low = nxt[2].lower()
            if low == _MASK_WORD and _is_mask_literal(stripped, nxt[0], nxt[1]):
                continue
            if low in lexicons.domain_exceptions:
                continue
            to_mask.setdefault(i + 1, "title")

    pieces: list[str] = []
    applied: list[tuple[tuple[int, int], str]] = []
    cursor = 0
    for i in sorted(to_mask):
        start, end, _tok = tokens[i]
        pieces.append(stripped[cursor:start])
        pieces.append(MASK_TOKEN)
        applied.append(((start, end), to_mask[i]))
        cursor = end
    pieces.append(stripped[cursor:])
    masked = "".join(pieces)
    return AnonymizationResult(masked, len(applied), digit_count, applied)


def _is_mask_literal(text: str, start: int, end: int) -> bool:
    return start > 0 and text[start - 1] == "[" and end < len(text) and text[end] == "]"


def anonymize_corpus(corpus: LabeledCorpus, lexicons: LexiconSet) -> LabeledCorpus:
    masked = [
        ClinicalRecord(r.id, anonymize_document(r.text, lexicons).masked_text, r.label)
        for r in corpus
    ]
    return LabeledCorpus(masked)


# ---------------------------------------------------------------------------
# Review partition and inter-rater agreement
# ---------------------------------------------------------------------------

JUDGMENTS = ("correct", "over-masked", "under-masked")


@dataclass(frozen=True)
class Verdict:
    record_id: str
    reviewer_id: str
    judgment: str
    note: str = ""
    timestamp: float = 0.0

    def __post_init__(self):
        if self.judgment not in JUDGMENTS:
            raise AnonymizerError(f"judgment must be one of {JUDGMENTS}, got {self.judgment!r}")


@dataclass
class ReviewPartition:
    sample: LabeledCorpus
    subset_a: set[str]
    subset_b: set[str]

    @property
    def shared_ids(self) -> set[str]:
        return self.subset_a & self.subset_b


def _stratified_sample_ids(corpus: LabeledCorpus, fraction: float, rng) -> list[str]:
    """Largest-remainder stratified sample hitting round(fraction * N) total."""
    total_target = int(np.floor(fraction * len(corpus) + 0.5))
    by_label: dict[str, list[str]] = {}
    for r in corpus:
        by_label.setdefault(r.label, []).append(r.id)
    labels = sorted(by_label)
    quotas = {l: fraction * len(by_label[l]) for l in labels}
    take = {l: int(np.floor(quotas[l])) for l in labels}
    remaining = total_target - sum(take.values())
    by_frac = sorted(labels, key=lambda l: (-(quotas[l] - take[l]), l))
    for l in by_frac[: max(0, remaining)]:
        take[l] += 1
    sampled: list[str] = []
    for l in labels:
        ids = by_label[l]
        k = min(take[l], len(ids))
        picked = rng.permutation(len(ids))[:k]
        sampled.extend(ids[i] for i in picked)
    return sampled


def generate_review_partition(
    corpus: LabeledCorpus, fraction: float, overlap_fraction: float, seed: int
) -> ReviewPartition:
    """Draw a stratified review sample and split it into two equal subsets.

    The subsets overlap in round(overlap_fraction * sample size) shared
    records; the remaining unique records are split evenly.  When the
    unique remainder is odd one extra record is moved to the shared set so
    both subsets stay the same size while covering the whole sample.
    """
    if not 0 < fraction <= 1:
        raise AnonymizerError(f"fraction must be in (0,1], got {fraction}")
    if not 0 <= overlap_fraction < 1:
        raise AnonymizerError(f"overlap_fraction must be in [0,1), got {overlap_fraction}")
    rng = np.random.default_rng(seed)
    sample_ids = _stratified_sample_ids(corpus, fraction, rng)
    n = len(sample_ids)
    if n < 2:
        raise AnonymizerError(f"review sample too small ({n} records)")
    n_shared = int(np.floor(overlap_fraction * n + 0.5))
    if (n - n_shared) % 2 == 1:
        n_shared += 1
    if n_shared > n:
        raise AnonymizerError("sample too small to satisfy overlap")
    order = [sample_ids[i] for i in rng.permutation(n)]
    shared = set(order[:n_shared])
    uniques = order[n_shared:]
    half = len(uniques) // 2
    subset_a = shared | set(uniques[:half])
    subset_b = shared | set(uniques[half:])
    id_set = set(sample_ids)
    sample = LabeledCorpus([r for r in corpus if r.id in id_set])
    return ReviewPartition(sample, subset_a, subset_b)


def cohen_kappa(pairs: list[tuple[str, str]]) -> float:
    """Cohen's kappa over paired categorical judgments."""
    n = len(pairs)
    if n == 0:
        raise AnonymizerError("no paired judgments")
    cats = sorted({c for p in pairs for c in p})
    idx = {c: i for i, c in enumerate(cats)}
    table = np.zeros((len(cats), len(cats)))
    for a, b in pairs:
        table[idx[a], idx[b]] += 1
    po = np.trace(table) / n
    pe = float(np.sum(table.sum(axis=1) * table.sum(axis=0))) / (n * n)
    if pe >= 1.0:
        return 1.0 if po >= 1.0 else 0.0
    return float((po - pe) / (1 - pe))


def compute_agreement(
    verdicts: list[Verdict], partition: ReviewPartition
) -> tuple[float, float, set[str]]:
    """Raw agreement, Cohen's kappa and disagreeing record ids on the shared set."""
    shared = partition.shared_ids
    if not shared:
        raise AnonymizerError("partition has no shared records")
    by_key: dict[tuple[str, str], Verdict] = {}
    reviewers: set[str] = set()
    for v in verdicts:
        by_key[(v.record_id, v.reviewer_id)] = v
        reviewers.add(v.reviewer_id)
    if len(reviewers) != 2:
        raise AnonymizerError(f"expected exactly 2 reviewers, saw {sorted(reviewers)}")
    ra, rb = sorted(reviewers)
    pairs: list[tuple[str, str]] = []
    disagreements: set[str] = set()
    for rid in sorted(shared):
        va = by_key.get((rid, ra))
        vb = by_key.get((rid, rb))
        if va is None or vb is None:
            raise AnonymizerError(f"missing verdict on shared record {rid}")
        pairs.append((va.judgment, vb.judgment))
        if va.judgment != vb.judgment:
            disagreements.add(rid)
    raw = 1.0 - len(disagreements) / len(shared)
    return raw, cohen_kappa(pairs), disagreements
