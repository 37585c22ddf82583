"""Tokenization, vocabulary and TF-IDF featurization.

Tokens are lowercase Unicode letter runs of length >= 2 with accents
preserved; no stemming or lemmatization is applied.  IDF is smoothed
(ln((1+N)/(1+df)) + 1) and rows are L2-normalized.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

_TOKEN = re.compile(r"[^\W\d_]{2,}", re.UNICODE)

DEFAULT_MAX_FEATURES = 50_000


def tokenize(text: str) -> list[str]:
    return [t.lower() for t in _TOKEN.findall(text)]


@dataclass
class Vocabulary:
    term_index: dict[str, int] = field(default_factory=dict)
    idf: np.ndarray = field(default_factory=lambda: np.zeros(0))
    document_frequencies: dict[str, int] = field(default_factory=dict)
    n_documents: int = 0

    @property
    def size(self) -> int:
        return len(self.term_index)


def build_vocabulary(texts, max_features: int = DEFAULT_MAX_FEATURES) -> Vocabulary:
    """Build the vocabulary from the training split only.

    When the cap bites, terms are kept by descending document frequency
    with alphabetical tie-break, so the result is deterministic.
    """
    df: dict[str, int] = {}
    n_docs = 0
    for text in texts:
        n_docs += 1
        for term in set(tokenize(text)):
            df[term] = df.get(term, 0) + 1
    terms = sorted(df, key=lambda t: (-df[t], t))[:max_features]
    terms.sort()
    term_index = {t: i for i, t in enumerate(terms)}
    idf = np.array(
        [np.log((1.0 + n_docs) / (1.0 + df[t])) + 1.0 for t in terms], dtype=np.float64
    )
    return Vocabulary(term_index, idf, {t: df[t] for t in terms}, n_docs)


def transform(texts, vocab: Vocabulary) -> sp.csr_matrix:
    """TF-IDF matrix for a list of documents.

    Out-of-vocabulary terms contribute nothing; rows are L2-normalized
    (all-zero rows are left as zeros).
    """
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for text in texts:
        counts: dict[int, int] = {}
        for term in tokenize(text):
            j = vocab.term_index.get(term)
            if j is not None:
                counts[j] = counts.get(j, 0) + 1
        for j in sorted(counts):
            indices.append(j)
            data.append(counts[j] * vocab.idf[j])
        indptr.append(len(indices))
    X = sp.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int32), indptr),
        shape=(len(indptr) - 1, vocab.size),
    )
    norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
    norms[norms == 0] = 1.0
    inv = sp.diags(1.0 / norms)
    X = (inv @ X).tocsr()
    X.data = np.ascontiguousarray(X.data, dtype=np.float64)
    return X
