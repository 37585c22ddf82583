"""Relation extraction from a local ontology snapshot.

Each pathology label is translated to an English concept name and looked
up in a frozen snapshot table that records the concept's semantic type,
finding site and severity flags, together with provenance codes from the
source terminologies.  Severity is derived from the flags with a
strongest-wins precedence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

from .corpus import normalize_label

PATH_TYPES = frozenset(
    {
        "proceso neoplasico",
        "proceso autoinmune",
        "precancer",
        "enfermedad",
        "tumor benigno",
        "sin enfermedad",
        "infeccion",
        "sintoma",
        "anormalidad",
        "sindrome",
        "funcion patologica",
        "envenenamiento",
    }
)
SEVERITIES = frozenset({"inofensivo", "leve", "importante", "extrema"})
SITES = frozenset(
    {
        "piel",
        "extremidades",
        "todo",
        "mano",
        "articulaciones",
        "cabeza",
        "cara",
        "pierna",
        "boca",
        "torso",
        "genitales",
        "tejido conectivo",
    }
)
SEVERITY_FLAGS = frozenset({"minor", "major", "morbidity"})

RELATION_NAMES = ("t", "gr", "sit")


class OntologyError(Exception):
    pass


class UnresolvedLabel(OntologyError):
    def __init__(self, label: str):
        super().__init__(f"no translation or snapshot entry for label: {label!r}")
        self.label = label


class MissingRelation(OntologyError):
    def __init__(self, concept: str, component: str):
        super().__init__(f"snapshot entry {concept!r} is missing component: {component}")
        self.component = component


@dataclass(frozen=True)
class RelationTriple:
    path_type: str
    severity: str
    site: str

    def __post_init__(self):
        if self.path_type not in PATH_TYPES:
            raise OntologyError(f"unknown pathology type: {self.path_type!r}")
        if self.severity not in SEVERITIES:
            raise OntologyError(f"unknown severity: {self.severity!r}")
        if self.site not in SITES:
            raise OntologyError(f"unknown site: {self.site!r}")

    def value(self, relation: str) -> str:
        if relation == "t":
            return self.path_type
        if relation == "gr":
            return self.severity
        if relation == "sit":
            return self.site
        raise OntologyError(f"unknown relation name: {relation!r}")


@dataclass
class SnapshotEntry:
    semantic_type: str
    finding_site: str
    severity_flags: frozenset
    source_codes: dict = field(default_factory=dict)


@dataclass
class OntologySnapshot:
    entries: dict[str, SnapshotEntry] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class TranslationMap:
    entries: dict[str, str] = field(default_factory=dict)
    fallback_client: Optional[Callable[[str], str]] = None


def derive_severity(flags, literal_order: bool = False) -> str:
    """Map the severity flag subset to the severity category.

    Default precedence is strongest-wins (morbidity > major > minor); the
    ``literal_order`` switch keeps the minor-first if/elif chain for audit
    comparisons.
    """
    flags = set(flags)
    unknown = flags - SEVERITY_FLAGS
    if unknown:
        raise OntologyError(f"unknown severity flags: {sorted(unknown)}")
    if literal_order:
        if "minor" in flags:
            return "leve"
        if "major" in flags:
            return "importante"
        if "morbidity" in flags:
            return "extrema"
        return "inofensivo"
    if "morbidity" in flags:
        return "extrema"
    if "major" in flags:
        return "importante"
    if "minor" in flags:
        return "leve"
    return "inofensivo"


def translate_label(label: str, translation_map: TranslationMap) -> str:
    label = normalize_label(label)
    hit = translation_map.entries.get(label)
    if hit is not None:
        return hit
    if translation_map.fallback_client is not None:
        translated = translation_map.fallback_client(label).strip().lower()
        translation_map.entries[label] = translated
        return translated
    raise UnresolvedLabel(label)


def extract_relations(
    label: str, translation_map: TranslationMap, snapshot: OntologySnapshot
) -> RelationTriple:
    """Resolve a Spanish pathology label to its (type, severity, site) triple."""
    concept = translate_label(label, translation_map)
    entry = snapshot.entries.get(concept)
    if entry is None:
        raise UnresolvedLabel(label)
    if not entry.semantic_type:
        raise MissingRelation(concept, "semantic_type")
    if not entry.finding_site:
        raise MissingRelation(concept, "finding_site")
    return RelationTriple(
        path_type=entry.semantic_type,
        severity=derive_severity(entry.severity_flags),
        site=entry.finding_site,
    )


def extract_relations_for_corpus(labels, translation_map, snapshot) -> dict[str, RelationTriple]:
    """Triples for every distinct label; fails listing all unresolved labels."""
    triples: dict[str, RelationTriple] = {}
    unresolved: list[str] = []
    for label in sorted(set(labels)):
        try:
            triples[label] = extract_relations(label, translation_map, snapshot)
        except UnresolvedLabel:
            unresolved.append(label)
    if unresolved:
        raise OntologyError("unresolved labels: " + ", ".join(unresolved))
    return triples


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------


def _parse_codes(raw: str) -> dict[str, str]:
    codes: dict[str, str] = {}
    for part in raw.split(";"):
        part = part.strip()
        if not part or part == "-":
            continue
        if "=" not in part:
            raise OntologyError(f"malformed code entry: {part!r}")
        name, code = part.split("=", 1)
        codes[name.strip()] = code.strip()
    return codes


def load_snapshot(path: str | Path) -> OntologySnapshot:
    """Load a snapshot TSV: english_name, semantic_type, finding_site,
    severity_flags (semicolon-joined), codes (ontology=code;...)."""
    path = Path(path)
    snapshot = OntologySnapshot()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) < 4:
                raise OntologyError(f"line {lineno}: expected >= 4 tab-separated columns")
            name = cols[0].strip().lower()
            semantic_type = cols[1].strip()
            finding_site = cols[2].strip()
            raw_flags = [f for f in cols[3].strip().split(";") if f and f != "-"]
            codes = _parse_codes(cols[4]) if len(cols) > 4 else {}
            if semantic_type and semantic_type not in PATH_TYPES:
                raise OntologyError(f"line {lineno}: unknown semantic type {semantic_type!r}")
            if finding_site and finding_site not in SITES:
                raise OntologyError(f"line {lineno}: unknown finding site {finding_site!r}")
            bad = set(raw_flags) - SEVERITY_FLAGS
            if bad:
                raise OntologyError(f"line {lineno}: unknown severity flags {sorted(bad)}")
            snapshot.entries[name] = SnapshotEntry(
                semantic_type=semantic_type,
                finding_site=finding_site,
                severity_flags=frozenset(raw_flags),
                source_codes=codes,
            )
    return snapshot


def load_translation_map(path: str | Path, fallback_client=None) -> TranslationMap:
    """Two-column TSV: spanish_label <TAB> english_concept_name."""
    path = Path(path)
    entries: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise OntologyError(f"line {lineno}: expected 2 tab-separated columns")
            entries[normalize_label(cols[0])] = cols[1].strip().lower()
    return TranslationMap(entries=entries, fallback_client=fallback_client)


def _asset_path(name: str) -> Path:
    return Path(str(resources.files("dermpath").joinpath("assets", name)))


def reference_snapshot() -> OntologySnapshot:
    """The shipped snapshot covering all 47 reference diseases."""
    return load_snapshot(_asset_path("ontology_snapshot.tsv"))


def reference_translation_map(fallback_client=None) -> TranslationMap:
    return load_translation_map(_asset_path("translation_map.tsv"), fallback_client)
