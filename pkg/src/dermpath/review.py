"""Verdict persistence and the two-reviewer session model.

Verdicts are immutable once posted; corrections go through an explicit
supersede event so the adjudication audit trail is preserved.  Storage is
an append-only JSONL file with a single-writer contract.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

from .anonymizer import (
    AnonymizerError,
    ReviewPartition,
    Verdict,
    compute_agreement,
)


class ReviewError(Exception):
    pass


class ConflictError(ReviewError):
    """Raised on a duplicate verdict without an explicit supersede."""


class VerdictStore:
    """Append-only JSONL verdict log, replayed on open."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._current: dict[tuple[str, str], Verdict] = {}
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self._apply(json.loads(line))

    def _apply(self, event: dict) -> None:
        verdict = Verdict(
            record_id=event["record_id"],
            reviewer_id=event["reviewer_id"],
            judgment=event["judgment"],
            note=event.get("note", ""),
            timestamp=event.get("timestamp", 0.0),
        )
        self._current[(verdict.record_id, verdict.reviewer_id)] = verdict

    def _append(self, event: dict) -> None:
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False) + "\n")

    def get(self, record_id: str, reviewer_id: str) -> Verdict | None:
        return self._current.get((record_id, reviewer_id))

    def post(self, verdict: Verdict, supersede: bool = False) -> None:
        key = (verdict.record_id, verdict.reviewer_id)
        if key in self._current and not supersede:
            raise ConflictError(
                f"verdict already posted for record {verdict.record_id} by "
                f"reviewer {verdict.reviewer_id}; use supersede to amend"
            )
        event = {
            "event": "supersede" if key in self._current else "verdict",
            "record_id": verdict.record_id,
            "reviewer_id": verdict.reviewer_id,
            "judgment": verdict.judgment,
            "note": verdict.note,
            "timestamp": verdict.timestamp or time.time(),
        }
        self._append(event)
        self._apply(event)

    def all_verdicts(self) -> list[Verdict]:
        return list(self._current.values())


@dataclass
class ReviewSession:
    """One adjudication round: a partition, a store and two reviewers.

    The first reviewer works subset A, the second subset B.
    """

    partition: ReviewPartition
    store: VerdictStore
    reviewers: tuple[str, str]

    def __post_init__(self):
        if len(self.reviewers) != 2 or len(set(self.reviewers)) != 2:
            raise ReviewError("exactly two distinct reviewers required")

    def assigned_ids(self, reviewer_id: str) -> set[str]:
        if reviewer_id == self.reviewers[0]:
            return self.partition.subset_a
        if reviewer_id == self.reviewers[1]:
            return self.partition.subset_b
        raise ReviewError(f"unknown reviewer: {reviewer_id!r}")

    def judged_ids(self, reviewer_id: str) -> set[str]:
        assigned = self.assigned_ids(reviewer_id)
        return {rid for rid in assigned if self.store.get(rid, reviewer_id) is not None}

    def next_unjudged(self, reviewer_id: str) -> str | None:
        pending = self.assigned_ids(reviewer_id) - self.judged_ids(reviewer_id)
        return min(pending) if pending else None

    def progress(self) -> dict:
        return {
            rid: {
                "assigned": len(self.assigned_ids(rid)),
                "judged": len(self.judged_ids(rid)),
            }
            for rid in self.reviewers
        }

    def submit(self, verdict: Verdict, supersede: bool = False) -> None:
        assigned = self.assigned_ids(verdict.reviewer_id)
        if verdict.record_id not in assigned:
            raise ReviewError(
                f"record {verdict.record_id} is not assigned to reviewer {verdict.reviewer_id}"
            )
        self.store.post(verdict, supersede=supersede)

    def shared_complete(self) -> bool:
        shared = self.partition.shared_ids
        return all(
            self.store.get(rid, rev) is not None
            for rid in shared
            for rev in self.reviewers
        )

    def agreement(self):
        """(raw agreement, kappa, disagreement ids) over the shared set."""
        if not self.shared_complete():
            raise ReviewError("shared set not fully judged yet")
        try:
            return compute_agreement(self.store.all_verdicts(), self.partition)
        except AnonymizerError as exc:
            raise ReviewError(str(exc)) from exc

    def disagreement_export(self) -> list[dict]:
        """Both verdicts side by side for every disagreeing shared record."""
        _, _, disagreements = self.agreement()
        ra, rb = self.reviewers
        export = []
        for rid in sorted(disagreements):
            va = self.store.get(rid, ra)
            vb = self.store.get(rid, rb)
            export.append(
                {
                    "record_id": rid,
                    "verdicts": {
                        ra: {"judgment": va.judgment, "note": va.note},
                        rb: {"judgment": vb.judgment, "note": vb.note},
                    },
                }
            )
        return export
