"""JSON-over-HTTP review API backing the adjudication frontend.

All sampling/agreement logic lives in the review/anonymizer modules; the
API is a thin, versioned surface under /api/v1/.  Masked text only is
served unless the operator explicitly enables originals.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .anonymizer import JUDGMENTS, Verdict
from .review import ConflictError, ReviewError, ReviewSession


class VerdictIn(BaseModel):
    record_id: str
    reviewer_id: str
    judgment: str
    note: str = ""


def create_app(session: ReviewSession, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="dermpath review API", version="1")
    records = {r.id: r for r in session.partition.sample}

    def _check_reviewer(reviewer_id: str):
        if reviewer_id not in session.reviewers:
            raise HTTPException(status_code=404, detail=f"unknown reviewer: {reviewer_id}")

    @app.get("/api/v1/reviewers/{reviewer_id}/next")
    def next_document(reviewer_id: str):
        _check_reviewer(reviewer_id)
        progress = session.progress()[reviewer_id]
        rid = session.next_unjudged(reviewer_id)
        if rid is None:
            return {"done": True, "progress": progress}
        record = records[rid]
        return {
            "done": False,
            "record_id": rid,
            "masked_text": record.text,
            "label": record.label,
            "progress": progress,
        }

    @app.post("/api/v1/verdicts", status_code=201)
    def post_verdict(payload: VerdictIn):
        return _submit(payload, supersede=False)

    @app.post("/api/v1/verdicts/supersede", status_code=201)
    def supersede_verdict(payload: VerdictIn):
        return _submit(payload, supersede=True)

    def _submit(payload: VerdictIn, supersede: bool):
        _check_reviewer(payload.reviewer_id)
        if payload.judgment not in JUDGMENTS:
            raise HTTPException(
                status_code=422, detail=f"judgment must be one of {list(JUDGMENTS)}"
            )
        if payload.record_id not in records:
            raise HTTPException(status_code=404, detail=f"unknown record: {payload.record_id}")
        verdict = Verdict(
            record_id=payload.record_id,
            reviewer_id=payload.reviewer_id,
            judgment=payload.judgment,
            note=payload.note,
        )
        try:
            session.submit(verdict, supersede=supersede)
        except ConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except ReviewError as exc:
            raise HTTPException(status_code=403, detail=str(exc))
        return {"ok": True, "progress": session.progress()[payload.reviewer_id]}

    @app.get("/api/v1/progress")
    def progress():
        shared = sorted(session.partition.shared_ids)
        judged_shared = sum(
            1
            for rid in shared
            if all(session.store.get(rid, rev) is not None for rev in session.reviewers)
        )
        return {
            "reviewers": session.progress(),
            "shared_total": len(shared),
            "shared_judged": judged_shared,
        }

    @app.get("/api/v1/agreement")
    def agreement():
        if not session.shared_complete():
            shared = sorted(session.partition.shared_ids)
            judged = sum(
                1
                for rid in shared
                if all(session.store.get(rid, rev) is not None for rev in session.reviewers)
            )
            return {"status": "incomplete", "shared_total": len(shared), "shared_judged": judged}
        raw, kappa, disagreements = session.agreement()
        return {
            "status": "complete",
            "raw_agreement": raw,
            "kappa": kappa,
            "disagreements": sorted(disagreements),
        }

    @app.get("/api/v1/disagreements")
    def disagreements():
        if not session.shared_complete():
            raise HTTPException(status_code=409, detail="shared set not fully judged yet")
        return {"disagreements": session.disagreement_export()}

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
