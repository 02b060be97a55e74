"""Human-in-the-loop review: durable decisions and constrained regeneration.

State model: the pipeline writes alignment records under the run directory;
this module overlays an append-only event log (`review_events.jsonl`) of
decisions and regenerations. Every mutation is fsynced before the call
returns, so killing the process between mutations loses nothing — replaying
the log over the base records always reconstructs the current state.

The HTTP service exposes the review queue, item detail with generated-code
previews, decision and regeneration endpoints, and (when built) the static
dashboard at /.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import yamlio
from .alignment import (
    PropertyAlignment,
    align_property,
    alignment_from_record,
    alignment_record,
)
from .codec import emit_source
from .errors import InvalidTransition, ProviderError, UnknownItem
from .index import build_index
from .providers import CompletionProvider, RuleProvider

EVENTS_FILE = "review_events.jsonl"


@dataclass(frozen=True)
class HistoryEntry:
    timestamp: float
    action: str  # flagged | approve | reject | regenerate
    actor: str
    constraint: str = ""


@dataclass(frozen=True)
class ReviewItem:
    item_id: str
    alignment: PropertyAlignment
    history: tuple[HistoryEntry, ...]
    flag_seq: int

    def summary(self) -> dict:
        return {
            "id": self.item_id,
            "property": self.item_id,
            "status": self.alignment.status,
            "mapping_kind": self.alignment.mapping_kind,
            "contributing_signals": list(self.alignment.contributing_signals),
            "confidence": self.alignment.confidence,
            "candidates": [
                {"signal": name, "similarity": sim}
                for name, sim in self.alignment.candidates
            ],
        }

    def detail(self) -> dict:
        record = self.summary()
        record["alignment"] = alignment_record(self.alignment)
        record["history"] = [
            {
                "timestamp": entry.timestamp,
                "action": entry.action,
                "actor": entry.actor,
                "constraint": entry.constraint,
            }
            for entry in self.history
        ]
        return record


class ReviewStore:
    """Single-writer review state over a run directory."""

    def __init__(self, run_dir: Path | str):
        self.run_dir = Path(run_dir)
        self.events_path = self.run_dir / EVENTS_FILE
        self._lock = threading.Lock()
        self._base = self._load_base()
        self._events = self._load_events()

    # -- persistence ----------------------------------------------------------

    def _load_base(self) -> dict[str, PropertyAlignment]:
        base = {}
        alignment_dir = self.run_dir / "alignments"
        if alignment_dir.is_dir():
            for path in sorted(alignment_dir.glob("*.yaml")):
                record = yamlio.load(path.read_text(encoding="utf-8"))
                base[record["property"]] = alignment_from_record(record)
        return base

    def _load_events(self) -> list[dict]:
        events = []
        if self.events_path.exists():
            with open(self.events_path, "r", encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        events.append(json.loads(line))
        return events

    def _append_event(self, event: dict) -> None:
        """Durable append: flushed and fsynced before returning."""
        event["seq"] = len(self._events) + 1
        event["ts"] = time.time()
        with open(self.events_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        self._events.append(event)

    # -- state reconstruction ---------------------------------------------------

    def effective_alignments(self) -> dict[str, PropertyAlignment]:
        state = dict(self._base)
        for event in self._events:
            item = event["item"]
            if item not in state:
                continue
            if event["type"] == "decision":
                state[item] = _with_status(state[item], event["status"])
            elif event["type"] == "regenerate":
                state[item] = alignment_from_record(event["alignment"])
        return state

    def items(self, status: Optional[str] = None) -> list[ReviewItem]:
        state = self.effective_alignments()
        flag_seq: dict[str, int] = {name: 0 for name in state}
        history: dict[str, list[HistoryEntry]] = {
            name: [HistoryEntry(0.0, "flagged" if a.status == "flagged" else a.status,
                                "pipeline")]
            for name, a in self._base.items()
        }
        for event in self._events:
            item = event["item"]
            if item not in state:
                continue
            if event["type"] == "decision":
                history[item].append(
                    HistoryEntry(event["ts"], event["action"], event["actor"])
                )
            else:
                history[item].append(
                    HistoryEntry(
                        event["ts"], "regenerate", event["actor"],
                        event.get("constraint", ""),
                    )
                )
                if event.get("status") == "flagged":
                    flag_seq[item] = event["seq"]
        items = [
            ReviewItem(
                item_id=name,
                alignment=alignment,
                history=tuple(history[name]),
                flag_seq=flag_seq[name],
            )
            for name, alignment in state.items()
        ]
        if status is not None:
            items = [item for item in items if item.alignment.status == status]
        items.sort(key=lambda item: (item.flag_seq, item.item_id))
        return items

    def item(self, item_id: str) -> ReviewItem:
        for item in self.items():
            if item.item_id == item_id:
                return item
        raise UnknownItem(f"no review item {item_id!r}")

    # -- mutations --------------------------------------------------------------

    def decide(self, item_id: str, action: str, actor: str) -> ReviewItem:
        """Approve/reject a flagged item; durable before returning."""
        from .errors import InvariantError

        with self._lock:
            current = self.item(item_id)
            try:
                updated = current.alignment.decide(action)
            except InvariantError as exc:
                raise InvalidTransition(str(exc)) from exc
            self._append_event(
                {
                    "type": "decision",
                    "item": item_id,
                    "action": action,
                    "actor": actor,
                    "status": updated.status,
                }
            )
        return self.item(item_id)

    def regenerate(
        self,
        item_id: str,
        constraint: str,
        actor: str,
        provider: Optional[CompletionProvider] = None,
    ) -> ReviewItem:
        """Recompute the alignment with the constraint appended as refinement
        instructions; status resets per the similarity thresholds."""
        if not constraint or not constraint.strip():
            raise ValueError("constraint must be non-empty")
        with self._lock:
            current = self.item(item_id)
            constraints = [
                entry.constraint for entry in current.history if entry.constraint
            ]
            constraints.append(constraint)
            alignment = self._recompute(item_id, "\n".join(constraints), provider)
            self._append_event(
                {
                    "type": "regenerate",
                    "item": item_id,
                    "actor": actor,
                    "constraint": constraint,
                    "status": alignment.status,
                    "alignment": alignment_record(alignment),
                }
            )
        return self.item(item_id)

    def _recompute(
        self,
        item_id: str,
        constraint_text: str,
        provider: Optional[CompletionProvider],
    ) -> PropertyAlignment:
        from .pipeline import PipelineRun

        run = PipelineRun.load(self.run_dir)
        catalog, spec, _, _ = run.load_inputs()
        properties = spec.properties()
        if item_id not in properties:
            raise UnknownItem(f"property {item_id!r} not in the API spec")
        provider = provider or RuleProvider()
        index = build_index(catalog, run.config.strategy, provider)
        return align_property(
            properties[item_id],
            index,
            provider,
            catalog,
            theta=run.config.theta,
            margin=run.config.margin,
            k=run.config.top_k,
            strategy=run.config.strategy,
            constraint_text=constraint_text,
        )

    # -- artifact previews --------------------------------------------------------

    def codec_previews(self, item_id: str) -> dict[str, str]:
        from .pipeline import PipelineRun

        item = self.item(item_id)
        run = PipelineRun.load(self.run_dir)
        catalog, _, _, _ = run.load_inputs()
        codecs = run.load_codecs()
        previews = {}
        for name in item.alignment.contributing_signals:
            if name in codecs:
                previews[name] = emit_source(catalog.get(name), codecs[name])
        return previews


def _with_status(alignment: PropertyAlignment, status: str) -> PropertyAlignment:
    from dataclasses import replace

    return replace(alignment, status=status)


# ---------------------------------------------------------------------------
# HTTP service
# ---------------------------------------------------------------------------

def create_app(run_dir: str, provider: Optional[CompletionProvider] = None, ui_dir: Optional[str] = None):
    """FastAPI application over one run's review store."""
    from fastapi import FastAPI
    from fastapi.responses import JSONResponse

    app = FastAPI(title="signalforge review service")
    store = ReviewStore(run_dir)
    app.state.store = store

    def error(status_code: int, message: str):
        return JSONResponse(status_code=status_code, content={"error": message})

    @app.get("/api/alignments")
    def list_alignments(status: Optional[str] = None):
        return {"items": [item.summary() for item in store.items(status)]}

    @app.get("/api/alignments/{item_id}")
    def get_alignment(item_id: str):
        try:
            return store.item(item_id).detail()
        except UnknownItem as exc:
            return error(404, str(exc))

    @app.post("/api/alignments/{item_id}/decision")
    def post_decision(item_id: str, body: dict):
        action = body.get("action")
        actor = body.get("actor")
        if action not in ("approve", "reject") or not actor:
            return error(400, "body must carry action (approve|reject) and actor")
        try:
            item = store.decide(item_id, action, actor)
        except UnknownItem as exc:
            return error(404, str(exc))
        except InvalidTransition as exc:
            return error(409, str(exc))
        return item.detail()

    @app.post("/api/alignments/{item_id}/regenerate")
    def post_regenerate(item_id: str, body: dict):
        constraint = body.get("constraint")
        actor = body.get("actor")
        if not constraint or not str(constraint).strip() or not actor:
            return error(400, "body must carry a non-empty constraint and actor")
        try:
            item = store.regenerate(item_id, str(constraint), actor, provider)
        except UnknownItem as exc:
            return error(404, str(exc))
        except ProviderError as exc:
            return error(502, f"provider failure: {exc}")
        return item.detail()

    @app.get("/api/artifacts/{item_id}/code")
    def get_code(item_id: str):
        try:
            return {"property": item_id, "code": store.codec_previews(item_id)}
        except UnknownItem as exc:
            return error(404, str(exc))

    @app.get("/api/runs/{run_id}")
    def get_run(run_id: str):
        from .pipeline import PipelineRun

        run = PipelineRun.load(store.run_dir)
        if run.run_id != run_id:
            return error(404, f"this service hosts run {run.run_id!r}")
        return {
            "run_id": run.run_id,
            "stage_status": run.stage_status,
            "flagged": run.flagged,
            "generated_endpoints": run.generated_endpoints,
            "failed_signals": run.failed_signals,
        }

    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app


def serve(run_dir: str, port: int = 8040, provider: Optional[CompletionProvider] = None, ui_dir: Optional[str] = None) -> None:
    import uvicorn

    app = create_app(run_dir, provider=provider, ui_dir=ui_dir)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
