import os
import signal
import subprocess
import sys
import textwrap
import time

import pytest

from signalforge.errors import InvalidTransition, UnknownItem
from signalforge.pipeline import PipelineConfig, run_pipeline
from signalforge.review import ReviewStore, create_app

CATALOG = """
signals:
  - name: FrontFogLamp
    kind: bool
    bit_start: 0
    bit_length: 1
    description: front fog lamp lit
  - name: FrontFogLampB
    kind: bool
    bit_start: 1
    bit_length: 1
    description: front fog lamp lit
  - name: RearFogLamp
    kind: bool
    bit_start: 2
    bit_length: 1
    description: rear beacon illuminated
  - name: CabinTempC
    kind: numerical
    bit_start: 8
    bit_length: 8
    unit: C
    range_min: -40
    range_max: 60
    description: cabin air temperature
  - name: TripMin
    kind: numerical
    bit_start: 16
    bit_length: 6
    range_min: 0
    range_max: 59
    description: trip duration minute part
  - name: TripSec
    kind: numerical
    bit_start: 24
    bit_length: 6
    range_min: 0
    range_max: 59
    description: trip duration second part
  - name: TripTime
    kind: object
    components:
      - {name: TripMin, weight: 60}
      - {name: TripSec, weight: 1}
    description: total trip duration
"""

API = """
paths:
  /lamps:
    get:
      responses:
        "200":
          content:
            application/json:
              schema:
                type: object
                properties:
                  fogLampOn:
                    type: boolean
                    description: Whether the front fog lamp lit flag is set. It reports true or false.
                  rearFogOn:
                    type: boolean
                    description: Whether the rear beacon illuminated flag is set. It reports true or false.
  /trip:
    get:
      responses:
        "200":
          content:
            application/json:
              schema:
                type: object
                properties:
                  tripSeconds:
                    type: number
                    x-vehicle-semantic: composite
                    description: Total trip duration. It combines the signals TripMin and TripSec as a weighted sum.
"""


@pytest.fixture()
def blocked_run(tmp_path):
    config = PipelineConfig(theta=0.3, margin=0.05, mode="interactive", jobs=1)
    return run_pipeline(CATALOG, API, config, runs_root=str(tmp_path / "runs"))


def test_pipeline_flags_only_ambiguous(blocked_run):
    store = ReviewStore(blocked_run.run_dir)
    flagged = [item.item_id for item in store.items("flagged")]
    assert flagged == ["fogLampOn"]


def test_decide_approve_and_filtering(blocked_run):
    store = ReviewStore(blocked_run.run_dir)
    item = store.decide("fogLampOn", "approve", actor="expert")
    assert item.alignment.status == "approved"
    assert store.items("flagged") == []
    assert [i.item_id for i in store.items("approved")] == ["fogLampOn"]
    # History is append-only and grew by one.
    assert item.history[-1].action == "approve"
    assert item.history[-1].actor == "expert"


def test_double_approve_is_invalid_transition(blocked_run):
    store = ReviewStore(blocked_run.run_dir)
    store.decide("fogLampOn", "approve", actor="expert")
    with pytest.raises(InvalidTransition):
        store.decide("fogLampOn", "approve", actor="expert")


def test_unknown_item(blocked_run):
    store = ReviewStore(blocked_run.run_dir)
    with pytest.raises(UnknownItem):
        store.decide("ghost", "approve", actor="expert")


def test_state_recovered_from_disk(blocked_run):
    first = ReviewStore(blocked_run.run_dir)
    first.decide("fogLampOn", "reject", actor="expert")
    # A brand-new store sees the decision (replayed from the event log).
    second = ReviewStore(blocked_run.run_dir)
    assert second.item("fogLampOn").alignment.status == "rejected"


def test_regenerate_with_constraint_directive(blocked_run):
    store = ReviewStore(blocked_run.run_dir)
    item = store.regenerate(
        "fogLampOn", "prefer-signal FrontFogLampB", actor="expert"
    )
    assert item.alignment.contributing_signals == ("FrontFogLampB",)
    assert item.history[-1].action == "regenerate"
    assert item.history[-1].constraint == "prefer-signal FrontFogLampB"


def test_regenerate_mapping_kind_directive(blocked_run):
    store = ReviewStore(blocked_run.run_dir)
    item = store.regenerate(
        "tripSeconds", "mapping-kind composed", actor="expert"
    )
    assert item.alignment.mapping_kind == "composed"


def test_regenerate_empty_constraint_rejected(blocked_run):
    store = ReviewStore(blocked_run.run_dir)
    with pytest.raises(ValueError):
        store.regenerate("fogLampOn", "   ", actor="expert")
    # No event appended.
    assert not [e for e in store._events if e["type"] == "regenerate"]


def test_history_never_shrinks(blocked_run):
    store = ReviewStore(blocked_run.run_dir)
    lengths = [len(store.item("fogLampOn").history)]
    store.regenerate("fogLampOn", "prefer-signal FrontFogLamp", actor="expert")
    lengths.append(len(store.item("fogLampOn").history))
    store.decide("fogLampOn", "approve", actor="expert")
    lengths.append(len(store.item("fogLampOn").history))
    assert lengths == sorted(lengths) and len(set(lengths)) == 3


def test_kill_neg9_between_mutations_loses_nothing(blocked_run):
    """A child process commits a decision, then is SIGKILLed; the committed
    event must be fully recovered by a fresh store."""
    script = textwrap.dedent(
        f"""
        import os, sys, time
        sys.path.insert(0, {repr(os.getcwd() + "/src")})
        from signalforge.review import ReviewStore
        store = ReviewStore({repr(str(blocked_run.run_dir))})
        store.decide("fogLampOn", "approve", actor="expert")
        print("COMMITTED", flush=True)
        time.sleep(30)  # killed long before this returns
        """
    )
    child = subprocess.Popen(
        [sys.executable, "-c", script], stdout=subprocess.PIPE, text=True
    )
    line = child.stdout.readline().strip()
    assert line == "COMMITTED"
    os.kill(child.pid, signal.SIGKILL)
    child.wait()

    recovered = ReviewStore(blocked_run.run_dir)
    assert recovered.item("fogLampOn").alignment.status == "approved"


# ---------------------------------------------------------------------------
# HTTP service
# ---------------------------------------------------------------------------

@pytest.fixture()
def client(blocked_run):
    from fastapi.testclient import TestClient

    app = create_app(str(blocked_run.run_dir))
    return TestClient(app)


def test_http_queue_and_filter(client):
    response = client.get("/api/alignments", params={"status": "flagged"})
    assert response.status_code == 200
    items = response.json()["items"]
    assert [item["id"] for item in items] == ["fogLampOn"]
    assert items[0]["candidates"]


def test_http_detail_and_code_preview(client):
    detail = client.get("/api/alignments/tripSeconds")
    assert detail.status_code == 200
    body = detail.json()
    assert body["alignment"]["mapping_kind"] == "composed"
    assert body["history"]

    code = client.get("/api/artifacts/tripSeconds/code")
    assert code.status_code == 200
    previews = code.json()["code"]
    assert "TripMin" in previews and "read_TripMin" in previews["TripMin"]


def test_http_decision_roundtrip(client):
    response = client.post(
        "/api/alignments/fogLampOn/decision",
        json={"action": "approve", "actor": "expert"},
    )
    assert response.status_code == 200
    assert response.json()["status"] == "approved"
    # Second approval is an invalid transition.
    again = client.post(
        "/api/alignments/fogLampOn/decision",
        json={"action": "approve", "actor": "expert"},
    )
    assert again.status_code == 409
    # Queue no longer lists it as flagged.
    queue = client.get("/api/alignments", params={"status": "flagged"})
    assert queue.json()["items"] == []


def test_http_validation_errors(client):
    assert (
        client.post(
            "/api/alignments/fogLampOn/decision", json={"action": "promote", "actor": "x"}
        ).status_code
        == 400
    )
    assert (
        client.post(
            "/api/alignments/fogLampOn/regenerate", json={"constraint": " ", "actor": "x"}
        ).status_code
        == 400
    )
    assert (
        client.post(
            "/api/alignments/ghost/decision", json={"action": "approve", "actor": "x"}
        ).status_code
        == 404
    )


def test_http_regenerate_appends_history(client):
    response = client.post(
        "/api/alignments/fogLampOn/regenerate",
        json={"constraint": "prefer-signal FrontFogLampB", "actor": "expert"},
    )
    assert response.status_code == 200
    body = response.json()
    assert body["contributing_signals"] == ["FrontFogLampB"]
    assert any(
        entry["constraint"] == "prefer-signal FrontFogLampB"
        for entry in body["history"]
    )


def test_http_run_summary(client, blocked_run):
    response = client.get(f"/api/runs/{blocked_run.run_id}")
    assert response.status_code == 200
    assert response.json()["stage_status"]["alignment"] == "blocked_on_review"
    assert client.get("/api/runs/not-this-run").status_code == 404
