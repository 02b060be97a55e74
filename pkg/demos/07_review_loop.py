"""Walkthrough: the human-in-the-loop review cycle.

An interactive pipeline run halts when a property's signal match is
ambiguous (here: two signals with identical descriptions). A reviewer
inspects the queue, requests regeneration with a constraint directive,
approves, and resumes the run — which then generates the blocked endpoint.

State is an append-only event log under the run directory; every mutation
is fsynced before the call returns.

Run:  python demos/07_review_loop.py
"""

import tempfile

from signalforge.pipeline import PipelineConfig, resume_pipeline, run_pipeline
from signalforge.review import ReviewStore

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
"""

with tempfile.TemporaryDirectory() as workdir:
    config = PipelineConfig(theta=0.3, margin=0.05, mode="interactive", jobs=1)
    run = run_pipeline(CATALOG, API, config, runs_root=f"{workdir}/runs")
    print("stage status after the interactive run:")
    for stage, status in run.stage_status.items():
        print(f"  {stage}: {status}")
    print(f"flagged for review: {run.flagged}\n")

    store = ReviewStore(run.run_dir)
    item = store.item("fogLampOn")
    print("review queue item:")
    print(f"  candidates: {[(c[0], round(c[1], 3)) for c in item.alignment.candidates]}")
    print(f"  status:     {item.alignment.status}\n")

    # The reviewer pins the intended signal; the alignment is recomputed
    # with the constraint as refinement instructions.
    item = store.regenerate("fogLampOn", "prefer-signal FrontFogLamp", actor="expert")
    print(f"after regeneration: signals={list(item.alignment.contributing_signals)} "
          f"status={item.alignment.status}")

    item = store.decide("fogLampOn", "approve", actor="expert")
    print(f"after approval:     status={item.alignment.status}")
    print("history:")
    for entry in item.history:
        line = f"  [{entry.action}] by {entry.actor}"
        if entry.constraint:
            line += f" ({entry.constraint})"
        print(line)

    resumed = resume_pipeline(str(run.run_dir))
    print(f"\nresumed run endpoints: {resumed.generated_endpoints}")
    endpoint_file = resumed.run_dir / "endpoints" / "get_lamps.txt"
    print(f"generated file exists: {endpoint_file.exists()}")
