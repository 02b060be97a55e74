"""Three-stage pipeline orchestration: codecs, alignments, endpoints.

A run owns a directory: inputs are copied in, every stage writes its
artifacts under the run root, and a manifest tracks stage status so
interactive runs survive process restarts. All nondeterministic values
(run id, timestamps, latencies) live only in the manifest; artifact files
are byte-deterministic for a deterministic provider.

    runs/<id>/
      manifest.yaml          run metadata + stage statuses
      inputs/catalog.yaml    copies of the inputs (runs are self-contained)
      inputs/api.yaml
      codecs/<signal>.yaml   pass-validated codec records
      generated/signals/<signal>.txt   readable codec source
      alignments/<property>.yaml
      endpoints/<slug>.txt + <slug>.manifest.json
      report.yaml            deterministic run report
      review_events.jsonl    append-only review decisions (see review module)
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import os
import secrets
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from . import yamlio
from .alignment import (
    PropertyAlignment,
    align_property,
    alignment_from_record,
    alignment_record,
)
from .apispec import ApiSpec, parse_api_spec
from .catalog import SignalCatalog, parse_catalog
from .codec import (
    CodecExpr,
    codec_from_record,
    codec_record,
    debug_loop,
    emit_source,
)
from .endpoints import check_contract, instantiate_template
from .errors import (
    DomainError,
    FlaggedAlignment,
    MissingAlignment,
    StageFailure,
)
from .index import build_index
from .providers import CompletionProvider, RuleProvider
from .speccheck import detect_errors

STAGES = ("codec", "alignment", "endpoint")
STAGE_STATES = ("pending", "running", "done", "blocked_on_review", "failed")


@dataclass
class PipelineConfig:
    provider_spec: str = "rule"
    strategy: str = "rewritten_description"
    theta: float = 0.75
    margin: float = 0.05
    top_k: int = 5
    max_debug_rounds: int = 3
    mode: str = "auto"  # auto | interactive
    jobs: int = field(default_factory=lambda: os.cpu_count() or 1)
    allow_warnings: bool = False

    def as_dict(self) -> dict:
        return {
            "provider_spec": self.provider_spec,
            "strategy": self.strategy,
            "theta": self.theta,
            "margin": self.margin,
            "top_k": self.top_k,
            "max_debug_rounds": self.max_debug_rounds,
            "mode": self.mode,
            "jobs": self.jobs,
            "allow_warnings": self.allow_warnings,
        }

    @staticmethod
    def from_dict(data: dict) -> "PipelineConfig":
        config = PipelineConfig()
        for key, value in data.items():
            if hasattr(config, key):
                setattr(config, key, value)
        return config


@dataclass
class PipelineRun:
    run_id: str
    run_dir: Path
    stage_status: dict[str, str]
    input_digests: dict[str, str]
    config: PipelineConfig
    flagged: list[str] = field(default_factory=list)
    failed_signals: list[str] = field(default_factory=list)
    skipped_endpoints: list[dict] = field(default_factory=list)
    generated_endpoints: list[str] = field(default_factory=list)
    created_at: float = 0.0

    def save_manifest(self) -> None:
        manifest = {
            "run_id": self.run_id,
            "created_at": self.created_at,
            "input_digests": self.input_digests,
            "config": self.config.as_dict(),
            "stage_status": dict(self.stage_status),
            "flagged": list(self.flagged),
            "failed_signals": list(self.failed_signals),
            "skipped_endpoints": list(self.skipped_endpoints),
            "generated_endpoints": list(self.generated_endpoints),
        }
        path = self.run_dir / "manifest.yaml"
        tmp = path.with_suffix(".yaml.tmp")
        tmp.write_text(yamlio.dump(manifest), encoding="utf-8")
        os.replace(tmp, path)

    @staticmethod
    def load(run_dir: Path) -> "PipelineRun":
        data = yamlio.load((run_dir / "manifest.yaml").read_text(encoding="utf-8"))
        return PipelineRun(
            run_id=data["run_id"],
            run_dir=run_dir,
            stage_status=dict(data["stage_status"]),
            input_digests=dict(data["input_digests"]),
            config=PipelineConfig.from_dict(data.get("config", {})),
            flagged=list(data.get("flagged", [])),
            failed_signals=list(data.get("failed_signals", [])),
            skipped_endpoints=list(data.get("skipped_endpoints", [])),
            generated_endpoints=list(data.get("generated_endpoints", [])),
            created_at=data.get("created_at", 0.0),
        )

    # -- artifact loading -----------------------------------------------------

    def load_codecs(self) -> dict[str, CodecExpr]:
        codecs = {}
        codec_dir = self.run_dir / "codecs"
        if codec_dir.is_dir():
            for path in sorted(codec_dir.glob("*.yaml")):
                record = yamlio.load(path.read_text(encoding="utf-8"))
                codecs[record["signal"]] = codec_from_record(record)
        return codecs

    def load_alignments(self) -> dict[str, PropertyAlignment]:
        alignments = {}
        alignment_dir = self.run_dir / "alignments"
        if alignment_dir.is_dir():
            for path in sorted(alignment_dir.glob("*.yaml")):
                record = yamlio.load(path.read_text(encoding="utf-8"))
                alignments[record["property"]] = alignment_from_record(record)
        return alignments

    def load_inputs(self) -> tuple[SignalCatalog, ApiSpec, str, str]:
        catalog_text = (self.run_dir / "inputs" / "catalog.yaml").read_text(
            encoding="utf-8"
        )
        api_text = (self.run_dir / "inputs" / "api.yaml").read_text(encoding="utf-8")
        return (
            parse_catalog(catalog_text),
            parse_api_spec(api_text),
            catalog_text,
            api_text,
        )


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _new_run_id() -> str:
    stamp = time.strftime("%Y%m%d-%H%M%S")
    return f"run-{stamp}-{secrets.token_hex(3)}"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _parallel_map(items, worker, jobs: int):
    """Run worker over items with bounded parallelism; results are returned
    in input order so downstream artifacts are deterministic."""
    if jobs <= 1 or len(items) <= 1:
        return [worker(item) for item in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, items))


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------

def _codec_stage(
    run: PipelineRun,
    catalog: SignalCatalog,
    provider: CompletionProvider,
) -> dict[str, CodecExpr]:
    signals = sorted(catalog, key=lambda s: s.name)

    def synth(sig):
        return debug_loop(sig, provider, run.config.max_debug_rounds, catalog)

    reports = _parallel_map(signals, synth, run.config.jobs)
    codecs: dict[str, CodecExpr] = {}
    for sig, report in zip(signals, reports):
        if report.status == "pass":
            codecs[sig.name] = report.codec
            _write(
                run.run_dir / "codecs" / f"{sig.name}.yaml",
                yamlio.dump(codec_record(report)),
            )
            _write(
                run.run_dir / "generated" / "signals" / f"{sig.name}.txt",
                emit_source(sig, report.codec),
            )
        else:
            run.failed_signals.append(sig.name)
    return codecs


def _alignment_stage(
    run: PipelineRun,
    catalog: SignalCatalog,
    spec: ApiSpec,
    provider: CompletionProvider,
) -> dict[str, PropertyAlignment]:
    index = build_index(catalog, run.config.strategy, provider)
    properties = spec.properties()
    names = sorted(properties)

    def align(name):
        return align_property(
            properties[name],
            index,
            provider,
            catalog,
            theta=run.config.theta,
            margin=run.config.margin,
            k=run.config.top_k,
            strategy=run.config.strategy,
        )

    results = _parallel_map(names, align, run.config.jobs)
    alignments: dict[str, PropertyAlignment] = {}
    for name, alignment in zip(names, results):
        alignments[name] = alignment
        _write(
            run.run_dir / "alignments" / f"{name}.yaml",
            yamlio.dump(alignment_record(alignment)),
        )
        if alignment.status == "flagged":
            run.flagged.append(name)
    return alignments


def _endpoint_stage(
    run: PipelineRun,
    spec: ApiSpec,
    alignments: Mapping[str, PropertyAlignment],
    codecs: Mapping[str, CodecExpr],
    provider: CompletionProvider,
) -> None:
    run.skipped_endpoints = []
    run.generated_endpoints = []
    for endpoint in sorted(spec.endpoints, key=lambda e: e.slug):
        problems = []
        for name in sorted(endpoint.properties):
            alignment = alignments.get(name)
            if alignment is None:
                problems.append(f"{name}: no alignment")
            elif not alignment.active:
                problems.append(f"{name}: alignment status {alignment.status}")
            else:
                missing = [
                    s for s in alignment.contributing_signals if s not in codecs
                ]
                if missing:
                    problems.append(f"{name}: no pass-validated codec for {missing}")
        if problems:
            run.skipped_endpoints.append(
                {"endpoint": endpoint.slug, "reasons": problems}
            )
            continue
        try:
            generated = instantiate_template(endpoint, alignments, codecs, provider)
        except (MissingAlignment, FlaggedAlignment, DomainError) as exc:
            run.skipped_endpoints.append(
                {"endpoint": endpoint.slug, "reasons": [str(exc)]}
            )
            continue
        report = check_contract(generated, endpoint)
        if not report.passed:
            # Failing contract: never written to the output tree.
            run.skipped_endpoints.append(
                {
                    "endpoint": endpoint.slug,
                    "reasons": [
                        f"contract: {c.name} ({c.detail})" for c in report.failures()
                    ],
                }
            )
            continue
        _write(run.run_dir / "endpoints" / f"{endpoint.slug}.txt", generated.source)
        _write(
            run.run_dir / "endpoints" / f"{endpoint.slug}.manifest.json",
            json.dumps(generated.manifest, indent=2, sort_keys=True) + "\n",
        )
        run.generated_endpoints.append(endpoint.slug)


def _write_report(run: PipelineRun, provider: CompletionProvider) -> None:
    meter = provider.meter_snapshot()
    counts = {
        tag: {"calls": usage.calls, "failures": usage.failures}
        for tag, usage in sorted(meter.per_tag.items())
    }
    report = {
        "stages": dict(run.stage_status),
        "failed_signals": sorted(run.failed_signals),
        "flagged_properties": sorted(run.flagged),
        "generated_endpoints": sorted(run.generated_endpoints),
        "skipped_endpoints": sorted(
            run.skipped_endpoints, key=lambda e: e["endpoint"]
        ),
        "provider_calls": counts,
    }
    _write(run.run_dir / "report.yaml", yamlio.dump(report))


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def run_pipeline(
    catalog_text: str,
    api_text: str,
    config: Optional[PipelineConfig] = None,
    runs_root: str = "runs",
    provider: Optional[CompletionProvider] = None,
    run_id: Optional[str] = None,
) -> PipelineRun:
    """Execute the linear pipeline; halts blocked_on_review in interactive
    mode when any alignment is flagged."""
    config = config or PipelineConfig()
    provider = provider or RuleProvider()

    catalog = parse_catalog(catalog_text)
    spec = parse_api_spec(api_text)
    diagnostics = detect_errors(api_text, spec, catalog)
    if diagnostics and not config.allow_warnings:
        raise StageFailure(
            "validation", [diag.render() for diag in diagnostics]
        )

    run_id = run_id or _new_run_id()
    run_dir = Path(runs_root) / run_id
    run = PipelineRun(
        run_id=run_id,
        run_dir=run_dir,
        stage_status={stage: "pending" for stage in STAGES},
        input_digests={"catalog": _digest(catalog_text), "api": _digest(api_text)},
        config=config,
        created_at=time.time(),
    )
    run_dir.mkdir(parents=True, exist_ok=False)
    _write(run_dir / "inputs" / "catalog.yaml", catalog_text)
    _write(run_dir / "inputs" / "api.yaml", api_text)
    run.save_manifest()

    try:
        run.stage_status["codec"] = "running"
        codecs = _codec_stage(run, catalog, provider)
        run.stage_status["codec"] = "done"
        run.save_manifest()

        run.stage_status["alignment"] = "running"
        alignments = _alignment_stage(run, catalog, spec, provider)
        if run.flagged and config.mode == "interactive":
            run.stage_status["alignment"] = "blocked_on_review"
            run.save_manifest()
            _write_report(run, provider)
            return run
        run.stage_status["alignment"] = "done"
        run.save_manifest()

        run.stage_status["endpoint"] = "running"
        _endpoint_stage(run, spec, alignments, codecs, provider)
        run.stage_status["endpoint"] = "done"
        run.save_manifest()
    except StageFailure:
        raise
    except Exception as exc:
        stage = next(
            (s for s in STAGES if run.stage_status[s] == "running"), "codec"
        )
        run.stage_status[stage] = "failed"
        run.save_manifest()
        raise StageFailure(stage, [str(exc)]) from exc

    _write_report(run, provider)
    return run


def resume_pipeline(
    run_dir: str,
    provider: Optional[CompletionProvider] = None,
) -> PipelineRun:
    """Continue a blocked run after review decisions: alignment statuses are
    re-read (review events included) and the endpoint stage re-runs."""
    from .review import ReviewStore

    run = PipelineRun.load(Path(run_dir))
    provider = provider or RuleProvider()
    catalog, spec, _, _ = run.load_inputs()
    codecs = run.load_codecs()

    store = ReviewStore(run.run_dir)
    alignments = store.effective_alignments()
    run.flagged = sorted(
        name for name, alignment in alignments.items() if alignment.status == "flagged"
    )
    run.stage_status["alignment"] = "done"
    run.stage_status["endpoint"] = "running"
    run.save_manifest()
    _endpoint_stage(run, spec, alignments, codecs, provider)
    run.stage_status["endpoint"] = "done"
    run.save_manifest()
    _write_report(run, provider)
    return run
