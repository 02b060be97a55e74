"""Quantitative evaluation: precision/recall/F1, ablation runs, reporting.

Correctness is judged at the property level. A generated property unit is
the tuple (property, contributing signal set, mapping kind, semantic codec
digest, conversion, weights); the baseline unit is the same tuple computed
from the catalog's reference semantics and the ground-truth alignment. The
semantic digest hashes decode outputs over the entire raw domain (signals
up to 16 bits), so a wrong codec is always a wrong unit.

Metrics use exact rational arithmetic and render to three decimals.
Degenerate denominators are reported as undefined, never silently zero.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from . import units as units_mod
from .alignment import (
    PropertyAlignment,
    align_property,
    combine_weights,
    evaluate_matching,
)
from .catalog import SignalCatalog, SignalDef, SignalKind, insert_raw, reference_decode
from .codec import CodecExpr, debug_loop, decode_value, synthesize_codec
from .corpus import Corpus, build_distractor_corpus, build_fault_corpus
from .endpoints import check_contract, instantiate_template
from .errors import (
    DomainError,
    FixtureError,
    FlaggedAlignment,
    MissingAlignment,
)
from .index import STRATEGIES, build_index
from .providers import (
    CompletionProvider,
    FaultPlan,
    FaultingProvider,
    RuleProvider,
    UsageMeter,
)

MAX_DIGEST_BITS = 16


# ---------------------------------------------------------------------------
# P/R/F1 with exact fractions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvalRecord:
    generated: frozenset
    baseline: frozenset
    correct: frozenset

    def __post_init__(self):
        if not self.correct <= self.generated:
            raise FixtureError("correct set must be a subset of generated")
        if not self.correct <= self.baseline:
            raise FixtureError("correct set must be a subset of baseline")

    @staticmethod
    def from_sets(generated: frozenset, baseline: frozenset) -> "EvalRecord":
        return EvalRecord(
            generated=generated,
            baseline=baseline,
            correct=frozenset(generated & baseline),
        )


@dataclass(frozen=True)
class PrfResult:
    precision: Optional[Fraction]
    recall: Optional[Fraction]
    f1: Optional[Fraction]
    undefined: tuple[str, ...] = ()

    def rendered(self) -> tuple[str, str, str]:
        def fmt(value: Optional[Fraction]) -> str:
            return "undef" if value is None else f"{float(value):.3f}"

        return (fmt(self.precision), fmt(self.recall), fmt(self.f1))

    def f1_value(self) -> float:
        """F1 as a float for comparisons; undefined counts as 0."""
        return 0.0 if self.f1 is None else float(self.f1)


def compute_prf(record: EvalRecord) -> PrfResult:
    undefined = []
    precision = recall = None
    if record.generated:
        precision = Fraction(len(record.correct), len(record.generated))
    else:
        undefined.append("precision")
    if record.baseline:
        recall = Fraction(len(record.correct), len(record.baseline))
    else:
        undefined.append("recall")
    f1: Optional[Fraction] = None
    if precision is not None and recall is not None:
        if precision + recall > 0:
            f1 = 2 * precision * recall / (precision + recall)
        else:
            f1 = Fraction(0)
    else:
        undefined.append("f1")
    return PrfResult(
        precision=precision, recall=recall, f1=f1, undefined=tuple(undefined)
    )


# ---------------------------------------------------------------------------
# Property-level semantic digests
# ---------------------------------------------------------------------------

def _hash_values(values: list) -> str:
    return hashlib.sha256(json.dumps(values).encode("utf-8")).hexdigest()[:16]


def reference_signal_digest(sig: SignalDef, catalog: SignalCatalog) -> str:
    lo, hi = sig.raw_bounds()
    if sig.bit_length > MAX_DIGEST_BITS:
        raise FixtureError(f"{sig.name}: raw domain too large for a digest")
    values = []
    for raw in range(lo, hi + 1):
        decoded = reference_decode(sig, insert_raw(sig, raw), catalog)
        values.append(repr(decoded))
    return _hash_values(values)


def codec_signal_digest(sig: SignalDef, codec: CodecExpr) -> str:
    lo, hi = sig.raw_bounds()
    if sig.bit_length > MAX_DIGEST_BITS:
        raise FixtureError(f"{sig.name}: raw domain too large for a digest")
    values = []
    for raw in range(lo, hi + 1):
        frame = insert_raw(sig, raw)
        try:
            decoded = decode_value(codec, frame)
        except Exception:
            decoded = None
        values.append(repr(decoded))
    return _hash_values(values)


def _composed_frames(children: Sequence[SignalDef]):
    ordered = sorted(children, key=lambda s: s.name)
    domains = [range(s.raw_bounds()[0], s.raw_bounds()[1] + 1) for s in ordered]
    for combo in itertools.product(*domains):
        frame = b"\x00" * 8
        for child, raw in zip(ordered, combo):
            frame = insert_raw(child, raw, frame)
        yield frame


def reference_composed_digest(
    object_sig: SignalDef, catalog: SignalCatalog
) -> str:
    children = [catalog.get(c.name) for c in object_sig.components]
    if sum(c.bit_length for c in children) > MAX_DIGEST_BITS:
        raise FixtureError(f"{object_sig.name}: composed domain too large")
    values = [
        repr(reference_decode(object_sig, frame, catalog))
        for frame in _composed_frames(children)
    ]
    return _hash_values(values)


def codec_composed_digest(
    children: Sequence[SignalDef], combine_codec: CodecExpr
) -> str:
    if sum(c.bit_length for c in children) > MAX_DIGEST_BITS:
        raise FixtureError("composed domain too large")
    values = []
    for frame in _composed_frames(children):
        try:
            decoded = decode_value(combine_codec, frame)
        except Exception:
            decoded = None
        values.append(repr(decoded))
    return _hash_values(values)


def _find_combine(codecs: Mapping[str, CodecExpr], wanted: frozenset) -> Optional[CodecExpr]:
    from .codec import Combine

    for codec in codecs.values():
        root = codec.root
        if isinstance(root, Combine) and {n for n, _, _ in root.children} == wanted:
            return codec
    return None


def baseline_units(corpus: Corpus) -> frozenset:
    """Ground-truth property units from the catalog's reference semantics."""
    properties = corpus.api_spec.properties()
    units = set()
    for prop_name, (signals, kind) in corpus.truth.items():
        prop = properties[prop_name]
        if kind == "composed":
            object_sig = _truth_object(corpus, signals)
            digest = reference_composed_digest(object_sig, corpus.catalog)
            weights = tuple(
                sorted((c.name, c.weight) for c in object_sig.components)
            )
            conversion = None
        else:
            sig = corpus.catalog.get(next(iter(signals)))
            digest = reference_signal_digest(sig, corpus.catalog)
            weights = ()
            conversion = None
            if kind == "transformed":
                conversion = units_mod.conversion(sig.unit, prop.unit)
        units.add((prop_name, signals, kind, digest, conversion, weights))
    return frozenset(units)


def _truth_object(corpus: Corpus, children: frozenset) -> SignalDef:
    for sig in corpus.catalog:
        if sig.kind is SignalKind.OBJECT and {
            c.name for c in sig.components
        } == set(children):
            return sig
    raise FixtureError(f"no object signal composes {sorted(children)}")


def generated_unit(
    corpus: Corpus,
    alignment: PropertyAlignment,
    codecs: Mapping[str, CodecExpr],
) -> tuple:
    """Property unit as actually produced by the pipeline artifacts."""
    signals = frozenset(alignment.contributing_signals)
    if alignment.mapping_kind == "composed":
        combine_codec = _find_combine(codecs, signals)
        if combine_codec is None:
            raise DomainError(f"no combine codec for {sorted(signals)}")
        children = [corpus.catalog.get(name) for name in sorted(signals)]
        digest = codec_composed_digest(children, combine_codec)
        weights = tuple(sorted(combine_weights(alignment, codecs).items()))
        conversion = None
    else:
        name = alignment.contributing_signals[0]
        sig = corpus.catalog.get(name)
        digest = codec_signal_digest(sig, codecs[name])
        weights = ()
        conversion = alignment.unit_conversion
    return (
        alignment.property_name,
        signals,
        alignment.mapping_kind,
        digest,
        conversion,
        weights,
    )


# ---------------------------------------------------------------------------
# Ablation configurations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AblationConfig:
    boilerplate_templates: bool = True
    code_composition: bool = True
    automated_debugging: bool = True

    def label(self) -> str:
        off = [
            name
            for name, enabled in (
                ("templates", self.boilerplate_templates),
                ("composition", self.code_composition),
                ("debugging", self.automated_debugging),
            )
            if not enabled
        ]
        return "full" if not off else "without " + "+".join(off)


FULL_CONFIG = AblationConfig()
ABLATIONS = (
    FULL_CONFIG,
    AblationConfig(boilerplate_templates=False),
    AblationConfig(code_composition=False),
    AblationConfig(automated_debugging=False),
)


@dataclass(frozen=True)
class AblationResult:
    config: AblationConfig
    prf: PrfResult
    generated_count: int
    baseline_count: int
    failed_signals: tuple[str, ...]
    skipped_endpoints: tuple[str, ...]
    meter: UsageMeter
    per_domain: Mapping[str, PrfResult] = field(default_factory=dict)


def _fresh_fault_provider(corpus: Corpus) -> CompletionProvider:
    if not corpus.fault_assignments:
        return RuleProvider()
    return FaultingProvider(
        RuleProvider(), FaultPlan(per_subject=dict(corpus.fault_assignments))
    )


def run_ablation(
    config: AblationConfig,
    corpus: Optional[Corpus] = None,
    max_rounds: int = 3,
) -> AblationResult:
    """Run the full pipeline on the corpus under one configuration."""
    if corpus is None:
        corpus = build_fault_corpus()
    catalog = corpus.catalog
    rounds = max_rounds if config.automated_debugging else 0
    provider = _fresh_fault_provider(corpus)

    codecs: dict[str, CodecExpr] = {}
    failed: list[str] = []
    for sig in sorted(catalog, key=lambda s: s.name):
        report = debug_loop(sig, provider, rounds, catalog)
        if report.status == "pass":
            codecs[sig.name] = report.codec
        else:
            failed.append(sig.name)

    index = build_index(catalog, "rewritten_description")
    properties = corpus.api_spec.properties()
    alignments: dict[str, PropertyAlignment] = {}
    for name in sorted(properties):
        alignments[name] = align_property(
            properties[name],
            index,
            provider,
            catalog,
            theta=corpus.theta,
            margin=corpus.margin,
        )

    mode = "slots_only" if config.boilerplate_templates else "full_scaffold"
    generated_props: set[str] = set()
    skipped: list[str] = []
    for endpoint in sorted(corpus.api_spec.endpoints, key=lambda e: e.slug):
        ready = all(
            name in alignments
            and alignments[name].active
            and all(s in codecs for s in alignments[name].contributing_signals)
            for name in endpoint.properties
        )
        if not ready:
            skipped.append(endpoint.slug)
            continue
        try:
            generated = instantiate_template(
                endpoint, alignments, codecs, provider, mode=mode
            )
        except (MissingAlignment, FlaggedAlignment, DomainError):
            skipped.append(endpoint.slug)
            continue
        if not check_contract(generated, endpoint).passed:
            skipped.append(endpoint.slug)
            continue
        generated_props.update(endpoint.properties)

    if config.code_composition:
        digest_codecs = codecs
    else:
        # Per-endpoint regeneration without reuse: fragments are synthesized
        # afresh (single-shot faults fire again) and skip the validation gate.
        regen_provider = _fresh_fault_provider(corpus)
        digest_codecs = {
            sig.name: synthesize_codec(sig, regen_provider, catalog)[0]
            for sig in sorted(catalog, key=lambda s: s.name)
        }

    generated_units = set()
    for name in sorted(generated_props):
        try:
            generated_units.add(generated_unit(corpus, alignments[name], digest_codecs))
        except DomainError:
            continue
    all_baseline = baseline_units(corpus)
    record = EvalRecord.from_sets(frozenset(generated_units), all_baseline)

    per_domain: dict[str, PrfResult] = {}
    for domain in sorted(set(corpus.domains.values())):
        members = {
            name for name, tag in corpus.domains.items() if tag == domain
        }
        domain_record = EvalRecord.from_sets(
            frozenset(u for u in generated_units if u[0] in members),
            frozenset(u for u in all_baseline if u[0] in members),
        )
        per_domain[domain] = compute_prf(domain_record)

    return AblationResult(
        config=config,
        prf=compute_prf(record),
        generated_count=len(record.generated),
        baseline_count=len(record.baseline),
        failed_signals=tuple(failed),
        skipped_endpoints=tuple(skipped),
        meter=provider.meter_snapshot(),
        per_domain=per_domain,
    )


# ---------------------------------------------------------------------------
# Embedding-strategy comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StrategyResult:
    strategy: str
    precision: Optional[float]
    recall: float
    f1: float
    flagged: int


def run_strategy_comparison(corpus: Optional[Corpus] = None) -> dict[str, StrategyResult]:
    """Align every corpus property under each embedding strategy."""
    if corpus is None:
        corpus = build_distractor_corpus()
    properties = corpus.api_spec.properties()
    results: dict[str, StrategyResult] = {}
    for strategy in STRATEGIES:
        index = build_index(corpus.catalog, strategy)
        provider = RuleProvider()
        predicted = {}
        for name in sorted(properties):
            predicted[name] = align_property(
                properties[name],
                index,
                provider,
                corpus.catalog,
                theta=corpus.theta,
                margin=corpus.margin,
                strategy=strategy,
            )
        score = evaluate_matching(predicted, corpus.truth)
        results[strategy] = StrategyResult(
            strategy=strategy,
            precision=score.precision,
            recall=score.recall if score.recall is not None else 0.0,
            f1=score.f1 if score.f1 is not None else 0.0,
            flagged=sum(1 for a in predicted.values() if a.status == "flagged"),
        )
    return results


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------

def emit_report(
    ablations: Sequence[AblationResult],
    strategies: Optional[Mapping[str, StrategyResult]] = None,
    meter: Optional[UsageMeter] = None,
) -> tuple[str, dict]:
    """Render results as a human-readable table plus a machine-readable dict."""
    lines = ["configuration                P      R      F1     generated/baseline"]
    data: dict = {"ablations": [], "strategies": {}, "meter": {}}
    for result in ablations:
        p, r, f1 = result.prf.rendered()
        label = result.config.label()
        domain_rows = []
        for domain in sorted(result.per_domain):
            dp, dr, df1 = result.per_domain[domain].rendered()
            lines.append(f"  [{domain}]" + " " * max(1, 26 - len(domain) - 4)
                         + f" {dp:>6s} {dr:>6s} {df1:>6s}")
            domain_rows.append(
                {"domain": domain, "precision": dp, "recall": dr, "f1": df1}
            )
        lines.append(
            f"{label:28s} {p:>6s} {r:>6s} {f1:>6s}   "
            f"{result.generated_count}/{result.baseline_count}"
        )
        data["ablations"].append(
            {
                "config": label,
                "precision": p,
                "recall": r,
                "f1": f1,
                "generated": result.generated_count,
                "baseline": result.baseline_count,
                "by_domain": domain_rows,
                "failed_signals": list(result.failed_signals),
                "skipped_endpoints": list(result.skipped_endpoints),
                "meter": result.meter.as_dict(),
            }
        )
    if strategies:
        lines.append("")
        lines.append("embedding strategy           P      R      F1     flagged")
        for name in ("raw_code", "original_description", "rewritten_description"):
            if name not in strategies:
                continue
            s = strategies[name]
            p_text = "undef" if s.precision is None else f"{s.precision:.3f}"
            lines.append(
                f"{name:28s} {p_text:>6s} {s.recall:>6.3f} {s.f1:>6.3f}   {s.flagged}"
            )
            data["strategies"][name] = {
                "precision": s.precision,
                "recall": s.recall,
                "f1": s.f1,
                "flagged": s.flagged,
            }
    if meter is not None:
        lines.append("")
        lines.append(
            f"provider calls: {meter.total_calls} total, "
            f"{meter.total_failures} failed"
        )
        data["meter"] = meter.as_dict()
    lines.append("")
    lines.append(
        "note: metrics are computed on the bundled fixture corpus; absolute"
    )
    lines.append(
        "values are fixture-specific, only orderings and directions carry over."
    )
    return "\n".join(lines) + "\n", data
