import random
from fractions import Fraction

import pytest

from signalforge.errors import FixtureError
from signalforge.evalharness import (
    ABLATIONS,
    AblationConfig,
    EvalRecord,
    FULL_CONFIG,
    baseline_units,
    compute_prf,
    emit_report,
    run_ablation,
    run_strategy_comparison,
)
from signalforge.corpus import build_fault_corpus


def record_with_counts(correct: int, generated: int, baseline: int) -> EvalRecord:
    shared = frozenset(f"c{i}" for i in range(correct))
    gen = shared | frozenset(f"g{i}" for i in range(generated - correct))
    base = shared | frozenset(f"b{i}" for i in range(baseline - correct))
    return EvalRecord(generated=gen, baseline=base, correct=shared)


def test_prf_simple_counts():
    result = compute_prf(record_with_counts(2, 3, 4))
    assert result.precision == Fraction(2, 3)
    assert result.recall == Fraction(1, 2)
    assert result.f1 == Fraction(4, 7)
    assert result.rendered() == ("0.667", "0.500", "0.571")


def test_prf_perfect_match():
    result = compute_prf(record_with_counts(5, 5, 5))
    assert result.rendered() == ("1.000", "1.000", "1.000")


def test_prf_renders_published_total_row():
    # Counts whose exact fractions render to the 0.976 / 0.902 / 0.937 row.
    result = compute_prf(record_with_counts(440, 451, 488))
    assert result.rendered() == ("0.976", "0.902", "0.937")


def test_prf_undefined_not_zero():
    result = compute_prf(
        EvalRecord(generated=frozenset(), baseline=frozenset({"x"}), correct=frozenset())
    )
    assert result.precision is None
    assert "precision" in result.undefined
    assert result.recall == 0
    assert result.f1 is None


def test_prf_f1_is_harmonic_mean_against_fraction_oracle():
    rng = random.Random(99)
    for _ in range(50):
        baseline = rng.randint(1, 400)
        generated = rng.randint(1, 400)
        correct = rng.randint(0, min(baseline, generated))
        result = compute_prf(record_with_counts(correct, generated, baseline))
        p = Fraction(correct, generated)
        r = Fraction(correct, baseline)
        expected_f1 = Fraction(0) if p + r == 0 else 2 * p * r / (p + r)
        assert result.precision == p and result.recall == r
        assert abs(float(result.f1) - float(expected_f1)) < 1e-9


def test_eval_record_rejects_bad_subsets():
    with pytest.raises(FixtureError):
        EvalRecord(
            generated=frozenset({"a"}),
            baseline=frozenset({"a"}),
            correct=frozenset({"a", "b"}),
        )


# ---------------------------------------------------------------------------
# Ablations (shared module-scoped run: ~7s for all four configs)
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def fault_corpus():
    return build_fault_corpus()


@pytest.fixture(scope="module")
def ablation_results(fault_corpus):
    return {config.label(): run_ablation(config, fault_corpus) for config in ABLATIONS}


def test_full_config_reaches_perfect_f1(ablation_results):
    full = ablation_results["full"]
    assert full.prf.rendered() == ("1.000", "1.000", "1.000")
    assert not full.failed_signals


def test_disabling_debugging_strictly_lowers_f1(ablation_results):
    assert (
        ablation_results["without debugging"].prf.f1_value()
        < ablation_results["full"].prf.f1_value()
    )
    assert ablation_results["without debugging"].failed_signals


def test_disabling_templates_never_raises_f1(ablation_results):
    assert (
        ablation_results["without templates"].prf.f1_value()
        <= ablation_results["full"].prf.f1_value()
    )


def test_disabling_composition_never_raises_f1(ablation_results):
    assert (
        ablation_results["without composition"].prf.f1_value()
        <= ablation_results["full"].prf.f1_value()
    )


def test_ablation_is_deterministic(fault_corpus):
    first = run_ablation(FULL_CONFIG, fault_corpus)
    second = run_ablation(FULL_CONFIG, fault_corpus)
    assert first.prf == second.prf
    assert first.failed_signals == second.failed_signals


def test_baseline_units_cover_every_truth_property(fault_corpus):
    units = baseline_units(fault_corpus)
    assert {u[0] for u in units} == set(fault_corpus.truth)


# ---------------------------------------------------------------------------
# Strategy comparison + report
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def strategy_results():
    return run_strategy_comparison()


def test_strategy_ordering_with_gaps(strategy_results):
    rewritten = strategy_results["rewritten_description"].f1
    original = strategy_results["original_description"].f1
    raw = strategy_results["raw_code"].f1
    assert rewritten > original > raw
    assert rewritten - original >= 0.05
    assert original - raw >= 0.05


def test_report_contains_rows_and_meter(ablation_results, strategy_results):
    results = [ablation_results[config.label()] for config in ABLATIONS]
    text, data = emit_report(
        results, strategy_results, meter=results[0].meter
    )
    assert "full" in text and "without debugging" in text
    assert "rewritten_description" in text
    assert len(data["ablations"]) == 4
    assert data["ablations"][0]["meter"]  # snapshot passed through
    assert "provider calls" in text


def test_ablation_config_labels():
    assert FULL_CONFIG.label() == "full"
    assert AblationConfig(automated_debugging=False).label() == "without debugging"


def test_report_is_pure(ablation_results, strategy_results):
    results = [ablation_results[config.label()] for config in ABLATIONS]
    first = emit_report(results, strategy_results, meter=results[0].meter)
    second = emit_report(results, strategy_results, meter=results[0].meter)
    assert first == second
