"""Walkthrough: the evaluation harness.

Runs the pipeline over the bundled fault-seeded corpus under four
configurations (full, and each technique disabled in turn) and prints the
precision/recall/F1 table, then the embedding-strategy comparison on the
distractor corpus. Expect directions, not absolute values: disabling
automated debugging hurts most, enriched descriptions dominate retrieval.

Run:  python demos/06_evaluation.py   (takes ~15 s)
"""

from signalforge.corpus import build_distractor_corpus, build_fault_corpus
from signalforge.evalharness import (
    ABLATIONS,
    emit_report,
    run_ablation,
    run_strategy_comparison,
)

corpus = build_fault_corpus()
print(f"fault corpus: {len(corpus.catalog)} signals, "
      f"{len(corpus.truth)} properties, "
      f"{len(corpus.fault_assignments)} seeded single-shot faults\n")

results = [run_ablation(config, corpus) for config in ABLATIONS]
strategies = run_strategy_comparison(build_distractor_corpus())
text, _ = emit_report(results, strategies, meter=results[0].meter)
print(text)
