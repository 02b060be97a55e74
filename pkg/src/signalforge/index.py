"""Vector index over signal descriptions.

Supports the three embedding strategies compared in the evaluation: raw
signal code, original descriptions, and rewritten (enriched) descriptions.
The fallback embedder hashes lowercased alphanumeric tokens into a fixed
512-dimensional count vector and L2-normalizes it, so the whole retrieval
stack is deterministic and offline. Queries are exact exhaustive scans —
fixture catalogs are small, so approximate search buys nothing.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import codec as codec_mod
from . import yamlio
from .catalog import SignalCatalog, SignalDef
from .errors import EmptyText, UnknownStrategy
from .providers import CompletionProvider

EMBEDDING_DIM = 512

STRATEGIES = ("raw_code", "original_description", "rewritten_description")

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def _stable_bucket(token: str) -> int:
    digest = hashlib.sha1(token.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big") % EMBEDDING_DIM


def embed(text: str) -> np.ndarray:
    """Hashed token-frequency embedding, unit L2 norm, deterministic."""
    if not text or not text.strip():
        raise EmptyText("cannot embed empty text")
    vector = np.zeros(EMBEDDING_DIM, dtype=np.float64)
    for token in _TOKEN_RE.findall(text.lower()):
        vector[_stable_bucket(token)] += 1.0
    norm = float(np.linalg.norm(vector))
    if norm == 0.0:
        raise EmptyText("text has no embeddable tokens")
    return vector / norm


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.dot(a, b))


@dataclass(frozen=True)
class IndexEntry:
    signal: str
    strategy: str
    vector: np.ndarray
    text: str


class SignalIndex:
    """Exact exhaustive-scan index; one entry per (signal, strategy).

    Reads may run concurrently; writes are serialized by the caller
    (single-writer contract).
    """

    def __init__(self):
        self._entries: dict[str, dict[str, IndexEntry]] = {s: {} for s in STRATEGIES}

    def insert(self, entry: IndexEntry) -> None:
        if entry.strategy not in STRATEGIES:
            raise UnknownStrategy(f"unknown strategy {entry.strategy!r}")
        self._entries[entry.strategy][entry.signal] = entry

    def size(self, strategy: str) -> int:
        self._check_strategy(strategy)
        return len(self._entries[strategy])

    def entry(self, strategy: str, signal: str) -> Optional[IndexEntry]:
        self._check_strategy(strategy)
        return self._entries[strategy].get(signal)

    def query_top_k(
        self, query: np.ndarray, k: int, strategy: str
    ) -> list[tuple[str, float]]:
        """Top-k by cosine similarity, ties broken by ascending signal name."""
        self._check_strategy(strategy)
        if k < 1:
            raise ValueError("k must be >= 1")
        scored = [
            (entry.signal, cosine(query, entry.vector))
            for entry in self._entries[strategy].values()
        ]
        scored.sort(key=lambda pair: (-pair[1], pair[0]))
        return scored[:k]

    def _check_strategy(self, strategy: str) -> None:
        if strategy not in STRATEGIES:
            raise UnknownStrategy(f"unknown strategy {strategy!r}")

    # -- persistence --------------------------------------------------------

    def to_document(self) -> str:
        records = []
        for strategy in STRATEGIES:
            for name in sorted(self._entries[strategy]):
                entry = self._entries[strategy][name]
                records.append(
                    {
                        "signal": entry.signal,
                        "strategy": entry.strategy,
                        "text": entry.text,
                    }
                )
        return yamlio.dump({"entries": records})

    @staticmethod
    def from_document(document: str) -> "SignalIndex":
        data = yamlio.load(document)
        index = SignalIndex()
        for record in data.get("entries", []):
            index.insert(
                IndexEntry(
                    signal=record["signal"],
                    strategy=record["strategy"],
                    vector=embed(record["text"]),
                    text=record["text"],
                )
            )
        return index


def embedding_text(
    sig: SignalDef,
    strategy: str,
    catalog: Optional[SignalCatalog] = None,
    provider: Optional[CompletionProvider] = None,
) -> str:
    """The text each strategy embeds for one signal."""
    if strategy == "raw_code":
        from .providers import RuleProvider

        synth_provider = provider or RuleProvider()
        codec, _ = codec_mod.synthesize_codec(sig, synth_provider, catalog)
        return codec_mod.emit_source(sig, codec)
    if strategy == "original_description":
        return sig.description or sig.name
    if strategy == "rewritten_description":
        from .catalog import describe_structurally, rewrite_description

        if provider is None:
            return describe_structurally(sig, catalog)
        return rewrite_description(sig, provider)
    raise UnknownStrategy(f"unknown strategy {strategy!r}")


def build_index(
    catalog: SignalCatalog,
    strategy: str,
    provider: Optional[CompletionProvider] = None,
    embedder: Callable[[str], np.ndarray] = embed,
) -> SignalIndex:
    """Index every catalog signal under one strategy."""
    index = SignalIndex()
    for sig in sorted(catalog, key=lambda s: s.name):
        text = embedding_text(sig, strategy, catalog, provider)
        index.insert(
            IndexEntry(
                signal=sig.name, strategy=strategy, vector=embedder(text), text=text
            )
        )
    return index
