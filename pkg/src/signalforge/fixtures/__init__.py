"""Bundled fixture documents (workflow graphs, transformation scripts)."""

from importlib import resources


def fixture_text(*parts: str) -> str:
    """Read a bundled fixture file as text."""
    node = resources.files(__package__)
    for part in parts:
        node = node / part
    return node.read_text(encoding="utf-8")


def vehicle_api_graph_text() -> str:
    return fixture_text("vehicle_api", "graph.yaml")


def vehicle_api_script_text() -> str:
    return fixture_text("vehicle_api", "script.yaml")
