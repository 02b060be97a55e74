"""Workflow dependency graphs: relational triples, node substitution,
redundancy elimination to a fixed point, and transformation impact scoring.

A workflow is a set of triples (source, relation, target) meaning the
target's production depends on information from the source. Nodes are
human roles, documents, or automated services. Automating a manual
document/task substitutes it with a service node; an edge becomes redundant
once both endpoints are substituted services *and* the transformation
script declares a direct programmatic connection between them. Reduction
removes redundant edges until nothing changes.

Impact is scored per element: each removed/added task or exchange
contributes -1/+1 to complexity, each task made automatic/manual
contributes +1/-1 to automation, and each artifact's communication change
is scored -2..+2 from its explainable/executable shift (the duality
dimensions). Vector components are sums of per-element contributions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from . import yamlio
from .errors import (
    IdCollision,
    InconsistentTransformation,
    SchemaError,
    UnknownNode,
    UnknownTriple,
)

NODE_KINDS = ("human_role", "document", "service")


@dataclass(frozen=True)
class WorkflowNode:
    id: str
    kind: str
    label: str = ""

    def __post_init__(self):
        if self.kind not in NODE_KINDS:
            raise SchemaError(f"unknown node kind {self.kind!r}", path=self.id)


@dataclass(frozen=True, order=True)
class RelationTriple:
    source: str
    relation: str
    target: str

    def as_list(self) -> list[str]:
        return [self.source, self.relation, self.target]


@dataclass(frozen=True)
class WorkflowGraph:
    nodes: Mapping[str, WorkflowNode]
    triples: frozenset[RelationTriple]

    @staticmethod
    def build(
        nodes: Iterable[WorkflowNode], triples: Iterable[RelationTriple]
    ) -> "WorkflowGraph":
        node_map: dict[str, WorkflowNode] = {}
        for node in nodes:
            if node.id in node_map:
                raise IdCollision(f"node id {node.id!r} defined twice")
            node_map[node.id] = node
        triple_set = frozenset(triples)
        for triple in triple_set:
            for endpoint in (triple.source, triple.target):
                if endpoint not in node_map:
                    raise UnknownNode(
                        f"triple {triple.as_list()} references unknown node "
                        f"{endpoint!r}"
                    )
        return WorkflowGraph(nodes=node_map, triples=triple_set)

    def node(self, node_id: str) -> WorkflowNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNode(f"unknown node {node_id!r}")

    def without_triples(self, drop: Iterable[RelationTriple]) -> "WorkflowGraph":
        return WorkflowGraph(nodes=self.nodes, triples=self.triples - set(drop))

    def sorted_triples(self) -> list[RelationTriple]:
        return sorted(self.triples)


@dataclass
class SubstitutionRecord:
    """Which documents became which services, and which service pairs have a
    declared direct programmatic connection (source feeds target)."""

    services: dict[str, str] = field(default_factory=dict)  # document -> service
    connections: set[tuple[str, str]] = field(default_factory=set)

    def service_ids(self) -> set[str]:
        return set(self.services.values())

    def add(self, document_id: str, service_id: str) -> None:
        self.services[document_id] = service_id

    def connect(self, source_service: str, target_service: str) -> None:
        self.connections.add((source_service, target_service))


# ---------------------------------------------------------------------------
# Node substitution and reduction
# ---------------------------------------------------------------------------

def substitute_node(
    graph: WorkflowGraph, document_id: str, service: WorkflowNode
) -> WorkflowGraph:
    """Replace a document node with a service node, re-pointing every
    incident triple. The triple count is preserved."""
    current = graph.node(document_id)
    if current.kind != "document":
        raise UnknownNode(f"{document_id!r} is not a document node")
    if service.id in graph.nodes:
        raise IdCollision(f"service id {service.id!r} already exists")
    if service.kind != "service":
        raise SchemaError("substitution target must be a service node", path=service.id)

    nodes = {nid: node for nid, node in graph.nodes.items() if nid != document_id}
    nodes[service.id] = service

    def repoint(name: str) -> str:
        return service.id if name == document_id else name

    triples = frozenset(
        RelationTriple(repoint(t.source), t.relation, repoint(t.target))
        for t in graph.triples
    )
    return WorkflowGraph(nodes=nodes, triples=triples)


def _redundant(triple: RelationTriple, record: SubstitutionRecord) -> bool:
    services = record.service_ids()
    return (
        triple.source in services
        and triple.target in services
        and (triple.source, triple.target) in record.connections
    )


def is_redundant(
    graph: WorkflowGraph, triple: RelationTriple, record: SubstitutionRecord
) -> bool:
    """True iff both endpoints were substituted to services and the record
    declares a direct programmatic connection between them."""
    if triple not in graph.triples:
        raise UnknownTriple(f"triple {triple.as_list()} not in graph")
    return _redundant(triple, record)


def reduce_to_fixed_point(
    graph: WorkflowGraph, record: SubstitutionRecord
) -> tuple[WorkflowGraph, int, tuple[RelationTriple, ...]]:
    """Sweep out redundant triples until a sweep removes nothing.

    Returns (reduced graph, sweeps performed, removed triples). The triple
    set shrinks strictly on every sweep except the last, so at most
    |triples| + 1 sweeps run.
    """
    current = graph
    removed: list[RelationTriple] = []
    sweeps = 0
    while True:
        sweeps += 1
        redundant = [t for t in current.sorted_triples() if _redundant(t, record)]
        if not redundant:
            return current, sweeps, tuple(removed)
        current = current.without_triples(redundant)
        removed.extend(redundant)


# ---------------------------------------------------------------------------
# Impact scoring
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ImpactVector:
    complexity: int
    automation: int
    communication: int

    def __add__(self, other: "ImpactVector") -> "ImpactVector":
        return ImpactVector(
            self.complexity + other.complexity,
            self.automation + other.automation,
            self.communication + other.communication,
        )

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.complexity, self.automation, self.communication)


ZERO_IMPACT = ImpactVector(0, 0, 0)

_COMPLEXITY_CHANGES = {"removed": -1, "combined": -1, "added": +1}
_AUTOMATION_CHANGES = {"automated": +1, "manualized": -1}
_DUALITY_SHIFT = {"more": +1, "same": 0, "less": -1}


@dataclass(frozen=True)
class ComplexityElement:
    triple: RelationTriple
    change: str  # removed | combined | added


@dataclass(frozen=True)
class AutomationElement:
    task: str
    change: str  # automated | manualized


@dataclass(frozen=True)
class CommunicationElement:
    artifact: str
    explainable: str  # more | same | less
    executable: str


@dataclass(frozen=True)
class Transformation:
    """One optimization step: substitutions plus per-element score
    annotations (expert judgment, carried by the transformation script)."""

    name: str
    substitutions: tuple[tuple[str, str], ...]  # (document, service)
    removed_triples: tuple[RelationTriple, ...]
    added_triples: tuple[RelationTriple, ...] = ()
    complexity_elements: tuple[ComplexityElement, ...] = ()
    automation_elements: tuple[AutomationElement, ...] = ()
    communication_elements: tuple[CommunicationElement, ...] = ()


def score_transformation(
    before: WorkflowGraph, after: WorkflowGraph, transformation: Transformation
) -> ImpactVector:
    """Sum the per-element contributions, verifying the annotations against
    what actually changed between the two graphs."""
    for document_id, service_id in transformation.substitutions:
        if document_id not in before.nodes:
            raise InconsistentTransformation(
                f"substituted document {document_id!r} missing from the before graph"
            )
        if document_id in after.nodes:
            raise InconsistentTransformation(
                f"document {document_id!r} still present after substitution"
            )
        service = after.nodes.get(service_id)
        if service is None or service.kind != "service":
            raise InconsistentTransformation(
                f"substitution target {service_id!r} is not a service in the "
                f"after graph"
            )

    removed_set = set(transformation.removed_triples)
    added_set = set(transformation.added_triples)
    annotated_removed = {
        e.triple for e in transformation.complexity_elements if e.change != "added"
    }
    annotated_added = {
        e.triple for e in transformation.complexity_elements if e.change == "added"
    }
    if annotated_removed != removed_set:
        raise InconsistentTransformation(
            f"complexity annotations cover {sorted(t.as_list() for t in annotated_removed)} "
            f"but the reduction removed {sorted(t.as_list() for t in removed_set)}"
        )
    if annotated_added != added_set:
        raise InconsistentTransformation(
            "complexity annotations disagree with the added-triple set"
        )
    for triple in removed_set:
        if triple in after.triples:
            raise InconsistentTransformation(
                f"removed triple {triple.as_list()} still present"
            )

    substituted_services = {svc for _, svc in transformation.substitutions}
    for element in transformation.automation_elements:
        if element.change not in _AUTOMATION_CHANGES:
            raise InconsistentTransformation(
                f"unknown automation change {element.change!r}"
            )
        if element.change == "automated" and element.task not in substituted_services:
            raise InconsistentTransformation(
                f"automation annotation for {element.task!r} has no matching "
                f"substitution"
            )

    for element in transformation.communication_elements:
        if element.artifact not in after.nodes:
            raise InconsistentTransformation(
                f"communication annotation for unknown artifact {element.artifact!r}"
            )
        for shift in (element.explainable, element.executable):
            if shift not in _DUALITY_SHIFT:
                raise InconsistentTransformation(f"unknown duality shift {shift!r}")

    complexity = sum(
        _COMPLEXITY_CHANGES[e.change] for e in transformation.complexity_elements
    )
    automation = sum(
        _AUTOMATION_CHANGES[e.change] for e in transformation.automation_elements
    )
    communication = sum(
        _DUALITY_SHIFT[e.explainable] + _DUALITY_SHIFT[e.executable]
        for e in transformation.communication_elements
    )
    return ImpactVector(complexity, automation, communication)


def cumulative_impact(vectors: Sequence[ImpactVector]) -> ImpactVector:
    total = ZERO_IMPACT
    for vector in vectors:
        total = total + vector
    return total


# ---------------------------------------------------------------------------
# Document formats
# ---------------------------------------------------------------------------

def parse_graph(document: str) -> WorkflowGraph:
    data = yamlio.load(document)
    if not isinstance(data, dict):
        raise SchemaError("graph document must be a mapping")
    nodes = [
        WorkflowNode(id=n["id"], kind=n["kind"], label=n.get("label", ""))
        for n in data.get("nodes", [])
    ]
    triples = [RelationTriple(*t) for t in data.get("triples", [])]
    return WorkflowGraph.build(nodes, triples)


def serialize_graph(graph: WorkflowGraph) -> str:
    return yamlio.dump(
        {
            "nodes": [
                {"id": n.id, "kind": n.kind, "label": n.label}
                for n in sorted(graph.nodes.values(), key=lambda n: n.id)
            ],
            "triples": [t.as_list() for t in graph.sorted_triples()],
        }
    )


@dataclass(frozen=True)
class ScriptIteration:
    name: str
    substitutions: tuple[tuple[str, str, str], ...]  # (document, service, label)
    connections: tuple[tuple[str, str], ...]
    complexity: tuple[ComplexityElement, ...]
    automation: tuple[AutomationElement, ...]
    communication: tuple[CommunicationElement, ...]


def parse_script(document: str) -> tuple[ScriptIteration, ...]:
    data = yamlio.load(document)
    if not isinstance(data, dict) or not isinstance(data.get("iterations"), list):
        raise SchemaError("script document needs an 'iterations' list")
    iterations = []
    for i, raw in enumerate(data["iterations"]):
        where = f"iterations[{i}]"
        if not isinstance(raw, dict) or "name" not in raw:
            raise SchemaError("iteration needs a name", path=where)
        substitutions = tuple(
            (s["document"], s["service"], s.get("label", s["service"]))
            for s in raw.get("substitutions", [])
        )
        connections = tuple(
            (pair[0], pair[1]) for pair in raw.get("direct_connections", [])
        )
        score = raw.get("score") or {}
        complexity = tuple(
            ComplexityElement(RelationTriple(*e["triple"]), e["change"])
            for e in score.get("complexity", [])
        )
        automation = tuple(
            AutomationElement(e["task"], e["change"])
            for e in score.get("automation", [])
        )
        communication = tuple(
            CommunicationElement(e["artifact"], e["explainable"], e["executable"])
            for e in score.get("communication", [])
        )
        iterations.append(
            ScriptIteration(
                name=raw["name"],
                substitutions=substitutions,
                connections=connections,
                complexity=complexity,
                automation=automation,
                communication=communication,
            )
        )
    return tuple(iterations)


# ---------------------------------------------------------------------------
# Script runner
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IterationResult:
    name: str
    impact: ImpactVector
    removed: tuple[RelationTriple, ...]
    sweeps: int
    graph: WorkflowGraph


@dataclass(frozen=True)
class OptimizationResult:
    iterations: tuple[IterationResult, ...]
    net: ImpactVector
    final_graph: WorkflowGraph

    @property
    def total_removed(self) -> int:
        return sum(len(it.removed) for it in self.iterations)


def optimize(
    graph: WorkflowGraph, script: Sequence[ScriptIteration]
) -> OptimizationResult:
    """Apply each scripted iteration: substitute, reduce, score."""
    record = SubstitutionRecord()
    current = graph
    results: list[IterationResult] = []
    for iteration in script:
        before = current
        for document_id, service_id, label in iteration.substitutions:
            current = substitute_node(
                current, document_id, WorkflowNode(service_id, "service", label)
            )
            record.add(document_id, service_id)
        for source, target in iteration.connections:
            record.connect(source, target)
        current, sweeps, removed = reduce_to_fixed_point(current, record)
        transformation = Transformation(
            name=iteration.name,
            substitutions=tuple(
                (doc, svc) for doc, svc, _ in iteration.substitutions
            ),
            removed_triples=removed,
            complexity_elements=iteration.complexity,
            automation_elements=iteration.automation,
            communication_elements=iteration.communication,
        )
        impact = score_transformation(before, current, transformation)
        results.append(
            IterationResult(
                name=iteration.name,
                impact=impact,
                removed=removed,
                sweeps=sweeps,
                graph=current,
            )
        )
    net = cumulative_impact([r.impact for r in results])
    return OptimizationResult(
        iterations=tuple(results), net=net, final_graph=current
    )
