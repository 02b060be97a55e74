import random

import pytest

from signalforge.errors import (
    IdCollision,
    InconsistentTransformation,
    UnknownNode,
    UnknownTriple,
)
from signalforge.fixtures import vehicle_api_graph_text, vehicle_api_script_text
from signalforge.workflow import (
    AutomationElement,
    CommunicationElement,
    ComplexityElement,
    ImpactVector,
    RelationTriple,
    SubstitutionRecord,
    Transformation,
    WorkflowGraph,
    WorkflowNode,
    cumulative_impact,
    is_redundant,
    optimize,
    parse_graph,
    parse_script,
    reduce_to_fixed_point,
    score_transformation,
    serialize_graph,
    substitute_node,
)


def tiny_graph():
    return WorkflowGraph.build(
        nodes=[
            WorkflowNode("A", "document", "A"),
            WorkflowNode("d", "document", "manual step"),
            WorkflowNode("B", "document", "B"),
        ],
        triples=[RelationTriple("A", "informs", "d"), RelationTriple("d", "feeds", "B")],
    )


# ---------------------------------------------------------------------------
# substitute_node
# ---------------------------------------------------------------------------

def test_substitution_repoints_edges():
    graph = substitute_node(tiny_graph(), "d", WorkflowNode("s", "service", "svc"))
    assert RelationTriple("A", "informs", "s") in graph.triples
    assert RelationTriple("s", "feeds", "B") in graph.triples
    assert "d" not in graph.nodes
    assert graph.nodes["s"].kind == "service"


def test_substitution_preserves_triple_count():
    before = tiny_graph()
    after = substitute_node(before, "d", WorkflowNode("s", "service", "svc"))
    assert len(after.triples) == len(before.triples)


def test_substitute_unknown_node():
    with pytest.raises(UnknownNode):
        substitute_node(tiny_graph(), "ghost", WorkflowNode("s", "service", "svc"))


def test_substitute_id_collision():
    with pytest.raises(IdCollision):
        substitute_node(tiny_graph(), "d", WorkflowNode("A", "service", "svc"))


# ---------------------------------------------------------------------------
# is_redundant / reduction
# ---------------------------------------------------------------------------

def substituted_pair():
    graph = WorkflowGraph.build(
        nodes=[
            WorkflowNode("d1", "document", ""),
            WorkflowNode("d2", "document", ""),
            WorkflowNode("human", "human_role", ""),
        ],
        triples=[
            RelationTriple("d1", "feeds", "d2"),
            RelationTriple("human", "reviews", "d2"),
        ],
    )
    graph = substitute_node(graph, "d1", WorkflowNode("s1", "service", ""))
    graph = substitute_node(graph, "d2", WorkflowNode("s2", "service", ""))
    record = SubstitutionRecord()
    record.add("d1", "s1")
    record.add("d2", "s2")
    record.connect("s1", "s2")
    return graph, record


def test_connected_service_edge_is_redundant():
    graph, record = substituted_pair()
    assert is_redundant(graph, RelationTriple("s1", "feeds", "s2"), record)


def test_human_endpoint_is_never_redundant():
    graph, record = substituted_pair()
    assert not is_redundant(graph, RelationTriple("human", "reviews", "s2"), record)


def test_undeclared_connection_is_not_redundant():
    graph, record = substituted_pair()
    record.connections.clear()
    assert not is_redundant(graph, RelationTriple("s1", "feeds", "s2"), record)


def test_unknown_triple_raises():
    graph, record = substituted_pair()
    with pytest.raises(UnknownTriple):
        is_redundant(graph, RelationTriple("x", "y", "z"), record)


def test_reduction_without_redundancy_is_identity():
    graph = tiny_graph()
    reduced, sweeps, removed = reduce_to_fixed_point(graph, SubstitutionRecord())
    assert reduced.triples == graph.triples
    assert sweeps == 1
    assert removed == ()


def test_reduction_idempotent():
    graph, record = substituted_pair()
    once, _, removed = reduce_to_fixed_point(graph, record)
    twice, sweeps, removed_again = reduce_to_fixed_point(once, record)
    assert len(removed) == 1
    assert twice.triples == once.triples
    assert removed_again == ()
    assert sweeps == 1


# ---------------------------------------------------------------------------
# Impact scoring
# ---------------------------------------------------------------------------

def test_identity_transformation_scores_zero():
    graph = tiny_graph()
    impact = score_transformation(
        graph,
        graph,
        Transformation(name="noop", substitutions=(), removed_triples=()),
    )
    assert impact.as_tuple() == (0, 0, 0)


def test_score_matches_annotations():
    graph, record = substituted_pair()
    reduced, _, removed = reduce_to_fixed_point(graph, record)
    base = WorkflowGraph.build(
        nodes=[
            WorkflowNode("d1", "document", ""),
            WorkflowNode("d2", "document", ""),
            WorkflowNode("human", "human_role", ""),
        ],
        triples=[
            RelationTriple("d1", "feeds", "d2"),
            RelationTriple("human", "reviews", "d2"),
        ],
    )
    transformation = Transformation(
        name="t",
        substitutions=(("d1", "s1"), ("d2", "s2")),
        removed_triples=removed,
        complexity_elements=(ComplexityElement(removed[0], "removed"),),
        automation_elements=(AutomationElement("s1", "automated"),),
        communication_elements=(CommunicationElement("s1", "more", "more"),),
    )
    impact = score_transformation(base, reduced, transformation)
    assert impact.as_tuple() == (-1, 1, 2)


def test_unannotated_removal_is_inconsistent():
    graph, record = substituted_pair()
    reduced, _, removed = reduce_to_fixed_point(graph, record)
    base_nodes = [
        WorkflowNode("d1", "document", ""),
        WorkflowNode("d2", "document", ""),
        WorkflowNode("human", "human_role", ""),
    ]
    base = WorkflowGraph.build(
        base_nodes,
        [RelationTriple("d1", "feeds", "d2"), RelationTriple("human", "reviews", "d2")],
    )
    transformation = Transformation(
        name="t",
        substitutions=(("d1", "s1"), ("d2", "s2")),
        removed_triples=removed,
        complexity_elements=(),  # forgot to annotate the removal
    )
    with pytest.raises(InconsistentTransformation):
        score_transformation(base, reduced, transformation)


def test_communication_element_bounds():
    assert ImpactVector(0, 0, 0) + ImpactVector(-1, 1, 2) == ImpactVector(-1, 1, 2)


def test_cumulative_impact_table():
    vectors = [ImpactVector(-1, 1, 2), ImpactVector(-2, 1, 2), ImpactVector(-2, 1, 2)]
    assert cumulative_impact(vectors).as_tuple() == (-5, 3, 6)
    assert cumulative_impact([]).as_tuple() == (0, 0, 0)
    assert cumulative_impact([ImpactVector(1, 2, 3)]).as_tuple() == (1, 2, 3)


# ---------------------------------------------------------------------------
# The shipped fixture
# ---------------------------------------------------------------------------

def test_fixture_reproduces_impact_table_rows():
    graph = parse_graph(vehicle_api_graph_text())
    script = parse_script(vehicle_api_script_text())
    result = optimize(graph, script)
    assert [it.impact.as_tuple() for it in result.iterations] == [
        (-1, 1, 2),
        (-2, 1, 2),
        (-2, 1, 2),
    ]
    assert result.net.as_tuple() == (-5, 3, 6)
    assert result.total_removed == 5


def test_fixture_consult_edge_becomes_redundant_after_iteration1():
    graph = parse_graph(vehicle_api_graph_text())
    script = parse_script(vehicle_api_script_text())
    current = graph
    record = SubstitutionRecord()
    iteration = script[0]
    for document_id, service_id, label in iteration.substitutions:
        current = substitute_node(
            current, document_id, WorkflowNode(service_id, "service", label)
        )
        record.add(document_id, service_id)
    for source, target in iteration.connections:
        record.connect(source, target)
    # The developer-consults-vehicle-state-expert dependency, post-substitution.
    consult = RelationTriple("svc_signal_kb", "clarifies", "svc_signal_rw")
    assert is_redundant(current, consult, record)


def test_graph_serialization_roundtrip():
    graph = parse_graph(vehicle_api_graph_text())
    again = parse_graph(serialize_graph(graph))
    assert again.triples == graph.triples
    assert again.nodes == graph.nodes


# ---------------------------------------------------------------------------
# Randomized properties (reduction safety on arbitrary graphs)
# ---------------------------------------------------------------------------

def random_graph_and_record(rng: random.Random):
    n_nodes = rng.randint(2, 50)
    nodes = []
    for i in range(n_nodes):
        kind = rng.choice(["human_role", "document", "document", "service"])
        nodes.append(WorkflowNode(f"n{i}", kind, f"node {i}"))
    ids = [n.id for n in nodes]
    triples = set()
    for _ in range(rng.randint(0, 3 * n_nodes)):
        triples.add(
            RelationTriple(rng.choice(ids), rng.choice(["r1", "r2", "r3"]), rng.choice(ids))
        )
    graph = WorkflowGraph.build(nodes, triples)
    record = SubstitutionRecord()
    documents = [n.id for n in nodes if n.kind == "document"]
    for doc in rng.sample(documents, k=min(len(documents), rng.randint(0, 6))):
        service_id = f"svc_{doc}"
        graph = substitute_node(graph, doc, WorkflowNode(service_id, "service", ""))
        record.add(doc, service_id)
    services = list(record.service_ids())
    for _ in range(rng.randint(0, 8)):
        if len(services) >= 2:
            record.connect(rng.choice(services), rng.choice(services))
    return graph, record


def test_reduction_properties_on_random_graphs():
    rng = random.Random(20240817)
    for _ in range(200):
        graph, record = random_graph_and_record(rng)
        reduced, sweeps, removed = reduce_to_fixed_point(graph, record)
        assert sweeps <= len(graph.triples) + 1
        assert reduced.triples <= graph.triples  # never grows
        assert len(removed) == len(graph.triples) - len(reduced.triples)
        again, again_sweeps, again_removed = reduce_to_fixed_point(reduced, record)
        assert again.triples == reduced.triples
        assert again_removed == ()
        for triple in reduced.triples:
            assert not is_redundant(reduced, triple, record)


def test_score_additivity_on_disjoint_parts():
    # Two transformations touching disjoint elements: the composed score is
    # the sum of the parts' scores.
    nodes = [
        WorkflowNode("d1", "document", ""), WorkflowNode("d2", "document", ""),
        WorkflowNode("e1", "document", ""), WorkflowNode("e2", "document", ""),
    ]
    triples = [RelationTriple("d1", "feeds", "d2"), RelationTriple("e1", "feeds", "e2")]
    base = WorkflowGraph.build(nodes, triples)

    def run_part(graph, record, docs, connection):
        current = graph
        for doc in docs:
            current = substitute_node(current, doc, WorkflowNode(f"s_{doc}", "service", ""))
            record.add(doc, f"s_{doc}")
        record.connect(*connection)
        return reduce_to_fixed_point(current, record)

    # Part A alone.
    record_a = SubstitutionRecord()
    reduced_a, _, removed_a = run_part(base, record_a, ["d1", "d2"], ("s_d1", "s_d2"))
    part_a = Transformation(
        name="a", substitutions=(("d1", "s_d1"), ("d2", "s_d2")),
        removed_triples=removed_a,
        complexity_elements=tuple(ComplexityElement(t, "removed") for t in removed_a),
        automation_elements=(AutomationElement("s_d1", "automated"),),
        communication_elements=(CommunicationElement("s_d1", "more", "same"),),
    )
    score_a = score_transformation(base, reduced_a, part_a)

    # Part B alone (applied on top of A's output, touching disjoint nodes).
    record_b = SubstitutionRecord()
    reduced_b, _, removed_b = run_part(reduced_a, record_b, ["e1", "e2"], ("s_e1", "s_e2"))
    part_b = Transformation(
        name="b", substitutions=(("e1", "s_e1"), ("e2", "s_e2")),
        removed_triples=removed_b,
        complexity_elements=tuple(ComplexityElement(t, "removed") for t in removed_b),
        automation_elements=(AutomationElement("s_e1", "automated"),),
        communication_elements=(CommunicationElement("s_e1", "same", "more"),),
    )
    score_b = score_transformation(reduced_a, reduced_b, part_b)

    # Composed transformation covering both parts at once.
    record_ab = SubstitutionRecord()
    current = base
    for doc in ("d1", "d2", "e1", "e2"):
        current = substitute_node(current, doc, WorkflowNode(f"s_{doc}", "service", ""))
        record_ab.add(doc, f"s_{doc}")
    record_ab.connect("s_d1", "s_d2")
    record_ab.connect("s_e1", "s_e2")
    reduced_ab, _, removed_ab = reduce_to_fixed_point(current, record_ab)
    combined = Transformation(
        name="ab",
        substitutions=part_a.substitutions + part_b.substitutions,
        removed_triples=removed_ab,
        complexity_elements=tuple(ComplexityElement(t, "removed") for t in removed_ab),
        automation_elements=part_a.automation_elements + part_b.automation_elements,
        communication_elements=part_a.communication_elements + part_b.communication_elements,
    )
    score_ab = score_transformation(base, reduced_ab, combined)
    assert score_ab == score_a + score_b
