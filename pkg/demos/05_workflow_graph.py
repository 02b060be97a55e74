"""Walkthrough: workflow-graph optimization.

The bundled fixture models a manual vehicle-API workflow: expert roles,
their documents, and the developer translation work, densely connected by
coordination edges. Three scripted iterations substitute the manual work
products with automated services, remove the coordination edges the
services resolve programmatically, and score each step on complexity,
automation, and communication (explainable x executable duality).

Run:  python demos/05_workflow_graph.py
"""

from signalforge.fixtures import vehicle_api_graph_text, vehicle_api_script_text
from signalforge.workflow import optimize, parse_graph, parse_script

graph = parse_graph(vehicle_api_graph_text())
script = parse_script(vehicle_api_script_text())

print(f"initial graph: {len(graph.nodes)} nodes, {len(graph.triples)} triples")
by_kind = {}
for node in graph.nodes.values():
    by_kind.setdefault(node.kind, []).append(node.id)
for kind, ids in sorted(by_kind.items()):
    print(f"  {kind}: {len(ids)}")

result = optimize(graph, script)
print("\niteration                     impact (cmplx, auto, comm)   removed")
for iteration in result.iterations:
    c, a, m = iteration.impact.as_tuple()
    print(f"{iteration.name:28s}  ({c:+d}, {a:+d}, {m:+d})          {len(iteration.removed)}")
    for triple in iteration.removed:
        print(f"    - {triple.source} --{triple.relation}--> {triple.target}")

c, a, m = result.net.as_tuple()
print(f"\nnet change: ({c:+d}, {a:+d}, {m:+d}); "
      f"{result.total_removed} coordination edges removed")
print(f"final graph: {len(result.final_graph.nodes)} nodes, "
      f"{len(result.final_graph.triples)} triples")
