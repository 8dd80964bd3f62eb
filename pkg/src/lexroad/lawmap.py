"""State-transition graphs over compiled rules.

A graph starts at a single START node, tests the rule's condition
variables in clause order (antecedent first, then exception, then outcome
guards) and ends in OUTCOME leaves: one per reachable decision, plus an
"out of scope" sink for assignments where no decision fires.  Equivalent
subtrees are merged and redundant tests skipped, so every maximal path is
a minimal route to a verdict.

Exports are deterministic: DOT for rendering (START circle, CONDITION
diamond, OUTCOME box, yes/no edge labels) and canonical JSON for golden
diffs.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from enum import Enum

from .boolean_core import (
    MAX_TRUTH_TABLE_VARS,
    RuleEquations,
    TooManyVariablesError,
    expand,
    kleene_eval,
)
from .rule_dsl import RuleAst


class NodeKind(Enum):
    START = "start"
    CONDITION = "condition"
    OUTCOME = "outcome"


class EdgeGuard(Enum):
    ALWAYS = "always"
    TRUE_BRANCH = "yes"
    FALSE_BRANCH = "no"


class InconsistentInputsError(Exception):
    pass


class IncompleteAssignmentError(Exception):
    def __init__(self, missing: tuple[str, ...]):
        self.missing = missing
        super().__init__(f"assignment missing condition variables: {', '.join(missing)}")


@dataclass(frozen=True)
class LawmapNode:
    id: str
    kind: NodeKind
    label: str
    var: str | None = None
    decisions: tuple[str, ...] = ()  # OUTCOME only; empty = out-of-scope sink


@dataclass(frozen=True)
class LawmapEdge:
    src: str
    dst: str
    guard: EdgeGuard


@dataclass(frozen=True)
class LawmapGraph:
    rule_id: str
    nodes: tuple[LawmapNode, ...]
    edges: tuple[LawmapEdge, ...]
    meta: tuple[tuple[str, str], ...] = ()

    def node(self, node_id: str) -> LawmapNode:
        for node in self.nodes:
            if node.id == node_id:
                return node
        raise KeyError(node_id)

    def out_edges(self, node_id: str) -> tuple[LawmapEdge, ...]:
        return tuple(e for e in self.edges if e.src == node_id)

    def condition_vars(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for node in self.nodes:
            if node.kind == NodeKind.CONDITION and node.var:
                seen.setdefault(node.var, None)
        return tuple(seen)

    def outcome_paths(self) -> list[list[str]]:
        """Every START→OUTCOME path, depth first, yes before no."""
        paths: list[list[str]] = []

        def walk(node_id: str, trail: list[str]) -> None:
            trail = trail + [node_id]
            edges = self.out_edges(node_id)
            if not edges:
                paths.append(trail)
                return
            for edge in edges:
                walk(edge.dst, trail)

        walk(self.nodes[0].id, [])
        return paths


def build_lawmap(
    eqs: RuleEquations,
    ast: RuleAst | None = None,
    meta: dict[str, str] | None = None,
) -> LawmapGraph:
    """Construct the reduced decision diagram realizing the rule's equations."""
    if ast is not None and ast.rule_id != eqs.rule_id:
        raise InconsistentInputsError(
            f"equations for {eqs.rule_id} do not belong to rule {ast.rule_id}"
        )
    order = eqs.input_ids()
    if ast is not None:
        outcome_count = len(ast.then_outcomes) + len(ast.else_outcomes)
        if outcome_count != len(eqs.decision_ids()):
            raise InconsistentInputsError(
                f"{outcome_count} outcomes in the rule vs {len(eqs.decision_ids())} equations"
            )
    n = len(order)
    if n == 0:
        raise InconsistentInputsError("rule has no condition variables")
    if n > MAX_TRUTH_TABLE_VARS:
        raise TooManyVariablesError(n)

    exprs = expand(eqs)
    decisions = eqs.decision_ids()

    # Decision vector per assignment, assignments enumerated with the first
    # variable in clause order as the most significant bit, True first.
    vectors: list[tuple[bool, ...]] = []
    for values in itertools.product((True, False), repeat=n):
        env: dict[str, bool | None] = dict(zip(order, values))
        vectors.append(tuple(bool(kleene_eval(exprs[d], env)) for d in decisions))

    Ref = tuple  # ("leaf", vector) or ("node", index, true_ref, false_ref)
    node_keys: dict[tuple, Ref] = {}

    def build(index: int, block: tuple[tuple[bool, ...], ...]) -> Ref:
        if all(v == block[0] for v in block):
            return ("leaf", block[0])
        key = (index, block)
        if key in node_keys:
            return node_keys[key]
        half = len(block) // 2
        hi = build(index + 1, block[:half])
        lo = build(index + 1, block[half:])
        ref = hi if hi == lo else ("node", index, hi, lo)
        node_keys[key] = ref
        return ref

    root = build(0, tuple(vectors))

    nodes: list[LawmapNode] = [LawmapNode("start", NodeKind.START, "START")]
    branches: list[tuple[str, Ref, Ref]] = []
    ids: dict[Ref, str] = {}
    counter = itertools.count(1)

    def realize(ref: Ref) -> str:
        if ref in ids:
            return ids[ref]
        if ref[0] == "leaf":
            vector = ref[1]
            fired = tuple(d for d, v in zip(decisions, vector) if v)
            if fired:
                node_id = "outcome_" + "_".join(fired)
                label = "; ".join(eqs.table.describe(d) for d in fired)
            else:
                node_id = "sink"
                label = "Out of scope"
            node = LawmapNode(node_id, NodeKind.OUTCOME, label, None, fired)
        else:
            _, index, hi, lo = ref
            var = order[index]
            node_id = f"c{next(counter)}"
            node = LawmapNode(
                node_id, NodeKind.CONDITION, eqs.table.describe(var), var
            )
        ids[ref] = node_id
        nodes.append(node)
        if ref[0] == "node":
            branches.append((node_id, ref[2], ref[3]))
            realize(ref[2])
            realize(ref[3])
        return node_id

    edges = [LawmapEdge("start", realize(root), EdgeGuard.ALWAYS)]
    for node_id, hi, lo in branches:
        edges.append(LawmapEdge(node_id, ids[hi], EdgeGuard.TRUE_BRANCH))
        edges.append(LawmapEdge(node_id, ids[lo], EdgeGuard.FALSE_BRANCH))
    graph = LawmapGraph(
        rule_id=eqs.rule_id,
        nodes=tuple(nodes),
        edges=tuple(edges),
        meta=tuple(sorted((meta or {}).items())),
    )
    _validate(graph)
    return graph


def _validate(graph: LawmapGraph) -> None:
    starts = [n for n in graph.nodes if n.kind == NodeKind.START]
    if len(starts) != 1:
        raise InconsistentInputsError("graph must have exactly one START node")
    if not any(n.kind == NodeKind.OUTCOME for n in graph.nodes):
        raise InconsistentInputsError("graph has no OUTCOME nodes")
    for node in graph.nodes:
        out = graph.out_edges(node.id)
        if node.kind == NodeKind.START:
            if len(out) < 1 or any(e.guard != EdgeGuard.ALWAYS for e in out):
                raise InconsistentInputsError("START must have unconditional out-edges")
        if node.kind == NodeKind.CONDITION:
            guards = sorted(e.guard.value for e in out)
            if guards != ["no", "yes"]:
                raise InconsistentInputsError(
                    f"condition {node.id} needs exactly one yes and one no edge"
                )
        if node.kind == NodeKind.OUTCOME and out:
            raise InconsistentInputsError(f"outcome {node.id} must be terminal")


def trace_path(graph: LawmapGraph, assignment: dict[str, bool]) -> list[str]:
    """Follow the unique START→OUTCOME path the assignment realizes."""
    missing = tuple(
        v for v in graph.condition_vars() if assignment.get(v) is None
    )
    if missing:
        raise IncompleteAssignmentError(missing)
    path = [graph.nodes[0].id]
    current = graph.nodes[0]
    while current.kind != NodeKind.OUTCOME:
        edges = graph.out_edges(current.id)
        if current.kind == NodeKind.START:
            nxt = edges[0].dst
        else:
            wanted = (
                EdgeGuard.TRUE_BRANCH if assignment[current.var] else EdgeGuard.FALSE_BRANCH
            )
            nxt = next(e.dst for e in edges if e.guard == wanted)
        path.append(nxt)
        current = graph.node(nxt)
    return path


# --- exports -----------------------------------------------------------------

def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


_SHAPES = {NodeKind.START: "circle", NodeKind.CONDITION: "diamond", NodeKind.OUTCOME: "box"}


def export_dot(graph: LawmapGraph, highlight: list[str] | None = None) -> str:
    """Deterministic DOT rendering; ``highlight`` marks a traced path."""
    on_path = set()
    if highlight:
        on_path = {(a, b) for a, b in zip(highlight, highlight[1:])}
    lines = [f"digraph {_dot_quote(graph.rule_id)} {{", "  rankdir=TB;"]
    for key, value in graph.meta:
        lines.append(f"  // {key}: {value}")
    for node in graph.nodes:
        if node.kind == NodeKind.CONDITION:
            label = f"{node.var}: {node.label}"
        elif node.kind == NodeKind.OUTCOME and node.decisions:
            label = f"{', '.join(node.decisions)}: {node.label}"
        else:
            label = node.label
        lines.append(
            f"  {_dot_quote(node.id)} [shape={_SHAPES[node.kind]}, label={_dot_quote(label)}];"
        )
    for edge in graph.edges:
        attrs = []
        if edge.guard != EdgeGuard.ALWAYS:
            attrs.append(f"label={_dot_quote(edge.guard.value)}")
        if (edge.src, edge.dst) in on_path:
            attrs.append("color=red")
            attrs.append("penwidth=2")
        suffix = f" [{', '.join(attrs)}]" if attrs else ""
        lines.append(f"  {_dot_quote(edge.src)} -> {_dot_quote(edge.dst)}{suffix};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_json(graph: LawmapGraph) -> str:
    payload = {
        "rule_id": graph.rule_id,
        "meta": {k: v for k, v in graph.meta},
        "nodes": [
            {
                "id": n.id,
                "kind": n.kind.value,
                "label": n.label,
                "var": n.var,
                "decisions": list(n.decisions),
            }
            for n in graph.nodes
        ],
        "edges": [
            {"from": e.src, "to": e.dst, "guard": e.guard.value} for e in graph.edges
        ],
    }
    return json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def graph_from_json(text: str) -> LawmapGraph:
    payload = json.loads(text)
    nodes = tuple(
        LawmapNode(
            n["id"], NodeKind(n["kind"]), n["label"], n.get("var"),
            tuple(n.get("decisions", ())),
        )
        for n in payload["nodes"]
    )
    edges = tuple(
        LawmapEdge(e["from"], e["to"], EdgeGuard(e["guard"])) for e in payload["edges"]
    )
    return LawmapGraph(
        rule_id=payload["rule_id"],
        nodes=nodes,
        edges=edges,
        meta=tuple(sorted(payload.get("meta", {}).items())),
    )
