"""Discrete Bayesian networks carrying a rule's Boolean semantics.

Every factual/situation variable becomes a root with a prior (0.5 unless
overridden), every bracket-labelled compound clause fold becomes an
intermediate node, and every equation becomes a decision node.  Non-root
CPTs are deterministic (entries 0 or 1), so instantiating a complete set
of fact observations drives each decision's posterior to exactly its
Boolean value; that agreement is what :func:`validate_bn` checks, together
with the per-equation scenario check (observing one satisfying assignment
of an equation forces its decision to probability 1).

Inference is exact.  Weighted enumeration branches over the joint states
in topological order; variable elimination multiplies and sums out factors
in min-degree order.  The two agree to within float rounding and both
raise :class:`ImpossibleEvidenceError` when the observations have zero
probability.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from enum import Enum

from .boolean_core import (
    And,
    BoolExpr,
    CyclicDefinitionError,
    Not,
    Or,
    RuleEquations,
    TooManyVariablesError,
    Var,
    evaluate,
    expand,
    free_vars,
    kleene_eval,
)

MAX_VALIDATION_ROOTS = 24
MAX_NODE_PARENTS = 16  # CPT rows are 2^parents; beyond this a table is unusable
AGREEMENT_TOLERANCE = 1e-9


class ImpossibleEvidenceError(Exception):
    pass


class BnNodeKind(Enum):
    FACT_ROOT = "fact_root"
    CLAUSE = "clause"
    DECISION = "decision"


@dataclass(frozen=True)
class BnNode:
    """One binary node: states are (true, false).

    ``cpt[i]`` is P(node=true | parents in combination i), combinations
    enumerated over ``itertools.product((True, False), ...)`` in parent
    order, so row 0 has every parent true and the last row every parent
    false.  Roots have no parents and a single-entry prior.
    """

    id: str
    kind: BnNodeKind
    parents: tuple[str, ...]
    cpt: tuple[float, ...]
    description: str = ""


@dataclass(frozen=True)
class BayesNet:
    rule_id: str
    nodes: tuple[BnNode, ...]  # topological order

    def node(self, node_id: str) -> BnNode:
        for node in self.nodes:
            if node.id == node_id:
                return node
        raise KeyError(node_id)

    def ids(self, kind: BnNodeKind | None = None) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes if kind is None or n.kind == kind)

    def p_true(self, node: BnNode, state: dict[str, bool]) -> float:
        index = 0
        for parent in node.parents:
            index = index * 2 + (0 if state[parent] else 1)
        return node.cpt[index]


def _cpt_for(expr: BoolExpr, parents: tuple[str, ...]) -> tuple[float, ...]:
    if len(parents) > MAX_NODE_PARENTS:
        raise TooManyVariablesError(len(parents))
    rows = []
    for combo in itertools.product((True, False), repeat=len(parents)):
        env: dict[str, bool | None] = dict(zip(parents, combo))
        rows.append(1.0 if kleene_eval(expr, env) else 0.0)
    return tuple(rows)


def _replace_folds(expr: BoolExpr, folds: dict[str, BoolExpr]) -> BoolExpr:
    for name, fold_expr in folds.items():
        if expr == fold_expr:
            return Var(name)
    if isinstance(expr, Not):
        return Not(_replace_folds(expr.child, folds))
    if isinstance(expr, And):
        return And(tuple(_replace_folds(c, folds) for c in expr.children))
    if isinstance(expr, Or):
        return Or(tuple(_replace_folds(c, folds) for c in expr.children))
    return expr


def build_bn(
    eqs: RuleEquations, priors: dict[str, float] | None = None
) -> BayesNet:
    """Mechanically derive the network from the equations' structure."""
    priors = dict(priors or {})
    for fact, p in priors.items():
        if not 0.0 < p < 1.0:
            raise ValueError(f"prior for {fact} must be in (0, 1), got {p}")

    nodes: list[BnNode] = []
    table = eqs.table
    for var_id in eqs.input_ids():
        nodes.append(
            BnNode(
                var_id,
                BnNodeKind.FACT_ROOT,
                (),
                (priors.get(var_id, 0.5),),
                table.describe(var_id),
            )
        )

    taken = set(eqs.input_ids()) | set(eqs.decision_ids())
    fold_names: dict[str, BoolExpr] = {}
    for label, expr in eqs.folds.items():
        name = label
        while name in taken:
            name = name + "_fold"
        taken.add(name)
        fold_names[name] = expr

    used: dict[str, BoolExpr] = {}
    rewritten: dict[str, BoolExpr] = {}
    for decision, expr in eqs.equations.items():
        new = _replace_folds(expr, fold_names)
        rewritten[decision] = new
        for ref in free_vars(new):
            if ref in fold_names:
                used[ref] = fold_names[ref]

    for name, expr in used.items():
        parents = free_vars(expr)
        nodes.append(BnNode(name, BnNodeKind.CLAUSE, parents, _cpt_for(expr, parents)))

    defined = {n.id for n in nodes}
    for decision, expr in rewritten.items():
        parents = free_vars(expr)
        for parent in parents:
            if parent not in defined:
                raise CyclicDefinitionError(decision)
        nodes.append(
            BnNode(
                decision,
                BnNodeKind.DECISION,
                parents,
                _cpt_for(expr, parents),
                table.describe(decision),
            )
        )
        defined.add(decision)
    return BayesNet(rule_id=eqs.rule_id, nodes=tuple(nodes))


# --- inference ---------------------------------------------------------------

def infer(
    net: BayesNet,
    evidence: dict[str, bool] | None = None,
    method: str = "auto",
) -> dict[str, float]:
    """Posterior P(true) for every node given the evidence."""
    evidence = dict(evidence or {})
    known = {n.id for n in net.nodes}
    for key, value in evidence.items():
        if key not in known:
            raise KeyError(f"evidence on unknown node '{key}'")
        if not isinstance(value, bool):
            raise ValueError(f"evidence for {key} must be true or false")
    if method == "auto":
        roots = len(net.ids(BnNodeKind.FACT_ROOT))
        method = "enumeration" if roots <= 16 else "elimination"
    if method == "enumeration":
        return _infer_enumeration(net, evidence)
    if method == "elimination":
        return _infer_elimination(net, evidence)
    raise ValueError(f"unknown inference method '{method}'")


def _infer_enumeration(net: BayesNet, evidence: dict[str, bool]) -> dict[str, float]:
    order = list(net.nodes)
    true_mass = {n.id: 0.0 for n in order}
    total = 0.0
    state: dict[str, bool] = {}

    def recurse(i: int, weight: float) -> None:
        nonlocal total
        if weight == 0.0:
            return
        if i == len(order):
            total += weight
            for node_id, value in state.items():
                if value:
                    true_mass[node_id] += weight
            return
        node = order[i]
        p = net.p_true(node, state)
        fixed = evidence.get(node.id)
        for value, branch_p in ((True, p), (False, 1.0 - p)):
            if fixed is not None and value != fixed:
                continue
            state[node.id] = value
            recurse(i + 1, weight * branch_p)
        del state[node.id]

    recurse(0, 1.0)
    if total == 0.0:
        raise ImpossibleEvidenceError("evidence has zero probability")
    return {node_id: mass / total for node_id, mass in true_mass.items()}


Factor = tuple[tuple[str, ...], dict[tuple[bool, ...], float]]


def _node_factor(net: BayesNet, node: BnNode, evidence: dict[str, bool]) -> Factor:
    scope = node.parents + (node.id,)
    table: dict[tuple[bool, ...], float] = {}
    for combo in itertools.product((True, False), repeat=len(node.parents)):
        state = dict(zip(node.parents, combo))
        p = net.p_true(node, state)
        table[combo + (True,)] = p
        table[combo + (False,)] = 1.0 - p
    return _reduce((scope, table), evidence)


def _reduce(factor: Factor, evidence: dict[str, bool]) -> Factor:
    scope, table = factor
    fixed = [i for i, v in enumerate(scope) if v in evidence]
    if not fixed:
        return factor
    keep = [i for i in range(len(scope)) if i not in fixed]
    new_scope = tuple(scope[i] for i in keep)
    new_table: dict[tuple[bool, ...], float] = {}
    for key, value in table.items():
        if all(key[i] == evidence[scope[i]] for i in fixed):
            new_table[tuple(key[i] for i in keep)] = value
    return new_scope, new_table


def _multiply(a: Factor, b: Factor) -> Factor:
    scope_a, table_a = a
    scope_b, table_b = b
    scope = scope_a + tuple(v for v in scope_b if v not in scope_a)
    index_b = [scope.index(v) for v in scope_b]
    table: dict[tuple[bool, ...], float] = {}
    for combo in itertools.product((True, False), repeat=len(scope)):
        pa = table_a[combo[: len(scope_a)]]
        pb = table_b[tuple(combo[i] for i in index_b)]
        table[combo] = pa * pb
    return scope, table


def _sum_out(factor: Factor, var: str) -> Factor:
    scope, table = factor
    i = scope.index(var)
    new_scope = scope[:i] + scope[i + 1:]
    new_table: dict[tuple[bool, ...], float] = {}
    for key, value in table.items():
        reduced = key[:i] + key[i + 1:]
        new_table[reduced] = new_table.get(reduced, 0.0) + value
    return new_scope, new_table


def _eliminate(factors: list[Factor], hidden: list[str]) -> Factor:
    """Sum the listed variables out of the factor product, min-degree first."""
    hidden = list(hidden)
    while hidden:
        def degree(v: str) -> int:
            joined: set[str] = set()
            for scope, _ in factors:
                if v in scope:
                    joined.update(scope)
            return len(joined)

        var = min(hidden, key=lambda v: (degree(v), v))
        hidden.remove(var)
        related = [f for f in factors if var in f[0]]
        factors = [f for f in factors if var not in f[0]]
        if not related:
            continue
        product = related[0]
        for other in related[1:]:
            product = _multiply(product, other)
        factors.append(_sum_out(product, var))
    product = factors[0] if factors else ((), {(): 1.0})
    for other in factors[1:]:
        product = _multiply(product, other)
    return product


def _infer_elimination(net: BayesNet, evidence: dict[str, bool]) -> dict[str, float]:
    base = [_node_factor(net, node, evidence) for node in net.nodes]
    unobserved = [n.id for n in net.nodes if n.id not in evidence]

    _, z_table = _eliminate(list(base), list(unobserved))
    if sum(z_table.values()) == 0.0:
        raise ImpossibleEvidenceError("evidence has zero probability")

    posteriors: dict[str, float] = {}
    for query in net.ids():
        if query in evidence:
            posteriors[query] = 1.0 if evidence[query] else 0.0
            continue
        scope, table = _eliminate(list(base), [v for v in unobserved if v != query])
        if scope != (query,):
            i = scope.index(query)
            collapsed: dict[tuple[bool, ...], float] = {}
            for key, value in table.items():
                collapsed[(key[i],)] = collapsed.get((key[i],), 0.0) + value
            table = collapsed
        p_true = table.get((True,), 0.0)
        p_false = table.get((False,), 0.0)
        z = p_true + p_false
        if z == 0.0:
            raise ImpossibleEvidenceError("evidence has zero probability")
        posteriors[query] = p_true / z
    return posteriors


# --- validation --------------------------------------------------------------

@dataclass
class Divergence:
    decision: str
    evidence: dict[str, bool]
    expected: bool
    posterior: float


@dataclass
class EquationCheck:
    decision: str
    evidence: dict[str, bool]
    posterior: float
    passed: bool


@dataclass
class ValidationReport:
    rule_id: str
    assignments_checked: int
    divergences: list[Divergence] = field(default_factory=list)
    equation_checks: list[EquationCheck] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.divergences and all(c.passed for c in self.equation_checks)

    @property
    def equations_total(self) -> int:
        return len(self.equation_checks)

    @property
    def equations_passed(self) -> int:
        return sum(1 for c in self.equation_checks if c.passed)


def validate_bn(net: BayesNet, eqs: RuleEquations) -> ValidationReport:
    """Exhaustively confirm the net reproduces the Boolean semantics."""
    roots = net.ids(BnNodeKind.FACT_ROOT)
    if len(roots) > MAX_VALIDATION_ROOTS:
        raise TooManyVariablesError(len(roots))
    report = ValidationReport(rule_id=net.rule_id, assignments_checked=0)
    decisions = eqs.decision_ids()
    for combo in itertools.product((False, True), repeat=len(roots)):
        ev = dict(zip(roots, combo))
        posteriors = infer(net, ev, method="enumeration")
        expected = evaluate(eqs, dict(ev))
        report.assignments_checked += 1
        for decision in decisions:
            p = posteriors[decision]
            want = bool(expected[decision])
            if min(p, 1.0 - p) > AGREEMENT_TOLERANCE or (p > 0.5) != want:
                report.divergences.append(Divergence(decision, ev, want, p))
    exprs = expand(eqs)
    for decision in decisions:
        expr = exprs[decision]
        names = free_vars(expr)
        satisfying = None
        for combo in itertools.product((True, False), repeat=len(names)):
            env: dict[str, bool | None] = dict(zip(names, combo))
            if kleene_eval(expr, env):
                satisfying = dict(zip(names, combo))
                break
        if satisfying is None:
            continue  # unsatisfiable decision: nothing to instantiate
        posteriors = infer(net, satisfying, method="enumeration")
        p = posteriors[decision]
        report.equation_checks.append(
            EquationCheck(decision, satisfying, p, abs(p - 1.0) <= AGREEMENT_TOLERANCE)
        )
    return report


# --- serialization -----------------------------------------------------------

def net_to_json(net: BayesNet) -> str:
    payload = {
        "rule_id": net.rule_id,
        "nodes": [
            {
                "id": n.id,
                "kind": n.kind.value,
                "parents": list(n.parents),
                "cpt": list(n.cpt),
                "description": n.description,
            }
            for n in net.nodes
        ],
    }
    return json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def net_from_json(text: str) -> BayesNet:
    payload = json.loads(text)
    nodes = tuple(
        BnNode(
            n["id"],
            BnNodeKind(n["kind"]),
            tuple(n["parents"]),
            tuple(n["cpt"]),
            n.get("description", ""),
        )
        for n in payload["nodes"]
    )
    return BayesNet(rule_id=payload["rule_id"], nodes=nodes)
