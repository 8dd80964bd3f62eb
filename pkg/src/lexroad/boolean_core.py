"""Boolean expressions and per-decision rule equations.

A compiled rule is one equation per decision variable.  With antecedent
fold ``A*``, exception fold ``C*`` and optional per-outcome guards::

    THEN outcome X:  X = A* ∧ C*   (∧ guard)
    ELSE outcome Y:  Y = A* ∧ ¬C*  (∧ guard)

and ``C* = FALSE`` when the rule has no exception, so THEN outcomes are
unsatisfiable and ELSE outcomes reduce to ``A*``.

Scenario evaluation is three-valued (Kleene): a decision is TRUE or FALSE
only when the known facts force it, otherwise UNKNOWN (``None``).
Equations may reference decisions defined earlier in the same set
(expanded by substitution before truth-table work).
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

from .rule_dsl import (
    Clause,
    Connective,
    RuleAst,
    VariableTable,
    VarKind,
    Variable,
    clause_path,
    is_guard,
    _child_key,
)

MAX_TRUTH_TABLE_VARS = 24


class UnboundVariableError(Exception):
    def __init__(self, var_id: str):
        self.var_id = var_id
        super().__init__(f"no variable assigned for '{var_id}'")


class NoOutcomeError(Exception):
    pass


class TooManyVariablesError(Exception):
    def __init__(self, n: int):
        self.n = n
        super().__init__(f"{n} input variables exceed the {MAX_TRUTH_TABLE_VARS}-variable bound")


class CyclicDefinitionError(Exception):
    def __init__(self, var_id: str):
        self.var_id = var_id
        super().__init__(f"decision '{var_id}' is used before (or within) its own definition")


class EquationSyntaxError(Exception):
    pass


# --- expression nodes --------------------------------------------------------

@dataclass(frozen=True)
class Var:
    id: str


@dataclass(frozen=True)
class Not:
    child: "BoolExpr"


@dataclass(frozen=True)
class And:
    children: tuple["BoolExpr", ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("And needs at least two children")


@dataclass(frozen=True)
class Or:
    children: tuple["BoolExpr", ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("Or needs at least two children")


@dataclass(frozen=True)
class Const:
    value: bool


TRUE = Const(True)
FALSE = Const(False)

BoolExpr = Var | Not | And | Or | Const


def conj(parts: list["BoolExpr"]) -> "BoolExpr":
    return parts[0] if len(parts) == 1 else And(tuple(parts))


def disj(parts: list["BoolExpr"]) -> "BoolExpr":
    return parts[0] if len(parts) == 1 else Or(tuple(parts))


def free_vars(expr: BoolExpr) -> tuple[str, ...]:
    """Variable ids in order of first appearance."""
    seen: dict[str, None] = {}

    def walk(e: BoolExpr) -> None:
        if isinstance(e, Var):
            seen.setdefault(e.id, None)
        elif isinstance(e, Not):
            walk(e.child)
        elif isinstance(e, (And, Or)):
            for child in e.children:
                walk(child)

    walk(expr)
    return tuple(seen)


def kleene_eval(expr: BoolExpr, env: dict[str, bool | None]) -> bool | None:
    """Three-valued evaluation; missing or None bindings are UNKNOWN."""
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Var):
        return env.get(expr.id)
    if isinstance(expr, Not):
        value = kleene_eval(expr.child, env)
        return None if value is None else not value
    values = [kleene_eval(child, env) for child in expr.children]
    if isinstance(expr, And):
        if any(v is False for v in values):
            return False
        return None if any(v is None for v in values) else True
    if any(v is True for v in values):
        return True
    return None if any(v is None for v in values) else False


# --- rule equations ----------------------------------------------------------

@dataclass
class RuleEquations:
    """Ordered decision → expression map for one rule.

    ``antecedent`` is the fold of the IF section, ``folds`` the bracket-
    labelled compound sub-folds (used as intermediate nodes downstream),
    and ``input_order`` the condition variables in clause order.
    """

    rule_id: str
    table: VariableTable
    equations: dict[str, BoolExpr]
    antecedent: BoolExpr | None = None
    folds: dict[str, BoolExpr] = field(default_factory=dict)
    input_order: tuple[str, ...] = ()

    def decision_ids(self) -> tuple[str, ...]:
        return tuple(self.equations)

    def input_ids(self) -> tuple[str, ...]:
        if self.input_order:
            return self.input_order
        inputs: dict[str, None] = {}
        for decision, expr in self.equations.items():
            for var_id in free_vars(expr):
                if var_id not in self.equations:
                    inputs.setdefault(var_id, None)
        return tuple(inputs)


def compile_rule(ast: RuleAst, table: VariableTable) -> RuleEquations:
    """Compile a parsed rule against its variable table."""
    if not ast.else_outcomes:
        raise NoOutcomeError(f"rule {ast.rule_id} has no ELSE outcomes")

    def fold(clause: Clause, path: str) -> BoolExpr:
        if path in table.paths:
            return Var(table.paths[path])
        if not clause.children:
            raise UnboundVariableError(path)
        parts = [
            fold(child, f"{path}.{_child_key(child, i)}")
            for i, child in enumerate(clause.children)
        ]
        conns = [child.connective for child in clause.children[:-1]]
        return _fold_with(parts, conns)

    def _fold_with(parts: list[BoolExpr], conns: list[Connective | None]) -> BoolExpr:
        # AND binds tighter than OR when a sibling list mixes connectives.
        groups: list[list[BoolExpr]] = [[parts[0]]]
        for conn, part in zip(conns, parts[1:]):
            if conn == Connective.OR:
                groups.append([part])
            else:
                groups[-1].append(part)
        return disj([conj(group) for group in groups])

    def fold_section(section: str, clauses: tuple[Clause, ...]) -> BoolExpr:
        parts = [
            fold(clause, clause_path(section, (_child_key(clause, i),)))
            for i, clause in enumerate(clauses)
        ]
        conns = [clause.connective for clause in clauses[:-1]]
        return _fold_with(parts, conns)

    antecedent = fold_section("IF", ast.if_clauses)
    exception = (
        fold_section("EXCEPT", ast.except_clauses) if ast.except_clauses else None
    )

    folds: dict[str, BoolExpr] = {}
    for section, clauses in (("IF", ast.if_clauses), ("EXCEPT", ast.except_clauses)):
        for i, clause in enumerate(clauses):
            if clause.label is None or not clause.label.isupper():
                continue
            expr = fold(clause, clause_path(section, (_child_key(clause, i),)))
            if not isinstance(expr, (Var, Const)):
                folds[clause.label] = expr

    def outcome_eq(section: str, outcome: Clause, index: int, branch: bool) -> tuple[str, BoolExpr]:
        path = clause_path(section, (_child_key(outcome, index),))
        decision = table.paths.get(path)
        if decision is None:
            raise UnboundVariableError(path)
        if branch:  # exception branch (THEN)
            base: BoolExpr = And((antecedent, exception)) if exception is not None else FALSE
        else:
            base = And((antecedent, Not(exception))) if exception is not None else antecedent
        guards = [
            fold(child, f"{path}.{_child_key(child, j)}")
            for j, child in enumerate(outcome.children)
            if is_guard(child)
        ]
        for guard in guards:
            if base == FALSE:
                break
            base = And((base, guard))
        return decision, base

    equations: dict[str, BoolExpr] = {}
    for i, outcome in enumerate(ast.then_outcomes):
        decision, expr = outcome_eq("THEN", outcome, i, branch=True)
        equations[decision] = expr
    for i, outcome in enumerate(ast.else_outcomes):
        decision, expr = outcome_eq("ELSE", outcome, i, branch=False)
        equations[decision] = expr

    return RuleEquations(
        rule_id=ast.rule_id,
        table=table,
        equations=equations,
        antecedent=antecedent,
        folds=folds,
        input_order=table.condition_ids(),
    )


def evaluate(eqs: RuleEquations, assignment: dict[str, bool | None]) -> dict[str, bool | None]:
    """Kleene-evaluate every decision; missing variables are UNKNOWN."""
    env: dict[str, bool | None] = dict(assignment)
    results: dict[str, bool | None] = {}
    for decision, expr in eqs.equations.items():
        value = kleene_eval(expr, env)
        env[decision] = value
        results[decision] = value
    return results


def expand(eqs: RuleEquations) -> dict[str, BoolExpr]:
    """Substitute references to earlier decisions, leaving pure input expressions."""
    expanded: dict[str, BoolExpr] = {}

    def subst(e: BoolExpr) -> BoolExpr:
        if isinstance(e, Var):
            if e.id in expanded:
                return expanded[e.id]
            if e.id in eqs.equations:
                raise CyclicDefinitionError(e.id)
            return e
        if isinstance(e, Not):
            return Not(subst(e.child))
        if isinstance(e, And):
            return And(tuple(subst(c) for c in e.children))
        if isinstance(e, Or):
            return Or(tuple(subst(c) for c in e.children))
        return e

    for decision, expr in eqs.equations.items():
        expanded[decision] = subst(expr)
    return expanded


@dataclass(frozen=True)
class TruthTableRow:
    assignment: dict[str, bool]
    decisions: dict[str, bool]


def truth_table(eqs: RuleEquations) -> list[TruthTableRow]:
    """All 2^n rows over the sorted input variables."""
    inputs = tuple(sorted(eqs.input_ids()))
    if len(inputs) > MAX_TRUTH_TABLE_VARS:
        raise TooManyVariablesError(len(inputs))
    exprs = expand(eqs)
    rows = []
    for values in itertools.product((False, True), repeat=len(inputs)):
        env: dict[str, bool | None] = dict(zip(inputs, values))
        decisions = {d: bool(kleene_eval(e, env)) for d, e in exprs.items()}
        rows.append(TruthTableRow(dict(zip(inputs, values)), decisions))
    return rows


@dataclass
class PropertyReport:
    mutually_exclusive: dict[tuple[str, str], bool]
    exhaustive_given_antecedent: bool | None
    witnesses: dict[str, dict[str, bool]]

    @property
    def all_mutually_exclusive(self) -> bool:
        return all(self.mutually_exclusive.values())


def check_properties(
    eqs: RuleEquations, antecedent: BoolExpr | None = None
) -> PropertyReport:
    """Exhaustively check pairwise exclusion and coverage of the antecedent."""
    antecedent = antecedent if antecedent is not None else eqs.antecedent
    rows = truth_table(eqs)
    decisions = eqs.decision_ids()
    exclusive: dict[tuple[str, str], bool] = {
        pair: True for pair in itertools.combinations(decisions, 2)
    }
    witnesses: dict[str, dict[str, bool]] = {}
    exhaustive: bool | None = None if antecedent is None else True
    for row in rows:
        for pair in itertools.combinations(decisions, 2):
            if exclusive[pair] and row.decisions[pair[0]] and row.decisions[pair[1]]:
                exclusive[pair] = False
                witnesses[f"not_exclusive:{pair[0]},{pair[1]}"] = row.assignment
        if exhaustive is not None and exhaustive:
            env: dict[str, bool | None] = dict(row.assignment)
            if kleene_eval(antecedent, env) and not any(row.decisions.values()):
                exhaustive = False
                witnesses["not_exhaustive"] = row.assignment
    return PropertyReport(exclusive, exhaustive, witnesses)


def normalize(expr: BoolExpr) -> BoolExpr:
    """Flatten same-operator nesting, drop double negation, sort children."""
    if isinstance(expr, Not):
        child = normalize(expr.child)
        if isinstance(child, Not):
            return child.child
        return Not(child)
    if isinstance(expr, (And, Or)):
        op = type(expr)
        flat: list[BoolExpr] = []
        for child in expr.children:
            child = normalize(child)
            if isinstance(child, op):
                flat.extend(child.children)
            else:
                flat.append(child)
        flat.sort(key=to_text)
        return op(tuple(flat))
    return expr


def equivalent(
    a: BoolExpr, b: BoolExpr, variables: tuple[str, ...] | None = None
) -> tuple[bool, dict[str, bool] | None]:
    """Truth-table equivalence over the union of free variables; returns a
    distinguishing assignment when the expressions differ."""
    names = tuple(sorted(set(free_vars(a)) | set(free_vars(b)) | set(variables or ())))
    if len(names) > MAX_TRUTH_TABLE_VARS:
        raise TooManyVariablesError(len(names))
    for values in itertools.product((False, True), repeat=len(names)):
        env: dict[str, bool | None] = dict(zip(names, values))
        if kleene_eval(a, env) != kleene_eval(b, env):
            return False, dict(zip(names, values))
    return True, None


# --- text form ----------------------------------------------------------------

_OPS = {"unicode": ("∧", "∨", "¬"), "ascii": ("&", "|", "!")}


def to_text(expr: BoolExpr, ascii_ops: bool = False) -> str:
    and_op, or_op, not_op = _OPS["ascii" if ascii_ops else "unicode"]

    def wrap(e: BoolExpr) -> str:
        text = render(e)
        return f"({text})" if isinstance(e, (And, Or)) else text

    def render(e: BoolExpr) -> str:
        if isinstance(e, Var):
            return e.id
        if isinstance(e, Const):
            return "TRUE" if e.value else "FALSE"
        if isinstance(e, Not):
            return f"{not_op}{wrap(e.child)}"
        op = f" {and_op} " if isinstance(e, And) else f" {or_op} "
        return op.join(wrap(child) for child in e.children)

    return render(expr)


def equations_to_text(eqs: RuleEquations, ascii_ops: bool = False) -> str:
    return "\n".join(
        f"{decision} = {to_text(expr, ascii_ops)}"
        for decision, expr in eqs.equations.items()
    ) + "\n"


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<lpar>\()|(?P<rpar>\))|(?P<not>¬|!|~|∼)|(?P<and>∧|&|×|·)"
    r"|(?P<or>∨|\||\+)|(?P<id>[A-Za-z_][A-Za-z0-9_.\-]*))"
)


def parse_expr(text: str) -> BoolExpr:
    """Parse one expression in either the unicode or the ASCII operator set."""
    tokens: list[tuple[str, str]] = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise EquationSyntaxError(f"bad token at '{text[pos:]}'")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind)))
        pos = m.end()
    tokens.append(("end", ""))
    index = 0

    def peek() -> str:
        return tokens[index][0]

    def take(kind: str) -> str:
        nonlocal index
        got, value = tokens[index]
        if got != kind:
            raise EquationSyntaxError(f"expected {kind}, got {got or 'end'}")
        index += 1
        return value

    def parse_or() -> BoolExpr:
        parts = [parse_and()]
        while peek() == "or":
            take("or")
            parts.append(parse_and())
        return disj(parts)

    def parse_and() -> BoolExpr:
        parts = [parse_unary()]
        while peek() == "and":
            take("and")
            parts.append(parse_unary())
        return conj(parts)

    def parse_unary() -> BoolExpr:
        if peek() == "not":
            take("not")
            return Not(parse_unary())
        if peek() == "lpar":
            take("lpar")
            inner = parse_or()
            take("rpar")
            return inner
        name = take("id")
        if name == "TRUE":
            return TRUE
        if name == "FALSE":
            return FALSE
        return Var(name)

    result = parse_or()
    take("end")
    return result


def parse_equations(text: str, rule_id: str = "adhoc") -> RuleEquations:
    """Parse ``decision = expr`` lines into a RuleEquations set.

    Right-hand ids matching an earlier left-hand side are decision
    references; an id that is only defined later is a cycle.
    """
    equations: dict[str, BoolExpr] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise EquationSyntaxError(f"expected 'decision = expression': {line!r}")
        lhs, rhs = line.split("=", 1)
        decision = lhs.strip()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_.\-]*", decision):
            raise EquationSyntaxError(f"bad decision id {decision!r}")
        if decision in equations:
            raise EquationSyntaxError(f"decision {decision!r} defined twice")
        equations[decision] = parse_expr(rhs)

    table = VariableTable(rule_id=rule_id)
    referenced_before_def: dict[str, None] = {}
    defined: set[str] = set()
    for decision, expr in equations.items():
        for var_id in free_vars(expr):
            if var_id not in defined:
                referenced_before_def.setdefault(var_id, None)
        defined.add(decision)
    for var_id in referenced_before_def:
        if var_id in equations:
            raise CyclicDefinitionError(var_id)
        table.variables[var_id] = Variable(var_id, VarKind.FACTUAL, var_id)
    for decision in equations:
        table.variables[decision] = Variable(decision, VarKind.DECISION, decision)
    return RuleEquations(
        rule_id=rule_id,
        table=table,
        equations=equations,
        input_order=tuple(referenced_before_def),
    )


def equations_equivalent(
    a: RuleEquations, b: RuleEquations
) -> tuple[bool, str | None, dict[str, bool] | None]:
    """Decision-by-decision truth-table equivalence of two equation sets.

    Returns ``(ok, decision, witness)`` with the first diverging decision
    and a distinguishing input assignment when the sets differ.
    """
    if set(a.decision_ids()) != set(b.decision_ids()):
        missing = set(a.decision_ids()) ^ set(b.decision_ids())
        return False, sorted(missing)[0], None
    ea, eb = expand(a), expand(b)
    for decision in a.decision_ids():
        ok, witness = equivalent(ea[decision], eb[decision])
        if not ok:
            return False, decision, witness
    return True, None, None
