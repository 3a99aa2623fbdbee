"""Guarded-transition models over finite-domain shared variables.

A model is a set of processes, each a graph of locations with guarded
edges, plus shared variables with explicit finite domains.  Expansion
enumerates the full Cartesian state space and interleaves the processes:
one transition per (state, process edge) whose guard holds, with the
edge's assignments applied simultaneously.  The expanded system is an
ordinary `Ars` whose object labels render the state tuples, so every
verifier facility applies unchanged.

Model DSL (UTF-8, `#` comments):

    var <name>: bool = <v>{|<v>}
    var <name>: int[<lo>..<hi>] = <v>{|<v>}
    process <name> {
      loc <name> [init]
      edge <src> -> <dst> [when <guard>] [do <var> := <expr> {; <var> := <expr>}]
    }

Guards combine comparisons (=, !=, <, <=, >, >=) of variables and literals
with &&, ||, ! and parentheses; a bare boolean variable is an atom.  State
predicates additionally allow `loc(<process>) = <location>` atoms.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from math import prod

from .ars import Ars, StateSet, canon

Value = bool | int


class ModelError(ValueError):
    """Malformed model text or expression."""


class ModelSyntaxError(ModelError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class DomainError(ModelError):
    """An assignment leaves a variable's declared domain."""


class StateLimitError(ModelError):
    """The state space exceeds the configured cap."""


@dataclass(frozen=True)
class VarDecl:
    name: str
    is_bool: bool
    lo: int = 0
    hi: int = 0
    init_values: tuple[Value, ...] = ()

    def domain(self) -> tuple[Value, ...]:
        if self.is_bool:
            return (False, True)
        return tuple(range(self.lo, self.hi + 1))

    def admits(self, v: Value) -> bool:
        if self.is_bool:
            return isinstance(v, bool)
        return isinstance(v, int) and not isinstance(v, bool) and self.lo <= v <= self.hi


@dataclass(frozen=True)
class EdgeDecl:
    src: str
    dst: str
    guard: tuple | None  # expression AST, None = always enabled
    assigns: tuple[tuple[str, tuple], ...]  # (var name, expression AST)


@dataclass(frozen=True)
class ProcessDecl:
    name: str
    locations: tuple[str, ...]
    init_locations: tuple[str, ...]
    edges: tuple[EdgeDecl, ...]


@dataclass(frozen=True)
class Model:
    variables: tuple[VarDecl, ...]
    processes: tuple[ProcessDecl, ...]

    def var(self, name: str) -> VarDecl:
        for v in self.variables:
            if v.name == name:
                return v
        raise ModelError(f"unknown variable {name!r}")

    def process(self, name: str) -> ProcessDecl:
        for p in self.processes:
            if p.name == name:
                return p
        raise ModelError(f"unknown process {name!r}")


# ---------------------------------------------------------------------------
# Tokenizer

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r]+)"
    r"|(?P<comment>#[^\n]*)"
    r"|(?P<nl>\n)"
    r"|(?P<int>\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<sym>:=|->|\.\.|&&|\|\||!=|<=|>=|[{}()\[\]:=|!<>;,-])"
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident | int | sym | eof
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ModelSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind == "nl":
            line += 1
            col = 1
        else:
            if kind not in ("ws", "comment"):
                tokens.append(Token(kind, chunk, line, col))
            col += len(chunk)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


class _TokenStream:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def accept(self, text: str) -> bool:
        if self.peek().text == text and self.peek().kind != "eof":
            self.next()
            return True
        return False

    def expect(self, text: str, what: str | None = None) -> Token:
        tok = self.peek()
        if tok.text != text or tok.kind == "eof":
            want = what or repr(text)
            raise ModelSyntaxError(f"expected {want}, got {tok.text!r}", tok.line, tok.column)
        return self.next()

    def expect_ident(self, what: str) -> Token:
        tok = self.peek()
        if tok.kind != "ident":
            raise ModelSyntaxError(f"expected {what}, got {tok.text!r}", tok.line, tok.column)
        return self.next()

    def error(self, message: str) -> ModelSyntaxError:
        tok = self.peek()
        return ModelSyntaxError(message, tok.line, tok.column)


# ---------------------------------------------------------------------------
# Expression parsing (guards and state predicates share one grammar)

_CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")


def _parse_expr(ts: _TokenStream, allow_loc: bool) -> tuple:
    node = _parse_and(ts, allow_loc)
    while ts.accept("||"):
        node = ("or", node, _parse_and(ts, allow_loc))
    return node


def _parse_and(ts: _TokenStream, allow_loc: bool) -> tuple:
    node = _parse_unary(ts, allow_loc)
    while ts.accept("&&"):
        node = ("and", node, _parse_unary(ts, allow_loc))
    return node


def _parse_unary(ts: _TokenStream, allow_loc: bool) -> tuple:
    if ts.accept("!"):
        return ("not", _parse_unary(ts, allow_loc))
    return _parse_atom(ts, allow_loc)


def _parse_atom(ts: _TokenStream, allow_loc: bool) -> tuple:
    if ts.accept("("):
        node = _parse_expr(ts, allow_loc)
        ts.expect(")")
        return node
    lhs = _parse_operand(ts, allow_loc)
    tok = ts.peek()
    if tok.text in _CMP_OPS and tok.kind == "sym":
        op = ts.next().text
        rhs = _parse_operand(ts, allow_loc)
        return ("cmp", op, lhs, rhs)
    return ("atom", lhs)


def _parse_operand(ts: _TokenStream, allow_loc: bool) -> tuple:
    tok = ts.peek()
    if tok.kind == "int" or tok.text == "-":
        return ("int", _parse_int_lit(ts))
    if tok.kind != "ident":
        raise ts.error(f"expected a variable or literal, got {tok.text!r}")
    ts.next()
    if tok.text == "true":
        return ("bool", True)
    if tok.text == "false":
        return ("bool", False)
    if tok.text == "loc" and ts.peek().text == "(":
        if not allow_loc:
            raise ModelSyntaxError("loc() atoms are not allowed in guards", tok.line, tok.column)
        ts.expect("(")
        proc = ts.expect_ident("a process name")
        ts.expect(")")
        return ("loc", proc.text)
    return ("name", tok.text)


def parse_state_expr(text: str) -> tuple:
    """Parse a state-predicate expression (loc/var atoms, and/or/not)."""
    ts = _TokenStream(_tokenize(text))
    node = _parse_expr(ts, allow_loc=True)
    tok = ts.peek()
    if tok.kind != "eof":
        raise ModelSyntaxError(f"trailing input {tok.text!r}", tok.line, tok.column)
    return node


# ---------------------------------------------------------------------------
# Model parsing

def parse_model(text: str) -> Model:
    """Parse the model DSL, reporting the first error with line/column."""
    ts = _TokenStream(_tokenize(text))
    variables: list[VarDecl] = []
    processes: list[ProcessDecl] = []
    names: set[str] = set()
    while ts.peek().kind != "eof":
        head = ts.peek()
        if head.text == "var":
            ts.next()
            variables.append(_parse_var(ts, names))
        elif head.text == "process":
            ts.next()
            processes.append(_parse_process(ts, names, variables))
        else:
            raise ts.error(f"expected 'var' or 'process', got {head.text!r}")
    if not processes:
        raise ModelSyntaxError("no process declared", ts.peek().line, ts.peek().column)
    return Model(tuple(variables), tuple(processes))


def _parse_var(ts: _TokenStream, names: set[str]) -> VarDecl:
    name_tok = ts.expect_ident("a variable name")
    if name_tok.text in names:
        raise ModelSyntaxError(f"duplicate name {name_tok.text!r}", name_tok.line, name_tok.column)
    names.add(name_tok.text)
    ts.expect(":")
    type_tok = ts.next()
    if type_tok.text == "bool":
        is_bool, lo, hi = True, 0, 0
    elif type_tok.text == "int":
        ts.expect("[")
        lo = _parse_int_lit(ts)
        ts.expect("..")
        hi = _parse_int_lit(ts)
        ts.expect("]")
        if lo > hi:
            raise ModelSyntaxError(f"empty range [{lo}..{hi}]", type_tok.line, type_tok.column)
        is_bool = False
    else:
        raise ModelSyntaxError(
            f"expected 'bool' or 'int', got {type_tok.text!r}", type_tok.line, type_tok.column)
    ts.expect("=")
    decl = VarDecl(name_tok.text, is_bool, lo, hi)
    inits = [_parse_value(ts, decl)]
    while ts.accept("|"):
        inits.append(_parse_value(ts, decl))
    return VarDecl(name_tok.text, is_bool, lo, hi, tuple(dict.fromkeys(inits)))


def _parse_int_lit(ts: _TokenStream) -> int:
    sign = -1 if ts.accept("-") else 1
    tok = ts.peek()
    if tok.kind != "int":
        raise ts.error(f"expected an integer, got {tok.text!r}")
    ts.next()
    return sign * int(tok.text)


def _parse_value(ts: _TokenStream, decl: VarDecl) -> Value:
    tok = ts.peek()
    if decl.is_bool:
        if tok.text in ("true", "false"):
            ts.next()
            return tok.text == "true"
        raise ts.error(f"expected true/false for {decl.name}, got {tok.text!r}")
    value = _parse_int_lit(ts)
    if not decl.admits(value):
        raise ModelSyntaxError(
            f"value {value} outside {decl.name}:int[{decl.lo}..{decl.hi}]", tok.line, tok.column)
    return value


def _parse_process(ts: _TokenStream, names: set[str], variables: list[VarDecl]) -> ProcessDecl:
    name_tok = ts.expect_ident("a process name")
    if name_tok.text in names:
        raise ModelSyntaxError(f"duplicate name {name_tok.text!r}", name_tok.line, name_tok.column)
    names.add(name_tok.text)
    ts.expect("{")
    locations: list[str] = []
    init_locations: list[str] = []
    edges: list[EdgeDecl] = []
    var_names = {v.name for v in variables}
    while not ts.accept("}"):
        head = ts.peek()
        if head.text == "loc":
            ts.next()
            loc_tok = ts.expect_ident("a location name")
            if loc_tok.text in names:
                raise ModelSyntaxError(
                    f"duplicate name {loc_tok.text!r}", loc_tok.line, loc_tok.column)
            names.add(loc_tok.text)
            locations.append(loc_tok.text)
            if ts.accept("init"):
                init_locations.append(loc_tok.text)
        elif head.text == "edge":
            ts.next()
            src = ts.expect_ident("a source location")
            ts.expect("->")
            dst = ts.expect_ident("a destination location")
            for tok in (src, dst):
                if tok.text not in locations:
                    raise ModelSyntaxError(
                        f"unknown location {tok.text!r}", tok.line, tok.column)
            guard = None
            if ts.accept("when"):
                guard_tok = ts.peek()
                guard = _parse_expr(ts, allow_loc=False)
                try:
                    _check_expr(Model(tuple(variables), ()), guard, allow_loc=False)
                except ModelError as exc:
                    raise ModelSyntaxError(str(exc), guard_tok.line, guard_tok.column) from None
            assigns: list[tuple[str, tuple]] = []
            if ts.accept("do"):
                assigns.append(_parse_assign(ts, var_names))
                while ts.accept(";"):
                    assigns.append(_parse_assign(ts, var_names))
            edges.append(EdgeDecl(src.text, dst.text, guard, tuple(assigns)))
        elif head.kind == "eof":
            raise ts.error("unterminated process block")
        else:
            raise ts.error(f"expected 'loc', 'edge' or '}}', got {head.text!r}")
    if not locations:
        raise ModelSyntaxError(
            f"process {name_tok.text!r} has no locations", name_tok.line, name_tok.column)
    if not init_locations:
        raise ModelSyntaxError(
            f"process {name_tok.text!r} has no init location", name_tok.line, name_tok.column)
    return ProcessDecl(name_tok.text, tuple(locations), tuple(init_locations), tuple(edges))


def _parse_assign(ts: _TokenStream, var_names: set[str]) -> tuple[str, tuple]:
    var_tok = ts.expect_ident("a variable name")
    if var_tok.text not in var_names:
        raise ModelSyntaxError(f"unknown variable {var_tok.text!r}", var_tok.line, var_tok.column)
    ts.expect(":=")
    rhs_tok = ts.peek()
    rhs = _parse_operand(ts, allow_loc=False)
    if rhs[0] == "name" and rhs[1] not in var_names:
        raise ModelSyntaxError(f"unknown variable {rhs[1]!r}", rhs_tok.line, rhs_tok.column)
    return var_tok.text, rhs


# ---------------------------------------------------------------------------
# Typing and evaluation

_INT_ONLY_OPS = ("<", "<=", ">", ">=")


def _check_expr(model: Model, node: tuple, allow_loc: bool) -> None:
    kind = node[0]
    if kind in ("or", "and"):
        _check_expr(model, node[1], allow_loc)
        _check_expr(model, node[2], allow_loc)
    elif kind == "not":
        _check_expr(model, node[1], allow_loc)
    elif kind == "atom":
        operand = node[1]
        if operand[0] == "bool":
            return
        if operand[0] == "name":
            if not model.var(operand[1]).is_bool:
                raise ModelError(f"variable {operand[1]!r} is not boolean")
            return
        raise ModelError(f"{operand[0]} is not a boolean atom")
    elif kind == "cmp":
        _, op, lhs, rhs = node
        if lhs[0] == "loc" or rhs[0] == "loc":
            if lhs[0] != "loc":
                lhs, rhs = rhs, lhs
            if not allow_loc:
                raise ModelError("loc() atoms are not allowed here")
            proc = model.process(lhs[1])
            if op not in ("=", "!="):
                raise ModelError(f"locations support only = and !=, not {op}")
            if rhs[0] != "name" or rhs[1] not in proc.locations:
                raise ModelError(f"{_render_operand(rhs)} is not a location of {proc.name}")
            return
        lt = _operand_type(model, lhs)
        rt = _operand_type(model, rhs)
        if lt != rt:
            raise ModelError(f"type mismatch: {_render_operand(lhs)} {op} {_render_operand(rhs)}")
        if lt == "bool" and op in _INT_ONLY_OPS:
            raise ModelError(f"operator {op} needs integer operands")
        for side in (lhs, rhs):
            if side[0] == "int":
                other = rhs if side is lhs else lhs
                if other[0] == "name" and not model.var(other[1]).admits(side[1]):
                    decl = model.var(other[1])
                    raise ModelError(
                        f"literal {side[1]} outside {decl.name}:int[{decl.lo}..{decl.hi}]")
    else:
        raise ModelError(f"unknown expression node {kind!r}")


def _operand_type(model: Model, operand: tuple) -> str:
    if operand[0] == "int":
        return "int"
    if operand[0] == "bool":
        return "bool"
    if operand[0] == "name":
        return "bool" if model.var(operand[1]).is_bool else "int"
    raise ModelError(f"unexpected operand {operand[0]!r}")


def _render_operand(operand: tuple) -> str:
    if operand[0] == "loc":
        return f"loc({operand[1]})"
    return str(operand[1]).lower() if operand[0] == "bool" else str(operand[1])


def _eval_expr(node: tuple, locs: dict[str, str], env: dict[str, Value]) -> bool:
    kind = node[0]
    if kind == "or":
        return _eval_expr(node[1], locs, env) or _eval_expr(node[2], locs, env)
    if kind == "and":
        return _eval_expr(node[1], locs, env) and _eval_expr(node[2], locs, env)
    if kind == "not":
        return not _eval_expr(node[1], locs, env)
    if kind == "atom":
        return bool(_eval_operand(node[1], locs, env))
    if kind == "cmp":
        _, op, lhs, rhs = node
        if lhs[0] == "loc" or rhs[0] == "loc":
            if lhs[0] != "loc":
                lhs, rhs = rhs, lhs
            a, b = locs[lhs[1]], rhs[1]
        else:
            a, b = _eval_operand(lhs, locs, env), _eval_operand(rhs, locs, env)
        if op == "=":
            return a == b
        if op == "!=":
            return a != b
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        return a >= b
    raise ModelError(f"unknown expression node {kind!r}")


def _eval_operand(operand: tuple, locs: dict[str, str], env: dict[str, Value]):
    if operand[0] in ("int", "bool"):
        return operand[1]
    if operand[0] == "name":
        return env[operand[1]]
    raise ModelError(f"cannot evaluate {operand[0]}")


# ---------------------------------------------------------------------------
# Expansion

@dataclass(frozen=True)
class ModelState:
    """One expanded state: a location per process, a value per variable."""

    locs: tuple[str, ...]
    values: tuple[Value, ...]


def render_state(state: ModelState) -> str:
    parts = list(state.locs) + [str(v).lower() if isinstance(v, bool) else str(v)
                                for v in state.values]
    return "<" + ",".join(parts) + ">"


@dataclass
class Expansion:
    """Expanded model: the system, the state table aligned with its ids,
    and the canonical initial state set."""

    model: Model
    ars: Ars
    states: tuple[ModelState, ...]
    initial: StateSet

    def state_id(self, state: ModelState) -> int:
        return self.ars.id_of(render_state(state))


DEFAULT_STATE_CAP = 1_000_000


def expand(model: Model, max_states: int = DEFAULT_STATE_CAP) -> Expansion:
    """Eagerly expand the full Cartesian state space with interleaving.

    Object order is lexicographic on the rendered state label, so identical
    model text always yields a bit-identical system.
    """
    for proc in model.processes:
        for edge in proc.edges:
            if edge.guard is not None:
                _check_expr(model, edge.guard, allow_loc=False)
            for var_name, rhs in edge.assigns:
                decl = model.var(var_name)
                if rhs[0] == "name":
                    rdecl = model.var(rhs[1])
                    if rdecl.is_bool != decl.is_bool:
                        raise ModelError(
                            f"assignment {var_name} := {rhs[1]} mixes bool and int")
                elif rhs[0] == "bool":
                    if not decl.is_bool:
                        raise ModelError(f"assignment {var_name} := {rhs[1]} needs an integer")
                elif not decl.is_bool:
                    if not decl.admits(rhs[1]):
                        raise DomainError(
                            f"assignment {var_name} := {rhs[1]} leaves int[{decl.lo}..{decl.hi}]")
                else:
                    raise ModelError(f"assignment {var_name} := {rhs[1]} needs true/false")

    size = prod(len(p.locations) for p in model.processes) * prod(
        len(v.domain()) for v in model.variables)
    if size > max_states:
        raise StateLimitError(f"state space of {size} states exceeds cap {max_states}")

    loc_axes = [p.locations for p in model.processes]
    val_axes = [v.domain() for v in model.variables]
    all_states = [ModelState(locs, vals)
                  for locs in itertools.product(*loc_axes)
                  for vals in itertools.product(*val_axes)]
    all_states.sort(key=render_state)
    labels = [render_state(s) for s in all_states]
    index = {lab: i for i, lab in enumerate(labels)}

    var_names = [v.name for v in model.variables]
    var_pos = {name: i for i, name in enumerate(var_names)}
    edges: list[tuple[int, int]] = []
    for sid, state in enumerate(all_states):
        locs = dict(zip((p.name for p in model.processes), state.locs))
        env = dict(zip(var_names, state.values))
        for pi, proc in enumerate(model.processes):
            here = state.locs[pi]
            for edge in proc.edges:
                if edge.src != here:
                    continue
                if edge.guard is not None and not _eval_expr(edge.guard, locs, env):
                    continue
                new_vals = list(state.values)
                for var_name, rhs in edge.assigns:
                    value = _eval_operand(rhs, locs, env)
                    decl = model.var(var_name)
                    if not decl.admits(value):
                        raise DomainError(
                            f"assignment {var_name} := {value} leaves its domain "
                            f"(edge {edge.src} -> {edge.dst} of {proc.name})")
                    new_vals[var_pos[var_name]] = value
                new_locs = state.locs[:pi] + (edge.dst,) + state.locs[pi + 1:]
                dst = ModelState(new_locs, tuple(new_vals))
                edges.append((sid, index[render_state(dst)]))
    ars = Ars(labels, edges)

    init_loc_axes = [p.init_locations for p in model.processes]
    init_val_axes = [v.init_values for v in model.variables]
    initial = canon(
        index[render_state(ModelState(locs, vals))]
        for locs in itertools.product(*init_loc_axes)
        for vals in itertools.product(*init_val_axes))
    return Expansion(model, ars, tuple(all_states), initial)


def eval_state_predicate(expansion: Expansion, expr: str | tuple) -> StateSet:
    """States of the expansion satisfying a state-predicate expression."""
    node = parse_state_expr(expr) if isinstance(expr, str) else expr
    model = expansion.model
    _check_expr(model, node, allow_loc=True)
    proc_names = [p.name for p in model.processes]
    var_names = [v.name for v in model.variables]
    hits = []
    for sid, state in enumerate(expansion.states):
        locs = dict(zip(proc_names, state.locs))
        env = dict(zip(var_names, state.values))
        if _eval_expr(node, locs, env):
            hits.append(sid)
    return canon(hits)


# ---------------------------------------------------------------------------
# Built-in model

PETERSON_SOURCE = """\
# Two-process mutual exclusion over shared intent flags and a turn variable.
var b0: bool = false
var b1: bool = false
var x: int[0..1] = 0 | 1

process P0 {
  loc noncrit0 init
  loc wait0
  loc crit0
  edge noncrit0 -> wait0 do b0 := true; x := 1
  edge wait0 -> crit0 when x = 0 || !b1
  edge crit0 -> noncrit0 do b0 := false
}

process P1 {
  loc noncrit1 init
  loc wait1
  loc crit1
  edge noncrit1 -> wait1 do b1 := true; x := 0
  edge wait1 -> crit1 when x = 1 || !b0
  edge crit1 -> noncrit1 do b1 := false
}
"""


def builtin_peterson() -> Model:
    """The two-process mutual exclusion model shipped with the tool."""
    return parse_model(PETERSON_SOURCE)
