"""Finite abstract reduction systems and canonical state-set primitives.

An `Ars` is a finite object table plus a transition relation, stored as a
sorted adjacency list with precomputed normal forms.  State sets are
canonical tuples of object ids (strictly increasing), so two sets are
extensionally equal exactly when their representations are equal.  That
representation equality is what the proof machinery relies on when it
matches recurring goals.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

# Canonical state set: strictly increasing tuple of object ids.
StateSet = tuple[int, ...]

EMPTY: StateSet = ()

LABEL_RE = re.compile(r"[A-Za-z0-9_.<>,-]+\Z")


class ArsError(ValueError):
    """Malformed system description or ill-formed query input."""


class UnknownObjectError(ArsError):
    """An object id or label that is not part of the system."""


def canon(members: Iterable[int]) -> StateSet:
    """Canonicalize a collection of object ids (sorted, duplicate-free)."""
    return tuple(sorted(set(members)))


class Ars:
    """Immutable finite reduction system over an interned object table.

    Objects are dense integer ids 0..n-1; each id carries a unique label.
    Successor lists are sorted and duplicate-free (relation semantics, not
    multigraph: parallel edges collapse).  `normal_forms` is the canonical
    set of objects with no outgoing edge.
    """

    __slots__ = ("labels", "index", "succs", "normal_forms", "_nf")

    def __init__(self, labels: Sequence[str], edges: Iterable[tuple[int, int]]):
        labels = tuple(labels)
        index: dict[str, int] = {}
        for i, lab in enumerate(labels):
            if not lab:
                raise ArsError("empty object label")
            if lab in index:
                raise ArsError(f"duplicate object label {lab!r}")
            index[lab] = i
        n = len(labels)
        succ_sets: list[set[int]] = [set() for _ in range(n)]
        for src, dst in edges:
            if not (0 <= src < n and 0 <= dst < n):
                raise UnknownObjectError(f"edge ({src}, {dst}) outside object table of size {n}")
            succ_sets[src].add(dst)
        self.labels = labels
        self.index = index
        self.succs: tuple[StateSet, ...] = tuple(tuple(sorted(s)) for s in succ_sets)
        self.normal_forms: StateSet = tuple(i for i in range(n) if not self.succs[i])
        self._nf = frozenset(self.normal_forms)

    @classmethod
    def from_labeled_edges(cls, labels: Sequence[str], edges: Iterable[tuple[str, str]]) -> "Ars":
        index = {lab: i for i, lab in enumerate(labels)}
        id_edges = []
        for src, dst in edges:
            for lab in (src, dst):
                if lab not in index:
                    raise UnknownObjectError(f"unknown object label {lab!r}")
            id_edges.append((index[src], index[dst]))
        return cls(labels, id_edges)

    @property
    def n(self) -> int:
        return len(self.labels)

    def succ(self, i: int) -> StateSet:
        return self.succs[i]

    def is_normal_form(self, i: int) -> bool:
        return i in self._nf

    def id_of(self, label: str) -> int:
        try:
            return self.index[label]
        except KeyError:
            raise UnknownObjectError(f"unknown object label {label!r}") from None

    def ids_of(self, labels: Iterable[str]) -> StateSet:
        return canon(self.id_of(lab) for lab in labels)

    def labels_of(self, ids: Iterable[int]) -> list[str]:
        return [self.labels[i] for i in self.check_members(ids)]

    def check_members(self, p: Iterable[int]) -> StateSet:
        """Canonicalize `p` and reject ids outside the object table."""
        p = canon(p)
        if p and (p[0] < 0 or p[-1] >= self.n):
            bad = [i for i in p if not 0 <= i < self.n]
            raise UnknownObjectError(f"object ids {bad} outside object table of size {self.n}")
        return p

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Ars):
            return NotImplemented
        return self.labels == other.labels and self.succs == other.succs

    def __hash__(self) -> int:
        return hash((self.labels, self.succs))

    def __repr__(self) -> str:
        return f"Ars({self.n} objects, {sum(len(s) for s in self.succs)} edges)"


def derivative(ars: Ars, p: Iterable[int]) -> StateSet:
    """One-step successor set of `p`."""
    p = ars.check_members(p)
    out: set[int] = set()
    for s in p:
        out.update(ars.succs[s])
    return canon(out)


def is_runnable(ars: Ars, p: Iterable[int]) -> bool:
    """True iff `p` is nonempty and contains no normal form."""
    p = ars.check_members(p)
    return bool(p) and not any(s in ars._nf for s in p)


def reachable(ars: Ars, p: Iterable[int]) -> StateSet:
    """Reflexive-transitive closure of `p` under the transition relation."""
    p = ars.check_members(p)
    seen = set(p)
    frontier = list(p)
    while frontier:
        nxt = []
        for s in frontier:
            for t in ars.succs[s]:
                if t not in seen:
                    seen.add(t)
                    nxt.append(t)
        frontier = nxt
    return canon(seen)


def avoiding_region(ars: Ars, p: Iterable[int], q: Iterable[int]) -> StateSet:
    """States reachable from p \\ q along edges that never touch q.

    This is reachability inside the subgraph induced on the complement of
    `q`, starting from the q-free part of `p`.  It underlies both the
    brute-force validity decisions and witness extraction.
    """
    p = ars.check_members(p)
    qs = set(ars.check_members(q))
    seen = {s for s in p if s not in qs}
    frontier = sorted(seen)
    while frontier:
        nxt = []
        for s in frontier:
            for t in ars.succs[s]:
                if t not in seen and t not in qs:
                    seen.add(t)
                    nxt.append(t)
        frontier = nxt
    return canon(seen)


@dataclass(frozen=True)
class ExecutionPath:
    """A finite run of the system; `is_maximal` means it ends stuck.

    Only finite paths are materialized.  Infinite runs are reported as
    lassos (see the prover's witness types).
    """

    steps: tuple[int, ...]
    is_maximal: bool = True

    def __post_init__(self) -> None:
        if not self.steps:
            raise ValueError("execution path must be nonempty")


def execution_path_violations(ars: Ars, path: ExecutionPath) -> list[str]:
    """Structural problems of `path` against `ars` (empty list = well-formed)."""
    problems = []
    for a, b in zip(path.steps, path.steps[1:]):
        if b not in ars.succs[a]:
            problems.append(f"no edge {ars.labels[a]} -> {ars.labels[b]}")
    if path.is_maximal and not ars.is_normal_form(path.steps[-1]):
        problems.append(f"maximal path ends at reducible {ars.labels[path.steps[-1]]}")
    return problems


def parse_ars(text: str) -> Ars:
    """Parse the line-based system format.

    `#` starts a comment; one `states <label>...` line declares all objects;
    each `trans <src> <dst>` line adds one transition.  Labels must match
    ``[A-Za-z0-9_.<>,-]+`` and `trans` may only use declared labels.
    """
    labels: tuple[str, ...] | None = None
    index: dict[str, int] = {}
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "states":
            if labels is not None:
                raise ArsError(f"line {lineno}: duplicate states line")
            for lab in parts[1:]:
                if not LABEL_RE.match(lab):
                    raise ArsError(f"line {lineno}: bad label {lab!r}")
            labels = tuple(parts[1:])
            index = {lab: i for i, lab in enumerate(labels)}
            if len(index) != len(labels):
                raise ArsError(f"line {lineno}: duplicate label in states line")
        elif parts[0] == "trans":
            if labels is None:
                raise ArsError(f"line {lineno}: trans before states line")
            if len(parts) != 3:
                raise ArsError(f"line {lineno}: trans needs exactly two labels")
            for lab in parts[1:]:
                if lab not in index:
                    raise ArsError(f"line {lineno}: unknown label {lab!r} in trans")
            edges.append((index[parts[1]], index[parts[2]]))
        else:
            raise ArsError(f"line {lineno}: unknown directive {parts[0]!r}")
    if labels is None:
        raise ArsError("missing states line")
    return Ars(labels, edges)


def render_ars(ars: Ars) -> str:
    """Serialize `ars` in the line-based format (inverse of parse_ars)."""
    lines = ["states " + " ".join(ars.labels)]
    for src in range(ars.n):
        for dst in ars.succs[src]:
            lines.append(f"trans {ars.labels[src]} {ars.labels[dst]}")
    return "\n".join(lines) + "\n"
