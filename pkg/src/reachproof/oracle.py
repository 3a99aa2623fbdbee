"""Brute-force ground truth for partial and total validity.

Both decisions reduce to graph analysis of the target-avoiding region R
(states reachable from the source without touching the target):

* partial validity fails exactly when R contains a normal form, because a
  shortest target-free run into that normal form is a finite maximal
  counterexample;
* total validity additionally fails when the subgraph induced on R has a
  directed cycle, because on a finite system an infinite target-free run
  exists exactly when such a cycle is reachable.

This module is deliberately simple and slow; it is the reference the proof
engine is differentially tested against, never the default engine.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .ars import Ars, ExecutionPath, avoiding_region
from .proofs import AprPredicate
from .prover import FinitePath, Witness, extract_lasso


@dataclass(frozen=True)
class OracleAnswer:
    valid: bool
    witness: Witness | None = None

    def __post_init__(self) -> None:
        if self.valid and self.witness is not None:
            raise ValueError("valid answers carry no witness")
        if not self.valid and self.witness is None:
            raise ValueError("invalid answers need a witness")


def _shortest_stuck_path(ars: Ars, pred: AprPredicate) -> ExecutionPath:
    """Shortest target-free run from the source into a normal form (BFS)."""
    q = set(pred.target)
    region = set(avoiding_region(ars, pred.source, pred.target))
    seeds = [s for s in pred.source if s not in q]
    parent: dict[int, int | None] = {s: None for s in seeds}
    queue = deque(seeds)
    nf = set(ars.normal_forms)
    goal = None
    for s in seeds:
        if s in nf:
            goal = s
            break
    while queue and goal is None:
        v = queue.popleft()
        for w in ars.succs[v]:
            if w in region and w not in parent:
                parent[w] = v
                if w in nf:
                    goal = w
                    queue.clear()
                    break
                queue.append(w)
    assert goal is not None, "no stuck state in the avoiding region"
    steps = [goal]
    while parent[steps[-1]] is not None:
        steps.append(parent[steps[-1]])  # type: ignore[arg-type]
    steps.reverse()
    return ExecutionPath(tuple(steps), is_maximal=True)


def _region_has_cycle(ars: Ars, region: tuple[int, ...]) -> bool:
    rset = set(region)
    succs = {v: [w for w in ars.succs[v] if w in rset] for v in region}
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {v: WHITE for v in region}
    for start in region:
        if color[start] != WHITE:
            continue
        stack = [(start, 0)]
        color[start] = GRAY
        while stack:
            v, i = stack[-1]
            if i < len(succs[v]):
                stack[-1] = (v, i + 1)
                w = succs[v][i]
                if color[w] == GRAY:
                    return True
                if color[w] == WHITE:
                    color[w] = GRAY
                    stack.append((w, 0))
            else:
                color[v] = BLACK
                stack.pop()
    return False


def oracle_partial(ars: Ars, pred: AprPredicate) -> OracleAnswer:
    """Exact decision of partial validity by region analysis."""
    region = avoiding_region(ars, pred.source, pred.target)
    nf = set(ars.normal_forms)
    if not any(v in nf for v in region):
        return OracleAnswer(True)
    return OracleAnswer(False, FinitePath(_shortest_stuck_path(ars, pred)))


def oracle_total(ars: Ars, pred: AprPredicate) -> OracleAnswer:
    """Exact decision of total validity by region analysis."""
    region = avoiding_region(ars, pred.source, pred.target)
    nf = set(ars.normal_forms)
    if any(v in nf for v in region):
        return OracleAnswer(False, FinitePath(_shortest_stuck_path(ars, pred)))
    if _region_has_cycle(ars, region):
        return OracleAnswer(False, extract_lasso(ars, pred))
    return OracleAnswer(True)
