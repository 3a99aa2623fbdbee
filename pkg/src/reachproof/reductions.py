"""Safety queries: error-state augmentation and well-formedness checks.

Error non-reachability is decided through partial validity of a reachability
goal whose target is a set of "good" stuck states.  A well-formed safety
goal for error states E needs a target that is disjoint from E, irreducible,
and covers every reachable non-error normal form.  Computing such a target
is exactly what the `any`-sink construction avoids: adding a fresh
irreducible state reachable from every non-error state turns `<P> => <{any}>`
into an exact (not approximate) encoding of error non-reachability.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ars import Ars, ArsError, StateSet, canon, reachable
from .proofs import AprPredicate


@dataclass(frozen=True)
class SafetyCheckReport:
    """Outcome of the three well-formedness conditions, with offenders."""

    disjoint_ok: bool
    covers_nf_ok: bool
    q_irreducible_ok: bool
    disjoint_offenders: StateSet
    covers_nf_offenders: StateSet
    q_irreducible_offenders: StateSet

    @property
    def is_safety_predicate(self) -> bool:
        return self.disjoint_ok and self.covers_nf_ok and self.q_irreducible_ok


def validate_safety_predicate(ars: Ars, p, q, e) -> SafetyCheckReport:
    """Evaluate the safety-goal conditions for target `q` and errors `e`.

    Requires `e` to be irreducible; reducible error states must be routed
    through `augment_error` first.
    """
    p = ars.check_members(p)
    q = ars.check_members(q)
    e = ars.check_members(e)
    nf = set(ars.normal_forms)
    bad_e = [s for s in e if s not in nf]
    if bad_e:
        labels = ", ".join(ars.labels[s] for s in bad_e)
        raise ArsError(
            f"error states must be irreducible (got {labels}); apply augment_error first")
    disjoint_offenders = canon(set(q) & set(e))
    reach = set(reachable(ars, p))
    must_cover = [t for t in nf if t in reach and t not in set(e)]
    covers_offenders = canon(t for t in must_cover if t not in set(q))
    irr_offenders = canon(t for t in q if t not in nf)
    return SafetyCheckReport(
        disjoint_ok=not disjoint_offenders,
        covers_nf_ok=not covers_offenders,
        q_irreducible_ok=not irr_offenders,
        disjoint_offenders=disjoint_offenders,
        covers_nf_offenders=covers_offenders,
        q_irreducible_offenders=irr_offenders,
    )


def _fresh_label(ars: Ars, base: str) -> str:
    if base not in ars.index:
        return base
    k = 1
    while f"{base}_{k}" in ars.index:
        k += 1
    return f"{base}_{k}"


def _extended(ars: Ars, label: str, new_edges) -> tuple[Ars, int]:
    labels = ars.labels + (label,)
    edges = [(src, dst) for src in range(ars.n) for dst in ars.succs[src]]
    edges.extend(new_edges)
    return Ars(labels, edges), ars.n


def augment_error(ars: Ars, error_states) -> tuple[Ars, int]:
    """Add a fresh irreducible `error` object fed by every error state.

    Original ids are preserved as a prefix; the fresh object takes the next
    id.  Its label is `error`, numerically suffixed on collision.
    """
    error_states = ars.check_members(error_states)
    if not error_states:
        raise ArsError("augment_error needs at least one error state")
    label = _fresh_label(ars, "error")
    fresh = ars.n
    return _extended(ars, label, [(s, fresh) for s in error_states])


def augment_any(ars: Ars, e) -> tuple[Ars, int]:
    """Add a fresh irreducible `any` sink reachable from every non-error state."""
    e = ars.check_members(e)
    nf = set(ars.normal_forms)
    bad = [s for s in e if s not in nf]
    if bad:
        labels = ", ".join(ars.labels[s] for s in bad)
        raise ArsError(f"augment_any needs irreducible error states (got {labels})")
    label = _fresh_label(ars, "any")
    fresh = ars.n
    eset = set(e)
    return _extended(ars, label, [(s, fresh) for s in range(ars.n) if s not in eset])


def build_safety_query(ars: Ars, p, e_raw) -> tuple[Ars, AprPredicate]:
    """Reduce error non-reachability to one partial-validity goal.

    Reducible error states are first funneled into a fresh `error` state;
    then the `any` sink is added and the goal `<P> => <{any}>` is returned
    over the augmented system.  Its partial validity holds exactly when no
    state of `e_raw` is reachable from `p`.
    """
    p = ars.check_members(p)
    e = ars.check_members(e_raw)
    nf = set(ars.normal_forms)
    if any(s not in nf for s in e):
        ars, err_id = augment_error(ars, e)
        e = (err_id,)
    ars, any_id = augment_any(ars, e)
    return ars, AprPredicate(p, (any_id,))
