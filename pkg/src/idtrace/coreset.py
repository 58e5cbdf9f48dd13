"""Identifying attribute sets: verification, greedy construction, enumeration.

An attribute set identifies a target when filtering the search space by
the target's values on those attributes leaves exactly the target. A core
set additionally has no identifying proper subset. The greedy builder
picks the attribute of highest average conditional discriminability each
round, then prunes in reverse addition order so the result is always core
and not merely identifying.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .entropy import ObservationSet, avg_conditional_discriminability
from .errors import (
    InvalidSetError,
    NotDistinguishableError,
    ResourceLimitError,
    UndefinedAttributeError,
    ValidationError,
)
from .universe import (
    MISSING,
    CandidateSet,
    Observation,
    Universe,
    filter_candidates,
)

#: ceiling on the number of subsets enumerate_core_sets may examine
ENUMERATION_GUARD = 10**7


@dataclass(frozen=True)
class CoreSetReport:
    """Verdict on one attribute set for one target object.

    ``entropy_trace`` holds the remaining identity entropy after each
    attribute of the set is applied, in addition order.
    """

    target: int
    attribute_ids: tuple[int, ...]
    is_identifying: bool
    is_minimal: bool
    entropy_trace: tuple[float, ...]

    @property
    def is_core(self) -> bool:
        return self.is_identifying and self.is_minimal


def _target_observations(
    universe: Universe, target: int, attribute_ids
) -> list[Observation]:
    obs = []
    for a in attribute_ids:
        code = universe.value_of(target, a)
        if code == MISSING:
            raise InvalidSetError(
                f"target has no value for attribute {a}; it cannot belong "
                "to an identification set"
            )
        obs.append(Observation(a, code))
    return obs


def _survivors(
    universe: Universe, cand0: CandidateSet, target: int, attribute_ids
) -> CandidateSet:
    cand = cand0
    for obs in _target_observations(universe, target, attribute_ids):
        cand = filter_candidates(universe, cand, obs)
    return cand


def is_identification_set(
    universe: Universe, cand0: CandidateSet, target: int, attribute_ids
) -> bool:
    """True iff the target's values on these attributes single it out of
    ``cand0``."""
    if target not in cand0:
        raise ValidationError("target is not a member of the candidate set")
    return _survivors(universe, cand0, target, attribute_ids).size == 1


def is_core_identification_set(
    universe: Universe,
    cand0: CandidateSet,
    target: int,
    attribute_ids,
    strict: bool = False,
) -> CoreSetReport:
    """Check both the identification and the minimality condition.

    Minimality only needs the drop-one subsets: filtering is monotone, so
    any identifying proper subset is contained in one of them. With
    ``strict`` the drop-one subsets must not single out *any* object of
    ``cand0``, not just the target.
    """
    attrs = tuple(sorted(set(attribute_ids)))
    identifying = is_identification_set(universe, cand0, target, attrs)

    minimal = True
    for dropped in attrs:
        remaining = tuple(a for a in attrs if a != dropped)
        if strict:
            if _identifies_anyone(universe, cand0, remaining):
                minimal = False
                break
        elif is_identification_set(universe, cand0, target, remaining):
            minimal = False
            break

    trace = []
    cand = cand0
    for obs in _target_observations(universe, target, attrs):
        cand = filter_candidates(universe, cand, obs)
        trace.append(math.log2(cand.size) if cand.size else float("-inf"))
    return CoreSetReport(
        target=target,
        attribute_ids=attrs,
        is_identifying=identifying,
        is_minimal=minimal,
        entropy_trace=tuple(trace),
    )


def _identifies_anyone(universe: Universe, cand0: CandidateSet, attribute_ids) -> bool:
    """True if some member of cand0 is singled out by its own values on
    the given attributes (members missing a value never qualify)."""
    for obj in cand0.indices():
        obj = int(obj)
        try:
            if is_identification_set(universe, cand0, obj, attribute_ids):
                return True
        except InvalidSetError:
            continue
    return False


def greedy_core_set(
    universe: Universe,
    cand0: CandidateSet,
    target: int,
    seed_obs: ObservationSet = ObservationSet(),
) -> CoreSetReport:
    """Build a core identification set by greedy entropy descent.

    Each round scores every unused attribute by its average conditional
    discriminability over the current candidate set, adds the argmax
    (ties to the lowest attribute id), and filters by the target's value.
    A reverse-order drop-one prune afterwards removes attributes whose
    early pick was subsumed by later ones, so the returned set is core,
    not merely identifying. With a nonempty ``seed_obs`` the search space
    is ``cand0`` filtered by the seed, and the report's flags are judged
    within that space.
    """
    space = cand0
    for obs in seed_obs:
        space = filter_candidates(universe, space, obs)
    if target not in space:
        raise ValidationError("target does not survive the seed observations")

    chosen: list[int] = []
    cand = space
    while cand.size > 1:
        best_id, best_bits = None, -1.0
        for a in range(universe.n_attributes):
            if a in seed_obs or a in chosen:
                continue
            if universe.value_of(target, a) == MISSING:
                continue
            try:
                bits = avg_conditional_discriminability(
                    universe, cand, ObservationSet(), a
                )
            except UndefinedAttributeError:
                continue
            if bits > best_bits:
                best_id, best_bits = a, bits
        if best_id is None:
            raise NotDistinguishableError(
                "attributes exhausted with more than one candidate left",
                survivors=cand,
            )
        chosen.append(best_id)
        cand = filter_candidates(
            universe, cand, Observation(best_id, universe.value_of(target, best_id))
        )

    # reverse-order prune: drop anything the later picks made redundant
    kept = list(chosen)
    for a in reversed(chosen):
        trial = [x for x in kept if x != a]
        if _survivors(universe, space, target, trial).size == 1:
            kept = trial

    report = is_core_identification_set(universe, space, target, tuple(kept))
    # keep addition order in the report rather than the sorted order
    order = tuple(a for a in chosen if a in set(kept))
    trace = []
    c = space
    for obs in _target_observations(universe, target, order):
        c = filter_candidates(universe, c, obs)
        trace.append(math.log2(c.size) if c.size else float("-inf"))
    return CoreSetReport(
        target=target,
        attribute_ids=order,
        is_identifying=report.is_identifying,
        is_minimal=report.is_minimal,
        entropy_trace=tuple(trace),
    )


def enumerate_core_sets(
    universe: Universe,
    cand0: CandidateSet,
    target: int,
    max_set_size: int,
) -> list[tuple[int, ...]]:
    """All core identification sets for the target up to the size bound,
    sorted by size then lexicographically.

    Iterates subsets in ascending size and skips supersets of already
    found core sets, which is exact: every identifying set contains a
    smaller core set, so a subset none of whose proper subsets are core
    is core as soon as it identifies.
    """
    if target not in cand0:
        raise ValidationError("target is not a member of the candidate set")
    usable = [
        a
        for a in range(universe.n_attributes)
        if universe.value_of(target, a) != MISSING
    ]
    budget = sum(
        math.comb(len(usable), s) for s in range(0, min(max_set_size, len(usable)) + 1)
    )
    if budget > ENUMERATION_GUARD:
        raise ResourceLimitError(
            f"enumeration would examine {budget} subsets "
            f"(guard {ENUMERATION_GUARD})"
        )

    found: list[tuple[int, ...]] = []
    found_sets: list[frozenset[int]] = []
    if cand0.size == 1:
        # the empty set already identifies; nothing larger can be core
        return [()]

    # one bool vector per usable attribute over the candidate rows:
    # True where the row matches the target's value
    rows = cand0.indices()
    matches = {
        a: universe.cells[rows, a] == universe.value_of(target, a) for a in usable
    }
    for size in range(1, min(max_set_size, len(usable)) + 1):
        for combo in combinations(usable, size):
            cs = frozenset(combo)
            if any(f <= cs for f in found_sets):
                continue
            joint = matches[combo[0]]
            for a in combo[1:]:
                joint = joint & matches[a]
            if np.count_nonzero(joint) == 1:
                found.append(combo)
                found_sets.append(cs)
    return sorted(found, key=lambda s: (len(s), s))
