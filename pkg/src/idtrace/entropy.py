"""Information measures over candidate sets.

All quantities are in bits (log base 2). Probabilities are exact integer
count ratios; floating point enters only at the final logarithm, which
keeps the additive chain identities tight enough for 1e-9 comparisons.

Zero-probability events raise :class:`ProbabilityZeroError` instead of
returning infinity: the quantities are undefined there and the tracing
loop needs to branch, not propagate inf through arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import (
    EmptySearchSpaceError,
    InconsistentObservationsError,
    ProbabilityZeroError,
    UndefinedAttributeError,
    ValidationError,
)
from .universe import (
    MISSING,
    CandidateSet,
    Observation,
    Universe,
    filter_candidates,
    value_counts,
)


@dataclass(frozen=True)
class ObservationSet:
    """A set of observations, at most one per attribute category."""

    observations: tuple[Observation, ...] = ()

    def __post_init__(self):
        ids = [o.attribute_id for o in self.observations]
        if len(set(ids)) != len(ids):
            raise ValidationError("two observations share an attribute")
        # canonical order makes equality and hashing order-free
        object.__setattr__(
            self,
            "observations",
            tuple(sorted(self.observations, key=lambda o: o.attribute_id)),
        )

    @classmethod
    def of(cls, *observations: Observation) -> "ObservationSet":
        return cls(tuple(observations))

    def __iter__(self) -> Iterator[Observation]:
        return iter(self.observations)

    def __len__(self) -> int:
        return len(self.observations)

    def __contains__(self, attribute_id: int) -> bool:
        return any(o.attribute_id == attribute_id for o in self.observations)

    @property
    def attribute_ids(self) -> frozenset[int]:
        return frozenset(o.attribute_id for o in self.observations)

    def get(self, attribute_id: int) -> int | None:
        for o in self.observations:
            if o.attribute_id == attribute_id:
                return o.value
        return None

    def add(self, obs: Observation) -> "ObservationSet":
        return ObservationSet(self.observations + (obs,))


def apply_observations(
    universe: Universe, base: CandidateSet, observations: Iterable[Observation]
) -> CandidateSet:
    """Filter ``base`` by every observation in turn."""
    cand = base
    for obs in observations:
        cand = filter_candidates(universe, cand, obs)
    return cand


# --------------------------------------------------------------------------


def identity_entropy(n: int) -> float:
    """Uncertainty, in bits, of picking one object out of ``n`` candidates."""
    if n < 1:
        raise EmptySearchSpaceError("an empty search space has no identity entropy")
    return math.log2(n)


def conditional_identity_entropy(
    universe: Universe, cand0: CandidateSet, obs: ObservationSet
) -> float:
    """Identity entropy remaining after filtering ``cand0`` by ``obs``."""
    if cand0.size == 0:
        raise EmptySearchSpaceError("initial candidate set is empty")
    survivors = apply_observations(universe, cand0, obs)
    if survivors.size == 0:
        raise InconsistentObservationsError(
            "observations are jointly inconsistent with the candidate set"
        )
    return identity_entropy(survivors.size)


def attribute_discriminability(
    universe: Universe, cand: CandidateSet, obs: Observation
) -> float:
    """-log2 of the observed value's frequency within ``cand``."""
    if cand.size == 0:
        raise EmptySearchSpaceError("candidate set is empty")
    universe.validate_observation(obs)
    counts = value_counts(universe, cand, obs.attribute_id)
    count = counts.get(obs.value, 0)
    if count == 0:
        raise ProbabilityZeroError(obs.attribute_id, obs.value)
    # log2(size) - log2(count) == -log2(count/size), on integer arguments
    return math.log2(cand.size) - math.log2(count)


def conditional_discriminability(
    universe: Universe,
    cand: CandidateSet,
    given: ObservationSet,
    obs: Observation,
) -> float:
    """Discriminability of ``obs`` inside the ``given``-conditioned set."""
    if cand.size == 0:
        raise EmptySearchSpaceError("candidate set is empty")
    conditioned = apply_observations(universe, cand, given)
    if conditioned.size == 0:
        raise EmptySearchSpaceError("conditioning observations have no support")
    return attribute_discriminability(universe, conditioned, obs)


def avg_conditional_discriminability(
    universe: Universe,
    cand: CandidateSet,
    given: ObservationSet,
    attribute_id: int,
) -> float:
    """Shannon entropy of the attribute's value distribution within the
    conditioned candidate set.

    Missing cells are excluded from both the distribution and the
    denominator; a value with zero frequency contributes zero.
    """
    if cand.size == 0:
        raise EmptySearchSpaceError("candidate set is empty")
    conditioned = apply_observations(universe, cand, given)
    if conditioned.size == 0:
        raise EmptySearchSpaceError("conditioning observations have no support")
    counts = value_counts(universe, conditioned, attribute_id)
    counts.pop(MISSING, None)
    total = sum(counts.values())
    if total == 0:
        raise UndefinedAttributeError(
            f"attribute {attribute_id} is missing for every surviving candidate"
        )
    acc = 0.0
    for count in counts.values():
        p = count / total
        acc -= p * math.log2(p)
    return acc


def set_discriminability(
    universe: Universe, cand: CandidateSet, obs_ordered: Sequence[Observation]
) -> float:
    """Joint discriminability of an ordered observation list.

    Evaluated left to right as a sum of single-step conditional terms;
    the result equals -log2(joint frequency) and does not depend on the
    order, because the per-step count ratios telescope.
    """
    if cand.size == 0:
        raise EmptySearchSpaceError("candidate set is empty")
    ids = [o.attribute_id for o in obs_ordered]
    if len(set(ids)) != len(ids):
        raise ValidationError("observations must be on distinct attributes")
    total = 0.0
    current = cand
    for obs in obs_ordered:
        step = attribute_discriminability(universe, current, obs)
        total += step
        current = filter_candidates(universe, current, obs)
    return total
