"""Interactive and batch identity tracing.

A session starts from the seed observations, repeatedly acquires one
attribute value, and narrows the candidate set until a single object
remains (identified), the set empties (inconsistent), or nothing useful
is left to acquire (ambiguous). ``run_titf`` drives the loop with the
greedy highest-average-discriminability recommendation; the random
baseline draws the next attribute uniformly instead.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

from .entropy import ObservationSet, avg_conditional_discriminability
from .errors import UsageError, ValidationError
from .universe import (
    MISSING,
    CandidateSet,
    Observation,
    Universe,
    filter_candidates,
    value_counts,
)


class SessionStatus(str, Enum):
    ACTIVE = "active"
    IDENTIFIED = "identified"
    AMBIGUOUS = "ambiguous"
    INCONSISTENT = "inconsistent"


def _entropy_or_neg_inf(size: int) -> float:
    # an inconsistent step records -inf (log2 of an empty set's size limit)
    return math.log2(size) if size > 0 else float("-inf")


@dataclass
class SessionState:
    """One live tracing session. Single-owner mutable state."""

    universe: Universe
    known: ObservationSet
    candidates: CandidateSet
    path: list[Observation] = field(default_factory=list)
    entropy_history: list[float] = field(default_factory=list)
    status: SessionStatus = SessionStatus.ACTIVE

    @property
    def acquired_ids(self) -> frozenset[int]:
        return self.known.attribute_ids | {o.attribute_id for o in self.path}

    def unacquired_defined_ids(self) -> list[int]:
        """Attributes still acquirable: not yet observed and carried by at
        least one surviving candidate."""
        acquired = self.acquired_ids
        unacquired = [
            a for a in range(self.universe.n_attributes) if a not in acquired
        ]
        if not self.universe.has_missing_cells:
            return unacquired if self.candidates.size else []
        out = []
        for a in unacquired:
            counts = value_counts(self.universe, self.candidates, a)
            counts.pop(MISSING, None)
            if counts:
                out.append(a)
        return out

    def survivor_ids(self) -> list[str]:
        return [self.universe.object_ids[int(i)] for i in self.candidates.indices()]

    def recompute(self) -> None:
        """Rebuild candidates, entropy history, and status from the
        observation log (known + path). Used by replay checks."""
        cand = self.universe.all_candidates()
        for obs in self.known:
            cand = filter_candidates(self.universe, cand, obs)
        history = [_entropy_or_neg_inf(cand.size)]
        for obs in self.path:
            cand = filter_candidates(self.universe, cand, obs)
            history.append(_entropy_or_neg_inf(cand.size))
        self.candidates = cand
        self.entropy_history = history
        self._refresh_status()

    def _refresh_status(self) -> None:
        if self.candidates.size == 0:
            self.status = SessionStatus.INCONSISTENT
        elif self.candidates.size == 1:
            self.status = SessionStatus.IDENTIFIED
        elif not self.unacquired_defined_ids():
            self.status = SessionStatus.AMBIGUOUS
        else:
            self.status = SessionStatus.ACTIVE


@dataclass(frozen=True)
class Recommendation:
    """Ranking of acquirable attributes by average conditional
    discriminability, best first; ties by ascending attribute id."""

    ranking: tuple[tuple[int, float], ...]

    @property
    def chosen(self) -> int:
        return self.ranking[0][0]


@dataclass(frozen=True)
class TraceResult:
    """Outcome of one completed trace.

    ``elapsed`` is measured wall-clock seconds for the loop itself;
    ``sim_cost`` is the deterministic simulated acquisition cost summed
    over the path (zero unless a cost model was supplied).
    """

    target_found: str | tuple[str, ...]
    acquisitions: int
    path: tuple[Observation, ...]
    elapsed: float
    strategy: str
    status: SessionStatus
    entropy_history: tuple[float, ...]
    sim_cost: float = 0.0

    @property
    def identified(self) -> bool:
        return self.status is SessionStatus.IDENTIFIED


def start_session(universe: Universe, known: ObservationSet) -> SessionState:
    """Open a session seeded with the already-known observations."""
    for obs in known:
        universe.validate_observation(obs)
    session = SessionState(
        universe=universe,
        known=known,
        candidates=universe.all_candidates(),
    )
    session.recompute()
    return session


def recommend_next(session: SessionState) -> Recommendation:
    """Score every acquirable attribute over the current candidates."""
    if session.status is not SessionStatus.ACTIVE:
        raise UsageError(f"session is {session.status.value}, not active")
    scored = []
    for a in session.unacquired_defined_ids():
        bits = avg_conditional_discriminability(
            session.universe, session.candidates, ObservationSet(), a
        )
        scored.append((a, bits))
    if not scored:
        raise UsageError("no acquirable attribute remains")
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return Recommendation(ranking=tuple(scored))


def observe(session: SessionState, obs: Observation) -> SessionState:
    """Record one acquired value and narrow the candidate set."""
    if session.status is not SessionStatus.ACTIVE:
        raise UsageError(f"session is {session.status.value}, not active")
    session.universe.validate_observation(obs)
    if obs.attribute_id in session.acquired_ids:
        raise UsageError(f"attribute {obs.attribute_id} was already observed")
    session.candidates = filter_candidates(session.universe, session.candidates, obs)
    session.path.append(obs)
    session.entropy_history.append(_entropy_or_neg_inf(session.candidates.size))
    session._refresh_status()
    return session


def whatif(session: SessionState, attribute_id: int) -> dict[int, tuple[int, float]]:
    """Counterfactual narrowing per value of an unacquired attribute.

    Maps each value present among the candidates to (post-filter count,
    post-filter entropy). The session itself is untouched.
    """
    if session.status is not SessionStatus.ACTIVE:
        raise UsageError(f"session is {session.status.value}, not active")
    if attribute_id in session.acquired_ids:
        raise UsageError(f"attribute {attribute_id} was already observed")
    counts = value_counts(session.universe, session.candidates, attribute_id)
    counts.pop(MISSING, None)
    return {
        value: (count, math.log2(count)) for value, count in counts.items()
    }


# --------------------------------------------------------------------------
# Batch strategies

#: per-acquisition simulated cost in seconds; a float applies uniformly,
#: a callable is invoked with the attribute id
AcquisitionCost = Callable[[int], float] | float | None


def _cost_of(cost: AcquisitionCost, attribute_id: int) -> float:
    if cost is None:
        return 0.0
    if callable(cost):
        return float(cost(attribute_id))
    return float(cost)


def _finish(
    session: SessionState, started: float, sim_cost: float, strategy: str
) -> TraceResult:
    survivors = session.survivor_ids()
    found = survivors[0] if len(survivors) == 1 else tuple(survivors)
    return TraceResult(
        target_found=found,
        acquisitions=len(session.path),
        path=tuple(session.path),
        elapsed=time.perf_counter() - started,
        strategy=strategy,
        status=session.status,
        entropy_history=tuple(session.entropy_history),
        sim_cost=sim_cost,
    )


def run_titf(
    universe: Universe,
    target: int,
    known: ObservationSet,
    acquire_zero_info: bool = False,
    acquisition_cost: AcquisitionCost = None,
) -> TraceResult:
    """Trace the target by always acquiring the attribute of highest
    average conditional discriminability.

    When every remaining attribute scores zero bits the loop stops as
    ambiguous rather than acquiring useless attributes; pass
    ``acquire_zero_info=True`` for the exhaustive behaviour. Attributes
    the target itself has no value for are skipped (nothing could be
    answered) and never counted as acquisitions.
    """
    started = time.perf_counter()
    session = start_session(universe, known)
    if target not in session.candidates:
        raise ValidationError("target does not survive the known observations")
    sim_cost = 0.0
    while session.status is SessionStatus.ACTIVE:
        answerable = [
            (a, bits)
            for a, bits in recommend_next(session).ranking
            if universe.value_of(target, a) != MISSING
        ]
        if not answerable:
            session.status = SessionStatus.AMBIGUOUS
            break
        chosen, best_bits = answerable[0]
        if not acquire_zero_info and best_bits == 0.0:
            session.status = SessionStatus.AMBIGUOUS
            break
        sim_cost += _cost_of(acquisition_cost, chosen)
        observe(session, Observation(chosen, universe.value_of(target, chosen)))
    return _finish(session, started, sim_cost, "titf")


def run_random_baseline(
    universe: Universe,
    target: int,
    known: ObservationSet,
    rng_seed: int,
    acquisition_cost: AcquisitionCost = None,
) -> TraceResult:
    """Same loop as run_titf but the next attribute is drawn uniformly at
    random from the acquirable ones. Deterministic per seed."""
    started = time.perf_counter()
    session = start_session(universe, known)
    if target not in session.candidates:
        raise ValidationError("target does not survive the known observations")
    rng = random.Random(rng_seed)
    sim_cost = 0.0
    while session.status is SessionStatus.ACTIVE:
        pool = [
            a
            for a in session.unacquired_defined_ids()
            if universe.value_of(target, a) != MISSING
        ]
        if not pool:
            session.status = SessionStatus.AMBIGUOUS
            break
        chosen = rng.choice(pool)
        sim_cost += _cost_of(acquisition_cost, chosen)
        observe(session, Observation(chosen, universe.value_of(target, chosen)))
    return _finish(session, started, sim_cost, "random")


def replay(universe: Universe, known: ObservationSet, path: Sequence[Observation]) -> SessionState:
    """Rebuild the session a (known, path) pair describes."""
    session = start_session(universe, known)
    for obs in path:
        observe(session, obs)
    return session
