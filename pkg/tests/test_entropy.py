"""Entropy and discriminability math against hand and brute-force oracles.

Frozen expected values below were computed with an independent
arbitrary-precision logarithm (mpmath-style long division of ln values),
not with this package: log2(1000) = 9.965784284662087,
log2(100) = 6.643856189774724.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idtrace.entropy import (
    ObservationSet,
    apply_observations,
    attribute_discriminability,
    avg_conditional_discriminability,
    conditional_discriminability,
    conditional_identity_entropy,
    identity_entropy,
    set_discriminability,
)
from idtrace.errors import (
    EmptySearchSpaceError,
    InconsistentObservationsError,
    ProbabilityZeroError,
    UndefinedAttributeError,
    ValidationError,
)
from idtrace.universe import MISSING, Observation, filter_candidates

from conftest import (
    oracle_avg_bits,
    oracle_joint_bits,
    oracle_survivors,
    random_grid,
    universe_from_grid,
)

LOG2_1000 = 9.965784284662087
LOG2_100 = 6.643856189774724


# --------------------------------------------------------------------------
# ObservationSet


def test_observation_set_rejects_duplicate_attribute():
    with pytest.raises(ValidationError):
        ObservationSet((Observation(0, 0), Observation(0, 1)))


def test_observation_set_canonical_order():
    a = ObservationSet((Observation(2, 1), Observation(0, 0)))
    b = ObservationSet((Observation(0, 0), Observation(2, 1)))
    assert a == b
    assert [o.attribute_id for o in a] == [0, 2]


def test_observation_set_add_get():
    s = ObservationSet.of(Observation(1, 0))
    s2 = s.add(Observation(0, 2))
    assert s2.get(0) == 2
    assert s2.get(1) == 0
    assert s2.get(9) is None
    assert len(s) == 1  # add is persistent, not mutating
    assert s2.attribute_ids == frozenset({0, 1})


# --------------------------------------------------------------------------
# identity entropy


def test_identity_entropy_values():
    assert identity_entropy(1) == 0.0
    assert identity_entropy(1024) == 10.0
    assert identity_entropy(1000) == pytest.approx(LOG2_1000, abs=1e-12)


def test_identity_entropy_empty_space():
    with pytest.raises(EmptySearchSpaceError):
        identity_entropy(0)


def test_conditional_identity_entropy_empty_obs(four_objects):
    cand = four_objects.all_candidates()
    assert conditional_identity_entropy(four_objects, cand, ObservationSet()) == 2.0


def test_conditional_identity_entropy_halves(four_objects):
    cand = four_objects.all_candidates()
    obs = ObservationSet.of(Observation(0, 0))
    assert conditional_identity_entropy(four_objects, cand, obs) == 1.0


def test_conditional_identity_entropy_inconsistent(four_objects):
    cand = filter_candidates(
        four_objects, four_objects.all_candidates(), Observation(0, 0)
    )
    with pytest.raises(InconsistentObservationsError):
        conditional_identity_entropy(
            four_objects, cand, ObservationSet.of(Observation(0, 1))
        )


def test_conditional_identity_entropy_matches_linear_scan():
    rng = np.random.default_rng(11)
    cards = (3, 2, 4, 2, 3, 2, 2, 3)
    grid = random_grid(rng, 128, cards, missing_rate=0.1)
    u = universe_from_grid(grid, cards)
    cand0 = u.all_candidates()
    checked = 0
    while checked < 500:
        k = int(rng.integers(1, 5))
        attrs = rng.choice(len(cards), size=k, replace=False)
        obs = [(int(a), int(rng.integers(cards[int(a)]))) for a in attrs]
        survivors = oracle_survivors(grid, range(128), obs)
        oset = ObservationSet(tuple(Observation(a, v) for a, v in obs))
        if not survivors:
            with pytest.raises(InconsistentObservationsError):
                conditional_identity_entropy(u, cand0, oset)
        else:
            got = conditional_identity_entropy(u, cand0, oset)
            assert got == pytest.approx(math.log2(len(survivors)), abs=1e-12)
        checked += 1


def test_monotonicity_more_observations_never_increase_entropy(skewed_universe):
    cand = skewed_universe.all_candidates()
    base = ObservationSet.of(Observation(1, 0))
    h1 = conditional_identity_entropy(skewed_universe, cand, base)
    h2 = conditional_identity_entropy(
        skewed_universe, cand, base.add(Observation(0, 0))
    )
    assert h2 <= h1


# --------------------------------------------------------------------------
# attribute discriminability (single observation)


def test_attribute_discriminability_certain_value(four_objects):
    cand = filter_candidates(
        four_objects, four_objects.all_candidates(), Observation(0, 0)
    )
    # both survivors have a0=0
    assert attribute_discriminability(four_objects, cand, Observation(0, 0)) == 0.0


def test_attribute_discriminability_uniform_eighth():
    grid = [(v,) for v in range(8)]
    u = universe_from_grid(grid, (8,))
    got = attribute_discriminability(u, u.all_candidates(), Observation(0, 3))
    assert got == 3.0


def test_attribute_discriminability_frozen_log_value():
    # 1000 candidates, value held by 10 -> -log2(1/100)
    grid = [(0,) if i < 10 else (1,) for i in range(1000)]
    u = universe_from_grid(grid, (2,))
    got = attribute_discriminability(u, u.all_candidates(), Observation(0, 0))
    assert got == pytest.approx(LOG2_100, abs=1e-12)


def test_attribute_discriminability_zero_probability(four_objects):
    cand = filter_candidates(
        four_objects, four_objects.all_candidates(), Observation(0, 0)
    )
    with pytest.raises(ProbabilityZeroError) as err:
        attribute_discriminability(four_objects, cand, Observation(0, 1))
    assert err.value.attribute_id == 0


def test_attribute_discriminability_empty_candidates(four_objects):
    empty = filter_candidates(
        four_objects,
        filter_candidates(
            four_objects, four_objects.all_candidates(), Observation(0, 0)
        ),
        Observation(0, 1),
    )
    # the chain above is impossible; guard on the empty set
    with pytest.raises((EmptySearchSpaceError, ProbabilityZeroError)):
        attribute_discriminability(four_objects, empty, Observation(1, 0))


# --------------------------------------------------------------------------
# conditional discriminability


def test_conditional_discriminability_determined_value(skewed_universe):
    # survivors of a0=1 are objects 4 and 5; a0 is constant among them
    given = ObservationSet.of(Observation(0, 1))
    got = conditional_discriminability(
        skewed_universe,
        skewed_universe.all_candidates(),
        given,
        Observation(0, 1),
    )
    assert got == 0.0


def test_conditional_discriminability_independent_binaries(four_objects):
    given = ObservationSet.of(Observation(0, 0))
    got = conditional_discriminability(
        four_objects, four_objects.all_candidates(), given, Observation(1, 1)
    )
    assert got == 1.0


def test_conditional_discriminability_empty_conditioning(four_objects):
    cand = filter_candidates(
        four_objects, four_objects.all_candidates(), Observation(0, 0)
    )
    with pytest.raises(EmptySearchSpaceError):
        conditional_discriminability(
            four_objects, cand, ObservationSet.of(Observation(0, 1)), Observation(1, 0)
        )


def test_chain_identity_two_steps():
    rng = np.random.default_rng(3)
    cards = (3, 4)
    grid = random_grid(rng, 48, cards)
    u = universe_from_grid(grid, cards)
    cand = u.all_candidates()
    for x in range(3):
        for y in range(4):
            joint = oracle_joint_bits(grid, range(48), [(0, x), (1, y)])
            if joint is None:
                continue
            ix = attribute_discriminability(u, cand, Observation(0, x))
            iy_given_x = conditional_discriminability(
                u, cand, ObservationSet.of(Observation(0, x)), Observation(1, y)
            )
            assert ix + iy_given_x == pytest.approx(joint, abs=1e-9)


# --------------------------------------------------------------------------
# average conditional discriminability (Shannon entropy of the column)


def test_avg_discriminability_constant_attribute():
    u = universe_from_grid([(0,), (0,), (0,)], (1,))
    got = avg_conditional_discriminability(u, u.all_candidates(), ObservationSet(), 0)
    assert got == 0.0


def test_avg_discriminability_uniform_four_valued():
    grid = [(v,) for v in range(4)] * 3
    u = universe_from_grid(grid, (4,))
    got = avg_conditional_discriminability(u, u.all_candidates(), ObservationSet(), 0)
    assert got == 2.0  # exact for powers of two


def test_avg_discriminability_half_quarter_quarter():
    grid = [(0,), (0,), (1,), (2,)]
    u = universe_from_grid(grid, (3,))
    got = avg_conditional_discriminability(u, u.all_candidates(), ObservationSet(), 0)
    assert got == 1.5


def test_avg_discriminability_excludes_missing():
    grid = [(0,), (1,), (MISSING,), (MISSING,)]
    u = universe_from_grid(grid, (2,))
    got = avg_conditional_discriminability(u, u.all_candidates(), ObservationSet(), 0)
    assert got == 1.0  # distribution over the 2 defined cells only


def test_avg_discriminability_all_missing_is_undefined():
    grid = [(MISSING, 0), (MISSING, 1)]
    u = universe_from_grid(grid, (2, 2))
    with pytest.raises(UndefinedAttributeError):
        avg_conditional_discriminability(u, u.all_candidates(), ObservationSet(), 0)


def test_avg_discriminability_zero_support_conditioning(four_objects):
    # conditioning that empties the set must raise, not guess
    cand = filter_candidates(
        four_objects, four_objects.all_candidates(), Observation(0, 0)
    )
    with pytest.raises(EmptySearchSpaceError):
        avg_conditional_discriminability(
            four_objects, cand, ObservationSet.of(Observation(0, 1)), 1
        )


def test_avg_discriminability_bounds_property():
    rng = np.random.default_rng(23)
    for _ in range(50):
        cards = tuple(int(rng.integers(1, 6)) for _ in range(3))
        grid = random_grid(rng, int(rng.integers(2, 30)), cards, missing_rate=0.2)
        u = universe_from_grid(grid, cards)
        for a in range(3):
            want = oracle_avg_bits(grid, range(len(grid)), a)
            if want is None:
                with pytest.raises(UndefinedAttributeError):
                    avg_conditional_discriminability(
                        u, u.all_candidates(), ObservationSet(), a
                    )
                continue
            got = avg_conditional_discriminability(
                u, u.all_candidates(), ObservationSet(), a
            )
            assert got == pytest.approx(want, abs=1e-12)
            distinct = len(
                {grid[i][a] for i in range(len(grid)) if grid[i][a] != MISSING}
            )
            assert -1e-12 <= got <= math.log2(distinct) + 1e-12


# --------------------------------------------------------------------------
# set discriminability (chain rule)


def test_set_discriminability_single_equals_attribute(four_objects):
    cand = four_objects.all_candidates()
    single = set_discriminability(four_objects, cand, [Observation(0, 1)])
    direct = attribute_discriminability(four_objects, cand, Observation(0, 1))
    assert single == direct


def test_set_discriminability_constant_appends_zero():
    # a1 is constant: appending it adds exactly zero bits
    u = universe_from_grid([(0, 0), (1, 0), (2, 0), (0, 0)], (3, 1))
    cand = u.all_candidates()
    alone = set_discriminability(u, cand, [Observation(0, 1)])
    with_const = set_discriminability(
        u, cand, [Observation(0, 1), Observation(1, 0)]
    )
    assert with_const == alone


def test_set_discriminability_is_additive(skewed_universe):
    cand = skewed_universe.all_candidates()
    base = [Observation(0, 1)]
    with_second = set_discriminability(
        skewed_universe, cand, base + [Observation(1, 0)]
    )
    alone = set_discriminability(skewed_universe, cand, base)
    step = conditional_discriminability(
        skewed_universe, cand, ObservationSet.of(Observation(0, 1)), Observation(1, 0)
    )
    assert with_second == pytest.approx(alone + step, abs=1e-12)


def test_set_discriminability_rejects_duplicate_attributes(four_objects):
    with pytest.raises(ValidationError):
        set_discriminability(
            four_objects,
            four_objects.all_candidates(),
            [Observation(0, 0), Observation(0, 1)],
        )


def test_set_discriminability_probability_zero_names_attribute():
    # pair (a0=1, a1=1) never occurs together
    u = universe_from_grid([(0, 0), (0, 1), (1, 0)], (2, 2))
    with pytest.raises(ProbabilityZeroError) as err:
        set_discriminability(
            u, u.all_candidates(), [Observation(0, 1), Observation(1, 1)]
        )
    assert err.value.attribute_id == 1


def test_chain_rule_matches_joint_count_oracle():
    rng = np.random.default_rng(31)
    cards = (3, 2, 4, 2, 3, 2)
    grid = random_grid(rng, 64, cards, missing_rate=0.1)
    u = universe_from_grid(grid, cards)
    cand = u.all_candidates()
    done = 0
    while done < 1000:
        target = int(rng.integers(64))
        usable = [a for a in range(6) if grid[target][a] != MISSING]
        if not usable:
            continue
        k = int(rng.integers(1, min(4, len(usable)) + 1))
        attrs = [int(a) for a in rng.choice(usable, size=k, replace=False)]
        obs = [(a, grid[target][a]) for a in attrs]
        want = oracle_joint_bits(grid, range(64), obs)
        got = set_discriminability(
            u, cand, [Observation(a, v) for a, v in obs]
        )
        assert got == pytest.approx(want, abs=1e-9)
        done += 1


def test_chain_rule_permutation_invariance():
    rng = np.random.default_rng(37)
    cards = (2, 3, 2, 4)
    grid = random_grid(rng, 32, cards)
    u = universe_from_grid(grid, cards)
    cand = u.all_candidates()
    target = 5
    obs = [Observation(a, grid[target][a]) for a in range(4)]
    values = [
        set_discriminability(u, cand, list(perm))
        for perm in itertools.permutations(obs)
    ]
    assert max(values) - min(values) <= 1e-9


def test_section_421_equality_on_small_corpus():
    rng = np.random.default_rng(41)
    for _ in range(30):
        cards = tuple(int(rng.integers(2, 5)) for _ in range(4))
        grid = random_grid(rng, int(rng.integers(4, 40)), cards)
        u = universe_from_grid(grid, cards)
        cand = u.all_candidates()
        target = int(rng.integers(len(grid)))
        k = int(rng.integers(1, 4))
        attrs = [int(a) for a in rng.choice(4, size=k, replace=False)]
        obs_list = [Observation(a, grid[target][a]) for a in attrs]
        oset = ObservationSet(tuple(obs_list))
        h0 = identity_entropy(cand.size)
        h_cond = conditional_identity_entropy(u, cand, oset)
        i_set = set_discriminability(u, cand, obs_list)
        assert h0 - h_cond == pytest.approx(i_set, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(data=st.data())
def test_chain_rule_property(data):
    n = data.draw(st.integers(2, 20), label="n")
    m = data.draw(st.integers(1, 4), label="m")
    cards = tuple(data.draw(st.integers(2, 4), label="k") for _ in range(m))
    seed = data.draw(st.integers(0, 2**31), label="seed")
    rng = np.random.default_rng(seed)
    grid = random_grid(rng, n, cards, missing_rate=0.1)
    u = universe_from_grid(grid, cards)
    target = data.draw(st.integers(0, n - 1), label="target")
    usable = [a for a in range(m) if grid[target][a] != MISSING]
    if not usable:
        return
    obs = [(a, grid[target][a]) for a in usable]
    want = oracle_joint_bits(grid, range(n), obs)
    got = set_discriminability(u, u.all_candidates(), [Observation(a, v) for a, v in obs])
    assert got == pytest.approx(want, abs=1e-9)


def test_apply_observations_equals_sequential_filtering(skewed_universe):
    cand = skewed_universe.all_candidates()
    obs = [Observation(0, 0), Observation(1, 1)]
    combined = apply_observations(skewed_universe, cand, obs)
    step = filter_candidates(
        skewed_universe,
        filter_candidates(skewed_universe, cand, obs[0]),
        obs[1],
    )
    assert combined == step
