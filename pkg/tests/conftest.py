"""Shared fixtures and independent oracles.

The oracles deliberately avoid the library's index structures: they work
on plain Python lists of rows so that agreement between the two is
evidence, not tautology.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from idtrace.universe import (
    MISSING,
    Attribute,
    AttributeSchema,
    Universe,
)


def universe_from_grid(grid, cardinalities, object_ids=None) -> Universe:
    """Build a Universe from a literal list of code rows (-1 = missing)."""
    m = len(cardinalities)
    schema = AttributeSchema(
        tuple(
            Attribute(j, f"a{j}", tuple(str(v) for v in range(cardinalities[j])))
            for j in range(m)
        )
    )
    cells = np.array(grid, dtype=np.int32).reshape(len(grid), m)
    if object_ids is None:
        object_ids = [f"o{i}" for i in range(len(grid))]
    return Universe(schema, cells, object_ids)


# --------------------------------------------------------------------------
# Oracles: naive row scans over plain lists


def oracle_filter(grid, indices, attribute, value):
    """Objects among ``indices`` whose cell matches exactly."""
    return [i for i in indices if grid[i][attribute] == value]


def oracle_survivors(grid, indices, obs_pairs):
    out = list(indices)
    for attribute, value in obs_pairs:
        out = oracle_filter(grid, out, attribute, value)
    return out


def oracle_joint_bits(grid, indices, obs_pairs):
    """-log2(joint count / n): the quantity the chain rule must equal."""
    n = len(indices)
    count = len(oracle_survivors(grid, indices, obs_pairs))
    if count == 0:
        return None
    return math.log2(n) - math.log2(count)


def oracle_value_counts(grid, indices, attribute):
    counts: dict[int, int] = {}
    for i in indices:
        v = grid[i][attribute]
        counts[v] = counts.get(v, 0) + 1
    return counts


def oracle_avg_bits(grid, indices, attribute):
    """Shannon entropy of the attribute's value distribution, missing
    cells excluded; None when no survivor has a value."""
    counts = oracle_value_counts(grid, indices, attribute)
    counts.pop(MISSING, None)
    total = sum(counts.values())
    if total == 0:
        return None
    return -sum((c / total) * math.log2(c / total) for c in counts.values())


def oracle_identifying_subsets(grid, indices, target, usable):
    """Every subset of ``usable`` whose values single the target out."""
    from itertools import combinations

    found = []
    for size in range(0, len(usable) + 1):
        for combo in combinations(usable, size):
            obs = [(a, grid[target][a]) for a in combo]
            if oracle_survivors(grid, indices, obs) == [target]:
                found.append(frozenset(combo))
    return found


def oracle_core_sets(grid, indices, target, usable):
    """Identifying subsets with no identifying proper subset."""
    identifying = oracle_identifying_subsets(grid, indices, target, usable)
    cores = [
        s
        for s in identifying
        if not any(other < s for other in identifying)
    ]
    return sorted((tuple(sorted(s)) for s in cores), key=lambda t: (len(t), t))


def random_grid(rng, n, cardinalities, missing_rate=0.0):
    grid = []
    for _ in range(n):
        row = []
        for k in cardinalities:
            if missing_rate > 0.0 and rng.random() < missing_rate:
                row.append(MISSING)
            else:
                row.append(int(rng.integers(k)))
        grid.append(tuple(row))
    return grid


# --------------------------------------------------------------------------
# Fixtures


@pytest.fixture
def four_objects() -> Universe:
    """X = {0,0,1,1}, Y = {0,1,0,1}: two independent uniform binaries."""
    return universe_from_grid([(0, 0), (0, 1), (1, 0), (1, 1)], (2, 2))


@pytest.fixture
def skewed_universe() -> Universe:
    """8 objects; a0 split 4/2/2, a1 uniform binary, a2 has a missing
    cell and a unique value."""
    grid = [
        (0, 0, 0),
        (0, 1, 1),
        (0, 0, 1),
        (0, 1, 0),
        (1, 0, 0),
        (1, 1, 1),
        (2, 0, MISSING),
        (2, 1, 2),
    ]
    return universe_from_grid(grid, (3, 2, 3))


@pytest.fixture
def small_csv(tmp_path):
    path = tmp_path / "small.csv"
    path.write_text(
        "object_id,color,size\n"
        "obj1,red,big\n"
        "obj2,red,small\n"
        "obj3,blue,big\n"
        "obj4,?,small\n"
    )
    return path
