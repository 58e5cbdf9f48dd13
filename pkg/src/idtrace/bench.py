"""Experiment harness: core-set multiplicity, discriminability spread,
and the greedy-vs-random tracing benchmark.

Each experiment returns plain row dicts plus a column list; ``run_bench``
writes them as CSV next to a ``meta.json`` (seed, dataset digest, timer
resolution, measured wall times) and optionally renders one SVG figure
per experiment.

Determinism contract: every CSV cell is derived from (dataset, seed)
only. Reported times are simulated acquisition costs under a uniform
per-acquisition cost model, so reruns reproduce the files byte for byte;
measured wall clock goes to meta.json, which is diagnostic.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__ as _pkg_version
from .coreset import enumerate_core_sets, greedy_core_set
from .entropy import ObservationSet, attribute_discriminability
from .errors import (
    NotDistinguishableError,
    ResourceLimitError,
    ValidationError,
)
from .generator import GeneratorConfig, default_benchmark_config, generate_universe
from .tracing import run_random_baseline, run_titf
from .universe import (
    MISSING,
    CandidateSet,
    Observation,
    Universe,
    load_dataset,
    value_counts,
)

# seed-sequence stream tags, one per independent random decision
_SS_PROBES = 1
_SS_OBJECTS = 2
_SS_HIDE = 3
_SS_BASELINE = 4


@dataclass(frozen=True)
class Grouping:
    """Partition of the first group_count*group_size objects into
    contiguous groups."""

    group_count: int
    group_size: int

    def __post_init__(self):
        if self.group_count < 1 or self.group_size < 1:
            raise ValidationError("grouping dimensions must be positive")

    def masks(self, n_objects: int) -> list[np.ndarray]:
        if self.group_count * self.group_size > n_objects:
            raise ValidationError("grouping exceeds the universe size")
        out = []
        for g in range(self.group_count):
            mask = np.zeros(n_objects, dtype=bool)
            mask[g * self.group_size : (g + 1) * self.group_size] = True
            out.append(mask)
        return out


@dataclass(frozen=True)
class BenchConfig:
    """Knobs for one full benchmark run."""

    generator: GeneratorConfig = field(default_factory=default_benchmark_config)
    dataset_path: str | None = None  # overrides the generator when set
    group_count: int = 10
    group_size: int = 500
    missing_rates: tuple[float, ...] = (0.2, 0.4, 0.6, 0.8)
    objects_per_run: int = 100
    baseline_repetitions: int = 20
    rng_seed: int = 7
    probe_count: int = 10
    max_set_size: int | None = None  # None: adapt to greedy sizes, capped below
    max_set_size_cap: int = 6
    profile_objects: int = 2
    missing_protocol: str = "bernoulli"  # "bernoulli" | "fixed_count"
    acquisition_cost_ms: float = 1.0
    experiments: tuple[str, ...] = ("q1", "q2", "q3", "q4")

    def __post_init__(self):
        for s in self.missing_rates:
            if not 0.0 <= s < 1.0:
                raise ValidationError(f"missing rate {s} outside [0, 1)")
        if self.missing_protocol not in ("bernoulli", "fixed_count"):
            raise ValidationError(f"unknown protocol {self.missing_protocol!r}")
        unknown = set(self.experiments) - {"q1", "q2", "q3", "q4"}
        if unknown:
            raise ValidationError(f"unknown experiments {sorted(unknown)}")

    @property
    def grouping(self) -> Grouping:
        return Grouping(self.group_count, self.group_size)

    @classmethod
    def from_mapping(cls, data: dict) -> "BenchConfig":
        data = dict(data)
        gen = data.pop("generator", None)
        if gen is not None:
            gen = GeneratorConfig(
                n_objects=gen["n_objects"],
                cardinalities=tuple(gen["cardinalities"]),
                skew=gen.get("skew", "uniform"),
                zipf_exponent=gen.get("zipf_exponent", 1.1),
                rng_seed=gen.get("rng_seed", 0),
                unique_rows=gen.get("unique_rows", True),
            )
        for key in ("missing_rates", "experiments"):
            if key in data:
                data[key] = tuple(data[key])
        known = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
        bad = set(data) - known
        if bad:
            raise ValidationError(f"unknown config keys {sorted(bad)}")
        if gen is not None:
            data["generator"] = gen
        return cls(**data)


def load_bench_universe(config: BenchConfig) -> Universe:
    if config.dataset_path is not None:
        return load_dataset(config.dataset_path)
    return generate_universe(config.generator)


def _seed_int(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, columns: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c, "")) for c in columns])


# --------------------------------------------------------------------------
# Q1: how many core identification sets does an object have per space?

Q1_COLUMNS = [
    "probe_id",
    "group_index",
    "core_set_count",
    "min_core_size",
    "max_set_size",
    "indistinguishable",
    "censored",
]


def sample_probes(universe: Universe, config: BenchConfig) -> list[int]:
    rng = np.random.default_rng([config.rng_seed, _SS_PROBES])
    picks = rng.choice(universe.n_objects, size=config.probe_count, replace=False)
    return [int(i) for i in picks]


def _probe_space(universe: Universe, group_mask: np.ndarray, probe: int) -> CandidateSet:
    mask = group_mask.copy()
    mask[probe] = True
    return CandidateSet(mask)


def experiment_coreset_multiplicity(
    universe: Universe,
    grouping: Grouping,
    probes: list[int],
    max_set_size: int | None = None,
    cap: int = 6,
) -> tuple[list[dict], list[str]]:
    """Count core identification sets of each probe inside each group.

    The probe is added to the group's space. With ``max_set_size=None``
    the bound adapts: the largest greedy core set observed across all
    (probe, group) pairs, never above ``cap``. Pairs whose greedy set
    exceeds the bound are recorded as censored; a probe duplicating a
    group row is recorded as indistinguishable with count 0.
    """
    group_masks = grouping.masks(universe.n_objects)
    greedy_sizes: dict[tuple[int, int], int | None] = {}
    for probe in probes:
        for g, gmask in enumerate(group_masks):
            space = _probe_space(universe, gmask, probe)
            try:
                report = greedy_core_set(universe, space, probe)
                greedy_sizes[(probe, g)] = len(report.attribute_ids)
            except NotDistinguishableError:
                greedy_sizes[(probe, g)] = None

    if max_set_size is None:
        observed = [s for s in greedy_sizes.values() if s is not None]
        max_set_size = min(max(observed, default=1), cap)

    rows = []
    for probe in probes:
        for g, gmask in enumerate(group_masks):
            space = _probe_space(universe, gmask, probe)
            gsize = greedy_sizes[(probe, g)]
            row = {
                "probe_id": universe.object_ids[probe],
                "group_index": g,
                "max_set_size": max_set_size,
                "indistinguishable": 0,
                "censored": 0,
                "min_core_size": "",
            }
            if gsize is None:
                row["core_set_count"] = 0
                row["indistinguishable"] = 1
            elif gsize > max_set_size:
                row["core_set_count"] = ""
                row["censored"] = 1
            else:
                try:
                    sets = enumerate_core_sets(universe, space, probe, max_set_size)
                except ResourceLimitError:
                    row["core_set_count"] = ""
                    row["censored"] = 1
                else:
                    row["core_set_count"] = len(sets)
                    if sets:
                        row["min_core_size"] = min(len(s) for s in sets)
            rows.append(row)
    rows.sort(key=lambda r: (r["probe_id"], r["group_index"]))
    return rows, Q1_COLUMNS


# --------------------------------------------------------------------------
# Q2: same space, different objects -> different discriminability

Q2_COLUMNS = ["group_index", "object_id", "attribute", "bits", "undefined"]
Q2_PROFILE_COLUMNS = ["group_index", "object_id", "rank", "attribute", "bits"]


def experiment_discriminability_across_objects(
    universe: Universe,
    grouping: Grouping,
    profile_objects: int = 2,
) -> tuple[list[dict], list[str], list[dict], list[str]]:
    """Per (object, attribute): the object's own-value discriminability
    inside its group; plus descending-sorted profiles for the first
    ``profile_objects`` members of each group."""
    group_masks = grouping.masks(universe.n_objects)
    rows = []
    profile_rows = []
    for g, gmask in enumerate(group_masks):
        space = CandidateSet(gmask)
        members = [int(i) for i in space.indices()]
        for obj in members:
            per_attr = []
            for a in range(universe.n_attributes):
                code = universe.value_of(obj, a)
                name = universe.schema[a].name
                if code == MISSING:
                    rows.append(
                        {
                            "group_index": g,
                            "object_id": universe.object_ids[obj],
                            "attribute": name,
                            "bits": "",
                            "undefined": 1,
                        }
                    )
                    continue
                bits = attribute_discriminability(
                    universe, space, Observation(a, code)
                )
                per_attr.append((name, bits))
                rows.append(
                    {
                        "group_index": g,
                        "object_id": universe.object_ids[obj],
                        "attribute": name,
                        "bits": bits,
                        "undefined": 0,
                    }
                )
            if obj in members[:profile_objects]:
                per_attr.sort(key=lambda pair: (-pair[1], pair[0]))
                for rank, (name, bits) in enumerate(per_attr):
                    profile_rows.append(
                        {
                            "group_index": g,
                            "object_id": universe.object_ids[obj],
                            "rank": rank,
                            "attribute": name,
                            "bits": bits,
                        }
                    )
    return rows, Q2_COLUMNS, profile_rows, Q2_PROFILE_COLUMNS


# --------------------------------------------------------------------------
# Q3: same object, different spaces -> different discriminability

Q3_COLUMNS = ["group_index", "attribute", "bits", "infinite", "undefined"]


def experiment_discriminability_across_spaces(
    universe: Universe,
    grouping: Grouping,
    probe: int,
) -> tuple[list[dict], list[str]]:
    """The probe's per-attribute discriminability measured against each
    group's value frequencies. A value the group never holds is recorded
    with the infinite flag instead of a number."""
    group_masks = grouping.masks(universe.n_objects)
    rows = []
    for g, gmask in enumerate(group_masks):
        space = CandidateSet(gmask)
        for a in range(universe.n_attributes):
            name = universe.schema[a].name
            code = universe.value_of(probe, a)
            row = {
                "group_index": g,
                "attribute": name,
                "bits": "",
                "infinite": 0,
                "undefined": 0,
            }
            if code == MISSING:
                row["undefined"] = 1
            else:
                count = value_counts(universe, space, a).get(code, 0)
                if count == 0:
                    row["infinite"] = 1
                else:
                    row["bits"] = math.log2(space.size) - math.log2(count)
            rows.append(row)
    return rows, Q3_COLUMNS


# --------------------------------------------------------------------------
# Q4: greedy tracing vs random acquisition under partial knowledge

Q4_COLUMNS = [
    "missing_rate",
    "objects",
    "titf_mean_acquisitions",
    "random_mean_acquisitions",
    "titf_mean_time_ms",
    "random_mean_time_ms",
    "acquisition_reduction_pct",
    "time_reduction_pct",
]
Q4_OBJECT_COLUMNS = [
    "missing_rate",
    "object_id",
    "known_count",
    "titf_acquisitions",
    "titf_time_ms",
    "titf_status",
    "random_mean_acquisitions",
    "random_mean_time_ms",
]


def _known_for(
    universe: Universe,
    obj: int,
    rate: float,
    protocol: str,
    rng: np.random.Generator,
) -> ObservationSet:
    m = universe.n_attributes
    if protocol == "bernoulli":
        hidden = rng.random(m) < rate
    else:  # fixed_count
        n_hidden = math.ceil(rate * m)
        hidden = np.zeros(m, dtype=bool)
        hidden[rng.choice(m, size=n_hidden, replace=False)] = True
    obs = []
    for a in range(m):
        if hidden[a]:
            continue
        code = universe.value_of(obj, a)
        if code != MISSING:
            obs.append(Observation(a, code))
    return ObservationSet(tuple(obs))


def experiment_titf_vs_random(
    universe: Universe, config: BenchConfig
) -> tuple[list[dict], list[str], list[dict], list[str], dict]:
    """Trace sampled objects from partially hidden knowledge with both
    strategies; report per-object and per-missing-rate aggregates.

    Times are simulated: acquisition_cost_ms per acquisition. Measured
    wall seconds per strategy are returned separately for meta.json.
    """
    if universe.n_objects < config.objects_per_run:
        raise ValidationError("dataset smaller than objects_per_run")
    rng = np.random.default_rng([config.rng_seed, _SS_OBJECTS])
    picks = rng.choice(
        universe.n_objects, size=config.objects_per_run, replace=False
    )
    objects = [int(i) for i in picks]
    cost = config.acquisition_cost_ms / 1000.0

    object_rows = []
    agg_rows = []
    wall = {"titf": 0.0, "random": 0.0}
    for s_idx, rate in enumerate(config.missing_rates):
        titf_acq, titf_ms, rand_acq, rand_ms = [], [], [], []
        for obj_pos, obj in enumerate(objects):
            hide_rng = np.random.default_rng(
                [config.rng_seed, _SS_HIDE, s_idx, obj_pos]
            )
            known = _known_for(
                universe, obj, rate, config.missing_protocol, hide_rng
            )
            result = run_titf(universe, obj, known, acquisition_cost=cost)
            wall["titf"] += result.elapsed
            t_ms = result.sim_cost * 1000.0
            reps_acq, reps_ms = [], []
            for rep in range(config.baseline_repetitions):
                seed = _seed_int(config.rng_seed, _SS_BASELINE, s_idx, obj_pos, rep)
                base = run_random_baseline(
                    universe, obj, known, seed, acquisition_cost=cost
                )
                wall["random"] += base.elapsed
                reps_acq.append(base.acquisitions)
                reps_ms.append(base.sim_cost * 1000.0)
            r_acq = sum(reps_acq) / len(reps_acq)
            r_ms = sum(reps_ms) / len(reps_ms)
            titf_acq.append(result.acquisitions)
            titf_ms.append(t_ms)
            rand_acq.append(r_acq)
            rand_ms.append(r_ms)
            object_rows.append(
                {
                    "missing_rate": rate,
                    "object_id": universe.object_ids[obj],
                    "known_count": len(known),
                    "titf_acquisitions": result.acquisitions,
                    "titf_time_ms": t_ms,
                    "titf_status": result.status.value,
                    "random_mean_acquisitions": r_acq,
                    "random_mean_time_ms": r_ms,
                }
            )
        n = len(objects)
        t_mean_acq = sum(titf_acq) / n
        r_mean_acq = sum(rand_acq) / n
        t_mean_ms = sum(titf_ms) / n
        r_mean_ms = sum(rand_ms) / n
        agg_rows.append(
            {
                "missing_rate": rate,
                "objects": n,
                "titf_mean_acquisitions": t_mean_acq,
                "random_mean_acquisitions": r_mean_acq,
                "titf_mean_time_ms": t_mean_ms,
                "random_mean_time_ms": r_mean_ms,
                "acquisition_reduction_pct": _reduction_pct(r_mean_acq, t_mean_acq),
                "time_reduction_pct": _reduction_pct(r_mean_ms, t_mean_ms),
            }
        )
    object_rows.sort(key=lambda r: (r["missing_rate"], r["object_id"]))
    return agg_rows, Q4_COLUMNS, object_rows, Q4_OBJECT_COLUMNS, wall


def _reduction_pct(baseline: float, ours: float) -> float:
    if baseline == 0.0:
        return 0.0
    return (baseline - ours) / baseline * 100.0


# --------------------------------------------------------------------------
# Orchestration


def run_bench(
    config: BenchConfig, out_dir, plots: bool = True, universe: Universe | None = None
) -> dict:
    """Run the configured experiments, writing CSVs (and figures) under
    ``out_dir``. Returns the meta mapping that was written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if universe is None:
        universe = load_bench_universe(config)
    grouping = config.grouping

    meta: dict = {
        "package_version": _pkg_version,
        "rng_seed": config.rng_seed,
        "dataset_digest": universe.digest(),
        "n_objects": universe.n_objects,
        "n_attributes": universe.n_attributes,
        "timer": {
            "clock": "perf_counter",
            "resolution_s": time.get_clock_info("perf_counter").resolution,
        },
        "acquisition_cost_ms": config.acquisition_cost_ms,
        "missing_protocol": config.missing_protocol,
        "wall_seconds": {},
        "outputs": [],
    }

    probes = sample_probes(universe, config)

    def _emit(name: str, columns: list[str], rows: list[dict]) -> None:
        write_csv(out / f"{name}.csv", columns, rows)
        meta["outputs"].append(f"{name}.csv")

    figures = {}
    if "q1" in config.experiments:
        t0 = time.perf_counter()
        rows, cols = experiment_coreset_multiplicity(
            universe,
            grouping,
            probes,
            max_set_size=config.max_set_size,
            cap=config.max_set_size_cap,
        )
        meta["wall_seconds"]["q1"] = time.perf_counter() - t0
        _emit("q1", cols, rows)
        figures["q1"] = rows
    if "q2" in config.experiments:
        t0 = time.perf_counter()
        rows, cols, prof_rows, prof_cols = experiment_discriminability_across_objects(
            universe, grouping, config.profile_objects
        )
        meta["wall_seconds"]["q2"] = time.perf_counter() - t0
        _emit("q2", cols, rows)
        _emit("q2_profile", prof_cols, prof_rows)
        figures["q2"] = rows
        figures["q2_profile"] = prof_rows
    if "q3" in config.experiments:
        t0 = time.perf_counter()
        rows, cols = experiment_discriminability_across_spaces(
            universe, grouping, probes[0]
        )
        meta["wall_seconds"]["q3"] = time.perf_counter() - t0
        _emit("q3", cols, rows)
        figures["q3"] = rows
    if "q4" in config.experiments:
        t0 = time.perf_counter()
        agg, cols, obj_rows, obj_cols, wall = experiment_titf_vs_random(
            universe, config
        )
        meta["wall_seconds"]["q4"] = time.perf_counter() - t0
        meta["wall_seconds"]["q4_strategies"] = wall
        _emit("q4", cols, agg)
        _emit("q4_objects", obj_cols, obj_rows)
        figures["q4"] = agg

    if plots:
        from .plots import render_figures

        for name in render_figures(figures, out):
            meta["outputs"].append(name)

    meta["wall_seconds"]["total"] = sum(
        v for v in meta["wall_seconds"].values() if isinstance(v, float)
    )
    with open(out / "meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return meta
