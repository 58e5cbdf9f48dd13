"""Command-line entry point.

One `idtrace` group wiring the library end to end: dataset ingestion and
stats, core-set computation, tracing (batch and interactive), the
benchmark harness, the HTTP service, and the synthetic generator.

Structured results go to stdout (``--format json`` for machines),
progress and prompts to stderr. Exit codes: 0 success, 2 usage errors,
3 data errors, 4 resource-limit errors.
"""

from __future__ import annotations

import json
import math
import sys

import click

from . import __version__
from .bench import BenchConfig, run_bench
from .coreset import enumerate_core_sets, greedy_core_set
from .entropy import (
    ObservationSet,
    avg_conditional_discriminability,
    identity_entropy,
)
from .errors import IdTraceError, ResourceLimitError, UsageError
from .generator import GeneratorConfig, generate_universe
from .tracing import (
    SessionStatus,
    observe,
    recommend_next,
    run_random_baseline,
    run_titf,
    start_session,
)
from .universe import (
    MISSING,
    Universe,
    load_csv,
    load_dataset,
    csv_text,
    save_csv,
    save_index,
    value_counts,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_RESOURCE = 4

_FORMAT = click.option(
    "--format",
    "fmt",
    type=click.Choice(["text", "json"]),
    default="text",
    show_default=True,
    help="Output format on stdout.",
)


def _emit(payload: dict, fmt: str, text_lines) -> None:
    if fmt == "json":
        click.echo(json.dumps(payload, indent=2))
    else:
        for line in text_lines:
            click.echo(line)


def _parse_known(universe: Universe, pairs: str | None) -> ObservationSet:
    """`a=v,b=w` pairs against the schema by name and value label."""
    if not pairs:
        return ObservationSet()
    from .universe import Observation

    observations = []
    for chunk in pairs.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "=" not in chunk:
            raise UsageError(f"expected name=value, got {chunk!r}")
        name, label = chunk.split("=", 1)
        attr = universe.schema.by_name(name.strip())
        observations.append(Observation(attr.attribute_id, attr.code_of(label.strip())))
    return ObservationSet(tuple(observations))


def _attr_names(universe: Universe, attribute_ids) -> list[str]:
    return [universe.schema[a].name for a in attribute_ids]


def _json_bits(value: float) -> float | None:
    return value if math.isfinite(value) else None


@click.group()
@click.version_option(version=__version__, prog_name="idtrace")
def cli() -> None:
    """Identity tracing over categorical populations."""


# --------------------------------------------------------------------------
# ingest / stats


@cli.command()
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Binary index output path (.npz).")
@_FORMAT
def ingest(csv_path: str, out: str, fmt: str) -> None:
    """Parse and validate a CSV, writing a binary index."""
    universe = load_csv(csv_path)
    save_index(universe, out)
    payload = {
        "objects": universe.n_objects,
        "attributes": universe.n_attributes,
        "digest": universe.digest(),
        "index": out,
    }
    _emit(
        payload,
        fmt,
        [
            f"objects: {payload['objects']}",
            f"attributes: {payload['attributes']}",
            f"digest: {payload['digest']}",
            f"index written to {out}",
        ],
    )


@cli.command()
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--attr", "attr_name", default=None, help="Show the per-value bits of one attribute.")
@_FORMAT
def stats(dataset: str, attr_name: str | None, fmt: str) -> None:
    """Entropy and discriminability summary of a dataset."""
    universe = load_dataset(dataset)
    cand = universe.all_candidates()

    if attr_name is not None:
        attr = universe.schema.by_name(attr_name)
        counts = value_counts(universe, cand, attr.attribute_id)
        present = {v: c for v, c in counts.items() if v != MISSING and c > 0}
        missing = counts.get(MISSING, 0)
        total = sum(present.values())
        values = []
        for value, count in sorted(present.items()):
            p = count / total
            values.append(
                {
                    "value": attr.values[value],
                    "count": count,
                    "probability": p,
                    "bits": -math.log2(p),
                }
            )
        try:
            avg = avg_conditional_discriminability(
                universe, cand, ObservationSet(), attr.attribute_id
            )
        except IdTraceError:
            avg = None
        payload = {
            "attribute": attr.name,
            "cardinality": attr.cardinality,
            "missing": missing,
            "values": values,
            "avg_bits": avg,
        }
        lines = [
            f"attribute: {attr.name} (cardinality {attr.cardinality}, missing {missing})"
        ]
        for row in values:
            lines.append(
                f"  {row['value']}: count={row['count']} p={row['probability']:.6f} "
                f"bits={row['bits']:.6f}"
            )
        lines.append(
            "  average bits: "
            + ("undefined" if avg is None else format(avg, ".6f"))
        )
        _emit(payload, fmt, lines)
        return

    attrs = []
    for attr in universe.schema:
        try:
            avg = avg_conditional_discriminability(
                universe, cand, ObservationSet(), attr.attribute_id
            )
        except IdTraceError:
            avg = None
        counts = value_counts(universe, cand, attr.attribute_id)
        attrs.append(
            {
                "attribute": attr.name,
                "cardinality": attr.cardinality,
                "missing": counts.get(MISSING, 0),
                "avg_bits": avg,
            }
        )
    payload = {
        "objects": universe.n_objects,
        "attributes": universe.n_attributes,
        "identity_entropy_bits": identity_entropy(universe.n_objects),
        "digest": universe.digest(),
        "per_attribute": attrs,
    }
    lines = [
        f"objects: {payload['objects']}",
        f"attributes: {payload['attributes']}",
        f"identity entropy: {payload['identity_entropy_bits']:.6f} bits",
    ]
    for row in attrs:
        avg = "undefined" if row["avg_bits"] is None else format(row["avg_bits"], ".6f")
        lines.append(
            f"  {row['attribute']}: k={row['cardinality']} "
            f"missing={row['missing']} avg_bits={avg}"
        )
    _emit(payload, fmt, lines)


# --------------------------------------------------------------------------
# coreset


@cli.command()
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--object", "object_id", required=True, help="Target object id.")
@click.option("--enumerate", "do_enumerate", is_flag=True, help="List every core set up to --max-size.")
@click.option("--max-size", default=4, show_default=True, help="Size bound for --enumerate.")
@click.option("--known", "known_pairs", default=None, help="Seed observations, a=v,b=w.")
@_FORMAT
def coreset(
    dataset: str,
    object_id: str,
    do_enumerate: bool,
    max_size: int,
    known_pairs: str | None,
    fmt: str,
) -> None:
    """Compute a minimal identifying attribute set for one object."""
    universe = load_dataset(dataset)
    target = universe.index_of(object_id)
    cand0 = universe.all_candidates()
    seed = _parse_known(universe, known_pairs)

    if do_enumerate:
        sets = enumerate_core_sets(universe, cand0, target, max_set_size=max_size)
        payload = {
            "object_id": object_id,
            "max_size": max_size,
            "core_sets": [_attr_names(universe, s) for s in sets],
        }
        lines = [f"{len(sets)} core set(s) for {object_id} up to size {max_size}:"]
        lines += ["  " + (", ".join(names) if names else "(empty set)") for names in payload["core_sets"]]
        _emit(payload, fmt, lines)
        return

    report = greedy_core_set(universe, cand0, target, seed)
    payload = {
        "object_id": object_id,
        "attributes": _attr_names(universe, report.attribute_ids),
        "is_identifying": report.is_identifying,
        "is_minimal": report.is_minimal,
        "entropy_trace": list(report.entropy_trace),
    }
    lines = [
        f"core set for {object_id}: {', '.join(payload['attributes']) or '(empty set)'}",
        f"identifying: {report.is_identifying}  minimal: {report.is_minimal}",
        "entropy trace: " + ", ".join(f"{b:.6f}" for b in report.entropy_trace),
    ]
    _emit(payload, fmt, lines)


# --------------------------------------------------------------------------
# trace


def _trace_result_payload(universe: Universe, result) -> dict:
    return {
        "strategy": result.strategy,
        "status": result.status.value,
        "target_found": result.target_found,
        "acquisitions": result.acquisitions,
        "path": [
            {
                "attribute": universe.schema[o.attribute_id].name,
                "value": universe.schema[o.attribute_id].values[o.value],
            }
            for o in result.path
        ],
        "entropy_history": [_json_bits(h) for h in result.entropy_history],
        "elapsed_s": result.elapsed,
    }


def _interactive_loop(universe: Universe, known: ObservationSet, target: int | None) -> dict:
    """Prompt-driven tracing session on stdin/stderr."""
    from .universe import Observation

    session = start_session(universe, known)
    skipped: set[int] = set()
    err = click.get_text_stream("stderr")

    while session.status is SessionStatus.ACTIVE:
        rec = recommend_next(session)
        ranking = [(a, b) for a, b in rec.ranking if a not in skipped]
        if not ranking:
            break
        err.write(
            f"\ncandidates: {session.candidates.size}  "
            f"entropy: {session.entropy_history[-1]:.4f} bits\n"
        )
        err.write("next best attributes:\n")
        for a, bits in ranking[:5]:
            err.write(f"  {universe.schema[a].name}: {bits:.4f} bits\n")
        chosen = ranking[0][0]
        attr = universe.schema[chosen]
        err.write(
            f"value for {attr.name} {sorted(attr.values)} "
            "(name=value to answer another attribute, 'skip', 'quit'): "
        )
        err.flush()
        line = sys.stdin.readline()
        if not line:
            break
        line = line.strip()
        if line == "quit":
            break
        if line == "skip":
            skipped.add(chosen)
            continue
        if not line:
            if target is None:
                continue
            code = universe.value_of(target, chosen)
            if code == MISSING:
                skipped.add(chosen)
                continue
            err.write(f"  -> {attr.values[code]}\n")
            observe(session, Observation(chosen, code))
            continue
        if "=" in line:
            name, label = line.split("=", 1)
            attr = universe.schema.by_name(name.strip())
            label = label.strip()
        else:
            label = line
        observe(session, Observation(attr.attribute_id, attr.code_of(label)))

    survivors = session.survivor_ids()
    return {
        "strategy": "interactive",
        "status": session.status.value if session.status is not SessionStatus.ACTIVE else "ambiguous",
        "target_found": survivors[0] if len(survivors) == 1 else survivors,
        "acquisitions": len(session.path),
        "path": [
            {
                "attribute": universe.schema[o.attribute_id].name,
                "value": universe.schema[o.attribute_id].values[o.value],
            }
            for o in session.path
        ],
        "entropy_history": [_json_bits(h) for h in session.entropy_history],
    }


@cli.command()
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--object", "object_id", default=None, help="Target object id (optional with --interactive).")
@click.option("--known", "known_pairs", default=None, help="Seed observations, a=v,b=w.")
@click.option(
    "--strategy",
    type=click.Choice(["titf", "random"]),
    default="titf",
    show_default=True,
)
@click.option("--seed", default=0, show_default=True, help="RNG seed for --strategy random.")
@click.option("--interactive", is_flag=True, help="Read observed values from stdin.")
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["text", "json"]),
    default="json",
    show_default=True,
    help="Output format on stdout.",
)
def trace(
    dataset: str,
    object_id: str | None,
    known_pairs: str | None,
    strategy: str,
    seed: int,
    interactive: bool,
    fmt: str,
) -> None:
    """Trace one object's identity, batch or interactively."""
    universe = load_dataset(dataset)
    known = _parse_known(universe, known_pairs)

    if interactive:
        target = None if object_id is None else universe.index_of(object_id)
        payload = _interactive_loop(universe, known, target)
    else:
        if object_id is None:
            raise UsageError("--object is required unless --interactive is set")
        target = universe.index_of(object_id)
        if strategy == "random":
            click.echo(f"seed: {seed}", err=True)
            result = run_random_baseline(universe, target, known, rng_seed=seed)
        else:
            result = run_titf(universe, target, known)
        payload = _trace_result_payload(universe, result)

    path_text = ", ".join(f"{s['attribute']}={s['value']}" for s in payload["path"])
    _emit(
        payload,
        fmt,
        [
            f"status: {payload['status']}",
            f"found: {payload['target_found']}",
            f"acquisitions: {payload['acquisitions']}",
            f"path: {path_text or '(none)'}",
        ],
    )


# --------------------------------------------------------------------------
# bench


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--seed", default=None, type=int, help="Override the config seed.")
@click.option("--figures/--no-figures", default=True, show_default=True)
@_FORMAT
def bench(config_path, out_dir, seed, figures, fmt):
    """Run the benchmark experiments into a directory."""
    mapping = {}
    if config_path is not None:
        with open(config_path, encoding="utf-8") as fh:
            mapping = json.load(fh)
    if seed is not None:
        mapping["rng_seed"] = seed
    config = BenchConfig.from_mapping(mapping)
    click.echo(f"seed: {config.rng_seed}", err=True)
    meta = run_bench(config, out_dir, plots=figures)
    payload = {
        "out": out_dir,
        "seed": config.rng_seed,
        "dataset_digest": meta["dataset_digest"],
        "wall_seconds": meta["wall_seconds"],
        "outputs": meta["outputs"],
    }
    _emit(
        payload,
        fmt,
        [f"wrote {name}" for name in meta["outputs"]]
        + [f"total wall time: {meta['wall_seconds']['total']:.2f}s"],
    )


# --------------------------------------------------------------------------
# serve


@cli.command()
@click.option("--data-dir", required=True, type=click.Path(file_okay=False), envvar="IDTRACE_DATA_DIR")
@click.option("--host", default="127.0.0.1", show_default=True, envvar="IDTRACE_HOST")
@click.option("--port", default=8787, show_default=True, envvar="IDTRACE_PORT")
@click.option("--display-threshold", default=50, show_default=True, envvar="IDTRACE_DISPLAY_THRESHOLD")
@click.option("--ui-dir", default=None, type=click.Path(file_okay=False, exists=True), envvar="IDTRACE_UI_DIR")
def serve(data_dir, host, port, display_threshold, ui_dir):
    """Start the HTTP tracing service."""
    import uvicorn

    from .service import create_app

    app = create_app(data_dir, display_threshold=display_threshold, ui_dir=ui_dir)
    click.echo(f"serving on http://{host}:{port} (data: {data_dir})", err=True)
    uvicorn.run(app, host=host, port=port, log_level="warning")


# --------------------------------------------------------------------------
# generate


@cli.command()
@click.option("--objects", required=True, type=int)
@click.option("--attrs", "n_attrs", type=int, default=None, help="Attribute count; used with --cardinality.")
@click.option("--cardinality", default=4, show_default=True, help="Values per attribute when --attrs is used.")
@click.option("--cards", default=None, help="Explicit cardinalities, e.g. 2,3,4 (overrides --attrs).")
@click.option("--skew", type=click.Choice(["uniform", "zipf"]), default="uniform", show_default=True)
@click.option("--zipf-exponent", default=1.1, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--allow-duplicates", is_flag=True, help="Permit duplicate rows.")
@click.option("--out", "out_path", default="-", show_default=True, help="CSV path, - for stdout.")
def generate(objects, n_attrs, cardinality, cards, skew, zipf_exponent, seed, allow_duplicates, out_path):
    """Write a synthetic dataset CSV."""
    if cards is not None:
        cardinalities = tuple(int(c) for c in cards.split(","))
    elif n_attrs is not None:
        cardinalities = (cardinality,) * n_attrs
    else:
        raise UsageError("pass --attrs or --cards")
    config = GeneratorConfig(
        n_objects=objects,
        cardinalities=cardinalities,
        skew=skew,
        zipf_exponent=zipf_exponent,
        rng_seed=seed,
        unique_rows=not allow_duplicates,
    )
    click.echo(f"seed: {seed}", err=True)
    universe = generate_universe(config)
    if out_path == "-":
        click.echo(csv_text(universe), nl=False)
    else:
        save_csv(universe, out_path)
        click.echo(f"wrote {universe.n_objects} objects to {out_path}", err=True)
        click.echo(f"digest: {universe.digest()}", err=True)


# --------------------------------------------------------------------------
# dispatch


def main(argv=None) -> int:
    """Run the CLI, mapping error classes onto exit codes."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return EXIT_OK
    except click.exceptions.Exit as exc:  # --help, --version
        return exc.exit_code
    except click.UsageError as exc:
        exc.show(file=sys.stderr)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return EXIT_DATA
    except click.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except UsageError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    except ResourceLimitError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_RESOURCE
    except IdTraceError as exc:
        click.echo(f"error [{exc.code}]: {exc}", err=True)
        return EXIT_DATA
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
