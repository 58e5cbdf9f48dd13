"""Indexed population table and candidate-set filtering.

A ``Universe`` is an immutable N x M table of categorical value codes with
a per-(attribute, value) inverted index of membership masks. Filtering a
``CandidateSet`` by an ``Observation`` is one mask intersection, which is
the hot operation of every tracing strategy built on top.

Value codes are dense small integers assigned in first-seen order; the
external string labels live only in the schema. ``MISSING`` is a reserved
sentinel code: it is never matchable by an observation, and filtering on
an attribute drops objects whose cell is missing there.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import CsvFormatError, ValidationError

#: reserved cell code for "no value recorded"
MISSING = -1

#: CSV spellings that map to MISSING on load
_MISSING_TOKENS = ("", "?")


@dataclass(frozen=True)
class Attribute:
    """One attribute category: its index, name, and ordered value labels."""

    attribute_id: int
    name: str
    values: tuple[str, ...]

    @property
    def cardinality(self) -> int:
        return len(self.values)

    def code_of(self, label: str) -> int:
        """Translate an external value label to its dense code."""
        try:
            return self.values.index(label)
        except ValueError:
            raise ValidationError(
                f"attribute {self.name!r} has no value {label!r}"
            ) from None


@dataclass(frozen=True)
class AttributeSchema:
    """Ordered attribute declarations for one universe."""

    attributes: tuple[Attribute, ...]

    def __post_init__(self):
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise ValidationError("attribute names must be unique")
        for a in self.attributes:
            if a.cardinality < 1:
                raise ValidationError(f"attribute {a.name!r} declares no values")
            if len(set(a.values)) != a.cardinality:
                raise ValidationError(f"attribute {a.name!r} has duplicate values")
            if a.attribute_id != self.attributes.index(a):
                raise ValidationError("attribute_id must equal position")

    def __len__(self) -> int:
        return len(self.attributes)

    def __iter__(self):
        return iter(self.attributes)

    def __getitem__(self, attribute_id: int) -> Attribute:
        return self.attributes[attribute_id]

    def by_name(self, name: str) -> Attribute:
        for a in self.attributes:
            if a.name == name:
                return a
        raise ValidationError(f"unknown attribute {name!r}")


@dataclass(frozen=True)
class Observation:
    """One known (attribute, value-code) fact about the unknown object."""

    attribute_id: int
    value: int

    def __post_init__(self):
        if self.value == MISSING:
            raise ValidationError("an observation can never carry MISSING")


class CandidateSet:
    """Immutable membership mask over object indices with a cached size."""

    __slots__ = ("mask", "size")

    def __init__(self, mask: np.ndarray):
        mask = np.asarray(mask, dtype=bool)
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "size", int(np.count_nonzero(mask)))

    def __setattr__(self, name, value):
        raise AttributeError("CandidateSet is immutable")

    def __len__(self) -> int:
        return self.size

    def __contains__(self, index: int) -> bool:
        return bool(self.mask[index])

    def __eq__(self, other) -> bool:
        return isinstance(other, CandidateSet) and np.array_equal(self.mask, other.mask)

    def __hash__(self):
        return hash(self.mask.tobytes())

    def __repr__(self) -> str:
        return f"CandidateSet(size={self.size}, capacity={self.mask.size})"

    def indices(self) -> np.ndarray:
        """Object indices of the members, ascending."""
        return np.flatnonzero(self.mask)

    def intersect(self, mask: np.ndarray) -> "CandidateSet":
        return CandidateSet(self.mask & mask)


class Universe:
    """Immutable indexed table of N objects x M categorical attributes.

    Construction validates every cell against the schema and builds, for
    each (attribute, value), a boolean membership mask plus one mask of
    the missing cells per attribute. The instance is safe to share across
    threads; all query methods are read-only.
    """

    def __init__(self, schema: AttributeSchema, cells: np.ndarray, object_ids):
        cells = np.asarray(cells, dtype=np.int32)
        if cells.ndim != 2:
            raise ValidationError("cells must be a 2-d matrix")
        n, m = cells.shape
        if n < 1 or m < 1:
            raise ValidationError("a universe needs at least one object and one attribute")
        if m != len(schema):
            raise ValidationError("cell columns do not match schema arity")
        object_ids = tuple(str(x) for x in object_ids)
        if len(object_ids) != n:
            raise ValidationError("object_ids length does not match row count")
        if len(set(object_ids)) != n:
            raise ValidationError("duplicate object_id")
        for attr in schema:
            col = cells[:, attr.attribute_id]
            bad = (col != MISSING) & ((col < 0) | (col >= attr.cardinality))
            if bad.any():
                raise ValidationError(
                    f"attribute {attr.name!r} has out-of-range codes"
                )

        cells.setflags(write=False)
        self.schema = schema
        self.cells = cells
        self.object_ids = object_ids
        self._id_to_index = {oid: i for i, oid in enumerate(object_ids)}

        self._value_masks: list[list[np.ndarray]] = []
        self._missing_masks: list[np.ndarray] = []
        for attr in schema:
            col = cells[:, attr.attribute_id]
            per_value = []
            for code in range(attr.cardinality):
                mask = col == code
                mask.setflags(write=False)
                per_value.append(mask)
            missing = col == MISSING
            missing.setflags(write=False)
            self._value_masks.append(per_value)
            self._missing_masks.append(missing)
        self._has_missing = bool((cells == MISSING).any())

    # -- basic shape -----------------------------------------------------

    @property
    def n_objects(self) -> int:
        return self.cells.shape[0]

    @property
    def n_attributes(self) -> int:
        return self.cells.shape[1]

    @property
    def has_missing_cells(self) -> bool:
        return self._has_missing

    def index_of(self, object_id: str) -> int:
        try:
            return self._id_to_index[object_id]
        except KeyError:
            raise ValidationError(f"unknown object_id {object_id!r}") from None

    def value_of(self, object_index: int, attribute_id: int) -> int:
        """Cell code for one object, possibly MISSING."""
        return int(self.cells[object_index, attribute_id])

    def row_observations(self, object_index: int, attribute_ids=None) -> list[Observation]:
        """The object's non-missing cells as observations."""
        ids = range(self.n_attributes) if attribute_ids is None else attribute_ids
        out = []
        for a in ids:
            code = self.value_of(object_index, a)
            if code != MISSING:
                out.append(Observation(a, code))
        return out

    def all_candidates(self) -> CandidateSet:
        return CandidateSet(np.ones(self.n_objects, dtype=bool))

    def value_mask(self, attribute_id: int, value: int) -> np.ndarray:
        return self._value_masks[attribute_id][value]

    def missing_mask(self, attribute_id: int) -> np.ndarray:
        return self._missing_masks[attribute_id]

    def digest(self) -> str:
        """Stable content hash of schema, ids, and cells."""
        h = hashlib.sha256()
        h.update(json.dumps(
            [[a.name, list(a.values)] for a in self.schema]
        ).encode())
        h.update("\x00".join(self.object_ids).encode())
        h.update(self.cells.tobytes())
        return h.hexdigest()

    def validate_observation(self, obs: Observation) -> None:
        if not 0 <= obs.attribute_id < self.n_attributes:
            raise ValidationError(f"attribute_id {obs.attribute_id} out of range")
        attr = self.schema[obs.attribute_id]
        if not 0 <= obs.value < attr.cardinality:
            raise ValidationError(
                f"value code {obs.value} out of range for attribute {attr.name!r}"
            )


# --------------------------------------------------------------------------
# Queries


def filter_candidates(universe: Universe, base: CandidateSet, obs: Observation) -> CandidateSet:
    """Members of ``base`` whose cell matches the observation.

    Objects missing the observed attribute are excluded; ``base`` itself
    is never mutated. An empty result is legal.
    """
    universe.validate_observation(obs)
    return base.intersect(universe.value_mask(obs.attribute_id, obs.value))


def value_counts(universe: Universe, cand: CandidateSet, attribute_id: int) -> dict[int, int]:
    """Tally of the attribute's codes inside ``cand``.

    Missing cells are reported under the MISSING key; counts always sum
    to ``cand.size``.
    """
    if not 0 <= attribute_id < universe.n_attributes:
        raise ValidationError(f"attribute_id {attribute_id} out of range")
    col = universe.cells[:, attribute_id][cand.mask]
    k = universe.schema[attribute_id].cardinality
    missing = int(np.count_nonzero(col == MISSING))
    counts = np.bincount(col[col != MISSING], minlength=k)
    out = {code: int(c) for code, c in enumerate(counts) if c}
    if missing:
        out[MISSING] = missing
    return out


# --------------------------------------------------------------------------
# CSV ingestion / emission


def _infer_code(label: str) -> str | None:
    return None if label in _MISSING_TOKENS else label


def load_csv(path) -> Universe:
    """Load a population table from ``object_id,<attr1>,...,<attrM>`` CSV.

    The schema is inferred: each column's distinct labels become value
    codes in first-seen order. Empty fields and the literal ``?`` map to
    MISSING.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        return _parse_csv(fh)


def load_csv_text(text: str) -> Universe:
    """Parse CSV already held in memory (same contract as load_csv)."""
    return _parse_csv(io.StringIO(text))


def _parse_csv(fh) -> Universe:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise CsvFormatError("empty file") from None
    if len(header) < 2 or header[0] != "object_id":
        raise CsvFormatError("header must be object_id,<attr1>,...,<attrM>", row=1)
    names = header[1:]
    m = len(names)

    object_ids: list[str] = []
    rows: list[list[str | None]] = []
    for row_no, row in enumerate(reader, start=2):
        if len(row) != m + 1:
            raise CsvFormatError(
                f"expected {m + 1} fields, found {len(row)}", row=row_no
            )
        object_ids.append(row[0])
        rows.append([_infer_code(v) for v in row[1:]])
    if not rows:
        raise ValidationError("no data rows")
    if len(set(object_ids)) != len(object_ids):
        seen, dup = set(), None
        for oid in object_ids:
            if oid in seen:
                dup = oid
                break
            seen.add(oid)
        raise ValidationError(f"duplicate object_id {dup!r}")

    codes_per_col: list[dict[str, int]] = [{} for _ in range(m)]
    cells = np.full((len(rows), m), MISSING, dtype=np.int32)
    for i, row in enumerate(rows):
        for j, label in enumerate(row):
            if label is None:
                continue
            table = codes_per_col[j]
            code = table.setdefault(label, len(table))
            cells[i, j] = code

    attributes = []
    for j, name in enumerate(names):
        values = tuple(codes_per_col[j])  # insertion order == first seen
        if not values:
            raise ValidationError(f"column {name!r} holds no values at all")
        attributes.append(Attribute(j, name, values))
    return Universe(AttributeSchema(tuple(attributes)), cells, object_ids)


def save_csv(universe: Universe, path) -> None:
    """Emit the table in the same format load_csv accepts."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["object_id"] + [a.name for a in universe.schema])
        for i, oid in enumerate(universe.object_ids):
            row = [oid]
            for attr in universe.schema:
                code = universe.value_of(i, attr.attribute_id)
                row.append("?" if code == MISSING else attr.values[code])
            writer.writerow(row)


def csv_text(universe: Universe) -> str:
    """The save_csv output as a string."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["object_id"] + [a.name for a in universe.schema])
    for i, oid in enumerate(universe.object_ids):
        row = [oid]
        for attr in universe.schema:
            code = universe.value_of(i, attr.attribute_id)
            row.append("?" if code == MISSING else attr.values[code])
        writer.writerow(row)
    return buf.getvalue()


# --------------------------------------------------------------------------
# Binary index round-trip (CLI `ingest` output)


def save_index(universe: Universe, path) -> None:
    """Persist the universe as a binary index (.npz)."""
    meta = {
        "object_ids": list(universe.object_ids),
        "schema": [[a.name, list(a.values)] for a in universe.schema],
    }
    np.savez_compressed(path, cells=universe.cells, meta=json.dumps(meta))


def load_index(path) -> Universe:
    """Load a universe persisted by save_index."""
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        cells = data["cells"]
    attributes = tuple(
        Attribute(j, name, tuple(values))
        for j, (name, values) in enumerate(meta["schema"])
    )
    return Universe(AttributeSchema(attributes), cells, meta["object_ids"])


def load_dataset(path) -> Universe:
    """Load either a CSV table or a binary index, by extension."""
    p = Path(path)
    if p.suffix == ".npz":
        return load_index(p)
    return load_csv(p)
