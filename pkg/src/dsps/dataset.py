"""Population container and CSV round-trip.

A population is a rectangular table: one row per candidate member, one id
column followed by one column per numeric feature.  Cells must parse as
finite reals with ``.`` as the decimal separator; missing or malformed cells
are hard errors, never imputed.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Union

import numpy as np

from .errors import (
    DuplicateFeatureName,
    DuplicateMemberId,
    EmptySelection,
    LengthMismatch,
    MalformedCsv,
    NonNumericCell,
    UnknownFeature,
)

__all__ = ["Population", "load_population", "save_population", "feature_column", "subset"]

Source = Union[str, Path, bytes, IO[str], IO[bytes]]


@dataclass(frozen=True, eq=False)
class Population:
    """Immutable member table: ids, feature names, and an (n_p, n_x) float matrix."""

    member_ids: tuple[str, ...]
    feature_names: tuple[str, ...]
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "member_ids", tuple(self.member_ids))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        data = np.ascontiguousarray(np.asarray(self.data, dtype=float))
        if data.ndim != 2:
            raise MalformedCsv("population data must be a 2-d matrix")
        n_p, n_x = data.shape
        if n_p < 1 or n_x < 1:
            raise MalformedCsv("population needs at least one member and one feature")
        if len(self.member_ids) != n_p:
            raise LengthMismatch(f"{len(self.member_ids)} ids for {n_p} rows")
        if len(self.feature_names) != n_x:
            raise LengthMismatch(f"{len(self.feature_names)} names for {n_x} columns")
        if not np.all(np.isfinite(data)):
            raise NonNumericCell("population contains non-finite entries")
        _check_unique(self.member_ids, DuplicateMemberId, "member id")
        _check_unique(self.feature_names, DuplicateFeatureName, "feature name")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n_members(self) -> int:
        return self.data.shape[0]

    @property
    def n_features(self) -> int:
        return self.data.shape[1]

    def feature_index(self, name: str) -> int:
        try:
            return self.feature_names.index(name)
        except ValueError:
            raise UnknownFeature(f"no feature named {name!r}") from None


def _check_unique(items: Iterable[str], exc: type, what: str) -> None:
    seen = set()
    for item in items:
        if item in seen:
            raise exc(f"duplicate {what} {item!r}")
        seen.add(item)


def _open_text(source: Source):
    """Return (text stream, needs_close) for a path, bytes, or file object."""
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8", newline=""), True
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8")), False
    if hasattr(source, "read"):
        probe = source.read(0)
        if isinstance(probe, bytes):
            return io.TextIOWrapper(source, encoding="utf-8", newline=""), False
        return source, False
    raise TypeError(f"cannot read population from {type(source).__name__}")


def load_population(source: Source) -> Population:
    """Parse a population CSV: header ``id,<feature>,...`` then one row per member."""
    stream, needs_close = _open_text(source)
    try:
        reader = csv.reader(stream)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedCsv("empty population file") from None
        if len(header) < 2:
            raise MalformedCsv("header must name an id column and at least one feature")
        feature_names = [h.strip() for h in header[1:]]
        ids: list[str] = []
        rows: list[list[float]] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue  # trailing blank line
            if len(row) != len(header):
                raise MalformedCsv(
                    f"line {lineno}: expected {len(header)} cells, got {len(row)}"
                )
            ids.append(row[0].strip())
            values = []
            for name, cell in zip(feature_names, row[1:]):
                text = cell.strip()
                try:
                    value = float(text)
                except ValueError:
                    raise NonNumericCell(
                        f"line {lineno}, feature {name!r}: {text!r} is not numeric"
                    ) from None
                if not math.isfinite(value):
                    raise NonNumericCell(
                        f"line {lineno}, feature {name!r}: {text!r} is not finite"
                    )
                values.append(value)
            rows.append(values)
        if not rows:
            raise MalformedCsv("population has a header but no members")
        return Population(tuple(ids), tuple(feature_names), np.array(rows, dtype=float))
    finally:
        if needs_close:
            stream.close()


def save_population(pop: Population, destination: Union[str, Path, IO[str]]) -> None:
    """Write a population CSV that reloads to full float precision."""
    own = isinstance(destination, (str, Path))
    stream = open(destination, "w", encoding="utf-8", newline="") if own else destination
    try:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["id", *pop.feature_names])
        for i, member_id in enumerate(pop.member_ids):
            writer.writerow([member_id, *(repr(float(v)) for v in pop.data[i])])
    finally:
        if own:
            stream.close()


def feature_column(pop: Population, name: str) -> np.ndarray:
    """Read-only view of one feature column, in member order."""
    return pop.data[:, pop.feature_index(name)]


def subset(pop: Population, mask) -> Population:
    """Population restricted to members where the binary mask is 1."""
    b = np.asarray(getattr(mask, "b", mask))
    if b.shape != (pop.n_members,):
        raise LengthMismatch(f"mask length {b.shape} for {pop.n_members} members")
    keep = b.astype(bool)
    if not keep.any():
        raise EmptySelection("mask selects no members")
    ids = tuple(mid for mid, k in zip(pop.member_ids, keep) if k)
    return Population(ids, pop.feature_names, pop.data[keep])
