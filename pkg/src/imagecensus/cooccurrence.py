"""Gender-bias analyses over human co-occurrence.

Two lenses: per-group spreads of class mean-gender scores (classes grouped
by an editable mapping file, unmapped classes pooled as Unknown), and a
per-class gender-skewness ranking over a named class subset.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO, Iterable, Mapping, Sequence

from . import stats
from .errors import DuplicateMapping, KeyMismatch, MalformedRow
from .ingest import csv_field, fmt_float

AKC_GROUPS = (
    "Toy",
    "Hound",
    "Sporting",
    "Terrier",
    "NonSporting",
    "Working",
    "Herding",
)
UNKNOWN_GROUP = "Unknown"


@dataclass(frozen=True, slots=True)
class GroupAssignment:
    wordnet_id: str
    group: str


@dataclass(frozen=True, slots=True)
class GroupDistribution:
    group: str
    values: tuple[float, ...]
    mean: float
    median: float
    std: float


@dataclass(frozen=True, slots=True)
class SkewRankEntry:
    wordnet_id: str
    label: str
    xi: float


def load_group_mapping(source) -> dict[str, str]:
    """Read the `wordnet_id,group` mapping CSV; `#` lines are comments."""
    from .ingest import _text_source

    mapping: dict[str, str] = {}
    with _text_source(source) as stream:
        reader = csv.reader(stream)
        for fields in reader:
            if not fields or (fields[0].startswith("#")):
                continue
            if [f.strip() for f in fields] == ["wordnet_id", "group"]:
                continue
            if len(fields) != 2:
                raise MalformedRow(reader.line_num, f"expected 2 fields, got {len(fields)}")
            wid, group = fields[0].strip(), fields[1].strip()
            if not wid or not group:
                raise MalformedRow(reader.line_num, "empty wordnet_id or group")
            if wid in mapping:
                raise DuplicateMapping(wid)
            mapping[wid] = group
    return mapping


def load_labeled_subset(source) -> dict[str, str]:
    """Read a `wordnet_id,label` subset CSV; `#` lines are comments."""
    from .ingest import _text_source

    subset: dict[str, str] = {}
    with _text_source(source) as stream:
        reader = csv.reader(stream)
        for fields in reader:
            if not fields or fields[0].startswith("#"):
                continue
            if [f.strip() for f in fields] == ["wordnet_id", "label"]:
                continue
            if len(fields) != 2:
                raise MalformedRow(reader.line_num, f"expected 2 fields, got {len(fields)}")
            wid, label = fields[0].strip(), fields[1].strip()
            if not wid or not label:
                raise MalformedRow(reader.line_num, "empty wordnet_id or label")
            if wid in subset:
                raise DuplicateMapping(wid)
            subset[wid] = label
    return subset


def assign_groups(
    classes: Iterable[str], mapping: Mapping[str, str]
) -> list[GroupAssignment]:
    """Attach each class to its mapped group; unmapped classes go Unknown."""
    return [
        GroupAssignment(wordnet_id=wid, group=mapping.get(wid, UNKNOWN_GROUP))
        for wid in sorted(set(classes))
    ]


def group_gender_distributions(
    assignments: Sequence[GroupAssignment], census_rows: Sequence
) -> list[GroupDistribution]:
    """Per-group spread of member classes' mean gender scores.

    Census rows must cover every assigned class.  Classes without any face
    carry no gender mean and are left out; groups with no usable member are
    dropped.  Output order: the declared kennel-club groups, Unknown, then
    any free-form group names alphabetically.
    """
    mu = {r.wordnet_id: r.mu for r in census_rows}
    missing = {a.wordnet_id for a in assignments} - set(mu)
    if missing:
        raise KeyMismatch(missing=missing, extra=set())

    values: dict[str, list[float]] = {}
    for assignment in sorted(assignments, key=lambda a: a.wordnet_id):
        value = mu[assignment.wordnet_id]
        if value is not None:
            values.setdefault(assignment.group, []).append(value)

    declared = AKC_GROUPS + (UNKNOWN_GROUP,)
    order = [g for g in declared if g in values]
    order += sorted(g for g in values if g not in declared)

    out = []
    for group in order:
        members = values[group]
        out.append(
            GroupDistribution(
                group=group,
                values=tuple(members),
                mean=stats.mean(members),
                median=_median(members),
                std=stats.pstdev(members),
            )
        )
    return out


def _median(values: Sequence[float]) -> float:
    ordered = sorted(values)
    n = len(ordered)
    mid = n // 2
    if n % 2:
        return ordered[mid]
    return (ordered[mid - 1] + ordered[mid]) / 2.0


def skewness_ranking(
    subset: Mapping[str, str], census_rows: Sequence
) -> list[SkewRankEntry]:
    """Classes of ``subset`` (wordnet_id -> label) ordered by gender skew.

    Ascending xi puts the most female-leaning class first under the
    0=female / 1=male encoding; ties break on wordnet_id.
    """
    xi = {r.wordnet_id: r.xi for r in census_rows}
    missing = set(subset) - set(xi)
    if missing:
        raise KeyMismatch(missing=missing, extra=set())
    entries = [
        SkewRankEntry(wordnet_id=wid, label=subset[wid], xi=xi[wid])
        for wid in subset
    ]
    entries.sort(key=lambda e: (e.xi, e.wordnet_id))
    return entries


def load_dog_survey(source) -> list[tuple[str, float, str]]:
    """Pass-through ingest of `breed,gender_ratio,survey` rows for the card."""
    from .ingest import _text_source

    rows: list[tuple[str, float, str]] = []
    with _text_source(source) as stream:
        reader = csv.reader(stream)
        for fields in reader:
            if not fields or fields[0].startswith("#"):
                continue
            if [f.strip() for f in fields] == ["breed", "gender_ratio", "survey"]:
                continue
            if len(fields) != 3:
                raise MalformedRow(reader.line_num, f"expected 3 fields, got {len(fields)}")
            try:
                ratio = float(fields[1])
            except ValueError:
                raise MalformedRow(reader.line_num, f"bad gender_ratio {fields[1]!r}") from None
            rows.append((fields[0].strip(), ratio, fields[2].strip()))
    return rows


GROUPS_COLUMNS = ("group", "n_classes", "mean", "median", "std", "values")
RANKING_COLUMNS = ("rank", "wordnet_id", "label", "xi")


def write_group_distributions(
    distributions: Sequence[GroupDistribution], dest: str | IO
) -> None:
    from .ingest import _text_sink

    with _text_sink(dest) as out:
        out.write(",".join(GROUPS_COLUMNS) + "\n")
        for d in distributions:
            packed = ";".join(fmt_float(v) for v in d.values)
            out.write(
                ",".join(
                    (
                        csv_field(d.group),
                        str(len(d.values)),
                        fmt_float(d.mean),
                        fmt_float(d.median),
                        fmt_float(d.std),
                        csv_field(packed),
                    )
                )
                + "\n"
            )


def write_skew_ranking(entries: Sequence[SkewRankEntry], dest: str | IO) -> None:
    from .ingest import _text_sink

    with _text_sink(dest) as out:
        out.write(",".join(RANKING_COLUMNS) + "\n")
        for rank, entry in enumerate(entries, start=1):
            out.write(
                ",".join(
                    (
                        str(rank),
                        entry.wordnet_id,
                        csv_field(entry.label),
                        fmt_float(entry.xi),
                    )
                )
                + "\n"
            )
