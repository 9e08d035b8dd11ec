"""Per-image NSFW scoring, class aggregation, and the review shortlist.

An image's score is the summed probability mass of the positive detector
classes (hentai + porn + sexy by default).  Classes are clustered in
(mean gender, mean NSFW) space and the cluster with the highest mean score
becomes the shortlist handed to human review.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Iterable, Mapping, Sequence

from . import stats
from .affinity import ClusteringResult
from .errors import EmptyClass, EmptyCluster, LengthMismatch, UnknownClass
from .ingest import csv_field, fmt_float
from .records import NSFW_CLASSES, ImageKey, NsfwAnnotation

DEFAULT_POSITIVE = ("hentai", "porn", "sexy")


@dataclass(frozen=True, slots=True)
class ClassNsfwStats:
    wordnet_id: str
    n_train: int
    n_val: int
    mean_nsfw_train: float
    std_nsfw_train: float
    mean_nsfw_val: float | None
    std_nsfw_val: float | None


@dataclass(frozen=True, slots=True)
class ShortlistClass:
    wordnet_id: str
    label: str
    mean_gender: float
    mean_age: float
    mean_nsfw_train: float


@dataclass(frozen=True, slots=True)
class Shortlist:
    cluster_id: int
    classes: tuple[ShortlistClass, ...]
    images: tuple[ImageKey, ...]


def image_nsfw_score(
    annotation: NsfwAnnotation, positive: Sequence[str] = DEFAULT_POSITIVE
) -> float:
    """Summed probability of the positive detector classes."""
    index = {name: i for i, name in enumerate(NSFW_CLASSES)}
    for name in positive:
        if name not in index:
            raise ValueError(f"unknown NSFW class {name!r}")
    return math.fsum(annotation.probs[index[name]] for name in positive)


def class_nsfw_stats(
    annotations: Iterable[NsfwAnnotation],
    class_ids: Iterable[str],
    positive: Sequence[str] = DEFAULT_POSITIVE,
) -> list[ClassNsfwStats]:
    """Mean and population std of the image score per class and split.

    Every class needs train coverage; a class without any scored train
    image raises EmptyClass.  Classes without val images get None for the
    val fields.  One row per entry of ``class_ids``, sorted by wordnet_id.
    """
    known = set(class_ids)
    scores: dict[tuple[str, str], list[float]] = {}
    for ann in annotations:
        wid = ann.image.wordnet_id
        if wid not in known:
            raise UnknownClass(wid)
        scores.setdefault((wid, ann.image.split), []).append(
            image_nsfw_score(ann, positive)
        )

    rows = []
    for wid in sorted(known):
        train = scores.get((wid, "train"), [])
        val = scores.get((wid, "val"), [])
        if not train:
            raise EmptyClass(f"{wid} has no scored train images")
        rows.append(
            ClassNsfwStats(
                wordnet_id=wid,
                n_train=len(train),
                n_val=len(val),
                mean_nsfw_train=stats.mean(train),
                std_nsfw_train=stats.pstdev(train),
                mean_nsfw_val=stats.mean(val) if val else None,
                std_nsfw_val=stats.pstdev(val) if val else None,
            )
        )
    return rows


def clustering_features(
    census_rows: Sequence,
    nsfw_rows: Sequence[ClassNsfwStats],
    standardize: bool = False,
) -> tuple[list[str], list[tuple[float, float]]]:
    """(mean gender, mean train NSFW) per class, in canonical join order.

    The join keeps classes present in both inputs with a defined gender
    mean (some face on record), sorted by wordnet_id — the ordering every
    clustering consumer must share.  ``standardize`` z-scores each feature
    (population std; a zero-spread feature is only centered).
    """
    mu = {row.wordnet_id: row.mu for row in census_rows}
    wids: list[str] = []
    feats: list[tuple[float, float]] = []
    for row in sorted(nsfw_rows, key=lambda r: r.wordnet_id):
        gender = mu.get(row.wordnet_id)
        if gender is None:
            continue
        wids.append(row.wordnet_id)
        feats.append((gender, row.mean_nsfw_train))
    if not wids:
        raise EmptyClass("no classes with both census and NSFW coverage")
    if standardize:
        cols = list(zip(*feats))
        centered = []
        for col in cols:
            m = stats.mean(col)
            s = stats.pstdev(col)
            centered.append([(v - m) / s if s > 0 else v - m for v in col])
        feats = list(zip(*[tuple(c) for c in centered]))
        feats = [(a, b) for a, b in feats]
    return wids, feats


def select_shortlist(
    census_rows: Sequence,
    nsfw_rows: Sequence[ClassNsfwStats],
    clustering: ClusteringResult,
    images: Iterable[ImageKey] | None = None,
    labels: Mapping[str, str] | None = None,
    include_val: bool = True,
) -> Shortlist:
    """The member classes of the highest-scoring cluster, worst first.

    ``clustering`` must have been computed over clustering_features' join
    order of the same inputs.  The winning cluster maximizes the mean of
    its members' mean_nsfw_train; its classes come back sorted by that
    score descending along with every matching image key from ``images``
    (train plus val unless ``include_val`` is off).
    """
    wids, _ = clustering_features(census_rows, nsfw_rows)
    if len(wids) != len(clustering.assignment):
        raise LengthMismatch(
            f"join has {len(wids)} classes but clustering covers "
            f"{len(clustering.assignment)} points"
        )
    if not clustering.exemplars:
        raise EmptyCluster("clustering produced no exemplars")

    nsfw_by_wid = {row.wordnet_id: row for row in nsfw_rows}
    census_by_wid = {row.wordnet_id: row for row in census_rows}

    members: dict[int, list[int]] = {}
    for i, exemplar in enumerate(clustering.assignment):
        members.setdefault(exemplar, []).append(i)

    def cluster_mean(indices: Sequence[int]) -> float:
        return math.fsum(
            nsfw_by_wid[wids[i]].mean_nsfw_train for i in indices
        ) / len(indices)

    winner = max(sorted(members), key=lambda e: (cluster_mean(members[e]), -e))
    chosen = sorted(
        members[winner],
        key=lambda i: (-nsfw_by_wid[wids[i]].mean_nsfw_train, wids[i]),
    )

    classes = []
    for i in chosen:
        wid = wids[i]
        census_row = census_by_wid[wid]
        classes.append(
            ShortlistClass(
                wordnet_id=wid,
                label=(labels or {}).get(wid, ""),
                mean_gender=census_row.mu,
                mean_age=census_row.alpha_facewise,
                mean_nsfw_train=nsfw_by_wid[wid].mean_nsfw_train,
            )
        )

    wanted = {c.wordnet_id for c in classes}
    pool: set[ImageKey] = set()
    for key in images or ():
        if key.wordnet_id in wanted and (include_val or key.split == "train"):
            pool.add(key)
    return Shortlist(
        cluster_id=winner,
        classes=tuple(classes),
        images=tuple(sorted(pool, key=ImageKey.sort_key)),
    )


NSFW_COLUMNS = (
    "wordnet_id",
    "mean_nsfw_train",
    "std_nsfw_train",
    "mean_nsfw_val",
    "std_nsfw_val",
)

SHORTLIST_COLUMNS = (
    "wordnet_id",
    "label",
    "mean_gender",
    "mean_age",
    "mean_nsfw_train",
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return fmt_float(value)
    return csv_field(str(value))


def write_nsfw_stats(rows: Sequence[ClassNsfwStats], dest: str | IO) -> None:
    from .ingest import _text_sink

    with _text_sink(dest) as out:
        out.write(",".join(NSFW_COLUMNS) + "\n")
        for row in rows:
            out.write(",".join(_fmt(getattr(row, col)) for col in NSFW_COLUMNS) + "\n")


def write_shortlist(shortlist: Shortlist, dest: str | IO) -> None:
    from .ingest import _text_sink

    with _text_sink(dest) as out:
        out.write(",".join(SHORTLIST_COLUMNS) + "\n")
        for entry in shortlist.classes:
            out.write(
                ",".join(_fmt(getattr(entry, col)) for col in SHORTLIST_COLUMNS) + "\n"
            )
