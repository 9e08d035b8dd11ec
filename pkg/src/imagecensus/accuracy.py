"""Class-wise top-k accuracy and the human-delta accuracy comparison.

Human-delta ranks classes by the ratio of detected persons in train images
to persons in val images; the t-test then asks whether the most
person-skewed classes are classified worse than everything else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

from . import stats
from .errors import EmptyGroup, KeyMismatch
from .ingest import fmt_float
from .records import PredictionRecord
from .stats import WelchResult


@dataclass(frozen=True, slots=True)
class ClassAccuracy:
    wordnet_id: str
    model: str
    split: str
    n_images: int
    n_top1: int
    n_top5: int

    @property
    def top1_acc(self) -> float:
        return self.n_top1 / self.n_images

    @property
    def top5_acc(self) -> float:
        return self.n_top5 / self.n_images


@dataclass(frozen=True, slots=True)
class HumanDeltaRow:
    wordnet_id: str
    persons_train: int
    persons_val: int
    ratio: float  # inf when val is 0 and train > 0, nan for 0/0


def topk_accuracy(
    predictions: Iterable[PredictionRecord], k: int = 5
) -> list[ClassAccuracy]:
    """Per-(class, model, split) accuracy from top-5 prediction records.

    ``k`` names the headline metric and must be 1 or 5; both cutoffs are
    counted on every row since the record already carries five guesses.
    """
    if k not in (1, 5):
        raise ValueError(f"k must be 1 or 5, got {k}")
    counts: dict[tuple[str, str, str], list[int]] = {}
    for record in predictions:
        key = (record.model, record.image.split, record.image.wordnet_id)
        n, c1, c5 = counts.setdefault(key, [0, 0, 0])
        counts[key][0] = n + 1
        counts[key][1] = c1 + (record.image.wordnet_id == record.top5[0])
        counts[key][2] = c5 + (record.image.wordnet_id in record.top5)
    if not counts:
        raise EmptyGroup("no prediction records")
    return [
        ClassAccuracy(
            wordnet_id=wid,
            model=model,
            split=split,
            n_images=n,
            n_top1=c1,
            n_top5=c5,
        )
        for (model, split, wid), (n, c1, c5) in sorted(counts.items())
    ]


def human_delta_ranking(
    census_train: Sequence, census_val: Sequence
) -> list[HumanDeltaRow]:
    """Classes ordered by persons_train / persons_val, most skewed first.

    Classes with persons in train but none in val sort above every finite
    ratio (largest train count first); classes with no persons at all sort
    last.  Ties fall back to the wordnet_id.
    """
    train = {r.wordnet_id: r.n_persons for r in census_train}
    val = {r.wordnet_id: r.n_persons for r in census_val}
    if set(train) != set(val):
        raise KeyMismatch(missing=set(train) - set(val), extra=set(val) - set(train))

    rows = []
    for wid in train:
        p_train, p_val = train[wid], val[wid]
        if p_val > 0:
            ratio = p_train / p_val
        elif p_train > 0:
            ratio = math.inf
        else:
            ratio = math.nan
        rows.append(
            HumanDeltaRow(
                wordnet_id=wid,
                persons_train=p_train,
                persons_val=p_val,
                ratio=ratio,
            )
        )

    def key(row: HumanDeltaRow):
        if math.isnan(row.ratio):
            return (2, 0.0, row.wordnet_id)
        if math.isinf(row.ratio):
            return (0, -row.persons_train, row.wordnet_id)
        return (1, -row.ratio, row.wordnet_id)

    return sorted(rows, key=key)


def human_delta_ttest(
    accuracies: Sequence[ClassAccuracy],
    ranking: Sequence[HumanDeltaRow],
    top_n: int = 25,
) -> dict[tuple[str, str], WelchResult]:
    """Welch t of top-n human-delta classes' top-5 accuracy vs the rest.

    One result per (model, split) present in ``accuracies``; negative t
    means the person-skewed group is classified worse.  The comparison is
    top-n against the remaining classes, not against the whole manifest.
    """
    ranked = [row.wordnet_id for row in ranking]
    if not 0 < top_n < len(ranked):
        raise ValueError(f"top_n must be in (0, {len(ranked)}), got {top_n}")
    top = set(ranked[:top_n])

    groups: dict[tuple[str, str], dict[str, ClassAccuracy]] = {}
    for acc in accuracies:
        groups.setdefault((acc.model, acc.split), {})[acc.wordnet_id] = acc
    results: dict[tuple[str, str], WelchResult] = {}
    for group_key in sorted(groups):
        by_wid = groups[group_key]
        missing = set(by_wid) - set(ranked)
        if missing:
            raise KeyMismatch(missing=set(), extra=missing)
        head = [acc.top5_acc for wid, acc in sorted(by_wid.items()) if wid in top]
        rest = [acc.top5_acc for wid, acc in sorted(by_wid.items()) if wid not in top]
        results[group_key] = stats.welch_t(head, rest)
    return results


ACC_COLUMNS = ("wordnet_id", "split", "n", "top1", "top5", "n_top1", "n_top5")


def write_accuracy(rows: Sequence[ClassAccuracy], dest: str | IO) -> None:
    """Classwise accuracy export for a single model."""
    from .ingest import _text_sink

    models = {r.model for r in rows}
    if len(models) > 1:
        raise ValueError(f"one model per file, got {sorted(models)}")
    ordered = sorted(rows, key=lambda r: (r.split, r.wordnet_id))
    with _text_sink(dest) as out:
        out.write(",".join(ACC_COLUMNS) + "\n")
        for r in ordered:
            out.write(
                ",".join(
                    (
                        r.wordnet_id,
                        r.split,
                        str(r.n_images),
                        fmt_float(r.top1_acc),
                        fmt_float(r.top5_acc),
                        str(r.n_top1),
                        str(r.n_top5),
                    )
                )
                + "\n"
            )


DELTA_COLUMNS = ("rank", "wordnet_id", "persons_train", "persons_val", "ratio")


def write_human_delta(rows: Sequence[HumanDeltaRow], dest: str | IO) -> None:
    """Ranked person-count shift export; rank 1 is the largest train excess."""
    from .ingest import _text_sink

    with _text_sink(dest) as out:
        out.write(",".join(DELTA_COLUMNS) + "\n")
        for rank, row in enumerate(rows, start=1):
            out.write(
                ",".join(
                    (
                        str(rank),
                        row.wordnet_id,
                        str(row.persons_train),
                        str(row.persons_val),
                        fmt_float(row.ratio),
                    )
                )
                + "\n"
            )
