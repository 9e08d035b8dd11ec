"""Human hand-survey state: queue, labels, consensus, event log, export.

Items are flagged-class images queued in severity order.  Every accepted
label is appended to a JSONL event log before it mutates state, so the
whole survey can be rebuilt by replaying the log; replay and live state
produce byte-identical exports.

Consensus demands unanimity among all live labels (a resubmission replaces
the annotator's previous label) with at least ``quorum`` of them.  Items
unanimously judged none_of_these close as exhausted and stay out of the
export, which carries only the four positive categories.
"""

from __future__ import annotations

import io
import json
import threading
from dataclasses import dataclass, replace
from typing import IO, Iterable, Mapping, Sequence

from .errors import EmptyShortlist, ItemClosed, UnknownItem
from .ingest import csv_field, fmt_float
from .nsfw import Shortlist
from .records import ImageKey

CATEGORIES = (
    "beach_voyeur",
    "exposed_private_parts",
    "upskirt",
    "verifiably_pornographic",
    "none_of_these",
)
POSITIVE_CATEGORIES = CATEGORIES[:-1]
NONE_CATEGORY = "none_of_these"

OPEN = "open"
CONSENSUS = "consensus"
EXHAUSTED = "exhausted"

DEFAULT_QUORUM = 3


def item_id_for(image: ImageKey) -> str:
    return f"{image.wordnet_id}/{image.split}/{image.file_name}"


@dataclass(frozen=True, slots=True)
class SurveyItem:
    item_id: str
    image: ImageKey
    class_label: str
    mean_nsfw_train: float
    status: str = OPEN


@dataclass(frozen=True, slots=True)
class AnnotationEvent:
    annotator_id: str
    item_id: str
    category: str
    timestamp: str  # UTC instant, ISO-8601

    def to_json(self) -> str:
        return json.dumps(
            {
                "annotator": self.annotator_id,
                "item_id": self.item_id,
                "category": self.category,
                "timestamp": self.timestamp,
            },
            separators=(",", ":"),
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, line: str) -> "AnnotationEvent":
        raw = json.loads(line)
        return cls(
            annotator_id=raw["annotator"],
            item_id=raw["item_id"],
            category=raw["category"],
            timestamp=raw["timestamp"],
        )


@dataclass(frozen=True, slots=True)
class ConsensusRecord:
    item_id: str
    category: str
    n_annotators: int


def build_queue(shortlist: Shortlist) -> list[SurveyItem]:
    """One open item per distinct shortlisted image.

    Queue order is class severity (mean NSFW score descending) then the
    image sort key, and the item id is derived from the image key alone,
    so rebuilding the queue from the same inputs reproduces ids exactly.
    """
    if not shortlist.classes or not shortlist.images:
        raise EmptyShortlist("shortlist carries no images to queue")
    by_class = {c.wordnet_id: c for c in shortlist.classes}
    pool = sorted(
        {img for img in shortlist.images if img.wordnet_id in by_class},
        key=ImageKey.sort_key,
    )
    pool.sort(key=lambda img: -by_class[img.wordnet_id].mean_nsfw_train)
    return [
        SurveyItem(
            item_id=item_id_for(img),
            image=img,
            class_label=by_class[img.wordnet_id].label,
            mean_nsfw_train=by_class[img.wordnet_id].mean_nsfw_train,
        )
        for img in pool
    ]


class Survey:
    """Mutable survey state with write-serialized label submission."""

    def __init__(
        self,
        items: Sequence[SurveyItem],
        quorum: int = DEFAULT_QUORUM,
        log_sink: IO | None = None,
        categories: Sequence[str] = CATEGORIES,
    ) -> None:
        if quorum < 1:
            raise ValueError(f"quorum must be positive, got {quorum}")
        self.quorum = quorum
        self.categories = tuple(categories)
        self._order = [item.item_id for item in items]
        self._items = {item.item_id: item for item in items}
        if len(self._items) != len(items):
            raise ValueError("duplicate item ids in queue")
        self._labels: dict[str, dict[str, str]] = {i: {} for i in self._order}
        self._events: list[AnnotationEvent] = []
        self._log_sink = log_sink
        self._write_lock = threading.Lock()

    # -- read side ---------------------------------------------------------

    def attach_log(self, sink: IO | None) -> None:
        """Direct future events to ``sink``; already-applied events are not rewritten."""
        with self._write_lock:
            self._log_sink = sink

    def items(self) -> list[SurveyItem]:
        return [self._items[i] for i in self._order]

    def get_item(self, item_id: str) -> SurveyItem:
        try:
            return self._items[item_id]
        except KeyError:
            raise UnknownItem(item_id) from None

    def live_labels(self, item_id: str) -> dict[str, str]:
        return dict(self._labels[self.get_item(item_id).item_id])

    def next_item(self, annotator_id: str) -> SurveyItem | None:
        if not annotator_id:
            raise ValueError("annotator id must be non-empty")
        for item_id in self._order:
            item = self._items[item_id]
            if item.status == OPEN and annotator_id not in self._labels[item_id]:
                return item
        return None

    def progress(self) -> dict:
        status_counts = {OPEN: 0, CONSENSUS: 0, EXHAUSTED: 0}
        for item in self._items.values():
            status_counts[item.status] += 1
        annotators: dict[str, int] = {}
        for labels in self._labels.values():
            for annotator in labels:
                annotators[annotator] = annotators.get(annotator, 0) + 1
        by_category = {c: 0 for c in self.categories if c != NONE_CATEGORY}
        for record in self.consensus_records():
            by_category[record.category] += 1
        return {
            "items": {"total": len(self._items), **status_counts},
            "annotators": dict(sorted(annotators.items())),
            "consensus_by_category": by_category,
            "events": len(self._events),
        }

    def consensus_records(self) -> list[ConsensusRecord]:
        records = []
        for item_id in self._order:
            item = self._items[item_id]
            if item.status != CONSENSUS:
                continue
            labels = self._labels[item_id]
            category = next(iter(labels.values()))
            records.append(
                ConsensusRecord(
                    item_id=item_id, category=category, n_annotators=len(labels)
                )
            )
        return records

    def events(self) -> list[AnnotationEvent]:
        return list(self._events)

    # -- write side ----------------------------------------------------------

    def submit_label(
        self, annotator_id: str, item_id: str, category: str, timestamp: str = ""
    ) -> SurveyItem:
        """Record a label; closes the item when unanimity meets quorum.

        The event reaches the log before state changes, and the whole step
        holds the write lock, so two racing quorum-reaching submissions
        resolve in log order.
        """
        if not annotator_id:
            raise ValueError("annotator id must be non-empty")
        if category not in self.categories:
            raise ValueError(f"unknown category {category!r}")
        with self._write_lock:
            item = self.get_item(item_id)
            if item.status != OPEN:
                raise ItemClosed(item_id, item.status)
            event = AnnotationEvent(
                annotator_id=annotator_id,
                item_id=item_id,
                category=category,
                timestamp=timestamp,
            )
            if self._log_sink is not None:
                self._log_sink.write(event.to_json() + "\n")
                self._log_sink.flush()
            self._events.append(event)
            self._labels[item_id][annotator_id] = category
            labels = self._labels[item_id]
            votes = set(labels.values())
            if len(labels) >= self.quorum and len(votes) == 1:
                status = EXHAUSTED if category == NONE_CATEGORY else CONSENSUS
                item = replace(item, status=status)
                self._items[item_id] = item
            return item


def replay(
    items: Sequence[SurveyItem],
    events: Iterable[AnnotationEvent],
    quorum: int = DEFAULT_QUORUM,
    log_sink: IO | None = None,
) -> Survey:
    """Rebuild survey state by re-submitting logged events in order."""
    fresh = [replace(item, status=OPEN) for item in items]
    survey = Survey(fresh, quorum=quorum, log_sink=log_sink)
    for event in events:
        survey.submit_label(
            event.annotator_id, event.item_id, event.category, event.timestamp
        )
    return survey


def load_events(source) -> list[AnnotationEvent]:
    from .ingest import _text_source

    events = []
    with _text_source(source) as stream:
        for line in stream:
            line = line.strip()
            if line:
                events.append(AnnotationEvent.from_json(line))
    return events


EXPORT_COLUMNS = ("wordnet_id", "label", "mean_nsfw_train", "category", "file_names")


def export_survey(
    records: Sequence[ConsensusRecord], items: Mapping[str, SurveyItem]
) -> str:
    """The hand-survey table: one row per consensus image.

    Sorted by (wordnet_id, category, file name); scores are the class-level
    train means carried by the queue items.
    """
    rows = []
    for record in records:
        item = items[record.item_id]
        rows.append(
            (
                item.image.wordnet_id,
                item.class_label,
                item.mean_nsfw_train,
                record.category,
                item.image.file_name,
            )
        )
    rows.sort(key=lambda r: (r[0], r[3], r[4]))
    out = io.StringIO()
    out.write(",".join(EXPORT_COLUMNS) + "\n")
    for wid, label, mean, category, file_name in rows:
        out.write(
            ",".join(
                (
                    wid,
                    csv_field(label),
                    fmt_float(mean),
                    category,
                    csv_field(file_name),
                )
            )
            + "\n"
        )
    return out.getvalue()
