"""Survey queue, consensus state machine, event log, replay, and export."""

from __future__ import annotations

import io
import random

import pytest

from imagecensus import survey
from imagecensus.errors import EmptyShortlist, ItemClosed, UnknownItem
from imagecensus.nsfw import Shortlist, ShortlistClass
from imagecensus.records import ImageKey
from imagecensus.survey import (
    CATEGORIES,
    CONSENSUS,
    EXHAUSTED,
    OPEN,
    AnnotationEvent,
    Survey,
    build_queue,
    export_survey,
    load_events,
    replay,
)

from .corpus import hand_survey_fixture

WID_A, WID_B = "n02000001", "n02000002"


def img(wid: str, name: str, split: str = "train") -> ImageKey:
    return ImageKey(wordnet_id=wid, split=split, file_name=name)


def shortlist(images, means={WID_A: 0.9, WID_B: 0.5}) -> Shortlist:
    classes = tuple(
        ShortlistClass(
            wordnet_id=wid,
            label=f"label {wid}",
            mean_gender=0.2,
            mean_age=25.0,
            mean_nsfw_train=mean,
        )
        for wid, mean in sorted(means.items())
    )
    return Shortlist(cluster_id=0, classes=classes, images=tuple(images))


def fresh(n: int = 3, quorum: int = 3, log_sink=None) -> Survey:
    images = [img(WID_A, f"a{i}.JPEG") for i in range(n)]
    return Survey(build_queue(shortlist(images)), quorum=quorum, log_sink=log_sink)


class TestBuildQueue:
    def test_three_images_three_open_items(self):
        items = build_queue(shortlist([img(WID_A, f"{i}.JPEG") for i in range(3)]))
        assert len(items) == 3
        assert all(item.status == OPEN for item in items)

    def test_duplicate_image_collapses(self):
        one = img(WID_A, "same.JPEG")
        items = build_queue(shortlist([one, one]))
        assert len(items) == 1

    def test_severity_then_image_order(self):
        images = [img(WID_B, "b1.JPEG"), img(WID_A, "a2.JPEG"), img(WID_A, "a1.JPEG")]
        items = build_queue(shortlist(images))
        assert [i.image.file_name for i in items] == ["a1.JPEG", "a2.JPEG", "b1.JPEG"]

    def test_item_id_shape(self):
        (item,) = build_queue(shortlist([img(WID_A, "x.JPEG", split="val")]))
        assert item.item_id == f"{WID_A}/val/x.JPEG"

    def test_class_fields_carried(self):
        (item,) = build_queue(shortlist([img(WID_B, "x.JPEG")]))
        assert item.class_label == f"label {WID_B}"
        assert item.mean_nsfw_train == 0.5

    def test_unlisted_class_images_ignored(self):
        images = [img(WID_A, "a.JPEG"), img("n09999999", "ghost.JPEG")]
        items = build_queue(shortlist(images))
        assert [i.image.wordnet_id for i in items] == [WID_A]

    def test_empty_shortlist(self):
        with pytest.raises(EmptyShortlist):
            build_queue(shortlist([]))
        with pytest.raises(EmptyShortlist):
            build_queue(Shortlist(cluster_id=0, classes=(), images=(img(WID_A, "a"),)))


class TestSubmission:
    def test_unanimous_quorum_reaches_consensus(self):
        s = fresh()
        item_id = s.items()[0].item_id
        for annotator in ("p", "q", "r"):
            item = s.submit_label(annotator, item_id, "beach_voyeur")
        assert item.status == CONSENSUS
        (record,) = s.consensus_records()
        assert record.category == "beach_voyeur"
        assert record.n_annotators == 3

    def test_disagreement_stays_open(self):
        s = fresh()
        item_id = s.items()[0].item_id
        s.submit_label("p", item_id, "upskirt")
        s.submit_label("q", item_id, "upskirt")
        item = s.submit_label("r", item_id, "none_of_these")
        assert item.status == OPEN
        assert s.consensus_records() == []

    def test_submit_to_closed_item(self):
        s = fresh(quorum=1)
        item_id = s.items()[0].item_id
        s.submit_label("p", item_id, "upskirt")
        with pytest.raises(ItemClosed):
            s.submit_label("q", item_id, "upskirt")

    def test_unanimous_none_exhausts(self):
        s = fresh()
        item_id = s.items()[0].item_id
        for annotator in ("p", "q", "r"):
            item = s.submit_label(annotator, item_id, "none_of_these")
        assert item.status == EXHAUSTED
        assert s.consensus_records() == []

    def test_resubmission_supersedes(self):
        s = fresh()
        item_id = s.items()[0].item_id
        s.submit_label("p", item_id, "beach_voyeur")
        s.submit_label("q", item_id, "upskirt")
        s.submit_label("p", item_id, "upskirt")
        item = s.submit_label("r", item_id, "upskirt")
        assert item.status == CONSENSUS
        assert s.live_labels(item_id) == {"p": "upskirt", "q": "upskirt", "r": "upskirt"}

    def test_identical_resubmission_idempotent(self):
        s = fresh()
        item_id = s.items()[0].item_id
        s.submit_label("p", item_id, "upskirt")
        s.submit_label("p", item_id, "upskirt")
        assert s.live_labels(item_id) == {"p": "upskirt"}
        assert len(s.events()) == 2  # the log still records both

    def test_unknown_item(self):
        with pytest.raises(UnknownItem):
            fresh().submit_label("p", "no/such/item", "upskirt")

    def test_unknown_category(self):
        s = fresh()
        with pytest.raises(ValueError):
            s.submit_label("p", s.items()[0].item_id, "not_a_category")

    def test_empty_annotator(self):
        s = fresh()
        with pytest.raises(ValueError):
            s.submit_label("", s.items()[0].item_id, "upskirt")

    def test_quorum_one_closes_immediately(self):
        s = fresh(quorum=1)
        item = s.submit_label("p", s.items()[0].item_id, "beach_voyeur")
        assert item.status == CONSENSUS

    def test_bad_quorum(self):
        with pytest.raises(ValueError):
            fresh(quorum=0)

    def test_duplicate_item_ids_rejected(self):
        items = build_queue(shortlist([img(WID_A, "a.JPEG")]))
        with pytest.raises(ValueError):
            Survey(items + items)


class TestNextItem:
    def test_queue_order_per_annotator(self):
        s = fresh(n=2)
        first = s.next_item("p")
        assert first == s.items()[0]
        s.submit_label("p", first.item_id, "upskirt")
        assert s.next_item("p") == s.items()[1]
        # q has labeled nothing, so q still starts at the front
        assert s.next_item("q") == s.items()[0]

    def test_exhausted_for_annotator(self):
        s = fresh(n=2)
        for item in s.items():
            s.submit_label("p", item.item_id, "upskirt")
        assert s.next_item("p") is None

    def test_closed_items_served_to_nobody(self):
        s = fresh(n=2, quorum=1)
        s.submit_label("p", s.items()[0].item_id, "upskirt")
        assert s.next_item("q").item_id == s.items()[1].item_id

    def test_empty_annotator_id(self):
        with pytest.raises(ValueError):
            fresh().next_item("")


class TestEventLog:
    def test_jsonl_round_trip(self):
        event = AnnotationEvent("p", "n1/train/x.JPEG", "upskirt", "2020-06-01T00:00:00Z")
        line = event.to_json()
        assert "\n" not in line
        assert AnnotationEvent.from_json(line) == event

    def test_load_events_skips_blank_lines(self):
        event = AnnotationEvent("p", "i", "upskirt", "t")
        text = event.to_json() + "\n\n" + event.to_json() + "\n"
        assert load_events(io.StringIO(text)) == [event, event]

    def test_log_written_before_state_changes(self):
        class ExplodingSink:
            def write(self, _):
                raise OSError("disk full")

        s = fresh(log_sink=ExplodingSink())
        item_id = s.items()[0].item_id
        with pytest.raises(OSError):
            s.submit_label("p", item_id, "upskirt")
        assert s.live_labels(item_id) == {}
        assert s.events() == []
        assert s.get_item(item_id).status == OPEN

    def test_attach_log_covers_only_future_events(self):
        s = fresh()
        s.submit_label("p", s.items()[0].item_id, "upskirt")
        sink = io.StringIO()
        s.attach_log(sink)
        s.submit_label("q", s.items()[0].item_id, "upskirt")
        lines = sink.getvalue().splitlines()
        assert len(lines) == 1
        assert AnnotationEvent.from_json(lines[0]).annotator_id == "q"


def exported(s: Survey) -> str:
    return export_survey(s.consensus_records(), {i.item_id: i for i in s.items()})


class TestReplay:
    def test_fixture_counts(self):
        items, events = hand_survey_fixture()
        log = "".join(e.to_json() + "\n" for e in events)
        s = replay(items, load_events(io.StringIO(log)))
        records = s.consensus_records()
        assert len(records) == 61
        by_status = {OPEN: 0, CONSENSUS: 0, EXHAUSTED: 0}
        for item in s.items():
            by_status[item.status] += 1
        assert by_status == {OPEN: 3, CONSENSUS: 61, EXHAUSTED: 2}
        flagged = [
            r
            for r in records
            if r.item_id.startswith("n02837789/") and r.category == "beach_voyeur"
        ]
        assert len(flagged) == 24

    def test_fixture_export_is_replayable_byte_identical(self):
        items, events = hand_survey_fixture()
        log = io.StringIO()
        live = Survey(items, log_sink=log)
        for e in events:
            live.submit_label(e.annotator_id, e.item_id, e.category, e.timestamp)
        rebuilt = replay(items, load_events(io.StringIO(log.getvalue())))
        assert exported(rebuilt) == exported(live)

    def test_randomized_sequences_replay_identically(self):
        rng = random.Random(20260815)
        for _ in range(150):
            n_items = rng.randint(1, 6)
            quorum = rng.randint(1, 4)
            images = [img(WID_A, f"a{i}.JPEG") for i in range(n_items)]
            items = build_queue(shortlist(images))
            log = io.StringIO()
            live = Survey(items, quorum=quorum, log_sink=log)
            for step in range(rng.randint(0, 40)):
                annotator = f"a{rng.randint(1, 5)}"
                target = rng.choice(items).item_id
                category = rng.choice(CATEGORIES)
                try:
                    live.submit_label(annotator, target, category, f"t{step}")
                except ItemClosed:
                    continue  # races against closure serialize as rejections
            rebuilt = replay(
                items, load_events(io.StringIO(log.getvalue())), quorum=quorum
            )
            assert exported(rebuilt) == exported(live)
            assert [i.status for i in rebuilt.items()] == [
                i.status for i in live.items()
            ]
            for item in live.items():
                labels = live.live_labels(item.item_id)
                votes = set(labels.values())
                closed = len(labels) >= quorum and len(votes) == 1
                if closed and votes == {"none_of_these"}:
                    assert item.status == EXHAUSTED
                elif closed:
                    assert item.status == CONSENSUS
                else:
                    assert item.status == OPEN


class TestProgress:
    def test_counts(self):
        s = fresh(n=3)
        first, second, _ = [item.item_id for item in s.items()]
        for annotator in ("p", "q", "r"):
            s.submit_label(annotator, first, "upskirt")
        s.submit_label("p", second, "beach_voyeur")
        progress = s.progress()
        assert progress["items"] == {
            "total": 3,
            OPEN: 2,
            CONSENSUS: 1,
            EXHAUSTED: 0,
        }
        assert progress["annotators"] == {"p": 2, "q": 1, "r": 1}
        assert progress["consensus_by_category"]["upskirt"] == 1
        assert progress["consensus_by_category"]["beach_voyeur"] == 0
        assert progress["events"] == 4


class TestExport:
    def test_empty_consensus_header_only(self):
        assert exported(fresh()) == "wordnet_id,label,mean_nsfw_train,category,file_names\n"

    def test_single_record_layout(self):
        images = [img("n03770439", "n03770439_10283.JPEG")]
        classes = (
            ShortlistClass(
                wordnet_id="n03770439",
                label="miniskirt, mini",
                mean_gender=0.19,
                mean_age=27.0,
                mean_nsfw_train=0.619425,
            ),
        )
        items = build_queue(Shortlist(cluster_id=0, classes=classes, images=tuple(images)))
        s = Survey(items)
        for annotator in ("p", "q", "r"):
            s.submit_label(annotator, items[0].item_id, "upskirt")
        assert exported(s).splitlines()[1] == (
            'n03770439,"miniskirt, mini",0.619425,upskirt,n03770439_10283.JPEG'
        )

    def test_sorted_by_class_category_file(self):
        items, events = hand_survey_fixture()
        s = replay(items, events)
        rows = [line.split(",")[0] for line in exported(s).splitlines()[1:]]
        keys = [
            (r.item_id.split("/")[0], r.category, r.item_id.split("/")[2])
            for r in s.consensus_records()
        ]
        assert rows == [k[0] for k in sorted(keys)]
