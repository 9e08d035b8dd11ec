"""
Hand-labeling flagged images to a consensus
===========================================

Shows the human-review loop: cluster the per-class scores to shortlist the
worst classes, queue their images, let a few annotators vote, and export
the images that reached complete agreement.  Everything an annotator does
lands in an append-only JSONL log first, so the whole session can be
replayed later, byte for byte.

    python3 demos/survey_walkthrough.py
"""

import io
from pathlib import Path

from imagecensus import census, ingest, nsfw, survey
from imagecensus.affinity import affinity_propagation

BUNDLE = Path(__file__).resolve().parent.parent / "tests" / "data" / "fixture"

# Shortlisting needs the census (for per-class mean gender) and the NSFW
# stats (for per-class mean score); both come straight off the bundle.
faces = ingest.parse_faces(str(BUNDLE / "faces_dex.csv"), model="dex")
annotations = ingest.parse_nsfw(str(BUNDLE / "nsfw.csv"))
sizes: dict[str, tuple[int, int]] = {}
for a in annotations:
    n_train, n_val = sizes.get(a.image.wordnet_id, (0, 0))
    if a.image.split == "train":
        sizes[a.image.wordnet_id] = (n_train + 1, n_val)
    else:
        sizes[a.image.wordnet_id] = (n_train, n_val + 1)

census_rows = census.compute_class_census(faces, sizes, model="dex", split="train")
nsfw_rows = nsfw.class_nsfw_stats(annotations, set(sizes))

# Each class becomes a point (mean gender, mean NSFW); affinity propagation
# groups them and the cluster with the highest mean NSFW score is the
# shortlist.  No cluster count is chosen up front.
wids, points = nsfw.clustering_features(census_rows, nsfw_rows)
clustering = affinity_propagation(points)
print(f"{len(wids)} classes fell into {clustering.n_clusters} clusters")

labels = {c.wordnet_id: c.label for c in ingest.parse_class_index(str(BUNDLE / "classes.csv"))}
shortlist = nsfw.select_shortlist(
    census_rows, nsfw_rows, clustering,
    images=[a.image for a in annotations], labels=labels,
)
print(f"shortlisted: {[c.wordnet_id for c in shortlist.classes]}")
print(f"{len(shortlist.images)} images queued for review")
print()

# The queue orders images by class severity.  Three annotators work through
# the first items; a label is final only when at least `quorum` annotators
# agree unanimously.
items = survey.build_queue(shortlist)
log = io.StringIO()
s = survey.Survey(items, quorum=3, log_sink=log)

first, second = items[0].item_id, items[1].item_id
for who in ("ann_a", "ann_b", "ann_c"):
    s.submit_label(who, first, "beach_voyeur", timestamp="2026-08-15T10:00:00Z")
s.submit_label("ann_a", second, "none_of_these", timestamp="2026-08-15T10:01:00Z")
s.submit_label("ann_b", second, "upskirt", timestamp="2026-08-15T10:01:10Z")
# ann_b reconsiders; a resubmission replaces their earlier label
s.submit_label("ann_b", second, "none_of_these", timestamp="2026-08-15T10:01:40Z")
s.submit_label("ann_c", second, "none_of_these", timestamp="2026-08-15T10:02:00Z")

progress = s.progress()
print("progress:", progress["items"])
print("per annotator:", progress["annotators"])
print()

# The export carries only images with a positive consensus; the second item
# closed as none_of_these, so it stays out.
print(survey.export_survey(s.consensus_records(), {i.item_id: i for i in s.items()}))

# Replaying the log rebuilds the identical survey: same events, same export.
rebuilt = survey.replay(items, survey.load_events(io.StringIO(log.getvalue())), quorum=3)
match = survey.export_survey(
    rebuilt.consensus_records(), {i.item_id: i for i in rebuilt.items()}
)
print("replay reproduces the export:", match == survey.export_survey(
    s.consensus_records(), {i.item_id: i for i in s.items()}
))
