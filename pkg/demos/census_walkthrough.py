"""
Counting the people in an image dataset
=======================================

Walks the face-census half of the toolkit over the small synthetic bundle
that ships with the test suite: parse the per-face annotations, aggregate
them into per-class demographics, and compare what two detection models
agree on.  Run from the repository root:

    python3 demos/census_walkthrough.py
"""

from pathlib import Path

from imagecensus import census, ingest, nsfw, stats

BUNDLE = Path(__file__).resolve().parent.parent / "tests" / "data" / "fixture"

# Every annotation file is a plain CSV with a pinned header.  parse_faces
# validates as it streams: gender scores must sit in [0, 1], ages must be
# non-negative, the split column must be train/val.
faces = ingest.parse_faces(str(BUNDLE / "faces_dex.csv"), model="dex")
print(f"{len(faces)} face annotations from the dex model")
print("first row:", faces[0])
print()

# The census needs to know how many images each class has in total,
# including the ones where no face was found.  Here the NSFW scores file
# covers every image, so class sizes fall out of it.
annotations = ingest.parse_nsfw(str(BUNDLE / "nsfw.csv"))
sizes: dict[str, list[int]] = {}
for a in annotations:
    counts = sizes.setdefault(a.image.wordnet_id, [0, 0])
    counts[0 if a.image.split == "train" else 1] += 1
sizes = {wid: (n_train, n_val) for wid, (n_train, n_val) in sizes.items()}
print(f"{len(sizes)} classes, e.g. {next(iter(sorted(sizes.items())))}")
print()

# One census row per class: image counts, person counts, the face-bearing
# fraction eta, mean gender mu, gender skewness xi, and age means under
# two normalizations (per image vs per face-bearing image).
rows = census.compute_class_census(faces, sizes, model="dex", split="train")
print("class".ljust(12), "images", "faced", "persons", " eta", "   mu", "  age")
for row in rows[:6]:
    mu = "-" if row.mu is None else f"{row.mu:.3f}"
    print(
        row.wordnet_id.ljust(12),
        f"{row.n_images:6d}",
        f"{row.n_face_images:5d}",
        f"{row.n_persons:7d}",
        f"{row.eta:.2f}",
        mu.rjust(6),
        f"{row.alpha_facewise:5.1f}",
    )
print()

# A second model over the same images gives a sanity check: if the two
# detectors tell very different stories, neither should be trusted alone.
faces_if = ingest.parse_faces(str(BUNDLE / "faces_insightface.csv"), model="insightface")
rows_if = census.compute_class_census(faces_if, sizes, model="insightface", split="train")
report = census.compare_models(rows, rows_if)
print(
    f"cross-model agreement over {report.n_classes} classes: "
    f"r_eta={report.r_eta:.3f} r_xi={report.r_xi:.3f} r_alpha={report.r_alpha:.3f}"
)
print()

# The same images also carry NSFW scores; the per-class training means are
# what the downstream shortlist clusters on.
nsfw_rows = nsfw.class_nsfw_stats(annotations, set(sizes))
worst = sorted(nsfw_rows, key=lambda r: -r.mean_nsfw_train)[:5]
print("highest mean training NSFW score:")
for r in worst:
    print(f"  {r.wordnet_id}  {r.mean_nsfw_train:.3f}")

# And the statistics kernel is available on its own for ad-hoc questions.
scores = [r.mean_nsfw_train for r in nsfw_rows]
print()
print(f"NSFW score spread across classes: mean={stats.mean(scores):.3f}",
      f"std={stats.pstdev(scores):.3f}")
