"""
From raw annotation CSVs to a finished audit card
=================================================

Runs the whole pipeline through the command-line entry point, the same way
a shell invocation of `audit all` would, then pokes at the rendered
outputs.  The audit card is a single HTML page plus SVG panels and a JSON
summary, meant to travel alongside the dataset it describes.

    python3 demos/audit_card_walkthrough.py
"""

import json
import tempfile
from pathlib import Path

from imagecensus.cli import main

BUNDLE = Path(__file__).resolve().parent.parent / "tests" / "data" / "fixture"

out_dir = Path(tempfile.mkdtemp(prefix="audit_card_"))

# `all` chains every stage: census, NSFW stats, clustering + shortlist,
# semantic map, co-occurrence bias tables, label screening, accuracy, and
# finally the card.  Each stage logs one line per artifact to stderr.
rc = main(["all", "--config", str(BUNDLE / "audit.toml"), "--out", str(out_dir)])
print(f"\naudit all -> exit code {rc}")
print(f"{len(list(out_dir.iterdir()))} files in {out_dir}")
print()

# The JSON summary is the machine-readable side of the card.
summary = json.loads((out_dir / "audit_card.json").read_text(encoding="utf-8"))
headline = {entry["stat"]: entry["value"] for entry in summary["headline"]}
print("card name:       ", summary["name"])
print("images with faces:", headline["images_with_faces"],
      f"(persons {headline['persons_low']}-{headline['persons_high']} across models)")
print("survey consensus:", summary["survey"]["by_category"])
print("watchlist hits:  ", {k: v["count"] for k, v in summary["watchlists"].items()})
print()

# The HTML embeds the three SVG panels by file name; everything is static.
html = (out_dir / "audit_card.html").read_text(encoding="utf-8")
for panel in ("panel_cag.svg", "panel_survey.svg", "panel_bias.svg"):
    print(f"{panel}: referenced={panel in html}, "
          f"{(out_dir / panel).stat().st_size} bytes on disk")
