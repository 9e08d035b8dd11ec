"""The dataset audit card: one JSON document, one HTML page, three panels.

The JSON document is the single source of numbers; the HTML page only
formats values taken from it, and the three SVG panels are separate files
the page references.  Rendering the same inputs twice yields byte-identical
output; the only mutable element is an optional caller-supplied generation
date.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Mapping, Sequence

from . import svg
from .census import CensusTable, CrossModelReport, SummaryCounts
from .cooccurrence import GroupDistribution, SkewRankEntry
from .errors import MissingCensus
from .records import FACE_MODELS, SPLITS
from .survey import POSITIVE_CATEGORIES

FORMULAS = {
    "eta": "eta_c = n_face_images_c / n_images_c",
    "alpha": "alpha_c = sum(mean face age per face-bearing image) / n_images_c",
    "alpha_facewise": "alpha_facewise_c = sum(mean face age per face-bearing image) / n_face_images_c",
    "xi": "xi_c = sum(((g_i - mu_c) / sigma_c)^3) / n_images_c over face-bearing images i",
    "nsfw_score": "score(image) = p_hentai + p_porn + p_sexy",
}

PANEL_FILES = {
    "cag": "panel_cag.svg",
    "survey": "panel_survey.svg",
    "bias": "panel_bias.svg",
}


@dataclass(frozen=True)
class CardBundle:
    json_text: str
    html_text: str
    panels: Mapping[str, str]


def _fmt(value) -> str:
    """HTML number text, identical to the JSON serialization of the value."""
    if value is None:
        return "n/a"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_survey_csv(survey_csv: str) -> list[dict]:
    reader = csv.DictReader(io.StringIO(survey_csv))
    return list(reader)


def _headline(
    summary: SummaryCounts | None,
    survey_rows: list[dict] | None,
    watchlists: Mapping[str, Sequence[str]] | None,
) -> list[dict]:
    stats: list[dict] = []

    def stat(name: str, value, provenance: str) -> None:
        stats.append({"stat": name, "value": value, "provenance": provenance})

    if summary is not None and summary.counts:
        per_model = {}
        for model in summary.models():
            images = persons = 0
            age_sum_m = age_sum_w = 0.0
            men = women = 0
            for split in SPLITS:
                overall = summary.get(model, split, "overall")
                images += overall.n_images_with_faces
                persons += overall.n_persons
                men_c = summary.get(model, split, "men")
                women_c = summary.get(model, split, "women")
                men += men_c.n_persons
                women += women_c.n_persons
                age_sum_m += men_c.age_sum
                age_sum_w += women_c.age_sum
            per_model[model] = (images, persons, men, women, age_sum_m, age_sum_w)
        stat(
            "images_with_faces",
            max(v[0] for v in per_model.values()),
            "census.summarize_dataset",
        )
        stat(
            "persons_low",
            min(v[1] for v in per_model.values()),
            "census.summarize_dataset",
        )
        stat(
            "persons_high",
            max(v[1] for v in per_model.values()),
            "census.summarize_dataset",
        )
        richest = max(per_model, key=lambda m: (per_model[m][1], m))
        _, _, men, women, age_m, age_w = per_model[richest]
        stat(
            "mean_age_men",
            age_m / men if men else None,
            "census.summarize_dataset",
        )
        stat(
            "mean_age_women",
            age_w / women if women else None,
            "census.summarize_dataset",
        )
    if survey_rows is not None:
        stat("flagged_consensus_images", len(survey_rows), "survey.export_survey")
    if watchlists:
        for name, entries in sorted(watchlists.items()):
            stat(f"watchlist_{name}_classes", len(entries), "screening.load_watchlist")
    return stats


def _census_section(
    table: CensusTable,
    summary: SummaryCounts | None,
    cross_model: CrossModelReport | None,
) -> dict:
    section: dict = {"n_classes": len(table.rows), "n_columns": len(table.columns)}
    if summary is not None:
        rows = []
        for (model, split, cohort), count in sorted(summary.counts.items()):
            rows.append(
                {
                    "model": model,
                    "split": split,
                    "cohort": cohort,
                    "images_with_faces": count.n_images_with_faces,
                    "persons": count.n_persons,
                    "mean_age": count.mean_age,
                }
            )
        section["counts"] = rows
    if cross_model is not None:
        section["cross_model"] = {
            "r_eta": cross_model.r_eta,
            "r_xi": cross_model.r_xi,
            "r_alpha": cross_model.r_alpha,
            "n_classes": cross_model.n_classes,
        }
    return section


def _survey_section(survey_rows: list[dict] | None) -> dict:
    if survey_rows is None:
        return {"available": False}
    by_category = {c: 0 for c in POSITIVE_CATEGORIES}
    by_class: dict[str, int] = {}
    for row in survey_rows:
        by_category[row["category"]] = by_category.get(row["category"], 0) + 1
        by_class[row["wordnet_id"]] = by_class.get(row["wordnet_id"], 0) + 1
    return {
        "available": True,
        "total": len(survey_rows),
        "by_category": by_category,
        "by_class": dict(sorted(by_class.items())),
    }


def _bias_section(
    groups: Sequence[GroupDistribution] | None,
    ranking: Sequence[SkewRankEntry] | None,
) -> dict:
    if groups is None and ranking is None:
        return {"available": False}
    section: dict = {"available": True}
    if groups is not None:
        section["groups"] = [
            {
                "group": g.group,
                "n_classes": len(g.values),
                "mean": g.mean,
                "median": g.median,
                "std": g.std,
            }
            for g in groups
        ]
    if ranking is not None:
        section["ranking"] = [
            {"wordnet_id": e.wordnet_id, "label": e.label, "xi": e.xi}
            for e in ranking
        ]
    return section


def _pick_cag_points(table: CensusTable, flagged: set[str]) -> list[tuple]:
    for model in FACE_MODELS:
        xs = f"{model}_train_eta"
        ys = f"{model}_train_xi"
        points = [
            (row[xs], row[ys], row["wordnet_id"], row["wordnet_id"] in flagged)
            for row in table.rows
            if row.get(xs) is not None and row.get(ys) is not None
        ]
        if points:
            return points
    return []


def _render_panels(
    table: CensusTable,
    survey_section: dict,
    groups: Sequence[GroupDistribution] | None,
) -> dict[str, str]:
    flagged = set(survey_section.get("by_class", ()))
    cag_points = _pick_cag_points(table, flagged)
    if cag_points:
        cag = svg.render_scatter(
            cag_points,
            svg.AxesSpec(
                title="Per-class face presence vs gender skew",
                x_label="eta (fraction of images with faces)",
                y_label="xi (gender skewness)",
            ),
        )
    else:
        cag = svg.render_placeholder(
            "Per-class face presence vs gender skew", "not computed"
        )

    if survey_section.get("available"):
        bars = [
            (category.replace("_", " "), float(survey_section["by_category"][category]))
            for category in POSITIVE_CATEGORIES
        ]
        panel_survey = svg.render_bars(
            bars,
            svg.AxesSpec(
                title="Hand-survey consensus by category",
                x_label="category",
                y_label="consensus images",
            ),
        )
    else:
        panel_survey = svg.render_placeholder(
            "Hand-survey consensus by category", "not computed"
        )

    if groups:
        panel_bias = svg.render_violins(
            [(g.group, g.values) for g in groups],
            svg.AxesSpec(
                title="Mean gender score by class group",
                x_label="group",
                y_label="class mean gender score",
            ),
        )
    else:
        panel_bias = svg.render_placeholder(
            "Mean gender score by class group", "not computed"
        )
    return {"cag": cag, "survey": panel_survey, "bias": panel_bias}


def render_audit_card(
    table: CensusTable,
    summary: SummaryCounts | None = None,
    cross_model: CrossModelReport | None = None,
    survey_csv: str | None = None,
    bias_groups: Sequence[GroupDistribution] | None = None,
    bias_ranking: Sequence[SkewRankEntry] | None = None,
    watchlists: Mapping[str, Sequence[str]] | None = None,
    name: str = "dataset",
    generated: str | None = None,
) -> CardBundle:
    """Assemble the audit card from whatever sections were computed.

    Only the census table is mandatory; absent sections render as "not
    computed" rather than disappearing, so a card always has the same shape.
    """
    if table is None or not table.rows:
        raise MissingCensus()

    survey_rows = _parse_survey_csv(survey_csv) if survey_csv is not None else None
    survey_section = _survey_section(survey_rows)
    doc = {
        "name": name,
        "generated": generated,
        "formulas": FORMULAS,
        "headline": _headline(summary, survey_rows, watchlists),
        "census": _census_section(table, summary, cross_model),
        "survey": survey_section,
        "bias": _bias_section(bias_groups, bias_ranking),
        "watchlists": {
            key: {"count": len(entries), "entries": list(entries)}
            for key, entries in sorted((watchlists or {}).items())
        },
        "panels": PANEL_FILES,
    }
    panels = _render_panels(table, survey_section, bias_groups)
    html = _render_html(doc)
    json_text = json.dumps(doc, indent=2) + "\n"
    return CardBundle(json_text=json_text, html_text=html, panels=panels)


# ---------------------------------------------------------------------------
# HTML assembly

_PAGE_STYLE = """
body { font-family: sans-serif; margin: 2rem auto; max-width: 60rem; color: #222; }
h1 { border-bottom: 2px solid #444; padding-bottom: 0.3rem; }
h2 { margin-top: 2rem; color: #333; }
table { border-collapse: collapse; margin: 1rem 0; }
th, td { border: 1px solid #bbb; padding: 0.3rem 0.7rem; text-align: left; }
th { background: #eee; }
.stat { display: inline-block; margin: 0.5rem 1rem 0.5rem 0; padding: 0.6rem 1rem;
        background: #f4f6f8; border: 1px solid #ccd; border-radius: 4px; }
.stat b { display: block; font-size: 1.4rem; }
.absent { color: #888; font-style: italic; }
code { background: #f3f3f3; padding: 0.1rem 0.3rem; }
img { max-width: 100%; border: 1px solid #ddd; margin: 0.5rem 0; }
""".strip()


def _html_escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )


def _render_html(doc: dict) -> str:
    out: list[str] = []
    w = out.append
    w("<!DOCTYPE html>")
    w('<html lang="en">')
    w("<head>")
    w('<meta charset="utf-8">')
    w(f"<title>{_html_escape(doc['name'])} audit card</title>")
    w(f"<style>{_PAGE_STYLE}</style>")
    w("</head>")
    w("<body>")
    w(f"<h1>{_html_escape(doc['name'])} audit card</h1>")
    if doc["generated"]:
        w(f'<p id="generated">generated {_html_escape(doc["generated"])}</p>')

    w("<h2>Headline census statistics</h2>")
    if doc["headline"]:
        w("<div>")
        for stat in doc["headline"]:
            w(
                f'<span class="stat"><b>{_fmt(stat["value"])}</b>'
                f'{_html_escape(stat["stat"].replace("_", " "))}</span>'
            )
        w("</div>")
    else:
        w('<p class="absent">not computed</p>')

    w("<h2>Metric definitions</h2>")
    w("<ul>")
    for formula in doc["formulas"].values():
        w(f"<li><code>{_html_escape(formula)}</code></li>")
    w("</ul>")

    census = doc["census"]
    w("<h2>Census</h2>")
    w(
        f'<p>Census table covers <b>{_fmt(census["n_classes"])}</b> classes × '
        f'<b>{_fmt(census["n_columns"])}</b> columns.</p>'
    )
    if "counts" in census:
        w("<table>")
        w(
            "<tr><th>model</th><th>split</th><th>cohort</th>"
            "<th>images with faces</th><th>persons</th><th>mean age</th></tr>"
        )
        for row in census["counts"]:
            w(
                f'<tr><td>{_html_escape(row["model"])}</td>'
                f'<td>{_html_escape(row["split"])}</td>'
                f'<td>{_html_escape(row["cohort"])}</td>'
                f'<td>{_fmt(row["images_with_faces"])}</td>'
                f'<td>{_fmt(row["persons"])}</td>'
                f'<td>{_fmt(row["mean_age"])}</td></tr>'
            )
        w("</table>")
    if "cross_model" in census:
        cm = census["cross_model"]
        w(
            f'<p>Cross-model agreement over <b>{_fmt(cm["n_classes"])}</b> classes: '
            f'r(eta) = <b>{_fmt(cm["r_eta"])}</b>, '
            f'r(xi) = <b>{_fmt(cm["r_xi"])}</b>, '
            f'r(alpha) = <b>{_fmt(cm["r_alpha"])}</b>.</p>'
        )
    w(f'<img src="{PANEL_FILES["cag"]}" alt="per-class face presence versus gender skew">')

    w("<h2>Hand survey</h2>")
    survey = doc["survey"]
    if survey.get("available"):
        w(f'<p>Consensus images: <b>{_fmt(survey["total"])}</b>.</p>')
        w("<table>")
        w("<tr><th>category</th><th>consensus images</th></tr>")
        for category in POSITIVE_CATEGORIES:
            w(
                f"<tr><td>{_html_escape(category.replace('_', ' '))}</td>"
                f'<td>{_fmt(survey["by_category"].get(category, 0))}</td></tr>'
            )
        w("</table>")
    else:
        w('<p class="absent">not computed</p>')
    w(f'<img src="{PANEL_FILES["survey"]}" alt="hand-survey consensus by category">')

    w("<h2>Co-occurrence bias</h2>")
    bias = doc["bias"]
    if bias.get("available"):
        if "groups" in bias:
            w("<table>")
            w(
                "<tr><th>group</th><th>classes</th><th>mean</th>"
                "<th>median</th><th>std</th></tr>"
            )
            for group in bias["groups"]:
                w(
                    f'<tr><td>{_html_escape(group["group"])}</td>'
                    f'<td>{_fmt(group["n_classes"])}</td>'
                    f'<td>{_fmt(group["mean"])}</td>'
                    f'<td>{_fmt(group["median"])}</td>'
                    f'<td>{_fmt(group["std"])}</td></tr>'
                )
            w("</table>")
        if "ranking" in bias:
            w("<table>")
            w("<tr><th>class</th><th>label</th><th>gender skewness</th></tr>")
            for entry in bias["ranking"]:
                w(
                    f'<tr><td>{_html_escape(entry["wordnet_id"])}</td>'
                    f'<td>{_html_escape(entry["label"])}</td>'
                    f'<td>{_fmt(entry["xi"])}</td></tr>'
                )
            w("</table>")
    else:
        w('<p class="absent">not computed</p>')
    w(f'<img src="{PANEL_FILES["bias"]}" alt="mean gender score by class group">')

    if doc["watchlists"]:
        w("<h2>Watchlists</h2>")
        for key, watchlist in doc["watchlists"].items():
            w(
                f'<p><b>{_fmt(watchlist["count"])}</b> classes on the '
                f"{_html_escape(key)} watchlist:</p>"
            )
            w("<ul>")
            for entry in watchlist["entries"]:
                w(f"<li>{_html_escape(entry)}</li>")
            w("</ul>")

    w("</body>")
    w("</html>")
    return "\n".join(out) + "\n"
