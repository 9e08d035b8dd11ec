"""``audit``: drive the pipeline from the command line.

Each subcommand recomputes its inputs from the raw CSVs rather than reading
another stage's output files, so any stage can run on its own and ``audit
all`` emits byte-identical files to running the stages one at a time.

Class sizes (images per class and split) are counted from the NSFW score
file, which is the one input that covers every image in the dataset; the
class-index file carries only ids and labels.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import IO, Sequence

from . import accuracy as accuracy_mod
from . import card as card_mod
from . import census as census_mod
from . import cooccurrence, ingest, nsfw, screening, semanticity, survey
from .affinity import affinity_propagation
from .config import PATH_KEYS, AuditConfig, load_config
from .errors import AuditError, UnknownClass
from .records import FACE_MODELS, PREDICTION_MODELS, ClassInfo

log = logging.getLogger("audit")


# ---------------------------------------------------------------------------
# input loading

def _parse(path: Path, parser, what: str, **kwargs):
    try:
        records = parser(str(path), **kwargs)
    except AuditError as exc:
        raise AuditError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise AuditError(f"{path}: {exc.strerror or exc}") from exc
    log.info("%s: %d rows from %s", what, len(records), path)
    return records


def _load_faces(cfg: AuditConfig):
    sources = [
        ("faces", None),
        ("faces_dex", "dex"),
        ("faces_insightface", "insightface"),
    ]
    faces = []
    seen = False
    for key, model in sources:
        path = cfg.path(key)
        if path is None:
            continue
        seen = True
        faces.extend(_parse(path, ingest.parse_faces, f"faces[{key}]", model=model))
    if not seen:
        raise AuditError("no face annotations configured (paths.faces*)")
    return faces


def _load_classes(cfg: AuditConfig) -> list[ClassInfo]:
    return _parse(cfg.require_path("class_index"), ingest.parse_class_index, "classes")


def _load_nsfw(cfg: AuditConfig):
    return _parse(cfg.require_path("nsfw"), ingest.parse_nsfw, "nsfw scores")


def _class_sizes(
    cfg: AuditConfig, classes: Sequence[ClassInfo], annotations=None
) -> dict[str, tuple[int, int]]:
    """Images per (class, split), counted from the per-image NSFW score file."""
    if annotations is None:
        annotations = _load_nsfw(cfg)
    counts: dict[str, list[int]] = {c.wordnet_id: [0, 0] for c in classes}
    for record in annotations:
        wid = record.image.wordnet_id
        if wid not in counts:
            raise UnknownClass(wid)
        counts[wid][0 if record.image.split == "train" else 1] += 1
    return {wid: (n[0], n[1]) for wid, n in counts.items()}


def _compute_census(cfg: AuditConfig, faces, sizes):
    """Census rows for every (model present, split) pair."""
    models = sorted({f.model for f in faces})
    result = {}
    for model in models:
        for split in ("train", "val"):
            result[(model, split)] = census_mod.compute_class_census(
                faces,
                sizes,
                model,
                split,
                gender_threshold=cfg.gender_threshold,
                threads=cfg.effective_threads,
            )
    return result


def _compute_nsfw_stats(cfg: AuditConfig, classes, annotations=None):
    if annotations is None:
        annotations = _load_nsfw(cfg)
    return nsfw.class_nsfw_stats(
        annotations, {c.wordnet_id for c in classes}, positive=cfg.nsfw_positive
    )


def _compute_coords(cfg: AuditConfig):
    """Semantic 2-d coordinates: precomputed file wins over the raw 300-d one."""
    precomputed = None
    raw = None
    path2d = cfg.path("embeddings_2d")
    if path2d is not None:
        precomputed = _parse(path2d, ingest.parse_embeddings, "embeddings[2d]")
    path300 = cfg.path("embeddings")
    if path300 is not None:
        raw = _parse(path300, ingest.parse_embeddings, "embeddings[raw]")
    return semanticity.attach_coordinates(precomputed, raw)


def _compute_shortlist(cfg: AuditConfig, classes, faces, annotations):
    sizes = _class_sizes(cfg, classes, annotations)
    census = _compute_census(cfg, faces, sizes)
    key = ("dex", "train")
    if key not in census:
        raise AuditError("shortlisting needs dex face annotations (train split)")
    stats = nsfw.class_nsfw_stats(
        annotations, set(sizes), positive=cfg.nsfw_positive
    )
    wids, points = nsfw.clustering_features(census[key], stats)
    clustering = affinity_propagation(
        points,
        preference=cfg.ap_preference,
        damping=cfg.ap_damping,
        max_iter=cfg.ap_max_iter,
        convergence_iter=cfg.ap_convergence_iter,
    )
    log.info(
        "clustering: %d classes into %d clusters (converged=%s, %d iterations)",
        len(wids),
        clustering.n_clusters,
        clustering.converged,
        clustering.n_iterations,
    )
    labels = {c.wordnet_id: c.label for c in classes}
    pool = [a.image for a in annotations]
    return nsfw.select_shortlist(
        census[key], stats, clustering, images=pool, labels=labels
    )


def _build_survey(cfg: AuditConfig):
    classes = _load_classes(cfg)
    faces = _load_faces(cfg)
    annotations = _load_nsfw(cfg)
    shortlist = _compute_shortlist(cfg, classes, faces, annotations)
    items = survey.build_queue(shortlist)
    log.info("survey queue: %d items across %d classes", len(items), len(shortlist.classes))
    return items


def _out_path(cfg: AuditConfig, name: str) -> Path:
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    return out / name


# ---------------------------------------------------------------------------
# stages

def _stage_validate(cfg: AuditConfig, lenient: bool) -> int:
    """Parse-check every configured input; returns the number of bad rows."""
    sink: list | None = [] if lenient else None
    checked = 0
    errors = 0

    def run(path, parser, what, **kwargs):
        nonlocal checked, errors
        if path is None:
            return
        checked += 1
        if sink is None:
            _parse(path, parser, what, **kwargs)
            return
        del sink[:]
        _parse(path, parser, what, error_sink=sink, **kwargs)
        for err in sink:
            errors += 1
            log.error("%s: %s", path, err)

    run(cfg.path("faces"), ingest.parse_faces, "faces")
    run(cfg.path("faces_dex"), ingest.parse_faces, "faces[dex]", model="dex")
    run(
        cfg.path("faces_insightface"),
        ingest.parse_faces,
        "faces[insightface]",
        model="insightface",
    )
    run(cfg.path("nsfw"), ingest.parse_nsfw, "nsfw scores")
    for model in PREDICTION_MODELS:
        run(
            cfg.path(f"predictions_{model}"),
            ingest.parse_predictions,
            f"predictions[{model}]",
            model=model,
        )
    run(cfg.path("embeddings"), ingest.parse_embeddings, "embeddings[raw]")
    run(cfg.path("embeddings_2d"), ingest.parse_embeddings, "embeddings[2d]")
    run(cfg.path("class_index"), ingest.parse_class_index, "classes")
    run(cfg.path("vocabulary"), ingest.parse_vocabulary, "vocabulary")

    # list-style inputs have no lenient mode; a malformed line is fatal
    for key, loader, what in (
        ("group_mapping", cooccurrence.load_group_mapping, "group mapping"),
        ("instruments", cooccurrence.load_labeled_subset, "instrument subset"),
        ("dog_survey", cooccurrence.load_dog_survey, "dog survey"),
    ):
        path = cfg.path(key)
        if path is not None:
            checked += 1
            _parse(path, loader, what)
    denylist_path = cfg.path("denylist")
    if denylist_path is not None:
        checked += 1
        _parse(
            denylist_path,
            lambda p: screening.load_watchlist("denylist", p),
            "denylist",
        )
    for name, path in sorted(cfg.watchlists.items()):
        checked += 1
        _parse(
            path, lambda p, n=name: screening.load_watchlist(n, p), f"watchlist[{name}]"
        )

    if checked == 0:
        raise AuditError("nothing to validate: no input paths configured")
    if errors:
        log.error("validate: %d bad rows", errors)
    return errors


def _stage_census(cfg: AuditConfig) -> None:
    classes = _load_classes(cfg)
    faces = _load_faces(cfg)
    annotations = _load_nsfw(cfg)
    sizes = _class_sizes(cfg, classes, annotations)
    census = _compute_census(cfg, faces, sizes)

    by_model: dict[str, dict[str, list]] = {}
    for (model, split), rows in census.items():
        by_model.setdefault(model, {})[split] = rows
    for model, rows_by_split in sorted(by_model.items()):
        dest = _out_path(cfg, f"df_{model}_stats.csv")
        census_mod.write_census_rows(rows_by_split, dest)
        log.info("census[%s]: wrote %s", model, dest)

    summary = census_mod.summarize_dataset(
        [row for rows in census.values() for row in rows],
        faces,
        gender_threshold=cfg.gender_threshold,
    )
    for model in sorted(by_model):
        for split in ("train", "val"):
            overall = summary.get(model, split, "overall")
            log.info(
                "census[%s/%s]: %d images with faces, %d persons",
                model,
                split,
                overall.n_images_with_faces,
                overall.n_persons,
            )
    if len(by_model) == 2:
        a, b = (census[(m, "train")] for m in FACE_MODELS)
        report = census_mod.compare_models(a, b)
        log.info(
            "cross-model agreement (train): r_eta=%.4f r_xi=%.4f r_alpha=%.4f",
            report.r_eta,
            report.r_xi,
            report.r_alpha,
        )

    nsfw_stats = _compute_nsfw_stats(cfg, classes, annotations)
    acc_rows = None
    preds = _load_predictions(cfg)
    if preds:
        acc_rows = accuracy_mod.topk_accuracy(preds)
    coords = None
    if cfg.path("embeddings") or cfg.path("embeddings_2d"):
        coords = _compute_coords(cfg)
    labels = {c.wordnet_id: c.label for c in classes}
    table = census_mod.assemble_census_table(
        census, nsfw_stats=nsfw_stats, accuracy=acc_rows, coords=coords, labels=labels
    )
    dest = _out_path(cfg, f"df_census_{cfg.name}.csv")
    table.write_csv(dest)
    table.write_sidecar(_out_path(cfg, f"df_census_{cfg.name}_columns.csv"))
    log.info("census table: %d classes x %d columns -> %s", len(table.rows), len(table.columns), dest)


def _load_predictions(cfg: AuditConfig):
    preds = []
    for model in PREDICTION_MODELS:
        path = cfg.path(f"predictions_{model}")
        if path is not None:
            preds.extend(
                _parse(path, ingest.parse_predictions, f"predictions[{model}]", model=model)
            )
    return preds


def _stage_nsfw(cfg: AuditConfig) -> None:
    classes = _load_classes(cfg)
    stats = _compute_nsfw_stats(cfg, classes)
    dest = _out_path(cfg, "df_nsfw.csv")
    nsfw.write_nsfw_stats(stats, dest)
    log.info("nsfw: %d classes -> %s", len(stats), dest)


def _stage_cluster(cfg: AuditConfig) -> None:
    classes = _load_classes(cfg)
    faces = _load_faces(cfg)
    annotations = _load_nsfw(cfg)
    shortlist = _compute_shortlist(cfg, classes, faces, annotations)
    dest = _out_path(cfg, "shortlist.csv")
    nsfw.write_shortlist(shortlist, dest)
    log.info(
        "shortlist: cluster %d, %d classes, %d images -> %s",
        shortlist.cluster_id,
        len(shortlist.classes),
        len(shortlist.images),
        dest,
    )


def _stage_semantics(cfg: AuditConfig) -> None:
    coords = _compute_coords(cfg)
    dest = _out_path(cfg, f"df_{cfg.name}_names_umap.csv")
    semanticity.write_coords(coords, dest)
    log.info("semantics: %d coordinates -> %s", len(coords), dest)
    if cfg.path("nsfw") is not None and cfg.path("class_index") is not None:
        classes = _load_classes(cfg)
        stats = _compute_nsfw_stats(cfg, classes)
        surface = semanticity.semantic_surface(coords, stats)
        dest = _out_path(cfg, "semantic_surface.csv")
        semanticity.write_surface(surface, dest)
        log.info("semantics: surface -> %s", dest)


def _census_for_bias(cfg: AuditConfig):
    classes = _load_classes(cfg)
    faces = _load_faces(cfg)
    sizes = _class_sizes(cfg, classes)
    census = _compute_census(cfg, faces, sizes)
    key = ("dex", "train")
    if key not in census:
        raise AuditError("bias reports need dex face annotations (train split)")
    return census[key]


def _stage_bias(cfg: AuditConfig) -> None:
    mapping_path = cfg.path("group_mapping")
    subset_path = cfg.path("instruments")
    if mapping_path is None and subset_path is None:
        raise AuditError(
            "bias stage needs paths.group_mapping and/or paths.instruments"
        )
    census_rows = _census_for_bias(cfg)
    if mapping_path is not None:
        mapping = _parse(mapping_path, cooccurrence.load_group_mapping, "group mapping")
        assignments = cooccurrence.assign_groups(mapping.keys(), mapping)
        groups = cooccurrence.group_gender_distributions(assignments, census_rows)
        dest = _out_path(cfg, "bias_groups.csv")
        cooccurrence.write_group_distributions(groups, dest)
        log.info("bias: %d groups -> %s", len(groups), dest)
    if subset_path is not None:
        subset = _parse(subset_path, cooccurrence.load_labeled_subset, "instrument subset")
        ranking = cooccurrence.skewness_ranking(subset, census_rows)
        dest = _out_path(cfg, "bias_ranking.csv")
        cooccurrence.write_skew_ranking(ranking, dest)
        log.info("bias: ranked %d classes -> %s", len(ranking), dest)
    dog_path = cfg.path("dog_survey")
    if dog_path is not None:
        _parse(dog_path, cooccurrence.load_dog_survey, "dog survey")


def _stage_screen(cfg: AuditConfig) -> None:
    vocab = _parse(cfg.require_path("vocabulary"), ingest.parse_vocabulary, "vocabulary")
    denylist_path = cfg.require_path("denylist")
    denylist = _parse(
        denylist_path, lambda p: screening.load_watchlist("denylist", p), "denylist"
    )
    matches = screening.screen_labels(vocab, denylist)
    dest = _out_path(cfg, "screening_report.csv")
    screening.write_screening_report(matches, dest)
    log.info("screen: %d of %d classes matched -> %s", len(matches), len(vocab), dest)
    for name, path in sorted(cfg.watchlists.items()):
        terms = _parse(
            path, lambda p, n=name: screening.load_watchlist(n, p), f"watchlist[{name}]"
        )
        _, count = screening.intersect_label_sets(vocab, terms)
        log.info("screen: watchlist %s intersects %d vocabulary entries", name, count)


def _stage_accuracy(cfg: AuditConfig) -> None:
    preds = _load_predictions(cfg)
    if not preds:
        raise AuditError("accuracy stage needs paths.predictions_* inputs")
    rows = accuracy_mod.topk_accuracy(preds)
    by_model: dict[str, list] = {}
    for row in rows:
        by_model.setdefault(row.model, []).append(row)
    for model, model_rows in sorted(by_model.items()):
        dest = _out_path(cfg, f"df_acc_classwise_{model}.csv")
        accuracy_mod.write_accuracy(model_rows, dest)
        log.info("accuracy[%s]: %d classes -> %s", model, len(model_rows), dest)

    if cfg.path("class_index") is None or cfg.path("nsfw") is None:
        return
    has_faces = any(cfg.path(k) for k in ("faces", "faces_dex", "faces_insightface"))
    if not has_faces:
        return
    classes = _load_classes(cfg)
    faces = _load_faces(cfg)
    sizes = _class_sizes(cfg, classes)
    census = _compute_census(cfg, faces, sizes)
    if ("dex", "train") not in census:
        return
    ranking = accuracy_mod.human_delta_ranking(
        census[("dex", "train")], census[("dex", "val")]
    )
    dest = _out_path(cfg, "human_delta.csv")
    accuracy_mod.write_human_delta(ranking, dest)
    log.info("accuracy: human-delta ranking -> %s", dest)
    tests = accuracy_mod.human_delta_ttest(rows, ranking, top_n=cfg.accuracy_top_n)
    for (model, split), result in sorted(tests.items()):
        log.info(
            "accuracy[%s/%s]: top-%d vs rest t=%.4f (df=%.1f, means %.4f vs %.4f)",
            model,
            split,
            cfg.accuracy_top_n,
            result.t,
            result.df,
            result.mean1,
            result.mean2,
        )


def _stage_survey_serve(cfg: AuditConfig) -> None:
    import uvicorn

    from .survey_http import create_app

    items = _build_survey(cfg)
    log_path = cfg.path("survey_log")
    events = []
    if log_path is not None and log_path.exists():
        events = survey.load_events(str(log_path))
        log.info("survey: replaying %d logged events from %s", len(events), log_path)
    state = survey.replay(items, events, quorum=cfg.survey_quorum)
    handle: IO | None = None
    if log_path is not None:
        log_path.parent.mkdir(parents=True, exist_ok=True)
        handle = open(log_path, "a", encoding="utf-8")
        state.attach_log(handle)
    else:
        log.warning("survey: no paths.survey_log configured; labels will not persist")
    app = create_app(
        state,
        image_root=cfg.path("image_root"),
        static_dir=cfg.path("static_dir"),
    )
    try:
        uvicorn.run(app, host=cfg.survey_host, port=cfg.survey_port, log_level="warning")
    finally:
        if handle is not None:
            handle.close()


def _stage_survey_export(cfg: AuditConfig) -> None:
    items = _build_survey(cfg)
    log_path = cfg.require_path("survey_log")
    events = survey.load_events(str(log_path)) if log_path.exists() else []
    state = survey.replay(items, events, quorum=cfg.survey_quorum)
    records = state.consensus_records()
    text = survey.export_survey(records, {item.item_id: item for item in state.items()})
    dest = _out_path(cfg, "hand_survey.csv")
    dest.write_text(text, encoding="utf-8")
    log.info("survey: %d consensus rows from %d events -> %s", len(records), len(events), dest)


def _stage_card(cfg: AuditConfig) -> None:
    classes = _load_classes(cfg)
    faces = _load_faces(cfg)
    annotations = _load_nsfw(cfg)
    sizes = _class_sizes(cfg, classes, annotations)
    census = _compute_census(cfg, faces, sizes)
    labels = {c.wordnet_id: c.label for c in classes}

    nsfw_stats = _compute_nsfw_stats(cfg, classes, annotations)
    preds = _load_predictions(cfg)
    acc_rows = accuracy_mod.topk_accuracy(preds) if preds else None
    coords = None
    if cfg.path("embeddings") or cfg.path("embeddings_2d"):
        coords = _compute_coords(cfg)
    table = census_mod.assemble_census_table(
        census, nsfw_stats=nsfw_stats, accuracy=acc_rows, coords=coords, labels=labels
    )

    summary = census_mod.summarize_dataset(
        [row for rows in census.values() for row in rows],
        faces,
        gender_threshold=cfg.gender_threshold,
    )
    cross = None
    if all((m, "train") in census for m in FACE_MODELS):
        cross = census_mod.compare_models(
            census[(FACE_MODELS[0], "train")], census[(FACE_MODELS[1], "train")]
        )

    survey_csv = None
    log_path = cfg.path("survey_log")
    if log_path is not None and log_path.exists():
        items = survey.build_queue(_compute_shortlist(cfg, classes, faces, annotations))
        state = survey.replay(
            items, survey.load_events(str(log_path)), quorum=cfg.survey_quorum
        )
        survey_csv = survey.export_survey(
            state.consensus_records(), {item.item_id: item for item in state.items()}
        )

    groups = ranking = None
    if cfg.path("group_mapping") or cfg.path("instruments"):
        key = ("dex", "train")
        if key in census:
            if cfg.path("group_mapping"):
                mapping = _parse(
                    cfg.require_path("group_mapping"),
                    cooccurrence.load_group_mapping,
                    "group mapping",
                )
                assignments = cooccurrence.assign_groups(mapping.keys(), mapping)
                groups = cooccurrence.group_gender_distributions(assignments, census[key])
            if cfg.path("instruments"):
                subset = _parse(
                    cfg.require_path("instruments"),
                    cooccurrence.load_labeled_subset,
                    "instrument subset",
                )
                ranking = cooccurrence.skewness_ranking(subset, census[key])

    watchlists = None
    if cfg.watchlists and cfg.path("vocabulary") is not None:
        vocab = _parse(cfg.require_path("vocabulary"), ingest.parse_vocabulary, "vocabulary")
        watchlists = {}
        for name, path in sorted(cfg.watchlists.items()):
            terms = _parse(
                path, lambda p, n=name: screening.load_watchlist(n, p), f"watchlist[{name}]"
            )
            hits, _ = screening.intersect_label_sets(vocab, terms)
            watchlists[name] = [record.class_name for record in hits]

    bundle = card_mod.render_audit_card(
        table,
        summary=summary,
        cross_model=cross,
        survey_csv=survey_csv,
        bias_groups=groups,
        bias_ranking=ranking,
        watchlists=watchlists,
        name=cfg.name,
        generated=cfg.generated,
    )
    json_dest = _out_path(cfg, "audit_card.json")
    json_dest.write_text(bundle.json_text, encoding="utf-8")
    _out_path(cfg, "audit_card.html").write_text(bundle.html_text, encoding="utf-8")
    for key, svg_text in sorted(bundle.panels.items()):
        _out_path(cfg, card_mod.PANEL_FILES[key]).write_text(svg_text, encoding="utf-8")
    log.info("card: %s (+html, %d panels)", json_dest, len(bundle.panels))


def _stage_all(cfg: AuditConfig) -> None:
    """Run every stage whose inputs are configured, census first."""
    have = cfg.path
    faces_ok = any(have(k) for k in ("faces", "faces_dex", "faces_insightface"))
    core_ok = faces_ok and have("class_index") and have("nsfw")

    if core_ok:
        _stage_census(cfg)
    else:
        log.info("all: skipping census (needs faces, class_index, nsfw)")
    if have("class_index") and have("nsfw"):
        _stage_nsfw(cfg)
    else:
        log.info("all: skipping nsfw (needs class_index, nsfw)")
    if core_ok:
        _stage_cluster(cfg)
    else:
        log.info("all: skipping cluster (needs faces, class_index, nsfw)")
    if have("embeddings") or have("embeddings_2d"):
        _stage_semantics(cfg)
    else:
        log.info("all: skipping semantics (no embeddings configured)")
    if core_ok and (have("group_mapping") or have("instruments")):
        _stage_bias(cfg)
    else:
        log.info("all: skipping bias (needs census inputs plus a class subset)")
    if have("vocabulary") and have("denylist"):
        _stage_screen(cfg)
    else:
        log.info("all: skipping screen (needs vocabulary, denylist)")
    if any(have(f"predictions_{m}") for m in PREDICTION_MODELS):
        _stage_accuracy(cfg)
    else:
        log.info("all: skipping accuracy (no predictions configured)")
    log_path = have("survey_log")
    if core_ok and log_path is not None and log_path.exists():
        _stage_survey_export(cfg)
    else:
        log.info("all: skipping survey export (no event log on disk)")
    if core_ok:
        _stage_card(cfg)
    else:
        log.info("all: skipping card (needs census inputs)")


# ---------------------------------------------------------------------------
# argument parsing

_PATH_FLAGS = tuple(key for key in PATH_KEYS if key != "out_dir")


def _preference(text: str):
    if text == "median":
        return text
    try:
        return float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"preference must be 'median' or a number, got {text!r}"
        ) from exc


def _watchlist(text: str) -> tuple[str, str]:
    name, sep, path = text.partition("=")
    if not sep or not name or not path:
        raise argparse.ArgumentTypeError(
            f"expected NAME=PATH, got {text!r}"
        )
    return name, path


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("configuration")
    group.add_argument("--config", metavar="PATH", help="TOML config file (or $AUDIT_CONFIG)")
    group.add_argument("--name", help="dataset name used in output file names")
    group.add_argument("--out", dest="out_dir", metavar="DIR", help="output directory")
    group.add_argument("--threads", type=int, help="worker threads (0 = all cores)")
    paths = common.add_argument_group("input paths (override config)")
    for key in _PATH_FLAGS:
        if key == "out_dir":
            continue
        paths.add_argument(f"--{key.replace('_', '-')}", dest=key, metavar="PATH")
    paths.add_argument(
        "--watchlist",
        action="append",
        type=_watchlist,
        metavar="NAME=PATH",
        help="named watchlist file (repeatable)",
    )
    knobs = common.add_argument_group("analysis knobs")
    knobs.add_argument("--gender-threshold", type=float, dest="gender_threshold")
    knobs.add_argument(
        "--nsfw-positive",
        dest="nsfw_positive",
        metavar="A,B,...",
        help="NSFW classes counted as positive",
    )
    knobs.add_argument("--ap-preference", type=_preference, dest="ap_preference")
    knobs.add_argument("--ap-damping", type=float, dest="ap_damping")
    knobs.add_argument("--ap-max-iter", type=int, dest="ap_max_iter")
    knobs.add_argument("--ap-convergence-iter", type=int, dest="ap_convergence_iter")
    knobs.add_argument("--quorum", type=int, dest="survey_quorum")
    knobs.add_argument("--top-n", type=int, dest="accuracy_top_n")
    knobs.add_argument("--host", dest="survey_host")
    knobs.add_argument("--port", type=int, dest="survey_port")
    knobs.add_argument("--generated", help="timestamp stamped into the audit card")
    return common


_FIELD_KEYS = (
    "name",
    "threads",
    "gender_threshold",
    "ap_preference",
    "ap_damping",
    "ap_max_iter",
    "ap_convergence_iter",
    "survey_quorum",
    "accuracy_top_n",
    "survey_host",
    "survey_port",
    "generated",
)


def _overrides(args: argparse.Namespace) -> dict:
    out: dict = {}
    for key in PATH_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            out[key] = value
    for name, path in getattr(args, "watchlist", None) or ():
        out[f"watchlist_{name}"] = path
    for key in _FIELD_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            out[key] = value
    positive = getattr(args, "nsfw_positive", None)
    if positive is not None:
        out["nsfw_positive"] = tuple(p.strip() for p in positive.split(",") if p.strip())
    return out


def _build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="audit",
        description="Dataset demographic and content audit pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("validate", parents=[common], help="parse-check all configured inputs")
    p.add_argument(
        "--lenient",
        action="store_true",
        help="report bad rows instead of stopping at the first",
    )
    p.set_defaults(func=lambda cfg, args: 1 if _stage_validate(cfg, args.lenient) else 0)

    for name, fn, help_text in (
        ("census", _stage_census, "per-class face census tables"),
        ("nsfw", _stage_nsfw, "per-class NSFW score statistics"),
        ("cluster", _stage_cluster, "cluster classes and emit the review shortlist"),
        ("semantics", _stage_semantics, "2-d label coordinates and NSFW surface"),
        ("bias", _stage_bias, "group distributions and skew ranking"),
        ("screen", _stage_screen, "vocabulary screening report"),
        ("accuracy", _stage_accuracy, "classwise model accuracy tables"),
        ("card", _stage_card, "render the audit card (JSON + HTML + panels)"),
        ("all", _stage_all, "run every stage with configured inputs"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=lambda cfg, args, fn=fn: fn(cfg))

    p = sub.add_parser("survey", parents=[common], help="hand-survey service")
    survey_sub = p.add_subparsers(dest="survey_command", required=True, metavar="ACTION")
    serve = survey_sub.add_parser("serve", parents=[common], help="run the HTTP service")
    serve.set_defaults(func=lambda cfg, args: _stage_survey_serve(cfg))
    export = survey_sub.add_parser("export", parents=[common], help="write hand_survey.csv")
    export.set_defaults(func=lambda cfg, args: _stage_survey_export(cfg))

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(message)s")

    try:
        cfg = load_config(args.config, _overrides(args))
    except AuditError as exc:
        log.error("%s", exc)
        return 1
    except (ValueError, OSError) as exc:
        parser.print_usage(sys.stderr)
        log.error("config: %s", exc)
        return 2

    try:
        result = args.func(cfg, args)
    except AuditError as exc:
        log.error("%s", exc)
        return 1
    except OSError as exc:
        log.error("%s", exc)
        return 1
    return int(result or 0)


if __name__ == "__main__":
    sys.exit(main())
