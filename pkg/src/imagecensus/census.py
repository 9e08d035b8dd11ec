"""Class-level Count/Age/Gender census and the wide census table.

The per-class metrics follow the indicator formulation: with N_c the class
size, phi_i the face-present indicator, g_i / a_i the per-image gender and
age (multi-face images contribute the unweighted mean of their faces):

    eta   = (1/N_c) * sum(phi_i)
    alpha = (1/N_c) * sum(phi_i * a_i)          (normalizer as printed)
    xi    = (1/N_c) * sum(phi_i * z_i**3),  z_i = (g_i - mu)/sigma

``alpha_facewise`` re-normalizes the same sum by the number of face-bearing
images; both are emitted because only the face-wise variant matches headline
mean-age figures.  mu/sigma are mean and population std of g_i over the
face-bearing images of the class.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import IO, Iterable, Mapping, Sequence

from . import stats
from .accuracy import ClassAccuracy
from .errors import AuditError, ClassSetMismatch, KeyMismatch, UnknownClass, ZeroClassSize
from .ingest import csv_field, fmt_float
from .nsfw import ClassNsfwStats
from .records import FACE_MODELS, PREDICTION_MODELS, SPLITS, FaceAnnotation, ImageKey
from .semanticity import SemanticCoord

DEFAULT_GENDER_THRESHOLD = 0.5


@dataclass(frozen=True, slots=True)
class ClassCensusRow:
    wordnet_id: str
    model: str
    n_images: int
    n_face_images: int
    n_persons: int
    eta: float
    alpha_paper: float
    alpha_facewise: float
    mu: float | None
    sigma: float | None
    xi: float
    n_women: int
    n_men: int
    mean_age_women: float | None
    mean_age_men: float | None


@dataclass(frozen=True, slots=True)
class CohortCount:
    n_images_with_faces: int
    n_persons: int
    age_sum: float = 0.0

    @property
    def mean_age(self) -> float | None:
        return self.age_sum / self.n_persons if self.n_persons else None


@dataclass(frozen=True)
class SummaryCounts:
    """Dataset-level face/person counts keyed by (model, split, cohort).

    Cohorts are "overall", "women", "men".
    """

    counts: Mapping[tuple[str, str, str], CohortCount]

    def get(self, model: str, split: str, cohort: str) -> CohortCount:
        return self.counts.get((model, split, cohort), CohortCount(0, 0))

    def models(self) -> list[str]:
        return sorted({model for model, _, _ in self.counts})


@dataclass(frozen=True, slots=True)
class CrossModelReport:
    r_eta: float
    r_xi: float
    r_alpha: float
    n_classes: int


def _split_size(sizes: tuple[int, int], split: str) -> int:
    return sizes[0] if split == "train" else sizes[1]


def _image_stats(faces: Sequence[FaceAnnotation]) -> tuple[float, float]:
    """Per-image gender and age: unweighted means over the image's faces."""
    g = math.fsum(f.gender_score for f in faces) / len(faces)
    a = math.fsum(f.age_years for f in faces) / len(faces)
    return g, a


def _census_one_class(
    wordnet_id: str,
    n_images: int,
    by_image: Mapping[ImageKey, list[FaceAnnotation]],
    model: str,
    gender_threshold: float,
) -> ClassCensusRow:
    if n_images <= 0:
        raise ZeroClassSize(wordnet_id)
    images = sorted(by_image, key=ImageKey.sort_key)
    n_face_images = len(images)
    if n_face_images > n_images:
        raise AuditError(
            f"class {wordnet_id}: {n_face_images} face-bearing images exceed "
            f"the declared class size {n_images}"
        )
    per_image = [_image_stats(by_image[k]) for k in images]
    g_values = [g for g, _ in per_image]
    a_values = [a for _, a in per_image]

    all_faces = [f for k in images for f in by_image[k]]
    n_persons = len(all_faces)
    women = [f for f in all_faces if f.gender_score < gender_threshold]
    men = [f for f in all_faces if f.gender_score >= gender_threshold]

    age_sum = math.fsum(a_values)
    return ClassCensusRow(
        wordnet_id=wordnet_id,
        model=model,
        n_images=n_images,
        n_face_images=n_face_images,
        n_persons=n_persons,
        eta=n_face_images / n_images,
        alpha_paper=age_sum / n_images,
        alpha_facewise=age_sum / n_face_images if n_face_images else 0.0,
        mu=stats.mean(g_values) if g_values else None,
        sigma=stats.pstdev(g_values) if g_values else None,
        xi=stats.skewness(g_values, n_images) if g_values else 0.0,
        n_women=len(women),
        n_men=len(men),
        mean_age_women=stats.mean([f.age_years for f in women]) if women else None,
        mean_age_men=stats.mean([f.age_years for f in men]) if men else None,
    )


def compute_class_census(
    faces: Iterable[FaceAnnotation],
    class_sizes: Mapping[str, tuple[int, int]],
    model: str,
    split: str,
    gender_threshold: float = DEFAULT_GENDER_THRESHOLD,
    threads: int = 1,
) -> list[ClassCensusRow]:
    """One census row per class in ``class_sizes``, sorted by wordnet_id.

    ``faces`` may mix models and splits; only annotations matching ``model``
    and ``split`` contribute.  Classes without any face get zeroed count
    metrics and absent (None) mu/sigma/ages.  All aggregation is order
    independent, so shuffled input and any thread count give identical rows.
    """
    if model not in FACE_MODELS:
        raise ValueError(f"unknown face model {model!r}")
    if split not in SPLITS:
        raise ValueError(f"unknown split {split!r}")

    grouped: dict[str, dict[ImageKey, list[FaceAnnotation]]] = {}
    for face in faces:
        if face.model != model or face.image.split != split:
            continue
        wid = face.image.wordnet_id
        if wid not in class_sizes:
            raise UnknownClass(wid)
        grouped.setdefault(wid, {}).setdefault(face.image, []).append(face)

    def build(wid: str) -> ClassCensusRow:
        n_images = _split_size(class_sizes[wid], split)
        return _census_one_class(
            wid, n_images, grouped.get(wid, {}), model, gender_threshold
        )

    wids = sorted(class_sizes)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(build, wids))
    return [build(wid) for wid in wids]


def summarize_dataset(
    rows: Iterable[ClassCensusRow],
    faces: Iterable[FaceAnnotation],
    gender_threshold: float = DEFAULT_GENDER_THRESHOLD,
) -> SummaryCounts:
    """Dataset totals per (model, split, cohort) from the face annotations.

    ``rows`` must come from the same ingest batch; their per-class totals are
    cross-checked against the face-level counts.
    """
    by_image: dict[tuple[str, str], set[ImageKey]] = {}
    women_images: dict[tuple[str, str], set[ImageKey]] = {}
    men_images: dict[tuple[str, str], set[ImageKey]] = {}
    persons: dict[tuple[str, str], int] = {}
    women: dict[tuple[str, str], int] = {}
    men: dict[tuple[str, str], int] = {}
    ages: dict[tuple[str, str], list[float]] = {}
    ages_w: dict[tuple[str, str], list[float]] = {}
    ages_m: dict[tuple[str, str], list[float]] = {}

    for face in faces:
        key = (face.model, face.image.split)
        by_image.setdefault(key, set()).add(face.image)
        persons[key] = persons.get(key, 0) + 1
        ages.setdefault(key, []).append(face.age_years)
        if face.gender_score >= gender_threshold:
            men[key] = men.get(key, 0) + 1
            men_images.setdefault(key, set()).add(face.image)
            ages_m.setdefault(key, []).append(face.age_years)
        else:
            women[key] = women.get(key, 0) + 1
            women_images.setdefault(key, set()).add(face.image)
            ages_w.setdefault(key, []).append(face.age_years)

    row_totals: dict[str, tuple[int, int]] = {}
    for row in rows:
        n, p = row_totals.get(row.model, (0, 0))
        row_totals[row.model] = (n + row.n_face_images, p + row.n_persons)
    face_totals: dict[str, tuple[int, int]] = {}
    for (model, _split), images in by_image.items():
        n, p = face_totals.get(model, (0, 0))
        face_totals[model] = (n + len(images), p + persons[(model, _split)])
    for model in sorted(set(row_totals) | set(face_totals)):
        claimed = row_totals.get(model, (0, 0))
        counted = face_totals.get(model, (0, 0))
        if claimed != counted:
            raise AuditError(
                f"census rows and face annotations disagree for {model}: "
                f"rows say {claimed}, faces say {counted}"
            )

    counts: dict[tuple[str, str, str], CohortCount] = {}
    for key in sorted(by_image):
        model, split = key
        counts[(model, split, "overall")] = CohortCount(
            len(by_image[key]), persons.get(key, 0), math.fsum(ages.get(key, ()))
        )
        counts[(model, split, "women")] = CohortCount(
            len(women_images.get(key, ())), women.get(key, 0), math.fsum(ages_w.get(key, ()))
        )
        counts[(model, split, "men")] = CohortCount(
            len(men_images.get(key, ())), men.get(key, 0), math.fsum(ages_m.get(key, ()))
        )
    return SummaryCounts(counts=counts)


def compare_models(
    rows_dex: Sequence[ClassCensusRow], rows_if: Sequence[ClassCensusRow]
) -> CrossModelReport:
    """Pearson agreement between two models' per-class eta/xi/alpha vectors.

    Alignment is by wordnet_id; alpha uses the face-wise normalization.
    """
    left = {r.wordnet_id: r for r in rows_dex}
    right = {r.wordnet_id: r for r in rows_if}
    if set(left) != set(right):
        raise ClassSetMismatch(set(left) - set(right), set(right) - set(left))
    wids = sorted(left)
    r_eta = stats.pearson([left[w].eta for w in wids], [right[w].eta for w in wids])
    r_xi = stats.pearson([left[w].xi for w in wids], [right[w].xi for w in wids])
    r_alpha = stats.pearson(
        [left[w].alpha_facewise for w in wids], [right[w].alpha_facewise for w in wids]
    )
    return CrossModelReport(r_eta=r_eta, r_xi=r_xi, r_alpha=r_alpha, n_classes=len(wids))


# ---------------------------------------------------------------------------
# wide census table

CENSUS_FIELDS = (
    ("n_images", "number of images in the class for this split"),
    ("n_face_images", "images with at least one detected face"),
    ("n_persons", "total detected faces (persons)"),
    ("eta", "fraction of the class's images containing a face"),
    ("alpha_paper", "mean age normalized by the full class size"),
    ("alpha_facewise", "mean age over face-bearing images only"),
    ("mu", "mean per-image gender score (0 female .. 1 male)"),
    ("sigma", "population std of the per-image gender scores"),
    ("xi", "gender skewness: third standardized moment over class size"),
    ("n_women", "faces below the gender threshold"),
    ("n_men", "faces at or above the gender threshold"),
    ("mean_age_women", "mean age of faces below the gender threshold"),
    ("mean_age_men", "mean age of faces at or above the gender threshold"),
)

NSFW_FIELDS = (
    ("mean_nsfw_train", "mean image NSFW score over the class's train images"),
    ("std_nsfw_train", "population std of the train NSFW scores"),
    ("mean_nsfw_val", "mean image NSFW score over the class's val images"),
    ("std_nsfw_val", "population std of the val NSFW scores"),
)

ACCURACY_FIELDS = (
    ("n_eval", "images scored by the classifier for this split"),
    ("top1_acc", "fraction of images whose true class is the first prediction"),
    ("top5_acc", "fraction of images whose true class is in the top five"),
)

SEMANTIC_FIELDS = (
    ("sem_x", "first semantic projection coordinate of the class label"),
    ("sem_y", "second semantic projection coordinate of the class label"),
    ("sem_source", "origin of the coordinates: precomputed or pca"),
)


@dataclass(frozen=True)
class CensusTable:
    """Wide per-class table plus its column-interpretation sidecar."""

    columns: tuple[str, ...]
    rows: tuple[dict, ...]
    sidecar: tuple[tuple[str, str], ...]

    def write_csv(self, dest: str | IO) -> None:
        _write_table(dest, self.columns, self.rows)

    def write_sidecar(self, dest: str | IO) -> None:
        _write_table(
            dest,
            ("column", "interpretation"),
            [{"column": c, "interpretation": i} for c, i in self.sidecar],
        )


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return fmt_float(value)
    return csv_field(str(value))


def _write_table(dest, columns: Sequence[str], rows: Iterable[Mapping]) -> None:
    from .ingest import _text_sink

    with _text_sink(dest) as out:
        out.write(",".join(columns) + "\n")
        for row in rows:
            out.write(",".join(_cell(row.get(c)) for c in columns) + "\n")


def _check_manifest(name: str, keys: Iterable[str], manifest: set[str]) -> None:
    got = set(keys)
    if got != manifest:
        raise KeyMismatch(missing=manifest - got, extra=got - manifest)


def assemble_census_table(
    census: Mapping[tuple[str, str], Sequence[ClassCensusRow]],
    nsfw_stats: Sequence[ClassNsfwStats] | None = None,
    accuracy: Sequence[ClassAccuracy] | None = None,
    coords: Sequence[SemanticCoord] | None = None,
    labels: Mapping[str, str] | None = None,
) -> CensusTable:
    """Join all per-class metrics into one wide row per class.

    ``census`` maps (model, split) to rows; every provided input must cover
    exactly the same class manifest (KeyMismatch otherwise).  Inputs left out
    produce explicitly empty cells, never zeros.
    """
    if not census or all(not rows for rows in census.values()):
        raise KeyMismatch(missing=set(), extra=set())
    manifest: set[str] | None = None
    for (model, split), rows in census.items():
        wids = {r.wordnet_id for r in rows}
        if manifest is None:
            manifest = wids
        elif wids != manifest:
            raise KeyMismatch(missing=manifest - wids, extra=wids - manifest)
    assert manifest is not None

    nsfw_by_wid = {}
    if nsfw_stats is not None:
        _check_manifest("nsfw", (s.wordnet_id for s in nsfw_stats), manifest)
        nsfw_by_wid = {s.wordnet_id: s for s in nsfw_stats}
    coords_by_wid = {}
    if coords is not None:
        _check_manifest("semantic", (c.wordnet_id for c in coords), manifest)
        coords_by_wid = {c.wordnet_id: c for c in coords}
    acc_groups: dict[tuple[str, str], dict[str, ClassAccuracy]] = {}
    if accuracy is not None:
        for acc in accuracy:
            acc_groups.setdefault((acc.model, acc.split), {})[acc.wordnet_id] = acc
        for group_key, group in acc_groups.items():
            _check_manifest(f"accuracy {group_key}", group.keys(), manifest)

    columns: list[str] = ["wordnet_id", "label"]
    sidecar: list[tuple[str, str]] = [
        ("wordnet_id", "synset identifier of the class"),
        ("label", "human-readable class label"),
    ]
    for model in FACE_MODELS:
        for split in SPLITS:
            for field, meaning in CENSUS_FIELDS:
                columns.append(f"{model}_{split}_{field}")
                sidecar.append((f"{model}_{split}_{field}", f"{meaning} ({model}, {split})"))
    for field, meaning in NSFW_FIELDS:
        columns.append(field)
        sidecar.append((field, meaning))
    for model in PREDICTION_MODELS:
        for split in SPLITS:
            for field, meaning in ACCURACY_FIELDS:
                columns.append(f"{model}_{split}_{field}")
                sidecar.append((f"{model}_{split}_{field}", f"{meaning} ({model}, {split})"))
    for field, meaning in SEMANTIC_FIELDS:
        columns.append(field)
        sidecar.append((field, meaning))

    census_by_wid: dict[tuple[str, str], dict[str, ClassCensusRow]] = {
        key: {r.wordnet_id: r for r in rows} for key, rows in census.items()
    }

    out_rows: list[dict] = []
    for wid in sorted(manifest):
        row: dict = {"wordnet_id": wid, "label": (labels or {}).get(wid)}
        for model in FACE_MODELS:
            for split in SPLITS:
                source = census_by_wid.get((model, split), {}).get(wid)
                for field, _ in CENSUS_FIELDS:
                    row[f"{model}_{split}_{field}"] = (
                        getattr(source, field) if source is not None else None
                    )
        nsfw_row = nsfw_by_wid.get(wid)
        for field, _ in NSFW_FIELDS:
            row[field] = getattr(nsfw_row, field) if nsfw_row is not None else None
        for model in PREDICTION_MODELS:
            for split in SPLITS:
                acc = acc_groups.get((model, split), {}).get(wid)
                row[f"{model}_{split}_n_eval"] = acc.n_images if acc else None
                row[f"{model}_{split}_top1_acc"] = acc.top1_acc if acc else None
                row[f"{model}_{split}_top5_acc"] = acc.top5_acc if acc else None
        coord = coords_by_wid.get(wid)
        row["sem_x"] = coord.x if coord else None
        row["sem_y"] = coord.y if coord else None
        row["sem_source"] = coord.source if coord else None
        out_rows.append(row)

    return CensusTable(
        columns=tuple(columns), rows=tuple(out_rows), sidecar=tuple(sidecar)
    )


CENSUS_ROW_COLUMNS = ("wordnet_id", "split") + tuple(f for f, _ in CENSUS_FIELDS)


def write_census_rows(
    rows_by_split: Mapping[str, Sequence[ClassCensusRow]], dest: str | IO
) -> None:
    """Per-model stats export: one row per (class, split)."""
    flat = []
    for split in SPLITS:
        for row in rows_by_split.get(split, ()):  # splits in declared order
            record = {"wordnet_id": row.wordnet_id, "split": split}
            for field, _ in CENSUS_FIELDS:
                record[field] = getattr(row, field)
            flat.append(record)
    _write_table(dest, CENSUS_ROW_COLUMNS, flat)
