"""Typed records for annotation and metadata inputs.

These are plain frozen dataclasses; all validation happens at parse time
(see :mod:`imagecensus.ingest`), so instances passed around the pipeline can
be trusted to satisfy their field domains.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

WORDNET_ID_RE = re.compile(r"^n\d{8}$")

SPLITS = ("train", "val")
FACE_MODELS = ("dex", "insightface")
PREDICTION_MODELS = ("resnet50", "nasnet_mobile")

NSFW_CLASSES = ("drawings", "hentai", "neutral", "porn", "sexy")

EMBEDDING_RAW_DIM = 300
EMBEDDING_PROJECTED_DIM = 2


def is_wordnet_id(value: str) -> bool:
    return bool(WORDNET_ID_RE.match(value))


@dataclass(frozen=True, slots=True)
class ImageKey:
    """Identifies one image: synset, split and file name."""

    wordnet_id: str
    split: str
    file_name: str

    def sort_key(self) -> tuple[str, str, str]:
        return (self.wordnet_id, self.split, self.file_name)


@dataclass(frozen=True, slots=True)
class FaceAnnotation:
    """One detected person in one image, from one face-analysis model.

    ``gender_score`` is in [0, 1] with 0 = female and 1 = male;
    ``age_years`` is any positive real (source models emit arbitrary ages).
    """

    image: ImageKey
    model: str
    face_index: int
    bbox: tuple[float, float, float, float]
    det_conf: float
    age_years: float
    gender_score: float


@dataclass(frozen=True, slots=True)
class NsfwAnnotation:
    """Per-image 5-way softmax over the content classes in NSFW_CLASSES."""

    image: ImageKey
    probs: tuple[float, float, float, float, float]

    @property
    def p_drawings(self) -> float:
        return self.probs[0]

    @property
    def p_hentai(self) -> float:
        return self.probs[1]

    @property
    def p_neutral(self) -> float:
        return self.probs[2]

    @property
    def p_porn(self) -> float:
        return self.probs[3]

    @property
    def p_sexy(self) -> float:
        return self.probs[4]


@dataclass(frozen=True, slots=True)
class PredictionRecord:
    """Top-5 predictions for one image; the image's wordnet_id is the truth."""

    image: ImageKey
    model: str
    top5: tuple[str, str, str, str, str]


@dataclass(frozen=True, slots=True)
class LabelEmbedding:
    """Word vector for a class label, raw (300-d) or a precomputed 2-d projection."""

    wordnet_id: str
    label: str
    vector: tuple[float, ...]

    @property
    def kind(self) -> str:
        return "raw" if len(self.vector) == EMBEDDING_RAW_DIM else "projected"


@dataclass(frozen=True, slots=True)
class ClassInfo:
    class_index: int
    wordnet_id: str
    label: str


@dataclass(frozen=True, slots=True)
class TaxonomyRecord:
    """One vocabulary entry of an external taxonomy (class index, noun, image count)."""

    class_ind: int
    class_name: str
    n_images: int
