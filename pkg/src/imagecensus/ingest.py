"""Streaming CSV ingestion and canonical serialization.

Every input file is UTF-8, comma-separated, `\\n`-terminated, with an exact
header row.  Parsers are generators (``iter_*``) so files larger than memory
stream through; the ``parse_*`` wrappers materialize lists.  In strict mode
(the default) the first bad row raises; passing an ``error_sink`` list turns
on lenient mode, where bad rows are skipped and their errors collected.

Serializers write the same column order back with shortest round-trip float
formatting (``repr``), so ``serialize(parse(f))`` is byte-identical for files
this package wrote.
"""

from __future__ import annotations

import csv
import io
import math
from contextlib import contextmanager
from pathlib import Path
from typing import IO, Callable, Iterable, Iterator, Sequence, TypeVar

from .errors import (
    DimensionalityMix,
    DuplicateKey,
    MalformedRow,
    ParseError,
    RangeError,
    SoftmaxSumError,
    UnknownSplit,
)
from .records import (
    EMBEDDING_PROJECTED_DIM,
    EMBEDDING_RAW_DIM,
    FACE_MODELS,
    PREDICTION_MODELS,
    SPLITS,
    ClassInfo,
    FaceAnnotation,
    ImageKey,
    LabelEmbedding,
    NsfwAnnotation,
    PredictionRecord,
    TaxonomyRecord,
    is_wordnet_id,
)

SOFTMAX_TOLERANCE = 1e-3

FACES_HEADER = (
    "file_name,wordnet_id,split,model,face_index,"
    "bbox_x,bbox_y,bbox_w,bbox_h,det_conf,age_years,gender_score"
)
NSFW_HEADER = "file_name,wordnet_id,split,p_drawings,p_hentai,p_neutral,p_porn,p_sexy"
PREDS_HEADER = "file_name,wordnet_id,split,model,top1,top2,top3,top4,top5"
EMB300_HEADER = "wordnet_id,label," + ",".join(f"d{i}" for i in range(EMBEDDING_RAW_DIM))
EMB2D_HEADER = "wordnet_id,label,umap_x,umap_y"
CLASSES_HEADER = "class_index,wordnet_id,label"
VOCAB_HEADER = "class_ind,class_name,n_images"

T = TypeVar("T")


# ---------------------------------------------------------------------------
# plumbing

@contextmanager
def _text_source(source: str | Path | IO) -> Iterator[IO[str]]:
    """Yield a text stream for a path, text stream, or byte stream."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            yield fh
        return
    if isinstance(source.read(0), bytes):
        wrapper = io.TextIOWrapper(source, encoding="utf-8", newline="")
        try:
            yield wrapper
        finally:
            wrapper.detach()
        return
    yield source


@contextmanager
def _text_sink(dest: str | Path | IO) -> Iterator[IO[str]]:
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            yield fh
        return
    yield dest


def _rows(
    stream: IO[str], expected_header: str, error_sink: list[ParseError] | None
) -> Iterator[tuple[int, list[str]]]:
    """Yield (1-based line number, fields) per data row after checking the header."""
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRow(1, "empty file, expected a header row") from None
    if header != expected_header.split(","):
        raise MalformedRow(1, f"unexpected header {','.join(header)!r}")
    for fields in reader:
        if not fields:
            continue
        yield reader.line_num, fields


def _run(
    convert: Callable[[int, list[str]], T],
    rows: Iterable[tuple[int, list[str]]],
    error_sink: list[ParseError] | None,
) -> Iterator[T]:
    for line_no, fields in rows:
        try:
            yield convert(line_no, fields)
        except ParseError as err:
            if error_sink is None:
                raise
            error_sink.append(err)


def _float(line_no: int, field: str, raw: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise MalformedRow(line_no, f"unparsable {field}: {raw!r}") from None
    if not math.isfinite(value):
        raise MalformedRow(line_no, f"non-finite {field}: {raw!r}")
    return value


def _int(line_no: int, field: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise MalformedRow(line_no, f"unparsable {field}: {raw!r}") from None


def _unit(line_no: int, field: str, value: float) -> float:
    if not 0.0 <= value <= 1.0:
        raise RangeError(line_no, field, value)
    return value


def _positive(line_no: int, field: str, value: float) -> float:
    if not value > 0.0:
        raise RangeError(line_no, field, value)
    return value


def _image_key(line_no: int, file_name: str, wordnet_id: str, split: str) -> ImageKey:
    if not file_name:
        raise MalformedRow(line_no, "empty file_name")
    if not is_wordnet_id(wordnet_id):
        raise MalformedRow(line_no, f"bad wordnet_id: {wordnet_id!r}")
    if split not in SPLITS:
        raise UnknownSplit(line_no, split)
    return ImageKey(wordnet_id=wordnet_id, split=split, file_name=file_name)


def _arity(line_no: int, fields: list[str], expected: int) -> None:
    if len(fields) != expected:
        raise MalformedRow(line_no, f"expected {expected} fields, got {len(fields)}")


class _UniqueCheck:
    def __init__(self) -> None:
        self._seen: set = set()

    def add(self, line_no: int, key) -> None:
        if key in self._seen:
            raise DuplicateKey(line_no, key)
        self._seen.add(key)


# ---------------------------------------------------------------------------
# faces

def iter_faces(
    source, model: str | None = None, error_sink: list[ParseError] | None = None
) -> Iterator[FaceAnnotation]:
    if model is not None and model not in FACE_MODELS:
        raise ValueError(f"unknown face model {model!r}")
    with _text_source(source) as stream:
        seen = _UniqueCheck()

        def convert(line_no: int, f: list[str]) -> FaceAnnotation:
            _arity(line_no, f, 12)
            image = _image_key(line_no, f[0], f[1], f[2])
            row_model = f[3]
            if row_model not in FACE_MODELS:
                raise MalformedRow(line_no, f"unknown model {row_model!r}")
            if model is not None and row_model != model:
                raise MalformedRow(line_no, f"model {row_model!r}, expected {model!r}")
            face_index = _int(line_no, "face_index", f[4])
            if face_index < 0:
                raise RangeError(line_no, "face_index", face_index)
            bbox = (
                _float(line_no, "bbox_x", f[5]),
                _float(line_no, "bbox_y", f[6]),
                _positive(line_no, "bbox_w", _float(line_no, "bbox_w", f[7])),
                _positive(line_no, "bbox_h", _float(line_no, "bbox_h", f[8])),
            )
            det_conf = _unit(line_no, "det_conf", _float(line_no, "det_conf", f[9]))
            age = _positive(line_no, "age_years", _float(line_no, "age_years", f[10]))
            gender = _unit(line_no, "gender_score", _float(line_no, "gender_score", f[11]))
            seen.add(line_no, (image, row_model, face_index))
            return FaceAnnotation(
                image=image,
                model=row_model,
                face_index=face_index,
                bbox=bbox,
                det_conf=det_conf,
                age_years=age,
                gender_score=gender,
            )

        yield from _run(convert, _rows(stream, FACES_HEADER, error_sink), error_sink)


def parse_faces(source, model: str | None = None, error_sink=None) -> list[FaceAnnotation]:
    return list(iter_faces(source, model=model, error_sink=error_sink))


# ---------------------------------------------------------------------------
# nsfw

def iter_nsfw(source, error_sink: list[ParseError] | None = None) -> Iterator[NsfwAnnotation]:
    with _text_source(source) as stream:
        seen = _UniqueCheck()

        def convert(line_no: int, f: list[str]) -> NsfwAnnotation:
            _arity(line_no, f, 8)
            image = _image_key(line_no, f[0], f[1], f[2])
            names = ("p_drawings", "p_hentai", "p_neutral", "p_porn", "p_sexy")
            probs = tuple(
                _unit(line_no, name, _float(line_no, name, raw))
                for name, raw in zip(names, f[3:8])
            )
            total = math.fsum(probs)
            if abs(total - 1.0) > SOFTMAX_TOLERANCE:
                raise SoftmaxSumError(line_no, total)
            seen.add(line_no, image)
            return NsfwAnnotation(image=image, probs=probs)

        yield from _run(convert, _rows(stream, NSFW_HEADER, error_sink), error_sink)


def parse_nsfw(source, error_sink=None) -> list[NsfwAnnotation]:
    return list(iter_nsfw(source, error_sink=error_sink))


# ---------------------------------------------------------------------------
# predictions

def iter_predictions(
    source, model: str | None = None, error_sink: list[ParseError] | None = None
) -> Iterator[PredictionRecord]:
    if model is not None and model not in PREDICTION_MODELS:
        raise ValueError(f"unknown prediction model {model!r}")
    with _text_source(source) as stream:
        seen = _UniqueCheck()

        def convert(line_no: int, f: list[str]) -> PredictionRecord:
            _arity(line_no, f, 9)
            image = _image_key(line_no, f[0], f[1], f[2])
            row_model = f[3]
            if row_model not in PREDICTION_MODELS:
                raise MalformedRow(line_no, f"unknown model {row_model!r}")
            if model is not None and row_model != model:
                raise MalformedRow(line_no, f"model {row_model!r}, expected {model!r}")
            top5 = tuple(f[4:9])
            for synset in top5:
                if not is_wordnet_id(synset):
                    raise MalformedRow(line_no, f"bad prediction synset: {synset!r}")
            if len(set(top5)) != 5:
                raise MalformedRow(line_no, "top5 entries not distinct")
            seen.add(line_no, (image, row_model))
            return PredictionRecord(image=image, model=row_model, top5=top5)

        yield from _run(convert, _rows(stream, PREDS_HEADER, error_sink), error_sink)


def parse_predictions(source, model: str | None = None, error_sink=None) -> list[PredictionRecord]:
    return list(iter_predictions(source, model=model, error_sink=error_sink))


# ---------------------------------------------------------------------------
# embeddings

def iter_embeddings(source, error_sink: list[ParseError] | None = None) -> Iterator[LabelEmbedding]:
    with _text_source(source) as stream:
        reader = csv.reader(stream)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRow(1, "empty file, expected a header row") from None
        if header == EMB2D_HEADER.split(","):
            dim = EMBEDDING_PROJECTED_DIM
        elif header == EMB300_HEADER.split(","):
            dim = EMBEDDING_RAW_DIM
        else:
            raise MalformedRow(1, f"unexpected header {','.join(header[:4])!r}...")
        seen = _UniqueCheck()

        def convert(line_no: int, f: list[str]) -> LabelEmbedding:
            width = len(f) - 2
            if width != dim:
                if width in (EMBEDDING_PROJECTED_DIM, EMBEDDING_RAW_DIM):
                    raise DimensionalityMix(line_no, expected=dim, got=width)
                raise MalformedRow(line_no, f"expected {dim + 2} fields, got {len(f)}")
            if not is_wordnet_id(f[0]):
                raise MalformedRow(line_no, f"bad wordnet_id: {f[0]!r}")
            vector = tuple(_float(line_no, f"d{i}", raw) for i, raw in enumerate(f[2:]))
            seen.add(line_no, f[0])
            return LabelEmbedding(wordnet_id=f[0], label=f[1], vector=vector)

        rows = ((reader.line_num, f) for f in reader if f)
        yield from _run(convert, rows, error_sink)


def parse_embeddings(source, error_sink=None) -> list[LabelEmbedding]:
    return list(iter_embeddings(source, error_sink=error_sink))


# ---------------------------------------------------------------------------
# class manifest

def iter_class_index(source, error_sink: list[ParseError] | None = None) -> Iterator[ClassInfo]:
    """Stream the class manifest; contiguity of class_index is checked at the end."""
    with _text_source(source) as stream:
        seen_idx = _UniqueCheck()
        seen_wid = _UniqueCheck()
        indices: list[int] = []
        last_line = [1]

        def convert(line_no: int, f: list[str]) -> ClassInfo:
            last_line[0] = line_no
            _arity(line_no, f, 3)
            idx = _int(line_no, "class_index", f[0])
            if idx < 0:
                raise RangeError(line_no, "class_index", idx)
            if not is_wordnet_id(f[1]):
                raise MalformedRow(line_no, f"bad wordnet_id: {f[1]!r}")
            seen_idx.add(line_no, idx)
            seen_wid.add(line_no, f[1])
            indices.append(idx)
            return ClassInfo(class_index=idx, wordnet_id=f[1], label=f[2])

        yield from _run(convert, _rows(stream, CLASSES_HEADER, error_sink), error_sink)
        if sorted(indices) != list(range(len(indices))):
            err = MalformedRow(last_line[0], "class_index values are not contiguous from 0")
            if error_sink is None:
                raise err
            error_sink.append(err)


def parse_class_index(source, error_sink=None) -> list[ClassInfo]:
    return list(iter_class_index(source, error_sink=error_sink))


# ---------------------------------------------------------------------------
# external vocabulary

def iter_vocabulary(source, error_sink: list[ParseError] | None = None) -> Iterator[TaxonomyRecord]:
    with _text_source(source) as stream:
        seen = _UniqueCheck()

        def convert(line_no: int, f: list[str]) -> TaxonomyRecord:
            _arity(line_no, f, 3)
            idx = _int(line_no, "class_ind", f[0])
            if idx < 0:
                raise RangeError(line_no, "class_ind", idx)
            n_images = _int(line_no, "n_images", f[2])
            if n_images < 0:
                raise RangeError(line_no, "n_images", n_images)
            seen.add(line_no, idx)
            return TaxonomyRecord(class_ind=idx, class_name=f[1], n_images=n_images)

        yield from _run(convert, _rows(stream, VOCAB_HEADER, error_sink), error_sink)


def parse_vocabulary(source, error_sink=None) -> list[TaxonomyRecord]:
    return list(iter_vocabulary(source, error_sink=error_sink))


# ---------------------------------------------------------------------------
# canonical serialization

def fmt_float(value: float) -> str:
    """Shortest decimal string that round-trips to the same float."""
    return repr(float(value))


def csv_field(value: str) -> str:
    """Minimal CSV quoting: quote only when the value needs it."""
    if any(ch in value for ch in (",", '"', "\n", "\r")):
        return '"' + value.replace('"', '""') + '"'
    return value


def _write_rows(dest, header: str, rows: Iterable[Sequence[str]]) -> None:
    with _text_sink(dest) as out:
        out.write(header + "\n")
        for row in rows:
            out.write(",".join(row) + "\n")


def serialize_faces(records: Iterable[FaceAnnotation], dest) -> None:
    def row(r: FaceAnnotation) -> list[str]:
        return [
            csv_field(r.image.file_name),
            r.image.wordnet_id,
            r.image.split,
            r.model,
            str(r.face_index),
            fmt_float(r.bbox[0]),
            fmt_float(r.bbox[1]),
            fmt_float(r.bbox[2]),
            fmt_float(r.bbox[3]),
            fmt_float(r.det_conf),
            fmt_float(r.age_years),
            fmt_float(r.gender_score),
        ]

    _write_rows(dest, FACES_HEADER, (row(r) for r in records))


def serialize_nsfw(records: Iterable[NsfwAnnotation], dest) -> None:
    def row(r: NsfwAnnotation) -> list[str]:
        return [
            csv_field(r.image.file_name),
            r.image.wordnet_id,
            r.image.split,
            *(fmt_float(p) for p in r.probs),
        ]

    _write_rows(dest, NSFW_HEADER, (row(r) for r in records))


def serialize_predictions(records: Iterable[PredictionRecord], dest) -> None:
    def row(r: PredictionRecord) -> list[str]:
        return [
            csv_field(r.image.file_name),
            r.image.wordnet_id,
            r.image.split,
            r.model,
            *r.top5,
        ]

    _write_rows(dest, PREDS_HEADER, (row(r) for r in records))


def serialize_embeddings(records: Iterable[LabelEmbedding], dest) -> None:
    records = list(records)
    if not records:
        _write_rows(dest, EMB2D_HEADER, [])
        return
    dims = {len(r.vector) for r in records}
    if len(dims) != 1:
        raise ValueError(f"mixed embedding widths: {sorted(dims)}")
    dim = dims.pop()
    header = EMB2D_HEADER if dim == EMBEDDING_PROJECTED_DIM else EMB300_HEADER

    def row(r: LabelEmbedding) -> list[str]:
        return [r.wordnet_id, csv_field(r.label), *(fmt_float(v) for v in r.vector)]

    _write_rows(dest, header, (row(r) for r in records))


def serialize_class_index(records: Iterable[ClassInfo], dest) -> None:
    _write_rows(
        dest,
        CLASSES_HEADER,
        ([str(r.class_index), r.wordnet_id, csv_field(r.label)] for r in records),
    )


def serialize_vocabulary(records: Iterable[TaxonomyRecord], dest) -> None:
    _write_rows(
        dest,
        VOCAB_HEADER,
        ([str(r.class_ind), csv_field(r.class_name), str(r.n_images)] for r in records),
    )
