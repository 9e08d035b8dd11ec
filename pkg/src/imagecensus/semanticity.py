"""Semantic 2-D coordinates for class labels.

Precomputed 2-D projections are passed through untouched; raw embedding
vectors fall back to an in-package PCA.  The projection is deterministic:
components are ordered by descending variance and each component's sign is
fixed by making its largest-magnitude loading positive.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from .errors import DegenerateCovariance, DuplicateEntry, EmptyClass, InsufficientPoints, KeyMismatch
from .ingest import csv_field, fmt_float
from .records import LabelEmbedding


@dataclass(frozen=True, slots=True)
class SemanticCoord:
    wordnet_id: str
    label: str
    x: float
    y: float
    source: str  # "precomputed" | "pca"


@dataclass(frozen=True, slots=True)
class SurfacePoint:
    wordnet_id: str
    x: float
    y: float
    mean_nsfw_train: float


def _check_unique(embeddings: Sequence[LabelEmbedding]) -> None:
    seen: set[str] = set()
    for emb in embeddings:
        if emb.wordnet_id in seen:
            raise DuplicateEntry(emb.wordnet_id)
        seen.add(emb.wordnet_id)


def pca_project(
    embeddings: Sequence[LabelEmbedding], dims: int = 2
) -> list[SemanticCoord]:
    """Project raw embeddings onto their top principal components.

    Needs at least dims + 1 vectors of a common width.  Rank below ``dims``
    fills the trailing coordinates with 0 and warns; rank 0 (all vectors
    identical) raises DegenerateCovariance.
    """
    if dims != 2:
        raise ValueError("projection is fixed at two output dimensions")
    if len(embeddings) < dims + 1:
        raise InsufficientPoints(
            f"projection needs at least {dims + 1} embeddings, got {len(embeddings)}"
        )
    _check_unique(embeddings)
    widths = {len(e.vector) for e in embeddings}
    if len(widths) != 1:
        raise ValueError(f"mixed embedding widths {sorted(widths)}")

    X = np.asarray([e.vector for e in embeddings], dtype=float)
    X = X - X.mean(axis=0)
    n, d = X.shape

    # Scatter-matrix eigendecomposition; the Gram side keeps the problem
    # n x n when vectors are wider than the sample count.
    if n <= d:
        G = X @ X.T
        evals, evecs = np.linalg.eigh(G)
        order = np.argsort(evals)[::-1]
        evals = np.maximum(evals[order], 0.0)
        U = evecs[:, order]
        loadings = []
        for j in range(dims):
            if evals[j] > 0:
                loadings.append(X.T @ U[:, j] / np.sqrt(evals[j]))
            else:
                loadings.append(np.zeros(d))
        scores = np.column_stack(
            [np.sqrt(evals[j]) * U[:, j] for j in range(dims)]
        )
    else:
        C = X.T @ X
        evals, evecs = np.linalg.eigh(C)
        order = np.argsort(evals)[::-1]
        evals = np.maximum(evals[order], 0.0)
        V = evecs[:, order[:dims]]
        loadings = [V[:, j] for j in range(dims)]
        scores = X @ V

    tol = float(evals[0]) * 1e-12 if evals.size else 0.0
    rank = int((evals > max(tol, 0.0)).sum())
    if rank == 0:
        raise DegenerateCovariance("all embeddings are identical")
    if rank < dims:
        warnings.warn(
            f"embedding rank {rank} below {dims}; trailing coordinates set to 0",
            stacklevel=2,
        )
    for j in range(dims):
        if j >= rank:
            scores[:, j] = 0.0
            continue
        load = loadings[j]
        peak = int(np.abs(load).argmax())
        if load[peak] < 0:
            scores[:, j] = -scores[:, j]

    return [
        SemanticCoord(
            wordnet_id=e.wordnet_id,
            label=e.label,
            x=float(scores[i, 0]),
            y=float(scores[i, 1]),
            source="pca",
        )
        for i, e in enumerate(embeddings)
    ]


def passthrough_coords(embeddings: Sequence[LabelEmbedding]) -> list[SemanticCoord]:
    """Precomputed 2-D projections become coordinates verbatim."""
    _check_unique(embeddings)
    coords = []
    for emb in embeddings:
        if len(emb.vector) != 2:
            raise ValueError(
                f"{emb.wordnet_id}: expected 2-d coordinates, got {len(emb.vector)}"
            )
        coords.append(
            SemanticCoord(
                wordnet_id=emb.wordnet_id,
                label=emb.label,
                x=emb.vector[0],
                y=emb.vector[1],
                source="precomputed",
            )
        )
    return coords


def attach_coordinates(
    precomputed: Sequence[LabelEmbedding] | None,
    raw: Sequence[LabelEmbedding] | None,
) -> list[SemanticCoord]:
    """Coordinate resolution: precomputed projections win over raw vectors."""
    if precomputed:
        return passthrough_coords(precomputed)
    if raw:
        return pca_project(raw)
    raise EmptyClass("no embeddings supplied")


def semantic_surface(
    coords: Sequence[SemanticCoord], nsfw_rows: Sequence
) -> list[SurfacePoint]:
    """Join coordinates with train-split NSFW means, one point per class."""
    coord_by_wid = {c.wordnet_id: c for c in coords}
    stats_by_wid = {r.wordnet_id: r for r in nsfw_rows}
    if set(coord_by_wid) != set(stats_by_wid):
        raise KeyMismatch(
            missing=set(stats_by_wid) - set(coord_by_wid),
            extra=set(coord_by_wid) - set(stats_by_wid),
        )
    points = []
    for wid in sorted(coord_by_wid):
        mean = stats_by_wid[wid].mean_nsfw_train
        if mean is None:
            raise EmptyClass(f"{wid} has no train-split NSFW coverage")
        c = coord_by_wid[wid]
        points.append(SurfacePoint(wordnet_id=wid, x=c.x, y=c.y, mean_nsfw_train=mean))
    return points


COORD_COLUMNS = ("wordnet_id", "label", "umap_x", "umap_y", "source")


def write_coords(coords: Sequence[SemanticCoord], dest: str | IO) -> None:
    from .ingest import _text_sink

    with _text_sink(dest) as out:
        out.write(",".join(COORD_COLUMNS) + "\n")
        for c in sorted(coords, key=lambda c: c.wordnet_id):
            out.write(
                ",".join(
                    (
                        c.wordnet_id,
                        csv_field(c.label),
                        fmt_float(c.x),
                        fmt_float(c.y),
                        c.source,
                    )
                )
                + "\n"
            )


SURFACE_COLUMNS = ("wordnet_id", "x", "y", "mean_nsfw_train")


def write_surface(points: Sequence[SurfacePoint], dest: str | IO) -> None:
    from .ingest import _text_sink

    with _text_sink(dest) as out:
        out.write(",".join(SURFACE_COLUMNS) + "\n")
        for p in points:
            out.write(
                ",".join(
                    (
                        p.wordnet_id,
                        fmt_float(p.x),
                        fmt_float(p.y),
                        fmt_float(p.mean_nsfw_train),
                    )
                )
                + "\n"
            )
