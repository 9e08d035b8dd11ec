"""Exemplar clustering by affinity propagation.

Similarity is negative squared Euclidean distance; the self-similarity
(preference) controls how many exemplars emerge.  Responsibility and
availability messages are damped and iterated until the exemplar set is
stable, then the exemplar set is polished by a deterministic local search
(medoid re-election plus single exemplar adds and drops) that walks uphill
on the net-similarity objective, which in practice lands small instances
on its exact optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NonFiniteCoordinate, TooFewPoints

DEFAULT_DAMPING = 0.5
DEFAULT_MAX_ITER = 200
DEFAULT_CONVERGENCE_ITER = 15


@dataclass(frozen=True, slots=True)
class ClusteringResult:
    exemplars: tuple[int, ...]
    assignment: tuple[int, ...]
    n_iterations: int
    converged: bool
    net_similarity: float

    @property
    def n_clusters(self) -> int:
        return len(self.exemplars)

    def members(self, exemplar: int) -> tuple[int, ...]:
        return tuple(i for i, e in enumerate(self.assignment) if e == exemplar)


def similarity_matrix(points: Sequence[Sequence[float]]) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if not np.isfinite(pts).all():
        bad = int(np.flatnonzero(~np.isfinite(pts).all(axis=1))[0])
        raise NonFiniteCoordinate(f"point {bad} has a non-finite coordinate")
    diff = pts[:, None, :] - pts[None, :, :]
    return -np.einsum("ijk,ijk->ij", diff, diff)


def _assign(S: np.ndarray, exemplars: Sequence[int]) -> np.ndarray:
    """Nearest-exemplar assignment; ties go to the lower exemplar index."""
    E = np.asarray(sorted(exemplars))
    choice = S[:, E].argmax(axis=1)
    assignment = E[choice]
    assignment[E] = E
    return assignment


def _medoids(
    S: np.ndarray, exemplars: list[int], assignment: np.ndarray
) -> tuple[list[int], np.ndarray]:
    """Alternate exemplar re-election and reassignment to a fixed point.

    Within each cluster the member maximizing the summed similarity to the
    rest of the cluster becomes the exemplar (lowest index on ties).  The
    objective is monotone, so this terminates; the cap is a safety net.
    """
    for _ in range(2 * S.shape[0] + 10):
        elected: set[int] = set()
        for e in sorted(set(int(v) for v in assignment)):
            members = np.flatnonzero(assignment == e)
            sub = S[np.ix_(members, members)].copy()
            np.fill_diagonal(sub, 0.0)
            elected.add(int(members[int(sub.sum(axis=0).argmax())]))
        new_exemplars = sorted(elected)
        new_assignment = _assign(S, new_exemplars)
        if new_exemplars == exemplars and (new_assignment == assignment).all():
            break
        exemplars, assignment = new_exemplars, new_assignment
    return exemplars, assignment


def _net(S: np.ndarray, assignment: np.ndarray) -> float:
    return float(S[np.arange(S.shape[0]), assignment].sum())


def _refine(
    S: np.ndarray, exemplars: list[int], assignment: np.ndarray
) -> tuple[list[int], np.ndarray]:
    """Deterministic local search over exemplar sets.

    Message passing fixes most of the structure; this stage hill-climbs the
    net-similarity objective by trying every single exemplar add and drop
    (and, on small instances, every swap), scoring each candidate after
    reassignment and medoid re-election and keeping the best strict
    improvement.  Candidates are enumerated in a fixed order and compared
    with strict inequalities, so the walk is deterministic; the objective
    strictly increases per step, so it terminates (the cap is a safety net).
    """
    n = S.shape[0]
    exemplars, assignment = _medoids(S, exemplars, assignment)
    current = _net(S, assignment)
    for _ in range(4 * n + 40):
        outside = [j for j in range(n) if j not in set(exemplars)]
        candidates = [sorted(exemplars + [j]) for j in outside]
        if len(exemplars) >= 2:
            candidates += [[e for e in exemplars if e != d] for d in exemplars]
        if n <= 64:
            for d in exemplars:
                kept = [e for e in exemplars if e != d]
                candidates += [sorted(kept + [j]) for j in outside]
        best: tuple[float, list[int], np.ndarray] | None = None
        for cand in candidates:
            ex2, a2 = _medoids(S, cand, _assign(S, cand))
            net2 = _net(S, a2)
            if net2 > current and (best is None or net2 > best[0]):
                best = (net2, ex2, a2)
        if best is None:
            break
        current, exemplars, assignment = best
    return exemplars, assignment


def affinity_propagation(
    points: Sequence[Sequence[float]],
    preference: float | str = "median",
    damping: float = DEFAULT_DAMPING,
    max_iter: int = DEFAULT_MAX_ITER,
    convergence_iter: int = DEFAULT_CONVERGENCE_ITER,
) -> ClusteringResult:
    """Cluster ``points``, returning exemplars and per-point assignment.

    ``preference`` is either a number used as every point's self-similarity
    or the string "median" for the median off-diagonal similarity.  The run
    is fully deterministic: no jitter is added and every argmax breaks ties
    toward the lower index.
    """
    S = similarity_matrix(points)
    n = S.shape[0]
    if n < 2:
        raise TooFewPoints(n)
    if not 0.5 <= damping < 1.0:
        raise ValueError(f"damping must be in [0.5, 1), got {damping}")

    if preference == "median":
        pref = float(np.median(S[~np.eye(n, dtype=bool)]))
    else:
        pref = float(preference)
    np.fill_diagonal(S, pref)

    R = np.zeros((n, n))
    A = np.zeros((n, n))
    idx = np.arange(n)
    stable = 0
    last: np.ndarray | None = None
    converged = False
    n_iter = 0

    for n_iter in range(1, max_iter + 1):
        # responsibilities: r(i,k) = s(i,k) - max_{k' != k} (a(i,k') + s(i,k'))
        AS = A + S
        first_k = AS.argmax(axis=1)
        first = AS[idx, first_k]
        AS[idx, first_k] = -np.inf
        second = AS.max(axis=1)
        R_new = S - first[:, None]
        R_new[idx, first_k] = S[idx, first_k] - second
        R = damping * R + (1.0 - damping) * R_new

        # availabilities: a(i,k) = min(0, r(k,k) + sum_{i' not in {i,k}} max(0, r(i',k)))
        Rp = np.maximum(R, 0.0)
        np.fill_diagonal(Rp, R.diagonal())
        col = Rp.sum(axis=0)
        A_new = col[None, :] - Rp
        diag = A_new.diagonal().copy()
        A_new = np.minimum(A_new, 0.0)
        np.fill_diagonal(A_new, diag)
        A = damping * A + (1.0 - damping) * A_new

        current = (A.diagonal() + R.diagonal()) > 0
        if last is not None and bool((current == last).all()):
            stable += 1
            if stable >= convergence_iter and bool(current.any()):
                converged = True
                break
        else:
            stable = 0
        last = current.copy()

    mask = (A.diagonal() + R.diagonal()) > 0
    exemplars = [int(k) for k in np.flatnonzero(mask)]
    if not exemplars:
        # fully symmetric inputs stall the messages with nobody elected;
        # seed the search with the best single exemplar instead
        exemplars = [int(S.sum(axis=0).argmax())]

    assignment = _assign(S, exemplars)
    exemplars, assignment = _refine(S, exemplars, assignment)
    net = math.fsum(float(S[i, assignment[i]]) for i in range(n))
    return ClusteringResult(
        exemplars=tuple(exemplars),
        assignment=tuple(int(v) for v in assignment),
        n_iterations=n_iter,
        converged=converged,
        net_similarity=net,
    )
