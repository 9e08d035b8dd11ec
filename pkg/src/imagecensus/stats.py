"""Deterministic numerical kernel: moments, skewness, Pearson r, Welch's t.

All accumulation goes through ``math.fsum`` (an error-free transform), so
results do not depend on how callers partition their data.  The skewness here
is the third standardized moment with a caller-supplied normalizer: the census
sums over face-present images but divides by the full class size, so the
normalizer may exceed the number of values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DegenerateInput, EmptyInput, InsufficientSamples, LengthMismatch


def mean(values: Sequence[float]) -> float:
    if not values:
        raise EmptyInput("mean of empty sequence")
    return math.fsum(values) / len(values)


def pstdev(values: Sequence[float], mu: float | None = None) -> float:
    """Population standard deviation (divide by n, not n-1)."""
    if not values:
        raise EmptyInput("pstdev of empty sequence")
    if min(values) == max(values):
        # constant input: the mean's own rounding must not fabricate spread
        return 0.0
    if mu is None:
        mu = mean(values)
    return math.sqrt(math.fsum((v - mu) ** 2 for v in values) / len(values))


def sample_var(values: Sequence[float], mu: float | None = None) -> float:
    """Unbiased (n-1) sample variance; needs at least 2 values."""
    if len(values) < 2:
        raise InsufficientSamples("sample variance needs >= 2 values")
    if min(values) == max(values):
        return 0.0
    if mu is None:
        mu = mean(values)
    return math.fsum((v - mu) ** 2 for v in values) / (len(values) - 1)


def skewness(values: Sequence[float], normalizer: int) -> float:
    """Third standardized moment of ``values``, divided by ``normalizer``.

    ``normalizer`` may exceed ``len(values)``; the standardizing mean and
    population sigma are always taken over ``values`` themselves.  A zero
    sigma (all values equal) yields 0 so that downstream rankings stay total.
    """
    if not values:
        raise EmptyInput("skewness of empty sequence")
    if normalizer <= 0:
        raise ValueError("normalizer must be a positive integer")
    mu = mean(values)
    sigma = pstdev(values, mu)
    if sigma == 0.0:
        return 0.0
    return math.fsum(((v - mu) / sigma) ** 3 for v in values) / normalizer


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation coefficient, clamped to [-1, 1]."""
    if len(x) != len(y):
        raise LengthMismatch(f"len(x)={len(x)} != len(y)={len(y)}")
    n = len(x)
    if n < 2:
        raise InsufficientSamples("pearson needs >= 2 pairs")
    mx = mean(x)
    my = mean(y)
    sx = math.fsum((v - mx) ** 2 for v in x)
    sy = math.fsum((v - my) ** 2 for v in y)
    if sx == 0.0 or sy == 0.0:
        raise DegenerateInput("zero variance in pearson input")
    cov = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    denom = math.sqrt(sx * sy)
    if not 0.0 < denom < math.inf:
        # the product under- or overflowed; the factored form cannot
        denom = math.sqrt(sx) * math.sqrt(sy)
    r = cov / denom
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True, slots=True)
class WelchResult:
    t: float
    df: float
    n1: int
    n2: int
    mean1: float
    mean2: float


def welch_t(a: Sequence[float], b: Sequence[float]) -> WelchResult:
    """Welch's unequal-variance t statistic with Welch-Satterthwaite df.

    p-values are deliberately not computed; callers get the statistic and
    degrees of freedom only.
    """
    if len(a) < 2 or len(b) < 2:
        raise InsufficientSamples("welch_t needs >= 2 values per sample")
    m1 = mean(a)
    m2 = mean(b)
    v1 = sample_var(a, m1)
    v2 = sample_var(b, m2)
    if v1 == 0.0 and v2 == 0.0:
        raise DegenerateInput("both samples have zero variance")
    q1 = v1 / len(a)
    q2 = v2 / len(b)
    se = math.sqrt(q1 + q2)
    t = (m1 - m2) / se
    # Welch-Satterthwaite via the weights w_i = q_i / (q1 + q2); the textbook
    # (q1+q2)^2 / (q1^2/(n1-1) + q2^2/(n2-1)) form underflows for tiny
    # variances, while the weights stay in [0, 1]
    w1 = q1 / (q1 + q2)
    w2 = q2 / (q1 + q2)
    df = 1.0 / (w1 ** 2 / (len(a) - 1) + w2 ** 2 / (len(b) - 1))
    return WelchResult(t=t, df=df, n1=len(a), n2=len(b), mean1=m1, mean2=m2)
