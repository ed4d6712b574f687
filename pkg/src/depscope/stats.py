"""Descriptive statistics: box-and-whisker summaries, OLS fits, breakdowns.

Quartiles use linear interpolation between order statistics (the R-7
convention shared by numpy's default percentile and the usual plotting
defaults).  Whiskers extend from the box to the farthest data point lying
within 1.5 IQR of the box; when no point lies outside the box on a side,
the whisker collapses onto the box edge.  Points beyond the whiskers are
fliers.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .dataset import AnalysisRow
from .errors import DomainError

WHISKER_REACH = 1.5

BREAKDOWN_FIELDS = ("language", "license", "category", "backer")

UNSET_LABEL = "unset"
MULTI_LABEL = "multi"


@dataclass(frozen=True)
class BoxStats:
    q1: float
    median: float
    q3: float
    iqr: float
    whisker_low: float
    whisker_high: float
    fliers: tuple[float, ...]
    n: int


@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    r: float
    n: int


class BreakdownEntry(NamedTuple):
    label: str
    count: int
    share: float


def box_stats(values: Sequence[float]) -> BoxStats:
    """Five-number box summary with 1.5 IQR whiskers and fliers."""
    if len(values) == 0:
        raise DomainError("box statistics of an empty sample are undefined")
    x = np.asarray(values, dtype=np.float64)
    q1, median, q3 = (float(v) for v in np.percentile(x, [25, 50, 75]))
    iqr = q3 - q1
    high_fence = q3 + WHISKER_REACH * iqr
    low_fence = q1 - WHISKER_REACH * iqr

    inside_high = x[x <= high_fence]
    if inside_high.size == 0 or float(inside_high.max()) < q3:
        whisker_high = q3
    else:
        whisker_high = float(inside_high.max())
    inside_low = x[x >= low_fence]
    if inside_low.size == 0 or float(inside_low.min()) > q1:
        whisker_low = q1
    else:
        whisker_low = float(inside_low.min())

    fliers = tuple(sorted(float(v) for v in x[(x < whisker_low) | (x > whisker_high)]))
    return BoxStats(
        q1=q1,
        median=median,
        q3=q3,
        iqr=iqr,
        whisker_low=whisker_low,
        whisker_high=whisker_high,
        fliers=fliers,
        n=int(x.size),
    )


def linear_regression(points: Sequence[tuple[float, float]]) -> RegressionFit:
    """Ordinary least squares line plus the Pearson correlation coefficient."""
    if len(points) < 2:
        raise DomainError("regression needs at least two points")
    xs = np.asarray([p[0] for p in points], dtype=np.float64)
    ys = np.asarray([p[1] for p in points], dtype=np.float64)
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sxx = float(np.dot(dx, dx))
    if sxx == 0.0:
        raise DomainError("degenerate fit: all x values are equal")
    sxy = float(np.dot(dx, dy))
    syy = float(np.dot(dy, dy))
    slope = sxy / sxx
    intercept = float(ys.mean()) - slope * float(xs.mean())
    r = 0.0 if syy == 0.0 else sxy / math.sqrt(sxx * syy)
    return RegressionFit(slope=slope, intercept=intercept, r=r, n=len(points))


def _breakdown_label(row: AnalysisRow, field: str) -> str:
    if field == "license":
        if not row.licenses:
            return UNSET_LABEL
        if len(row.licenses) > 1:
            return MULTI_LABEL
        return row.licenses[0]
    value = getattr(row.metadata, field)
    return value if value else UNSET_LABEL


def breakdown(rows: Sequence[AnalysisRow], field: str) -> list[BreakdownEntry]:
    """Label counts and shares for one categorical field.

    Empty values collapse to "unset"; multi-license packages collapse to
    "multi".  Sorted by count descending, then label ascending.
    """
    if field not in BREAKDOWN_FIELDS:
        raise DomainError(f"field must be one of {BREAKDOWN_FIELDS}, got {field!r}")
    if not rows:
        return []
    counts = Counter(_breakdown_label(row, field) for row in rows)
    total = len(rows)
    ordered = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return [BreakdownEntry(label, count, count / total) for label, count in ordered]
