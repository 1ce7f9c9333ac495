"""Dataset statistics: duration quartiles, distance-binned bands, occurrence grids.

These mirror the recorded-data analyses used to motivate the model: bands of a
signal over goal distance, a 2D occurrence grid of (distance, signal) pairs,
and the duration-quartile split used for the data-quality study.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .recording import DemoSample, Demonstration

QUARTILE_PART_NAMES = ("q1", "q2", "q3", "q4", "all")

_SAMPLE_FIELDS = {
    "x": lambda s: s.pose.x,
    "z": lambda s: s.pose.z,
    "theta": lambda s: s.pose.theta,
    "vx": lambda s: s.twist.vx,
    "vz": lambda s: s.twist.vz,
    "omega": lambda s: s.twist.omega,
    "fx": lambda s: s.wrench.fx,
    "fz": lambda s: s.wrench.fz,
    "tau": lambda s: s.wrench.tau,
}


def sample_goal_distance(s: DemoSample) -> float:
    return math.hypot(s.pose.x, s.pose.z)


def feature_getter(feature: str):
    try:
        return _SAMPLE_FIELDS[feature]
    except KeyError:
        raise DataError(
            f"unknown feature {feature!r}; choose from {sorted(_SAMPLE_FIELDS)}"
        ) from None


@dataclass
class QuartileSplit:
    q1: float
    q2: float
    q3: float
    parts: dict[str, list[Demonstration]]


def partition_by_duration(demos: list[Demonstration]) -> QuartileSplit:
    """Split by duration quartiles into q1..q4 plus the full set.

    The four quartile parts are disjoint and exhaustive: [0, Q1], (Q1, Q2],
    (Q2, Q3], (Q3, inf).
    """
    if not demos:
        raise DataError("cannot partition an empty dataset")
    durations = np.array([d.duration for d in demos])
    q1, q2, q3 = (float(v) for v in np.percentile(durations, [25.0, 50.0, 75.0]))
    parts: dict[str, list[Demonstration]] = {name: [] for name in QUARTILE_PART_NAMES}
    for demo in demos:
        t = demo.duration
        if t <= q1:
            parts["q1"].append(demo)
        elif t <= q2:
            parts["q2"].append(demo)
        elif t <= q3:
            parts["q3"].append(demo)
        else:
            parts["q4"].append(demo)
        parts["all"].append(demo)
    return QuartileSplit(q1, q2, q3, parts)


@dataclass
class BandBins:
    edges: np.ndarray   # (bins+1,) goal-distance bin edges
    mins: np.ndarray    # (bins,), nan where empty
    maxs: np.ndarray
    means: np.ndarray
    counts: np.ndarray  # (bins,) int

    @property
    def empty_mask(self) -> np.ndarray:
        return self.counts == 0


def _bin_index(v: float, lo: float, hi: float, nbins: int) -> int:
    """Index with inclusive top edge; -1 when out of range."""
    if not (lo <= v <= hi):
        return -1
    if v == hi:
        return nbins - 1
    return int((v - lo) / (hi - lo) * nbins)


def band_plot(
    demos: list[Demonstration],
    feature: str,
    bins: int = 60,
    distance_range: tuple[float, float] | None = None,
) -> BandBins:
    """Per-goal-distance-bin min/max/mean of one recorded signal."""
    if bins < 1:
        raise DataError("bins must be >= 1")
    get = feature_getter(feature)
    dist = []
    vals = []
    for demo in demos:
        for s in demo.samples:
            dist.append(sample_goal_distance(s))
            vals.append(get(s))
    if not dist:
        raise DataError("no samples to bin")
    lo, hi = distance_range if distance_range else (0.0, max(dist))
    if hi <= lo:
        hi = lo + 1.0
    edges = np.linspace(lo, hi, bins + 1)
    mins = np.full(bins, np.nan)
    maxs = np.full(bins, np.nan)
    sums = np.zeros(bins)
    counts = np.zeros(bins, dtype=np.int64)
    for d, v in zip(dist, vals):
        i = _bin_index(d, lo, hi, bins)
        if i < 0:
            continue
        counts[i] += 1
        sums[i] += v
        if math.isnan(mins[i]) or v < mins[i]:
            mins[i] = v
        if math.isnan(maxs[i]) or v > maxs[i]:
            maxs[i] = v
    means = np.full(bins, np.nan)
    nz = counts > 0
    means[nz] = sums[nz] / counts[nz]
    return BandBins(edges, mins, maxs, means, counts)


@dataclass
class OccurrenceGrid:
    counts: np.ndarray         # (width, height): distance bins x feature bins
    distance_edges: np.ndarray
    feature_edges: np.ndarray
    in_range: int
    total: int


def occurrence_grid(
    demos: list[Demonstration],
    feature: str,
    width: int = 180,
    height: int = 60,
    distance_range: tuple[float, float] | None = None,
    feature_range: tuple[float, float] | None = None,
) -> OccurrenceGrid:
    """Counts of (goal distance, signal value) pairs on a width x height grid."""
    if width < 1 or height < 1:
        raise DataError("grid dimensions must be >= 1")
    get = feature_getter(feature)
    dist = []
    vals = []
    for demo in demos:
        for s in demo.samples:
            dist.append(sample_goal_distance(s))
            vals.append(get(s))
    if not dist:
        raise DataError("no samples to grid")
    dlo, dhi = distance_range if distance_range else (0.0, max(dist))
    flo, fhi = feature_range if feature_range else (min(vals), max(vals))
    if dhi <= dlo:
        dhi = dlo + 1.0
    if fhi <= flo:
        fhi = flo + 1.0
    counts = np.zeros((width, height), dtype=np.int64)
    in_range = 0
    for d, v in zip(dist, vals):
        ix = _bin_index(d, dlo, dhi, width)
        iy = _bin_index(v, flo, fhi, height)
        if ix < 0 or iy < 0:
            continue
        counts[ix, iy] += 1
        in_range += 1
    return OccurrenceGrid(
        counts,
        np.linspace(dlo, dhi, width + 1),
        np.linspace(flo, fhi, height + 1),
        in_range,
        len(dist),
    )
