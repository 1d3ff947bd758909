"""The branched-configuration metric: Hausdorff distance between finite
point configurations, a uniform-grid index for exact nearest-neighbor
queries, and detection of merge/split events along trajectories.

The metric is
    d(u, v) = max( max_{x in u} min_{y in v} |x - y|,
                   max_{y in v} min_{x in u} |x - y| )
which glues the fixed-cardinality strata along their merge diagonals: two
particles converging to one point converge to the single-particle
configuration in this metric.
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .config import Configuration, DEFAULT_TOL_EQ, as_point, as_point_array
from .errors import EmptyConfiguration, IndexMismatch, NonMonotoneTime

DEFAULT_MERGE_TOL = 10 * DEFAULT_TOL_EQ

# Rows per block when scanning distance matrices, keeps peak memory at
# ~block * n doubles.
_BLOCK = 256


def _points_of(v) -> np.ndarray:
    if isinstance(v, Configuration):
        return v.points
    return as_point_array(v)


def dist_to_set(x, v) -> float:
    """Distance from a point to a nonempty configuration: min over its
    points."""
    pts = _points_of(v)
    if pts.shape[0] == 0:
        raise EmptyConfiguration("distance to an empty configuration")
    q = as_point(x)
    return float(np.min(np.sqrt(np.sum((pts - q) ** 2, axis=1))))


def _directed(a: np.ndarray, b: np.ndarray) -> float:
    """max over a of the distance to b, by blocked linear scan.

    Scans squared distances and takes one square root at the end: sqrt is
    monotone and correctly rounded, so the result is bit-identical to
    reducing rooted distances, minus ~n^2 square roots.
    """
    worst = 0.0
    for lo in range(0, a.shape[0], _BLOCK):
        d2 = cdist(a[lo : lo + _BLOCK], b, "sqeuclidean")
        worst = max(worst, float(np.max(np.min(d2, axis=1))))
    return float(np.sqrt(worst))


def hausdorff_distance(u, v, metric=None) -> float:
    """Hausdorff distance between two nonempty configurations.

    Cardinalities need not agree. With `metric` given, falls back to a
    plain double loop (small inputs only).
    """
    a, b = _points_of(u), _points_of(v)
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise EmptyConfiguration("hausdorff distance needs nonempty configurations")
    if metric is not None:
        d_ab = max(min(metric(x, y) for y in b) for x in a)
        d_ba = max(min(metric(x, y) for x in a) for y in b)
        return float(max(d_ab, d_ba))
    return max(_directed(a, b), _directed(b, a))


# ---------------------------------------------------------------------------
# Uniform-grid spatial index
# ---------------------------------------------------------------------------

def _estimate_spacing(points: np.ndarray) -> float:
    """Median nearest-neighbor distance over a deterministic subsample."""
    n = points.shape[0]
    if n < 2:
        return 1.0
    step = max(1, n // 256)
    sample = points[::step]
    nn = np.empty(sample.shape[0])
    for k in range(0, sample.shape[0], _BLOCK):
        d = cdist(sample[k : k + _BLOCK], points)
        d[d == 0.0] = np.inf
        nn[k : k + _BLOCK] = np.min(d, axis=1)
    nn = nn[np.isfinite(nn)]
    med = float(np.median(nn)) if nn.size else 0.0
    if med > 0.0:
        return med
    # degenerate cloud: fall back to a uniform-density estimate
    span = np.ptp(points, axis=0)
    vol = float(np.prod(span[span > 0])) if np.any(span > 0) else 0.0
    if vol > 0.0:
        return max((vol / n) ** (1.0 / np.count_nonzero(span > 0)), 1e-12)
    return 1.0


class GridIndex:
    """Uniform-grid hash over one configuration's points.

    Nearest-neighbor queries are exact: the search expands Chebyshev rings
    of cells and stops once the best distance provably cannot be beaten
    (every point in ring r+1 is at least r * cell_size away). The structure
    is immutable after construction and safe for concurrent queries.
    """

    def __init__(self, points, cell_size: float | None = None):
        pts = _points_of(points)
        if pts.shape[0] == 0:
            raise EmptyConfiguration("cannot index an empty configuration")
        self.points = pts
        self.cell_size = float(cell_size) if cell_size else _estimate_spacing(pts)
        if self.cell_size <= 0:
            raise ValueError("cell_size must be positive")
        self.origin = np.min(pts, axis=0)
        keys = np.floor((pts - self.origin) / self.cell_size).astype(np.int64)
        cells: dict[tuple, list[int]] = {}
        for i, key in enumerate(map(tuple, keys)):
            cells.setdefault(key, []).append(i)
        self._cells = {k: np.asarray(ix, dtype=np.intp) for k, ix in cells.items()}
        self._key_lo = keys.min(axis=0)
        self._key_hi = keys.max(axis=0)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def covers(self, u) -> bool:
        pts = _points_of(u)
        return pts.shape == self.points.shape and bool(np.array_equal(pts, self.points))

    def _cell_of(self, q: np.ndarray) -> np.ndarray:
        return np.floor((q - self.origin) / self.cell_size).astype(np.int64)

    def _max_ring(self, key: np.ndarray) -> int:
        return int(np.max(np.maximum(self._key_hi - key, key - self._key_lo).clip(min=0)))

    def _shell_candidates(self, key: np.ndarray, r: int) -> Iterator[np.ndarray]:
        d = key.shape[0]
        if r == 0:
            hit = self._cells.get(tuple(key))
            if hit is not None:
                yield hit
            return
        for off in itertools.product(range(-r, r + 1), repeat=d):
            if max(abs(o) for o in off) != r:
                continue
            hit = self._cells.get(tuple(key + np.asarray(off)))
            if hit is not None:
                yield hit

    def nearest(self, x, stop_below: float | None = None) -> tuple[float, int]:
        """Exact nearest point of the indexed configuration.

        Returns (distance, index). If `stop_below` is given the search may
        return early with any (distance, index) whose distance is
        <= stop_below; this keeps directed-Hausdorff scans cheap without
        affecting their max.
        """
        q = as_point(x)
        key = self._cell_of(q)
        best = np.inf
        best_i = -1
        r_cap = self._max_ring(key)
        r = 0
        while True:
            # switch to a full scan when the shell has more cells than the
            # index has occupied cells (far-away or sparse queries)
            if r > 0 and (2 * r + 1) ** self.dimension > 2 * len(self._cells):
                for key2, idx in self._cells.items():
                    lo = np.max(np.abs(np.asarray(key2) - key))
                    if lo < r:
                        continue  # already searched
                    d = np.sqrt(np.sum((self.points[idx] - q) ** 2, axis=1))
                    k = int(np.argmin(d))
                    if d[k] < best:
                        best, best_i = float(d[k]), int(idx[k])
                return best, best_i
            for idx in self._shell_candidates(key, r):
                d = np.sqrt(np.sum((self.points[idx] - q) ** 2, axis=1))
                k = int(np.argmin(d))
                if d[k] < best:
                    best, best_i = float(d[k]), int(idx[k])
            if stop_below is not None and best <= stop_below:
                return best, best_i
            if best <= r * self.cell_size or r > r_cap:
                # any point in ring r+1 sits at distance >= r*cell_size
                return best, best_i
            r += 1


# Name used by the rest of the code base and the docs for the index type.
SpatialIndex = GridIndex


def _directed_indexed(a: np.ndarray, idx_b: GridIndex) -> float:
    worst = 0.0
    for x in a:
        d, _ = idx_b.nearest(x, stop_below=worst)
        if d > worst:
            worst = d
    return worst


def hausdorff_distance_indexed(
    u,
    v,
    idx_u: GridIndex | None = None,
    idx_v: GridIndex | None = None,
) -> float:
    """Same value as hausdorff_distance (within 1e-12), via grid indexes.

    Indexes are built on the fly when not supplied; supplied indexes must
    cover their configurations or IndexMismatch is raised.
    """
    a, b = _points_of(u), _points_of(v)
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise EmptyConfiguration("hausdorff distance needs nonempty configurations")
    if idx_u is None:
        idx_u = GridIndex(a)
    elif not idx_u.covers(a):
        raise IndexMismatch("idx_u does not cover u")
    if idx_v is None:
        idx_v = GridIndex(b)
    elif not idx_v.covers(b):
        raise IndexMismatch("idx_v does not cover v")
    return max(_directed_indexed(a, idx_v), _directed_indexed(b, idx_u))


# ---------------------------------------------------------------------------
# Stratum-crossing events
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StratumEvent:
    """A cardinality change along a trajectory, resolved to the sampling
    grid. `location` holds the absorbing (merge) or spawning (split)
    points, one row each."""

    time: float
    kind: str  # "merge" | "split"
    before_cardinality: int
    after_cardinality: int
    location: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "t": self.time,
            "kind": self.kind,
            "from": self.before_cardinality,
            "to": self.after_cardinality,
            "at": self.location[0].tolist(),
        }


def _attribution_clusters(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Map each src point to its nearest dst point (ties resolve to the
    first, i.e. canonically smallest, index); return dst points that
    receive at least two src points."""
    d = cdist(src, dst)
    assign = np.argmin(d, axis=1)
    counts = np.bincount(assign, minlength=dst.shape[0])
    return dst[counts >= 2]


def detect_stratum_events(
    traj: Sequence[tuple[float, Configuration]],
    merge_tol: float = DEFAULT_MERGE_TOL,
) -> list[StratumEvent]:
    """Scan a sampled trajectory for merge/split events.

    A merge is emitted at a step where the cardinality drops and every
    point of the old configuration lies within merge_tol of the new one
    (directed Hausdorff); splits are symmetric. Cardinality changes that
    are not local in this sense produce no event.
    """
    times = [float(t) for t, _ in traj]
    for a, b in zip(times, times[1:]):
        if not b > a:
            raise NonMonotoneTime(f"times must be strictly increasing, got {a} then {b}")
    frames = [u for _, u in traj]
    for u in frames:
        if len(u) == 0:
            raise EmptyConfiguration("trajectory frames must be nonempty")

    events: list[StratumEvent] = []
    for k in range(1, len(frames)):
        old, new = frames[k - 1].points, frames[k].points
        n_old, n_new = old.shape[0], new.shape[0]
        if n_new < n_old and _directed(old, new) <= merge_tol:
            events.append(
                StratumEvent(times[k], "merge", n_old, n_new, _attribution_clusters(old, new))
            )
        elif n_new > n_old and _directed(new, old) <= merge_tol:
            events.append(
                StratumEvent(times[k], "split", n_old, n_new, _attribution_clusters(new, old))
            )
    return events


# ---------------------------------------------------------------------------
# Trajectory interchange and benchmarking
# ---------------------------------------------------------------------------

def trajectory_to_dict(traj: Sequence[tuple[float, Configuration]]) -> dict:
    return {
        "times": [float(t) for t, _ in traj],
        "frames": [{"dim": u.dimension, "points": u.points.tolist()} for _, u in traj],
    }


def trajectory_from_dict(obj: dict, tol_eq: float = DEFAULT_TOL_EQ) -> list[tuple[float, Configuration]]:
    times = [float(t) for t in obj["times"]]
    frames = [
        Configuration(as_point_array(f["points"], dim=int(f["dim"])), tol_eq=tol_eq)
        for f in obj["frames"]
    ]
    if len(times) != len(frames):
        raise ValueError("times and frames must have equal length")
    return list(zip(times, frames))


def events_to_json_lines(events: Iterable[StratumEvent]) -> str:
    return "".join(json.dumps(e.to_json_dict(), sort_keys=True) + "\n" for e in events)


def two_particle_merge_trajectory(times: Sequence[float] | None = None) -> list[tuple[float, Configuration]]:
    """Two particles at +-(1-t) on the line, coalescing at t = 1."""
    ts = [0.0, 0.5, 1.0] if times is None else [float(t) for t in times]
    traj = []
    for t in ts:
        r = 1.0 - t
        pts = [[0.0]] if r == 0.0 else [[-r], [r]]
        traj.append((t, Configuration.from_points(pts)))
    return traj


def benchmark(n: int, dimension: int = 2, seed: int = 0) -> dict:
    """Time brute-force vs indexed Hausdorff distance on two uniform
    clouds of n points; reports agreement and speedup."""
    rng = np.random.default_rng(seed)
    side = float(n) ** (1.0 / dimension)
    u = rng.uniform(0.0, side, size=(n, dimension))
    v = rng.uniform(0.0, side, size=(n, dimension))

    t0 = time.perf_counter()
    brute = max(_directed(u, v), _directed(v, u))
    t1 = time.perf_counter()
    idx_u, idx_v = GridIndex(u), GridIndex(v)
    t2 = time.perf_counter()
    fast = max(_directed_indexed(u, idx_v), _directed_indexed(v, idx_u))
    t3 = time.perf_counter()

    brute_s, build_s, query_s = t1 - t0, t2 - t1, t3 - t2
    indexed_s = build_s + query_s
    return {
        "n": n,
        "dimension": dimension,
        "seed": seed,
        "brute_seconds": brute_s,
        "index_build_seconds": build_s,
        "index_query_seconds": query_s,
        "indexed_seconds": indexed_s,
        "speedup": brute_s / indexed_s if indexed_s > 0 else float("inf"),
        "difference": abs(brute - fast),
        "distance": brute,
    }
