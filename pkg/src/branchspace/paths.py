"""Branched paths: staged configurations of sampled path segments.

A segment is a curve sampled on the uniform grid t_k = k/m over [0, 1]
with endpoints alpha (start) and omega (end). A branched path is a
sequence of stages, each a set of mutually compatible segments, where the
set of stage-i endpoints equals the set of stage-(i+1) start points. At a
junction, derivative sums of a test function over incoming and outgoing
segments can be compared order by order (truncated jets, one-sided finite
differences).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import factorial
from typing import Callable, Sequence

import numpy as np

from .config import DEFAULT_TOL_EQ, as_point_array
from .errors import (
    EndpointMismatch,
    InsufficientResolution,
    NotAJunction,
)
from .hausdorff import hausdorff_distance

MIN_INTERVALS = 8
MAX_JET_ORDER = 5
DEFAULT_JET_ORDER = 3
DEFAULT_JET_TOL = 1e-4

# One-sided stencils use order + _STENCIL_EXTRA points; the extra width
# keeps the truncation error at O(h^4), which the order-3 checks at
# m = 256 need to resolve residuals near 1e-5.
_STENCIL_EXTRA = 4


@dataclass(frozen=True, eq=False)
class PathSegment:
    """A curve sampled at t_k = k/m, m >= 8 intervals."""

    values: np.ndarray  # (m + 1, d)

    def __post_init__(self):
        vals = as_point_array(self.values)
        if vals.shape[0] < MIN_INTERVALS + 1:
            raise ValueError(f"segments need at least {MIN_INTERVALS} intervals")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, fn: Callable[[float], Sequence[float]], m: int = 256) -> "PathSegment":
        ts = np.arange(m + 1) / m
        return cls(np.asarray([np.atleast_1d(np.asarray(fn(t), dtype=float)) for t in ts]))

    @property
    def intervals(self) -> int:
        return self.values.shape[0] - 1

    @property
    def dimension(self) -> int:
        return self.values.shape[1]

    @property
    def alpha(self) -> np.ndarray:
        return self.values[0]

    @property
    def omega(self) -> np.ndarray:
        return self.values[-1]

    def at(self, t: float) -> np.ndarray:
        """Value at parameter t by linear interpolation between samples."""
        t = float(t)
        if not 0.0 <= t <= 1.0:
            raise ValueError("parameter must lie in [0, 1]")
        s = t * self.intervals
        k = min(int(np.floor(s)), self.intervals - 1)
        w = s - k
        return (1.0 - w) * self.values[k] + w * self.values[k + 1]

    def resampled(self, m: int) -> "PathSegment":
        if m == self.intervals:
            return self
        ts = np.arange(m + 1) / m
        src = np.arange(self.intervals + 1) / self.intervals
        out = np.column_stack([np.interp(ts, src, self.values[:, j]) for j in range(self.dimension)])
        return PathSegment(out)


def compose(g1: PathSegment, g2: PathSegment, tol_eq: float = DEFAULT_TOL_EQ) -> PathSegment:
    """Groupoid composition: traverse g1 on [0, 1/2], then g2 on [1/2, 1].

    Requires omega(g1) = alpha(g2) within tol_eq; the junction sample is
    their midpoint. alpha/omega of the result are g1's alpha and g2's
    omega, bitwise.
    """
    gap = float(np.linalg.norm(g1.omega - g2.alpha))
    if gap > tol_eq:
        raise EndpointMismatch(gap)
    half = max(g1.intervals, g2.intervals)
    a = g1.resampled(half).values
    b = g2.resampled(half).values
    joint = 0.5 * (a[-1] + b[0])
    return PathSegment(np.vstack([a[:-1], joint[None, :], b[1:]]))


def segment_image_distance(s1: PathSegment, s2: PathSegment) -> float:
    """Symmetric distance between segment images as polylines: max over
    the samples of one of the distance to the other's polyline."""
    return max(_samples_to_polyline(s1.values, s2.values), _samples_to_polyline(s2.values, s1.values))


def _samples_to_polyline(samples: np.ndarray, poly: np.ndarray) -> float:
    a, b = poly[:-1], poly[1:]  # (k, d) segment endpoints
    ab = b - a
    denom = np.sum(ab**2, axis=1)
    denom[denom == 0.0] = 1.0
    worst = 0.0
    for p in samples:
        t = np.clip(np.sum((p - a) * ab, axis=1) / denom, 0.0, 1.0)
        proj = a + t[:, None] * ab
        worst = max(worst, float(np.min(np.sqrt(np.sum((proj - p) ** 2, axis=1)))))
    return worst


def segments_compatible(g1: PathSegment, g2: PathSegment, tol_eq: float = DEFAULT_TOL_EQ) -> bool:
    """Two segments may share a stage unless they have the same image and
    the same (alpha, omega) pair. Image equality is decided at sampling
    resolution."""
    same_ends = (
        float(np.linalg.norm(g1.alpha - g2.alpha)) <= tol_eq
        and float(np.linalg.norm(g1.omega - g2.omega)) <= tol_eq
    )
    if not same_ends:
        return True
    return segment_image_distance(g1, g2) > tol_eq


def _dedup(points: np.ndarray, tol_eq: float) -> np.ndarray:
    out: list[np.ndarray] = []
    for p in points:
        if not any(np.linalg.norm(p - q) <= tol_eq for q in out):
            out.append(p)
    return np.asarray(out)


@dataclass(frozen=True, eq=False)
class BranchedPath:
    """Stages of segments, glued endpoint-configuration to start-configuration."""

    stages: tuple[tuple[PathSegment, ...], ...]

    def __init__(self, stages: Sequence[Sequence[PathSegment]]):
        object.__setattr__(self, "stages", tuple(tuple(stage) for stage in stages))
        if not self.stages or any(len(s) == 0 for s in self.stages):
            raise ValueError("a branched path needs at least one nonempty stage")

    @property
    def dimension(self) -> int:
        return self.stages[0][0].dimension

    def omega_config(self, i: int, tol_eq: float = DEFAULT_TOL_EQ) -> np.ndarray:
        return _dedup(np.asarray([g.omega for g in self.stages[i]]), tol_eq)

    def alpha_config(self, i: int, tol_eq: float = DEFAULT_TOL_EQ) -> np.ndarray:
        return _dedup(np.asarray([g.alpha for g in self.stages[i]]), tol_eq)

    def junctions(self, tol_eq: float = DEFAULT_TOL_EQ) -> list[tuple[int, np.ndarray]]:
        """(boundary index i, junction points) for each stage pair
        (i, i+1); the points are the deduplicated stage-i endpoints."""
        return [(i, self.omega_config(i, tol_eq)) for i in range(len(self.stages) - 1)]


@dataclass(frozen=True)
class BranchedPathReport:
    """Outcome of validate_branched: ok plus the first violation, if any."""

    ok: bool
    reason: str | None = None
    stage: int | None = None
    gap: float | None = None


def validate_branched(bp: BranchedPath, tol_eq: float = DEFAULT_TOL_EQ) -> BranchedPathReport:
    """Check stage compatibility and the endpoint-gluing condition.

    Consecutive stages must satisfy: the configuration of stage-i
    endpoints equals the configuration of stage-(i+1) start points, as
    sets, within tol_eq in the Hausdorff distance.
    """
    for i, stage in enumerate(bp.stages):
        for a in range(len(stage)):
            for b in range(a + 1, len(stage)):
                if not segments_compatible(stage[a], stage[b], tol_eq):
                    return BranchedPathReport(
                        False, f"segments {a} and {b} of stage {i} are incompatible", i, None
                    )
    for i in range(len(bp.stages) - 1):
        omegas = bp.omega_config(i, tol_eq)
        alphas = bp.alpha_config(i + 1, tol_eq)
        gap = hausdorff_distance(omegas, alphas)
        if gap > tol_eq:
            return BranchedPathReport(
                False,
                f"stage {i} endpoints do not match stage {i + 1} start points",
                i,
                gap,
            )
    return BranchedPathReport(True)


# ---------------------------------------------------------------------------
# Truncated jets at junctions
# ---------------------------------------------------------------------------

def fd_weights(deriv: int, offsets: Sequence[float]) -> np.ndarray:
    """Finite-difference weights on the given integer offsets (in units of
    the step h): sum_j w_j f(x + o_j h) ~ h^deriv f^(deriv)(x)."""
    offs = np.asarray(offsets, dtype=float)
    n = offs.shape[0]
    if deriv >= n:
        raise ValueError("need more stencil points than the derivative order")
    vander = np.vstack([offs**i / factorial(i) for i in range(n)])
    rhs = np.zeros(n)
    rhs[deriv] = 1.0
    return np.linalg.solve(vander, rhs)


def _one_sided_derivative(samples: np.ndarray, order: int, at_start: bool) -> float:
    """order-th derivative of a sampled scalar function at t=0 (forward
    stencil) or t=1 (backward stencil)."""
    m = samples.shape[0] - 1
    npts = order + _STENCIL_EXTRA
    h = 1.0 / m
    if at_start:
        w = fd_weights(order, np.arange(npts))
        vals = samples[:npts]
    else:
        w = fd_weights(order, -np.arange(npts))
        vals = samples[::-1][:npts]
    return float(w @ vals) / h**order


@dataclass(frozen=True)
class JetMatchResult:
    """Per-order residuals |sum of incoming derivatives - sum of outgoing
    derivatives| of f along the junction's segments. `passed` is True when
    every computed order is within tolerance; individual orders can be
    inspected in `residuals` (keyed by derivative order)."""

    passed: bool
    residuals: dict[int, float]
    tolerance: float
    junction: np.ndarray
    incoming: int
    outgoing: int

    def residual(self, order: int) -> float:
        return self.residuals[order]


def jet_match(
    bp: BranchedPath,
    branch_point,
    f: Callable[[np.ndarray], float],
    order: int = DEFAULT_JET_ORDER,
    jet_tol: float = DEFAULT_JET_TOL,
    tol_eq: float = DEFAULT_TOL_EQ,
) -> JetMatchResult:
    """Compare derivative sums of f across a junction, orders 1..order.

    Incoming segments are those ending at the branch point (derivatives
    taken one-sided at t=1), outgoing ones start there (one-sided at t=0).
    The tolerance is jet_tol scaled by max(1, max |f| over the involved
    samples). Orders above the sampling resolution raise
    InsufficientResolution; higher orders also amplify rounding noise by
    h^-order, so coarse segments need looser tolerances.
    """
    if not 1 <= order <= MAX_JET_ORDER:
        raise ValueError(f"order must be between 1 and {MAX_JET_ORDER}")
    p = np.atleast_1d(np.asarray(branch_point, dtype=float))
    incoming: list[PathSegment] = []
    outgoing: list[PathSegment] = []
    for i in range(len(bp.stages) - 1):
        seen_in = [g for g in bp.stages[i] if np.linalg.norm(g.omega - p) <= tol_eq]
        seen_out = [g for g in bp.stages[i + 1] if np.linalg.norm(g.alpha - p) <= tol_eq]
        if seen_in and seen_out:
            incoming.extend(seen_in)
            outgoing.extend(seen_out)
    if not incoming or not outgoing:
        raise NotAJunction(f"{p.tolist()} is not a stage junction of this path")

    min_m = min(g.intervals for g in incoming + outgoing)
    if min_m < 4 * order:
        raise InsufficientResolution(
            f"order-{order} jets need at least {4 * order} intervals, finest segment has {min_m}"
        )

    traces_in = [np.asarray([float(f(q)) for q in g.values]) for g in incoming]
    traces_out = [np.asarray([float(f(q)) for q in g.values]) for g in outgoing]
    scale = max(1.0, max(float(np.max(np.abs(tr))) for tr in traces_in + traces_out))
    tol = jet_tol * scale

    residuals: dict[int, float] = {}
    for k in range(1, order + 1):
        d_in = sum(_one_sided_derivative(tr, k, at_start=False) for tr in traces_in)
        d_out = sum(_one_sided_derivative(tr, k, at_start=True) for tr in traces_out)
        residuals[k] = abs(d_in - d_out)
    return JetMatchResult(
        passed=all(r <= tol for r in residuals.values()),
        residuals=residuals,
        tolerance=tol,
        junction=p,
        incoming=len(incoming),
        outgoing=len(outgoing),
    )


def coordinate_functions(dimension: int) -> list[Callable[[np.ndarray], float]]:
    return [(lambda q, j=j: float(q[j])) for j in range(dimension)]


def default_test_functions(dimension: int) -> list[Callable[[np.ndarray], float]]:
    """Coordinates and their pairwise products: the default family for
    junction jet checks (no completeness claim)."""
    fns = coordinate_functions(dimension)
    for a in range(dimension):
        for b in range(a, dimension):
            fns.append(lambda q, a=a, b=b: float(q[a] * q[b]))
    return fns


# ---------------------------------------------------------------------------
# Demos and interchange
# ---------------------------------------------------------------------------

def make_split_loop(m: int = 256, final_offset: Sequence[float] = (0.0, 0.0)) -> BranchedPath:
    """A line segment that splits into the upper and lower unit half
    circles and rejoins into a line: stages {in}, {upper, lower}, {out}.

    `final_offset` translates the outgoing straight segment, which breaks
    the gluing condition and is useful for negative tests.
    """
    off = np.asarray(final_offset, dtype=float)
    g_in = PathSegment.from_function(lambda t: (t - 2.0, 0.0), m)
    g_up = PathSegment.from_function(lambda t: (np.cos(np.pi * (1.0 - t)), np.sin(np.pi * t)), m)
    g_dn = PathSegment.from_function(lambda t: (np.cos(np.pi * (1.0 - t)), -np.sin(np.pi * t)), m)
    g_out = PathSegment.from_function(lambda t: (t + 1.0 + off[0], 0.0 + off[1]), m)
    return BranchedPath([[g_in], [g_up, g_dn], [g_out]])


def branched_path_to_dict(bp: BranchedPath) -> dict:
    def seg_dict(g: PathSegment) -> dict:
        ts = np.arange(g.intervals + 1) / g.intervals
        return {"samples": [[float(t), v.tolist()] for t, v in zip(ts, g.values)]}

    return {"stages": [[seg_dict(g) for g in stage] for stage in bp.stages]}


def branched_path_from_dict(obj: dict) -> BranchedPath:
    stages = []
    for stage in obj["stages"]:
        segs = []
        for g in stage:
            samples = g["samples"]
            ts = np.asarray([s[0] for s in samples], dtype=float)
            vals = np.asarray([s[1] for s in samples], dtype=float)
            m = len(samples) - 1
            if m < 1 or not np.allclose(ts, np.arange(m + 1) / m, atol=1e-12):
                raise ValueError("segment samples must sit on the uniform grid k/m")
            segs.append(PathSegment(vals))
        stages.append(segs)
    return BranchedPath(stages)


def branched_path_to_dot(bp: BranchedPath, tol_eq: float = DEFAULT_TOL_EQ) -> str:
    """DOT digraph: nodes are junction configurations, edges are segments."""

    def fmt(points: np.ndarray) -> str:
        return "{" + "; ".join(",".join(f"{x:g}" for x in p) for p in points) + "}"

    nodes = [bp.alpha_config(0, tol_eq)] + [bp.omega_config(i, tol_eq) for i in range(len(bp.stages))]
    lines = ["digraph branched_path {"]
    for k, pts in enumerate(nodes):
        lines.append(f'  n{k} [label="{fmt(pts)}"];')
    for i, stage in enumerate(bp.stages):
        for j, _ in enumerate(stage):
            lines.append(f'  n{i} -> n{i + 1} [label="s{i}.{j}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_branched_path(bp: BranchedPath, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(branched_path_to_dict(bp), fh)
        fh.write("\n")


def read_branched_path(path) -> BranchedPath:
    with open(path, "r", encoding="utf-8") as fh:
        return branched_path_from_dict(json.load(fh))
