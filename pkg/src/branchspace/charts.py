"""Manifold-style charts around locally finite configurations.

Each point of a configuration gets a radius equal to half its separation
(distance to the rest of the configuration). Mapping unit-ball coordinates
z_i to u_i + eps_i * z_i then moves every point inside its own ball; the
balls of radius eps_i are pairwise disjoint and the doubled balls contain
no other point of the configuration, so the image is always a valid
configuration and the map inverts uniquely on its domain. Transition maps
between overlapping charts are blockwise affine.

Infinite locally finite configurations are represented by their
restriction to a compact window, which is where all computations happen.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .config import DEFAULT_TOL_EQ, as_point_array
from .errors import (
    DuplicatePoints,
    LengthMismatch,
    NotInDomain,
    NotInOverlap,
    OutOfUnitBall,
    SingletonConfiguration,
)


@dataclass(frozen=True)
class LocallyFiniteConfiguration:
    """A finite window onto a locally finite configuration.

    Point order is meaningful here (charts are indexed per point), so no
    canonicalization happens. `window` is an optional (2, d) lo/hi box; by
    construction every compact box inside a finite window meets finitely
    many points, which is what the certificate records.
    """

    points: np.ndarray
    window: np.ndarray | None = None
    locally_finite_certificate: bool = True

    def __post_init__(self):
        pts = as_point_array(self.points)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.window is not None:
            w = np.asarray(self.window, dtype=float).reshape(2, pts.shape[1])
            if not np.all(w[0] <= w[1]):
                raise ValueError("window lower corner must not exceed upper corner")
            w.setflags(write=False)
            object.__setattr__(self, "window", w)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]


def _pairwise(points: np.ndarray) -> np.ndarray:
    d = cdist(points, points)
    np.fill_diagonal(d, np.inf)
    return d


def separations(u: LocallyFiniteConfiguration | np.ndarray) -> np.ndarray:
    """Distance from each point to the rest of the configuration."""
    pts = u.points if isinstance(u, LocallyFiniteConfiguration) else as_point_array(u)
    if pts.shape[0] < 2:
        raise SingletonConfiguration("separation needs at least two points")
    return np.min(_pairwise(pts), axis=1)


def separation(u: LocallyFiniteConfiguration, i: int) -> float:
    """Separation of the i-th point; strictly positive for distinct points."""
    return float(separations(u)[i])


@dataclass(frozen=True)
class Chart:
    """Per-point radii eps_i over a base configuration.

    Invariants (checked on construction): all radii positive, the open
    balls B(u_i, eps_i) are pairwise disjoint, and B(u_i, 2 eps_i) contains
    no other point of the base.
    """

    base: LocallyFiniteConfiguration
    radii: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float).reshape(-1)
        if r.shape[0] != len(self.base):
            raise LengthMismatch("one radius per base point required")
        r.setflags(write=False)
        object.__setattr__(self, "radii", r)
        ok, why = self.verify()
        if not ok:
            raise ValueError(f"invalid chart radii: {why}")

    def __len__(self) -> int:
        return len(self.base)

    def verify(self, slack: float = 1e-12) -> tuple[bool, str | None]:
        """Check the radius invariants, with a small slack for equality
        cases (radii from build_chart sit exactly on the bounds)."""
        r = self.radii
        if np.any(r <= 0):
            return False, "radii must be strictly positive"
        if len(self.base) >= 2:
            d = _pairwise(self.base.points)
            if np.any(r[:, None] + r[None, :] > d + slack):
                return False, "balls B(u_i, eps_i) are not pairwise disjoint"
            if np.any(2.0 * r[:, None] > d + slack):
                return False, "a doubled ball B(u_i, 2 eps_i) captures another base point"
        return True, None


def build_chart(u: LocallyFiniteConfiguration, tol_eq: float = DEFAULT_TOL_EQ) -> Chart:
    """Chart with the canonical radii eps_i = separation_i / 2.

    In the flat ambient space the supremum defining the chart radius is
    attained exactly at the separation, so this is closed form.
    """
    if len(u) < 2:
        raise SingletonConfiguration("charts need at least two points")
    sep = separations(u)
    if np.min(sep) <= tol_eq:
        i = int(np.argmin(sep))
        raise DuplicatePoints(f"point {i} has a neighbor within tol_eq={tol_eq:g}")
    return Chart(u, sep / 2.0)


def _coerce_coords(c: Chart, z) -> np.ndarray:
    arr = as_point_array(z, dim=c.base.dimension)
    if arr.shape[0] != len(c):
        raise LengthMismatch(f"expected {len(c)} coordinates, got {arr.shape[0]}")
    return arr


def chart_apply(c: Chart, z) -> LocallyFiniteConfiguration:
    """Map unit-ball coordinates through the chart: u_i + eps_i * z_i.

    Every ||z_i|| must be < 1. The image is verified pairwise distinct
    (guaranteed by ball disjointness, so a failure means degenerate
    floating-point input).
    """
    zz = _coerce_coords(c, z)
    norms = np.sqrt(np.sum(zz**2, axis=1))
    if np.any(norms >= 1.0):
        i = int(np.argmax(norms >= 1.0))
        raise OutOfUnitBall(f"coordinate {i} has norm {norms[i]:.6g} >= 1")
    out = c.base.points + c.radii[:, None] * zz
    if out.shape[0] >= 2:
        d = _pairwise(out)
        if np.min(d) <= 0.0:
            raise DuplicatePoints("chart image degenerated to coincident points")
    return LocallyFiniteConfiguration(out, window=c.base.window)


def ball_assignment(c: Chart, v, tol_eq: float = DEFAULT_TOL_EQ) -> np.ndarray:
    """Match each chart ball to the unique point of v inside it.

    Returns pi with pi[i] = index into v of the point in ball i. Raises
    NotInDomain when a point lies in no ball, two points share a ball, or
    a point sits on a ball boundary within tol_eq (the open domain
    excludes boundaries, so membership would be ambiguous).
    """
    pts = v.points if isinstance(v, LocallyFiniteConfiguration) else as_point_array(v)
    if pts.shape[0] != len(c):
        raise LengthMismatch(f"expected {len(c)} points, got {pts.shape[0]}")
    d = cdist(pts, c.base.points)  # (points of v) x (balls)
    on_boundary = np.abs(d - c.radii[None, :]) <= tol_eq
    if np.any(on_boundary):
        j, i = np.unravel_index(int(np.argmax(on_boundary)), d.shape)
        raise NotInDomain(f"point {j} lies on the boundary of ball {i} within tol_eq")
    inside = d < c.radii[None, :]
    pi = np.full(len(c), -1, dtype=np.intp)
    for j in range(pts.shape[0]):
        hits = np.flatnonzero(inside[j])
        if hits.size == 0:
            raise NotInDomain(f"point {j} lies in no chart ball")
        if hits.size > 1:
            raise NotInDomain(f"point {j} lies in several chart balls")
        i = int(hits[0])
        if pi[i] >= 0:
            raise NotInDomain(f"points {int(pi[i])} and {j} both fall in ball {i}")
        pi[i] = j
    return pi


def chart_invert(c: Chart, v, tol_eq: float = DEFAULT_TOL_EQ) -> np.ndarray:
    """Inverse chart map: coordinates z with chart_apply(c, z) = v.

    Defined when every point of v sits strictly inside exactly one ball;
    otherwise NotInDomain.
    """
    pts = v.points if isinstance(v, LocallyFiniteConfiguration) else as_point_array(v)
    pi = ball_assignment(c, pts, tol_eq=tol_eq)
    return (pts[pi] - c.base.points) / c.radii[:, None]


def transition(c1: Chart, c2: Chart, z, tol_eq: float = DEFAULT_TOL_EQ) -> np.ndarray:
    """Transition map between charts: invert c1 after applying c2.

    On the overlap this is affine in each matched coordinate block with
    scale eps2_j / eps1_i. Raises NotInOverlap when the image of z leaves
    the domain of c1.
    """
    image = chart_apply(c2, z)
    try:
        return chart_invert(c1, image, tol_eq=tol_eq)
    except NotInDomain as err:
        raise NotInOverlap(str(err)) from err


def transition_jacobian(c1: Chart, c2: Chart, z, tol_eq: float = DEFAULT_TOL_EQ) -> np.ndarray:
    """Analytic Jacobian of transition(c1, c2, .) at z, as an
    (n*d, n*d) matrix: block (i, pi(i)) equals (eps2_pi(i)/eps1_i) * I."""
    image = chart_apply(c2, z)
    try:
        pi = ball_assignment(c1, image, tol_eq=tol_eq)
    except NotInDomain as err:
        raise NotInOverlap(str(err)) from err
    n, d = len(c1), c1.base.dimension
    jac = np.zeros((n * d, n * d))
    for i in range(n):
        j = int(pi[i])
        scale = c2.radii[j] / c1.radii[i]
        jac[i * d : (i + 1) * d, j * d : (j + 1) * d] = scale * np.eye(d)
    return jac


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------

def chart_to_dict(c: Chart) -> dict:
    """Chart JSON. The base uses the configuration schema but keeps its
    stored point order: radii are aligned with it."""
    return {
        "base": {"dim": c.base.dimension, "points": c.base.points.tolist()},
        "radii": c.radii.tolist(),
    }


def chart_from_dict(obj: dict) -> Chart:
    base = LocallyFiniteConfiguration(
        as_point_array(obj["base"]["points"], dim=int(obj["base"]["dim"]))
    )
    return Chart(base, np.asarray(obj["radii"], dtype=float))


def write_chart(c: Chart, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(chart_to_dict(c), fh)
        fh.write("\n")


def read_chart(path) -> Chart:
    with open(path, "r", encoding="utf-8") as fh:
        return chart_from_dict(json.load(fh))
