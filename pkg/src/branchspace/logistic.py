"""Logistic-map attractors and the period-doubling cascade.

The map x -> a x (1 - x) on [0, 1] drives the multivalued equilibrium
sections: for each parameter a the attractor is a periodic orbit whose
period doubles as a crosses the cascade values a_1 = 3, a_2 = 1 + sqrt(6),
... Orbits are located by forward iteration from the critical point 0.5,
then polished by Newton's method on x -> map^p(x) - x (the derivative is
the exact chain-rule product), and reduced to their primitive period.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ParameterOutOfRange

DEFAULT_ORBIT_TOL = 1e-10
DEFAULT_BURN_IN = 10_000
MAX_BURN_IN = 1_000_000
_DETECT_TOL = 1e-5
_MAX_PERIOD_CAP = 64

# Exactly at a doubling parameter the cycle equation has a multiple root
# and Newton stalls at the cube root of float noise (~1e-6 off); the
# reduction threshold absorbs that so the orbit collapses to its true
# primitive period. Genuine cycles this close to coincidence only occur
# within ~1e-9 of a doubling parameter, where they are unresolvable anyway.
_PRIMITIVE_TOL = 1e-5


def logistic(a: float, x: float) -> float:
    return a * x * (1.0 - x)


def logistic_derivative(a: float, x: float) -> float:
    return a * (1.0 - 2.0 * x)


def iterate(a: float, x: float, n: int) -> float:
    for _ in range(n):
        x = a * x * (1.0 - x)
    return x


@dataclass(frozen=True)
class PeriodicOrbit:
    """A primitive periodic orbit of the logistic map.

    `points` follow the iteration order starting from the smallest orbit
    point; `multiplier` is the product of map derivatives around the
    cycle. Throughout the period-doubling regime the period is a power of
    two; in the odd windows beyond the cascade it is whatever the true
    primitive period is.
    """

    parameter: float
    period: int
    points: tuple[float, ...]
    multiplier: float

    @property
    def stable(self) -> bool:
        return abs(self.multiplier) < 1.0


@dataclass(frozen=True)
class Chaotic:
    """No periodic attractor up to max_period locked in."""

    parameter: float
    max_period: int


def _validate_parameter(a: float) -> float:
    a = float(a)
    if not 0.0 < a <= 4.0:
        raise ParameterOutOfRange(f"parameter must lie in (0, 4], got {a}")
    return a


def _orbit_multiplier(a: float, points: np.ndarray) -> float:
    return float(np.prod(a * (1.0 - 2.0 * points)))


def _newton_polish(a: float, p: int, x0: float, tol: float, max_iter: int = 60) -> float | None:
    """Newton on F(x) = map^p(x) - x; F' is the chain-rule product minus 1.

    Returns the polished root, or None when the iteration leaves [0, 1]
    or fails to converge.
    """
    x = float(x0)
    for _ in range(max_iter):
        y = x
        deriv = 1.0
        for _ in range(p):
            deriv *= a * (1.0 - 2.0 * y)
            y = a * y * (1.0 - y)
        fval = y - x
        fprime = deriv - 1.0
        if fprime == 0.0:
            return None
        step = fval / fprime
        x_new = x - step
        if not 0.0 <= x_new <= 1.0:
            # bisection-style damping back into the unit interval
            x_new = min(1.0, max(0.0, 0.5 * (x + min(1.0, max(0.0, x_new)))))
        if abs(x_new - x) <= 1e-15:
            return x_new
        x = x_new
    return x if abs(iterate(a, x, p) - x) <= tol else None


def _primitive_period(a: float, x: float, p: int, tol: float) -> int:
    """Smallest divisor q of p with map^q(x) = x within tol."""
    for q in range(1, p):
        if p % q == 0 and abs(iterate(a, x, q) - x) <= tol:
            return q
    return p


def logistic_attractor(
    a: float,
    max_period: int = _MAX_PERIOD_CAP,
    orbit_tol: float = DEFAULT_ORBIT_TOL,
    burn_in: int = DEFAULT_BURN_IN,
) -> PeriodicOrbit | Chaotic:
    """Locate the forward attractor of the logistic map at parameter a.

    Iterates from x0 = 0.5, detects the smallest period whose window
    residual locks in (extending the burn-in adaptively for slowly
    converging parameters near the bifurcation points), polishes the orbit
    by Newton's method and reduces it to the primitive period. Returns
    Chaotic when no period <= max_period locks in.
    """
    a = _validate_parameter(a)
    if max_period < 1 or max_period > _MAX_PERIOD_CAP or (max_period & (max_period - 1)) != 0:
        raise ValueError(f"max_period must be a power of 2 at most {_MAX_PERIOD_CAP}")

    window_len = 9 * max_period  # 4*max_period comparisons at every lag
    total = 0
    steps = burn_in
    x = 0.5
    while True:
        x = iterate(a, x, steps)
        total += steps
        window = np.empty(window_len)
        for k in range(window_len):
            window[k] = x
            x = a * x * (1.0 - x)
        candidate = None
        for p in range(1, max_period + 1):
            tail = window[-(4 * max_period + p):]
            if np.max(np.abs(tail[p:] - tail[:-p])) <= _DETECT_TOL:
                candidate = p
                break
        if candidate is not None:
            orbit = _polish_orbit(a, candidate, float(window[-1]), orbit_tol)
            if orbit is not None:
                return orbit
        if total >= MAX_BURN_IN:
            return Chaotic(parameter=a, max_period=max_period)
        steps = total * 9  # decade-wise extension for slow convergence


def _cycle_points(a: float, root: float, p: int) -> np.ndarray:
    pts = np.empty(p)
    y = root
    for i in range(p):
        pts[i] = y
        y = a * y * (1.0 - y)
    return pts


def _polish_orbit(a: float, p: int, seed: float, orbit_tol: float) -> PeriodicOrbit | None:
    root = _newton_polish(a, p, seed, orbit_tol)
    if root is None or abs(iterate(a, root, p) - root) > orbit_tol:
        return None
    tol_prim = max(orbit_tol, _PRIMITIVE_TOL)
    q = _primitive_period(a, root, p, tol_prim)
    if q < p:
        reduced = _newton_polish(a, q, root, orbit_tol)
        if (
            reduced is not None
            and abs(iterate(a, reduced, q) - reduced) <= orbit_tol
            and abs(reduced - root) <= 10.0 * tol_prim
        ):
            p, root = q, reduced
    pts = _cycle_points(a, root, p)
    start = int(np.argmin(pts))
    pts = np.roll(pts, -start)
    return PeriodicOrbit(
        parameter=a,
        period=p,
        points=tuple(float(v) for v in pts),
        multiplier=_orbit_multiplier(a, pts),
    )


def orbit_for_period(
    a: float, p: int, seeds, orbit_tol: float = DEFAULT_ORBIT_TOL
) -> PeriodicOrbit | None:
    """Continue a known period-p orbit to parameter a from seed points.

    Unlike logistic_attractor this works on unstable orbits too (Newton
    does not care about stability), which is what the bifurcation-point
    bisection needs on the far side of each cascade value. Seeds are tried
    in order until one polishes to a genuinely period-p root; None means
    every seed drifted off the branch onto a lower-period orbit.
    """
    a = _validate_parameter(a)
    if np.isscalar(seeds):
        seeds = (float(seeds),)
    for seed in seeds:
        root = _newton_polish(a, p, float(seed), orbit_tol)
        if root is None or abs(iterate(a, root, p) - root) > orbit_tol:
            continue
        if any(
            p % q == 0 and abs(iterate(a, root, q) - root) <= 1e-7 for q in range(1, p)
        ):
            continue  # landed on a lower-period root
        pts = _cycle_points(a, root, p)
        return PeriodicOrbit(a, p, tuple(float(v) for v in pts), _orbit_multiplier(a, pts))
    return None


@lru_cache(maxsize=None)
def bifurcation_points(k_max: int, tol: float = 1e-8) -> tuple[float, ...]:
    """The first k_max period-doubling parameters of the cascade.

    a_k is where the period-2^(k-1) orbit's multiplier crosses -1, located
    by bisection on the multiplier; the orbit itself is tracked across the
    bracket by Newton continuation, so the multiplier is available on both
    sides of the crossing.
    """
    if not 1 <= k_max <= 6:
        raise ValueError("k_max must be between 1 and 6")

    results: list[float] = []
    a_lo = 2.5
    step = 0.01
    for k in range(1, k_max + 1):
        p = 2 ** (k - 1)
        # refresh the seeds from the attractor just above the previous
        # doubling, where the period-p orbit is comfortably stable
        att = logistic_attractor(a_lo, max_period=max(p, 1))
        if not isinstance(att, PeriodicOrbit) or att.period != p:
            raise RuntimeError(f"no stable period-{p} orbit at a={a_lo}")

        # march upward until the multiplier crosses -1, shrinking the step
        # whenever Newton hops off the branch
        a_prev, seeds_prev = a_lo, att.points
        s = step
        while True:
            a_cur = min(a_prev + s, 4.0)
            orb = orbit_for_period(a_cur, p, seeds_prev)
            if orb is None:
                s *= 0.5
                if s < 1e-10:
                    raise RuntimeError(f"lost the period-{p} branch near a={a_prev}")
                continue
            if orb.multiplier <= -1.0:
                break
            if a_cur >= 4.0:
                raise RuntimeError(f"period-{p} multiplier never crossed -1")
            a_prev, seeds_prev = a_cur, orb.points
            s = step

        lo, hi = a_prev, a_cur
        seeds = seeds_prev + orb.points
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            orb = orbit_for_period(mid, p, seeds)
            if orb is None:
                raise RuntimeError(f"lost the period-{p} branch near a={mid}")
            seeds = orb.points
            if orb.multiplier <= -1.0:
                hi = mid
            else:
                lo = mid
        a_k = 0.5 * (lo + hi)
        results.append(a_k)

        # next sweep starts just above this doubling, with a step scaled
        # to the shrinking cascade geometry
        gap = (results[-1] - results[-2]) if len(results) >= 2 else 0.45
        step = max(gap / 25.0, 1e-5)
        a_lo = a_k + max(gap / 25.0, 2e-4)
    return tuple(results)
