"""Exact path functionals on piecewise-constant cadlag paths.

`w_prime` computes the partition modulus: the infimum, over partitions of
[0, T) into right-open intervals whose lengths all exceed delta except the
last, of the largest oscillation within an interval.  On a path with
finitely many jumps the infimum is attained exactly by a finite dynamic
program, because every interval sees a consecutive run of the path's value
sequence and breakpoints only interact through strict gap constraints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .renewal import JumpPath


@dataclass(frozen=True)
class OscillationStats:
    """Successive threshold-crossing times of a path.

    `times` starts at 0 and records each first instant the path moves at
    least a quarter of the threshold away from its value at the previous
    crossing; `count` is the number of crossings inside the horizon and
    `min_gap` the smallest spacing between consecutive crossings (+inf
    when there is none).
    """

    times: tuple[float, ...]
    count: int
    min_gap: float


def _path_points(path: JumpPath, T: float) -> tuple[np.ndarray, np.ndarray]:
    """Jump times strictly inside (0, T) and the value sequence v_0..v_m."""
    mask = path.times < T
    times = path.times[mask]
    points = np.vstack([path.initial[None, :], path.values[mask]])
    return times, points


def w_prime(path: JumpPath, delta: float, T: float) -> float:
    """Exact partition modulus of `path` on [0, T).

    Feasible partitions 0 = t_0 < ... < t_n = T must satisfy
    t_i - t_{i-1} > delta for every i < n (the final interval is exempt);
    intervals are right-open, so a breakpoint placed exactly at a jump
    excludes that jump from the interval on its left.  The result is the
    smallest level L such that some feasible partition keeps every
    interval's oscillation (diameter of the values it sees) at most L.
    """
    if delta <= 0:
        raise ValueError("delta must be > 0")
    if T <= 0 or T > path.horizon:
        raise ValueError("T must lie in (0, path horizon]")

    times, points = _path_points(path, T)
    m = times.shape[0]
    if m == 0:
        return 0.0
    if m == 1:
        # One jump: it either sits in its own interval (cut exactly at the
        # jump, feasible iff the first interval is long enough) or shares
        # an interval with the initial value.
        if times[0] > delta:
            return 0.0
        return float(np.linalg.norm(points[1] - points[0]))

    # Pairwise distances of the value sequence; every block oscillation is
    # one of these, so they are the only candidate levels.
    diffs = points[:, None, :] - points[None, :, :]
    dist = np.sqrt((diffs**2).sum(axis=2))
    levels = np.unique(dist)

    # u[j] is the time of jump j (1-based); u[0] = 0 pairs with value v_0.
    u = np.concatenate([[0.0], times])

    # suffix_diam[e] = diameter of the tail run v_e..v_m.
    suffix_diam = np.zeros(m + 1)
    for e in range(m - 1, -1, -1):
        suffix_diam[e] = max(suffix_diam[e + 1], float(dist[e, e:].max()))

    def feasible(level: float) -> bool:
        # best[e] = least feasible position of the latest breakpoint whose
        # entry value is v_e (breakpoint in [u_e, u_{e+1})); gap constraints
        # are strict, so carrying the infimum alone is exact.
        best: list[Optional[float]] = [None] * (m + 1)
        best[0] = 0.0
        for e in range(m + 1):
            pos = best[e]
            if pos is None:
                continue
            # Close with the exempt final interval [pos, T).
            if suffix_diam[e] <= level:
                return True
            run_max = 0.0
            for f in range(e + 1, m + 1):
                # Oscillation of the open-cut block v_e..v_f; the exact-cut
                # block v_e..v_{f-1} is the previous value of run_max.
                d_exact = run_max
                run_max = max(run_max, dist[e : f + 1, f].max())
                if d_exact > level:
                    break
                # Cut exactly at jump f: the jump joins the next interval.
                if u[f] > pos + delta and (best[f] is None or u[f] < best[f]):
                    best[f] = u[f]
                # Cut strictly inside (u_f, u_{f+1}).
                if run_max <= level:
                    cand = max(u[f], pos + delta)
                    hi = u[f + 1] if f < m else T
                    if cand < hi and (best[f] is None or cand < best[f]):
                        best[f] = cand
        return False

    lo, hi = 0, levels.shape[0] - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(float(levels[mid])):
            hi = mid
        else:
            lo = mid + 1
    return float(levels[lo])


def oscillation_stats(path: JumpPath, rho: float, T: float) -> OscillationStats:
    """Scan the path for successive oscillations of at least rho/4.

    On a piecewise-constant path each crossing is attained at a jump time,
    so the scan walks the jump set; ties at exactly rho/4 count as
    crossings.
    """
    if rho <= 0:
        raise ValueError("rho must be > 0")
    if T <= 0:
        raise ValueError("T must be > 0")

    threshold = rho / 4.0
    crossings = [0.0]
    ref = path.value_at(0.0)
    j = 0
    while j < path.n_jumps:
        t_j = float(path.times[j])
        if t_j > crossings[-1] and np.linalg.norm(path.values[j] - ref) >= threshold:
            if t_j > T:
                break
            crossings.append(t_j)
            ref = path.values[j]
        j += 1
    count = len(crossings) - 1
    if count == 0:
        min_gap = math.inf
    else:
        min_gap = float(min(np.diff(crossings)))
    return OscillationStats(times=tuple(crossings), count=count, min_gap=min_gap)


def sup_norm(path: JumpPath, T: Optional[float] = None) -> float:
    """Largest Euclidean norm the path attains on [0, T]."""
    if T is None:
        T = path.horizon
    if T <= 0 or T > path.horizon:
        raise ValueError("T must lie in (0, path horizon]")
    best = float(np.linalg.norm(path.initial))
    mask = path.times <= T
    if mask.any():
        best = max(best, float(np.linalg.norm(path.values[mask], axis=1).max()))
    return best
