"""Monte Carlo estimators and verdict tables for tightness diagnostics.

The checks here estimate finite-sample proxies for limit statements: decay
of the expected gap to the next jump, absence of short holding times,
compact containment of paths, submartingale behaviour of compensated test
functions, and tail probabilities of the partition modulus.  Verdicts are
always labelled as evidence; none of them proves a limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .kernels import SemiMarkovModel, State, as_state
from .renewal import (
    DEFAULT_STEP_LIMIT,
    Truncation,
    _holding_groups,
    default_forward_horizon,
    forward_gap_samples,
    simulate_chain,
    simulate_chain_batch,
    to_path,
)
from .reporting import OpReport, Table
from .skorokhod import sup_norm, w_prime
from .streams import parallel_map, spawn_rng

PASS = "PASS-evidence"
FAIL = "FAIL-evidence"
INFO = "informational"

EVIDENCE_NOTE = "finite-sample evidence, not a proof"

DIAG_COLUMNS = ("op", "u", "x", "t", "value", "stderr", "n", "censored", "verdict")

Phi = Callable[[np.ndarray], np.ndarray]


def _state_label(x: State) -> str:
    return " ".join(f"{xi:.17g}" for xi in np.atleast_1d(x))


def coordinate_phi(i: int = 0) -> Phi:
    """Test function x -> x_i, batch-first."""
    return lambda X: np.asarray(X, dtype=float)[:, i]


def square_phi(i: int = 0) -> Phi:
    """Test function x -> x_i^2."""
    return lambda X: np.asarray(X, dtype=float)[:, i] ** 2


def norm_sq_phi() -> Phi:
    """Test function x -> |x|^2."""
    return lambda X: (np.asarray(X, dtype=float) ** 2).sum(axis=1)


def constant_phi(c: float) -> Phi:
    """Constant test function."""
    return lambda X: np.full(np.asarray(X).shape[0], float(c))


def _resolve_rng(
    rng: Optional[np.random.Generator], seed: Optional[int], *key: object
) -> np.random.Generator:
    if (rng is None) == (seed is None):
        raise ValueError("provide exactly one of rng or seed")
    if rng is not None:
        return rng
    return spawn_rng(seed, *key)


@dataclass(frozen=True)
class BumpFunction:
    """Smooth compactly supported bump: 1 at `center`, 0 outside `radius`.

    Evaluates exp(1 - 1/(1 - (|x - center|/radius)^2)) inside the support
    ball; values lie in [0, 1] and the sup is exactly 1.
    """

    center: tuple
    radius: float

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ValueError("radius must be > 0")
        object.__setattr__(self, "center", tuple(as_state(np.asarray(self.center)).tolist()))

    @property
    def center_state(self) -> State:
        return np.asarray(self.center, dtype=float)

    @property
    def sup_value(self) -> float:
        return 1.0

    def translated(self, q: State) -> "BumpFunction":
        """Bump of f(x - q): the center moves by q."""
        q = as_state(q)
        return BumpFunction(tuple((self.center_state + q).tolist()), self.radius)

    def __call__(self, x: np.ndarray) -> Union[float, np.ndarray]:
        arr = np.asarray(x, dtype=float)
        single = arr.ndim == 1
        X = arr[None, :] if single else arr
        r2 = ((X - self.center_state[None, :]) ** 2).sum(axis=1) / self.radius**2
        out = np.zeros(X.shape[0])
        inside = r2 < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
        return float(out[0]) if single else out


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo point estimate with provenance.

    `stderr` is the sample standard deviation over √n; when any replicas
    were censored the value is only a lower bound for the target.
    """

    value: float
    stderr: float
    n_samples: int
    censored: int = 0
    seed: Optional[int] = None

    @property
    def is_lower_bound(self) -> bool:
        return self.censored > 0

    @classmethod
    def from_samples(
        cls,
        samples: np.ndarray,
        censored: int = 0,
        seed: Optional[int] = None,
    ) -> "Estimate":
        samples = np.asarray(samples, dtype=float)
        n = samples.shape[0]
        value = float(samples.mean()) if n else math.nan
        stderr = float(samples.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(value=value, stderr=stderr, n_samples=n, censored=censored, seed=seed)


@dataclass(frozen=True)
class FamilySpec:
    """Finite stand-in for a family of semi-Markov processes indexed by u.

    `build(u)` produces the member model; `probe_states` are the states on
    which suprema over the state space are approximated.
    """

    indices: tuple[int, ...]
    build: Callable[[int], SemiMarkovModel]
    probe_states: tuple
    label: str = ""

    def __post_init__(self) -> None:
        if not self.indices:
            raise ValueError("family must have at least one index")
        probes = tuple(as_state(p) for p in self.probe_states)
        if not probes:
            raise ValueError("family must declare at least one probe state")
        object.__setattr__(self, "indices", tuple(int(u) for u in self.indices))
        object.__setattr__(self, "probe_states", probes)

    def member(self, u: int) -> SemiMarkovModel:
        return self.build(u)


def estimate_d(
    model: SemiMarkovModel,
    x: State,
    t: float,
    n: int,
    *,
    rng: Optional[np.random.Generator] = None,
    seed: Optional[int] = None,
    horizon: Optional[float] = None,
    step_limit: int = DEFAULT_STEP_LIMIT,
) -> Estimate:
    """Estimate the expected gap between time t and the next jump after t.

    Averages n restarted-chain samples from state x.  Censored replicas
    (no jump found before the search horizon) enter the mean at the
    censoring bound horizon - t, so the reported value is a valid lower
    bound and is flagged through `Estimate.censored`; when every replica
    is censored the value is +inf, evidence that the gap is infinite.
    """
    if n < 100:
        raise ValueError("n must be >= 100")
    rng = _resolve_rng(rng, seed, "estimate_d", _state_label(as_state(x)), t, n)
    if horizon is None:
        horizon = default_forward_horizon(t)
    gaps, censored = forward_gap_samples(
        model, x, t, n, rng=rng, horizon=horizon, step_limit=step_limit
    )
    n_censored = int(censored.sum())
    if n_censored == n:
        return Estimate(value=math.inf, stderr=0.0, n_samples=n, censored=n, seed=seed)
    filled = np.where(censored, horizon - t, gaps)
    return Estimate.from_samples(filled, censored=n_censored, seed=seed)


def _collect_probe_states(
    family: FamilySpec,
    u: int,
    *,
    seed: int,
    pilot_paths: int,
    pilot_horizon: float,
    cap: int = 16,
) -> list[State]:
    """Declared probe states plus states visited by short pilot runs."""
    probes = [np.asarray(p, dtype=float) for p in family.probe_states]
    if pilot_paths <= 0:
        return probes
    rng = spawn_rng(seed, "pilot", u)
    model = family.member(u)
    visited = []
    for _ in range(pilot_paths):
        rec = simulate_chain(model, pilot_horizon, step_limit=256, rng=rng)
        visited.append(rec.states)
    uniq = np.unique(np.vstack(visited), axis=0)
    if uniq.shape[0] > cap:
        pick = np.linspace(0, uniq.shape[0] - 1, cap).astype(int)
        uniq = uniq[pick]
    for row in uniq:
        if not any(np.array_equal(row, p) for p in probes):
            probes.append(row)
    return probes


def scan_condition_iii(
    family: FamilySpec,
    t_grid: Sequence[float],
    n: int,
    *,
    seed: int,
    threshold: float = 0.05,
    tail_count: Optional[int] = None,
    pilot_paths: int = 100,
    pilot_horizon: Optional[float] = None,
    workers: int = 1,
) -> OpReport:
    """Scan the expected next-jump gap over the family and a shrinking t grid.

    Builds the matrix D[t][u] = max over probe states of the estimated gap.
    PASS evidence requires the per-t maxima over the tail of the index list
    to be non-increasing as t shrinks (within 3-sigma slack) and the
    smallest-t row to fall below `threshold`; any all-censored cell is
    decisive FAIL evidence with its (u, x, t) witness.
    """
    t_grid = [float(t) for t in t_grid]
    if not t_grid or any(t <= 0 for t in t_grid):
        raise ValueError("t_grid must contain positive times")
    if len(t_grid) > 1 and any(b >= a for a, b in zip(t_grid, t_grid[1:])):
        raise ValueError("t_grid must be sorted descending toward 0")
    if pilot_horizon is None:
        pilot_horizon = max(t_grid)

    probes = {
        u: _collect_probe_states(
            family, u, seed=seed, pilot_paths=pilot_paths, pilot_horizon=pilot_horizon
        )
        for u in family.indices
    }

    def run_cell(cell: tuple[int, int]) -> list[tuple]:
        iu, it = cell
        u, t = family.indices[iu], t_grid[it]
        model = family.member(u)
        out = []
        for ix, x in enumerate(probes[u]):
            est = estimate_d(
                model, x, t, n, rng=spawn_rng(seed, "cond3", iu, it, ix)
            )
            out.append((u, x, t, est))
        return out

    cells = [(iu, it) for iu in range(len(family.indices)) for it in range(len(t_grid))]
    results = parallel_map(run_cell, cells, workers=workers)

    rows = []
    matrix: dict[tuple[float, int], tuple[float, float]] = {}
    witness = None
    for cell_rows in results:
        for u, x, t, est in cell_rows:
            rows.append(
                (
                    "scan_condition_iii",
                    u,
                    _state_label(x),
                    t,
                    est.value,
                    est.stderr,
                    est.n_samples,
                    est.censored,
                    "lower-bound" if est.is_lower_bound else "",
                )
            )
            cur = matrix.get((t, u))
            if cur is None or est.value > cur[0]:
                matrix[(t, u)] = (est.value, est.stderr)
            if math.isinf(est.value) and witness is None:
                witness = {"u": u, "x": _state_label(x), "t": t}

    k_tail = tail_count if tail_count is not None else max(1, len(family.indices) // 2)
    tail_indices = list(family.indices[-k_tail:])
    maxima = []
    for t in t_grid:
        vals = [matrix[(t, u)] for u in tail_indices]
        m_val = max(v[0] for v in vals)
        m_se = max(v[1] for v in vals)
        maxima.append({"t": t, "value": m_val, "stderr": m_se})

    if witness is not None:
        verdict = FAIL
        reason = "infinite-gap evidence at witness"
    else:
        monotone = all(
            maxima[k + 1]["value"]
            <= maxima[k]["value"] + 3.0 * (maxima[k]["stderr"] + maxima[k + 1]["stderr"])
            for k in range(len(maxima) - 1)
        )
        small = maxima[-1]["value"] <= threshold
        if monotone and small:
            verdict, reason = PASS, "tail maxima decay below threshold"
        else:
            verdict = FAIL
            reason = "smallest-t maximum above threshold" if monotone else "tail maxima not decaying"

    summary = {
        "note": EVIDENCE_NOTE,
        "threshold": threshold,
        "tail_indices": tail_indices,
        "max_over_probes": maxima,
        "probe_states": {str(u): [_state_label(p) for p in probes[u]] for u in family.indices},
        "reason": reason,
    }
    if witness is not None:
        summary["witness"] = witness
    table = Table("condition_iii_scan", DIAG_COLUMNS, rows)
    return OpReport(op="scan_condition_iii", verdict=verdict, summary=summary, tables=[table])


def check_condition_iv(
    family: FamilySpec,
    a: float,
    n: int,
    *,
    seed: int,
    threshold: float = 0.05,
    workers: int = 1,
) -> OpReport:
    """Estimate P(holding time < a) per member and probe state.

    PASS evidence iff the largest-index member keeps every probe-state
    estimate at or below `threshold`: short holding times must vanish
    along the family.
    """
    if a <= 0:
        raise ValueError("a must be > 0")

    def run_cell(cell: tuple[int, int]) -> tuple:
        iu, ix = cell
        u = family.indices[iu]
        x = family.probe_states[ix]
        law = family.member(u).holding_at(np.asarray(x))
        rng = spawn_rng(seed, "cond4", iu, ix)
        samples = np.asarray(law.sample(rng, size=n), dtype=float)
        return (u, x, Estimate.from_samples((samples < a).astype(float), seed=seed))

    cells = [(iu, ix) for iu in range(len(family.indices)) for ix in range(len(family.probe_states))]
    results = parallel_map(run_cell, cells, workers=workers)

    rows = []
    last_u = family.indices[-1]
    worst_last = 0.0
    for u, x, est in results:
        rows.append(
            ("check_condition_iv", u, _state_label(x), a, est.value, est.stderr, n, 0, "")
        )
        if u == last_u:
            worst_last = max(worst_last, est.value)

    verdict = PASS if worst_last <= threshold else FAIL
    summary = {
        "note": EVIDENCE_NOTE,
        "threshold": threshold,
        "largest_index": last_u,
        "worst_estimate_at_largest_index": worst_last,
    }
    table = Table("condition_iv", DIAG_COLUMNS, rows)
    return OpReport(op="check_condition_iv", verdict=verdict, summary=summary, tables=[table])


def check_compact_containment(
    family: FamilySpec,
    T: float,
    a_grid: Sequence[float],
    n: int,
    *,
    seed: int,
    threshold: float = 0.05,
    step_limit: int = DEFAULT_STEP_LIMIT,
    workers: int = 1,
) -> OpReport:
    """Estimate P(sup-norm of the path on [0, T] >= a) along a level grid.

    Paths truncated by the step limit are excluded from the estimates and
    counted in the censored column.  PASS evidence iff the per-level
    maxima over members decay along the grid and end at or below
    `threshold`.
    """
    a_grid = [float(a) for a in a_grid]
    if len(a_grid) > 1 and any(b <= a for a, b in zip(a_grid, a_grid[1:])):
        raise ValueError("a_grid must be increasing")

    def run_member(iu: int) -> tuple[int, np.ndarray, int]:
        u = family.indices[iu]
        model = family.member(u)
        rng = spawn_rng(seed, "containment", iu)
        sups = []
        dropped = 0
        for _ in range(n):
            rec = simulate_chain(model, T, step_limit=step_limit, rng=rng)
            if rec.truncation is Truncation.STEP_LIMIT and rec.jump_times[-1] <= T:
                dropped += 1
                continue
            sups.append(sup_norm(to_path(rec, T), T))
        return (u, np.asarray(sups), dropped)

    results = parallel_map(run_member, range(len(family.indices)), workers=workers)

    rows = []
    level_max: dict[float, tuple[float, float]] = {}
    for u, sups, dropped in results:
        for a in a_grid:
            est = Estimate.from_samples((sups >= a).astype(float), censored=dropped, seed=seed)
            rows.append(
                (
                    "check_compact_containment",
                    u,
                    "",
                    a,
                    est.value,
                    est.stderr,
                    est.n_samples,
                    dropped,
                    "",
                )
            )
            cur = level_max.get(a)
            if cur is None or est.value > cur[0]:
                level_max[a] = (est.value, est.stderr)

    maxima = [{"a": a, "value": level_max[a][0], "stderr": level_max[a][1]} for a in a_grid]
    monotone = all(
        maxima[k + 1]["value"]
        <= maxima[k]["value"] + 3.0 * (maxima[k]["stderr"] + maxima[k + 1]["stderr"])
        for k in range(len(maxima) - 1)
    )
    small = maxima[-1]["value"] <= threshold
    verdict = PASS if (monotone and small) else FAIL
    summary = {
        "note": EVIDENCE_NOTE,
        "threshold": threshold,
        "max_over_members": maxima,
    }
    table = Table("compact_containment", DIAG_COLUMNS, rows)
    return OpReport(
        op="check_compact_containment", verdict=verdict, summary=summary, tables=[table]
    )


def _quantile_bins(values: np.ndarray, bins: int) -> np.ndarray:
    """Equal-frequency bin index per value (coarse, possibly fewer bins)."""
    edges = np.quantile(values, np.linspace(0.0, 1.0, bins + 1))
    inner = np.unique(edges[1:-1])
    return np.searchsorted(inner, values, side="right")


def check_condition_D(
    model: SemiMarkovModel,
    f: BumpFunction,
    A_f: float,
    translations: Sequence,
    steps: int,
    n: int,
    *,
    seed: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    bins: int = 8,
    min_bin: int = 30,
    workers: int = 1,
) -> OpReport:
    """Test the compensated-bump submartingale inequality step by step.

    For each translate of the bump and each step j < `steps`, estimates
    E[f(X_{j+1}) + A_f τ_{j+1} - f(X_j) - A_f τ_j] unconditionally and
    stratified over equal-frequency bins of the first coordinate of X_j
    (the stratification stands in for conditioning).  PASS evidence iff
    every sufficiently populated stratum mean is >= -3 stderr; strata
    with fewer than `min_bin` replicas are reported as insufficient, and
    the unconditional rows (bin -1) are informational.  Chains frozen at
    absorbing states contribute zero increments.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if A_f < 0:
        raise ValueError("A_f must be >= 0")
    rng = _resolve_rng(rng, seed, "condD")
    X, tau = simulate_chain_batch(model, steps, n, rng)

    def run_translate(iq: int) -> list[tuple]:
        q = as_state(translations[iq], model.dimension)
        fq = f.translated(q)
        out = []
        for j in range(steps):
            inc = (
                fq(X[:, j + 1])
                + A_f * tau[:, j + 1]
                - fq(X[:, j])
                - A_f * tau[:, j]
            )
            groups = [(-1.0, np.arange(n))]
            bin_idx = _quantile_bins(X[:, j, 0], bins)
            groups.extend((float(b), np.flatnonzero(bin_idx == b)) for b in np.unique(bin_idx))
            for label, idx in groups:
                est = Estimate.from_samples(inc[idx], seed=seed)
                if label >= 0 and idx.shape[0] < min_bin:
                    status = "insufficient"
                elif est.value < -3.0 * est.stderr:
                    status = "violation"
                else:
                    status = "ok"
                out.append(
                    (
                        "check_condition_D",
                        j,
                        _state_label(q),
                        label,
                        est.value,
                        est.stderr,
                        idx.shape[0],
                        0,
                        status,
                    )
                )
        return out

    results = parallel_map(run_translate, range(len(translations)), workers=workers)
    rows = [row for chunk in results for row in chunk]
    # the verdict consumes the stratified rows; unconditional rows (bin -1)
    # are reported but do not gate
    violations = [r for r in rows if r[8] == "violation" and r[3] >= 0]
    verdict = FAIL if violations else PASS
    summary = {
        "note": EVIDENCE_NOTE,
        "A_f": A_f,
        "steps": steps,
        "n_violations": len(violations),
        "n_insufficient": sum(1 for r in rows if r[8] == "insufficient"),
    }
    table = Table("condition_D", DIAG_COLUMNS, rows)
    return OpReport(op="check_condition_D", verdict=verdict, summary=summary, tables=[table])


def search_condition_D_constant(
    model: SemiMarkovModel,
    f: BumpFunction,
    candidates: Sequence[float],
    translations: Sequence,
    steps: int,
    n: int,
    *,
    seed: int,
    bins: int = 8,
) -> Optional[float]:
    """Smallest compensation constant on the grid that passes the check.

    Diagnostic only: increments are monotone in the constant, so a binary
    search over the sorted candidate grid is valid.  Returns None when
    even the largest candidate fails.
    """
    grid = sorted(float(a) for a in candidates)

    def passes(a: float) -> bool:
        rep = check_condition_D(
            model, f, a, translations, steps, n, seed=seed, bins=bins
        )
        return rep.verdict == PASS

    lo, hi = 0, len(grid) - 1
    if not passes(grid[hi]):
        return None
    while lo < hi:
        mid = (lo + hi) // 2
        if passes(grid[mid]):
            hi = mid
        else:
            lo = mid + 1
    return grid[lo]


def _phi_rows(phi: Phi, states: np.ndarray) -> np.ndarray:
    return np.asarray(phi(states), dtype=float).reshape(states.shape[0])


def _apply_L_rows(
    model: SemiMarkovModel,
    phi: Phi,
    states: np.ndarray,
    inner_samples: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Compensator values q(x) (E phi(next) - phi(x)) per row, 0 where q = 0."""
    n = states.shape[0]
    q = np.zeros(n)
    for law, idx in _holding_groups(model, states):
        m = law.mean()
        if not math.isinf(m):
            q[idx] = 1.0 / m
    out = np.zeros(n)
    live = np.flatnonzero(q > 0)
    if live.size:
        reps = np.repeat(states[live], inner_samples, axis=0)
        ys = model.kernel.sample_batch(reps, rng)
        inner = _phi_rows(phi, ys).reshape(live.size, inner_samples).mean(axis=1)
        out[live] = q[live] * (inner - _phi_rows(phi, states[live]))
    return out


def apply_L(
    model: SemiMarkovModel,
    phi: Phi,
    x: State,
    *,
    n: int = 1000,
    rng: Optional[np.random.Generator] = None,
    seed: Optional[int] = None,
) -> float:
    """Compensating-operator value q(x) (E[phi(X_1)] - phi(x)) at state x.

    The kernel expectation is a Monte Carlo mean over n draws; states with
    infinite mean holding time return exactly 0.
    """
    x = as_state(x, model.dimension)
    if model.q(x) == 0.0:
        return 0.0
    rng = _resolve_rng(rng, seed, "apply_L", _state_label(x))
    return float(_apply_L_rows(model, phi, x[None, :], n, rng)[0])


def apply_L_time(
    model: SemiMarkovModel,
    phi: Callable[[np.ndarray, np.ndarray], np.ndarray],
    x: State,
    t: float,
    *,
    n: int = 1000,
    rng: Optional[np.random.Generator] = None,
    seed: Optional[int] = None,
) -> float:
    """Time-dependent compensating operator by joint sampling of clock and kernel.

    `phi(states, times)` must be vectorized.  Exposed for completeness;
    nothing downstream consumes it.
    """
    x = as_state(x, model.dimension)
    if model.q(x) == 0.0:
        return 0.0
    rng = _resolve_rng(rng, seed, "apply_L_time", _state_label(x), t)
    law = model.holding_at(x)
    s = np.asarray(law.sample(rng, size=n), dtype=float)
    ys = model.kernel.sample_batch(np.tile(x, (n, 1)), rng)
    vals = np.asarray(phi(ys, t + s), dtype=float)
    center = float(np.asarray(phi(x[None, :], np.asarray([t]))).reshape(1)[0])
    return model.q(x) * (float(vals.mean()) - center)


def martingale_residual(
    model: SemiMarkovModel,
    phi: Phi,
    steps: int,
    n: int,
    *,
    seed: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    inner_samples: int = 16,
) -> Estimate:
    """Mean drift after `steps` of the compensated chain functional.

    Accumulates phi(X_k) - phi(X_0) - Σ_j (τ_{j+1} - τ_j) L̂phi(X_j) with
    the compensator estimated by independent inner sampling, which keeps
    the estimator unbiased; the result must be 0 within error when the
    compensation is correct.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    rng = _resolve_rng(rng, seed, "martingale", steps, n)
    X, tau = simulate_chain_batch(model, steps, n, rng)
    acc = _phi_rows(phi, X[:, steps]) - _phi_rows(phi, X[:, 0])
    for j in range(steps):
        theta = tau[:, j + 1] - tau[:, j]
        L_vals = _apply_L_rows(model, phi, X[:, j], inner_samples, rng)
        acc -= theta * L_vals
    return Estimate.from_samples(acc, seed=seed)


def estimate_modulus_tail(
    family: FamilySpec,
    delta: Union[float, Sequence[float]],
    rho: float,
    T: float,
    n: int,
    *,
    seed: int,
    step_limit: int = DEFAULT_STEP_LIMIT,
    workers: int = 1,
) -> OpReport:
    """Tail probabilities P(w'(delta; T) >= rho) per family member.

    Accepts a single delta or a grid; each member's paths are simulated
    once and evaluated at every delta.  Step-limited paths are excluded
    from the probabilities and counted separately.
    """
    deltas = [float(d) for d in (delta if isinstance(delta, (list, tuple)) else [delta])]
    if any(d <= 0 or d >= T for d in deltas):
        raise ValueError("every delta must lie in (0, T)")
    if rho <= 0:
        raise ValueError("rho must be > 0")

    def run_member(iu: int) -> tuple[int, list[np.ndarray], int]:
        u = family.indices[iu]
        model = family.member(u)
        rng = spawn_rng(seed, "modulus", iu)
        paths = []
        dropped = 0
        for _ in range(n):
            rec = simulate_chain(model, T, step_limit=step_limit, rng=rng)
            if rec.truncation is Truncation.STEP_LIMIT and rec.jump_times[-1] <= T:
                dropped += 1
                continue
            paths.append(to_path(rec, T))
        return (u, paths, dropped)

    results = parallel_map(run_member, range(len(family.indices)), workers=workers)

    rows = []
    for u, paths, dropped in results:
        for d in deltas:
            w_vals = np.asarray([w_prime(p, d, T) for p in paths])
            est = Estimate.from_samples((w_vals >= rho).astype(float), censored=dropped, seed=seed)
            rows.append(
                (
                    "estimate_modulus_tail",
                    u,
                    "",
                    d,
                    est.value,
                    est.stderr,
                    est.n_samples,
                    dropped,
                    "",
                )
            )

    summary = {"note": EVIDENCE_NOTE, "rho": rho, "T": T, "deltas": deltas}
    table = Table("modulus_tail", DIAG_COLUMNS, rows)
    return OpReport(op="estimate_modulus_tail", verdict=INFO, summary=summary, tables=[table])
