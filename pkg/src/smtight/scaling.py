"""Space-time scaled families and the scaled integrated-tail bound.

Member n of a scaled family runs the base process with time compressed by
a_n and space shrunk by b_n; its jump chain is the base chain rescaled by
(1/b_n, 1/a_n).  The bound J_n(t), the worst normalized conditional
mean overshoot of a holding time past a_n t, dominates the expected gap
to the next jump for the scaled member and has closed forms for every
built-in law.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .diagnostics import (
    DIAG_COLUMNS,
    EVIDENCE_NOTE,
    FAIL,
    PASS,
    FamilySpec,
    _state_label,
    estimate_d,
)
from .kernels import (
    Deterministic,
    HoldingTime,
    PointInitial,
    SemiMarkovModel,
    State,
    TransitionKernel,
    as_state,
)
from .reporting import OpReport, Table
from .streams import parallel_map, spawn_rng


@dataclass(frozen=True)
class ScalingScheme:
    """Index-to-factor maps for time (a_n) and space (b_n) scaling."""

    time_factor: Callable[[int], float]
    space_factor: Callable[[int], float]
    name: str = ""

    def validate(self, indices: Sequence[int]) -> None:
        """Both factor sequences must be positive and strictly increasing."""
        for fn, what in ((self.time_factor, "time"), (self.space_factor, "space")):
            vals = [fn(n) for n in indices]
            if any(v <= 0 for v in vals):
                raise ValueError(f"{what} factors must be > 0")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ValueError(f"{what} factors must be strictly increasing on the index list")


def diffusion_scheme() -> ScalingScheme:
    return ScalingScheme(lambda n: float(n) ** 2, lambda n: float(n), name="diffusion")


def averaging_scheme() -> ScalingScheme:
    return ScalingScheme(lambda n: float(n), lambda n: float(n), name="averaging")


def explicit_scheme(
    indices: Sequence[int], a: Sequence[float], b: Sequence[float], name: str = "explicit"
) -> ScalingScheme:
    a_map = {int(n): float(v) for n, v in zip(indices, a)}
    b_map = {int(n): float(v) for n, v in zip(indices, b)}
    if len(a_map) != len(list(indices)) or len(b_map) != len(list(indices)):
        raise ValueError("explicit factors must match the index list")
    return ScalingScheme(lambda n: a_map[int(n)], lambda n: b_map[int(n)], name=name)


@dataclass
class ScaledFamily:
    """Family zeta_n(t) = x(a_n t) / b_n built from one base model."""

    base: SemiMarkovModel
    scheme: ScalingScheme
    indices: tuple
    _members: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self.indices = tuple(int(n) for n in self.indices)
        if not self.indices:
            raise ValueError("index list must be non-empty")
        self.scheme.validate(self.indices)

    def member(self, n: int) -> SemiMarkovModel:
        """Model of member n: rescaled kernel, clock, and initial value."""
        if n in self._members:
            return self._members[n]
        a = self.scheme.time_factor(n)
        b = self.scheme.space_factor(n)
        base = self.base

        def scaled_sampler(states: np.ndarray, rng: np.random.Generator) -> np.ndarray:
            return base.kernel.sampler(states * b, rng) / b

        kernel = TransitionKernel(
            scaled_sampler, description=f"{base.kernel.description}/b={b:g}"
        )
        law_cache: dict[HoldingTime, HoldingTime] = {}

        def scaled_holding(x: State) -> HoldingTime:
            base_law = base.holding(np.asarray(x, dtype=float) * b)
            scaled = law_cache.get(base_law)
            if scaled is None:
                scaled = base_law.time_scaled(1.0 / a)
                law_cache[base_law] = scaled
            return scaled

        uniform = None
        if base.uniform_holding is not None:
            uniform = base.uniform_holding.time_scaled(1.0 / a)

        if isinstance(base.initial, PointInitial):
            initial: Callable = PointInitial(
                tuple((np.asarray(base.initial.point) / b).tolist())
            )
        else:
            base_initial = base.initial

            def initial(rng: np.random.Generator) -> State:
                return np.asarray(base_initial(rng), dtype=float) / b

        model = SemiMarkovModel(
            dimension=base.dimension,
            kernel=kernel,
            holding=scaled_holding,
            initial=initial,
            uniform_holding=uniform,
            label=f"{base.label or 'base'}[a={a:g},b={b:g}]",
        )
        self._members[n] = model
        return model

    def to_family_spec(self, probe_states: Sequence, label: str = "") -> FamilySpec:
        return FamilySpec(
            indices=self.indices,
            build=self.member,
            probe_states=tuple(as_state(p) for p in probe_states),
            label=label or f"scaled[{self.scheme.name}]",
        )


def theorem3_J(
    base: SemiMarkovModel,
    scheme: ScalingScheme,
    n: int,
    t: float,
    probe_states: Optional[Sequence] = None,
) -> float:
    """Scaled worst-case mean overshoot bound for member n at time t.

    Evaluates (1/a_n) max over probe states of the base holding law's
    conditional mean residual beyond a_n t (the integrated tail over the
    tail, in closed form).  States whose tail has no mass past a_n t
    contribute 0; an infinite integrated tail with positive tail makes
    the bound +inf.
    """
    if t <= 0:
        raise ValueError("t must be > 0")
    a = scheme.time_factor(n)
    if probe_states is None:
        probe_states = [np.zeros(base.dimension)]
    worst = 0.0
    for x in probe_states:
        law = base.holding_at(as_state(x, base.dimension))
        worst = max(worst, law.mean_residual(a * t))
    return worst / a


def scan_theorem3(
    base: SemiMarkovModel,
    scheme: ScalingScheme,
    indices: Sequence[int],
    t_grid: Sequence[float],
    *,
    probe_states: Optional[Sequence] = None,
    threshold: float = 0.05,
) -> OpReport:
    """Tabulate the bound J[t][n] and judge its decay.

    PASS evidence iff the largest-index row is non-increasing as t shrinks
    and ends at or below `threshold`.
    """
    indices = [int(n) for n in indices]
    t_grid = [float(t) for t in t_grid]
    if not indices or not t_grid:
        raise ValueError("grids must be non-empty")
    if len(t_grid) > 1 and any(b >= a for a, b in zip(t_grid, t_grid[1:])):
        raise ValueError("t_grid must be sorted descending toward 0")
    scheme.validate(indices)

    rows = []
    for n in indices:
        for t in t_grid:
            rows.append((n, t, theorem3_J(base, scheme, n, t, probe_states), "closed"))
    table = Table("theorem3_bound", ("n", "t", "J", "form"), rows)

    n_max = indices[-1]
    last_row = [r[2] for r in rows if r[0] == n_max]
    monotone = all(b <= a + 1e-12 for a, b in zip(last_row, last_row[1:]))
    small = last_row[-1] <= threshold
    verdict = PASS if (monotone and small) else FAIL
    summary = {
        "note": EVIDENCE_NOTE,
        "threshold": threshold,
        "largest_index": n_max,
        "largest_index_row": [{"t": t, "J": j} for t, j in zip(t_grid, last_row)],
    }
    return OpReport(op="scan_theorem3", verdict=verdict, summary=summary, tables=[table])


def verify_d_bound(
    base: SemiMarkovModel,
    scheme: ScalingScheme,
    indices: Sequence[int],
    t_grid: Sequence[float],
    probe_states: Optional[Sequence] = None,
    samples: int = 10_000,
    *,
    seed: int,
    workers: int = 1,
) -> OpReport:
    """Cross-check the estimated next-jump gap against the closed-form bound.

    For every member, probe state, and time, estimates the expected gap on
    the scaled member and asserts estimate <= J + 3 stderr.  Censored
    replicas propagate as in `estimate_d`.  Deterministic clocks are
    refused: mid-cycle the gap to the next lattice tick can exceed the
    bound, which only dominates under a worst-case entry phase.
    """
    if samples < 1000:
        raise ValueError("samples must be >= 1000")
    if isinstance(base.uniform_holding, Deterministic):
        raise ValueError(
            "deterministic holding laws are excluded from bound verification"
        )
    indices = [int(n) for n in indices]
    family = ScaledFamily(base=base, scheme=scheme, indices=tuple(indices))
    if probe_states is None:
        probe_states = [np.zeros(base.dimension)]
    probe_states = [as_state(p, base.dimension) for p in probe_states]

    def run_cell(cell: tuple[int, int, int]) -> tuple:
        i_n, i_t, i_x = cell
        n, t, x = indices[i_n], float(t_grid[i_t]), probe_states[i_x]
        member = family.member(n)
        est = estimate_d(member, x, t, samples, rng=spawn_rng(seed, "dbound", i_n, i_t, i_x))
        bound = theorem3_J(base, scheme, n, t, probe_states)
        holds = est.value <= bound + 3.0 * est.stderr
        return (n, t, x, est, bound, holds)

    cells = [
        (i_n, i_t, i_x)
        for i_n in range(len(indices))
        for i_t in range(len(t_grid))
        for i_x in range(len(probe_states))
    ]
    results = parallel_map(run_cell, cells, workers=workers)

    rows = []
    all_hold = True
    for n, t, x, est, bound, holds in results:
        all_hold &= holds
        rows.append(
            (
                "verify_d_bound",
                n,
                _state_label(x),
                t,
                est.value,
                est.stderr,
                est.n_samples,
                est.censored,
                "ok" if holds else "violation",
            )
        )
    bound_rows = [(n, t, theorem3_J(base, scheme, n, t, probe_states), "closed")
                  for n in indices for t in t_grid]
    tables = [
        Table("d_bound_check", DIAG_COLUMNS, rows),
        Table("theorem3_bound", ("n", "t", "J", "form"), bound_rows),
    ]
    verdict = PASS if all_hold else FAIL
    summary = {"note": EVIDENCE_NOTE, "samples": samples}
    return OpReport(op="verify_d_bound", verdict=verdict, summary=summary, tables=tables)
