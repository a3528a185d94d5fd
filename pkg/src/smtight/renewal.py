"""Jump-chain simulation, piecewise-constant paths, and forward jump times."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .kernels import HoldingTime, SemiMarkovModel, State, as_state

DEFAULT_STEP_LIMIT = 10**6


class Truncation(enum.Enum):
    """Why a simulated chain stopped."""

    HORIZON_REACHED = "horizon_reached"
    ABSORBED = "absorbed"
    STEP_LIMIT = "step_limit"


class _HorizonExceeded:
    """Sentinel: no jump occurred before the search horizon."""

    _instance: Optional["_HorizonExceeded"] = None

    def __new__(cls) -> "_HorizonExceeded":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "HORIZON_EXCEEDED"


HORIZON_EXCEEDED = _HorizonExceeded()

ForwardJumpResult = Union[float, _HorizonExceeded]


@dataclass(frozen=True)
class RenewalRecord:
    """States and jump times of one simulated chain.

    `jump_times[0] == 0` and the sequence is non-decreasing; `states` and
    `jump_times` have equal length.  Under `ABSORBED` the chain stopped at
    a state whose holding law never fires again.
    """

    states: np.ndarray
    jump_times: np.ndarray
    truncation: Truncation

    def __post_init__(self) -> None:
        if self.states.shape[0] != self.jump_times.shape[0]:
            raise ValueError("states and jump_times must have equal length")
        if self.jump_times[0] != 0.0:
            raise ValueError("first jump time must be 0")
        if np.any(np.diff(self.jump_times) < 0):
            raise ValueError("jump_times must be non-decreasing")

    @property
    def n_jumps(self) -> int:
        return self.states.shape[0] - 1


@dataclass(frozen=True)
class JumpPath:
    """Right-continuous piecewise-constant trajectory on [0, horizon].

    Holds the initial value plus strictly increasing jump times with their
    new values; jumps that do not change the value are dropped at
    construction.  Evaluation at t returns the value of the last jump at a
    time <= t, or the initial value if none.
    """

    initial: State
    times: np.ndarray
    values: np.ndarray
    horizon: float

    def __post_init__(self) -> None:
        if self.horizon <= 0:
            raise ValueError("horizon must be > 0")
        # own copies: these arrays are frozen below
        initial = as_state(self.initial).copy()
        times = np.atleast_1d(np.array(self.times, dtype=float))
        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.size == 0:
            values = values.reshape(0, initial.shape[0])
        if times.shape[0] != values.shape[0]:
            raise ValueError("times and values must have equal length")
        if values.shape[0] and values.shape[1] != initial.shape[0]:
            raise ValueError("jump values must match the initial value's dimension")
        if times.size and (times[0] <= 0 or np.any(np.diff(times) <= 0)):
            raise ValueError("jump times must be strictly increasing and > 0")
        if times.size:
            # Comparing each jump value with its immediate predecessor is
            # equivalent to comparing with the last kept one: a dropped jump
            # left the running value unchanged.
            stacked = np.vstack([initial[None, :], values])
            changed = np.any(stacked[1:] != stacked[:-1], axis=1)
            times = times[changed]
            values = values[changed]
        times.setflags(write=False)
        values.setflags(write=False)
        initial.setflags(write=False)
        object.__setattr__(self, "initial", initial)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def n_jumps(self) -> int:
        return int(self.times.shape[0])

    def value_at(self, t: float) -> State:
        idx = int(np.searchsorted(self.times, t, side="right")) - 1
        return self.initial if idx < 0 else self.values[idx]

    def values_at(self, ts: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.times, ts, side="right")
        stacked = np.vstack([self.initial[None, :], self.values])
        return stacked[idx]


def simulate_chain(
    model: SemiMarkovModel,
    horizon: float,
    *,
    step_limit: int = DEFAULT_STEP_LIMIT,
    rng: np.random.Generator,
) -> RenewalRecord:
    """Simulate the embedded chain until it passes `horizon`.

    Draws the next state and the holding time independently given the
    current state, and stops at the first jump time beyond the horizon
    (``HORIZON_REACHED``, the overshooting jump is kept so the path covers
    [0, horizon]), at an absorbing state (``ABSORBED``), or after
    `step_limit` jumps (``STEP_LIMIT``, reported so accumulating jumps
    never hang or silently truncate).
    """
    if horizon <= 0:
        raise ValueError("horizon must be > 0")
    if step_limit < 1:
        raise ValueError("step_limit must be >= 1")

    x = model.draw_initial(rng)
    states = [x]
    times = [0.0]
    truncation = Truncation.STEP_LIMIT
    for _ in range(step_limit):
        law = model.holding_at(x)
        if law.is_absorbing:
            truncation = Truncation.ABSORBED
            break
        theta = float(law.sample(rng))
        t_next = times[-1] + theta
        x = model.kernel.sample(x, rng)
        states.append(x)
        times.append(t_next)
        if t_next > horizon:
            truncation = Truncation.HORIZON_REACHED
            break
    return RenewalRecord(
        states=np.asarray(states, dtype=float),
        jump_times=np.asarray(times, dtype=float),
        truncation=truncation,
    )


def to_path(record: RenewalRecord, T: float) -> JumpPath:
    """Project a chain record onto its piecewise-constant path on [0, T].

    Refuses records that do not cover the window: the record must either
    be absorbed (constant after its last jump) or have a jump time beyond
    T.  Jumps after T are clipped; ties and value-preserving jumps
    collapse.
    """
    if T <= 0:
        raise ValueError("T must be > 0")
    covered = record.truncation is Truncation.ABSORBED or record.jump_times[-1] > T
    if not covered:
        raise ValueError(f"record does not cover [0, {T}]: last jump at {record.jump_times[-1]}")

    times: list[float] = []
    values: list[np.ndarray] = []
    for i in range(1, record.jump_times.shape[0]):
        t = float(record.jump_times[i])
        if t > T:
            break
        if times and t == times[-1]:
            values[-1] = record.states[i]
        else:
            times.append(t)
            values.append(record.states[i])
    if values:
        value_arr = np.asarray(values, dtype=float)
    else:
        value_arr = np.empty((0, record.states.shape[1]))
    return JumpPath(
        initial=record.states[0],
        times=np.asarray(times, dtype=float),
        values=value_arr,
        horizon=T,
    )


def default_forward_horizon(t: float) -> float:
    return t + 1e6 * max(1.0, t)


def _holding_groups(
    model: SemiMarkovModel, states: np.ndarray
) -> list[tuple[HoldingTime, np.ndarray]]:
    """Group row indices of `states` by their (value-equal) holding law.

    Group order follows first occurrence, so downstream sampling consumes
    the generator in a reproducible order.
    """
    if model.uniform_holding is not None:
        return [(model.uniform_holding, np.arange(states.shape[0]))]
    groups: dict[HoldingTime, list[int]] = {}
    for i in range(states.shape[0]):
        law = model.holding(states[i])
        groups.setdefault(law, []).append(i)
    return [(law, np.asarray(idx)) for law, idx in groups.items()]


def _sample_holding_rows(
    model: SemiMarkovModel, states: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    theta = np.empty(states.shape[0])
    for law, idx in _holding_groups(model, states):
        theta[idx] = law.sample(rng, size=idx.shape[0])
    return theta


def forward_gap_samples(
    model: SemiMarkovModel,
    x: State,
    t: float,
    n: int,
    *,
    rng: np.random.Generator,
    horizon: Optional[float] = None,
    step_limit: int = DEFAULT_STEP_LIMIT,
) -> tuple[np.ndarray, np.ndarray]:
    """Draw n independent gaps between time t and the next jump after t.

    Each replica restarts the chain at (x, 0) and runs until its first
    jump time exceeds t; the gap is that time minus t.  Replicas whose
    first such jump lands beyond `horizon` (or that exhaust `step_limit`
    while accumulating jumps below t) are censored: their gap is NaN and
    the matching entry of the returned mask is True.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if horizon is None:
        horizon = default_forward_horizon(t)
    if horizon <= t:
        raise ValueError("horizon must be > t")

    x = as_state(x, model.dimension)
    states = np.tile(x, (n, 1))
    tau = np.zeros(n)
    gaps = np.full(n, np.nan)
    censored = np.zeros(n, dtype=bool)
    active = np.arange(n)

    for _ in range(step_limit):
        if active.size == 0:
            break
        theta = _sample_holding_rows(model, states, rng)
        tau = tau + theta
        passed = tau > t
        if passed.any():
            done_rows = active[passed]
            done_tau = tau[passed]
            over = done_tau > horizon
            gaps[done_rows[~over]] = done_tau[~over] - t
            censored[done_rows[over]] = True
        if (~passed).any():
            states = model.kernel.sample_batch(states[~passed], rng)
            tau = tau[~passed]
            active = active[~passed]
        else:
            active = active[:0]
            break
    censored[active] = True
    return gaps, censored


def forward_jump(
    model: SemiMarkovModel,
    x: State,
    t: float,
    *,
    rng: np.random.Generator,
    horizon: Optional[float] = None,
    step_limit: int = DEFAULT_STEP_LIMIT,
) -> ForwardJumpResult:
    """One sample of the time between t and the next jump strictly after t.

    Starts a fresh chain at (x, 0); returns HORIZON_EXCEEDED when no jump
    lands in (t, horizon], which callers must propagate as evidence of an
    absorbing (or extremely heavy-tailed) regime.
    """
    gaps, censored = forward_gap_samples(
        model, x, t, 1, rng=rng, horizon=horizon, step_limit=step_limit
    )
    if censored[0]:
        return HORIZON_EXCEEDED
    return float(gaps[0])


def simulate_chain_batch(
    model: SemiMarkovModel,
    steps: int,
    n: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Simulate n chains for a fixed number of steps, in lockstep.

    Returns (X, tau) with shapes (n, steps+1, d) and (n, steps+1).  Rows
    that hit an absorbing state freeze: their state and jump time repeat
    forward, so per-step increments vanish instead of becoming infinite.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    d = model.dimension
    X = np.empty((n, steps + 1, d))
    tau = np.zeros((n, steps + 1))
    X[:, 0] = model.draw_initial_batch(n, rng)

    alive = np.ones(n, dtype=bool)
    for j in range(steps):
        X[:, j + 1] = X[:, j]
        tau[:, j + 1] = tau[:, j]
        rows = np.flatnonzero(alive)
        if rows.size == 0:
            continue
        cur = X[rows, j]
        theta = np.empty(rows.size)
        absorbed_local = np.zeros(rows.size, dtype=bool)
        for law, idx in _holding_groups(model, cur):
            if law.is_absorbing:
                absorbed_local[idx] = True
            else:
                theta[idx] = law.sample(rng, size=idx.shape[0])
        newly_dead = rows[absorbed_local]
        alive[newly_dead] = False
        go = rows[~absorbed_local]
        if go.size:
            tau[go, j + 1] = tau[go, j] + theta[~absorbed_local]
            X[go, j + 1] = model.kernel.sample_batch(X[go, j], rng)
    return X, tau
