"""Holding-time laws, jump-target kernels, and product-form semi-Markov models.

A model couples a Markov kernel for the embedded jump chain with a
state-indexed holding-time law for the clock; target and clock are drawn
independently given the current state.  Every built-in law carries exact
closed forms for its tail, mean, and integrated tail, which the scaling
bounds consume analytically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy import integrate, special

State = np.ndarray
ArrayLike = Union[float, np.ndarray]

QUADRATURE_ABS_TOL = 1e-10


def as_state(x: object, dimension: Optional[int] = None) -> State:
    """Coerce `x` into a flat float vector, optionally checking its length."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"state must be a flat vector, got shape {arr.shape}")
    if dimension is not None and arr.shape[0] != dimension:
        raise ValueError(f"state has dimension {arr.shape[0]}, expected {dimension}")
    return arr


def _scalarize(out: np.ndarray) -> ArrayLike:
    return float(out) if out.ndim == 0 else out


class HoldingTime:
    """Law of the waiting time until the next jump.

    All laws put no mass at zero and nonnegative mass everywhere else,
    sample vectorized, and expose `integrated_tail(s)` = ∫_s^∞ P(θ > r) dr
    exactly, so that `mean() == integrated_tail(0)`.  `Never` encodes an
    absorbing state whose samples are +inf.
    """

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> ArrayLike:
        raise NotImplementedError

    def cdf(self, t: ArrayLike) -> ArrayLike:
        raise NotImplementedError

    def tail(self, t: ArrayLike) -> ArrayLike:
        return 1.0 - self.cdf(t)

    def mean(self) -> float:
        return self.integrated_tail(0.0)

    def integrated_tail(self, s: float) -> float:
        raise NotImplementedError

    def mean_residual(self, s: float) -> float:
        """Conditional mean of θ - s given θ > s: integrated_tail(s) / tail(s).

        Defined as 0 where the tail is 0 (no residual mass).  Laws with a
        stable closed form override this so huge s cannot underflow the
        ratio.
        """
        tl = float(np.asarray(self.tail(s)))
        if tl == 0.0:
            return 0.0
        it = self.integrated_tail(s)
        return math.inf if math.isinf(it) else it / tl

    def time_scaled(self, factor: float) -> "HoldingTime":
        """Law of factor * θ for θ distributed as this law."""
        raise NotImplementedError

    @property
    def is_absorbing(self) -> bool:
        return False


@dataclass(frozen=True)
class Exponential(HoldingTime):
    """Memoryless clock with the given jump rate."""

    rate: float

    def __post_init__(self) -> None:
        if not self.rate > 0:
            raise ValueError("rate must be > 0")

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> ArrayLike:
        return rng.exponential(1.0 / self.rate, size=size)

    def cdf(self, t: ArrayLike) -> ArrayLike:
        t = np.asarray(t, dtype=float)
        return _scalarize(np.where(t > 0, -np.expm1(-self.rate * t), 0.0))

    def tail(self, t: ArrayLike) -> ArrayLike:
        t = np.asarray(t, dtype=float)
        return _scalarize(np.where(t > 0, np.exp(-self.rate * t), 1.0))

    def mean(self) -> float:
        return 1.0 / self.rate

    def integrated_tail(self, s: float) -> float:
        return math.exp(-self.rate * s) / self.rate

    def mean_residual(self, s: float) -> float:
        return 1.0 / self.rate

    def time_scaled(self, factor: float) -> "Exponential":
        return Exponential(self.rate / factor)


@dataclass(frozen=True)
class Pareto(HoldingTime):
    """Heavy-tailed clock with survival (1 + t/scale)^(-shape).

    The support starts at zero so no mass sits at t = 0, and shape > 1 is
    required to keep the mean finite.
    """

    shape: float
    scale: float = 1.0

    def __post_init__(self) -> None:
        if not self.shape > 1:
            raise ValueError("shape must be > 1 (finite mean required)")
        if not self.scale > 0:
            raise ValueError("scale must be > 0")

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> ArrayLike:
        u = rng.random(size)
        return self.scale * ((1.0 - u) ** (-1.0 / self.shape) - 1.0)

    def cdf(self, t: ArrayLike) -> ArrayLike:
        t = np.asarray(t, dtype=float)
        return _scalarize(np.where(t > 0, 1.0 - (1.0 + t / self.scale) ** (-self.shape), 0.0))

    def tail(self, t: ArrayLike) -> ArrayLike:
        t = np.asarray(t, dtype=float)
        return _scalarize(np.where(t > 0, (1.0 + t / self.scale) ** (-self.shape), 1.0))

    def mean(self) -> float:
        return self.scale / (self.shape - 1.0)

    def integrated_tail(self, s: float) -> float:
        return self.scale / (self.shape - 1.0) * (1.0 + s / self.scale) ** (1.0 - self.shape)

    def mean_residual(self, s: float) -> float:
        return (self.scale + s) / (self.shape - 1.0)

    def time_scaled(self, factor: float) -> "Pareto":
        return Pareto(self.shape, self.scale * factor)


@dataclass(frozen=True)
class Deterministic(HoldingTime):
    """Point mass at a fixed positive delay."""

    value: float

    def __post_init__(self) -> None:
        # value = 0 would put mass at t = 0, which every law here excludes.
        if not self.value > 0:
            raise ValueError("value must be > 0")

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> ArrayLike:
        if size is None:
            return self.value
        return np.full(size, self.value)

    def cdf(self, t: ArrayLike) -> ArrayLike:
        t = np.asarray(t, dtype=float)
        return _scalarize(np.where(t >= self.value, 1.0, 0.0))

    def mean(self) -> float:
        return self.value

    def integrated_tail(self, s: float) -> float:
        return max(self.value - s, 0.0)

    def time_scaled(self, factor: float) -> "Deterministic":
        return Deterministic(self.value * factor)


@dataclass(frozen=True)
class TwoPoint(HoldingTime):
    """Mixture of two atoms: t1 with probability p, t2 with probability 1 - p."""

    t1: float
    t2: float
    p: float

    def __post_init__(self) -> None:
        if not self.t1 > 0 or not self.t2 > 0:
            raise ValueError("atoms must be > 0")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> ArrayLike:
        u = rng.random(size)
        out = np.where(np.asarray(u) < self.p, self.t1, self.t2)
        return _scalarize(out)

    def cdf(self, t: ArrayLike) -> ArrayLike:
        t = np.asarray(t, dtype=float)
        out = self.p * (t >= self.t1) + (1.0 - self.p) * (t >= self.t2)
        return _scalarize(np.asarray(out, dtype=float))

    def mean(self) -> float:
        return self.p * self.t1 + (1.0 - self.p) * self.t2

    def integrated_tail(self, s: float) -> float:
        return self.p * max(self.t1 - s, 0.0) + (1.0 - self.p) * max(self.t2 - s, 0.0)

    def time_scaled(self, factor: float) -> "TwoPoint":
        return TwoPoint(self.t1 * factor, self.t2 * factor, self.p)


@dataclass(frozen=True)
class Weibull(HoldingTime):
    """Weibull clock with survival exp(-(t/scale)^shape)."""

    shape: float
    scale: float = 1.0

    def __post_init__(self) -> None:
        if not self.shape > 0:
            raise ValueError("shape must be > 0")
        if not self.scale > 0:
            raise ValueError("scale must be > 0")

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> ArrayLike:
        return self.scale * rng.weibull(self.shape, size=size)

    def cdf(self, t: ArrayLike) -> ArrayLike:
        t = np.asarray(t, dtype=float)
        return _scalarize(np.where(t > 0, -np.expm1(-((t / self.scale) ** self.shape)), 0.0))

    def tail(self, t: ArrayLike) -> ArrayLike:
        t = np.asarray(t, dtype=float)
        return _scalarize(np.where(t > 0, np.exp(-((t / self.scale) ** self.shape)), 1.0))

    def mean(self) -> float:
        return self.scale * special.gamma(1.0 + 1.0 / self.shape)

    def integrated_tail(self, s: float) -> float:
        # ∫_s^∞ exp(-(t/λ)^k) dt = (λ/k) Γ(1/k) Q(1/k, (s/λ)^k) with Q the
        # regularized upper incomplete gamma function.
        a = 1.0 / self.shape
        x = (s / self.scale) ** self.shape
        return self.scale * a * special.gamma(a) * special.gammaincc(a, x)

    def time_scaled(self, factor: float) -> "Weibull":
        return Weibull(self.shape, self.scale * factor)


@dataclass(frozen=True)
class Never(HoldingTime):
    """Absorbing clock: the next jump never arrives; samples are +inf."""

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> ArrayLike:
        if size is None:
            return math.inf
        return np.full(size, np.inf)

    def cdf(self, t: ArrayLike) -> ArrayLike:
        t = np.asarray(t, dtype=float)
        return _scalarize(np.zeros_like(t))

    def tail(self, t: ArrayLike) -> ArrayLike:
        t = np.asarray(t, dtype=float)
        return _scalarize(np.ones_like(t))

    def mean(self) -> float:
        return math.inf

    def integrated_tail(self, s: float) -> float:
        return math.inf

    def time_scaled(self, factor: float) -> "Never":
        return self

    @property
    def is_absorbing(self) -> bool:
        return True


NEVER = Never()


@dataclass(frozen=True)
class CustomHolding(HoldingTime):
    """Extension point: user-supplied sampler and CDF.

    `integrated_tail_fn` may be omitted, in which case the integrated tail
    falls back to adaptive quadrature with absolute tolerance 1e-10.
    The CDF must vanish at zero, like every built-in law.
    """

    name: str
    sampler: Callable[[np.random.Generator, Optional[int]], ArrayLike]
    cdf_fn: Callable[[ArrayLike], ArrayLike]
    integrated_tail_fn: Optional[Callable[[float], float]] = None

    def __post_init__(self) -> None:
        if abs(float(np.asarray(self.cdf_fn(0.0)))) > 0.0:
            raise ValueError("custom law must satisfy cdf(0) == 0")

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> ArrayLike:
        return self.sampler(rng, size)

    def cdf(self, t: ArrayLike) -> ArrayLike:
        return self.cdf_fn(t)

    def integrated_tail(self, s: float) -> float:
        if self.integrated_tail_fn is not None:
            return self.integrated_tail_fn(s)
        val, _ = integrate.quad(
            lambda r: float(np.asarray(self.tail(r))),
            s,
            np.inf,
            epsabs=QUADRATURE_ABS_TOL,
            limit=200,
        )
        return val

    def time_scaled(self, factor: float) -> "CustomHolding":
        base_sampler = self.sampler
        base_cdf = self.cdf_fn
        base_it = self.integrated_tail_fn

        def scaled_sampler(rng: np.random.Generator, size: Optional[int] = None) -> ArrayLike:
            return base_sampler(rng, size) * factor

        def scaled_cdf(t: ArrayLike) -> ArrayLike:
            return base_cdf(np.asarray(t, dtype=float) / factor)

        scaled_it = None
        if base_it is not None:
            scaled_it = lambda s: factor * base_it(s / factor)  # noqa: E731

        return CustomHolding(f"{self.name}*{factor:g}", scaled_sampler, scaled_cdf, scaled_it)


@dataclass(frozen=True)
class TransitionKernel:
    """Markov kernel for the embedded jump chain.

    `sampler` is batch-first: given an (m, d) array of current states and a
    generator it returns the (m, d) array of next states.  Samplers hold no
    mutable state; all randomness comes from the generator argument.
    """

    sampler: Callable[[np.ndarray, np.random.Generator], np.ndarray]
    description: str = ""

    def sample_batch(self, states: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        out = np.asarray(self.sampler(states, rng), dtype=float)
        if out.shape != states.shape:
            raise ValueError(
                f"kernel returned shape {out.shape} for input shape {states.shape}"
            )
        if not np.all(np.isfinite(out)):
            raise ValueError("kernel produced a non-finite state")
        return out

    def sample(self, x: State, rng: np.random.Generator) -> State:
        out = np.asarray(self.sampler(x[None, :], rng), dtype=float)
        if out.shape != (1, x.shape[0]):
            raise ValueError(f"kernel returned shape {out.shape} for one state of dimension {x.shape[0]}")
        return out[0]


def shift_kernel(step: ArrayLike = 1.0) -> TransitionKernel:
    """Deterministic drift: x -> x + step."""
    step_arr = np.atleast_1d(np.asarray(step, dtype=float))

    def sampler(states: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return states + step_arr

    return TransitionKernel(sampler, description=f"shift(step={step_arr.tolist()})")


def symmetric_step_kernel(step: ArrayLike = 1.0) -> TransitionKernel:
    """Symmetric walk: x -> x ± step with equal probability."""
    step_arr = np.atleast_1d(np.asarray(step, dtype=float))

    def sampler(states: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        signs = rng.choice([-1.0, 1.0], size=(states.shape[0], 1))
        return states + signs * step_arr

    return TransitionKernel(sampler, description=f"symmetric(step={step_arr.tolist()})")


def constant_kernel() -> TransitionKernel:
    """Frozen chain: x -> x."""

    def sampler(states: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return states.copy()

    return TransitionKernel(sampler, description="constant")


def jump_to_kernel(target: ArrayLike) -> TransitionKernel:
    """Every state jumps to the same fixed target."""
    target_arr = np.atleast_1d(np.asarray(target, dtype=float))

    def sampler(states: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return np.broadcast_to(target_arr, states.shape).copy()

    return TransitionKernel(sampler, description=f"jump_to(target={target_arr.tolist()})")


@dataclass(frozen=True)
class PointInitial:
    """Initial law that always starts at the same point.

    Recognized by the batch simulators, which tile the point instead of
    drawing states one by one.
    """

    point: tuple

    def __call__(self, rng: np.random.Generator) -> State:
        return np.asarray(self.point, dtype=float)


def point_initial(x: ArrayLike) -> PointInitial:
    return PointInitial(tuple(as_state(x).tolist()))


@dataclass(frozen=True)
class SemiMarkovModel:
    """Product-form semi-Markov model: jump-target kernel plus clock law map.

    `holding` must be deterministic in the state (the same state always
    yields the same law object).  When the clock law does not depend on the
    state, set `uniform_holding` so the batch simulators can skip per-row
    law lookups; `uniform_model` does this for you.
    """

    dimension: int
    kernel: TransitionKernel
    holding: Callable[[State], HoldingTime]
    initial: Callable[[np.random.Generator], State]
    uniform_holding: Optional[HoldingTime] = None
    label: str = ""

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")

    def holding_at(self, x: State) -> HoldingTime:
        if self.uniform_holding is not None:
            return self.uniform_holding
        return self.holding(x)

    def q(self, x: State) -> float:
        """Jump intensity 1/m(x), with q = 0 when the mean holding time is infinite."""
        m = self.holding_at(x).mean()
        return 0.0 if math.isinf(m) else 1.0 / m

    def draw_initial(self, rng: np.random.Generator) -> State:
        return as_state(self.initial(rng), self.dimension)

    def draw_initial_batch(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if isinstance(self.initial, PointInitial):
            point = as_state(np.asarray(self.initial.point), self.dimension)
            return np.tile(point, (n, 1))
        return np.stack([self.draw_initial(rng) for _ in range(n)])


def uniform_model(
    dimension: int,
    kernel: TransitionKernel,
    law: HoldingTime,
    initial: Callable[[np.random.Generator], State],
    label: str = "",
) -> SemiMarkovModel:
    """Model whose holding law is the same at every state."""
    return SemiMarkovModel(
        dimension=dimension,
        kernel=kernel,
        holding=lambda x: law,
        initial=initial,
        uniform_holding=law,
        label=label,
    )


def mean_holding(model: SemiMarkovModel, x: ArrayLike) -> float:
    """Mean holding time at state x; +inf at absorbing states."""
    return model.holding_at(as_state(x, model.dimension)).mean()


def tail(model: SemiMarkovModel, x: ArrayLike, t: float) -> float:
    """Survival P(θ > t) of the holding time at state x."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return float(np.asarray(model.holding_at(as_state(x, model.dimension)).tail(t)))


def integrated_tail(model: SemiMarkovModel, x: ArrayLike, s: float) -> float:
    """∫_s^∞ P(θ > r) dr for the holding time at state x; +inf at absorbing states."""
    if s < 0:
        raise ValueError("s must be >= 0")
    return model.holding_at(as_state(x, model.dimension)).integrated_tail(s)
