from __future__ import annotations

import math

import numpy as np
import pytest

from smtight import (
    NEVER,
    CustomHolding,
    Deterministic,
    Exponential,
    Never,
    Pareto,
    SemiMarkovModel,
    TransitionKernel,
    TwoPoint,
    Weibull,
    as_state,
    integrated_tail,
    mean_holding,
    point_initial,
    shift_kernel,
    tail,
    uniform_model,
)

ALL_LAWS = [
    Exponential(2.0),
    Exponential(0.3),
    Pareto(2.0, 1.0),
    Pareto(3.0, 0.5),
    Deterministic(1.0),
    Deterministic(2.5),
    TwoPoint(0.25, 1.0, 0.5),
    TwoPoint(0.1, 3.0, 0.2),
    Weibull(0.7, 1.0),
    Weibull(2.0, 0.5),
    NEVER,
]


def model_with(law):
    return uniform_model(1, shift_kernel(1.0), law, point_initial([0.0]))


def test_mean_examples() -> None:
    assert mean_holding(model_with(Exponential(2.0)), [0.0]) == 0.5
    assert mean_holding(model_with(TwoPoint(0.25, 1.0, 0.5)), [0.0]) == 0.625
    assert mean_holding(model_with(Pareto(2.0, 1.0)), [0.0]) == 1.0
    assert mean_holding(model_with(NEVER), [0.0]) == math.inf


def test_tail_examples() -> None:
    assert tail(model_with(Exponential(1.0)), [0.0], 0.0) == 1.0
    assert tail(model_with(Deterministic(2.0)), [0.0], 3.0) == 0.0
    assert tail(model_with(TwoPoint(0.25, 1.0, 0.5)), [0.0], 0.5) == 0.5


def test_integrated_tail_examples() -> None:
    for rate in (0.5, 1.0, 2.0):
        for s in (0.0, 0.3, 2.0):
            assert integrated_tail(model_with(Exponential(rate)), [0.0], s) == pytest.approx(
                math.exp(-rate * s) / rate, rel=1e-14
            )
    assert integrated_tail(model_with(Deterministic(2.0)), [0.0], 0.5) == 1.5
    assert integrated_tail(model_with(Pareto(3.0, 1.0)), [0.0], 0.0) == pytest.approx(0.5)
    assert integrated_tail(model_with(NEVER), [0.0], 1.0) == math.inf


@pytest.mark.parametrize("law", ALL_LAWS, ids=lambda l: type(l).__name__ + repr(getattr(l, "__dict__", "")))
def test_tail_bounds_and_monotone(law) -> None:
    grid = np.linspace(0.0, 8.0, 200)
    tails = np.asarray(law.tail(grid))
    assert np.all(tails >= 0.0) and np.all(tails <= 1.0)
    assert np.all(np.diff(tails) <= 1e-15)
    # no mass at zero
    assert float(np.asarray(law.cdf(0.0))) == 0.0


@pytest.mark.parametrize("law", ALL_LAWS, ids=lambda l: type(l).__name__)
def test_mean_residual_consistent_with_ratio(law) -> None:
    for s in (0.0, 0.4, 2.0):
        tl = float(np.asarray(law.tail(s)))
        mr = law.mean_residual(s)
        if tl == 0.0:
            assert mr == 0.0
        elif math.isinf(law.integrated_tail(s)):
            assert mr == math.inf
        else:
            assert mr == pytest.approx(law.integrated_tail(s) / tl, rel=1e-12)
    # stable closed forms do not underflow at huge arguments
    assert Exponential(0.7).mean_residual(1e6) == pytest.approx(1.0 / 0.7)
    assert Pareto(3.0, 1.0).mean_residual(1e6) == pytest.approx((1.0 + 1e6) / 2.0)


@pytest.mark.parametrize("law", ALL_LAWS, ids=lambda l: type(l).__name__)
def test_mean_matches_integrated_tail_at_zero(law) -> None:
    m = law.mean()
    it = law.integrated_tail(0.0)
    if math.isinf(m):
        assert math.isinf(it)
    else:
        assert m == pytest.approx(it, abs=1e-12)


@pytest.mark.parametrize(
    "law",
    [Exponential(2.0), Pareto(3.0, 1.0), Deterministic(1.5), TwoPoint(0.25, 1.0, 0.5), Weibull(1.5, 2.0)],
    ids=lambda l: type(l).__name__,
)
def test_sampler_mean_matches_analytic(law) -> None:
    rng = np.random.default_rng(101)
    samples = np.asarray(law.sample(rng, size=100_000))
    assert np.all(samples >= 0.0)
    se = samples.std(ddof=1) / math.sqrt(samples.shape[0])
    assert abs(samples.mean() - law.mean()) <= 4.0 * se + 1e-12


def test_never_samples_infinite() -> None:
    rng = np.random.default_rng(0)
    assert Never().sample(rng) == math.inf
    assert np.all(np.isinf(Never().sample(rng, size=5)))
    assert Never().is_absorbing


def test_constructor_rejections() -> None:
    with pytest.raises(ValueError):
        Exponential(0.0)
    with pytest.raises(ValueError):
        Pareto(1.0, 1.0)
    with pytest.raises(ValueError):
        Pareto(0.5, 1.0)
    with pytest.raises(ValueError):
        Deterministic(0.0)
    with pytest.raises(ValueError):
        TwoPoint(0.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        TwoPoint(0.5, 1.0, 1.5)
    with pytest.raises(ValueError):
        Weibull(-1.0, 1.0)


def test_time_scaled_laws() -> None:
    assert Exponential(2.0).time_scaled(0.5) == Exponential(4.0)
    assert Pareto(3.0, 1.0).time_scaled(0.1) == Pareto(3.0, 0.1)
    assert Deterministic(2.0).time_scaled(0.25) == Deterministic(0.5)
    assert TwoPoint(0.25, 1.0, 0.5).time_scaled(2.0) == TwoPoint(0.5, 2.0, 0.5)
    assert Weibull(2.0, 1.0).time_scaled(3.0) == Weibull(2.0, 3.0)
    assert Never().time_scaled(5.0).is_absorbing
    # scaled mean is the scaled mean
    assert Pareto(3.0, 1.0).time_scaled(0.1).mean() == pytest.approx(0.05)


def test_custom_holding_rejects_mass_at_zero() -> None:
    with pytest.raises(ValueError):
        CustomHolding(
            name="bad",
            sampler=lambda rng, size=None: rng.random(size),
            cdf_fn=lambda t: np.clip(np.asarray(t, dtype=float) + 0.5, 0.0, 1.0),
        )


def test_custom_holding_quadrature_fallback() -> None:
    rate = 1.7
    law = CustomHolding(
        name="exp-like",
        sampler=lambda rng, size=None: rng.exponential(1.0 / rate, size=size),
        cdf_fn=lambda t: np.where(np.asarray(t, dtype=float) > 0, -np.expm1(-rate * np.asarray(t, dtype=float)), 0.0),
    )
    for s in (0.0, 0.4, 2.0):
        assert law.integrated_tail(s) == pytest.approx(math.exp(-rate * s) / rate, abs=1e-9)
    # closed-form override is used verbatim when supplied
    law2 = CustomHolding(
        name="exp-closed",
        sampler=law.sampler,
        cdf_fn=law.cdf_fn,
        integrated_tail_fn=lambda s: math.exp(-rate * s) / rate,
    )
    assert law2.integrated_tail(0.3) == math.exp(-rate * 0.3) / rate
    assert law2.time_scaled(0.5).integrated_tail(0.0) == pytest.approx(0.5 / rate)


def test_jump_rate_convention() -> None:
    m = model_with(Exponential(2.0))
    assert m.q(np.array([0.0])) == 2.0
    absorbing = model_with(NEVER)
    assert absorbing.q(np.array([0.0])) == 0.0


def test_kernel_shape_validation() -> None:
    bad = TransitionKernel(lambda states, rng: states[:, :0], description="broken")
    with pytest.raises(ValueError):
        bad.sample_batch(np.zeros((3, 1)), np.random.default_rng(0))
    nonfinite = TransitionKernel(lambda states, rng: states + np.inf, description="inf")
    with pytest.raises(ValueError):
        nonfinite.sample_batch(np.zeros((2, 1)), np.random.default_rng(0))


def test_as_state_validation() -> None:
    assert as_state(1.5).shape == (1,)
    assert as_state([1.0, 2.0], 2).tolist() == [1.0, 2.0]
    with pytest.raises(ValueError):
        as_state([1.0, 2.0], 3)
    with pytest.raises(ValueError):
        as_state([[1.0], [2.0]])


def test_model_requires_positive_dimension() -> None:
    with pytest.raises(ValueError):
        SemiMarkovModel(
            dimension=0,
            kernel=shift_kernel(1.0),
            holding=lambda x: Exponential(1.0),
            initial=point_initial([0.0]),
        )


def test_holding_map_is_state_dependent() -> None:
    fast, slow = Exponential(10.0), Exponential(0.1)

    def holding(x):
        return fast if x[0] < 0 else slow

    m = SemiMarkovModel(1, shift_kernel(1.0), holding, point_initial([0.0]))
    assert m.holding_at(np.array([-1.0])) is fast
    assert m.holding_at(np.array([3.0])) is slow
    assert mean_holding(m, [-1.0]) == pytest.approx(0.1)
