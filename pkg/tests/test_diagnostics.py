from __future__ import annotations

import math

import numpy as np
import pytest

from smtight import (
    FAIL,
    NEVER,
    PASS,
    BumpFunction,
    Deterministic,
    Estimate,
    Exponential,
    FamilySpec,
    Pareto,
    TwoPoint,
    Weibull,
    apply_L,
    apply_L_time,
    build_counterexample,
    check_compact_containment,
    check_condition_D,
    check_condition_iv,
    constant_kernel,
    constant_phi,
    coordinate_phi,
    counterexample_family,
    diffusion_scheme,
    estimate_d,
    estimate_modulus_tail,
    martingale_residual,
    mean_holding,
    point_initial,
    scan_condition_iii,
    search_condition_D_constant,
    shift_kernel,
    square_phi,
    symmetric_step_kernel,
    uniform_model,
    ScaledFamily,
)

ORIGIN = np.array([0.0])


def drift_model(law, label=""):
    return uniform_model(1, shift_kernel(1.0), law, point_initial([0.0]), label=label)


# -- bump function -------------------------------------------------------------


def test_bump_values() -> None:
    f = BumpFunction((0.0,), 1.0)
    assert f(np.array([0.0])) == 1.0
    assert f(np.array([1.0])) == 0.0
    assert f(np.array([2.0])) == 0.0
    grid = np.linspace(-2.0, 2.0, 101)[:, None]
    vals = f(grid)
    assert np.all(vals >= 0.0) and np.all(vals <= 1.0)
    assert f.sup_value == 1.0


def test_bump_translation() -> None:
    f = BumpFunction((0.0,), 0.5)
    g = f.translated(np.array([2.0]))
    assert g(np.array([2.0])) == 1.0
    assert g(np.array([0.0])) == 0.0


def test_bump_smooth_at_boundary() -> None:
    f = BumpFunction((0.0,), 1.0)

    def d1(x, h):
        return (f(np.array([x + h])) - f(np.array([x - h]))) / (2 * h)

    def d2(x, h):
        return (f(np.array([x + h])) - 2 * f(np.array([x])) + f(np.array([x - h]))) / h**2

    # first two derivatives vanish approaching the support boundary
    for h in (1e-2, 1e-3):
        assert abs(d1(1.0, h)) < 1e-4
        assert abs(d2(1.0, h)) < 1e-2


# -- estimates ------------------------------------------------------------------


def test_estimate_from_samples() -> None:
    e = Estimate.from_samples(np.array([1.0, 2.0, 3.0, 4.0]), seed=5)
    assert e.value == 2.5
    assert e.stderr == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2.0)
    assert e.n_samples == 4
    assert not e.is_lower_bound
    assert Estimate.from_samples(np.array([1.0]), censored=2).is_lower_bound


# -- estimate_d ------------------------------------------------------------------


def test_estimate_d_memoryless_value_and_flatness() -> None:
    model = drift_model(Exponential(2.0))
    ests = [estimate_d(model, ORIGIN, t, 10_000, seed=30) for t in (0.01, 0.5, 1.0)]
    for e in ests:
        assert e.censored == 0
        assert abs(e.value - 0.5) <= 3.0 * e.stderr
    for a, b in zip(ests, ests[1:]):
        assert abs(a.value - b.value) <= 3.0 * math.hypot(a.stderr, b.stderr)


@pytest.mark.parametrize(
    "law",
    [
        Exponential(2.0),
        Pareto(3.0, 1.0),
        TwoPoint(0.25, 1.0, 0.5),
        Deterministic(1.0),
        Weibull(1.5, 1.0),
    ],
    ids=lambda l: type(l).__name__,
)
def test_estimate_d_at_zero_matches_mean(law) -> None:
    model = drift_model(law)
    e = estimate_d(model, ORIGIN, 0.0, 10_000, seed=32)
    assert abs(e.value - mean_holding(model, ORIGIN)) <= 3.0 * e.stderr + 1e-12


def test_estimate_d_at_zero_absorbing_is_infinite_like_mean() -> None:
    model = drift_model(NEVER)
    e = estimate_d(model, ORIGIN, 0.0, 200, seed=29)
    assert e.value == mean_holding(model, ORIGIN) == math.inf


def test_estimate_d_absorbed_state_is_infinite_evidence() -> None:
    model = build_counterexample(3).model
    e = estimate_d(model, np.array([1.0]), 0.5, 200, seed=33)
    assert e.value == math.inf
    assert e.censored == e.n_samples
    assert e.is_lower_bound


def test_estimate_d_requires_enough_samples() -> None:
    with pytest.raises(ValueError):
        estimate_d(drift_model(Exponential(1.0)), ORIGIN, 0.1, 50, seed=1)


# -- scan_condition_iii ----------------------------------------------------------


def test_scan_condition_iii_scaled_exponential_passes() -> None:
    base = drift_model(Exponential(1.0), label="exp")
    fam = ScaledFamily(base=base, scheme=diffusion_scheme(), indices=tuple(range(1, 11)))
    rep = scan_condition_iii(
        fam.to_family_spec([[0.0]]), [1.0, 0.1, 0.01], 2000, seed=34, pilot_paths=20
    )
    assert rep.verdict == PASS
    assert rep.summary["note"] == "finite-sample evidence, not a proof"
    # cells sit near 1/a_n for the probed members
    for row in rep.table("condition_iii_scan").rows:
        u, value, stderr = row[1], row[4], row[5]
        assert abs(value - 1.0 / u**2) <= 4.0 * stderr + 1e-9


def test_scan_condition_iii_counterexample_fails_with_witness() -> None:
    rep = scan_condition_iii(counterexample_family([1, 2, 4]), [0.5], 500, seed=35, pilot_paths=10)
    assert rep.verdict == FAIL
    assert rep.summary["witness"]["x"] == "1"


def test_scan_condition_iii_flat_family_fails_threshold() -> None:
    det = drift_model(Deterministic(1.0))
    fam = FamilySpec(indices=(1, 2, 3), build=lambda u: det, probe_states=(ORIGIN,))
    rep = scan_condition_iii(fam, [0.5], 500, seed=36, threshold=0.1, pilot_paths=0)
    assert rep.verdict == FAIL
    for row in rep.table("condition_iii_scan").rows:
        assert row[4] == 0.5  # deterministic gap to the next integer clock tick


def test_scan_condition_iii_pilot_probes_find_absorbed_state() -> None:
    fam = counterexample_family([2], probe_states=[[0.0]])  # user forgot state 1
    rep = scan_condition_iii(fam, [0.5], 500, seed=37, pilot_paths=50)
    assert rep.verdict == FAIL
    assert "1" in rep.summary["probe_states"]["2"]


# -- check_condition_iv ----------------------------------------------------------


def test_condition_iv_deterministic_passes_exactly() -> None:
    det = drift_model(Deterministic(1.0))
    fam = FamilySpec(indices=(1, 2), build=lambda u: det, probe_states=(ORIGIN,))
    rep = check_condition_iv(fam, 0.5, 2000, seed=38)
    assert rep.verdict == PASS
    assert all(row[4] == 0.0 for row in rep.table("condition_iv").rows)


def test_condition_iv_exponential_fails() -> None:
    exp = drift_model(Exponential(1.0))
    fam = FamilySpec(indices=(1,), build=lambda u: exp, probe_states=(ORIGIN,))
    rep = check_condition_iv(fam, 0.5, 10_000, seed=39)
    est = rep.table("condition_iv").rows[0]
    expected = 1.0 - math.exp(-0.5)
    assert abs(est[4] - expected) <= 3.0 * est[5]
    assert rep.verdict == FAIL


def test_condition_iv_counterexample_atom() -> None:
    fam = counterexample_family([4], probe_states=[[0.0]])
    rep = check_condition_iv(fam, 0.5, 10_000, seed=40)
    est = rep.table("condition_iv").rows[0]
    assert abs(est[4] - 0.5) <= 3.0 * est[5]


# -- check_compact_containment ----------------------------------------------------


def test_containment_counterexample_bounded() -> None:
    rep = check_compact_containment(counterexample_family([1, 3]), 2.0, [2.0, 3.0], 500, seed=41)
    assert all(row[4] == 0.0 for row in rep.table("compact_containment").rows)
    assert rep.verdict == PASS


def test_containment_point_mass_above_level() -> None:
    frozen = uniform_model(1, constant_kernel(), Exponential(1.0), point_initial([5.0]))
    fam = FamilySpec(indices=(1,), build=lambda u: frozen, probe_states=(ORIGIN,))
    rep = check_compact_containment(fam, 1.0, [4.0], 300, seed=42)
    assert rep.table("compact_containment").rows[0][4] == 1.0
    assert rep.verdict == FAIL


def test_containment_unit_walk_poisson_tail() -> None:
    # P(sup >= 10 on [0,1]) = P(Poisson(1) >= 10) < 1.2e-7: no hits expected
    # in 10^4 paths.
    walk = drift_model(Exponential(1.0))
    fam = FamilySpec(indices=(1,), build=lambda u: walk, probe_states=(ORIGIN,))
    rep = check_compact_containment(fam, 1.0, [10.0], 10_000, seed=43)
    assert rep.table("compact_containment").rows[0][4] == 0.0
    assert rep.verdict == PASS


# -- check_condition_D -------------------------------------------------------------


def test_condition_D_counterexample_with_paper_constant() -> None:
    model = build_counterexample(4).model
    f = BumpFunction((0.0,), 0.25)
    translations = [np.array([q]) for q in (-1.0, -0.5, 0.0, 0.5, 1.0, 2.0)]
    rep = check_condition_D(model, f, 4.0, translations, 1, 10_000, seed=44)
    assert rep.verdict == PASS


def test_condition_D_far_translate_zero_increments() -> None:
    model = drift_model(Exponential(1.0))
    f = BumpFunction((0.0,), 0.25)
    rep = check_condition_D(model, f, 0.0, [np.array([500.0])], 2, 1000, seed=45)
    assert rep.verdict == PASS
    uncond = [r for r in rep.table("condition_D").rows if r[3] == -1.0]
    assert all(r[4] == 0.0 for r in uncond)


def test_condition_D_zero_constant_fails() -> None:
    model = build_counterexample(4).model
    f = BumpFunction((0.0,), 0.25)
    rep = check_condition_D(model, f, 0.0, [ORIGIN], 1, 2000, seed=46)
    assert rep.verdict == FAIL


def test_condition_D_insufficient_bins_reported() -> None:
    from smtight import TransitionKernel

    gauss = TransitionKernel(lambda s, rng: s + rng.normal(size=s.shape), "gauss")
    model = uniform_model(1, gauss, Exponential(1.0), point_initial([0.0]))
    f = BumpFunction((0.0,), 1.0)
    # X_1 is continuous, so 8 equal-frequency bins of 100 replicas each hold
    # ~12 samples, below the 30-sample floor.
    rep = check_condition_D(model, f, 1.0, [ORIGIN], 2, 100, seed=47, bins=8, min_bin=30)
    statuses = {r[8] for r in rep.table("condition_D").rows}
    assert "insufficient" in statuses


def test_search_condition_D_constant() -> None:
    model = build_counterexample(4).model
    f = BumpFunction((0.0,), 0.25)
    best = search_condition_D_constant(
        model, f, [0.0, 1.0, 2.0, 4.0], [ORIGIN], 1, 2000, seed=48
    )
    # mean increment is A * 0.625 - 1, nonnegative from A = 1.6 upward
    assert best == 2.0
    none_found = search_condition_D_constant(
        model, f, [0.0, 0.5], [ORIGIN], 1, 2000, seed=49
    )
    assert none_found is None


# -- compensating operator ---------------------------------------------------------


def test_apply_L_drift() -> None:
    model = drift_model(Exponential(1.0))
    vals = [apply_L(model, coordinate_phi(), ORIGIN, n=2000, seed=s) for s in range(50, 54)]
    assert all(v == 1.0 for v in vals)  # deterministic kernel: no inner noise


def test_apply_L_absorbing_is_exact_zero() -> None:
    model = build_counterexample(2).model
    assert apply_L(model, coordinate_phi(), np.array([1.0]), n=500, seed=54) == 0.0


def test_apply_L_symmetric_kernel() -> None:
    model = uniform_model(1, symmetric_step_kernel(1.0), Exponential(1.0), point_initial([0.0]))
    vals = np.array([apply_L(model, coordinate_phi(), ORIGIN, n=4000, seed=s) for s in range(55, 65)])
    se = vals.std(ddof=1) / math.sqrt(vals.shape[0])
    assert abs(vals.mean()) <= 4.0 * se


def test_apply_L_time_dependent() -> None:
    model = drift_model(Exponential(1.0))

    def phi(states, times):
        return states[:, 0] + times

    # q (E[x+1 + (t+s)] - (x+t)) = q (1 + E[s]) = 2 for unit-rate clock
    val = apply_L_time(model, phi, ORIGIN, 0.5, n=20_000, seed=66)
    assert val == pytest.approx(2.0, abs=0.05)
    absorbed = build_counterexample(2).model
    assert apply_L_time(absorbed, phi, np.array([1.0]), 0.5, n=100, seed=67) == 0.0


# -- martingale residuals -----------------------------------------------------------


def test_martingale_residual_three_systems() -> None:
    drift = drift_model(Exponential(1.0))
    sym = uniform_model(1, symmetric_step_kernel(1.0), Deterministic(1.0), point_initial([0.0]))
    for k in range(1, 6):
        r1 = martingale_residual(drift, coordinate_phi(), k, 10_000, seed=70 + k)
        assert abs(r1.value) <= 3.0 * r1.stderr
        r2 = martingale_residual(sym, square_phi(), k, 10_000, seed=80 + k)
        assert abs(r2.value) <= 3.0 * r2.stderr
        r3 = martingale_residual(drift, constant_phi(7.0), k, 1000, seed=90 + k)
        assert r3.value == 0.0 and r3.stderr == 0.0


def test_martingale_residual_absorbing_freezes() -> None:
    model = build_counterexample(2).model
    r = martingale_residual(model, coordinate_phi(), 3, 2000, seed=99)
    assert math.isfinite(r.value)


# -- modulus tail --------------------------------------------------------------------


def test_modulus_tail_counterexample_plateau() -> None:
    rep = estimate_modulus_tail(counterexample_family([50]), 0.05, 0.5, 2.0, 4000, seed=100)
    row = rep.table("modulus_tail").rows[0]
    assert abs(row[4] - 0.5) <= 3.0 * row[5]


def test_modulus_tail_isolated_atoms_zero() -> None:
    rep = estimate_modulus_tail(counterexample_family([2]), 0.3, 0.5, 2.0, 500, seed=101)
    assert rep.table("modulus_tail").rows[0][4] == 0.0


def test_modulus_tail_constant_paths_zero() -> None:
    frozen = uniform_model(1, constant_kernel(), Exponential(1.0), point_initial([3.0]))
    fam = FamilySpec(indices=(1,), build=lambda u: frozen, probe_states=(ORIGIN,))
    rep = estimate_modulus_tail(fam, 0.1, 0.25, 1.0, 300, seed=102)
    assert rep.table("modulus_tail").rows[0][4] == 0.0


def test_modulus_tail_delta_grid() -> None:
    rep = estimate_modulus_tail(counterexample_family([10]), [0.05, 0.2], 0.5, 2.0, 2000, seed=103)
    rows = rep.table("modulus_tail").rows
    by_delta = {row[3]: row[4] for row in rows}
    assert by_delta[0.05] == 0.0  # both atoms isolated (0.1 and 1 exceed delta)
    assert abs(by_delta[0.2] - 0.5) <= 3.0 * 0.012  # early atom trapped


# -- family spec ----------------------------------------------------------------------


def test_family_spec_validation() -> None:
    with pytest.raises(ValueError):
        FamilySpec(indices=(), build=lambda u: None, probe_states=(ORIGIN,))
    with pytest.raises(ValueError):
        FamilySpec(indices=(1,), build=lambda u: None, probe_states=())
