"""Two-state family where the submartingale check passes but tightness fails.

Member n starts at 0 and jumps to 1 at time 1/n or at time 1, each with
probability 1/2, then stays at 1 forever.  Once 1/n drops below delta, no
admissible partition can isolate the early jump, so the partition modulus
equals the jump height on half of all paths and the tail probability
plateaus at 1/2, while the compensated bump inequality still holds with
constant 4 sup|f|.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .diagnostics import (
    EVIDENCE_NOTE,
    FAIL,
    INFO,
    BumpFunction,
    Estimate,
    FamilySpec,
    check_condition_D,
)
from .kernels import (
    NEVER,
    SemiMarkovModel,
    TwoPoint,
    jump_to_kernel,
    point_initial,
)
from .renewal import simulate_chain, to_path
from .reporting import OpReport, Table
from .skorokhod import w_prime
from .streams import parallel_map, spawn_rng

DEFAULT_TRANSLATE_CENTERS = (-1.0, -0.5, 0.0, 0.5, 1.0, 2.0)


@dataclass(frozen=True)
class CounterexampleModel:
    """Member n of the two-state family, with its realized model."""

    n: int
    model: SemiMarkovModel

    @property
    def jump_law(self) -> TwoPoint:
        law = self.model.holding(np.zeros(1))
        assert isinstance(law, TwoPoint)
        return law


def build_counterexample(n: int) -> CounterexampleModel:
    """Member n: one jump 0 -> 1 at time 1/n or 1 (probability 1/2 each)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    start_law = TwoPoint(1.0 / n, 1.0, 0.5)

    def holding(x: np.ndarray) -> object:
        return start_law if x[0] == 0.0 else NEVER

    model = SemiMarkovModel(
        dimension=1,
        kernel=jump_to_kernel([1.0]),
        holding=holding,
        initial=point_initial([0.0]),
        label=f"counterexample[n={n}]",
    )
    return CounterexampleModel(n=n, model=model)


def counterexample_family(n_list: Sequence[int], probe_states: Sequence = ((0.0,), (1.0,))) -> FamilySpec:
    return FamilySpec(
        indices=tuple(int(n) for n in n_list),
        build=lambda n: build_counterexample(n).model,
        probe_states=tuple(probe_states),
        label="counterexample",
    )


def demonstrate_nontightness(
    n_list: Sequence[int],
    delta: float,
    rho: float,
    T: float = 2.0,
    samples: int = 10_000,
    *,
    seed: int,
    workers: int = 1,
) -> OpReport:
    """Empirical P(w'(delta; T) > rho) across the family.

    The curve is 0 while both jump times can be isolated (1/n > delta) and
    plateaus at 1/2 once the early jump is trapped (1/n <= delta, since
    partition gaps must strictly exceed delta); the summary marks the
    transition index and the observed plateau.  T defaults to 2 so the
    late jump at time 1 stays interior to the window.
    """
    if not 0.0 < rho:
        raise ValueError("rho must be > 0")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if T < 1.0:
        raise ValueError("T must be >= 1 so the late jump is inside the window")

    n_list = [int(n) for n in n_list]

    def run_member(i: int) -> tuple[int, Estimate]:
        n = n_list[i]
        member = build_counterexample(n)
        rng = spawn_rng(seed, "nontight", i)
        hits = np.empty(samples)
        for k in range(samples):
            rec = simulate_chain(member.model, T, rng=rng)
            path = to_path(rec, T)
            hits[k] = 1.0 if w_prime(path, delta, T) > rho else 0.0
        return (n, Estimate.from_samples(hits, seed=seed))

    results = parallel_map(run_member, range(len(n_list)), workers=workers)

    rows = []
    plateau_probs = []
    transition_n: Optional[int] = None
    for n, est in results:
        regime = "plateau" if 1.0 / n <= delta else "isolated"
        if regime == "plateau":
            plateau_probs.append(est.value)
            if transition_n is None:
                transition_n = n
        rows.append((n, 1.0 / n, est.value, est.stderr, est.n_samples, regime))

    summary = {
        "note": EVIDENCE_NOTE,
        "delta": delta,
        "rho": rho,
        "T": T,
        "transition_n": transition_n,
        "plateau_value": float(np.mean(plateau_probs)) if plateau_probs else None,
    }
    table = Table(
        "nontightness_curve",
        ("n", "one_over_n", "probability", "stderr", "samples", "regime"),
        rows,
    )
    return OpReport(op="demonstrate_nontightness", verdict=INFO, summary=summary, tables=[table])


def one_step_inequality(n: int, f: BumpFunction, A_f: float) -> tuple[float, float]:
    """Exact two sides of the first-jump inequality: (lhs, rhs).

    lhs = f(1) + A_f * mean jump time, rhs = f(0); the compensated bump is
    a submartingale at the first jump iff lhs >= rhs.
    """
    law = build_counterexample(n).jump_law
    lhs = float(f(np.asarray([1.0]))) + A_f * law.mean()
    rhs = float(f(np.asarray([0.0])))
    return lhs, rhs


def demonstrate_condition_D(
    n: int,
    samples: int = 10_000,
    *,
    seed: int,
    radius: float = 0.25,
    translations: Sequence[float] = DEFAULT_TRANSLATE_CENTERS,
    A_f: Optional[float] = None,
    steps: int = 1,
    workers: int = 1,
) -> OpReport:
    """Check the compensated-bump inequality on member n, exactly and by MC.

    Uses A_f = 4 sup|f| = 4 by default (the bump's sup is exactly 1).  The
    analytic table evaluates the one-step inequality per translate; the
    Monte Carlo check stratifies increments as usual.
    """
    member = build_counterexample(n)
    f = BumpFunction((0.0,), radius)
    if A_f is None:
        A_f = 4.0 * f.sup_value

    analytic_rows = []
    all_hold = True
    for q in translations:
        fq = f.translated(np.asarray([q]))
        lhs, rhs = one_step_inequality(n, fq, A_f)
        holds = lhs >= rhs
        all_hold &= holds
        analytic_rows.append((q, lhs, rhs, bool(holds)))

    mc = check_condition_D(
        member.model,
        f,
        A_f,
        [np.asarray([q]) for q in translations],
        steps,
        samples,
        seed=seed,
        workers=workers,
    )

    verdict = mc.verdict if all_hold else FAIL
    summary = {
        "note": EVIDENCE_NOTE,
        "n": n,
        "A_f": A_f,
        "constant_rule": "4 * sup|f| with sup|f| = 1 by construction",
        "analytic_all_hold": bool(all_hold),
        "mc_verdict": mc.verdict,
    }
    tables = [
        Table("one_step_inequality", ("translate", "lhs", "rhs", "holds"), analytic_rows),
        mc.table("condition_D"),
    ]
    return OpReport(op="demonstrate_condition_D", verdict=verdict, summary=summary, tables=tables)
