"""Config-driven experiment runner.

`smtight run --config cfg.json` validates the config against a strict
schema (unknown keys rejected, violations reported with their key path),
executes the named operation, and writes report.json plus one CSV and one
figure per table.  Exit codes: 0 for PASS-evidence or informational runs,
2 for FAIL-evidence, 1 for usage or config errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import counterexample as cx
from . import diagnostics as dg
from . import scaling as sc
from .kernels import (
    Exponential,
    Deterministic,
    HoldingTime,
    Never,
    Pareto,
    SemiMarkovModel,
    TransitionKernel,
    TwoPoint,
    Weibull,
    constant_kernel,
    jump_to_kernel,
    point_initial,
    shift_kernel,
    symmetric_step_kernel,
    uniform_model,
)
from .reporting import OpReport, RunReport, Table, config_sha256, write_report
from .streams import parallel_map, spawn_rng

DEFAULT_SAMPLES = 10_000
DEFAULT_THRESHOLD = 0.05
DEFAULT_STEP_LIMIT = 10**6


class ConfigError(Exception):
    """Invalid configuration; `path` names the offending key."""

    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"config error at {path}: {message}")
        self.path = path
        self.message = message


def _require_dict(value: object, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(path, "must be an object")
    return value


def _reject_unknown(cfg: dict, allowed: Sequence[str], path: str) -> None:
    unknown = set(cfg) - set(allowed)
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"{path}.{key}" if path else key, "unknown key")


def _get_number(cfg: dict, key: str, path: str, *, default=None, required=False,
                minimum=None, strict_min=None) -> Optional[float]:
    if key not in cfg:
        if required:
            raise ConfigError(f"{path}.{key}", "required")
        return default
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}", "must be a number")
    v = float(v)
    if minimum is not None and v < minimum:
        raise ConfigError(f"{path}.{key}", f"must be >= {minimum}")
    if strict_min is not None and v <= strict_min:
        raise ConfigError(f"{path}.{key}", f"must be > {strict_min}")
    return v


def _get_int(cfg: dict, key: str, path: str, *, default=None, required=False,
             minimum=None) -> Optional[int]:
    if key not in cfg:
        if required:
            raise ConfigError(f"{path}.{key}", "required")
        return default
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path}.{key}", "must be an integer")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{path}.{key}", f"must be >= {minimum}")
    return v


def _get_number_list(cfg: dict, key: str, path: str, *, default=None, required=False,
                     strict_min=None) -> Optional[list[float]]:
    if key not in cfg:
        if required:
            raise ConfigError(f"{path}.{key}", "required")
        return default
    v = cfg[key]
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{path}.{key}", "must be a non-empty list of numbers")
    out = []
    for i, item in enumerate(v):
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise ConfigError(f"{path}.{key}[{i}]", "must be a number")
        item = float(item)
        if strict_min is not None and item <= strict_min:
            raise ConfigError(f"{path}.{key}[{i}]", f"must be > {strict_min}")
        out.append(item)
    return out


def _get_vector(cfg: dict, key: str, path: str, *, default=None, required=False) -> Optional[list[float]]:
    if key not in cfg:
        if required:
            raise ConfigError(f"{path}.{key}", "required")
        return default
    v = cfg[key]
    if not isinstance(v, list) or not v or any(
        isinstance(c, bool) or not isinstance(c, (int, float)) for c in v
    ):
        raise ConfigError(f"{path}.{key}", "must be a non-empty list of numbers")
    return [float(c) for c in v]


# -- model / family construction ---------------------------------------------


def build_law(cfg: object, path: str) -> HoldingTime:
    cfg = _require_dict(cfg, path)
    name = cfg.get("law")
    if not isinstance(name, str):
        raise ConfigError(f"{path}.law", "required law name")
    if name == "exponential":
        _reject_unknown(cfg, ("law", "rate"), path)
        return Exponential(_get_number(cfg, "rate", path, required=True, strict_min=0.0))
    if name == "pareto":
        _reject_unknown(cfg, ("law", "shape", "scale"), path)
        shape = _get_number(cfg, "shape", path, required=True, strict_min=1.0)
        scale = _get_number(cfg, "scale", path, default=1.0, strict_min=0.0)
        return Pareto(shape, scale)
    if name == "deterministic":
        _reject_unknown(cfg, ("law", "value"), path)
        return Deterministic(_get_number(cfg, "value", path, required=True, strict_min=0.0))
    if name == "two_point":
        _reject_unknown(cfg, ("law", "t1", "t2", "p"), path)
        t1 = _get_number(cfg, "t1", path, required=True, strict_min=0.0)
        t2 = _get_number(cfg, "t2", path, required=True, strict_min=0.0)
        p = _get_number(cfg, "p", path, required=True, minimum=0.0)
        if p > 1.0:
            raise ConfigError(f"{path}.p", "must be <= 1")
        return TwoPoint(t1, t2, p)
    if name == "weibull":
        _reject_unknown(cfg, ("law", "shape", "scale"), path)
        shape = _get_number(cfg, "shape", path, required=True, strict_min=0.0)
        scale = _get_number(cfg, "scale", path, default=1.0, strict_min=0.0)
        return Weibull(shape, scale)
    if name == "never":
        _reject_unknown(cfg, ("law",), path)
        return Never()
    raise ConfigError(f"{path}.law", f"unknown law {name!r}")


def build_kernel(cfg: object, path: str) -> TransitionKernel:
    cfg = _require_dict(cfg, path)
    name = cfg.get("name")
    if not isinstance(name, str):
        raise ConfigError(f"{path}.name", "required kernel name")
    if name == "shift":
        _reject_unknown(cfg, ("name", "step"), path)
        return shift_kernel(_get_number(cfg, "step", path, default=1.0))
    if name == "symmetric":
        _reject_unknown(cfg, ("name", "step"), path)
        return symmetric_step_kernel(_get_number(cfg, "step", path, default=1.0))
    if name == "constant":
        _reject_unknown(cfg, ("name",), path)
        return constant_kernel()
    if name == "to_state":
        _reject_unknown(cfg, ("name", "target"), path)
        return jump_to_kernel(_get_vector(cfg, "target", path, required=True))
    raise ConfigError(f"{path}.name", f"unknown kernel {name!r}")


def build_model(cfg: object, path: str = "model") -> SemiMarkovModel:
    cfg = _require_dict(cfg, path)
    _reject_unknown(cfg, ("dimension", "kernel", "holding", "initial", "label"), path)
    dim = _get_int(cfg, "dimension", path, default=1, minimum=1)
    kernel = build_kernel(cfg.get("kernel"), f"{path}.kernel")
    law = build_law(cfg.get("holding"), f"{path}.holding")
    initial_cfg = _require_dict(cfg.get("initial", {"point": [0.0] * dim}), f"{path}.initial")
    _reject_unknown(initial_cfg, ("point",), f"{path}.initial")
    point = _get_vector(initial_cfg, "point", f"{path}.initial", default=[0.0] * dim)
    if len(point) != dim:
        raise ConfigError(f"{path}.initial.point", f"must have {dim} components")
    label = cfg.get("label", "")
    if not isinstance(label, str):
        raise ConfigError(f"{path}.label", "must be a string")
    return uniform_model(dim, kernel, law, point_initial(point), label=label)


def build_scheme(cfg: object, indices: list[int], path: str) -> sc.ScalingScheme:
    cfg = _require_dict(cfg, path)
    _reject_unknown(cfg, ("a", "b"), path)

    def factor(key: str) -> Callable[[int], float]:
        spec = cfg.get(key)
        if spec == "n":
            return lambda n: float(n)
        if spec == "n^2":
            return lambda n: float(n) ** 2
        if isinstance(spec, list):
            vals = _get_number_list(cfg, key, path, required=True, strict_min=0.0)
            if len(vals) != len(indices):
                raise ConfigError(f"{path}.{key}", "explicit list must match indices length")
            table = {n: v for n, v in zip(indices, vals)}
            return lambda n: table[int(n)]
        raise ConfigError(f"{path}.{key}", 'must be "n", "n^2", or an explicit list')

    scheme = sc.ScalingScheme(factor("a"), factor("b"), name="config")
    scheme.validate(indices)
    return scheme


def _probe_states(cfg: dict, path: str, default: list) -> tuple:
    if "probe_states" not in cfg:
        return tuple(np.asarray(p, dtype=float) for p in default)
    v = cfg["probe_states"]
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{path}.probe_states", "must be a non-empty list of vectors")
    out = []
    for i, p in enumerate(v):
        if not isinstance(p, list) or any(
            isinstance(c, bool) or not isinstance(c, (int, float)) for c in p
        ):
            raise ConfigError(f"{path}.probe_states[{i}]", "must be a vector")
        out.append(np.asarray([float(c) for c in p]))
    return tuple(out)


def build_family(cfg: object, path: str = "family") -> tuple[dg.FamilySpec, Optional[sc.ScaledFamily]]:
    """Build a family spec; also returns the scaled family when applicable."""
    cfg = _require_dict(cfg, path)
    kind = cfg.get("kind")
    if kind == "scaled":
        _reject_unknown(cfg, ("kind", "base", "scheme", "indices", "probe_states"), path)
        indices_raw = cfg.get("indices")
        if not isinstance(indices_raw, list) or not indices_raw or any(
            isinstance(n, bool) or not isinstance(n, int) or n < 1 for n in indices_raw
        ):
            raise ConfigError(f"{path}.indices", "must be a list of integers >= 1")
        base = build_model(cfg.get("base"), f"{path}.base")
        scheme = build_scheme(cfg.get("scheme"), indices_raw, f"{path}.scheme")
        family = sc.ScaledFamily(base=base, scheme=scheme, indices=tuple(indices_raw))
        probes = _probe_states(cfg, path, default=[[0.0] * base.dimension])
        return family.to_family_spec(probes), family
    if kind == "counterexample":
        _reject_unknown(cfg, ("kind", "n_list", "probe_states"), path)
        n_list = cfg.get("n_list")
        if not isinstance(n_list, list) or not n_list or any(
            isinstance(n, bool) or not isinstance(n, int) or n < 1 for n in n_list
        ):
            raise ConfigError(f"{path}.n_list", "must be a list of integers >= 1")
        probes = _probe_states(cfg, path, default=[[0.0], [1.0]])
        return cx.counterexample_family(n_list, probes), None
    if kind == "constant":
        _reject_unknown(cfg, ("kind", "model", "indices", "probe_states"), path)
        indices_raw = cfg.get("indices")
        if not isinstance(indices_raw, list) or not indices_raw or any(
            isinstance(n, bool) or not isinstance(n, int) for n in indices_raw
        ):
            raise ConfigError(f"{path}.indices", "must be a list of integers")
        model = build_model(cfg.get("model"), f"{path}.model")
        spec = dg.FamilySpec(
            indices=tuple(indices_raw),
            build=lambda u: model,
            probe_states=_probe_states(cfg, path, default=[[0.0] * model.dimension]),
            label="constant",
        )
        return spec, None
    raise ConfigError(f"{path}.kind", 'must be "scaled", "counterexample", or "constant"')


def build_phi(cfg: object, path: str) -> dg.Phi:
    cfg = _require_dict(cfg, path)
    name = cfg.get("name")
    if name == "identity":
        _reject_unknown(cfg, ("name",), path)
        return dg.coordinate_phi(0)
    if name == "square":
        _reject_unknown(cfg, ("name",), path)
        return dg.square_phi(0)
    if name == "norm_sq":
        _reject_unknown(cfg, ("name",), path)
        return dg.norm_sq_phi()
    if name == "constant":
        _reject_unknown(cfg, ("name", "value"), path)
        return dg.constant_phi(_get_number(cfg, "value", path, required=True))
    if name == "bump":
        _reject_unknown(cfg, ("name", "center", "radius"), path)
        center = _get_vector(cfg, "center", path, required=True)
        radius = _get_number(cfg, "radius", path, required=True, strict_min=0.0)
        return dg.BumpFunction(tuple(center), radius)
    raise ConfigError(f"{path}.name", f"unknown test function {name!r}")


# -- operations ---------------------------------------------------------------


class OpEntry:
    def __init__(self, describe: str, needs: str, run: Callable) -> None:
        self.describe = describe
        self.needs = needs
        self.run = run


def _params(config: dict) -> dict:
    return _require_dict(config.get("params", {}), "params")


def _run_estimate_d(config: dict, seed: int, workers: int) -> OpReport:
    model = build_model(config.get("model"))
    p = _params(config)
    _reject_unknown(p, ("t_grid", "x", "samples", "horizon"), "params")
    t_grid = _get_number_list(p, "t_grid", "params", required=True)
    if any(t < 0 for t in t_grid):
        raise ConfigError("params.t_grid", "times must be >= 0")
    x = _get_vector(p, "x", "params", default=[0.0] * model.dimension)
    samples = _get_int(p, "samples", "params", default=DEFAULT_SAMPLES, minimum=100)
    horizon = _get_number(p, "horizon", "params", default=None)

    def cell(it: int):
        t = t_grid[it]
        return dg.estimate_d(
            model, np.asarray(x), t, samples,
            rng=spawn_rng(seed, "estimate_d_op", it), horizon=horizon,
        )

    ests = parallel_map(cell, range(len(t_grid)), workers=workers)
    rows = [
        ("estimate_d", 0, dg._state_label(np.asarray(x)), t, e.value, e.stderr,
         e.n_samples, e.censored, "lower-bound" if e.is_lower_bound else "")
        for t, e in zip(t_grid, ests)
    ]
    return OpReport(
        op="estimate_d",
        verdict=dg.INFO,
        summary={"samples": samples},
        tables=[Table("estimate_d", dg.DIAG_COLUMNS, rows)],
    )


def _run_scan_condition_iii(config: dict, seed: int, workers: int) -> OpReport:
    family, _ = build_family(config.get("family"))
    p = _params(config)
    _reject_unknown(
        p, ("t_grid", "samples", "threshold", "tail_count", "pilot_paths", "pilot_horizon"), "params"
    )
    return dg.scan_condition_iii(
        family,
        _get_number_list(p, "t_grid", "params", required=True, strict_min=0.0),
        _get_int(p, "samples", "params", default=DEFAULT_SAMPLES, minimum=100),
        seed=seed,
        threshold=_get_number(p, "threshold", "params", default=DEFAULT_THRESHOLD, strict_min=0.0),
        tail_count=_get_int(p, "tail_count", "params", default=None, minimum=1),
        pilot_paths=_get_int(p, "pilot_paths", "params", default=100, minimum=0),
        pilot_horizon=_get_number(p, "pilot_horizon", "params", default=None, strict_min=0.0),
        workers=workers,
    )


def _run_check_condition_iv(config: dict, seed: int, workers: int) -> OpReport:
    family, _ = build_family(config.get("family"))
    p = _params(config)
    _reject_unknown(p, ("a", "samples", "threshold"), "params")
    return dg.check_condition_iv(
        family,
        _get_number(p, "a", "params", required=True, strict_min=0.0),
        _get_int(p, "samples", "params", default=DEFAULT_SAMPLES, minimum=100),
        seed=seed,
        threshold=_get_number(p, "threshold", "params", default=DEFAULT_THRESHOLD, strict_min=0.0),
        workers=workers,
    )


def _run_check_compact_containment(config: dict, seed: int, workers: int) -> OpReport:
    family, _ = build_family(config.get("family"))
    p = _params(config)
    _reject_unknown(p, ("T", "a_grid", "samples", "threshold", "step_limit"), "params")
    return dg.check_compact_containment(
        family,
        _get_number(p, "T", "params", required=True, strict_min=0.0),
        _get_number_list(p, "a_grid", "params", required=True),
        _get_int(p, "samples", "params", default=DEFAULT_SAMPLES, minimum=100),
        seed=seed,
        threshold=_get_number(p, "threshold", "params", default=DEFAULT_THRESHOLD, strict_min=0.0),
        step_limit=_get_int(p, "step_limit", "params", default=DEFAULT_STEP_LIMIT, minimum=1),
        workers=workers,
    )


def _run_check_condition_D(config: dict, seed: int, workers: int) -> OpReport:
    model = build_model(config.get("model"))
    p = _params(config)
    _reject_unknown(
        p, ("radius", "center", "translations", "A_f", "steps", "samples", "bins"), "params"
    )
    center = _get_vector(p, "center", "params", default=[0.0] * model.dimension)
    f = dg.BumpFunction(
        tuple(center), _get_number(p, "radius", "params", default=0.25, strict_min=0.0)
    )
    translations = p.get("translations", [[0.0] * model.dimension])
    if not isinstance(translations, list) or not translations:
        raise ConfigError("params.translations", "must be a non-empty list of vectors")
    trans = []
    for i, q in enumerate(translations):
        if not isinstance(q, list):
            raise ConfigError(f"params.translations[{i}]", "must be a vector")
        trans.append(np.asarray([float(c) for c in q]))
    return dg.check_condition_D(
        model,
        f,
        _get_number(p, "A_f", "params", required=True, minimum=0.0),
        trans,
        _get_int(p, "steps", "params", default=1, minimum=1),
        _get_int(p, "samples", "params", default=DEFAULT_SAMPLES, minimum=100),
        seed=seed,
        bins=_get_int(p, "bins", "params", default=8, minimum=1),
        workers=workers,
    )


def _run_apply_L(config: dict, seed: int, workers: int) -> OpReport:
    model = build_model(config.get("model"))
    p = _params(config)
    _reject_unknown(p, ("phi", "x", "samples"), "params")
    phi = build_phi(p.get("phi"), "params.phi")
    x = np.asarray(_get_vector(p, "x", "params", default=[0.0] * model.dimension))
    samples = _get_int(p, "samples", "params", default=1000, minimum=1)
    value = dg.apply_L(model, phi, x, n=samples, seed=seed)
    rows = [("apply_L", 0, dg._state_label(x), 0.0, value, 0.0, samples, 0, "")]
    return OpReport(
        op="apply_L",
        verdict=dg.INFO,
        summary={"value": value},
        tables=[Table("apply_L", dg.DIAG_COLUMNS, rows)],
    )


def _run_martingale_residual(config: dict, seed: int, workers: int) -> OpReport:
    model = build_model(config.get("model"))
    p = _params(config)
    _reject_unknown(p, ("phi", "k_grid", "samples", "inner_samples"), "params")
    phi = build_phi(p.get("phi"), "params.phi")
    k_grid = p.get("k_grid", [1, 2, 3, 4, 5])
    if not isinstance(k_grid, list) or any(
        isinstance(k, bool) or not isinstance(k, int) or k < 1 for k in k_grid
    ):
        raise ConfigError("params.k_grid", "must be a list of integers >= 1")
    samples = _get_int(p, "samples", "params", default=DEFAULT_SAMPLES, minimum=2)
    inner = _get_int(p, "inner_samples", "params", default=16, minimum=1)

    def cell(ik: int):
        k = k_grid[ik]
        return dg.martingale_residual(
            model, phi, k, samples, rng=spawn_rng(seed, "mart_op", ik), inner_samples=inner
        )

    ests = parallel_map(cell, range(len(k_grid)), workers=workers)
    rows = [
        ("martingale_residual", k, "", 0.0, e.value, e.stderr, e.n_samples, 0,
         "ok" if abs(e.value) <= 3.0 * e.stderr else "violation")
        for k, e in zip(k_grid, ests)
    ]
    verdict = dg.PASS if all(r[8] == "ok" for r in rows) else dg.FAIL
    return OpReport(
        op="martingale_residual",
        verdict=verdict,
        summary={"note": dg.EVIDENCE_NOTE, "samples": samples, "inner_samples": inner},
        tables=[Table("martingale_residual", dg.DIAG_COLUMNS, rows)],
    )


def _run_estimate_modulus_tail(config: dict, seed: int, workers: int) -> OpReport:
    family, _ = build_family(config.get("family"))
    p = _params(config)
    _reject_unknown(p, ("delta", "rho", "T", "samples", "step_limit"), "params")
    delta = p.get("delta")
    if isinstance(delta, list):
        delta = _get_number_list(p, "delta", "params", required=True, strict_min=0.0)
    else:
        delta = _get_number(p, "delta", "params", required=True, strict_min=0.0)
    return dg.estimate_modulus_tail(
        family,
        delta,
        _get_number(p, "rho", "params", required=True, strict_min=0.0),
        _get_number(p, "T", "params", required=True, strict_min=0.0),
        _get_int(p, "samples", "params", default=DEFAULT_SAMPLES, minimum=2),
        seed=seed,
        step_limit=_get_int(p, "step_limit", "params", default=DEFAULT_STEP_LIMIT, minimum=1),
        workers=workers,
    )


def _scaled_family_parts(config: dict) -> tuple[SemiMarkovModel, sc.ScalingScheme, list[int], tuple]:
    family_cfg = _require_dict(config.get("family"), "family")
    if family_cfg.get("kind") != "scaled":
        raise ConfigError("family.kind", 'this operation requires a "scaled" family')
    spec, family = build_family(family_cfg)
    assert family is not None
    return family.base, family.scheme, list(family.indices), spec.probe_states


def _run_theorem3_J(config: dict, seed: int, workers: int) -> OpReport:
    base, scheme, indices, probes = _scaled_family_parts(config)
    p = _params(config)
    _reject_unknown(p, ("n", "t"), "params")
    n = _get_int(p, "n", "params", required=True, minimum=1)
    t = _get_number(p, "t", "params", required=True, strict_min=0.0)
    value = sc.theorem3_J(base, scheme, n, t, probes)
    return OpReport(
        op="theorem3_J",
        verdict=dg.INFO,
        summary={"value": value, "n": n, "t": t},
        tables=[Table("theorem3_bound", ("n", "t", "J", "form"), [(n, t, value, "closed")])],
    )


def _run_scan_theorem3(config: dict, seed: int, workers: int) -> OpReport:
    base, scheme, indices, probes = _scaled_family_parts(config)
    p = _params(config)
    _reject_unknown(p, ("t_grid", "threshold"), "params")
    return sc.scan_theorem3(
        base,
        scheme,
        indices,
        _get_number_list(p, "t_grid", "params", required=True, strict_min=0.0),
        probe_states=probes,
        threshold=_get_number(p, "threshold", "params", default=DEFAULT_THRESHOLD, strict_min=0.0),
    )


def _run_verify_d_bound(config: dict, seed: int, workers: int) -> OpReport:
    base, scheme, indices, probes = _scaled_family_parts(config)
    p = _params(config)
    _reject_unknown(p, ("t_grid", "samples"), "params")
    return sc.verify_d_bound(
        base,
        scheme,
        indices,
        _get_number_list(p, "t_grid", "params", required=True, strict_min=0.0),
        probe_states=probes,
        samples=_get_int(p, "samples", "params", default=DEFAULT_SAMPLES, minimum=1000),
        seed=seed,
        workers=workers,
    )


def _run_demonstrate_nontightness(config: dict, seed: int, workers: int) -> OpReport:
    p = _params(config)
    _reject_unknown(p, ("n_list", "delta", "rho", "T", "samples"), "params")
    n_list = p.get("n_list")
    if not isinstance(n_list, list) or not n_list or any(
        isinstance(n, bool) or not isinstance(n, int) or n < 1 for n in n_list
    ):
        raise ConfigError("params.n_list", "must be a list of integers >= 1")
    return cx.demonstrate_nontightness(
        n_list,
        _get_number(p, "delta", "params", required=True, strict_min=0.0),
        _get_number(p, "rho", "params", required=True, strict_min=0.0),
        _get_number(p, "T", "params", default=2.0, strict_min=0.0),
        _get_int(p, "samples", "params", default=DEFAULT_SAMPLES, minimum=2),
        seed=seed,
        workers=workers,
    )


def _run_demonstrate_condition_D(config: dict, seed: int, workers: int) -> OpReport:
    p = _params(config)
    _reject_unknown(p, ("n", "samples", "radius", "translations", "A_f", "steps"), "params")
    n = _get_int(p, "n", "params", required=True, minimum=1)
    translations = p.get("translations", list(cx.DEFAULT_TRANSLATE_CENTERS))
    if not isinstance(translations, list) or not translations or any(
        isinstance(q, bool) or not isinstance(q, (int, float)) for q in translations
    ):
        raise ConfigError("params.translations", "must be a non-empty list of numbers")
    return cx.demonstrate_condition_D(
        n,
        _get_int(p, "samples", "params", default=DEFAULT_SAMPLES, minimum=100),
        seed=seed,
        radius=_get_number(p, "radius", "params", default=0.25, strict_min=0.0),
        translations=[float(q) for q in translations],
        A_f=_get_number(p, "A_f", "params", default=None, minimum=0.0),
        steps=_get_int(p, "steps", "params", default=1, minimum=1),
        workers=workers,
    )


OPS: dict[str, OpEntry] = {
    "apply_L": OpEntry(
        "compensating-operator value at one state via kernel Monte Carlo",
        "model", _run_apply_L),
    "check_compact_containment": OpEntry(
        "path sup-norm tail probabilities across the family",
        "family", _run_check_compact_containment),
    "check_condition_D": OpEntry(
        "compensated-bump submartingale increments, unconditional and stratified",
        "model", _run_check_condition_D),
    "check_condition_iv": OpEntry(
        "probability of a holding time shorter than a, per member and probe state",
        "family", _run_check_condition_iv),
    "demonstrate_condition_D": OpEntry(
        "counterexample member: exact first-jump inequality plus Monte Carlo check",
        "none", _run_demonstrate_condition_D),
    "demonstrate_nontightness": OpEntry(
        "counterexample family: partition-modulus tail curve with plateau marker",
        "none", _run_demonstrate_nontightness),
    "estimate_d": OpEntry(
        "expected gap from t to the next jump, over a time grid",
        "model", _run_estimate_d),
    "estimate_modulus_tail": OpEntry(
        "P(partition modulus >= rho) per family member and delta",
        "family", _run_estimate_modulus_tail),
    "martingale_residual": OpEntry(
        "mean drift of the compensated chain functional over a step grid",
        "model", _run_martingale_residual),
    "scan_condition_iii": OpEntry(
        "decay scan of the expected next-jump gap over family and time grid",
        "family", _run_scan_condition_iii),
    "scan_theorem3": OpEntry(
        "closed-form scaled integrated-tail bound table with decay verdict",
        "family", _run_scan_theorem3),
    "theorem3_J": OpEntry(
        "single closed-form value of the scaled integrated-tail bound",
        "family", _run_theorem3_J),
    "verify_d_bound": OpEntry(
        "Monte Carlo next-jump gap checked against the closed-form bound",
        "family", _run_verify_d_bound),
}


def validate_top_level(config: dict) -> None:
    _require_dict(config, "")
    _reject_unknown(
        config, ("schema_version", "op", "seed", "model", "family", "params", "output_dir"), ""
    )
    if config.get("schema_version") != 1:
        raise ConfigError("schema_version", "must be 1")
    op = config.get("op")
    if not isinstance(op, str) or op not in OPS:
        raise ConfigError("op", f"must be one of: {', '.join(sorted(OPS))}")
    seed = config.get("seed")
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("seed", "required integer")
    if "output_dir" in config and not isinstance(config["output_dir"], str):
        raise ConfigError("output_dir", "must be a string")


def run_config(
    config: dict, *, seed_override: Optional[int] = None, workers: int = 1
) -> RunReport:
    """Validate and execute a config; returns the report with provenance."""
    validate_top_level(config)
    seed = seed_override if seed_override is not None else config["seed"]
    report = OPS[config["op"]].run(config, seed, workers)
    return RunReport(report=report, seed=seed, config_sha256=config_sha256(config))


def list_ops_text() -> str:
    lines = [f"{name}: {OPS[name].describe}" for name in sorted(OPS)]
    return "\n".join(lines) + "\n"


class _Parser(argparse.ArgumentParser):
    # usage problems exit 1; code 2 is reserved for FAIL-evidence verdicts
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="smtight", description=__doc__)
    sub = parser.add_subparsers(dest="command")
    run_p = sub.add_parser("run", help="execute one operation from a config file")
    run_p.add_argument("--config", required=True, help="path to the JSON config")
    run_p.add_argument("--seed", type=int, default=None, help="override the config seed")
    run_p.add_argument("--out", default=None, help="output directory")
    run_p.add_argument("--workers", type=int, default=1, help="worker threads")
    run_p.add_argument(
        "--format", choices=("csv", "json", "both"), default="both", help="table output format"
    )
    sub.add_parser("list-ops", help="print the operation catalog")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 1
    if args.command == "list-ops":
        sys.stdout.write(list_ops_text())
        return 0

    try:
        config = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except FileNotFoundError:
        print(f"smtight: error: config file not found: {args.config}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"smtight: error: invalid JSON in {args.config}: {exc}", file=sys.stderr)
        return 1

    try:
        run = run_config(config, seed_override=args.seed, workers=args.workers)
    except ConfigError as exc:
        print(f"smtight: {exc}", file=sys.stderr)
        return 1

    outdir = Path(args.out or config.get("output_dir") or "smtight-reports")
    formats = ("csv", "json") if args.format == "both" else (args.format,)
    written = write_report(run, outdir, formats=formats)
    for p in written:
        print(p)
    verdict = run.report.verdict
    print(f"verdict: {verdict}")
    return 2 if verdict == dg.FAIL else 0


if __name__ == "__main__":
    raise SystemExit(main())
