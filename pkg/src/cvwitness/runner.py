"""Named state families, witness dispatch, figure presets and the verification grid."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np

from . import oracles as O
from .circuits import apply_losses
from .fock import CutoffTooSmallError, ModeLabel, Party, State, expectation, mode, tensor, word
from .measurement import estimate, pipeline_value, sample_pipeline, PIPELINES
from .states import coherent_product, fock_product, mixed_cat, noon, squeezed, tmsv
from .witnesses import (
    DETERMINANTS,
    WitnessReport,
    agarwal_d1913,
    det_witness,
    duan,
    duan_optimized,
    leakage_of,
    multicopy_expectation,
)

WITNESSES = ("d124", "d24", "d149", "d1913", "d1913_agarwal", "duan", "duan_opt")
DEFAULT_BUDGET = 1e-12
CUTOFF_CAP = 300


class ConfigError(ValueError):
    """Invalid run configuration (maps to CLI exit code 2)."""


# ---------------------------------------------------------------------------
# state families


@dataclass(frozen=True)
class Family:
    name: str
    params: tuple[str, ...]
    defaults: Mapping[str, object]
    build: Callable  # (params, cutoff, budget) -> list of single-copy states
    min_cutoff: Callable = lambda p: 2
    exact: bool = False  # representable without truncation at the minimum cutoff


def _c(x) -> complex:
    return complex(x)


def _tmsv_build(p, d, budget):
    return [tmsv(float(p["lam"]), d, max_leakage=budget)]


def _tmsv2_build(p, d, budget):
    return [tmsv(float(p["lam1"]), d, max_leakage=budget), tmsv(float(p["lam2"]), d, max_leakage=budget)]


def _beta(p, k=""):
    b = p.get(f"beta{k}")
    return _c(p[f"alpha{k}"]) if b is None else _c(b)


def _cat_build(p, d, budget):
    return [mixed_cat(_c(p["alpha"]), _beta(p), float(p["z"]), d, max_leakage=budget)]


def _cat3_build(p, d, budget):
    q = dict(p)
    if q.get("alpha3") is None:
        q["alpha3"] = q["alpha2"]
    for k in (1, 2, 3):
        if q.get(f"beta{k}") is None:
            q[f"beta{k}"] = q[f"alpha{k}"]
    return [mixed_cat(_c(q[f"alpha{k}"]), _c(q[f"beta{k}"]), float(q["z"]), d, max_leakage=budget) for k in (1, 2, 3)]


def _noon_beta(p):
    if p.get("beta") is not None:
        return _c(p["beta"])
    return math.sqrt(max(0.0, 1 - abs(_c(p["alpha"])) ** 2))


def _noon_build(p, d, budget):
    return [noon(int(p["n"]), _c(p["alpha"]), _noon_beta(p), cutoff=d)]


def _coherent_build(p, d, budget):
    return [coherent_product((_c(p["alpha"]), _c(p["beta"])), d, max_leakage=budget)]


def _sq_pair(ra, rb, d, budget):
    return tensor(squeezed(float(ra), d, "a1", max_leakage=budget), squeezed(float(rb), d, "b1", max_leakage=budget))


def _squeezed_build(p, d, budget):
    return [_sq_pair(p["r_a"], p["r_b"], d, budget)]


def _squeezed2_build(p, d, budget):
    return [_sq_pair(p["r_a1"], p["r_b1"], d, budget), _sq_pair(p["r_a2"], p["r_b2"], d, budget)]


def _fock_build(p, d, budget):
    return [fock_product((int(p["na"]), int(p["nb"])), d)]


FAMILIES: dict[str, Family] = {
    f.name: f
    for f in (
        Family("tmsv", ("lam",), {}, _tmsv_build),
        Family("tmsv2", ("lam1", "lam2"), {}, _tmsv2_build),
        Family("cat", ("alpha", "beta", "z"), {"beta": None, "z": 0.0}, _cat_build),
        Family("cat3", ("alpha1", "alpha2", "alpha3", "beta1", "beta2", "beta3", "z"),
               {"alpha3": None, "beta1": None, "beta2": None, "beta3": None, "z": 0.5}, _cat3_build),
        Family("noon", ("n", "alpha", "beta"), {"beta": None}, _noon_build, lambda p: int(p["n"]) + 1, True),
        Family("coherent", ("alpha", "beta"), {}, _coherent_build),
        Family("squeezed", ("r_a", "r_b"), {}, _squeezed_build),
        Family("squeezed2", ("r_a1", "r_a2", "r_b1", "r_b2"), {}, _squeezed2_build),
        Family("fock", ("na", "nb"), {}, _fock_build, lambda p: max(int(p["na"]), int(p["nb"])) + 1, True),
    )
}
LOSS_PARAM = "tau"


def _resolve(family: str, params: Mapping) -> tuple[Family, dict]:
    try:
        fam = FAMILIES[family]
    except KeyError:
        raise ConfigError(f"unknown state family {family!r}; known: {sorted(FAMILIES)}") from None
    p = dict(fam.defaults)
    for k, v in params.items():
        if k != LOSS_PARAM and k not in fam.params:
            raise ConfigError(f"family {family} has no parameter {k!r} (expected {fam.params})")
        p[k] = v
    missing = [k for k in fam.params if k not in p]
    if missing:
        raise ConfigError(f"family {family} is missing parameters {missing}")
    return fam, p


@lru_cache(maxsize=512)
def _build_cached(family: str, key: tuple, cutoff: int | None, budget: float):
    fam, p = _resolve(family, dict(key))
    p.pop(LOSS_PARAM, None)
    lo = fam.min_cutoff(p)
    if cutoff is not None:
        if cutoff < lo:
            raise ConfigError(f"cutoff {cutoff} is below the minimum {lo} for family {family}")
        return tuple(fam.build(p, cutoff, budget if budget is not None else math.inf)), cutoff
    for d in range(max(lo, 2), CUTOFF_CAP + 1):
        try:
            return tuple(fam.build(p, d, budget)), d
        except CutoffTooSmallError:
            continue
    raise ConfigError(f"no cutoff up to {CUTOFF_CAP} meets the leakage budget {budget}")


def build_states(family: str, params: Mapping, cutoff: int | None = None, budget: float = DEFAULT_BUDGET):
    """Single-copy states for a family point; cutoff is chosen from the budget if not given."""
    key = tuple(sorted((k, v) for k, v in params.items() if k != LOSS_PARAM))
    states, d = _build_cached(family, key, cutoff, None if cutoff is not None else budget)
    return list(states), d


# ---------------------------------------------------------------------------
# evaluation


def copy_losses(n_copies: int, losses: Mapping | None, tau: float | None) -> dict[str, float]:
    """Per-mode transmittances for copies 1..n: uniform ``tau`` overridden by ``losses``."""
    out = {}
    if tau is not None:
        for k in range(1, n_copies + 1):
            out[f"a{k}"] = out[f"b{k}"] = float(tau)
    for k, v in (losses or {}).items():
        lab = mode(k)
        if lab.party is Party.ANCILLA or lab.copy > n_copies:
            raise ConfigError(f"loss entry {k} does not name a mode of copies 1..{n_copies}")
        out[str(lab)] = float(v)
    for k, v in out.items():
        if not 0 <= v <= 1:
            raise ConfigError(f"transmittance {k}={v} outside [0, 1]")
    return {k: v for k, v in out.items() if v != 1.0}


def _n_copies(witness: str) -> int:
    if witness in DETERMINANTS:
        return DETERMINANTS[witness].size
    return 1


def _expand(states: list, n: int) -> list:
    if len(states) == n:
        return states
    if len(states) == 1:
        return states * n
    raise ConfigError(f"witness needs {n} copies, family provides {len(states)}")


def evaluate(
    witness: str,
    family: str,
    params: Mapping,
    cutoff: int | None = None,
    losses: Mapping | None = None,
    pipeline: bool = False,
    budget: float = DEFAULT_BUDGET,
    shots: int | None = None,
    seed: int = 0,
) -> WitnessReport:
    if witness not in WITNESSES:
        raise ConfigError(f"unknown witness {witness!r}; known: {list(WITNESSES)}")
    fam, p = _resolve(family, params)
    tau = p.get(LOSS_PARAM)
    states, d = build_states(family, params, cutoff, budget)
    if pipeline or shots:
        if witness not in PIPELINES:
            raise ConfigError(f"no measurement pipeline for {witness}; pipelines: {sorted(PIPELINES)}")
        n = PIPELINES[witness].n_copies
        copies = _expand(states, n)
        lmap = copy_losses(n, losses, tau)
        if shots:
            counts = sample_pipeline(witness, copies, lmap, shots=int(shots), seed=int(seed))
            value, _ = estimate(witness, counts)
        else:
            value = pipeline_value(witness, copies, lmap)
    elif witness in DETERMINANTS:
        n = DETERMINANTS[witness].size
        lmap = copy_losses(n, losses, tau)
        if len(states) == 1 and not lmap:
            value = det_witness(witness, states[0])
        else:
            value = multicopy_expectation(witness, _expand(states, n), lmap)
    else:
        if len(states) != 1:
            raise ConfigError(f"{witness} acts on a single two-mode state")
        lmap = copy_losses(1, losses, tau)
        s = apply_losses(states[0], {mode(k): v for k, v in lmap.items()}) if lmap else states[0]
        if witness == "d1913_agarwal":
            value = agarwal_d1913(s)
        elif witness == "duan":
            value = duan(s, float(p.get("r", 1.0)))
        else:
            value = duan_optimized(s)
    point = dict(params)
    oracle = oracle_for(witness, family, p, lmap)
    return WitnessReport(witness, point, float(value), oracle, 0.0 if fam.exact else leakage_of(states))


def _taus(lmap: Mapping, n: int):
    ta = [lmap.get(f"a{k}", 1.0) for k in range(1, n + 1)]
    tb = [lmap.get(f"b{k}", 1.0) for k in range(1, n + 1)]
    return ta, tb


def oracle_for(witness: str, family: str, p: Mapping, lmap: Mapping) -> float | None:
    """Closed-form value for this point when one is known."""
    try:
        if witness == "d124" and family == "tmsv" and not lmap:
            return O.oracle_d124_tmsv(float(p["lam"]))
        if witness == "d24" and family in ("tmsv", "tmsv2"):
            l1, l2 = (float(p["lam"]),) * 2 if family == "tmsv" else (float(p["lam1"]), float(p["lam2"]))
            (ta1, ta2), (tb1, tb2) = _taus(lmap, 2)
            return O.oracle_d24_lossy(l1, l2, ta1, ta2, tb1, tb2)
        if witness == "d24" and family == "squeezed2":
            (ta1, ta2), (tb1, tb2) = _taus(lmap, 2)
            return O.oracle_d24_squeezed_products(
                float(p["r_a1"]), float(p["r_a2"]), float(p["r_b1"]), float(p["r_b2"]), ta1, ta2, tb1, tb2
            )
        if witness == "d149" and family == "cat":
            a, b, z = _c(p["alpha"]), _beta(p), float(p["z"])
            if not lmap:
                return O.oracle_d149_cat(a, b, z)
            ta, tb = _taus(lmap, 3)
            return O.oracle_d149_lossy_imperfect([a] * 3, [b] * 3, [z] * 3, ta, tb)
        if witness == "d149" and family == "cat3":
            al = [_c(p["alpha1"]), _c(p["alpha2"]), _c(p["alpha3"] if p.get("alpha3") is not None else p["alpha2"])]
            be = [al[k] if p.get(f"beta{k + 1}") is None else _c(p[f"beta{k + 1}"]) for k in range(3)]
            ta, tb = _taus(lmap, 3)
            return O.oracle_d149_lossy_imperfect(al, be, [float(p["z"])] * 3, ta, tb)
        if witness == "d1913" and family == "noon" and not lmap:
            return O.oracle_d1913_noon(int(p["n"]), _c(p["alpha"]), _noon_beta(p))
        if witness == "d1913_agarwal" and family == "noon":
            (ta,), (tb,) = _taus(lmap, 1)
            return O.oracle_agarwal_noon_lossy(int(p["n"]), _c(p["alpha"]), _noon_beta(p), ta, tb)
        if witness == "d1913_agarwal" and family == "cat" and not lmap:
            return O.oracle_agarwal_cat(_c(p["alpha"]), _beta(p), float(p["z"]))
    except O.OracleDomainError:
        return None
    return None


# ---------------------------------------------------------------------------
# grids and presets


def frange(start: float, stop: float, step: float) -> list[float]:
    """Inclusive float range with values rounded to the step's precision."""
    if step <= 0:
        raise ConfigError("grid step must be positive")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    digits = max(0, -int(math.floor(math.log10(step))) + 2)
    return [round(start + i * step, digits) for i in range(n)]


@dataclass(frozen=True)
class RunConfig:
    witness: str
    state: str
    grid: Mapping[str, list] = field(default_factory=dict)
    losses: Mapping[str, float] = field(default_factory=dict)
    cutoff: int | None = None
    out: str | None = None
    shots: int | None = None
    seed: int = 0
    pipeline: bool = False
    budget: float = DEFAULT_BUDGET
    jobs: int = 1

    def __post_init__(self):
        if not self.grid or any(len(v) == 0 for v in self.grid.values()):
            raise ConfigError("parameter grid must be non-empty")

    def points(self) -> list[dict]:
        keys = list(self.grid)
        return [dict(zip(keys, vals)) for vals in itertools.product(*(self.grid[k] for k in keys))]


PRESETS: dict[str, dict] = {
    "fig2a": dict(witness="d24", state="tmsv2", grid={"lam1": frange(0, 0.9, 0.05), "lam2": frange(0, 0.9, 0.05)}),
    "fig2b": dict(witness="d24", state="tmsv", grid={"lam": frange(0, 0.9, 0.05), "tau": frange(0, 1, 0.05)}),
    "fig4a": dict(witness="d149", state="cat3",
                  grid={"alpha1": frange(0.1, 3.0, 0.1), "alpha2": frange(0.1, 3.0, 0.1), "z": [0.5]}),
    "fig4b": dict(witness="d149", state="cat",
                  grid={"alpha": frange(0.1, 3.0, 0.1), "tau": frange(0.05, 1, 0.05), "z": [0.5]}),
    "fig7a": dict(witness="d1913_agarwal", state="noon",
                  grid={"n": [1], "alpha": frange(0.05, 0.95, 0.05), "tau": frange(0.05, 1, 0.05)}),
    "fig7b": dict(witness="d1913_agarwal", state="noon",
                  grid={"n": [2], "alpha": frange(0.05, 0.95, 0.05), "tau": frange(0.05, 1, 0.05)}),
    "fig8": dict(witness="d1913_agarwal", state="cat",
                 grid={"alpha": frange(0.1, 3.0, 0.1), "z": frange(0, 1, 0.1)}),
}


def preset(name: str, **overrides) -> RunConfig:
    try:
        base = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; known: {sorted(PRESETS)}") from None
    return RunConfig(**{**base, **overrides})


def _eval_point(args):
    cfg, point = args
    return evaluate(cfg.witness, cfg.state, point, cfg.cutoff, cfg.losses, cfg.pipeline,
                    cfg.budget, cfg.shots, cfg.seed)


def run_sweep(cfg: RunConfig) -> list[WitnessReport]:
    """Evaluate every grid point; results are returned in grid order."""
    pts = [(cfg, p) for p in cfg.points()]
    if cfg.jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            return list(ex.map(_eval_point, pts, chunksize=max(1, len(pts) // (4 * cfg.jobs))))
    return [_eval_point(x) for x in pts]


# ---------------------------------------------------------------------------
# CSV


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        try:
            x = complex(x)
        except ValueError:
            return x
    z = complex(x)
    if z.imag == 0:
        return f"{z.real:.12g}"
    return f"{z.real:.12g}{z.imag:+.12g}j"


def report_rows(reports: Sequence[WitnessReport]) -> tuple[list[str], list[list[str]]]:
    keys = sorted({k for r in reports for k in r.params})
    header = [f"param_{k}" for k in keys] + ["value", "oracle", "abs_err", "leakage"]
    rows = [
        [fmt(r.params.get(k)) for k in keys] + [fmt(r.value), fmt(r.oracle), fmt(r.abs_err), fmt(r.leakage)]
        for r in reports
    ]
    return header, rows


# ---------------------------------------------------------------------------
# verification grid


@dataclass(frozen=True)
class Check:
    name: str
    oracle: str
    simulated: float
    expected: float
    tol: float

    @property
    def error(self) -> float:
        return abs(self.simulated - self.expected)

    @property
    def passed(self) -> bool:
        return self.error <= self.tol


def verify_grid(quick: bool = False) -> list[Check]:
    """Simulation against every closed form on a small regression grid."""
    out: list[Check] = []

    def add(name, oracle, sim, exp, tol):
        out.append(Check(name, oracle, float(sim), float(exp), tol))

    for lam in (0.1, 0.3, 0.5) if quick else (0.1, 0.2, 0.3, 0.4, 0.5, 0.6):
        r = evaluate("d124", "tmsv", {"lam": lam})
        add(f"d124 tmsv lam={lam}", "oracle_d124_tmsv", r.value, r.oracle, 1e-8)
    for lam1, lam2, taus in ((0.4, 0.3, (0.9, 0.6, 0.7, 0.8)), (0.5, 0.5, (1, 1, 1, 1)), (0.2, 0.6, (0.3, 0.5, 0.9, 0.4))):
        loss = dict(zip(("a1", "a2", "b1", "b2"), taus))
        r = evaluate("d24", "tmsv2", {"lam1": lam1, "lam2": lam2}, losses=loss)
        add(f"d24 tmsv2 {lam1},{lam2} tau={taus}", "oracle_d24_lossy", r.value, r.oracle, 1e-8)
    # bounds coincide when tau_a1 tau_b2 = tau_a2 tau_b1
    for lam, taus in ((0.4, (0.8, 0.5, 0.8, 0.5)), (0.3, (1, 1, 1, 1))):
        loss = dict(zip(("a1", "a2", "b1", "b2"), taus))
        r = evaluate("d24", "tmsv2", {"lam1": lam, "lam2": lam}, losses=loss)
        lo, hi = O.oracle_d24_bounds(lam, lam, *taus)
        add(f"d24 bounds lam={lam} tau={taus} (lower)", "oracle_d24_bounds", r.value, lo, 1e-8)
        add(f"d24 bounds lam={lam} tau={taus} (upper)", "oracle_d24_bounds", r.value, hi, 1e-8)
    for a, z in ((0.5, 0.0), (1.0, 0.5)) if quick else ((0.5, 0.0), (1.0, 0.0), (1.0, 0.5), (1.5, 0.9)):
        r = evaluate("d149", "cat", {"alpha": a, "z": z})
        add(f"d149 cat alpha=beta={a} z={z}", "oracle_d149_cat", r.value, r.oracle, 1e-6)
    r = evaluate("d149", "cat3", {"alpha1": 0.8, "alpha2": 1.1, "alpha3": 0.9, "z": 0.3},
                 losses={"a1": 0.9, "b1": 0.7, "a2": 0.8, "b2": 0.95, "a3": 0.6, "b3": 0.85})
    add("d149 lossy imperfect cats", "oracle_d149_lossy_imperfect", r.value, r.oracle, 1e-6)
    add("imperfect-copy formula reduction alpha=beta=1 z=0", "oracle_d149_lossy_imperfect",
        O.oracle_d149_lossy_imperfect([1] * 3, [1] * 3, [0] * 3), O.oracle_d149_cat(1, 1, 0), 1e-12)
    for nn in (1, 2, 3):
        a = 0.6
        r = evaluate("d1913", "noon", {"n": nn, "alpha": a})
        add(f"d1913 noon n={nn}", "oracle_d1913_noon", r.value, r.oracle, 1e-12)
        r = evaluate("d1913_agarwal", "noon", {"n": nn, "alpha": a})
        add(f"d' noon n={nn}", "oracle_agarwal_noon", r.value, O.oracle_agarwal_noon(nn, a, 0.8), 1e-12)
        r = evaluate("d1913_agarwal", "noon", {"n": nn, "alpha": a, "tau": 0.7}, losses={"b1": 0.4})
        add(f"d' noon n={nn} lossy", "oracle_agarwal_noon_lossy", r.value, r.oracle, 1e-12)
    for a, b, z in ((0.7, 0.5 + 0.3j, 0.3), (1.0, 1.0, 0.0)):
        states, _ = build_states("cat", {"alpha": a, "beta": b, "z": z})
        mom = O.oracle_cat_agarwal_moments(a, b, z)
        for key, w in (("ada", "a1+ a1"), ("a2bd2", "a1^2 b1+^2"), ("ad2b2", "a1+^2 b1^2"), ("adb", "a1+ b1")):
            sim = expectation(word(w), states[0])
            add(f"cat moment {key} alpha={a} beta={b} z={z}", "oracle_cat_agarwal_moments",
                abs(sim - mom[key]), 0.0, 1e-9)
        r = evaluate("d1913_agarwal", "cat", {"alpha": a, "beta": b, "z": z})
        add(f"d' cat alpha={a} beta={b} z={z}", "oracle_cat_agarwal_moments", r.value, r.oracle, 1e-8)
    return out
