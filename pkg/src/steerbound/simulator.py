"""Monte Carlo simulation of the Alice-Bob steering protocol.

Each trial Bob picks a setting uniformly at random and measures along it.
An honest Alice shares a Werner state and has a lossy detector; a cheating
Alice sends Bob a pure state drawn from a mixture of deterministic strategies
and announces the planned result for the setting he reveals.

Trials are split into fixed-size chunks, each driven by its own random stream
derived from ``(seed, chunk index)``.  Results are integer tallies, so the
report does not depend on how chunks are spread over worker threads.

Estimators are computed from the per-setting tally of (Alice's report, Bob's
outcome).  Every setting is weighted 1/n regardless of how often it was
drawn.  Standard errors use the delta method on per-trial influence values.
"""
from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import MeasurementSet, WernerParams, build_measurement_set
from .loss_bounds import BoundCurve, Envelope, ResponsePlan, StateFamily, bound_profile
from .strategies import family_for_plan, optimal_linear_ensembles

REGIMES = ("anger", "depression", "postselect")
ALICE_KINDS = ("honest", "cheating")
CHUNK = 1 << 16
A_VALUES = np.array([1, -1, 0])
B_VALUES = np.array([1, -1])


class SimulationError(ValueError):
    pass


class InsufficientTrialsError(SimulationError):
    pass


@dataclass(frozen=True)
class DeterministicStrategy:
    """A response plan and the state family Bob is sent.

    ``state.orientation`` follows the catalog convention (parallel to
    ``sum_j A_j b_j`` for point states), so Bob actually receives the
    antipodal state, the way a singlet anticorrelates the two spins.
    """

    plan: ResponsePlan
    state: StateFamily
    value: float | None = None

    def to_dict(self) -> dict:
        return {
            "plan": list(self.plan.values),
            "state": {"kind": self.state.kind, "orientation": list(self.state.orientation)},
            "value": self.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DeterministicStrategy":
        st = d.get("state", {"kind": "sphere", "orientation": [0.0, 0.0, 1.0]})
        return cls(
            ResponsePlan(tuple(d["plan"])),
            StateFamily(st["kind"], tuple(float(c) for c in st["orientation"])),
            d.get("value"),
        )


@dataclass(frozen=True)
class Scenario:
    alice_kind: str
    regime: str
    n: int
    trials: int
    seed: int
    params: WernerParams | None = None
    strategy: tuple[tuple[float, DeterministicStrategy], ...] = ()

    def __post_init__(self):
        if self.alice_kind not in ALICE_KINDS:
            raise SimulationError(f"alice must be one of {ALICE_KINDS}, got {self.alice_kind!r}")
        if self.regime not in REGIMES:
            raise SimulationError(f"regime must be one of {REGIMES}, got {self.regime!r}")
        if self.trials < 1:
            raise SimulationError("trials must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise SimulationError("seed must be a 64-bit unsigned integer")
        if self.alice_kind == "honest" and self.params is None:
            raise SimulationError("an honest scenario needs Werner parameters")
        if self.alice_kind == "cheating":
            if not self.strategy:
                raise SimulationError("a cheating scenario needs at least one strategy")
            weights = [w for w, _ in self.strategy]
            if any(w < 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-12:
                raise SimulationError(f"mixture weights must be non-negative and sum to 1, got {weights}")
            for _, s in self.strategy:
                if s.plan.n != self.n:
                    raise SimulationError(f"plan length {s.plan.n} does not match n={self.n}")

    def to_dict(self) -> dict:
        d = {
            "alice": self.alice_kind,
            "regime": self.regime,
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
        }
        if self.params is not None:
            d["mu"] = self.params.mu
            d["epsilon"] = self.params.epsilon
        if self.strategy:
            d["strategy"] = [{"weight": w, **s.to_dict()} for w, s in self.strategy]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        params = None
        if "mu" in d:
            params = WernerParams(float(d["mu"]), float(d.get("epsilon", 1.0)))
        strategy = tuple(
            (float(s["weight"]), DeterministicStrategy.from_dict(s)) for s in d.get("strategy", [])
        )
        return cls(
            alice_kind=d["alice"],
            regime=d["regime"],
            n=int(d["n"]),
            trials=int(d["trials"]),
            seed=int(d["seed"]),
            params=params,
            strategy=strategy,
        )

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        return cls.from_dict(json.loads(text))


@dataclass
class SimulationReport:
    n: int
    regime: str
    trials: int
    seed: int
    s_n_estimate: float
    w_n_estimate: float
    standard_errors: tuple[float, float]
    apparent_efficiency: float
    balanced_efficiency: float
    postselected: dict[str, float]
    per_setting_counts: np.ndarray = field(repr=False)
    scenario: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "regime": self.regime,
            "trials": self.trials,
            "seed": self.seed,
            "s_n_estimate": self.s_n_estimate,
            "w_n_estimate": self.w_n_estimate,
            "standard_errors": list(self.standard_errors),
            "apparent_efficiency": self.apparent_efficiency,
            "balanced_efficiency": self.balanced_efficiency,
            "postselected": self.postselected,
            "per_setting_counts": self.per_setting_counts.tolist(),
            "scenario": self.scenario,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "SimulationReport":
        return cls(
            n=d["n"],
            regime=d["regime"],
            trials=d["trials"],
            seed=d["seed"],
            s_n_estimate=d["s_n_estimate"],
            w_n_estimate=d["w_n_estimate"],
            standard_errors=tuple(d["standard_errors"]),
            apparent_efficiency=d["apparent_efficiency"],
            balanced_efficiency=d["balanced_efficiency"],
            postselected=d["postselected"],
            per_setting_counts=np.array(d["per_setting_counts"], dtype=np.int64),
            scenario=d.get("scenario", {}),
        )


# ---------------------------------------------------------------- sampling


def _coin(rng: np.random.Generator, size: int) -> np.ndarray:
    return 1 - 2 * rng.integers(0, 2, size=size)


def _honest_chunk(rng, ms: MeasurementSet, scen: Scenario, size: int):
    mu, eps = scen.params.mu, scen.params.epsilon
    setting = rng.integers(0, ms.n, size=size)
    detected = rng.random(size) < eps
    a = _coin(rng, size)
    anti = rng.random(size) < (1.0 + mu) / 2.0
    b_lost = _coin(rng, size)
    b = np.where(detected, np.where(anti, -a, a), b_lost)
    if scen.regime == "anger":
        # a is a fair coin independent of b on lost trials: Alice's forced guess
        reported = a
    else:
        reported = np.where(detected, a, 0)
    return setting, reported, b, detected


def _circle_basis(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    helper = np.eye(3)[int(np.argmin(np.abs(normal)))]
    u = np.cross(normal, helper)
    u /= np.linalg.norm(u)
    return u, np.cross(normal, u)


def _cheating_chunk(rng, ms: MeasurementSet, scen: Scenario, size: int):
    weights = np.array([w for w, _ in scen.strategy])
    strategies = [s for _, s in scen.strategy]
    plans = np.array([s.plan.values for s in strategies])
    which = rng.choice(len(strategies), size=size, p=weights / weights.sum())
    setting = rng.integers(0, ms.n, size=size)
    states = np.empty((size, 3))
    for k, strat in enumerate(strategies):
        sel = which == k
        count = int(sel.sum())
        if not count:
            continue
        orient = strat.state.as_array()
        if strat.state.kind == "point":
            states[sel] = -orient
        elif strat.state.kind == "circle":
            u, v = _circle_basis(orient / np.linalg.norm(orient))
            theta = rng.random(count) * 2.0 * math.pi
            states[sel] = np.outer(np.cos(theta), u) + np.outer(np.sin(theta), v)
        else:
            g = rng.standard_normal((count, 3))
            states[sel] = g / np.linalg.norm(g, axis=1, keepdims=True)
    mean_b = np.einsum("ij,ij->i", ms.axes[setting], states)
    b = np.where(rng.random(size) < (1.0 + mean_b) / 2.0, 1, -1)
    reported = plans[which, setting]
    detected = reported != 0
    if scen.regime == "anger":
        reported = np.where(detected, reported, _coin(rng, size))
    return setting, reported, b, detected


def _tally(n: int, setting, reported, b) -> np.ndarray:
    ia = np.where(reported == 1, 0, np.where(reported == -1, 1, 2))
    ib = (b == -1).astype(np.int64)
    idx = setting * 6 + ia * 2 + ib
    return np.bincount(idx, minlength=n * 6).reshape(n, 3, 2)


def _workers() -> int:
    env = os.environ.get("STEERBOUND_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _run_chunks(scen: Scenario, ms: MeasurementSet, keep_transcript: bool):
    sizes = [CHUNK] * (scen.trials // CHUNK)
    if scen.trials % CHUNK:
        sizes.append(scen.trials % CHUNK)
    sampler = _honest_chunk if scen.alice_kind == "honest" else _cheating_chunk

    def work(idx: int):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(scen.seed, spawn_key=(idx,))))
        setting, reported, b, detected = sampler(rng, ms, scen, sizes[idx])
        tally = _tally(ms.n, setting, reported, b)
        trans = (setting, reported, b, detected) if keep_transcript else None
        return tally, trans

    workers = min(_workers(), len(sizes))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, range(len(sizes))))
    else:
        results = [work(i) for i in range(len(sizes))]
    tally = np.zeros((ms.n, 3, 2), dtype=np.int64)
    for t, _ in results:
        tally += t
    transcript = [tr for _, tr in results] if keep_transcript else None
    return tally, transcript


# --------------------------------------------------------------- estimators


@dataclass
class _Stats:
    """Stratified estimates and their per-cell influence values (shape (n, 3, 2))."""

    counts: np.ndarray
    s: float
    w: float
    e: float
    phi_s: np.ndarray
    phi_w: np.ndarray
    phi_e: np.ndarray

    def se(self, phi: np.ndarray) -> float:
        total = self.counts.sum()
        return float(math.sqrt(max(0.0, (self.counts * phi**2).sum())) / total)


def tally_stats(counts: np.ndarray) -> _Stats:
    """Non-post-selected S_n, W_n and efficiency from a tally, nulls scored as zero."""
    c = np.asarray(counts, dtype=float)
    n = c.shape[0]
    per = c.sum(axis=(1, 2))
    if np.any(per == 0):
        raise InsufficientTrialsError(
            f"settings {np.flatnonzero(per == 0).tolist()} were never drawn; run more trials"
        )
    p = per / per.sum()
    x = -A_VALUES[:, None] * B_VALUES[None, :]
    d = np.abs(A_VALUES)[:, None] * np.ones((1, 2))
    s_j = (c * x).sum(axis=(1, 2)) / per
    e_j = (c * d).sum(axis=(1, 2)) / per
    scale = (n * p)[:, None, None]
    phi_s = (x[None] - s_j[:, None, None]) / scale
    phi_e = (d[None] - e_j[:, None, None]) / scale

    ca = c[:, :2, :].sum(axis=2)
    with np.errstate(invalid="ignore", divide="ignore"):
        ma = np.where(ca > 0, (c[:, :2, 0] - c[:, :2, 1]) / ca, 0.0)
        corr = np.where(ca >= 2, (1.0 - ma**2) / (ca - 1.0), 0.0)
    qa = ca / per[:, None]
    w_raw = (qa * ma**2).sum(axis=1)
    w_j = (qa * (ma**2 - corr)).sum(axis=1)
    cell = np.zeros((n, 3, 2))
    cell[:, :2, :] = 2.0 * ma[:, :, None] * B_VALUES[None, None, :] - ma[:, :, None] ** 2
    phi_w = (cell - w_raw[:, None, None]) / scale
    return _Stats(c, float(s_j.mean()), float(w_j.mean()), float(e_j.mean()), phi_s, phi_w, phi_e)


def _ratio(st: _Stats, value: float, phi: np.ndarray) -> tuple[float, float]:
    if st.e <= 0.0:
        return math.nan, math.nan
    r = value / st.e
    return r, st.se((phi - r * st.phi_e) / st.e)


def _report(scen: Scenario, counts: np.ndarray, allow_incomplete: bool) -> SimulationReport:
    n = scen.n
    non_null = counts[:, :2, :].sum()
    apparent = float(non_null / counts.sum())
    try:
        st = tally_stats(counts)
    except InsufficientTrialsError:
        if not allow_incomplete:
            raise
        nan = math.nan
        return SimulationReport(
            n, scen.regime, scen.trials, scen.seed, nan, nan, (nan, nan), apparent, nan,
            {"s_n": nan, "w_n": nan, "s_n_se": nan, "w_n_se": nan}, counts, scen.to_dict(),
        )
    ps_s, ps_s_se = _ratio(st, st.s, st.phi_s)
    ps_w, ps_w_se = _ratio(st, st.w, st.phi_w)
    if scen.regime == "postselect":
        if st.e <= 0.0 and not allow_incomplete:
            raise InsufficientTrialsError("Alice never reported a non-null result; run more trials")
        s, w, ses = ps_s, ps_w, (ps_s_se, ps_w_se)
    else:
        s, w, ses = st.s, st.w, (st.se(st.phi_s), st.se(st.phi_w))
    return SimulationReport(
        n=n,
        regime=scen.regime,
        trials=scen.trials,
        seed=scen.seed,
        s_n_estimate=s,
        w_n_estimate=w,
        standard_errors=ses,
        apparent_efficiency=apparent,
        balanced_efficiency=st.e,
        postselected={"s_n": ps_s, "w_n": ps_w, "s_n_se": ps_s_se, "w_n_se": ps_w_se},
        per_setting_counts=counts,
        scenario=scen.to_dict(),
    )


def run(scenario: Scenario, transcript_path: str | None = None, allow_incomplete: bool = False) -> SimulationReport:
    """Simulate ``scenario`` and return the estimates.

    Raises :class:`InsufficientTrialsError` when some setting was never drawn
    (or, for post-selection, Alice never answered), unless
    ``allow_incomplete`` is set, in which case the estimates are NaN.
    """
    ms = build_measurement_set(scenario.n)
    counts, transcript = _run_chunks(scenario, ms, transcript_path is not None)
    if transcript_path is not None:
        write_transcript(transcript_path, transcript)
    return _report(scenario, counts, allow_incomplete)


def write_transcript(path: str, chunks) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["trial", "setting", "A", "B", "detected"])
        trial = 0
        for setting, reported, b, detected in chunks:
            for j, a, bb, d in zip(setting.tolist(), reported.tolist(), b.tolist(), detected.tolist()):
                writer.writerow([trial, j, a, bb, int(d)])
                trial += 1


# ------------------------------------------------------------ bound checks


@dataclass(frozen=True)
class Verdict:
    demonstrated: bool
    margin: float
    standard_error: float
    reason: str

    @property
    def label(self) -> str:
        return "steering_demonstrated" if self.demonstrated else "not_demonstrated"


def bound_gap(report: SimulationReport, env: Envelope, criterion: str) -> tuple[float, float]:
    """Post-selected estimate minus the bound at the realised efficiency, with its standard error.

    The bound is evaluated at the balanced apparent efficiency, and the
    standard error includes the bound's own dependence on that efficiency.
    """
    st = tally_stats(report.per_setting_counts)
    value, phi = (st.s, st.phi_s) if criterion == "linear" else (st.w, st.phi_w)
    e = st.e
    gap = (value - env(e)) / e
    se = st.se(phi - env.slope(e) * st.phi_e) / e
    return gap, se


def verdict(report: SimulationReport, curve: BoundCurve, sigmas: float = 3.0) -> Verdict:
    """Does the post-selected estimate beat the curve by more than ``sigmas`` standard errors?"""
    if report.n != curve.n:
        raise SimulationError(f"report is for n={report.n} but the curve is for n={curve.n}")
    eff = report.balanced_efficiency
    if not math.isfinite(eff) or eff < min(curve.grid):
        return Verdict(False, math.nan, math.nan, "apparent efficiency below the curve's grid")
    gap, se = bound_gap(report, curve.profile(), curve.criterion)
    if gap - sigmas * se > 0.0:
        return Verdict(True, gap, se, f"estimate exceeds the bound by {gap / se if se else math.inf:.1f} sigma")
    return Verdict(False, gap, se, "estimate is compatible with a local hidden state model")


# ------------------------------------------------------- strategy builders


def strategy_for_plan(ms: MeasurementSet, plan: ResponsePlan, criterion: str = "linear") -> DeterministicStrategy:
    fam, value = family_for_plan(ms, plan, criterion)
    return DeterministicStrategy(plan, fam, value)


def envelope_mixture(ms: MeasurementSet, criterion: str, epsilon: float) -> tuple[tuple[float, DeterministicStrategy], ...]:
    """Cheating mixture that attains the nondeterministic envelope at ``epsilon``.

    Linear: weight is spread uniformly over every optimal plan of each
    participating ``m``, so Alice nulls each setting equally often.
    Variance: one plan per ``m``; the two deterministic strategies use
    opposite labels (+1 / -1) so Bob's conditional means stay separated.
    """
    env = bound_profile(ms, criterion)
    parts = env.mixture(epsilon)
    if any(m == 0 for m, _ in parts):
        raise SimulationError(f"epsilon={epsilon} is below 1/n; the envelope there needs silent runs")
    points = {p.m: p for p in env.points}
    out: list[tuple[float, DeterministicStrategy]] = []
    for label, (m, w) in zip((1, -1), parts):
        if w <= 0.0:
            continue
        if criterion == "linear":
            cat = optimal_linear_ensembles(ms, m, points[m])
            for e in cat.ensembles:
                out.append((w / cat.multiplicity, strategy_for_plan(ms, e.plan, "linear")))
        else:
            plan = points[m].plans[0]
            plan = ResponsePlan(tuple(label * v for v in plan.values))
            fam, value = family_for_plan(ms, plan, "variance")
            out.append((w, DeterministicStrategy(plan, _fixed_point(fam), value)))
    total = sum(w for w, _ in out)
    return tuple((w / total, s) for w, s in out)


def _fixed_point(fam: StateFamily) -> StateFamily:
    # one fixed state of the family; per-trial resampling would blur Bob's
    # conditional means and lose inference-variance score
    if fam.kind == "point":
        return fam
    if fam.kind == "circle":
        u, _ = _circle_basis(fam.as_array())
        return StateFamily("point", tuple(u))
    return StateFamily("point", (0.0, 0.0, 1.0))


def random_mixture(ms: MeasurementSet, rng: np.random.Generator, max_parts: int = 3) -> tuple[tuple[float, DeterministicStrategy], ...]:
    """Random cheating mixture of random plans, with optimal or random states."""
    k = int(rng.integers(1, max_parts + 1))
    weights = rng.dirichlet(np.ones(k))
    out = []
    for w in weights:
        m = int(rng.integers(1, ms.n + 1))
        support = rng.choice(ms.n, size=m, replace=False)
        values = [0] * ms.n
        for j in support:
            values[int(j)] = int(rng.choice([1, -1]))
        plan = ResponsePlan(tuple(values))
        choice = rng.random()
        if choice < 0.4:
            strat = strategy_for_plan(ms, plan, "linear")
        elif choice < 0.7:
            fam, value = family_for_plan(ms, plan, "variance")
            strat = DeterministicStrategy(plan, fam, value)
        else:
            g = rng.standard_normal(3)
            strat = DeterministicStrategy(plan, StateFamily("point", tuple(g / np.linalg.norm(g))))
        out.append((float(w), strat))
    total = sum(w for w, _ in out)
    return tuple((w / total, s) for w, s in out)
