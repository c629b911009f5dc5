import json
import math

import numpy as np
import pytest

from steerbound.geometry import WernerParams, build_measurement_set
from steerbound.loss_bounds import ResponsePlan, StateFamily, bound_profile, post_selected_curve
from steerbound.simulator import (
    DeterministicStrategy,
    InsufficientTrialsError,
    Scenario,
    SimulationError,
    SimulationReport,
    bound_gap,
    envelope_mixture,
    random_mixture,
    run,
    strategy_for_plan,
    tally_stats,
    verdict,
)


def honest(regime, mu=0.9, eps=0.8, n=3, trials=200_000, seed=11):
    return Scenario("honest", regime, n, trials, seed, WernerParams(mu, eps))


def test_scenario_validation():
    with pytest.raises(SimulationError):
        Scenario("honest", "anger", 3, 0, 1, WernerParams(0.5))
    with pytest.raises(SimulationError):
        Scenario("honest", "hope", 3, 10, 1, WernerParams(0.5))
    with pytest.raises(SimulationError):
        Scenario("honest", "anger", 3, 10, 1)
    ms = build_measurement_set(3)
    s = strategy_for_plan(ms, ResponsePlan((1, 1, 1)))
    with pytest.raises(SimulationError, match="sum to 1"):
        Scenario("cheating", "anger", 3, 10, 1, strategy=((0.5, s),))
    with pytest.raises(SimulationError, match="plan length"):
        Scenario("cheating", "anger", 4, 10, 1, strategy=((1.0, s),))


def test_scenario_json_round_trip():
    ms = build_measurement_set(4)
    mix = envelope_mixture(ms, "variance", 0.6)
    scen = Scenario("cheating", "postselect", 4, 1000, 3, strategy=mix)
    back = Scenario.from_json(scen.to_json())
    assert back == scen
    scen = honest("depression")
    assert Scenario.from_json(scen.to_json()) == scen


def test_reproducible_bit_identical():
    a = run(honest("anger", trials=150_000))
    b = run(honest("anger", trials=150_000))
    assert a.to_json() == b.to_json()
    c = run(honest("anger", trials=150_000, seed=12))
    assert c.to_json() != a.to_json()


def test_independent_of_worker_count(monkeypatch):
    monkeypatch.setenv("STEERBOUND_THREADS", "1")
    one = run(honest("postselect", trials=200_000))
    monkeypatch.setenv("STEERBOUND_THREADS", "3")
    three = run(honest("postselect", trials=200_000))
    assert one.to_json() == three.to_json()


def test_counts_and_apparent_efficiency():
    rep = run(honest("depression", trials=100_000))
    counts = rep.per_setting_counts
    assert counts.shape == (3, 3, 2)
    assert counts.sum() == 100_000
    assert rep.apparent_efficiency == pytest.approx(counts[:, :2].sum() / 1e5)
    assert rep.apparent_efficiency == pytest.approx(0.8, abs=0.01)
    anger = run(honest("anger", trials=100_000))
    assert anger.apparent_efficiency == 1.0


def test_estimates_in_range():
    for regime in ("anger", "depression", "postselect"):
        rep = run(honest(regime, trials=50_000))
        assert -1 <= rep.s_n_estimate <= 1
        assert 0 <= rep.w_n_estimate <= 1


@pytest.mark.parametrize("regime, s, w", [
    ("anger", 0.72, 0.5184),
    ("depression", 0.72, 0.648),
    ("postselect", 0.9, 0.81),
])
def test_honest_closed_forms(regime, s, w):
    rep = run(honest(regime, trials=400_000))
    se_s, se_w = rep.standard_errors
    assert abs(rep.s_n_estimate - s) < 4 * se_s
    assert abs(rep.w_n_estimate - w) < 4 * se_w


def test_standard_error_matches_spread():
    # empirical spread of repeated runs agrees with the delta-method error
    vals = [run(honest("depression", trials=20_000, seed=s)) for s in range(40)]
    spread = np.std([r.s_n_estimate for r in vals], ddof=1)
    se = np.mean([r.standard_errors[0] for r in vals])
    assert 0.7 < spread / se < 1.3


def test_face_centred_cheat_octahedron():
    ms = build_measurement_set(3)
    s = strategy_for_plan(ms, ResponsePlan((1, 1, 1)))
    rep = run(Scenario("cheating", "postselect", 3, 400_000, 5, strategy=((1.0, s),)))
    assert abs(rep.s_n_estimate - 1 / math.sqrt(3)) < 4 * rep.standard_errors[0]


def test_cheating_anger_fills_nulls():
    ms = build_measurement_set(3)
    s = strategy_for_plan(ms, ResponsePlan((1, 0, 0)))
    rep = run(Scenario("cheating", "anger", 3, 30_000, 5, strategy=((1.0, s),)))
    assert rep.apparent_efficiency == 1.0
    dep = run(Scenario("cheating", "depression", 3, 30_000, 5, strategy=((1.0, s),)))
    assert dep.apparent_efficiency == pytest.approx(1 / 3, abs=0.01)


def test_circle_and_sphere_families_sample_states():
    ms = build_measurement_set(3)
    circle = DeterministicStrategy(ResponsePlan((1, 1, 0)), StateFamily("circle", (0.0, 0.0, 1.0)))
    rep = run(Scenario("cheating", "postselect", 3, 100_000, 2, strategy=((1.0, circle),)))
    # random states on the xy circle give zero mean correlation
    assert abs(rep.s_n_estimate) < 4 * rep.standard_errors[0]
    sphere = DeterministicStrategy(ResponsePlan((1, 1, 1)), StateFamily("sphere", (0.0, 0.0, 1.0)))
    rep = run(Scenario("cheating", "postselect", 3, 100_000, 2, strategy=((1.0, sphere),)))
    assert abs(rep.s_n_estimate) < 4 * rep.standard_errors[0]


def test_insufficient_trials():
    with pytest.raises(InsufficientTrialsError, match="more trials"):
        run(honest("anger", trials=1))
    rep = run(honest("anger", trials=1), allow_incomplete=True)
    assert math.isnan(rep.s_n_estimate)


def test_tally_stats_bias_correction():
    # Bob's outcome independent of Alice: W must be near zero, not 1/N
    counts = np.zeros((1, 3, 2), dtype=np.int64)
    counts[0, 0] = [5, 5]
    counts[0, 1] = [5, 5]
    st = tally_stats(counts)
    assert st.s == 0.0
    assert st.w < 0


def test_report_json_round_trip():
    rep = run(honest("postselect", trials=20_000))
    back = SimulationReport.from_dict(json.loads(rep.to_json()))
    assert back.to_json() == rep.to_json()


def test_transcript(tmp_path):
    path = tmp_path / "t.csv"
    rep = run(honest("depression", trials=500), transcript_path=str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "trial,setting,A,B,detected"
    assert len(lines) == 501
    rows = [list(map(int, ln.split(","))) for ln in lines[1:]]
    assert sum(r[4] for r in rows) == rep.per_setting_counts[:, :2].sum()
    assert all(r[2] == 0 for r in rows if not r[4])


def test_verdict_examples():
    curve = post_selected_curve(build_measurement_set(10), "linear")
    rep = run(Scenario("honest", "postselect", 10, 100_000, 1, WernerParams(1.0, 1.0)))
    assert verdict(rep, curve).label == "steering_demonstrated"
    curve2 = post_selected_curve(build_measurement_set(2), "linear")
    rep = run(Scenario("honest", "postselect", 2, 100_000, 1, WernerParams(0.6, 1.0)))
    assert verdict(rep, curve2).label == "not_demonstrated"
    with pytest.raises(SimulationError):
        verdict(rep, curve)


def test_verdict_low_efficiency():
    curve = post_selected_curve(build_measurement_set(3), "linear", [0.5, 0.75, 1.0])
    rep = run(Scenario("honest", "postselect", 3, 50_000, 1, WernerParams(1.0, 0.3)))
    v = verdict(rep, curve)
    assert not v.demonstrated
    assert "below" in v.reason


def test_optimal_cheat_not_demonstrated():
    ms = build_measurement_set(6)
    mix = envelope_mixture(ms, "linear", 0.5)
    rep = run(Scenario("cheating", "postselect", 6, 200_000, 4, strategy=mix))
    assert verdict(rep, post_selected_curve(ms, "linear")).label == "not_demonstrated"


def test_envelope_mixture_weights():
    ms = build_measurement_set(10)
    mix = envelope_mixture(ms, "linear", 0.4)
    assert sum(w for w, _ in mix) == pytest.approx(1.0, abs=1e-12)
    ms_used = {s.plan.m for _, s in mix}
    assert ms_used == {3, 5}
    # each setting is nulled equally often across the mixture
    null_rate = np.zeros(10)
    for w, s in mix:
        null_rate += w * (s.plan.as_array() == 0)
    assert np.allclose(null_rate, 0.6)
    with pytest.raises(SimulationError):
        envelope_mixture(ms, "linear", 0.05)


def test_variance_mixture_uses_opposite_labels():
    ms = build_measurement_set(4)
    mix = envelope_mixture(ms, "variance", 0.6)
    signs = {int(np.sign(s.plan.as_array().sum())) for _, s in mix}
    assert signs == {1, -1}
    assert all(s.state.kind == "point" for _, s in mix)


def test_bound_gap_near_zero_for_envelope_strategy():
    ms = build_measurement_set(4)
    mix = envelope_mixture(ms, "linear", 0.6)
    rep = run(Scenario("cheating", "postselect", 4, 300_000, 9, strategy=mix))
    gap, se = bound_gap(rep, bound_profile(ms, "linear"), "linear")
    assert abs(gap) < 4 * se


def test_random_mixture_is_valid():
    ms = build_measurement_set(6)
    rng = np.random.default_rng(0)
    for _ in range(20):
        mix = random_mixture(ms, rng)
        Scenario("cheating", "postselect", 6, 10, 0, strategy=mix)
