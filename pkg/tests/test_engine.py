import math

import pytest
from hypothesis import given, settings, strategies as st

from creditsim.decision import ModelParams, threshold_unit_value
from creditsim.economy import Capped, FixedUnit, Inflationary, Submodular
from creditsim.engine import ConfigError, SimConfig, find_collapse, init_world, run, tick

BASE = ModelParams(c_r=0.5, p=0.2, c_p=2.0, c_w=1.0, r=10.0)  # u* = 0.55


def config(**overrides):
    kwargs = dict(params=BASE, revenue=FixedUnit(1.0), initial_honest_users=4, horizon=20, seed=7)
    kwargs.update(overrides)
    return SimConfig(**kwargs)


class TestConfig:
    def test_horizon_zero_rejected(self):
        with pytest.raises(ConfigError):
            config(horizon=0)

    def test_every_violation_listed(self):
        with pytest.raises(ConfigError) as info:
            config(horizon=0, epsilon_noise=2.0, admin_validity_prob=-1, seed=-3, collapse_epsilon=1.0)
        assert len(info.value.problems) == 5

    def test_dict_round_trip(self):
        cfg = config(revenue=Submodular(1, 2, mode="average"), new_users_per_tick=0.25, initial_grant=3)
        assert SimConfig.from_dict(cfg.to_dict()) == cfg

    def test_unknown_field(self):
        data = config().to_dict()
        data["horizn"] = 5
        data["params"]["cq"] = 1
        with pytest.raises(ConfigError) as info:
            SimConfig.from_dict(data)
        assert any("horizn" in p for p in info.value.problems)
        assert any("params.cq" in p for p in info.value.problems)

    def test_grant_above_cap(self):
        with pytest.raises(ConfigError):
            config(revenue=Capped(10, 1), initial_grant=20)


class TestInitWorld:
    def test_initial_grants(self):
        assert init_world(config(initial_honest_users=10, initial_grant=5)).ledger.total_distributed == 50

    def test_no_grant(self):
        assert init_world(config(initial_honest_users=13)).ledger.total_distributed == 0

    def test_deterministic(self):
        cfg = config(initial_grant=2.5)
        assert init_world(cfg).fingerprint() == init_world(cfg).fingerprint()


class TestTick:
    def test_worthless_credits_nobody_reports(self):
        result = run(config(revenue=FixedUnit(0.0)))
        assert all(rec.reporters == 0 for rec in result.records)
        assert result.collapse_tick == 0

    def test_valuable_credits_everyone_reports(self):
        result = run(config(revenue=FixedUnit(0.6)))
        assert all(rec.participation == 1.0 for rec in result.records)
        assert result.collapse_tick is None

    def test_one_tick(self):
        state = init_world(config())
        rec = tick(state)
        assert rec.tick == 0 and state.tick == 1
        assert len(run(config(horizon=1)).records) == 1

    def test_arrivals_accumulate(self):
        state = init_world(config(initial_honest_users=1, new_users_per_tick=0.5))
        counts = [tick(state).active_honest for _ in range(6)]
        assert counts == [1, 2, 2, 3, 3, 4]
        state = init_world(config(initial_honest_users=1, new_users_per_tick=2.25))
        for _ in range(4):
            tick(state)
        assert len(state.ledger) == 1 + 9

    def test_arrivals_carry_initial_grant(self):
        state = init_world(config(initial_honest_users=2, revenue=FixedUnit(0), initial_grant=3, new_users_per_tick=1))
        for _ in range(5):
            tick(state)
        assert state.ledger.total_distributed == 3 * 7

    def test_noise_makes_some_users_read_only(self):
        result = run(config(revenue=FixedUnit(0.0), epsilon_noise=1.0, horizon=50))
        participation = [rec.participation for rec in result.records]
        assert 0 < sum(participation) / len(participation) < 1
        assert result.collapse_tick is None

    def test_total_nondecreasing(self):
        result = run(config(revenue=Inflationary(300), new_users_per_tick=0.3, initial_grant=1, horizon=80))
        totals = [rec.total_distributed for rec in result.records]
        assert totals == sorted(totals)
        assert all(0 <= rec.participation <= 1 for rec in result.records)


def inflation_oracle(kappa, u_star, users, m, r):
    """First non-reporting tick when every comment is malicious and paid."""
    total, t = 0.0, 0
    while kappa / max(total, 1.0) > u_star:
        total += users * m * r
        t += 1
    return t, total


@pytest.mark.parametrize("m", [1, 5])
def test_inflation_collapse_matches_brute_force(m):
    params = ModelParams(c_r=0.5, p=1.0, c_p=2.0, c_w=1.0, r=3.0)
    u_star = threshold_unit_value(params)
    expected_tick, expected_total = inflation_oracle(500.0, u_star, 3, m, params.r)
    result = run(SimConfig(params, Inflationary(500.0), initial_honest_users=3, horizon=expected_tick + 15,
                           comments_per_user_per_tick=m, seed=3))
    first_quiet = next(rec.tick for rec in result.records if rec.participation == 0)
    assert first_quiet == expected_tick
    assert result.records[first_quiet].snapshot_total == expected_total
    assert result.collapse_tick == expected_tick


def test_inflation_example_boundary():
    # u* = 0.55 with kappa = 100 puts the collapse point at N = 181.8...
    result = run(config(revenue=Inflationary(100.0), horizon=80, seed=11))
    for rec in result.records:
        assert (rec.participation == 1.0) == (rec.snapshot_total < 100 / 0.55)
    assert any(rec.participation == 0 for rec in result.records)


def submodular_oracle(alpha, beta, cost, horizon):
    """Report count after each tick for one user with p = q = 1, m = 1."""
    n, counts = 0, []
    for _ in range(horizon):
        revenue = beta if n == 0 else alpha * (math.log(n + 1) - math.log(n))
        if revenue > cost:
            n += 1
        counts.append(n)
    return counts


def test_submodular_collapse_matches_recurrence():
    params = ModelParams(c_r=0.01, p=1.0, c_p=0.02, c_w=0.02, r=1.0)  # per-report cost 0.05
    result = run(SimConfig(params, Submodular(1.0, 5.0), initial_honest_users=2, horizon=40, seed=5))
    counts = submodular_oracle(1.0, 5.0, 0.05, 40)
    reporting = [b > a for a, b in zip([0] + counts, counts)]
    assert [rec.participation == 1.0 for rec in result.records] == reporting
    assert reporting[0] and not reporting[-1]
    assert result.collapse_tick == reporting.index(False)
    assert all(acct.valid_reports == counts[-1] for acct in result.final_ledger.accounts.values())


@pytest.mark.parametrize("m", [1, 5])
def test_cap_exhaustion(m):
    params = ModelParams(c_r=0.1, p=0.5, c_p=0.2, c_w=0.2, r=3.0)
    result = run(SimConfig(params, Capped(20.0, 1.0), initial_honest_users=5, horizon=300, seed=9,
                           comments_per_user_per_tick=m, initial_grant=1.5))
    assert result.collapse_tick is not None
    for acct in result.final_ledger.accounts.values():
        assert acct.balance == 20.0
        assert acct.paid_reports <= math.ceil(20.0 / 3.0)


def test_admin_probability_rescales_reward():
    # With q = 0.5 and r = 10 the rational choice matches q = 1 and r = 5.
    params = ModelParams(c_r=0.5, p=0.2, c_p=2.0, c_w=1.0, r=10.0)
    for u0 in (0.5, 1.0, 1.2):
        a = run(config(revenue=FixedUnit(u0), admin_validity_prob=0.5, horizon=5))
        b = run(config(params=params.with_reward(5.0), revenue=FixedUnit(u0), horizon=5))
        assert [r.participation for r in a.records] == [r.participation for r in b.records]
    a = run(config(revenue=FixedUnit(2.0), admin_validity_prob=0.5, horizon=3000, initial_honest_users=5))
    b = run(config(params=params.with_reward(5.0), revenue=FixedUnit(2.0), horizon=3000, initial_honest_users=5,
                   seed=8))
    (ma, sa), (mb, sb) = a.mean_comment_utility(), b.mean_comment_utility()
    # Both equal -c_r + p * (q * r * u0 - c_p - c_w) = 0.9 in expectation.
    assert abs(ma - 0.9) < 4 * sa and abs(mb - 0.9) < 4 * sb


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([FixedUnit(0.5), FixedUnit(0.7), Inflationary(80), Inflationary(400)]),
       st.integers(1, 6), st.integers(1, 3), st.floats(0, 2), st.integers(0, 2**64 - 1))
def test_homogeneous_models_are_unanimous(model, users, m, arrivals, seed):
    result = run(config(revenue=model, initial_honest_users=users, comments_per_user_per_tick=m,
                        new_users_per_tick=arrivals, initial_grant=1.0, horizon=30, seed=seed))
    assert {rec.participation for rec in result.records} <= {0.0, 1.0}
    result.final_ledger.check_conservation()


def test_deterministic_runs():
    cfg = config(revenue=Inflationary(200), new_users_per_tick=0.7, initial_grant=2, epsilon_noise=0.1, horizon=60)
    a, b = run(cfg), run(cfg)
    assert a.to_csv() == b.to_csv()
    assert a.summary_json() == b.summary_json()
    assert a.final_ledger.to_json() == b.final_ledger.to_json()


@pytest.mark.parametrize("values,window,expected", [
    ([1, 1, 0, 0, 0], 3, 2),
    ([1, 0, 0, 1, 0, 0], 2, 1),
    ([1, 0, 0, 1, 0], 3, None),
    ([0.005, 0.02, 0.0, 0.0], 2, 2),
    ([], 1, None),
])
def test_find_collapse(values, window, expected):
    assert find_collapse(values, 0.01, window) == expected


def test_csv_header_and_precision():
    text = run(config(revenue=Inflationary(3), horizon=2)).to_csv()
    lines = text.splitlines()
    assert lines[0] == "tick,active_honest,reporters,participation,reports_rewarded,unit_value,total_distributed,mean_utility"
    assert len(lines) == 3
    for field in lines[1].split(","):
        assert len(field.replace("-", "").replace(".", "").split("e")[0]) <= 10
