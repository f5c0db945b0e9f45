"""Task registry, evaluation protocol, coverage, retry statistic."""

import math

import numpy as np
import pytest

from playlmp.collectors import collect_demos, collect_play, collect_random
from playlmp.data import PlayDataset
from playlmp.eval import (
    CoverageCurve,
    ExpertPolicy,
    RandomPolicy,
    coverage_analysis,
    coverage_curve,
    evaluate,
    final_counts_at_common_duration,
    had_retry,
    retry_statistic,
    robustness_sweep,
    run_rollout,
    split_demos,
    wilson_interval,
)
from playlmp.eval.harness import RolloutTrace
from playlmp.exceptions import ConfigMismatchError, DataFormatError
from playlmp.playground import EnvConfig
from playlmp.tasks import TASK_IDS, register_tasks

CONFIG = EnvConfig()


@pytest.fixture(scope="module")
def demos():
    return collect_demos(CONFIG, per_task=12, seed=1)


# ---------------------------------------------------------------------------
# registry


def test_twelve_tasks_registered():
    registry = register_tasks()
    assert len(registry) == 12
    assert set(registry) == set(TASK_IDS)


def test_experts_reliable_on_their_own_tasks():
    # controller-as-oracle: >= 95% success over 100 seeded rollouts per task
    from playlmp.collectors import generate_demo

    for index, (task_id, task) in enumerate(register_tasks().items()):
        ok = sum(generate_demo(CONFIG, task, seed=[50, index, k]) is not None
                 for k in range(100))
        assert ok >= 95, f"{task_id}: {ok}/100"


def test_tasks_not_presolved_at_reset():
    registry = register_tasks()
    for index, (task_id, task) in enumerate(registry.items()):
        presolved = 0
        for k in range(300):
            rng = np.random.default_rng([60, index, k])
            state = task.reset(CONFIG, rng)
            presolved += task.predicate(CONFIG, state, state)
        assert presolved <= 3, f"{task_id} presolved {presolved}/300"


def test_predicates_pure():
    registry = register_tasks()
    for index, task in enumerate(registry.values()):
        rng = np.random.default_rng([61, index])
        state = task.reset(CONFIG, rng)
        assert task.predicate(CONFIG, state, state) == \
            task.predicate(CONFIG, state, state)
        p = task.progress(CONFIG, state, state)
        assert 0.0 <= p <= 1.0


# ---------------------------------------------------------------------------
# evaluation protocol


def test_expert_policy_matches_oracle(demos):
    registry = register_tasks()
    experts = {tid: ExpertPolicy(CONFIG, registry[tid]) for tid in TASK_IDS}
    report = evaluate(experts, CONFIG, demos, n_rollouts=4, seed=0,
                      n_val=4, n_test=4)
    assert report.aggregate.rate >= 0.95


def test_random_policy_near_chance_on_door_tasks(demos):
    report = evaluate(RandomPolicy(CONFIG), CONFIG, demos,
                      task_ids=["open-door", "close-door"], n_rollouts=50,
                      seed=0, n_val=4, n_test=4)
    assert report.aggregate.rate < 0.10


def test_evaluate_reproducible(demos):
    policy = RandomPolicy(CONFIG)
    a = evaluate(policy, CONFIG, demos, task_ids=["open-door"], n_rollouts=10,
                 seed=3, n_val=4, n_test=4)
    b = evaluate(policy, CONFIG, demos, task_ids=["open-door"], n_rollouts=10,
                 seed=3, n_val=4, n_test=4)
    assert [(r.task_id, r.successes) for r in a.results] == \
        [(r.task_id, r.successes) for r in b.results]


def test_rollout_respects_perturbation(demos):
    splits = split_demos(demos, n_val=4, n_test=4)
    demo = splits["open-door"]["test"][0]
    registry = register_tasks()
    trace0 = run_rollout(CONFIG, registry["open-door"],
                         ExpertPolicy(CONFIG, registry["open-door"]), demo,
                         radius=0.0, seed=5)
    assert trace0.success


def test_split_sizes(demos):
    splits = split_demos(demos, n_val=4, n_test=4)
    for task_id in TASK_IDS:
        assert len(splits[task_id]["train"]) == 4
        assert len(splits[task_id]["val"]) == 4
        assert len(splits[task_id]["test"]) == 4
    with pytest.raises(DataFormatError):
        split_demos(demos)  # default 10+10 needs more demos than 12


def test_wilson_interval_scaling():
    # binomial CI width shrinks like 1/sqrt(N)
    lo1, hi1 = wilson_interval(50, 100)
    lo4, hi4 = wilson_interval(200, 400)
    ratio = (hi4 - lo4) / (hi1 - lo1)
    assert 0.4 < ratio < 0.6
    assert lo1 < 0.5 < hi1


def test_unknown_task_rejected(demos):
    with pytest.raises(DataFormatError):
        evaluate(RandomPolicy(CONFIG), CONFIG, demos, task_ids=["juggle"],
                 n_rollouts=1, n_val=4, n_test=4)


def test_per_task_policy_dict_must_cover_tasks(demos):
    with pytest.raises(DataFormatError):
        evaluate({"open-door": RandomPolicy(CONFIG)}, CONFIG, demos,
                 task_ids=["close-door"], n_rollouts=1, n_val=4, n_test=4)


# ---------------------------------------------------------------------------
# robustness sweep


def test_robustness_radius_zero_equals_plain_eval(demos):
    policy = RandomPolicy(CONFIG)
    table = robustness_sweep({"rand": policy}, CONFIG, demos,
                             radii=(0.0, 0.2), n_rollouts=3, seed=7,
                             task_ids=["open-door", "press-red"],
                             n_val=4, n_test=4)
    plain = evaluate(policy, CONFIG, demos, task_ids=["open-door", "press-red"],
                     n_rollouts=3, seed=7, n_val=4, n_test=4)
    assert table.rates[("rand", 0.0)] == plain.aggregate.rate


def test_robustness_radii_default_matches_sweep_endpoints():
    from playlmp.eval import ROBUSTNESS_RADII

    assert ROBUSTNESS_RADII[0] == 0.0 and ROBUSTNESS_RADII[-1] == 0.4


def test_slope_computation():
    table = robustness_sweep.__self__ if False else None
    from playlmp.eval.harness import RobustnessTable

    t = RobustnessTable(radii=(0.0, 0.1, 0.2),
                        rates={("m", 0.0): 1.0, ("m", 0.1): 0.5, ("m", 0.2): 0.0},
                        per_task={})
    assert t.slope("m") == pytest.approx(-5.0)


# ---------------------------------------------------------------------------
# coverage


def test_coverage_empty_dataset():
    ds = PlayDataset([], CONFIG.hash(), CONFIG.tick_rate, "play")
    curve = coverage_curve(ds)
    assert curve.points == [(0, 0)]
    assert curve.final_count == 0


def test_coverage_static_episode_is_one_bin():
    import dataclasses

    from playlmp.data import Episode
    from playlmp.playground import Action, reset, step

    state = dataclasses.replace(reset(CONFIG, seed=0), pressed_r=0.0,
                                pressed_g=0.0, pressed_b=0.0)
    states, actions = [state], []
    for _ in range(50):
        action = Action(0.0, 0.0, state.gripper)
        state = step(CONFIG, state, action)
        actions.append(action)
        states.append(state)
    ds = PlayDataset.from_episodes(
        [Episode(states=states, actions=actions, collector="play", seed=0)],
        CONFIG, "play")
    assert coverage_curve(ds).final_count == 1


def test_coverage_monotone():
    play = collect_play(CONFIG, minutes=1.0, seed=5)
    curve = coverage_curve(play, checkpoint_every=200)
    ticks = [p[0] for p in curve.points]
    counts = [p[1] for p in curve.points]
    assert ticks == sorted(ticks)
    assert counts == sorted(counts)
    assert curve.total_ticks == play.total_ticks


def test_coverage_requires_shared_config():
    import dataclasses

    play = collect_play(CONFIG, minutes=0.1, seed=5)
    other = dataclasses.replace(CONFIG, a_max=0.06)
    alien = collect_play(other, minutes=0.1, seed=5)
    with pytest.raises(ConfigMismatchError):
        coverage_analysis({"a": play, "b": alien})


def test_coverage_directional_ordering_small():
    # play > demos > random on equal duration, small-scale directional check
    play = collect_play(CONFIG, minutes=6, seed=31)
    demos = collect_demos(CONFIG, per_task=40, seed=32)
    rand = collect_random(CONFIG, minutes=6, seed=33)
    curves = coverage_analysis({"play": play, "demos": demos, "random": rand})
    finals = final_counts_at_common_duration(curves)
    assert finals["play"] > finals["demos"] > finals["random"]


# ---------------------------------------------------------------------------
# retry statistic


def test_retry_monotone_success_is_zero():
    trace = RolloutTrace("t", True, 5, progress=[0.1, 0.4, 0.6, 0.9, 1.0])
    assert retry_statistic([trace]) == 0


def test_retry_rise_fall_rise_counts_once():
    trace = RolloutTrace("t", True, 7,
                         progress=[0.2, 0.6, 0.7, 0.3, 0.2, 0.8, 1.0])
    assert retry_statistic([trace]) == 1


def test_retry_requires_eventual_success():
    trace = RolloutTrace("t", False, 7,
                         progress=[0.2, 0.6, 0.7, 0.3, 0.2, 0.1, 0.0])
    assert retry_statistic([trace]) == 0
    assert not had_retry(trace.progress, trace.success)
