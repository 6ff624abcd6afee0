import random

import pytest

from pacman_ce.engine import default_maze, episode_streams, play_episode
from pacman_ce.lcmp import (NO_OP, AgentSpec, EnvironmentSpec, LcmpModule, QueueRule,
                            SetInfluence, apply_deltas, discounted_return, evaluate_decision_queue,
                            pacman_agent, pacman_environment, run_interaction_loop)
from pacman_ce.policy import RuleController, handcoded_policy


def counter_env(reward=1.0):
    return EnvironmentSpec(0, lambda s, a, r: s + 1, lambda s, r: s, lambda s: reward)


def idle_agent():
    return AgentSpec((LcmpModule(),), lambda o, m: m, lambda m: None, lambda m: NO_OP)


def test_discounted_return():
    assert discounted_return([], 0.9) == 0
    assert discounted_return([5], 1.0) == 5
    assert discounted_return([2, 4, 8], 0.5) == 6


def test_loop_examples():
    rng = random.Random(0)
    res = run_interaction_loop(counter_env(), idle_agent(), 0, 0.9, rng)
    assert res.steps == [] and res.discounted_return == 0
    assert run_interaction_loop(counter_env(), idle_agent(), 5, 0.0, rng).discounted_return == 1
    assert run_interaction_loop(counter_env(), idle_agent(), 3, 0.5, rng).discounted_return == 1.75


def test_loop_order_and_terminal():
    env = EnvironmentSpec(0, lambda s, a, r: s + a, lambda s, r: s, lambda s: float(s),
                          is_terminal=lambda s: s >= 6)
    agent = AgentSpec((LcmpModule(), LcmpModule()),
                      lambda o, m: m,
                      lambda m: 1 + int(m[1].influence),
                      lambda m: (SetInfluence(1, 2.0),))
    res = run_interaction_loop(env, agent, 100, 1.0, random.Random(0))
    assert [s.action for s in res.steps] == [3, 3]
    assert res.final_state == 6
    assert res.final_modules[1].influence == 2.0
    with pytest.raises(ValueError):
        run_interaction_loop(env, agent, -1, 1.0, random.Random(0))


def test_apply_deltas():
    mods = (LcmpModule(0, 5), LcmpModule(1, 6))
    assert apply_deltas(mods, NO_OP) is mods
    out = apply_deltas(mods, (SetInfluence(0, 3.0), SetInfluence(0, 4.0)))
    assert out == (LcmpModule(4.0, 5), LcmpModule(1, 6))


def test_decision_queue():
    rng = random.Random(0)
    yes = lambda m: True
    d1 = (SetInfluence(0, 1.0),)
    d2 = (SetInfluence(0, 2.0),)
    assert evaluate_decision_queue([], (), rng) == NO_OP
    rules = [QueueRule(2, yes, lambda m, r: d2), QueueRule(1, yes, lambda m, r: d1)]
    assert evaluate_decision_queue(rules, (), rng) == d1
    assert evaluate_decision_queue([QueueRule(1, lambda m: False, lambda m, r: d1)], (), rng) == NO_OP
    with pytest.raises(ValueError):
        evaluate_decision_queue(rules, (), rng, max_priority=1)
    with pytest.raises(ValueError):
        QueueRule(0, yes, lambda m, r: d1)


def test_agent_needs_modules():
    with pytest.raises(ValueError):
        AgentSpec((), lambda o, m: m, lambda m: None, lambda m: NO_OP)


def test_pacman_loop_matches_direct_play():
    maze, seed, horizon = default_maze(), 17, 700
    direct = play_episode(maze, RuleController(handcoded_policy()), seed, tick_limit=horizon)
    _, ctrl_rng = episode_streams(seed)
    env = pacman_environment(maze, seed)
    res = run_interaction_loop(env, pacman_agent(handcoded_policy(), ctrl_rng), horizon,
                               1.0, random.Random(0))
    assert [s.action for s in res.steps] == direct.actions
    assert res.final_state[0].snapshot() == direct.final_state.snapshot()
    # rewards are score deltas observed one step late; the last one is pending
    gained = res.final_state[0].score - res.final_state[1]
    assert res.discounted_return + gained == direct.score
