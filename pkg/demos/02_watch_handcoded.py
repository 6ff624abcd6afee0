"""
Watching the hand-coded policy
==============================

The sample decision list from the package data plays one game.  We print
the rules, a few frames along the way and the final score.
"""

from pacman_ce.console import render
from pacman_ce.engine import default_maze, play_episode
from pacman_ce.policy import RuleController, format_policy, handcoded_policy
from pacman_ce.trace import format_trace, parse_trace, replay_states

policy = handcoded_policy()
print(format_policy(policy))

ctrl = RuleController(policy)
result = play_episode(default_maze(), ctrl, seed=1, tick_limit=3000)

# the trace is plain text; replaying it rebuilds every state
states = list(replay_states(parse_trace(format_trace(result))))
for t in (0, 40, len(states) // 2, len(states) - 1):
    print(render(states[t]).text(), "\n")

print(f"score {result.score}, {result.ticks} ticks, {result.status}")
print("rules that fired:", sorted(i + 1 for i in ctrl.fired))
