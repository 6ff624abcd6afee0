"""
The generic modular-agent loop
==============================

The game is just one environment for the modular agent layer.  Here the
hand-coded policy runs through the generic interaction loop and we check
that it matches a direct play of the same game.
"""

import random

from pacman_ce import lcmp
from pacman_ce.engine import default_maze, episode_streams, play_episode
from pacman_ce.policy import RuleController, handcoded_policy

maze = default_maze()
policy = handcoded_policy()

# hand the agent the same tie-break stream a direct game would use
_, agent_rng = episode_streams(5)
env = lcmp.pacman_environment(maze, seed=5)
agent = lcmp.pacman_agent(policy, agent_rng)
loop = lcmp.run_interaction_loop(env, agent, horizon=3000, discount=1.0,
                                 rng=random.Random(0))

# rewards lag one step, so add the score gained on the final transition
gs, prev = loop.final_state
print("undiscounted return:", loop.discounted_return + gs.score - prev)
print("with discount 0.99:", lcmp.discounted_return((s.reward for s in loop.steps), 0.99))

direct = play_episode(maze, RuleController(policy), seed=5, tick_limit=3000)
print("direct play score:  ", direct.score)
