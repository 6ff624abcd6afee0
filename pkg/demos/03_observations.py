"""
What Pac-Man sees
=================

Nine scalar observations drive every rule.  Step a random walk forward
and print them as the ghosts leave the pen.
"""

import random

from pacman_ce.engine import default_maze, new_game, tick
from pacman_ce.perception import OBSERVATION_NAMES, observe

maze = default_maze()
state = new_game(maze, seed=3)
rng = random.Random(3)
ghost_rng = random.Random(4)

print("tick " + " ".join(f"{n[:10]:>10}" for n in OBSERVATION_NAMES))
for t in range(60):
    if t % 10 == 0:
        obs = observe(state)
        print(f"{t:4d} " + " ".join(f"{v:10.2f}" for v in obs))
    state, _ = tick(state, rng.choice(maze.pacman_moves[state.pacman]), ghost_rng)

# unreachable targets read as a large sentinel, e.g. NearestEdGhost with
# nothing edible on the board
