"""
Learning a policy with CE
=========================

A short training run on the small bundled maze.  The slot model holds 30
rule slots; each iteration samples policies, keeps the top 5 percent and
refits the slot probabilities.  Takes well under a minute.
"""

from pacman_ce import experiments as ex
from pacman_ce.policy import format_policy, handcoded_policy

config = ex.ExperimentConfig(maze="small", population=60, rho=0.1, iterations=15,
                             test_games=20, seed=7)


def progress(t, model, log):
    used = (model.p > 0.5).sum()
    print(f"iter {t:2d}  elite level {log.gamma:6.0f}  mean {log.mean:6.0f}  "
          f"slots likely filled {used}")


run = ex.train(config, progress)

print()
print(f"learned from: {run.learned_source}")
print(format_policy(run.learned_policy))
print(f"test mean {run.test_mean:.0f} over {len(run.test_scores)} games")

# for scale, the hand-coded list on the same maze
hand = ex.evaluate_policy(handcoded_policy(), 20, config.load_maze(), seed=7)
print(f"hand-coded policy {hand.mean:.0f}")
