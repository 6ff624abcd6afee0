"""
The cross-entropy method on OneMax
==================================

Before touching the game, watch the optimizer on the textbook problem:
find the all-ones bit-vector of length 50, scored by its number of ones.
"""

import numpy as np

from pacman_ce import cross_entropy as ce

# each coordinate starts as a fair coin
p0 = np.full(50, 0.5)

result = ce.ce_optimize(
    lambda p, rng: ce.sample_bernoulli(p, rng),    # sampler
    lambda x: float(x.sum()),                      # evaluator
    ce.bernoulli_update,                           # refit from the elite
    p0, 100, 0.1, 0.6, 30,
    np.random.default_rng(0),
    stop=ce.is_converged_bernoulli,
)

# gamma is the elite threshold; it climbs towards 50
for log in result.history:
    print(f"iter {log.iteration:2d}  gamma {log.gamma:4.0f}  mean {log.mean:5.1f}  "
          f"elite {log.elite_size}")

print("best value:", result.best_value)
print("final probabilities, rounded:", np.round(result.params, 2))
