"""Generic modular-agent layer: modules, agent/environment tuples, the
interaction loop, decision queues and discounted return.

The Pac-Man stack is one instantiation (see :func:`pacman_agent` and
:func:`pacman_environment`); everything else here is problem agnostic.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, NamedTuple, Optional, Sequence


@dataclass(frozen=True)
class LcmpModule:
    """A module: an influence weight and an output value."""

    influence: float = 0.0
    value: float = 0.0


ModularState = tuple  # tuple[LcmpModule, ...], length fixed per agent


@dataclass(frozen=True)
class SetInfluence:
    """Delta instruction: set module ``index`` to influence ``influence``."""

    index: int
    influence: float


NO_OP: tuple = ()


@dataclass
class EnvironmentSpec:
    """Environment tuple.

    ``transition(state, action, rng)`` returns the next state,
    ``observation(state, rng)`` draws an observation and ``reward(state)``
    is deterministic.  ``is_terminal`` lets an environment end the loop early.
    """

    initial_state: Any
    transition: Callable[[Any, Any, random.Random], Any]
    observation: Callable[[Any, random.Random], Any]
    reward: Callable[[Any], float]
    is_terminal: Callable[[Any], bool] = lambda s: False


@dataclass
class AgentSpec:
    initial_modules: ModularState
    input_interface: Callable[[Any, ModularState], ModularState]
    output_interface: Callable[[ModularState], Any]
    policy: Callable[[ModularState], Sequence[SetInfluence]]
    internal_dynamics: Callable[[ModularState, Sequence[SetInfluence]], ModularState] = None

    def __post_init__(self):
        if not self.initial_modules:
            raise ValueError("an agent needs at least one module")
        if self.internal_dynamics is None:
            self.internal_dynamics = apply_deltas


def apply_deltas(modules: ModularState, deltas: Sequence[SetInfluence]) -> ModularState:
    """Default internal dynamics: apply each influence instruction in order."""
    if not deltas:
        return modules
    out = list(modules)
    for d in deltas:
        if 0 <= d.index < len(out):
            out[d.index] = LcmpModule(d.influence, out[d.index].value)
    return tuple(out)


class Step(NamedTuple):
    observation: Any
    reward: float
    delta: Sequence[SetInfluence]
    action: Any


@dataclass
class InteractionResult:
    steps: list = field(default_factory=list)
    discounted_return: float = 0.0
    final_state: Any = None
    final_modules: ModularState = ()


def discounted_return(rewards: Iterable[float], discount: float) -> float:
    total = 0.0
    weight = 1.0
    for r in rewards:
        total += weight * r
        weight *= discount
    return total


def run_interaction_loop(env: EnvironmentSpec, agent: AgentSpec, horizon: int,
                         discount: float, rng: random.Random) -> InteractionResult:
    """Run ``horizon`` steps of observe, reward, input interface, policy,
    internal dynamics, output interface, transition (in that order)."""
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    state = env.initial_state
    modules = agent.initial_modules
    steps = []
    for _ in range(horizon):
        if env.is_terminal(state):
            break
        obs = env.observation(state, rng)
        reward = env.reward(state)
        modules = agent.input_interface(obs, modules)
        delta = agent.policy(modules)
        modules = agent.internal_dynamics(modules, delta)
        action = agent.output_interface(modules)
        state = env.transition(state, action, rng)
        steps.append(Step(obs, reward, delta, action))
    ret = discounted_return((s.reward for s in steps), discount)
    return InteractionResult(steps, ret, state, modules)


@dataclass(frozen=True)
class QueueRule:
    priority: int
    condition: Callable[[ModularState], bool]
    atomic_policy: Callable[[ModularState, random.Random], Sequence[SetInfluence]]

    def __post_init__(self):
        if self.priority < 1:
            raise ValueError(f"priority must be >= 1, got {self.priority}")


def evaluate_decision_queue(rules: Sequence[QueueRule], state: ModularState,
                            rng: random.Random, max_priority: Optional[int] = None):
    """First rule (ascending priority, insertion order on ties) whose
    condition holds supplies the delta; :data:`NO_OP` if none does."""
    if max_priority is not None:
        for rule in rules:
            if rule.priority > max_priority:
                raise ValueError(f"priority {rule.priority} exceeds {max_priority}")
    order = sorted(range(len(rules)), key=lambda i: (rules[i].priority, i))
    for i in order:
        rule = rules[i]
        if rule.condition(state):
            return rule.atomic_policy(state, rng)
    return NO_OP


# ---------------------------------------------------------------------------
# Pac-Man instantiation


def pacman_environment(maze, seed: int, config=None) -> EnvironmentSpec:
    """Wrap the game as an environment.

    The environment state is ``(GameState, last_score)`` so that the reward
    is the score gained by the previous transition.  Ghost randomness comes
    from a game stream derived from ``seed``; the ``rng`` passed into the
    loop feeds only the agent's arbitration.
    """
    from . import engine

    game_rng, _ = engine.episode_streams(seed)
    start = engine.new_game(maze, seed, config)

    def transition(s, action, rng):
        gs, _ = s
        nxt, _ = engine.tick(gs, action, game_rng)
        return nxt, gs.score

    def observation(s, rng):
        return s[0]

    def reward(s):
        gs, prev = s
        return float(gs.score - prev)

    def is_terminal(s):
        return s[0].status != engine.RUNNING

    return EnvironmentSpec((start, 0), transition, observation, reward, is_terminal)


def pacman_agent(policy, rng: random.Random) -> AgentSpec:
    """Wrap a :class:`~pacman_ce.policy.RulePolicy` as a modular agent.

    One module per action module, influence 0 when off and the priority
    otherwise.  The input interface keeps the latest game state for the
    policy and output interface; ``rng`` drives arbitration.
    """
    from . import behaviors, perception
    from .behaviors import ActionModule, ModuleActivations
    from .policy import decide

    n = len(ActionModule)
    holder = {}

    def input_interface(obs, modules):
        holder["state"] = obs
        holder["deaths"] = holder.get("deaths", obs.deaths)
        if obs.deaths != holder["deaths"]:
            holder["deaths"] = obs.deaths
            modules = tuple(LcmpModule(0.0, 0.0) for _ in range(n))
        return modules

    def to_activations(modules):
        return ModuleActivations(*(int(m.influence) for m in modules))

    def pol(modules):
        obs = perception.observe(holder["state"])
        fired = decide(policy, obs, to_activations(modules))
        if fired is None:
            return NO_OP
        effect, prio = fired
        return (SetInfluence(int(effect.module), float(prio) if effect.on else 0.0),)

    def output_interface(modules):
        return behaviors.arbitrate(to_activations(modules), holder["state"], rng)

    m0 = tuple(LcmpModule(0.0, 0.0) for _ in range(n))
    return AgentSpec(m0, input_interface, output_interface, pol)
