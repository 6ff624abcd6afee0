"""Conditions, rules and prioritized decision-list policies, with the
textual rule syntax::

    [1]: if (NearestGhost<4) and (FromGhost+) then FromGhostCenter+

A tick of control observes the state, lets the decision list switch at
most one module, then arbitrates a direction.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, List, Optional, Tuple, Union

from .behaviors import ALL_OFF, PRIORITIES, ActionModule, ModuleActivations, arbitrate
from .engine import GameState
from .perception import OBSERVATION_NAMES, LazyObservation, ObservationVector, observe

MAX_ATOMS = 3

# "JunctionSafety" is the spelling used in the sample policy's Rule 2.
OBSERVATION_ALIASES = {"JunctionSafety": "MaxJunctionSafety"}
_OBS_INDEX = {name: i for i, name in enumerate(OBSERVATION_NAMES)}
_OBS_INDEX.update({a: _OBS_INDEX[t] for a, t in OBSERVATION_ALIASES.items()})


class RuleSyntaxError(ValueError):
    """Base class for rule-text errors."""


class UnknownObservationError(RuleSyntaxError):
    pass


class UnknownModuleError(RuleSyntaxError):
    pass


class TooManyAtomsError(RuleSyntaxError):
    pass


class PriorityError(RuleSyntaxError):
    pass


def _module(name: str) -> ActionModule:
    try:
        return ActionModule[name]
    except KeyError:
        raise UnknownModuleError(f"unknown action module {name!r}") from None


def _check_obs(name: str) -> str:
    if name not in _OBS_INDEX:
        raise UnknownObservationError(f"unknown observation {name!r}")
    return name


def format_number(x: float) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() else repr(x)


@dataclass(frozen=True)
class ObsGreater:
    obs: str
    threshold: float

    def __post_init__(self):
        _check_obs(self.obs)
        object.__setattr__(self, "threshold", float(self.threshold))

    def __str__(self):
        return f"({self.obs}>{format_number(self.threshold)})"


@dataclass(frozen=True)
class ObsLess:
    obs: str
    threshold: float

    def __post_init__(self):
        _check_obs(self.obs)
        object.__setattr__(self, "threshold", float(self.threshold))

    def __str__(self):
        return f"({self.obs}<{format_number(self.threshold)})"


@dataclass(frozen=True)
class ModuleOn:
    module: ActionModule

    def __str__(self):
        return f"({self.module.name}+)"


@dataclass(frozen=True)
class ModuleOff:
    module: ActionModule

    def __str__(self):
        return f"({self.module.name}-)"


ConditionAtom = Union[ObsGreater, ObsLess, ModuleOn, ModuleOff]
Condition = Tuple[ConditionAtom, ...]


@dataclass(frozen=True)
class Effect:
    module: ActionModule
    on: bool

    def __str__(self):
        return f"{self.module.name}{'+' if self.on else '-'}"


def SwitchOn(module) -> Effect:
    return Effect(ActionModule(module), True)


def SwitchOff(module) -> Effect:
    return Effect(ActionModule(module), False)


@dataclass(frozen=True)
class Rule:
    condition: Condition
    effect: Effect

    def __post_init__(self):
        cond = tuple(self.condition)
        if not 1 <= len(cond) <= MAX_ATOMS:
            raise TooManyAtomsError(f"a rule needs 1..{MAX_ATOMS} condition atoms, got {len(cond)}")
        object.__setattr__(self, "condition", cond)

    def __str__(self):
        return f"if {' and '.join(str(a) for a in self.condition)} then {self.effect}"


def _compile_atom(a: ConditionAtom):
    if isinstance(a, ObsGreater):
        return (0, _OBS_INDEX[a.obs], a.threshold)
    if isinstance(a, ObsLess):
        return (1, _OBS_INDEX[a.obs], a.threshold)
    if isinstance(a, ModuleOn):
        return (2, int(a.module), 0.0)
    return (3, int(a.module), 0.0)


def _holds(compiled, obs, act) -> bool:
    for kind, idx, thr in compiled:
        if kind == 0:
            if not obs[idx] > thr:
                return False
        elif kind == 1:
            if not obs[idx] < thr:
                return False
        elif kind == 2:
            if not act[idx]:
                return False
        elif act[idx]:
            return False
    return True


def eval_condition(cond: Condition, obs: ObservationVector, act: ModuleActivations) -> bool:
    """Conjunction of strict comparisons and module on/off tests."""
    return _holds([_compile_atom(a) for a in cond], obs, act)


@dataclass(frozen=True)
class RulePolicy:
    """Decision list of ``(priority, Rule)`` kept sorted by priority (1
    first), insertion order preserved within a level."""

    entries: Tuple[Tuple[int, Rule], ...] = ()
    _compiled: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        entries = tuple(self.entries)
        for p, _ in entries:
            if p not in PRIORITIES:
                raise PriorityError(f"priority must be one of {PRIORITIES}, got {p}")
        entries = tuple(sorted(entries, key=lambda e: e[0]))
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "_compiled", tuple(
            (p, tuple(_compile_atom(a) for a in r.condition), int(r.effect.module), r.effect.on)
            for p, r in entries))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def rules(self) -> List[Rule]:
        return [r for _, r in self.entries]


def _changes(act: ModuleActivations, module: int, on: bool, priority: int) -> bool:
    return act[module] != priority if on else act[module] != 0


def decide_index(policy: RulePolicy, obs, act) -> Optional[int]:
    """Index of the entry that fires this tick, or None."""
    for i, (p, compiled, module, on) in enumerate(policy._compiled):
        if _changes(act, module, on, p) and _holds(compiled, obs, act):
            return i
    return None


def decide(policy: RulePolicy, obs: ObservationVector, act: ModuleActivations
           ) -> Optional[Tuple[Effect, int]]:
    """First rule, by priority then list order, whose condition holds and
    whose effect is not already in force; returns ``(effect, priority)``.

    Rules whose effect would leave the activations unchanged are passed
    over, so a standing "switch X off" rule does not shadow the rest of the
    list once X is off.
    """
    i = decide_index(policy, obs, act)
    if i is None:
        return None
    p, rule = policy.entries[i]
    return rule.effect, p


def apply_effect(act: ModuleActivations, effect: Effect, priority: int) -> ModuleActivations:
    values = list(act)
    values[effect.module] = priority if effect.on else 0
    return ModuleActivations(*values)


def control_tick(policy: RulePolicy, state: GameState, act: ModuleActivations,
                 rng: random.Random) -> Tuple[int, ModuleActivations]:
    obs = observe(state)
    fired = decide(policy, obs, act)
    if fired is not None:
        act = apply_effect(act, *fired)
    return arbitrate(act, state, rng), act


class RuleController:
    """Episode controller driving Pac-Man with a decision list.

    Activations start all off and are cleared after every lost life.
    ``fired`` collects the entry indices that fired at least once.
    """

    def __init__(self, policy: RulePolicy):
        self.policy = policy
        self.activations = ALL_OFF
        self.fired: set = set()
        self._deaths = 0

    def __call__(self, state: GameState, rng: random.Random) -> int:
        if state.deaths != self._deaths:
            self._deaths = state.deaths
            self.activations = ALL_OFF
        act = self.activations
        if self.policy._compiled:
            i = decide_index(self.policy, LazyObservation(state), act)
            if i is not None:
                p, rule = self.policy.entries[i]
                act = apply_effect(act, rule.effect, p)
                self.activations = act
                self.fired.add(i)
        return arbitrate(act, state, rng)


# ---------------------------------------------------------------------------
# Text syntax

_RULE_RE = re.compile(r"^\s*\[\s*([^\]]*)\]\s*:\s*if\s+(.*?)\s+then\s+(\w+)\s*([+-])\s*$")
_ATOM_RE = re.compile(r"^\(\s*(\w+)\s*(?:([<>])\s*([-+]?[0-9.eE+-]+)|([+-]))\s*\)$")


def parse_atom(text: str) -> ConditionAtom:
    m = _ATOM_RE.match(text.strip())
    if not m:
        raise RuleSyntaxError(f"malformed condition atom {text!r}")
    name, op, value, sign = m.groups()
    if sign:
        module = _module(name)
        return ModuleOn(module) if sign == "+" else ModuleOff(module)
    _check_obs(name)
    try:
        thr = float(value)
    except ValueError:
        raise RuleSyntaxError(f"bad threshold {value!r} in {text!r}") from None
    return ObsGreater(name, thr) if op == ">" else ObsLess(name, thr)


def parse_rule(text: str) -> Tuple[int, Rule]:
    m = _RULE_RE.match(text)
    if not m:
        raise RuleSyntaxError(f"malformed rule {text!r}")
    prio_text, cond_text, module, sign = m.groups()
    try:
        priority = int(prio_text)
    except ValueError:
        raise PriorityError(f"malformed priority {prio_text!r}") from None
    if priority not in PRIORITIES:
        raise PriorityError(f"priority must be one of {PRIORITIES}, got {priority}")
    atoms_text = [a for a in re.split(r"\s+and\s+", cond_text.strip())]
    if len(atoms_text) > MAX_ATOMS:
        raise TooManyAtomsError(f"{len(atoms_text)} condition atoms, at most {MAX_ATOMS} allowed")
    atoms = tuple(parse_atom(a) for a in atoms_text)
    effect = Effect(_module(module), sign == "+")
    return priority, Rule(atoms, effect)


def format_rule(priority: int, rule: Rule) -> str:
    return f"[{priority}]: {rule}"


def parse_policy(text: str) -> RulePolicy:
    """One rule per line; blank lines and ``#`` comments are skipped."""
    entries = []
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            entries.append(parse_rule(stripped))
        except RuleSyntaxError as exc:
            raise type(exc)(f"line {lineno}: {exc}") from None
    return RulePolicy(tuple(entries))


def format_policy(policy: RulePolicy) -> str:
    return "".join(format_rule(p, r) + "\n" for p, r in policy.entries)


def read_policy(path) -> RulePolicy:
    with open(path) as fh:
        return parse_policy(fh.read())


def write_policy(policy: RulePolicy, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_policy(policy))


def bundled_text(name: str) -> str:
    return resources.files("pacman_ce").joinpath("data", name).read_text()


def handcoded_policy() -> RulePolicy:
    """The nine-rule sample policy, from the bundled ``handcoded_policy.rules``."""
    return parse_policy(bundled_text("handcoded_policy.rules"))


def policy_from_rules(pairs: Iterable[Tuple[int, Rule]]) -> RulePolicy:
    return RulePolicy(tuple(pairs))
