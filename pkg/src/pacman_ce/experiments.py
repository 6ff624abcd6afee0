"""Policy-search experiments: rulebases, the slot model, CE training runs,
non-learning baselines and the results table."""
from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import cross_entropy as ce
from .behaviors import ActionModule, PRIORITIES
from .engine import DEFAULT_TICK_LIMIT, GameConfig, Maze, default_maze, maze_from_spec, play_episode
from .perception import OBSERVATION_NAMES
from .policy import (MAX_ATOMS, Effect, ModuleOff, ModuleOn, ObsGreater, ObsLess, Rule,
                     RuleController, RulePolicy, RuleSyntaxError, bundled_text, format_policy,
                     parse_rule)

Rulebase = List[Rule]
SlotRules = List[List[Rule]]

DISTANCE_GRID = tuple(float(v) for v in range(1, 16)) + (99.0,)
DENSITY_GRID = tuple(0.25 * i for i in range(17))
CONSTANT_GRID = (0.0,)


def derive_seeds(seed: int, n: int) -> List[int]:
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n)]


# ---------------------------------------------------------------------------
# Rulebases


def parse_rulebase(text: str) -> Rulebase:
    """One bare rule (``if ... then Module+``) per line; ``#`` comments."""
    rules = []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        try:
            rules.append(parse_rule("[1]: " + s)[1])
        except RuleSyntaxError as exc:
            raise type(exc)(f"line {lineno}: {exc}") from None
    if not rules:
        raise ValueError("rulebase is empty")
    return rules


def handcoded_rulebase() -> Rulebase:
    """The bundled 40-rule base; the first nine rules are the sample policy's."""
    return parse_rulebase(bundled_text("handcoded_rulebase.rules"))


def threshold_grid(obs: str) -> Tuple[float, ...]:
    if obs == "GhostDensity":
        return DENSITY_GRID
    if obs == "Constant":
        return CONSTANT_GRID
    return DISTANCE_GRID


def random_atom(rng: np.random.Generator):
    if rng.random() < 0.5:
        obs = OBSERVATION_NAMES[rng.integers(len(OBSERVATION_NAMES))]
        grid = threshold_grid(obs)
        thr = grid[rng.integers(len(grid))]
        return ObsGreater(obs, thr) if rng.random() < 0.5 else ObsLess(obs, thr)
    module = ActionModule(int(rng.integers(len(ActionModule))))
    return ModuleOn(module) if rng.random() < 0.5 else ModuleOff(module)


def random_rule(rng: np.random.Generator) -> Rule:
    n_atoms = int(rng.integers(1, MAX_ATOMS + 1))
    atoms = tuple(random_atom(rng) for _ in range(n_atoms))
    module = ActionModule(int(rng.integers(len(ActionModule))))
    return Rule(atoms, Effect(module, bool(rng.random() < 0.5)))


def random_rulebase(m: int, k: int, rng: np.random.Generator) -> SlotRules:
    """An independent random rule for every (slot, choice) pair."""
    if m < 1 or k < 1:
        raise ValueError("m and k must be >= 1")
    return [[random_rule(rng) for _ in range(k)] for _ in range(m)]


def shared_slot_rules(rulebase: Rulebase, m: int) -> SlotRules:
    """Every slot chooses from the same rulebase."""
    return [list(rulebase) for _ in range(m)]


# ---------------------------------------------------------------------------
# Slot model


def slot_priorities(m: int, levels: int = len(PRIORITIES)) -> np.ndarray:
    """Even split of ``m`` slots over priorities ``1..levels`` (in blocks)."""
    return 1 + (np.arange(m) * levels) // m


@dataclass
class SlotModel:
    slot_priority: np.ndarray
    p: np.ndarray
    q: np.ndarray

    @classmethod
    def initial(cls, m: int, k: int, levels: int = len(PRIORITIES)) -> "SlotModel":
        return cls(slot_priorities(m, levels), np.full(m, 0.5), np.full((m, k), 1.0 / k))

    @property
    def m(self) -> int:
        return len(self.p)

    @property
    def k(self) -> int:
        return self.q.shape[1]

    def params(self):
        return (self.p, self.q)

    def with_params(self, params) -> "SlotModel":
        return SlotModel(self.slot_priority, params[0], params[1])


@dataclass
class SlotSample:
    """One draw from the slot model: fill bits, per-slot rule choices, and
    the seed its evaluation games use."""

    fill: np.ndarray
    choice: np.ndarray
    seed: int
    policy: RulePolicy


def build_policy(model: SlotModel, rules: SlotRules, fill, choice) -> RulePolicy:
    entries = [(int(model.slot_priority[i]), rules[i][int(choice[i])])
               for i in range(model.m) if fill[i]]
    return RulePolicy(tuple(entries))


def draw_slots(model: SlotModel, rules: SlotRules, rng: np.random.Generator) -> SlotSample:
    fill = ce.sample_bernoulli(model.p, rng)
    choice = ce.sample_categorical(model.q, rng)
    seed = int(rng.integers(2 ** 32))
    return SlotSample(fill, choice, seed, build_policy(model, rules, fill, choice))


def sample_policy(model: SlotModel, rules: SlotRules, rng: np.random.Generator) -> RulePolicy:
    """Fill slot i with probability p_i; a filled slot takes rule j with
    probability q_ij and contributes ``(slot_priority_i, rule)``."""
    if len(rules) != model.m or any(len(r) != model.k for r in rules):
        raise ValueError("rules shape does not match the slot model")
    return draw_slots(model, rules, rng).policy


def mode_policy(model: SlotModel, rules: SlotRules) -> RulePolicy:
    """Slots with p > 1/2, each taking its most probable rule."""
    return build_policy(model, rules, model.p > 0.5, model.q.argmax(axis=1))


def is_converged(model: SlotModel, tol: float = ce.CONVERGED_TOL) -> bool:
    if not ce.is_converged_bernoulli(model.p, tol):
        return False
    used = model.p >= 1 - tol
    return bool(np.all(ce.is_one_hot(model.q[used], tol))) if used.any() else True


# ---------------------------------------------------------------------------
# Evaluation


@dataclass
class PolicyEvaluation:
    mean: float
    scores: List[int]
    fired: set = field(default_factory=set)

    @property
    def high(self) -> int:
        return max(self.scores)


def evaluate_policy(policy: RulePolicy, games: int, maze: Optional[Maze] = None,
                    tick_limit: int = DEFAULT_TICK_LIMIT, seed: int = 0,
                    config: Optional[GameConfig] = None) -> PolicyEvaluation:
    """Mean score of ``games`` episodes with per-game seeds derived from
    ``seed``.  ``fired`` holds the policy entries that fired in any game."""
    if games < 1:
        raise ValueError("games must be >= 1")
    maze = maze or default_maze()
    scores, fired = [], set()
    for s in derive_seeds(seed, games):
        ctrl = RuleController(policy)
        scores.append(play_episode(maze, ctrl, s, tick_limit, config, record=False).score)
        fired |= ctrl.fired
    return PolicyEvaluation(float(np.mean(scores)), scores, fired)


def baseline_random_policy(rulebase: Rulebase, rng: np.random.Generator,
                           n_rules: int = 10) -> RulePolicy:
    """``n_rules`` distinct rules drawn without replacement, each with a
    uniform random priority."""
    if len(rulebase) < n_rules:
        raise ValueError(f"rulebase has {len(rulebase)} rules, need at least {n_rules}")
    picks = rng.choice(len(rulebase), size=n_rules, replace=False)
    prios = rng.integers(1, len(PRIORITIES) + 1, size=n_rules)
    return RulePolicy(tuple((int(p), rulebase[int(i)]) for i, p in zip(picks, prios)))


def evaluate_random_baseline(rulebase: Rulebase, games: int, maze: Optional[Maze] = None,
                             tick_limit: int = DEFAULT_TICK_LIMIT, seed: int = 0,
                             config: Optional[GameConfig] = None):
    """Play ``games`` games, each with a freshly drawn random policy.

    Returns ``(scores, effective_rule_counts)``.
    """
    rng = np.random.default_rng(seed)
    maze = maze or default_maze()
    scores, counts = [], []
    for s in derive_seeds(seed, games):
        ctrl = RuleController(baseline_random_policy(rulebase, rng))
        scores.append(play_episode(maze, ctrl, s, tick_limit, config, record=False).score)
        counts.append(len(ctrl.fired))
    return scores, counts


# ---------------------------------------------------------------------------
# Configuration


@dataclass
class ExperimentConfig:
    rulebase: str = "handcoded"      # handcoded | random
    slots: int = 30
    rules_per_slot: int = 100        # random rulebase only; handcoded uses all 40
    priorities: int = 3
    population: int = 300
    rho: float = 0.05
    alpha: float = 0.6
    beta: float = 0.98
    iterations: int = 300
    games_per_evaluation: int = 3
    test_games: int = 50
    parallel_runs: int = 10
    tick_limit: int = DEFAULT_TICK_LIMIT
    maze: str = "default"
    seed: int = 0
    edible_duration: int = 80
    pen_delay: int = 10

    def __post_init__(self):
        if self.rulebase not in ("handcoded", "random"):
            raise ValueError(f"rulebase must be 'handcoded' or 'random', got {self.rulebase!r}")
        for name in ("slots", "rules_per_slot", "priorities", "population", "iterations",
                     "games_per_evaluation", "test_games", "parallel_runs", "tick_limit",
                     "edible_duration", "pen_delay"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.rho <= 1 or not 0 < self.alpha <= 1 or not 0 < self.beta <= 1:
            raise ValueError("rho, alpha and beta must lie in (0, 1]")
        if self.rho * self.population < 1 - 1e-9:
            raise ValueError("rho * population must be >= 1")
        if self.priorities > len(PRIORITIES):
            raise ValueError(f"at most {len(PRIORITIES)} priority levels are supported")

    @property
    def game_config(self) -> GameConfig:
        return GameConfig(edible_duration=self.edible_duration, pen_delay=self.pen_delay)

    def load_maze(self) -> Maze:
        return maze_from_spec(self.maze)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_text(self) -> str:
        return "".join(f"{f.name} = {getattr(self, f.name)}\n" for f in dataclasses.fields(self))

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        """Flat ``key = value`` lines; ``#`` comments; unset keys keep defaults."""
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        kwargs = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            s = line.split("#", 1)[0].strip()
            if not s:
                continue
            if "=" not in s:
                raise ValueError(f"line {lineno}: expected key = value")
            key, value = (t.strip() for t in s.split("=", 1))
            if key not in types:
                raise ValueError(f"line {lineno}: unknown key {key!r}")
            kind = types[key]
            kwargs[key] = int(value) if kind == "int" else float(value) if kind == "float" else value
        return cls(**kwargs)

    @classmethod
    def read(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_text(fh.read())


def full_config(rulebase: str = "handcoded", **changes) -> ExperimentConfig:
    if rulebase == "random":
        base = ExperimentConfig(rulebase="random", slots=90, rules_per_slot=100,
                                population=1000)
    else:
        base = ExperimentConfig()
    return base.replace(**changes)


def desk_config(**changes) -> ExperimentConfig:
    return ExperimentConfig(population=100, iterations=50, test_games=20,
                            parallel_runs=5).replace(**changes)


# ---------------------------------------------------------------------------
# Training


@dataclass
class RunRecord:
    config: ExperimentConfig
    history: List[ce.IterationLog]
    learned_policy: RulePolicy
    learned_source: str                  # "converged" or "best"
    best_policy: RulePolicy
    best_value: float
    mode_policy: RulePolicy
    converged: bool
    converged_at: Optional[int]
    test_scores: List[int]
    effective_rules: int
    first_population_mean: float
    model: SlotModel

    @property
    def test_mean(self) -> float:
        return float(np.mean(self.test_scores))

    @property
    def rule_count(self) -> int:
        return len(self.learned_policy)


def slot_rules_for(config: ExperimentConfig, rng: np.random.Generator) -> SlotRules:
    if config.rulebase == "handcoded":
        return shared_slot_rules(handcoded_rulebase(), config.slots)
    return random_rulebase(config.slots, config.rules_per_slot, rng)


def train(config: ExperimentConfig, progress=None) -> RunRecord:
    """One CE learning run followed by ``config.test_games`` test games.

    ``progress(iteration, model, log)`` is called after every iteration.
    """
    rng = np.random.default_rng(config.seed)
    maze = config.load_maze()
    game_cfg = config.game_config
    rules = slot_rules_for(config, rng)
    model = SlotModel.initial(config.slots, len(rules[0]), config.priorities)
    k = model.k

    def sampler(params, r):
        return draw_slots(model.with_params(params), rules, r)

    def evaluator(sample: SlotSample) -> float:
        return evaluate_policy(sample.policy, config.games_per_evaluation, maze,
                               config.tick_limit, sample.seed, game_cfg).mean

    def updater(elite):
        return (ce.bernoulli_update([s.fill for s in elite]),
                ce.categorical_update([s.choice for s in elite], k))

    def post(params):
        return (ce.decay_slot_probabilities(params[0], config.beta), params[1])

    def stop(params):
        return is_converged(model.with_params(params))

    def on_iteration(t, params, log):
        if progress is not None:
            progress(t, model.with_params(params), log)

    result = ce.ce_optimize(sampler, evaluator, updater, model.params(), config.population,
                            config.rho, config.alpha, config.iterations, rng,
                            post_update=post, stop=stop, on_iteration=on_iteration,
                            keep_params=False)
    if result.error is not None:
        raise result.error
    final = model.with_params(result.params)
    converged = result.stopped_early or is_converged(final)
    converged_at = len(result.history) - 1 if converged else None
    if converged:
        learned = build_policy(final, rules, final.p >= 0.5, final.q.argmax(axis=1))
        source = "converged"
    else:
        learned = result.best_candidate.policy
        source = "best"
    test_seed = int(rng.integers(2 ** 32))
    test = evaluate_policy(learned, config.test_games, maze, config.tick_limit, test_seed,
                           game_cfg)
    return RunRecord(config, result.history, learned, source, result.best_candidate.policy,
                     result.best_value, mode_policy(final, rules), converged,
                     converged_at, test.scores, len(test.fired),
                     result.first_population_mean, final)


def run_seeds(config: ExperimentConfig) -> List[int]:
    return derive_seeds(config.seed, config.parallel_runs)


def train_parallel_runs(config: ExperimentConfig, progress=None) -> List[RunRecord]:
    """``config.parallel_runs`` independent runs with derived seeds (run
    sequentially here; each is self-contained and could be farmed out)."""
    return [train(config.replace(seed=s), progress) for s in run_seeds(config)]


# ---------------------------------------------------------------------------
# Results table

CONDITIONS = (
    "Random rulebase + CE",
    "Hand-coded rulebase + CE",
    "Hand-coded rulebase + random rules",
    "Hand-coded policy",
    "Human play",
)


@dataclass
class ConditionResult:
    name: str
    scores: List[int]
    rule_counts: List[float] = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean(self.scores))

    @property
    def high(self) -> int:
        return int(max(self.scores))

    @property
    def mean_rules(self) -> Optional[float]:
        return float(np.mean(self.rule_counts)) if self.rule_counts else None


def condition_from_runs(name: str, records: Sequence[RunRecord]) -> ConditionResult:
    scores = [s for r in records for s in r.test_scores]
    return ConditionResult(name, scores, [r.effective_rules for r in records])


@dataclass
class ResultsTable:
    rows: List[ConditionResult]

    def to_text(self) -> str:
        width = max([len("Method")] + [len(r.name) for r in self.rows])
        lines = [f"{'Method':<{width}} | {'Mean':>8} | {'High':>6} | # of rules",
                 "-" * (width + 33)]
        for r in self.rows:
            rules = "-" if r.mean_rules is None else f"{r.mean_rules:.1f}"
            lines.append(f"{r.name:<{width}} | {r.mean:>8.1f} | {r.high:>6d} | {rules}")
        return "\n".join(lines) + "\n"

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["method", "mean", "high", "rules", "games"])
            for r in self.rows:
                w.writerow([r.name, f"{r.mean:.3f}", r.high,
                            "" if r.mean_rules is None else f"{r.mean_rules:.3f}", len(r.scores)])


def report(results: Sequence[ConditionResult]) -> ResultsTable:
    """Table rows in the canonical condition order; rows not listed there
    follow in the order given.  Empty conditions are dropped."""
    by_name: Dict[str, ConditionResult] = {}
    for r in results:
        if r.scores:
            if r.name in by_name:
                prev = by_name[r.name]
                by_name[r.name] = ConditionResult(r.name, prev.scores + r.scores,
                                                  prev.rule_counts + r.rule_counts)
            else:
                by_name[r.name] = r
    ordered = [by_name.pop(n) for n in CONDITIONS if n in by_name]
    return ResultsTable(ordered + list(by_name.values()))


# ---------------------------------------------------------------------------
# Run directories

CONDITION_SLUG = {
    "Random rulebase + CE": "random_rulebase_ce",
    "Hand-coded rulebase + CE": "handcoded_rulebase_ce",
    "Hand-coded rulebase + random rules": "random_rules",
    "Hand-coded policy": "handcoded_policy",
    "Human play": "human",
}


def condition_for(config: ExperimentConfig) -> str:
    return "Random rulebase + CE" if config.rulebase == "random" else "Hand-coded rulebase + CE"


def write_scores_csv(path, scores: Sequence[int], rules: Optional[Sequence[int]] = None) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["game", "score"] + (["rules"] if rules is not None else []))
        for i, s in enumerate(scores):
            w.writerow([i, s] + ([rules[i]] if rules is not None else []))


def read_scores_csv(path) -> Tuple[List[int], List[int]]:
    scores, rules = [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            scores.append(int(row["score"]))
            if row.get("rules"):
                rules.append(int(row["rules"]))
    return scores, rules


def append_scores_csv(path, scores: Sequence[int]) -> None:
    """Append scores (e.g. human sessions) to a per-game score CSV."""
    path = Path(path)
    existing = read_scores_csv(path)[0] if path.exists() else []
    write_scores_csv(path, existing + list(scores))


def write_run(record: RunRecord, directory) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    (d / "config.txt").write_text(record.config.to_text())
    (d / "condition.txt").write_text(condition_for(record.config) + "\n")
    ce.write_history_csv(record.history, d / "ce_log.csv")
    (d / "learned.rules").write_text(format_policy(record.learned_policy))
    (d / "best.rules").write_text(format_policy(record.best_policy))
    (d / "mode.rules").write_text(format_policy(record.mode_policy))
    write_scores_csv(d / "test_scores.csv", record.test_scores)
    (d / "summary.txt").write_text(
        f"learned_source = {record.learned_source}\n"
        f"converged = {record.converged}\n"
        f"converged_at = {record.converged_at}\n"
        f"best_value = {record.best_value!r}\n"
        f"first_population_mean = {record.first_population_mean!r}\n"
        f"test_mean = {record.test_mean!r}\n"
        f"effective_rules = {record.effective_rules}\n")
    return d


def write_condition(directory, name: str, scores: Sequence[int],
                    rule_counts: Optional[Sequence[int]] = None) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    (d / "condition.txt").write_text(name + "\n")
    write_scores_csv(d / "test_scores.csv", scores, rule_counts)
    return d


def collect_results(directory) -> List[ConditionResult]:
    """Every subdirectory (or the directory itself) holding a
    ``condition.txt`` and ``test_scores.csv`` contributes one result."""
    root = Path(directory)
    found = []
    candidates = [root] + sorted(p for p in root.rglob("*") if p.is_dir())
    for d in candidates:
        cond, scores_path = d / "condition.txt", d / "test_scores.csv"
        if not (cond.exists() and scores_path.exists()):
            continue
        name = cond.read_text().strip()
        scores, rules = read_scores_csv(scores_path)
        summary = d / "summary.txt"
        if summary.exists():
            for line in summary.read_text().splitlines():
                if line.startswith("effective_rules"):
                    rules = [int(line.split("=")[1])]
        found.append(ConditionResult(name, scores, rules))
    return found
