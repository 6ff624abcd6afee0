"""Pac-Man simulator: maze parsing, game state, ghost controller, ticks and
episodes.

Cells are addressed by a flat index ``y * width + x``.  Directions are the
integers ``N, E, S, W = 0, 1, 2, 3``; ``(d + 2) % 4`` is the reverse and
``(d + 1) % 4`` the right turn.
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

N, E, S, W = 0, 1, 2, 3
DIRECTIONS = (N, E, S, W)
DIR_NAMES = "NESW"
DX = (0, 1, 0, -1)
DY = (-1, 0, 1, 0)

INFINITE = 999

RUNNING, CLEARED, GAME_OVER = "running", "cleared", "game_over"

WALL, DOT, POWER, EMPTY, PAC, GHOST = "#", ".", "o", " ", "P", "G"
MAZE_CHARS = frozenset(WALL + DOT + POWER + EMPTY + PAC + GHOST)

GHOST_POINTS = (200, 400, 800, 1600)
MAX_CHAIN = GHOST_POINTS[-1]


def reverse(d: int) -> int:
    return (d + 2) % 4


def dir_from_name(name: str) -> int:
    try:
        return DIR_NAMES.index(name.strip().upper())
    except ValueError:
        raise ValueError(f"unknown direction {name!r}") from None


# ---------------------------------------------------------------------------
# Maze


class MazeParseError(ValueError):
    """Base class for maze-format errors."""


class MalformedCharacterError(MazeParseError):
    pass


class RaggedMazeError(MazeParseError):
    pass


class NoWalkableCellsError(MazeParseError):
    pass


class SpawnCountError(MazeParseError):
    pass


class DisconnectedMazeError(MazeParseError):
    pass


def bfs_distances(neighbors: Sequence[Sequence[int]], n_cells: int,
                  sources: Sequence[int]) -> List[int]:
    """Multi-source BFS over an adjacency table (``-1`` marks no edge)."""
    dist = [INFINITE] * n_cells
    queue = deque()
    for s in sources:
        if dist[s] != 0:
            dist[s] = 0
            queue.append(s)
    while queue:
        c = queue.popleft()
        nd = dist[c] + 1
        for nb in neighbors[c]:
            if nb >= 0 and dist[nb] > nd:
                dist[nb] = nd
                queue.append(nb)
    return dist


class Maze:
    """Parsed maze plus the lookup tables the simulator and perception need.

    ``dist`` holds all-pairs corridor distances (``INFINITE`` for walls and
    unreachable pairs) both as a numpy array and as nested lists
    (``dist_rows``) for fast scalar access.
    """

    def __init__(self, rows: Sequence[str], name: str = "maze"):
        self.name = name
        self.rows = tuple(rows)
        self.height = len(rows)
        self.width = len(rows[0])
        self.n_cells = self.width * self.height
        flat = "".join(rows)
        self.walls = np.array([ch == WALL for ch in flat], dtype=bool)
        self.dots = np.array([ch == DOT for ch in flat], dtype=bool)
        self.power_dots = np.array([ch == POWER for ch in flat], dtype=bool)
        self.pacman_spawn = flat.index(PAC)
        self.ghost_spawn = flat.index(GHOST)
        self.xs = np.arange(self.n_cells) % self.width
        self.ys = np.arange(self.n_cells) // self.width
        self.walkable = ~self.walls
        self.walkable_cells = tuple(int(c) for c in np.flatnonzero(self.walkable))

        nbrs = []
        for c in range(self.n_cells):
            if self.walls[c]:
                nbrs.append((-1, -1, -1, -1))
                continue
            x, y = c % self.width, c // self.width
            row = []
            for d in DIRECTIONS:
                nx, ny = x + DX[d], y + DY[d]
                ok = 0 <= nx < self.width and 0 <= ny < self.height
                nc = ny * self.width + nx
                row.append(nc if ok and not self.walls[nc] else -1)
            nbrs.append(tuple(row))
        self.neighbors: Tuple[Tuple[int, int, int, int], ...] = tuple(nbrs)
        self.pacman_moves = tuple(
            tuple(d for d in DIRECTIONS if nbrs[c][d] >= 0) for c in range(self.n_cells))
        self.junctions = frozenset(c for c in self.walkable_cells
                                   if len(self.pacman_moves[c]) >= 3)
        # ghost_moves[c][heading] -> ((d, next_cell), ...) without reversal
        gm = []
        for c in range(self.n_cells):
            per = []
            for h in DIRECTIONS:
                opts = tuple((d, nbrs[c][d]) for d in DIRECTIONS
                             if nbrs[c][d] >= 0 and d != reverse(h))
                if not opts:
                    opts = tuple((d, nbrs[c][d]) for d in DIRECTIONS if nbrs[c][d] >= 0)
                per.append(opts)
            gm.append(tuple(per))
        self.ghost_moves = tuple(gm)

        self._validate_connected()
        self.dist_rows = [bfs_distances(self.neighbors, self.n_cells, [c])
                          if not self.walls[c] else [INFINITE] * self.n_cells
                          for c in range(self.n_cells)]
        self.dist = np.array(self.dist_rows, dtype=np.int32)
        self.junction_ahead = tuple(
            tuple(self._walk_to_junction(c, d) for d in DIRECTIONS)
            for c in range(self.n_cells))

    def _validate_connected(self):
        reach = bfs_distances(self.neighbors, self.n_cells, [self.pacman_spawn])
        lost = [c for c in self.walkable_cells if reach[c] >= INFINITE]
        if lost:
            x, y = self.xy(lost[0])
            raise DisconnectedMazeError(
                f"{len(lost)} walkable cell(s) unreachable from the Pac-Man spawn, e.g. ({x}, {y})")

    def _walk_to_junction(self, start: int, d: int) -> Optional[Tuple[int, int]]:
        nxt = self.neighbors[start][d]
        if nxt < 0:
            return None
        prev, cur, steps = start, nxt, 1
        while cur not in self.junctions:
            onward = [nb for nb in self.neighbors[cur] if nb >= 0 and nb != prev]
            if len(onward) != 1 or steps > self.n_cells:
                return None
            prev, cur = cur, onward[0]
            steps += 1
        return cur, steps

    def cell(self, x: int, y: int) -> int:
        return y * self.width + x

    def xy(self, cell: int) -> Tuple[int, int]:
        return cell % self.width, cell // self.width

    def __repr__(self):
        return (f"Maze({self.name!r}, {self.width}x{self.height}, "
                f"dots={int(self.dots.sum())}, power_dots={int(self.power_dots.sum())})")


def load_maze(text: str, name: str = "maze") -> Maze:
    """Parse an ASCII maze document.

    ``#`` wall, ``.`` dot, ``o`` power dot, space empty corridor, ``P``
    Pac-Man spawn and ``G`` ghost spawn (the pen exit).  Lines must all have
    the same width; trailing blank lines are ignored.
    """
    lines = text.split("\n")
    while lines and not lines[-1].strip():
        lines.pop()
    lines = [ln.rstrip("\r") for ln in lines]
    if not lines:
        raise NoWalkableCellsError("empty maze document")
    width = len(lines[0])
    for i, ln in enumerate(lines):
        bad = set(ln) - MAZE_CHARS
        if bad:
            raise MalformedCharacterError(
                f"line {i + 1}: unexpected character(s) {''.join(sorted(bad))!r}")
        if len(ln) != width:
            raise RaggedMazeError(f"line {i + 1} has width {len(ln)}, expected {width}")
    flat = "".join(lines)
    if all(ch == WALL for ch in flat):
        raise NoWalkableCellsError("maze has no walkable cells")
    for ch, what in ((PAC, "Pac-Man spawn"), (GHOST, "ghost spawn")):
        count = flat.count(ch)
        if count != 1:
            kind = "duplicate" if count > 1 else "missing"
            raise SpawnCountError(f"{kind} {what}: found {count} {ch!r}, expected 1")
    return Maze(lines, name)


BUNDLED_MAZES = ("default", "small")
_bundled: dict = {}


def bundled_maze(name: str) -> Maze:
    """A maze shipped with the package, cached.  ``small`` is an 11x9
    layout for quick experiments."""
    if name not in BUNDLED_MAZES:
        raise ValueError(f"no bundled maze {name!r}; choose from {BUNDLED_MAZES}")
    if name not in _bundled:
        text = resources.files("pacman_ce").joinpath(f"data/{name}.maze").read_text()
        _bundled[name] = load_maze(text, name)
    return _bundled[name]


def default_maze() -> Maze:
    """The bundled 21x21 maze (174 dots, 4 corner power dots)."""
    return bundled_maze("default")


def maze_from_spec(spec) -> Maze:
    """Bundled maze by name, or a maze file by path; None means default."""
    if spec is None or str(spec) in BUNDLED_MAZES:
        return bundled_maze(spec or "default")
    return read_maze(spec)


def read_maze(path) -> Maze:
    with open(path) as fh:
        return load_maze(fh.read(), str(path))


# ---------------------------------------------------------------------------
# Game state


@dataclass(frozen=True)
class GameConfig:
    edible_duration: int = 80
    pen_delay: int = 10
    initial_lives: int = 3
    extra_life_score: int = 10000
    ghost_random_prob: float = 0.2
    n_ghosts: int = 4


DEFAULT_CONFIG = GameConfig()


@dataclass
class GhostState:
    position: int
    direction: int = N
    edible: bool = False
    in_pen: bool = True
    release_at: int = 0

    def copy(self) -> "GhostState":
        return GhostState(self.position, self.direction, self.edible, self.in_pen, self.release_at)


@dataclass
class GameState:
    maze: Maze
    config: GameConfig
    dots: np.ndarray
    power_dots: np.ndarray
    dots_left: int
    power_left: int
    pacman: int
    pacman_dir: int
    ghosts: List[GhostState]
    score: int = 0
    lives: int = 3
    edible_timer: int = 0
    ghost_chain_value: int = 200
    tick_index: int = 0
    extra_life_granted: bool = False
    status: str = RUNNING
    deaths: int = 0
    dot_sum_x: int = 0
    dot_sum_y: int = 0

    def copy(self) -> "GameState":
        return GameState(self.maze, self.config, self.dots.copy(), self.power_dots.copy(),
                         self.dots_left, self.power_left, self.pacman, self.pacman_dir,
                         [g.copy() for g in self.ghosts], self.score, self.lives,
                         self.edible_timer, self.ghost_chain_value, self.tick_index,
                         self.extra_life_granted, self.status, self.deaths,
                         self.dot_sum_x, self.dot_sum_y)

    def snapshot(self) -> tuple:
        """Hashable summary used for equality checks in tests."""
        return (self.dots.tobytes(), self.power_dots.tobytes(), self.pacman, self.pacman_dir,
                tuple((g.position, g.direction, g.edible, g.in_pen, g.release_at)
                      for g in self.ghosts),
                self.score, self.lives, self.edible_timer, self.ghost_chain_value,
                self.tick_index, self.extra_life_granted, self.status, self.deaths)


class GameOverError(RuntimeError):
    pass


class TickEvents(NamedTuple):
    """Events of one tick as ``(kind, points)`` pairs."""

    events: Tuple[Tuple[str, int], ...]

    @property
    def points(self) -> int:
        return sum(p for _, p in self.events)

    def kinds(self) -> List[str]:
        return [k for k, _ in self.events]


DOT_EATEN, POWER_EATEN, GHOST_EATEN = "dot_eaten", "power_dot_eaten", "ghost_eaten"
LIFE_LOST, EXTRA_LIFE, LEVEL_CLEARED = "life_lost", "extra_life", "level_cleared"


def _penned_ghosts(maze: Maze, config: GameConfig, now: int) -> List[GhostState]:
    return [GhostState(maze.ghost_spawn, N, False, True, now + config.pen_delay * (i + 1))
            for i in range(config.n_ghosts)]


def new_game(maze: Maze, seed: int = 0, config: Optional[GameConfig] = None) -> GameState:
    """Fresh game.  The initial state is deterministic; ``seed`` is accepted
    for symmetry with :func:`play_episode` and does not alter it."""
    config = config or DEFAULT_CONFIG
    dots = maze.dots.copy()
    dot_cells = np.flatnonzero(dots)
    return GameState(
        maze=maze, config=config, dots=dots, power_dots=maze.power_dots.copy(),
        dots_left=int(dots.sum()), power_left=int(maze.power_dots.sum()),
        pacman=maze.pacman_spawn, pacman_dir=W,
        ghosts=_penned_ghosts(maze, config, 0), lives=config.initial_lives,
        dot_sum_x=int(maze.xs[dot_cells].sum()), dot_sum_y=int(maze.ys[dot_cells].sum()))


def legal_directions(state: GameState, mover="pacman") -> Tuple[int, ...]:
    """Legal moves for Pac-Man or for ghost ``mover`` (an index).

    Ghosts may not reverse unless that is their only option.
    """
    maze = state.maze
    if mover == "pacman":
        return maze.pacman_moves[state.pacman]
    g = state.ghosts[mover]
    if g.in_pen:
        raise ValueError(f"ghost {mover} is in the pen")
    return tuple(d for d, _ in maze.ghost_moves[g.position][g.direction])


def _ghost_choice(state: GameState, g: GhostState, rng: random.Random) -> Tuple[int, bool]:
    """(direction, took_random_branch) for an active ghost."""
    opts = state.maze.ghost_moves[g.position][g.direction]
    if len(opts) == 1:
        return opts[0][0], False
    if rng.random() < state.config.ghost_random_prob:
        return opts[rng.randrange(len(opts))][0], True
    target = state.maze.dist_rows[state.pacman]
    best_d, best_v = opts[0][0], target[opts[0][1]]
    if g.edible:
        for d, nb in opts[1:]:
            if target[nb] > best_v:
                best_d, best_v = d, target[nb]
    else:
        for d, nb in opts[1:]:
            if target[nb] < best_v:
                best_d, best_v = d, target[nb]
    return best_d, False


def ghost_decide(state: GameState, ghost: int, rng: random.Random) -> int:
    """Direction for ghost ``ghost``: uniform over legal moves with the
    configured probability (0.2), else the move that shortens the path to
    Pac-Man (lengthens it when edible); ties go N, E, S, W."""
    g = state.ghosts[ghost]
    if g.in_pen:
        raise ValueError(f"ghost {ghost} is in the pen")
    return _ghost_choice(state, g, rng)[0]


def _send_all_to_pen(st: GameState) -> None:
    st.ghosts = _penned_ghosts(st.maze, st.config, st.tick_index + 1)
    st.edible_timer = 0


def _collide(st: GameState, g: GhostState, events: list) -> bool:
    """Resolve Pac-Man meeting ghost ``g``; True if Pac-Man died."""
    if g.edible:
        pts = st.ghost_chain_value
        st.score += pts
        events.append((GHOST_EATEN, pts))
        st.ghost_chain_value = min(2 * pts, MAX_CHAIN)
        g.position = st.maze.ghost_spawn
        g.direction = N
        g.edible = False
        g.in_pen = True
        g.release_at = st.tick_index + 1 + st.config.pen_delay
        return False
    st.lives -= 1
    st.deaths += 1
    events.append((LIFE_LOST, 0))
    st.pacman = st.maze.pacman_spawn
    st.pacman_dir = W
    _send_all_to_pen(st)
    if st.lives <= 0:
        st.status = GAME_OVER
    return True


def advance(st: GameState, direction: int, rng: random.Random) -> TickEvents:
    """Advance ``st`` one tick in place.  Prefer :func:`tick` unless you own
    the state."""
    if st.status != RUNNING:
        raise GameOverError(f"game is {st.status}")
    maze = st.maze
    events: list = []
    prev_cell = st.pacman

    nb = maze.neighbors[prev_cell][direction] if direction is not None else -1
    if nb >= 0:
        st.pacman = nb
        st.pacman_dir = direction
    pac = st.pacman

    if st.dots[pac]:
        st.dots[pac] = False
        st.dots_left -= 1
        st.dot_sum_x -= pac % maze.width
        st.dot_sum_y -= pac // maze.width
        st.score += 10
        events.append((DOT_EATEN, 10))
    elif st.power_dots[pac]:
        st.power_dots[pac] = False
        st.power_left -= 1
        st.score += 40
        events.append((POWER_EATEN, 40))
        st.edible_timer = st.config.edible_duration
        st.ghost_chain_value = GHOST_POINTS[0]
        for g in st.ghosts:
            if not g.in_pen:
                g.edible = True

    dead = False
    if st.dots_left == 0 and st.power_left == 0:
        events.append((LEVEL_CLEARED, 0))
        st.status = CLEARED
    else:
        for g in st.ghosts:
            if not g.in_pen and g.position == pac:
                if _collide(st, g, events):
                    dead = True
                    break

        if not dead:
            even = st.tick_index % 2 == 0
            for g in st.ghosts:
                if g.in_pen:
                    if st.tick_index >= g.release_at:
                        g.in_pen = False
                        g.position = maze.ghost_spawn
                        g.direction = N
                        if g.position == st.pacman and _collide(st, g, events):
                            break
                    continue
                if g.edible and not even:
                    continue
                old = g.position
                d, _ = _ghost_choice(st, g, rng)
                g.position = maze.neighbors[old][d]
                g.direction = d
                if g.position == st.pacman or (old == st.pacman and g.position == prev_cell):
                    if _collide(st, g, events):
                        break

    if st.edible_timer > 0 and st.status == RUNNING:
        st.edible_timer -= 1
        if st.edible_timer == 0:
            for g in st.ghosts:
                g.edible = False

    if not st.extra_life_granted and st.score >= st.config.extra_life_score:
        st.extra_life_granted = True
        if st.status == GAME_OVER:
            st.status = RUNNING
        st.lives += 1
        events.append((EXTRA_LIFE, 0))

    st.tick_index += 1
    return TickEvents(tuple(events))


def tick(state: GameState, pacman_direction: int, rng: random.Random
         ) -> Tuple[GameState, TickEvents]:
    """One time-step on a copy of ``state``."""
    if state.status != RUNNING:
        raise GameOverError(f"game is {state.status}")
    nxt = state.copy()
    events = advance(nxt, pacman_direction, rng)
    return nxt, events


# ---------------------------------------------------------------------------
# Episodes


def episode_streams(seed: int) -> Tuple[random.Random, random.Random]:
    """Independent (game, controller) random streams derived from ``seed``."""
    a, b = np.random.SeedSequence(seed).generate_state(2)
    return random.Random(int(a)), random.Random(int(b))


class TraceRecord(NamedTuple):
    tick: int
    action: Optional[int]
    pacman: int
    pacman_dir: int
    ghosts: Tuple[Tuple[int, int, bool, bool], ...]
    events: Tuple[Tuple[str, int], ...]
    score: int
    lives: int


@dataclass
class EpisodeResult:
    score: int
    status: str
    ticks: int
    seed: int
    maze: Maze
    config: GameConfig
    trace: List[TraceRecord] = field(default_factory=list)
    final_state: Optional[GameState] = None

    @property
    def actions(self) -> List[Optional[int]]:
        return [r.action for r in self.trace]


Controller = Callable[[GameState, random.Random], Optional[int]]

DEFAULT_TICK_LIMIT = 3000


def record_of(st: GameState, action, events: TickEvents) -> TraceRecord:
    return TraceRecord(st.tick_index - 1, action, st.pacman, st.pacman_dir,
                       tuple((g.position, g.direction, g.edible, g.in_pen) for g in st.ghosts),
                       events.events, st.score, st.lives)


def play_episode(maze: Maze, controller: Controller, seed: int,
                 tick_limit: int = DEFAULT_TICK_LIMIT, config: Optional[GameConfig] = None,
                 record: bool = True) -> EpisodeResult:
    """Run one game until cleared, game over, or ``tick_limit`` ticks.

    ``controller(state, rng)`` returns Pac-Man's requested direction (or
    ``None`` to stand still).  The controller receives its own stream, so
    the ghost stream depends only on ``seed`` and the chosen directions.
    """
    if tick_limit <= 0:
        raise ValueError("tick_limit must be positive")
    game_rng, ctrl_rng = episode_streams(seed)
    st = new_game(maze, seed, config)
    trace: List[TraceRecord] = []
    while st.status == RUNNING and st.tick_index < tick_limit:
        action = controller(st, ctrl_rng)
        events = advance(st, action, game_rng)
        if record:
            trace.append(record_of(st, action, events))
    return EpisodeResult(st.score, st.status, st.tick_index, seed, maze, st.config, trace, st)


def replay_actions(maze: Maze, actions: Sequence[Optional[int]], seed: int,
                   config: Optional[GameConfig] = None) -> EpisodeResult:
    """Re-simulate an episode from its recorded Pac-Man directions."""
    game_rng, _ = episode_streams(seed)
    st = new_game(maze, seed, config)
    trace: List[TraceRecord] = []
    for action in actions:
        if st.status != RUNNING:
            break
        trace.append(record_of(st, action, advance(st, action, game_rng)))
    return EpisodeResult(st.score, st.status, st.tick_index, seed, maze, st.config, trace, st)
