"""The nine scalar observations and the distance machinery behind them.

Ghost classes used throughout:

* *dangerous* ghosts: out of the pen and not edible (NearestGhost,
  junction safety);
* *edible* ghosts: out of the pen and blue (NearestEdGhost);
* *active* ghosts: every ghost out of the pen (GhostCenterDist,
  GhostDensity).
"""
from __future__ import annotations

import math
from typing import NamedTuple, Sequence, Tuple

import numpy as np

from .engine import INFINITE, GameState, Maze, bfs_distances

DENSITY_RADIUS = 10


class ObservationVector(NamedTuple):
    Constant: float
    NearestDot: float
    NearestPowerDot: float
    NearestGhost: float
    NearestEdGhost: float
    MaxJunctionSafety: float
    GhostCenterDist: float
    DotCenterDist: float
    GhostDensity: float


OBSERVATION_NAMES = ObservationVector._fields


def distance_field(maze: Maze, sources) -> np.ndarray:
    """Breadth-first step distances from the nearest of ``sources``.

    Walls and unreachable cells hold ``INFINITE``.
    """
    return np.array(bfs_distances(maze.neighbors, maze.n_cells, list(sources)), dtype=np.int32)


def dangerous_ghosts(state: GameState) -> list:
    return [g.position for g in state.ghosts if not g.in_pen and not g.edible]


def edible_ghosts(state: GameState) -> list:
    return [g.position for g in state.ghosts if not g.in_pen and g.edible]


def active_ghosts(state: GameState) -> list:
    return [g.position for g in state.ghosts if not g.in_pen]


def nearest_distance(maze: Maze, cell: int, targets: Sequence[int]) -> int:
    if not targets:
        return INFINITE
    row = maze.dist_rows[cell]
    return min(row[t] for t in targets)


def nearest_dot_distance(state: GameState, cell: int) -> int:
    if state.dots_left == 0:
        return INFINITE
    return int(state.maze.dist[cell][state.dots].min())


def power_dot_cells(state: GameState) -> list:
    if state.power_left == 0:
        return []
    return np.flatnonzero(state.power_dots).tolist()


def junction_safety_per_direction(state: GameState) -> Tuple[float, float, float, float]:
    """Safety of the first junction reached by walking each direction.

    Safety is (nearest dangerous ghost's distance to the junction) minus
    (Pac-Man's walking distance to it), so positive means Pac-Man gets there
    first.  A wall or a corridor with no junction ahead scores
    ``-INFINITE``; with no dangerous ghost out, a reachable junction scores
    ``+INFINITE``.
    """
    maze = state.maze
    ghosts = dangerous_ghosts(state)
    out = []
    for ahead in maze.junction_ahead[state.pacman]:
        if ahead is None:
            out.append(-INFINITE)
            continue
        junction, n = ahead
        if not ghosts:
            out.append(INFINITE)
            continue
        k = nearest_distance(maze, junction, ghosts)
        out.append(INFINITE if k >= INFINITE else k - n)
    return tuple(out)


def ghost_density_at(state: GameState, cell: int) -> float:
    row = state.maze.dist_rows[cell]
    total = 0.0
    for g in state.ghosts:
        if not g.in_pen:
            d = row[g.position]
            if d < DENSITY_RADIUS:
                total += (DENSITY_RADIUS - d) / DENSITY_RADIUS
    return total


def ghost_center(state: GameState):
    """Arithmetic mean (x, y) of active ghost cells, or None."""
    ghosts = active_ghosts(state)
    if not ghosts:
        return None
    w = state.maze.width
    return (sum(c % w for c in ghosts) / len(ghosts),
            sum(c // w for c in ghosts) / len(ghosts))


def euclid_from(maze: Maze, cell: int, center) -> float:
    return math.hypot(cell % maze.width - center[0], cell // maze.width - center[1])


def _dot_center_dist(state: GameState) -> float:
    if not state.dots_left:
        return 0.0
    maze, pac = state.maze, state.pacman
    return math.hypot(pac % maze.width - state.dot_sum_x / state.dots_left,
                      pac // maze.width - state.dot_sum_y / state.dots_left)


def _ghost_center_dist(state: GameState) -> float:
    center = ghost_center(state)
    return float(INFINITE) if center is None else euclid_from(state.maze, state.pacman, center)


def _nearest_of(cells, state: GameState) -> float:
    row = state.maze.dist_rows[state.pacman]
    return float(min((row[c] for c in cells), default=INFINITE))


_FIELDS = (
    lambda s: 1.0,
    lambda s: float(nearest_dot_distance(s, s.pacman)),
    lambda s: _nearest_of(power_dot_cells(s), s),
    lambda s: _nearest_of(dangerous_ghosts(s), s),
    lambda s: _nearest_of(edible_ghosts(s), s),
    lambda s: float(max(junction_safety_per_direction(s))),
    _ghost_center_dist,
    _dot_center_dist,
    lambda s: ghost_density_at(s, s.pacman),
)


def observe(state: GameState) -> ObservationVector:
    return ObservationVector(*(f(state) for f in _FIELDS))


class LazyObservation:
    """Index-compatible stand-in for :class:`ObservationVector` that only
    computes the entries it is asked for."""

    __slots__ = ("state", "_cache")

    def __init__(self, state: GameState):
        self.state = state
        self._cache = {}

    def __getitem__(self, i: int) -> float:
        try:
            return self._cache[i]
        except KeyError:
            v = self._cache[i] = _FIELDS[i](self.state)
            return v
