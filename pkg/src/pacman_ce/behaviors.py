"""Action modules as direction-preference generators, and the priority
arbitration that turns the switched-on modules into one move."""
from __future__ import annotations

import random
from enum import IntEnum
from typing import NamedTuple, Sequence, Tuple

import numpy as np

from .engine import GameState
from .perception import (dangerous_ghosts, edible_ghosts, euclid_from,
                         ghost_center, ghost_density_at, junction_safety_per_direction,
                         power_dot_cells)

PRIORITIES = (1, 2, 3)


class ActionModule(IntEnum):
    ToDot = 0
    ToPowerDot = 1
    FromPowerDot = 2
    ToEdGhost = 3
    FromGhost = 4
    ToSafeJunction = 5
    FromGhostCenter = 6
    KeepDirection = 7
    ToLowerGhostDensity = 8
    ToGhostFreeArea = 9


MODULE_NAMES = tuple(m.name for m in ActionModule)


class ModuleActivations(NamedTuple):
    """Priority of each module; 0 means switched off."""

    ToDot: int = 0
    ToPowerDot: int = 0
    FromPowerDot: int = 0
    ToEdGhost: int = 0
    FromGhost: int = 0
    ToSafeJunction: int = 0
    FromGhostCenter: int = 0
    KeepDirection: int = 0
    ToLowerGhostDensity: int = 0
    ToGhostFreeArea: int = 0

    def is_on(self, module: ActionModule) -> bool:
        return self[module] != 0

    def switched_on(self):
        return [(ActionModule(i), p) for i, p in enumerate(self) if p]


ALL_OFF = ModuleActivations()


def _best(cands: Sequence[int], scores: Sequence[float], maximize: bool) -> Tuple[int, ...]:
    target = max(scores) if maximize else min(scores)
    return tuple(d for d, s in zip(cands, scores) if s == target)


def _toward(state: GameState, cands, targets, maximize: bool):
    if not targets:
        return tuple(cands)
    maze = state.maze
    nbrs = maze.neighbors[state.pacman]
    scores = []
    for d in cands:
        row = maze.dist_rows[nbrs[d]]
        scores.append(min(row[t] for t in targets))
    return _best(cands, scores, maximize)


def preferred_directions(module: ActionModule, state: GameState,
                         candidates: Sequence[int]) -> Tuple[int, ...]:
    """Subset of ``candidates`` that best serves ``module`` (never empty)."""
    cands = tuple(candidates)
    if len(cands) <= 1:
        return cands
    maze = state.maze
    nbrs = maze.neighbors[state.pacman]

    if module == ActionModule.ToDot:
        if state.dots_left == 0:
            return cands
        cells = [nbrs[d] for d in cands]
        scores = maze.dist[cells][:, state.dots].min(axis=1)
        return _best(cands, scores.tolist(), False)
    if module == ActionModule.ToPowerDot:
        return _toward(state, cands, power_dot_cells(state), False)
    if module == ActionModule.FromPowerDot:
        return _toward(state, cands, power_dot_cells(state), True)
    if module == ActionModule.ToEdGhost:
        return _toward(state, cands, edible_ghosts(state), False)
    if module == ActionModule.FromGhost:
        return _toward(state, cands, dangerous_ghosts(state), True)
    if module == ActionModule.ToSafeJunction:
        safety = junction_safety_per_direction(state)
        return _best(cands, [safety[d] for d in cands], True)
    if module == ActionModule.FromGhostCenter:
        center = ghost_center(state)
        if center is None:
            return cands
        return _best(cands, [euclid_from(maze, nbrs[d], center) for d in cands], True)
    if module == ActionModule.KeepDirection:
        heading = state.pacman_dir
        for d in (heading, (heading + 1) % 4, (heading + 3) % 4):
            if d in cands:
                return (d,)
        return cands
    if module == ActionModule.ToLowerGhostDensity:
        return _best(cands, [ghost_density_at(state, nbrs[d]) for d in cands], False)
    if module == ActionModule.ToGhostFreeArea:
        ghosts = dangerous_ghosts(state)
        if not ghosts:
            return cands
        clearance = maze.dist[ghosts].min(axis=0)
        clearance = np.where(maze.walkable, clearance, -1)
        target = int(np.argmax(clearance))
        return _toward(state, cands, [target], False)
    raise ValueError(f"unknown module {module!r}")


def arbitrate(activations: ModuleActivations, state: GameState, rng: random.Random) -> int:
    """Priority cascade over the switched-on modules.

    Level by level (1 first), each module's preferences over the level's
    starting candidates are intersected into the running candidate set in
    module order; a vote that would empty the set is skipped.  Stops once a
    single direction is left; otherwise picks uniformly among survivors.
    """
    cands = state.maze.pacman_moves[state.pacman]
    if any(activations):
        for level in PRIORITIES:
            if len(cands) == 1:
                break
            base = cands
            for m, p in enumerate(activations):
                if p != level:
                    continue
                pref = preferred_directions(ActionModule(m), state, base)
                narrowed = tuple(d for d in cands if d in pref)
                if narrowed:
                    cands = narrowed
                    if len(cands) == 1:
                        break
    if len(cands) == 1:
        return cands[0]
    return cands[rng.randrange(len(cands))]
