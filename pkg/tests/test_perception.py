import math

import numpy as np
import pytest

from pacman_ce.engine import INFINITE, N, default_maze, load_maze, new_game, play_episode
from pacman_ce.perception import (LazyObservation, OBSERVATION_NAMES, distance_field, ghost_center,
                                  ghost_density_at, junction_safety_per_direction, observe)
from pacman_ce.policy import ObsGreater, eval_condition
from pacman_ce.behaviors import ALL_OFF

from conftest import floyd_warshall_distances, random_maze

# Pac-Man 3 steps west of the junction above G
LINE = load_maze("\n".join([
    "###############",
    "#P............#",
    "####G##########",
    "###############"]), "line")


def place(st, cells, edible=False):
    for g, c in zip(st.ghosts, cells):
        g.in_pen, g.position, g.direction, g.edible = False, c, N, edible
    return st


def test_distance_field_basics():
    m = default_maze()
    c = m.pacman_spawn
    assert distance_field(m, [c])[c] == 0
    assert np.all(distance_field(m, []) == INFINITE)
    assert np.all(distance_field(m, [c])[m.walls] == INFINITE)


def test_distance_field_matches_floyd_warshall(rng):
    for _ in range(20):
        m = random_maze(rng, 8, 8)
        fw = floyd_warshall_distances(m)
        for src in m.walkable_cells:
            got = distance_field(m, [src])
            want = np.where(np.isinf(fw[src]), INFINITE, fw[src])
            assert np.array_equal(got[list(m.walkable_cells)],
                                  want[list(m.walkable_cells)].astype(int))


def test_multi_source_is_pointwise_min(rng):
    m = random_maze(rng, 9, 7)
    srcs = list(m.walkable_cells[:3])
    assert np.array_equal(distance_field(m, srcs),
                          np.min([distance_field(m, [s]) for s in srcs], axis=0))


def test_junction_safety_six():
    st = new_game(LINE)
    place(st, [LINE.cell(13, 1)])
    j = LINE.cell(4, 1)
    assert distance_field(LINE, [LINE.cell(13, 1)])[j] == 9
    assert distance_field(LINE, [LINE.pacman_spawn])[j] == 3
    n, e, s, w = junction_safety_per_direction(st)
    assert e == 6
    assert n == s == w == -INFINITE
    assert observe(st).MaxJunctionSafety == 6


def test_junction_safety_without_ghosts():
    st = new_game(LINE)
    assert junction_safety_per_direction(st)[1] == INFINITE


def test_edible_ghosts_do_not_threaten_junctions():
    st = place(new_game(LINE), [LINE.cell(5, 1)], edible=True)
    assert junction_safety_per_direction(st)[1] == INFINITE


def test_density():
    st = new_game(LINE)
    pac = LINE.pacman_spawn
    assert ghost_density_at(st, pac) == 0.0
    place(st, [pac])
    assert ghost_density_at(st, pac) == 1.0
    assert ghost_density_at(place(new_game(LINE), [LINE.cell(11, 1)]), pac) == 0.0
    st = place(new_game(LINE), [LINE.cell(6, 1), LINE.cell(9, 1)])
    d = distance_field(LINE, [pac])
    assert (d[LINE.cell(6, 1)], d[LINE.cell(9, 1)]) == (5, 8)
    assert ghost_density_at(st, pac) == pytest.approx(0.7)


def test_observe_fresh_game():
    st = new_game(default_maze())
    obs = observe(st)
    assert obs._fields == OBSERVATION_NAMES
    assert obs.Constant == 1.0
    assert obs.NearestDot == 1
    assert obs.NearestGhost == INFINITE
    assert obs.NearestEdGhost == INFINITE
    assert obs.GhostCenterDist == INFINITE
    assert obs.GhostDensity == 0.0
    assert eval_condition((ObsGreater("NearestEdGhost", 99),), obs, ALL_OFF)


def test_nearest_edible_ghost_bounded_on_default_maze():
    m = default_maze()
    worst = 0
    for c in m.walkable_cells[::3]:
        st = place(new_game(m), [c], edible=True)
        worst = max(worst, observe(st).NearestEdGhost)
    assert 0 < worst <= 41


def test_dot_center():
    m = default_maze()
    st = new_game(m)
    ys, xs = np.nonzero(m.dots.reshape(m.height, m.width))
    px, py = m.xy(st.pacman)
    assert observe(st).DotCenterDist == pytest.approx(math.hypot(px - xs.mean(), py - ys.mean()))
    st.dots[:] = False
    st.dots_left = 0
    assert observe(st).DotCenterDist == 0.0
    assert observe(st).NearestDot == INFINITE


def test_ghost_center():
    st = place(new_game(LINE), [LINE.cell(5, 1), LINE.cell(9, 1)])
    assert ghost_center(st) == (7.0, 1.0)
    assert observe(st).GhostCenterDist == pytest.approx(6.0)


def test_observe_is_pure():
    st = new_game(default_maze())
    snap = st.snapshot()
    observe(st)
    assert st.snapshot() == snap


def test_lazy_observation_matches_full_vector():
    m = default_maze()
    res = play_episode(m, lambda s, r: r.choice(m.pacman_moves[s.pacman]), 4, 150)
    st = res.final_state
    lazy = LazyObservation(st)
    assert [lazy[i] for i in range(9)] == list(observe(st))
