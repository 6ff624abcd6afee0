import random
from collections import Counter

import numpy as np

from pacman_ce import behaviors
from pacman_ce.behaviors import ALL_OFF, ActionModule, ModuleActivations, arbitrate, preferred_directions
from pacman_ce.engine import E, N, S, W, default_maze, load_maze, new_game, play_episode
from pacman_ce.perception import distance_field

SHAFT = load_maze("\n".join(["###", "#.#", "#P#", "# #", "#G#", "###"]), "shaft")
CROSS = load_maze("\n".join([
    "#######",
    "###.###",
    "###.###",
    "#..P..#",
    "###.###",
    "###G###",
    "#######"]), "cross")


def on(**levels):
    return ModuleActivations(**levels)


def put_ghost(st, cell, edible=False):
    g = st.ghosts[0]
    g.in_pen, g.position, g.edible = False, cell, edible
    return st


def test_to_dot_single_dot_north():
    st = new_game(SHAFT)
    assert preferred_directions(ActionModule.ToDot, st, (N, S)) == (N,)


def test_keep_direction_turns_right_then_left():
    st = new_game(CROSS)
    st.pacman_dir = E
    assert preferred_directions(ActionModule.KeepDirection, st, (N, S)) == (S,)
    assert preferred_directions(ActionModule.KeepDirection, st, (N, W)) == (N,)
    assert preferred_directions(ActionModule.KeepDirection, st, (E, N)) == (E,)


def test_vacuous_modules_keep_all_candidates():
    st = new_game(CROSS)
    for m in (ActionModule.FromGhost, ActionModule.ToEdGhost, ActionModule.FromGhostCenter,
              ActionModule.ToGhostFreeArea, ActionModule.ToPowerDot):
        assert preferred_directions(m, st, (N, E, S, W)) == (N, E, S, W)


def test_from_ghost_and_to_edible_ghost():
    st = put_ghost(new_game(CROSS), CROSS.cell(1, 3))
    assert W not in preferred_directions(ActionModule.FromGhost, st, (N, E, S, W))
    st.ghosts[0].edible = True
    assert preferred_directions(ActionModule.ToEdGhost, st, (N, E, S, W)) == (W,)


def test_ghost_free_area_heads_for_max_clearance():
    m = default_maze()
    st = put_ghost(new_game(m), m.cell(1, 1))
    clearance = distance_field(m, [m.cell(1, 1)])
    target = int(np.argmax(np.where(m.walkable, clearance, -1)))
    pref = preferred_directions(ActionModule.ToGhostFreeArea, st, m.pacman_moves[st.pacman])
    here = m.dist_rows[target][st.pacman]
    assert all(m.dist_rows[target][m.neighbors[st.pacman][d]] == here - 1 for d in pref)


def test_safe_junction_prefers_highest_safety():
    st = put_ghost(new_game(CROSS), CROSS.cell(1, 3))
    # the ghost sits west; no junction ahead in any direction from the hub
    assert preferred_directions(ActionModule.ToSafeJunction, st, (N, E, S, W)) == (N, E, S, W)


def test_lower_density_moves_away():
    st = put_ghost(new_game(CROSS), CROSS.cell(1, 3))
    assert preferred_directions(ActionModule.ToLowerGhostDensity, st, (E, W)) == (E,)


def test_one_module_decides():
    st = new_game(SHAFT)
    assert arbitrate(on(ToDot=1), st, random.Random(0)) == N


def test_cascade_two_levels(monkeypatch):
    prefs = {ActionModule.ToDot: (N, E), ActionModule.FromGhost: (E, S)}
    monkeypatch.setattr(behaviors, "preferred_directions",
                        lambda m, st, c: tuple(d for d in c if d in prefs[m]))
    st = new_game(CROSS)
    assert arbitrate(on(ToDot=1, FromGhost=2), st, random.Random(0)) == E


def test_conflicting_equal_priority_vote_is_skipped(monkeypatch):
    prefs = {ActionModule.ToDot: (N,), ActionModule.FromGhost: (S,)}
    monkeypatch.setattr(behaviors, "preferred_directions",
                        lambda m, st, c: tuple(d for d in c if d in prefs[m]))
    st = new_game(CROSS)
    assert arbitrate(on(ToDot=1, FromGhost=1), st, random.Random(0)) == N
    # the lower-id module goes first, so swapping priorities flips the outcome
    assert arbitrate(on(ToDot=2, FromGhost=1), st, random.Random(0)) == S


def test_no_modules_uniform():
    st = new_game(CROSS)
    rng = random.Random(3)
    counts = Counter(arbitrate(ALL_OFF, st, rng) for _ in range(8000))
    assert set(counts) == {N, E, S, W}
    assert all(abs(c / 8000 - 0.25) < 0.02 for c in counts.values())


def test_arbitration_always_legal():
    m = default_maze()
    acts = [ModuleActivations(*np.random.default_rng(i).integers(0, 4, 10)) for i in range(30)]

    def ctrl(st, r):
        act = acts[st.tick_index % len(acts)]
        d = arbitrate(act, st, r)
        assert d in m.pacman_moves[st.pacman]
        return d

    for seed in range(3):
        play_episode(m, ctrl, seed, tick_limit=600, record=False)


def test_activations_helpers():
    act = on(FromGhost=1, KeepDirection=3)
    assert act.is_on(ActionModule.FromGhost) and not act.is_on(ActionModule.ToDot)
    assert act.switched_on() == [(ActionModule.FromGhost, 1), (ActionModule.KeepDirection, 3)]
    assert [m.name for m in ActionModule][:2] == ["ToDot", "ToPowerDot"]
