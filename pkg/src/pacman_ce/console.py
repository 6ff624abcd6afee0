"""Terminal front end: rendering, human play, agent watching and replay."""
from __future__ import annotations

import sys
import time
from typing import Callable, Iterable, List, NamedTuple, Optional, TextIO

from .engine import (RUNNING, E, EpisodeResult, GameConfig, GameState, Maze, N, S,
                     W, advance, episode_streams, new_game, record_of)
from .trace import ParsedTrace, read_trace, replay_states

DEFAULT_TICK_RATE = 8.0

PACMAN_GLYPH = "C"
GHOST_GLYPH = "M"
EDIBLE_GLYPH = "W"


class RenderFrame(NamedTuple):
    grid: tuple
    status: str

    def text(self) -> str:
        return "\n".join(self.grid) + "\n" + self.status


def render(state: GameState) -> RenderFrame:
    """Character grid for ``state``.  Stacked ghosts show as a digit; ghosts
    waiting in the pen are counted in the status line."""
    maze = state.maze
    cells = []
    for c in range(maze.n_cells):
        if maze.walls[c]:
            cells.append("#")
        elif state.dots[c]:
            cells.append(".")
        elif state.power_dots[c]:
            cells.append("o")
        else:
            cells.append(" ")
    stacked = {}
    for g in state.ghosts:
        if not g.in_pen:
            stacked.setdefault(g.position, []).append(g)
    for pos, gs in stacked.items():
        if len(gs) > 1:
            cells[pos] = str(len(gs))
        else:
            cells[pos] = EDIBLE_GLYPH if gs[0].edible else GHOST_GLYPH
    cells[state.pacman] = PACMAN_GLYPH
    w = maze.width
    grid = tuple("".join(cells[r * w:(r + 1) * w]) for r in range(maze.height))
    penned = sum(g.in_pen for g in state.ghosts)
    status = (f"score {state.score}  lives {state.lives}  tick {state.tick_index}  "
              f"pen {penned}  {state.status}")
    return RenderFrame(grid, status)


CLEAR = "\x1b[H\x1b[2J"


def show(frame: RenderFrame, out: TextIO, clear: bool = True) -> None:
    out.write((CLEAR if clear else "") + frame.text() + "\n")
    out.flush()


class NonInteractiveError(RuntimeError):
    pass


KEYMAP = {"w": N, "k": N, "d": E, "l": E, "s": S, "j": S, "a": W, "h": W}


def run_session(maze: Maze, seed: int, poll_keys: Callable[[], Iterable[int]],
                draw: Callable[[GameState], None], tick_rate: float = DEFAULT_TICK_RATE,
                sleep: Callable[[float], None] = time.sleep, config: Optional[GameConfig] = None,
                max_ticks: Optional[int] = None) -> EpisodeResult:
    """Drive a game from a key source.

    ``poll_keys()`` returns the directions pressed since the previous tick
    (``None`` in the list means quit); the last one wins, and with no key
    Pac-Man keeps heading the last requested way.
    """
    game_rng, _ = episode_streams(seed)
    st = new_game(maze, seed, config)
    wanted: Optional[int] = None
    trace = []
    period = 1.0 / tick_rate if tick_rate > 0 else 0.0
    draw(st)
    while st.status == RUNNING and (max_ticks is None or st.tick_index < max_ticks):
        quit_now = False
        for key in poll_keys():
            if key is None:
                quit_now = True
            else:
                wanted = key
        if quit_now:
            break
        events = advance(st, wanted, game_rng)
        trace.append(record_of(st, wanted, events))
        draw(st)
        if period:
            sleep(period)
    return EpisodeResult(st.score, st.status, st.tick_index, seed, maze, st.config, trace, st)


def _curses_keys(screen):
    import curses
    arrows = {curses.KEY_UP: N, curses.KEY_RIGHT: E, curses.KEY_DOWN: S, curses.KEY_LEFT: W}

    def poll():
        keys = []
        while True:
            ch = screen.getch()
            if ch == -1:
                return keys
            if ch in arrows:
                keys.append(arrows[ch])
            elif 0 <= ch < 256 and chr(ch).lower() == "q":
                keys.append(None)
            elif 0 <= ch < 256 and chr(ch).lower() in KEYMAP:
                keys.append(KEYMAP[chr(ch).lower()])
    return poll


def human_play_session(maze: Maze, seed: int, tick_rate: float = DEFAULT_TICK_RATE,
                       config: Optional[GameConfig] = None) -> EpisodeResult:
    """Interactive game in the terminal (arrow keys or WASD, q quits)."""
    if not (sys.stdin.isatty() and sys.stdout.isatty()):
        raise NonInteractiveError(
            "human play needs an interactive terminal; use `replay --trace FILE` to view games")
    import curses

    def main(screen):
        curses.curs_set(0)
        screen.nodelay(True)
        screen.keypad(True)

        def draw(st):
            screen.erase()
            frame = render(st)
            for i, line in enumerate(frame.grid + (frame.status, "arrows/WASD move, q quits")):
                try:
                    screen.addstr(i, 0, line)
                except curses.error:
                    pass
            screen.refresh()

        return run_session(maze, seed, _curses_keys(screen), draw, tick_rate, config=config)

    return curses.wrapper(main)


def watch(result_states: Iterable[GameState], speed: float = DEFAULT_TICK_RATE,
          out: TextIO = sys.stdout, wait_key: Callable[[], str] = input,
          sleep: Callable[[float], None] = time.sleep, clear: bool = True) -> Optional[RenderFrame]:
    """Play back a sequence of states.  ``speed`` is ticks per second;
    ``speed == 0`` advances one tick per ``wait_key()`` call."""
    frame = None
    for st in result_states:
        frame = render(st)
        show(frame, out, clear)
        if speed > 0:
            sleep(1.0 / speed)
        else:
            wait_key()
    return frame


def replay(path, speed: float = DEFAULT_TICK_RATE, out: TextIO = sys.stdout,
           wait_key: Callable[[], str] = input, sleep: Callable[[float], None] = time.sleep,
           clear: bool = True) -> RenderFrame:
    """Render a trace file frame by frame; returns the last frame."""
    trace = read_trace(path)
    return watch(replay_states(trace), speed, out, wait_key, sleep, clear)


def trace_states(trace: ParsedTrace) -> List[GameState]:
    return list(replay_states(trace))
