"""Line-per-tick trace files.

A trace is self-contained: the header carries the seed, game settings and
maze rows, each body line one tick, and a footer closes the file::

    # pacman-trace 1
    # seed 7
    # config edible_duration=80 pen_delay=10 ...
    # maze #####################
    ...
    tick=0 act=W pac=9,11,W ghosts=10,7,N,p|... score=10 lives=3 events=dot_eaten:10
    ...
    # end ticks=412 score=2310 status=game_over

Replaying re-simulates the game from the recorded directions and checks
every line against the simulation.
"""
from __future__ import annotations

import dataclasses
from typing import Iterator, List, Optional, Tuple

from .engine import (DIR_NAMES, EpisodeResult, GameConfig, GameState, Maze, TraceRecord,
                     advance, dir_from_name, episode_streams, load_maze, new_game, record_of)

MAGIC = "# pacman-trace 1"


class TraceError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _dir_text(d: Optional[int]) -> str:
    return "." if d is None else DIR_NAMES[d]


def format_record(maze: Maze, r: TraceRecord) -> str:
    px, py = maze.xy(r.pacman)
    ghosts = "|".join(
        f"{maze.xy(pos)[0]},{maze.xy(pos)[1]},{DIR_NAMES[d]},"
        f"{('e' if ed else '') + ('p' if pen else '') or '-'}"
        for pos, d, ed, pen in r.ghosts)
    events = ",".join(f"{k}:{p}" for k, p in r.events) or "-"
    return (f"tick={r.tick} act={_dir_text(r.action)} pac={px},{py},{DIR_NAMES[r.pacman_dir]} "
            f"ghosts={ghosts} score={r.score} lives={r.lives} events={events}")


def format_header(maze: Maze, seed: int, config: GameConfig) -> List[str]:
    settings = " ".join(f"{f.name}={getattr(config, f.name)}" for f in dataclasses.fields(config))
    return [MAGIC, f"# seed {seed}", f"# config {settings}"] + [f"# maze {row}" for row in maze.rows]


def format_trace(result: EpisodeResult) -> str:
    lines = format_header(result.maze, result.seed, result.config)
    lines += [format_record(result.maze, r) for r in result.trace]
    lines.append(f"# end ticks={result.ticks} score={result.score} status={result.status}")
    return "\n".join(lines) + "\n"


def write_trace(result: EpisodeResult, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_trace(result))


@dataclasses.dataclass
class ParsedTrace:
    seed: int
    config: GameConfig
    maze: Maze
    lines: List[Tuple[int, str, Optional[int]]]   # (lineno, text, action)
    ticks: int
    score: int
    status: str


def _parse_config(lineno: int, text: str) -> GameConfig:
    fields = {f.name: f.type for f in dataclasses.fields(GameConfig)}
    kwargs = {}
    for item in text.split():
        key, _, value = item.partition("=")
        if key not in fields:
            raise TraceError(lineno, f"unknown config key {key!r}")
        try:
            kwargs[key] = float(value) if fields[key] == "float" else int(value)
        except ValueError:
            raise TraceError(lineno, f"bad value for {key}: {value!r}") from None
    return GameConfig(**kwargs)


def _fields(lineno: int, text: str) -> dict:
    out = {}
    for item in text.split(" "):
        key, sep, value = item.partition("=")
        if not sep:
            raise TraceError(lineno, f"malformed field {item!r}")
        out[key] = value
    missing = {"tick", "act", "pac", "ghosts", "score", "lives", "events"} - out.keys()
    if missing:
        raise TraceError(lineno, f"missing field(s) {', '.join(sorted(missing))}")
    return out


def parse_trace(text: str) -> ParsedTrace:
    raw = text.split("\n")
    if raw and raw[-1] == "":
        raw.pop()
    if not raw or raw[0] != MAGIC:
        raise TraceError(1, "not a pacman trace (bad magic line)")
    seed = config = None
    maze_rows: List[str] = []
    body = []
    footer = None
    for lineno, line in enumerate(raw[1:], 2):
        if footer is not None:
            raise TraceError(lineno, "content after end marker")
        if line.startswith("# seed "):
            try:
                seed = int(line[7:])
            except ValueError:
                raise TraceError(lineno, "bad seed") from None
        elif line.startswith("# config "):
            config = _parse_config(lineno, line[9:])
        elif line.startswith("# maze "):
            maze_rows.append(line[7:])
        elif line.startswith("# end "):
            footer = (lineno, dict(item.partition("=")[::2] for item in line[6:].split()))
        elif line.startswith("#"):
            continue
        else:
            f = _fields(lineno, line)
            try:
                tick_no = int(f["tick"])
            except ValueError:
                raise TraceError(lineno, f"bad tick {f['tick']!r}") from None
            if tick_no != len(body):
                raise TraceError(lineno, f"expected tick {len(body)}, found {tick_no}")
            try:
                action = None if f["act"] == "." else dir_from_name(f["act"])
            except ValueError as exc:
                raise TraceError(lineno, str(exc)) from None
            body.append((lineno, line, action))
    if seed is None or config is None or not maze_rows:
        raise TraceError(len(raw), "incomplete header")
    if footer is None:
        raise TraceError(len(raw), "trace truncated (no end marker)")
    lineno, info = footer
    try:
        ticks, score, status = int(info["ticks"]), int(info["score"]), info["status"]
    except (KeyError, ValueError):
        raise TraceError(lineno, "malformed end marker") from None
    if ticks != len(body):
        raise TraceError(lineno, f"end marker says {ticks} ticks, found {len(body)}")
    try:
        maze = load_maze("\n".join(maze_rows), "trace")
    except ValueError as exc:
        raise TraceError(4, f"bad maze: {exc}") from None
    return ParsedTrace(seed, config, maze, body, ticks, score, status)


def read_trace(path) -> ParsedTrace:
    with open(path) as fh:
        return parse_trace(fh.read())


def replay_states(trace: ParsedTrace) -> Iterator[GameState]:
    """Re-simulate a parsed trace, yielding the state after every tick
    (preceded by the initial state).  Raises :class:`TraceError` at the
    first line the simulation disagrees with."""
    game_rng, _ = episode_streams(trace.seed)
    st = new_game(trace.maze, trace.seed, trace.config)
    yield st.copy()
    for lineno, text, action in trace.lines:
        if st.status != "running":
            raise TraceError(lineno, f"tick recorded after the game ended ({st.status})")
        events = advance(st, action, game_rng)
        if format_record(trace.maze, record_of(st, action, events)) != text:
            raise TraceError(lineno, "recorded tick does not match re-simulation")
        yield st.copy()
    if st.score != trace.score:
        raise TraceError(len(trace.lines) + 1, f"final score {st.score} != recorded {trace.score}")


def replay_score(trace: ParsedTrace) -> int:
    last = None
    for last in replay_states(trace):
        pass
    return last.score
