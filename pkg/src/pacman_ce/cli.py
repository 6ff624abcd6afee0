"""Command line entry point: ``python -m pacman_ce <command> ...``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from .console import (DEFAULT_TICK_RATE, NonInteractiveError, human_play_session, replay,
                      watch)
from .engine import DEFAULT_TICK_LIMIT, maze_from_spec, play_episode
from .policy import RuleController, RuleSyntaxError, handcoded_policy, read_policy
from .trace import (TraceError, format_trace, parse_trace, read_trace, replay_states,
                    write_trace)


def cmd_train(args):
    config = ex.ExperimentConfig.read(args.config) if args.config else ex.ExperimentConfig()
    if args.seed is not None:
        config = config.replace(seed=args.seed)
    out = Path(args.out)

    def progress(t, model, log):
        if not args.quiet:
            print(f"iter {t:4d}  gamma {log.gamma:8.1f}  best {log.best:8.1f}  "
                  f"mean {log.mean:8.1f}  elite {log.elite_size}", flush=True)

    for i, seed in enumerate(ex.run_seeds(config)):
        rec = ex.train(config.replace(seed=seed), progress)
        d = ex.write_run(rec, out / f"run{i:02d}")
        print(f"run {i}: test mean {rec.test_mean:.1f}, high {max(rec.test_scores)}, "
              f"{rec.rule_count} rules ({rec.learned_source}) -> {d}")
    return 0


def cmd_eval(args):
    policy = handcoded_policy() if args.policy == "handcoded" else read_policy(args.policy)
    ev = ex.evaluate_policy(policy, args.games, maze_from_spec(args.maze), args.tick_limit, args.seed)
    print(f"games {args.games}  mean {ev.mean:.1f}  high {ev.high}  "
          f"rules fired {len(ev.fired)}/{len(policy)}")
    if args.out:
        name = "Hand-coded policy" if args.policy == "handcoded" else f"Policy {Path(args.policy).stem}"
        ex.write_condition(args.out, args.name or name, ev.scores,
                           [len(ev.fired)] * len(ev.scores))
    return 0


def cmd_baselines(args):
    maze = maze_from_spec(args.maze)
    out = Path(args.out)
    ev = ex.evaluate_policy(handcoded_policy(), args.games, maze, args.tick_limit, args.seed)
    ex.write_condition(out / "handcoded_policy", "Hand-coded policy", ev.scores,
                       [len(ev.fired)] * len(ev.scores))
    scores, counts = ex.evaluate_random_baseline(ex.handcoded_rulebase(), args.games, maze,
                                                 args.tick_limit, args.seed + 1)
    ex.write_condition(out / "random_rules", "Hand-coded rulebase + random rules", scores, counts)
    print(f"hand-coded policy mean {ev.mean:.1f}; random rules mean {np.mean(scores):.1f}")
    return 0


def cmd_play(args):
    result = human_play_session(maze_from_spec(args.maze), args.seed, args.tick_rate)
    print(f"score {result.score} ({result.status})")
    if args.trace:
        write_trace(result, args.trace)
    if args.scores:
        ex.append_scores_csv(Path(args.scores) / "test_scores.csv", [result.score])
        (Path(args.scores) / "condition.txt").write_text("Human play\n")
    return 0


def cmd_watch(args):
    policy = handcoded_policy() if args.policy == "handcoded" else read_policy(args.policy)
    result = play_episode(maze_from_spec(args.maze), RuleController(policy), args.seed, args.tick_limit)
    if args.trace:
        write_trace(result, args.trace)
    if args.speed >= 0:
        watch(replay_states(parse_trace(format_trace(result))), args.speed)
    print(f"score {result.score} ({result.status}, {result.ticks} ticks)")
    return 0


def cmd_replay(args):
    frame = replay(args.trace, args.speed, clear=not args.no_clear)
    print(f"final score {read_trace(args.trace).score}")
    return 0 if frame is not None else 1


def cmd_report(args):
    results = ex.collect_results(args.dir)
    if not results:
        print(f"no results found under {args.dir}", file=sys.stderr)
        return 1
    table = ex.report(results)
    text = table.to_text()
    print(text, end="")
    Path(args.dir, "results.txt").write_text(text)
    table.to_csv(Path(args.dir, "results.csv"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pacman_ce", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="CE training runs from a key=value config file")
    t.add_argument("--config")
    t.add_argument("--out", default="runs")
    t.add_argument("--seed", type=int)
    t.add_argument("--quiet", action="store_true")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="score a policy file over N games")
    e.add_argument("--policy", required=True, help="rules file or 'handcoded'")
    e.add_argument("--games", type=int, default=50)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--maze", help="maze file, or a bundled name (default, small)")
    e.add_argument("--tick-limit", type=int, default=DEFAULT_TICK_LIMIT)
    e.add_argument("--out", help="write a result directory for `report`")
    e.add_argument("--name", help="condition name for the results table")
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("baselines", help="hand-coded policy and random-rules baselines")
    b.add_argument("--games", type=int, default=500)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--maze", help="maze file, or a bundled name (default, small)")
    b.add_argument("--tick-limit", type=int, default=DEFAULT_TICK_LIMIT)
    b.add_argument("--out", default="runs")
    b.set_defaults(func=cmd_baselines)

    pl = sub.add_parser("play", help="play interactively in the terminal")
    pl.add_argument("--maze", help="maze file, or a bundled name (default, small)")
    pl.add_argument("--seed", type=int, default=0)
    pl.add_argument("--tick-rate", type=float, default=DEFAULT_TICK_RATE)
    pl.add_argument("--trace")
    pl.add_argument("--scores", help="directory collecting human-play scores")
    pl.set_defaults(func=cmd_play)

    w = sub.add_parser("watch", help="watch a policy play one game")
    w.add_argument("--policy", required=True, help="rules file or 'handcoded'")
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--maze", help="maze file, or a bundled name (default, small)")
    w.add_argument("--tick-limit", type=int, default=DEFAULT_TICK_LIMIT)
    w.add_argument("--speed", type=float, default=DEFAULT_TICK_RATE,
                   help="ticks per second; 0 steps on Enter, negative skips display")
    w.add_argument("--trace")
    w.set_defaults(func=cmd_watch)

    r = sub.add_parser("replay", help="play back a trace file")
    r.add_argument("--trace", required=True)
    r.add_argument("--speed", type=float, default=DEFAULT_TICK_RATE)
    r.add_argument("--no-clear", action="store_true")
    r.set_defaults(func=cmd_replay)

    rp = sub.add_parser("report", help="results table from run directories")
    rp.add_argument("--dir", required=True)
    rp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (NonInteractiveError, TraceError, RuleSyntaxError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
