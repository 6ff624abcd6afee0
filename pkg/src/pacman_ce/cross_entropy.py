"""Cross-entropy optimizer over discrete distributions.

Parameters are numpy arrays (a Bernoulli vector ``p`` or a row-stochastic
matrix ``q``) or tuples of them; :func:`blend` works componentwise on both.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Any, Callable, List, Optional, Sequence

import numpy as np

CONVERGED_TOL = 1e-6
ROW_SUM_TOL = 1e-9


class EmptyEliteError(ValueError):
    pass


def elite_count(n: int, rho: float) -> int:
    # guard against 0.05 * 100 == 5.000000000000001
    return max(1, math.ceil(rho * n - 1e-9))


def select_elite(values: Sequence[float], rho: float):
    """Level-set elite selection.

    Returns ``(gamma, indices)`` where ``gamma`` is the ``ceil(rho*N)``-th
    largest value and ``indices`` are all samples scoring at least
    ``gamma`` (ties can make the elite larger than ``ceil(rho*N)``).
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise EmptyEliteError("empty population")
    if not 0 < rho <= 1:
        raise ValueError(f"rho must be in (0, 1], got {rho}")
    k = elite_count(values.size, rho)
    gamma = float(np.sort(values)[::-1][k - 1])
    return gamma, np.flatnonzero(values >= gamma)


def bernoulli_update(elite_samples) -> np.ndarray:
    """Componentwise frequency of ones among the elite bit-vectors."""
    x = np.asarray(elite_samples)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyEliteError("bernoulli_update needs a nonempty 2-D elite array")
    return (x == 1).sum(axis=0) / x.shape[0]


def categorical_update(elite_samples, n_categories: int) -> np.ndarray:
    """Row ``j`` holds the frequency of each symbol ``0..K-1`` at position
    ``j`` among the elite samples."""
    x = np.asarray(elite_samples, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyEliteError("categorical_update needs a nonempty 2-D elite array")
    n, m = x.shape
    counts = np.zeros((m, n_categories))
    np.add.at(counts, (np.broadcast_to(np.arange(m), x.shape), x), 1)
    return counts / n


def blend(old, new, alpha: float):
    """``alpha * new + (1 - alpha) * old``, recursing into tuples."""
    if isinstance(old, tuple):
        if not isinstance(new, tuple) or len(old) != len(new):
            raise ValueError("parameter structure mismatch")
        return tuple(blend(o, n, alpha) for o, n in zip(old, new))
    old = np.asarray(old, dtype=float)
    new = np.asarray(new, dtype=float)
    if old.shape != new.shape:
        raise ValueError(f"shape mismatch: {old.shape} vs {new.shape}")
    return alpha * new + (1.0 - alpha) * old


def decay_slot_probabilities(p, beta: float) -> np.ndarray:
    return beta * np.asarray(p, dtype=float)


def sample_bernoulli(p, rng: np.random.Generator) -> np.ndarray:
    p = np.asarray(p)
    return (rng.random(p.shape) < p).astype(np.int8)


def sample_categorical(q, rng: np.random.Generator) -> np.ndarray:
    """One symbol per row of ``q`` via inverse-CDF sampling."""
    q = np.asarray(q)
    cdf = np.cumsum(q, axis=1)
    u = rng.random(q.shape[0]) * cdf[:, -1]
    idx = (cdf <= u[:, None]).sum(axis=1)
    return np.minimum(idx, q.shape[1] - 1)


def is_converged_bernoulli(p, tol: float = CONVERGED_TOL) -> bool:
    p = np.asarray(p)
    return bool(np.all((p <= tol) | (p >= 1 - tol)))


def is_one_hot(q, tol: float = CONVERGED_TOL) -> np.ndarray:
    """Per-row flag: one entry within ``tol`` of 1."""
    return np.asarray(q).max(axis=1) >= 1 - tol


@dataclass
class IterationLog:
    iteration: int
    gamma: float
    best: float
    mean: float
    elite_size: int


@dataclass
class CEResult:
    best_candidate: Any
    best_value: float
    params: Any
    history: List[IterationLog] = field(default_factory=list)
    param_history: List[Any] = field(default_factory=list)
    first_population_mean: Optional[float] = None
    error: Optional[BaseException] = None
    stopped_early: bool = False


def ce_optimize(sampler: Callable[[Any, np.random.Generator], Any],
                evaluator: Callable[[Any], float],
                updater: Callable[[List[Any]], Any],
                params0, n: int, rho: float, alpha: float, iterations: int,
                rng: np.random.Generator,
                post_update: Optional[Callable[[Any], Any]] = None,
                stop: Optional[Callable[[Any], bool]] = None,
                on_iteration: Optional[Callable[[int, Any, IterationLog], None]] = None,
                keep_params: bool = True) -> CEResult:
    """Generic cross-entropy loop.

    Each iteration draws ``n`` candidates with ``sampler(params, rng)``,
    scores them, picks the elite, fits new parameters with
    ``updater(elite)``, blends them into the old ones with ``alpha`` and
    finally applies ``post_update`` (e.g. probability decay).  ``stop`` is
    checked after each update.  An exception raised by the evaluator ends
    the run; the partial result is returned with ``error`` set.
    """
    if iterations < 1 or n < 1:
        raise ValueError("iterations and n must be >= 1")
    params = params0
    result = CEResult(None, -math.inf, params)
    if keep_params:
        result.param_history.append(params)
    for t in range(iterations):
        samples = [sampler(params, rng) for _ in range(n)]
        try:
            values = np.array([evaluator(s) for s in samples], dtype=float)
        except Exception as exc:
            result.error = exc
            break
        if t == 0:
            result.first_population_mean = float(values.mean())
        i_best = int(np.argmax(values))
        if values[i_best] > result.best_value:
            result.best_value = float(values[i_best])
            result.best_candidate = samples[i_best]
        gamma, elite = select_elite(values, rho)
        fitted = updater([samples[i] for i in elite])
        params = blend(params, fitted, alpha)
        if post_update is not None:
            params = post_update(params)
        log = IterationLog(t, gamma, float(values.max()), float(values.mean()), int(elite.size))
        result.history.append(log)
        result.params = params
        if keep_params:
            result.param_history.append(params)
        if on_iteration is not None:
            on_iteration(t, params, log)
        if stop is not None and stop(params):
            result.stopped_early = True
            break
    return result


def write_history_csv(history: Sequence[IterationLog], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "gamma", "best", "mean", "elite_size"])
        for h in history:
            w.writerow([h.iteration, repr(h.gamma), repr(h.best), repr(h.mean), h.elite_size])
