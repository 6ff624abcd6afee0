import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pacman_ce import cross_entropy as ce


def count_ones(elite):
    # plain-python counting oracle
    n, m = len(elite), len(elite[0])
    return [sum(row[j] for row in elite) / n for j in range(m)]


def count_symbols(elite, k):
    n, m = len(elite), len(elite[0])
    return [[sum(1 for row in elite if row[j] == s) / n for s in range(k)] for j in range(m)]


# -- elite selection ---------------------------------------------------------

def test_select_elite_half():
    gamma, idx = ce.select_elite([9, 5, 7, 1], 0.5)
    assert gamma == 7
    assert sorted(idx.tolist()) == [0, 2]


def test_select_elite_ties_inflate():
    gamma, idx = ce.select_elite([3.0] * 100, 0.05)
    assert gamma == 3.0 and len(idx) == 100


def test_select_elite_sorted_oracle():
    rng = np.random.default_rng(4)
    vals = rng.permutation(np.arange(1, 1001))
    gamma, idx = ce.select_elite(vals, 0.05)
    assert gamma == 951
    assert len(idx) == 50
    assert set(vals[idx]) == set(range(951, 1001))


def test_elite_count_float_guard():
    # 0.05 * 100 is 5.000000000000001 in binary floating point
    assert ce.elite_count(100, 0.05) == 5
    assert ce.elite_count(300, 0.05) == 15
    assert ce.elite_count(3, 0.1) == 1


def test_select_elite_errors():
    with pytest.raises(ce.EmptyEliteError):
        ce.select_elite([], 0.1)
    with pytest.raises(ValueError):
        ce.select_elite([1, 2], 0.0)


# -- updates -----------------------------------------------------------------

def test_bernoulli_examples():
    assert ce.bernoulli_update([[1], [1], [1]])[0] == 1.0
    assert ce.bernoulli_update([[1], [0], [1], [1]])[0] == 0.75


def test_categorical_examples():
    # symbols are 0-based: (1, 1, 2) over K=3
    row = ce.categorical_update([[1], [1], [2]], 3)[0]
    assert np.allclose(row, [0, 2 / 3, 1 / 3])
    one = ce.categorical_update([[0, 2, 1]], 3)
    assert np.array_equal(one, np.eye(3)[[0, 2, 1]])


def test_updates_match_counting_on_random_elites():
    rng = np.random.default_rng(11)
    for _ in range(50):
        n, m, k = rng.integers(1, 21), rng.integers(1, 9), rng.integers(2, 7)
        bits = rng.integers(0, 2, (n, m))
        syms = rng.integers(0, k, (n, m))
        assert ce.bernoulli_update(bits).tolist() == count_ones(bits.tolist())
        q = ce.categorical_update(syms, k)
        assert q.tolist() == count_symbols(syms.tolist(), k)
        assert np.all(np.abs(q.sum(axis=1) - 1) < 1e-12)


def test_updates_reject_empty_elite():
    with pytest.raises(ce.EmptyEliteError):
        ce.bernoulli_update(np.zeros((0, 3)))
    with pytest.raises(ce.EmptyEliteError):
        ce.categorical_update(np.zeros((0, 3), dtype=int), 2)


def test_exhaustive_small_bernoulli():
    # every multiset of up to 3 bit-vectors of length 3
    vecs = list(itertools.product((0, 1), repeat=3))
    for size in (1, 2, 3):
        for elite in itertools.combinations_with_replacement(vecs, size):
            assert ce.bernoulli_update(elite).tolist() == count_ones(elite)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 4).flatmap(lambda k: st.tuples(
    st.just(k),
    st.lists(st.lists(st.integers(0, k - 1), min_size=3, max_size=3), min_size=1, max_size=10))))
def test_categorical_rows_are_distributions(case):
    k, elite = case
    q = ce.categorical_update(elite, k)
    assert np.all((q >= 0) & (q <= 1))
    assert np.all(np.abs(q.sum(axis=1) - 1) <= ce.ROW_SUM_TOL)


# -- blend / decay -----------------------------------------------------------

def test_blend():
    assert ce.blend(np.array([0.5]), np.array([1.0]), 1.0)[0] == 1.0
    assert ce.blend(np.array([0.5]), np.array([1.0]), 0.6)[0] == pytest.approx(0.8)
    a = np.array([[0.2, 0.8], [0.5, 0.5]])
    b = np.array([[1.0, 0.0], [0.25, 0.75]])
    assert np.allclose(ce.blend(a, b, 0.3).sum(axis=1), 1)


def test_blend_tuples_and_mismatch():
    out = ce.blend((np.zeros(2), np.ones((1, 2))), (np.ones(2), np.zeros((1, 2))), 0.5)
    assert np.allclose(out[0], 0.5) and np.allclose(out[1], 0.5)
    with pytest.raises(ValueError):
        ce.blend(np.zeros(2), np.zeros(3), 0.5)
    with pytest.raises(ValueError):
        ce.blend((np.zeros(2),), np.zeros(2), 0.5)


def test_decay():
    assert ce.decay_slot_probabilities([0.5], 0.98)[0] == pytest.approx(0.49)
    assert ce.decay_slot_probabilities([0.3, 0.7], 1.0).tolist() == [0.3, 0.7]
    p = np.array([0.9])
    seq = []
    for _ in range(200):
        p = ce.decay_slot_probabilities(p, 0.98)
        seq.append(p[0])
    assert all(a > b for a, b in zip(seq, seq[1:]))
    assert seq[-1] < 0.02


# -- sampling ----------------------------------------------------------------

def test_sampling_frequencies():
    rng = np.random.default_rng(0)
    bits = np.array([ce.sample_bernoulli([0.1, 0.5, 0.9], rng) for _ in range(20000)])
    assert np.allclose(bits.mean(axis=0), [0.1, 0.5, 0.9], atol=0.015)
    q = np.array([[0.2, 0.3, 0.5], [1.0, 0.0, 0.0]])
    syms = np.array([ce.sample_categorical(q, rng) for _ in range(20000)])
    assert np.allclose(np.bincount(syms[:, 0], minlength=3) / 20000, q[0], atol=0.015)
    assert np.all(syms[:, 1] == 0)


def test_degenerate_distributions_sample_deterministically():
    rng = np.random.default_rng(3)
    p = np.array([0.0, 1.0, 1.0])
    q = np.eye(3)[[2, 0, 1]]
    assert ce.is_converged_bernoulli(p) and ce.is_one_hot(q).all()
    draws = {(tuple(ce.sample_bernoulli(p, rng)), tuple(ce.sample_categorical(q, rng)))
             for _ in range(100)}
    assert draws == {((0, 1, 1), (2, 0, 1))}


# -- loop --------------------------------------------------------------------

def onemax(m, n, rho, alpha, iterations, seed):
    def sampler(p, r):
        return ce.sample_bernoulli(p, r)

    return ce.ce_optimize(sampler, lambda x: float(x.sum()), ce.bernoulli_update,
                          np.full(m, 0.5), n, rho, alpha, iterations,
                          np.random.default_rng(seed))


def test_single_step_loop_is_one_blend():
    rng = np.random.default_rng(5)
    p0 = np.full(4, 0.5)
    res = ce.ce_optimize(lambda p, r: ce.sample_bernoulli(p, r), lambda x: 0.0,
                         ce.bernoulli_update, p0, 1, 1.0, 0.6, 1, rng)
    x = res.best_candidate
    assert np.allclose(res.params, 0.6 * x + 0.4 * p0)
    assert len(res.param_history) == 2


def test_loop_is_deterministic():
    a, b = onemax(20, 30, 0.1, 0.6, 10, 9), onemax(20, 30, 0.1, 0.6, 10, 9)
    assert [h.__dict__ for h in a.history] == [h.__dict__ for h in b.history]
    assert np.array_equal(a.params, b.params)


def test_elite_level_nondecreasing_with_full_step():
    res = onemax(30, 50, 0.1, 1.0, 15, 2)
    gammas = [h.gamma for h in res.history]
    assert all(b >= a for a, b in zip(gammas, gammas[1:]))


def test_onemax_reaches_optimum():
    res = onemax(50, 100, 0.1, 0.6, 30, 0)
    assert res.best_value == 50


def test_evaluator_failure_keeps_partial_history():
    calls = []

    def evaluator(x):
        calls.append(x)
        if len(calls) > 25:
            raise RuntimeError("simulator crashed")
        return float(x.sum())

    res = ce.ce_optimize(lambda p, r: ce.sample_bernoulli(p, r), evaluator,
                         ce.bernoulli_update, np.full(5, 0.5), 10, 0.2, 0.6, 5,
                         np.random.default_rng(1))
    assert isinstance(res.error, RuntimeError)
    assert len(res.history) == 2


def test_stop_and_history_csv(tmp_path):
    res = ce.ce_optimize(lambda p, r: ce.sample_bernoulli(p, r), lambda x: float(x.sum()),
                         ce.bernoulli_update, np.full(5, 0.5), 10, 0.2, 1.0, 50,
                         np.random.default_rng(1), stop=ce.is_converged_bernoulli)
    assert res.stopped_early and len(res.history) < 50
    path = tmp_path / "log.csv"
    ce.write_history_csv(res.history, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "iteration,gamma,best,mean,elite_size"
    assert len(lines) == len(res.history) + 1


def test_bad_arguments():
    with pytest.raises(ValueError):
        ce.ce_optimize(None, None, None, None, 0, 0.1, 0.5, 1, np.random.default_rng())
