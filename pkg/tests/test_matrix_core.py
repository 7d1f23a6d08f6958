import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from limeqo.errors import AlreadyComplete, NonIncreasingTimeout, NonPositiveTimeout, RowUnbootstrapped
from limeqo.matrix_core import (
    CENSORED,
    COMPLETE,
    UNOBSERVED,
    Censored,
    Complete,
    GroundTruthMatrix,
    Unobserved,
    WorkloadState,
    best_hints,
    bootstrap,
    exploration_time,
    observe,
    row_timeout,
    workload_latency,
)


def random_state(rng, n, k, p_complete=0.4, p_censored=0.2, default_hint=0):
    """Random state with the default column complete."""
    u = rng.random((n, k))
    status = np.where(u < p_complete, COMPLETE, np.where(u < p_complete + p_censored, CENSORED, UNOBSERVED))
    status[:, default_hint] = COMPLETE
    values = rng.uniform(0.5, 20.0, (n, k))
    return WorkloadState(status, values, default_hint)


# Brute-force oracles: plain loops over cells.

def brute_latency(state):
    total = 0.0
    for i in range(state.n_queries):
        total += min(state.values[i, j] for j in range(state.n_hints) if state.status[i, j] == COMPLETE)
    return total


def brute_explore(state, charge_default):
    total = 0.0
    for i in range(state.n_queries):
        for j in range(state.n_hints):
            if state.status[i, j] == UNOBSERVED:
                continue
            if not charge_default and j == state.default_hint:
                continue
            total += state.values[i, j]
    return total


def brute_argmin(state, i):
    best, arg = np.inf, -1
    for j in range(state.n_hints):
        if state.status[i, j] == COMPLETE and state.values[i, j] < best:
            best, arg = state.values[i, j], j
    return arg


def test_workload_latency_examples():
    s = WorkloadState.from_entries([[Complete(3), Complete(4)], [Complete(9), Unobserved()]])
    assert workload_latency(s) == 12
    assert workload_latency(WorkloadState.from_entries([[Complete(5)]])) == 5


@pytest.mark.parametrize("seed", range(5))
def test_workload_latency_matches_row_scan(seed):
    s = random_state(np.random.default_rng(seed), 8, 5)
    assert workload_latency(s) == pytest.approx(brute_latency(s), rel=1e-12)


def test_workload_latency_needs_bootstrap():
    s = WorkloadState.from_entries([[Complete(1), Unobserved()], [Unobserved(), Censored(2)]])
    with pytest.raises(RowUnbootstrapped) as err:
        workload_latency(s)
    assert err.value.row == 1


def test_exploration_time_examples():
    s = WorkloadState.from_entries([[Complete(3), Censored(2), Unobserved()]], default_hint=0)
    assert exploration_time(s, charge_default=True) == 5
    assert exploration_time(s, charge_default=False) == 2
    assert exploration_time(WorkloadState.empty(3, 4)) == 0


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("charge", [True, False])
def test_exploration_time_matches_scan(seed, charge):
    s = random_state(np.random.default_rng(seed), 7, 6, default_hint=2)
    assert exploration_time(s, charge) == pytest.approx(brute_explore(s, charge), rel=1e-12)


def test_row_timeout_examples():
    s = WorkloadState.from_entries([[Complete(9), Complete(6), Censored(3)], [Complete(5), Unobserved(), Unobserved()]])
    assert row_timeout(s, 0) == 6
    assert row_timeout(s, 1) == 5


@pytest.mark.parametrize("true, timeout, entry, charged", [
    (2.0, 4.0, Complete(2.0), 2.0),
    (10.0, 4.0, Censored(4.0), 4.0),
    (4.0, 4.0, Censored(4.0), 4.0),
])
def test_observe_examples(true, timeout, entry, charged):
    s = WorkloadState.from_entries([[Complete(1.0), Unobserved()]])
    new, paid = observe(s, 0, 1, true, timeout)
    assert new.entry(0, 1) == entry
    assert paid == charged
    assert s.entry(0, 1) == Unobserved()


def test_observe_errors():
    s = WorkloadState.from_entries([[Complete(1.0), Censored(3.0), Unobserved()]])
    with pytest.raises(AlreadyComplete):
        s.observe(0, 0, 1.0, 5.0)
    with pytest.raises(NonPositiveTimeout):
        s.observe(0, 2, 1.0, 0.0)
    with pytest.raises(NonIncreasingTimeout):
        s.observe(0, 1, 9.0, 3.0)
    assert s.observe(0, 1, 9.0, 6.0) == 6.0
    assert s.entry(0, 1) == Censored(6.0)


def test_best_hints_examples():
    s = WorkloadState.from_entries([[Complete(3), Complete(4)], [Complete(9), Complete(6)]])
    assert list(best_hints(s)) == [0, 1]
    tie = WorkloadState.from_entries([[Complete(2), Complete(2)]])
    assert list(best_hints(tie)) == [0]


@pytest.mark.parametrize("seed", range(5))
def test_best_hints_matches_scan(seed):
    s = random_state(np.random.default_rng(seed), 9, 5)
    assert list(best_hints(s)) == [brute_argmin(s, i) for i in range(s.n_queries)]


def test_bootstrap_examples():
    truth = GroundTruthMatrix([[3.0, 1.0], [2.0, 4.0]])
    s = bootstrap(truth, 0)
    assert s.entry(0, 0) == Complete(3.0) and s.entry(1, 0) == Complete(2.0)
    assert s.entry(0, 1) == Unobserved() and s.entry(1, 1) == Unobserved()
    assert workload_latency(s) == 5.0
    assert exploration_time(s, charge_default=False) == 0


def test_ground_truth_validation():
    with pytest.raises(ValueError):
        GroundTruthMatrix([[1.0, 0.0]])
    with pytest.raises(ValueError):
        GroundTruthMatrix([[1.0, np.nan]])
    t = GroundTruthMatrix([[4.0, 2.0], [3.0, 6.0]])
    assert t.optimal_latency() == 5.0
    assert t.default_latency(0) == 7.0
    assert t.headroom(0) == pytest.approx(1.4)


def test_entry_types_validate():
    with pytest.raises(ValueError):
        Complete(-1.0)
    with pytest.raises(ValueError):
        Censored(0.0)


def test_explorable_skips_censored_at_row_best():
    s = WorkloadState.from_entries([[Complete(5.0), Censored(2.0), Censored(7.0), Unobserved()]])
    assert s.explorable().tolist() == [[False, True, False, True]]


# Property tests over random observe sequences.

@st.composite
def observe_runs(draw):
    n = draw(st.integers(1, 5))
    k = draw(st.integers(2, 5))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    truth = rng.uniform(0.1, 10.0, (n, k))
    steps = draw(st.lists(
        st.tuples(st.integers(0, n - 1), st.integers(0, k - 1), st.floats(0.05, 15.0)),
        max_size=25,
    ))
    return truth, steps


@settings(max_examples=200, deadline=None)
@given(observe_runs())
def test_observe_properties(run):
    truth, steps = run
    s = bootstrap(GroundTruthMatrix(truth), 0)
    for i, j, timeout in steps:
        status, prior = s.status[i, j], s.values[i, j]
        if status == COMPLETE or (status == CENSORED and timeout <= prior):
            continue
        before_lat = workload_latency(s)
        before_time = exploration_time(s)
        charged = s.observe(i, j, truth[i, j], timeout)
        assert charged == min(truth[i, j], timeout)
        assert workload_latency(s) <= before_lat
        # a re-measured censored cell replaces its old bound in the state total
        assert exploration_time(s) == pytest.approx(before_time + charged - (prior if status == CENSORED else 0.0))
    cens = s.censored
    assert np.all(s.values[cens] <= truth[cens])
    hints = best_hints(s)
    rows = np.arange(s.n_queries)
    assert np.all(s.values[rows, hints] <= s.values[:, 0])


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_copy_and_equality(seed):
    s = random_state(np.random.default_rng(seed), 4, 3)
    c = s.copy()
    assert c == s
    c.set_entry(0, 1, Censored(123.0))
    assert c != s
