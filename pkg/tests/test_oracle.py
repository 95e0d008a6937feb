import math

import numpy as np
import pytest

import ranksat as rs
from ranksat.cnf import ClauseArrays
from ranksat.oracle import (
    GuardError,
    enumerate_h,
    exact_g_distribution,
    exact_h_distribution,
    exact_shaped_cost,
    list_solutions,
    table_mean,
    table_quantile,
)
from ranksat.qsim import AngleVector, prepare_state, probability, sample
from ranksat.shaping import QuantileSet, h_histogram

from conftest import all_assignments, random_formula
from dense_reference import dense_state


def test_enumerate_widget(widget):
    table = enumerate_h(widget)
    assert table.as_dict() == {0: (4, 0.125), 1: (16, 0.5), 2: (12, 0.375)}
    assert table.domain_size == 32
    assert table.counts.sum() == 32


def test_enumerate_empty_formula():
    table = enumerate_h(rs.CnfFormula(n=3, clauses=()))
    assert table.as_dict() == {0: (8, 1.0)}


def test_resource_guard():
    big = rs.CnfFormula.from_signed(27, [[1, 2, 3]])
    with pytest.raises(GuardError, match="n <= 26"):
        enumerate_h(big)
    small = rs.CnfFormula.from_signed(5, [[1]])
    with pytest.raises(GuardError):
        list_solutions(small, max_n=4)
    with pytest.raises(GuardError):
        exact_h_distribution(big, AngleVector.zeros(1))
    # the guard is configurable
    assert enumerate_h(small, max_n=5).domain_size == 32


def test_list_solutions_widget(widget):
    sols = list_solutions(widget)
    assert sols == [
        [1, 1, 1, 0, 0],
        [1, 1, 1, 1, 0],
        [1, 1, 1, 0, 1],
        [1, 1, 1, 1, 1],
    ]
    ranks = [rs.rank_of(s) for s in sols]
    assert ranks == sorted(ranks)


def test_list_solutions_unsat():
    f = rs.CnfFormula.from_signed(1, [[1], [-1]])
    assert list_solutions(f) == []


def test_list_solutions_matches_h0_count():
    rng = np.random.default_rng(21)
    for _ in range(10):
        f = random_formula(rng)
        assert len(list_solutions(f)) == enumerate_h(f).count_at(0)


def test_exact_h_zero_angles_equals_enumeration(widget):
    rng = np.random.default_rng(22)
    for f in (widget, random_formula(rng, n=10, m=30)):
        exact = exact_h_distribution(f, AngleVector.zeros(2))
        uniform = enumerate_h(f)
        np.testing.assert_array_equal(exact.h_values, uniform.h_values)
        np.testing.assert_array_equal(exact.counts, uniform.counts)
        np.testing.assert_allclose(
            exact.probabilities, uniform.probabilities, atol=1e-12
        )


def test_exact_h_pinned_single_qubit():
    f = rs.CnfFormula.from_signed(1, [[1]])
    table = exact_h_distribution(
        f, AngleVector(betas=(math.pi / 4,), gammas=(math.pi / 2,))
    )
    assert table.probability_at(0) == pytest.approx(1.0, abs=1e-12)
    assert table.probabilities.sum() == pytest.approx(1.0, abs=1e-9)


def test_exact_h_probabilities_sum_to_one():
    rng = np.random.default_rng(23)
    for _ in range(5):
        f = random_formula(rng, n=7)
        angles = AngleVector(
            betas=tuple(rng.uniform(0, math.pi, 2)),
            gammas=tuple(rng.uniform(0, 2 * math.pi, 2)),
        )
        table = exact_h_distribution(f, angles)
        assert table.probabilities.sum() == pytest.approx(1.0, abs=1e-9)
        assert table.counts.sum() == 1 << f.n


def test_sampler_agrees_with_exact_distribution(widget):
    from scipy import stats

    angles = AngleVector(betas=(0.5, 1.0), gammas=(0.9, 1.7))
    exact = exact_h_distribution(widget, angles)
    state = prepare_state(widget.n, angles)
    shots = sample(state, 100_000, np.random.default_rng(31))
    observed = np.zeros(len(exact.h_values))
    hist = h_histogram(widget, shots)
    lookup = {int(v): int(c) for v, c in zip(hist.values, hist.counts)}
    for i, h in enumerate(exact.h_values):
        observed[i] = lookup.get(int(h), 0)
    expected = exact.probabilities * shots.count
    keep = expected >= 5
    obs = np.append(observed[keep], observed[~keep].sum())
    exp = np.append(expected[keep], expected[~keep].sum())
    if exp[-1] == 0:
        obs, exp = obs[:-1], exp[:-1]
    _, pvalue = stats.chisquare(obs, exp * obs.sum() / exp.sum())
    assert pvalue > 6.33e-5


def test_exact_shaped_cost_concentrated_state():
    f = rs.CnfFormula.from_signed(1, [[1]])
    angles = AngleVector(betas=(math.pi / 4,), gammas=(math.pi / 2,))
    cost = exact_shaped_cost(f, angles, rs.default_params(f), QuantileSet.default())
    assert cost == pytest.approx(0.0, abs=1e-9)


def test_exact_shaped_cost_matches_bruteforce(widget):
    # independent reference: explicit per-assignment loop over state probabilities
    params = rs.default_params(widget)
    levels = QuantileSet.of([0.05, 0.5])
    angles = AngleVector(betas=(0.6, 0.2), gammas=(1.3, 0.8))
    state = prepare_state(widget.n, angles)
    pairs = []
    for r in range(32):
        bits = [(r >> j) & 1 for j in range(5)]
        g = rs.g_cost(widget, bits, params)
        pairs.append((g, probability(state, bits)))
    pairs.sort()
    support: dict[float, float] = {}
    for g, p in pairs:
        support[g] = support.get(g, 0.0) + p
    values = sorted(support)
    mass = np.array([support[v] for v in values])
    cum = np.cumsum(mass) / mass.sum()
    mean = sum(v * support[v] for v in values) / mass.sum()
    expected = mean
    for p in levels:
        idx = int(np.searchsorted(cum, p, side="left"))
        expected += values[idx]
    got = exact_shaped_cost(widget, angles, params, levels)
    assert got == pytest.approx(expected, rel=1e-12)


def test_exact_h_projection_values(widget):
    # uniform state: mean h = 40/32 and the h-median is 1
    table = exact_h_distribution(widget, AngleVector.zeros(2))
    assert table_mean(table) == pytest.approx(1.25)
    assert table_quantile(table, 0.5) == 1
    assert table_mean(table) + table_quantile(table, 0.5) == pytest.approx(2.25)


def test_exact_g_distribution_mass():
    rng = np.random.default_rng(24)
    f = random_formula(rng, n=6, m=12)
    angles = AngleVector(
        betas=tuple(rng.uniform(0, math.pi, 2)),
        gammas=tuple(rng.uniform(0, 2 * math.pi, 2)),
    )
    values, mass = exact_g_distribution(f, angles, rs.default_params(f))
    assert np.all(np.diff(values) > 0)
    assert mass.sum() == pytest.approx(1.0, abs=1e-9)


def test_dense_crosscheck_exact_h():
    rng = np.random.default_rng(25)
    f = random_formula(rng, n=8, m=20)
    betas = tuple(rng.uniform(0, math.pi, 2))
    gammas = tuple(rng.uniform(0, 2 * math.pi, 2))
    table = exact_h_distribution(f, AngleVector(betas, gammas))

    dense = dense_state(f.n, betas, gammas)
    probs = np.abs(dense) ** 2
    h = ClauseArrays(f).h(all_assignments(f.n))
    buckets = np.bincount(h, weights=probs, minlength=f.m + 1)
    for value, p in zip(table.h_values, table.probabilities):
        assert abs(buckets[value] - p) < 1e-10


def test_table_serialization(widget):
    table = enumerate_h(widget)
    csv = table.to_csv()
    assert csv.splitlines()[0] == "h,count,probability,cumfreq"
    assert csv.splitlines()[1] == "0,4,0.125,0.125"
    rows = table.to_json_obj()
    assert rows[-1]["cumfreq"] == pytest.approx(1.0)
    probs = [row["probability"] for row in rows]
    assert sum(probs) == pytest.approx(1.0, abs=1e-4)
