import numpy as np
import pytest

import ranksat as rs
from ranksat.qsim import AngleVector, ShotSet, prepare_state, sample
from ranksat.shaping import (
    CostHistogram,
    QuantileSet,
    cost_histogram,
    h_histogram,
    histogram_to_csv,
    histogram_to_json_obj,
    histogram_from_json_obj,
    nearest_rank_quantile,
    parse_histogram_csv,
    quantile,
    shaped_cost,
)

from conftest import all_assignments


def _random_hist(rng):
    size = int(rng.integers(1, 12))
    values = np.cumsum(rng.uniform(0.5, 3.0, size))
    counts = rng.integers(1, 40, size)
    return CostHistogram.from_pairs(zip(values, counts))


def test_all_satisfying_shots(widget):
    shots = ShotSet(bits=np.tile([1, 1, 1, 0, 0], (4, 1)).astype(np.uint8))
    hist = cost_histogram(widget, shots, rs.default_params(widget))
    assert list(hist.values) == [0.0]
    assert list(hist.counts) == [4]
    assert hist.cumfreq[-1] == 1.0
    assert shaped_cost(hist, QuantileSet.default()) == 0.0


def test_exhaustive_widget_h_projection(widget):
    shots = ShotSet(bits=all_assignments(widget.n))
    hist = h_histogram(widget, shots)
    assert list(hist.values) == [0, 1, 2]
    assert list(hist.counts) == [4, 16, 12]


def test_quantile_single_entry():
    hist = CostHistogram.from_pairs([(3.0, 5)])
    for p in (0.01, 0.5, 0.99):
        assert quantile(hist, p) == 3.0


def test_quantile_defining_inequalities():
    rng = np.random.default_rng(12)
    for _ in range(50):
        hist = _random_hist(rng)
        p = float(rng.uniform(0.001, 0.999))
        e = quantile(hist, p)
        idx = int(np.searchsorted(hist.values, e))
        assert hist.values[idx] == e  # member of the support
        assert hist.cumfreq[idx] >= p
        cf_pred = hist.cumfreq[idx - 1] if idx > 0 else 0.0
        assert cf_pred < p


def test_quantile_monotone_in_p():
    rng = np.random.default_rng(13)
    for _ in range(20):
        hist = _random_hist(rng)
        ps = np.sort(rng.uniform(0.01, 0.99, 6))
        qs = [quantile(hist, p) for p in ps]
        assert all(a <= b for a, b in zip(qs, qs[1:]))


def test_quantile_rejects_bad_level():
    hist = CostHistogram.from_pairs([(1.0, 1)])
    for p in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            quantile(hist, p)


def test_shaped_cost_degenerate_mass():
    hist = CostHistogram.from_pairs([(7.0, 10)])
    levels = QuantileSet.of([0.1, 0.3, 0.5, 0.9])
    assert shaped_cost(hist, levels) == 7.0 * 5


def test_shaped_cost_widget_h_units(widget):
    shots = ShotSet(bits=all_assignments(widget.n))
    hist = h_histogram(widget, shots)
    assert hist.mean == pytest.approx(40 / 32)
    assert shaped_cost(hist, QuantileSet.of([0.5])) == pytest.approx(2.25)


def test_shaped_cost_at_least_mean():
    rng = np.random.default_rng(14)
    levels = QuantileSet.default()
    for _ in range(20):
        hist = _random_hist(rng)
        assert shaped_cost(hist, levels) >= hist.mean


def test_shaped_cost_right_shift_monotone():
    rng = np.random.default_rng(15)
    levels = QuantileSet.default()
    for _ in range(20):
        hist = _random_hist(rng)
        shifted = CostHistogram.from_pairs(zip(hist.values + 2.5, hist.counts))
        assert shaped_cost(shifted, levels) >= shaped_cost(hist, levels)


def test_csv_json_round_trip():
    hist = CostHistogram.from_pairs([(0.0, 3), (2.5, 4), (7.0, 1)])
    again = parse_histogram_csv(histogram_to_csv(hist))
    np.testing.assert_array_equal(again.values, hist.values)
    np.testing.assert_array_equal(again.counts, hist.counts)
    rows = histogram_to_json_obj(hist, value_label="g")
    again2 = histogram_from_json_obj(rows, value_label="g")
    np.testing.assert_array_equal(again2.values, hist.values)
    assert rows[-1]["cumfreq"] == 1.0


def test_quantile_set_validation():
    with pytest.raises(ValueError):
        QuantileSet(levels=())
    with pytest.raises(ValueError):
        QuantileSet(levels=(0.0, 0.5))
    with pytest.raises(ValueError):
        QuantileSet(levels=(0.5, 0.5))
    with pytest.raises(ValueError):
        QuantileSet(levels=(0.6, 0.2))
    assert QuantileSet.parse("0.1, 0.01").levels == (0.01, 0.1)
    assert QuantileSet.default().levels == (0.01, 0.05, 0.1)


def test_histogram_validation():
    with pytest.raises(ValueError):
        CostHistogram.from_samples(np.array([]))
    with pytest.raises(ValueError):
        CostHistogram(
            values=np.array([1.0]), counts=np.array([2]), total=3,
            cumfreq=np.array([1.0]),
        )


def test_cost_histogram_checks_inputs(widget):
    shots = ShotSet(bits=all_assignments(3))
    with pytest.raises(ValueError, match="bits"):
        cost_histogram(widget, shots, rs.default_params(widget))
    good = ShotSet(bits=all_assignments(widget.n))
    with pytest.raises(ValueError, match="dominate"):
        cost_histogram(widget, good, rs.CostParams(zeta=2.0, vartheta=1.0))


def test_sampled_vs_exact_consistency_light(widget):
    params = rs.default_params(widget)
    levels = QuantileSet.default()
    exact = rs.exact_shaped_cost(widget, AngleVector.zeros(2), params, levels)
    state = prepare_state(widget.n, AngleVector.zeros(2))
    shots = sample(state, 50_000, np.random.default_rng(3))
    sampled = shaped_cost(cost_histogram(widget, shots, params), levels)
    assert sampled == pytest.approx(exact, rel=0.03)


def test_uniform_sampling_matches_uf20_01_reference():
    from conftest import load_count_csv, satlib_instance

    path = satlib_instance("uf20-01.cnf")
    f = rs.parse_dimacs_file(str(path))
    state = prepare_state(f.n, AngleVector.zeros(2))
    shots = sample(state, 100_000, np.random.default_rng(17))
    hist = h_histogram(f, shots)
    sampled = {int(v): c / hist.total for v, c in zip(hist.values, hist.counts)}
    for h, count in load_count_csv("uf20_01_initial_h.csv"):
        expected = count / 2**20
        assert abs(sampled.get(h, 0.0) - expected) < 0.003  # 0.3 percentage points


def test_nearest_rank_quantile_mass_path():
    values = np.array([1.0, 2.0, 3.0])
    cum = np.array([0.2, 0.7, 1.0])
    assert nearest_rank_quantile(values, cum, 0.2) == 1.0
    assert nearest_rank_quantile(values, cum, 0.2000001) == 2.0
    assert nearest_rank_quantile(values, cum, 0.9999999) == 3.0
