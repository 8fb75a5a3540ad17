import csv
import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.interpolate import CubicHermiteSpline

from fpcqaoa.ansatz import Mode, count_trainable
from fpcqaoa.ising import InvalidInputError
from fpcqaoa.schedules import (
    MonotoneCubic,
    ScheduleDomainError,
    ScheduleSet,
    build_interpolant,
    control_grid,
    fritsch_carlson_slopes,
    linear_ramp_set,
)

values = st.floats(-2.0, 2.0, allow_nan=False)


def test_boundaries_and_knots():
    sched = ScheduleSet(1, [0.4], [0.6], [0.3])
    assert sched(1, 0.0) == 1.0 and sched(1, 1.0) == 0.0
    assert sched(2, 0.0) == 0.0 and sched(2, 1.0) == 1.0
    assert sched(3, 0.0) == 0.0 and sched(3, 1.0) == 0.0
    assert sched(1, 0.5) == 0.4 and sched(3, 0.5) == 0.3


def test_three_point_cubic_by_hand():
    # secants -1.2, -0.8; interior slope is their mean; no limiting occurs
    f = ScheduleSet(1, [0.4], [0.5], [0.0]).interpolants[1]
    assert np.allclose(f.slopes, [-1.2, -1.0, -0.8], atol=1e-15)
    assert abs(f(0.25) - 0.6875) < 1e-12


def test_interpolant_matches_independent_hermite_evaluator(rng):
    for _ in range(20):
        n = int(rng.integers(2, 9))
        x = np.concatenate([[0.0], np.sort(rng.uniform(0.05, 0.95, n - 2)), [1.0]])
        x = np.unique(x)
        y = rng.uniform(-2, 2, x.size)
        f = MonotoneCubic(x, y)
        oracle = CubicHermiteSpline(x, y, f.slopes)
        s = np.linspace(0, 1, 1001)
        assert np.max(np.abs(f(s) - oracle(s))) < 1e-12


def test_limiter_engages_on_steep_turn():
    x = np.array([0.0, 0.5, 1.0])
    y = np.array([0.0, 0.1, 1.0])
    m = fritsch_carlson_slopes(x, y)
    # unlimited middle slope 1.0 is five times the first secant 0.2
    assert m[1] == pytest.approx(3.0 / np.sqrt(26.0) * 5 * 0.2, abs=1e-15)
    vals = MonotoneCubic(x, y)(np.linspace(0, 0.5, 2001))
    assert vals.min() >= -1e-15 and vals.max() <= 0.1 + 1e-15


def test_local_extremum_gets_flat_slope():
    m = fritsch_carlson_slopes(np.array([0.0, 0.5, 1.0]), np.array([0.0, 1.0, 0.0]))
    assert m[1] == 0.0


def test_domain_is_closed_unit_interval():
    sched = linear_ramp_set(2)
    for s in (-1e-12, 1.0 + 1e-12, float("nan")):
        with pytest.raises(ScheduleDomainError):
            sched(1, s)
    with pytest.raises(InvalidInputError):
        sched(4, 0.5)


def test_build_interpolant_checks_span():
    assert build_interpolant([(0, 1), (1, 0)])(0.5) == 0.5
    with pytest.raises(InvalidInputError):
        build_interpolant([(0, 0), (0.9, 1)])
    with pytest.raises(InvalidInputError):
        build_interpolant([(0, 0), (0.5, 1), (0.5, 2), (1, 0)])


def test_vector_layout_and_validation():
    sched = ScheduleSet.from_vector([1, 2, 3, 4, 5, 6])
    assert sched.y1 == (1, 2) and sched.y2 == (3, 4) and sched.y3 == (5, 6)
    assert np.array_equal(sched.to_vector(), np.arange(1, 7))
    with pytest.raises(InvalidInputError):
        ScheduleSet.from_vector([1, 2])
    with pytest.raises(InvalidInputError):
        ScheduleSet(2, [1], [1, 2], [1, 2])


def test_json_roundtrip():
    sched = ScheduleSet(2, [0.1, 0.2], [0.3, 0.4], [-0.5, 0.5])
    assert ScheduleSet.from_json(sched.to_json()) == sched
    assert set(sched.to_json()) == {"n_p", "y1", "y2", "y3"}


def test_linear_ramp_is_affine():
    sched = linear_ramp_set(3)
    s = np.linspace(0, 1, 513)
    assert np.max(np.abs(sched(1, s) + sched(2, s) - 1.0)) < 1e-12
    assert np.max(np.abs(sched(2, s) - s)) < 1e-12
    assert np.all(sched(3, s) == 0.0)


def test_zero_controls():
    sched = ScheduleSet(0, [], [], [])
    assert sched(1, 0.3) == pytest.approx(0.7, abs=1e-15)
    assert np.array_equal(control_grid(0), [0.0, 1.0])


def test_curve_csv_shape():
    rows = list(csv.reader(io.StringIO(ScheduleSet(1, [0.4], [0.6], [0.2]).curve_csv(11))))
    assert rows[0] == ["s", "F1", "F2", "F3"] and len(rows) == 12
    assert [float(v) for v in rows[1]] == [0.0, 1.0, 0.0, 0.0]
    assert [float(v) for v in rows[-1]] == [1.0, 0.0, 1.0, 0.0]


@pytest.mark.parametrize("n_layers", range(1, 101))
def test_parameter_count_is_depth_free(n_layers):
    assert count_trainable(Mode.FPC, 1) == 3
    assert count_trainable(Mode.FPC, 4) == 12
    assert count_trainable(Mode.QAOA, n_layers) == 2 * n_layers


@settings(max_examples=200, deadline=None)
@given(n_p=st.integers(0, 6), data=st.data())
def test_pieces_stay_within_their_knot_values(n_p, data):
    vec = data.draw(st.lists(values, min_size=3 * n_p, max_size=3 * n_p))
    sched = ScheduleSet.from_vector(vec) if n_p else ScheduleSet(0, [], [], [])
    grid = control_grid(n_p)
    for k in (1, 2, 3):
        f = sched.interpolants[k]
        for a, b, ya, yb in zip(grid[:-1], grid[1:], f.y[:-1], f.y[1:]):
            v = f(np.linspace(a, b, 64))
            assert v.min() >= min(ya, yb) - 1e-12
            assert v.max() <= max(ya, yb) + 1e-12


@settings(max_examples=100, deadline=None)
@given(n_p=st.integers(1, 5), data=st.data())
def test_interpolation_and_continuity(n_p, data):
    vec = data.draw(st.lists(values, min_size=3 * n_p, max_size=3 * n_p))
    sched = ScheduleSet.from_vector(vec)
    grid = control_grid(n_p)
    for k in (1, 2, 3):
        f = sched.interpolants[k]
        assert np.max(np.abs(f(grid) - f.y)) < 1e-12
        for knot in grid[1:-1]:
            left, right = f(knot - 1e-9), f(knot + 1e-9)
            assert abs(left - right) < 1e-6


def test_dense_random_fuzz_boundedness():
    rng = np.random.default_rng(11)
    s = rng.uniform(0, 1, 100_000)
    for _ in range(10):
        n_p = int(rng.integers(1, 6))
        sched = ScheduleSet.from_vector(rng.uniform(-2, 2, 3 * n_p))
        for k in (1, 2, 3):
            f = sched.interpolants[k]
            v = f(s)
            assert np.all(np.isfinite(v))
            assert v.min() >= f.y.min() - 1e-12 and v.max() <= f.y.max() + 1e-12
