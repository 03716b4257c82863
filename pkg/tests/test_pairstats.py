import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spdcqpm.errors import DomainError, FitError
from spdcqpm.pairstats import (
    MHZ,
    REFERENCE_BUDGET,
    CoincidencePoint,
    LossBudget,
    accidentals_estimate,
    analyze_points,
    car,
    fit_through_origin,
    loss_corrected_rate,
    spectral_density,
    splitter_correction,
    true_coincidences,
)

rates = st.floats(1e-3, 1e9)


def test_true_coincidences():
    assert true_coincidences(1000, 100) == (900, False)
    assert true_coincidences(100, 100) == (0, False)
    assert true_coincidences(50, 100) == (0, True)


def test_accidentals_estimate():
    assert accidentals_estimate(1e5, 1e5, 2e-9) == pytest.approx(20)
    assert accidentals_estimate(0, 3e4, 2e-9) == 0
    assert accidentals_estimate(1e6, 1e6, 2e-9) == pytest.approx(2000)
    with pytest.raises(DomainError):
        accidentals_estimate(1, 1, 0)


def test_car():
    assert car(900, 100) == 9
    assert car(0, 100) == 0
    assert car(5, 0) == math.inf
    assert math.isnan(car(0, 0))


def test_car_inverse_with_power():
    powers = np.linspace(0.5, 10, 20)
    cars = [car(3.0 * p, 0.2 * p**2) for p in powers]
    assert all(b < a for a, b in zip(cars, cars[1:]))
    assert np.allclose(np.array(cars) * powers, cars[0] * powers[0])


@settings(max_examples=100)
@given(rates, rates, st.floats(1e-3, 1e3))
def test_car_scale_invariant(t, a, s):
    assert car(s * t, s * a) == pytest.approx(car(t, a), rel=1e-12)


def test_fit_exact_line():
    fit = fit_through_origin([(1, 2), (2, 4), (3, 6)])
    assert fit.slope == 2 and fit.r_squared == 1 and fit.slope_stderr == 0


@settings(max_examples=100)
@given(st.floats(-1e3, 1e3).filter(lambda k: abs(k) > 1e-6), st.lists(st.floats(0.1, 100), min_size=2, max_size=20, unique=True))
def test_fit_recovers_exact_slope(k, xs):
    fit = fit_through_origin([(x, k * x) for x in xs])
    assert fit.slope == pytest.approx(k, rel=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-9)


def test_fit_noisy_line_within_three_stderr():
    rng = np.random.default_rng(20240501)
    x = np.linspace(0.2, 5, 25)
    y = 3 * x + rng.normal(0, 0.1, x.size)
    fit = fit_through_origin(zip(x, y))
    assert abs(fit.slope - 3) < 3 * fit.slope_stderr
    # stderr oracle: sigma / sqrt(sum x^2) with sigma from the residuals
    resid = y - fit.slope * x
    assert fit.slope_stderr == pytest.approx(math.sqrt(resid @ resid / 24 / (x @ x)))
    assert 0.99 < fit.r_squared <= 1


def test_fit_errors():
    with pytest.raises(FitError):
        fit_through_origin([(1, 1)])
    with pytest.raises(FitError):
        fit_through_origin([(0, 1), (0, 2)])


def test_splitter_correction():
    assert splitter_correction(5.417 * MHZ) == pytest.approx(10.834 * MHZ)
    assert splitter_correction(1.195 * MHZ) == pytest.approx(2.390 * MHZ)
    assert splitter_correction(0) == 0


def test_loss_correction():
    assert loss_corrected_rate(10.834 * MHZ, REFERENCE_BUDGET) == pytest.approx(254.3 * MHZ, abs=1.3 * MHZ)
    assert loss_corrected_rate(2.390 * MHZ, REFERENCE_BUDGET) == pytest.approx(56.1 * MHZ, abs=0.3 * MHZ)
    assert loss_corrected_rate(123.0, LossBudget()) == 123.0
    assert REFERENCE_BUDGET.total_efficiency == pytest.approx(0.35 * 0.30 * 0.65**2 * 0.98**2)


@settings(max_examples=100)
@given(rates, st.floats(1e-3, 1e3))
def test_pipeline_linear(r, s):
    out = lambda v: loss_corrected_rate(splitter_correction(v), REFERENCE_BUDGET)
    assert out(s * r) == pytest.approx(s * out(r), rel=1e-12)


def test_budget_validation():
    with pytest.raises(DomainError):
        LossBudget(pump_coupling=0)
    with pytest.raises(DomainError):
        LossBudget(n_filters=-1)
    with pytest.raises(DomainError):
        LossBudget.from_dict({"pump_coupling": 0.5, "bogus": 1})


def test_spectral_density():
    sd = spectral_density(262.88 * MHZ, 20, 810)
    assert sd.per_nm / MHZ == pytest.approx(13.14, abs=0.01)
    assert sd.bandwidth_thz == pytest.approx(9.15, abs=0.02)
    assert sd.per_thz / MHZ == pytest.approx(28.7, abs=0.1)
    assert spectral_density(42.0, 1, 900).per_nm == 42.0


@settings(max_examples=100)
@given(rates, st.floats(0.1, 100), st.floats(400, 1600))
def test_spectral_density_consistency(r, bw, lam):
    sd = spectral_density(r, bw, lam)
    assert sd.per_nm * bw == pytest.approx(r, rel=1e-12)
    assert sd.per_thz * sd.bandwidth_thz == pytest.approx(r, rel=1e-12)


def test_analyze_points_pipeline():
    slope = 5.417 * MHZ
    pts = [CoincidencePoint(p, slope * p + 40 * p**2, 40 * p**2) for p in (0.1, 0.2, 0.4, 0.8)]
    out = analyze_points(pts, REFERENCE_BUDGET)
    assert out["slope"] == pytest.approx(slope, rel=1e-9)
    assert out["effective_rate"] == pytest.approx(2 * slope, rel=1e-9)
    cars = [row["car"] for row in out["car_series"]]
    assert all(b < a for a, b in zip(cars, cars[1:]))


def test_point_validation():
    with pytest.raises(DomainError):
        CoincidencePoint(-1, 0, 0)
    with pytest.raises(DomainError):
        CoincidencePoint(1, 0, 0, window=0)
