import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wvlab.dynamics import WeightSequence
from wvlab.errors import DomainError, InsufficientTruncation
from wvlab.sampler import SeedSpec, complex_gaussian, sample_sequence
from wvlab.series import (
    CoefficientSequence,
    evaluate,
    make_exp_series,
    make_geometric_series,
    make_weight_series,
    radius_of_convergence_estimate,
    truncation_index,
    wrap_phase,
)

# log(20!) by exact integer arithmetic, frozen
LOG_FACT_20 = 42.335616460753485


def test_log_fact_oracle():
    assert math.isclose(float(mpmath.log(mpmath.factorial(20))), LOG_FACT_20, rel_tol=1e-15)


class TestConstruction:
    def test_exp_small(self):
        assert make_exp_series(0).log_abs.tolist() == [0.0]
        assert make_exp_series(2).log_abs[2] == pytest.approx(-math.log(2), abs=1e-15)

    def test_exp_20(self):
        assert make_exp_series(20).log_abs[20] == pytest.approx(-LOG_FACT_20, rel=1e-14)
        direct = -sum(math.log(k) for k in range(1, 21))
        assert make_exp_series(20).log_abs[20] == pytest.approx(direct, rel=1e-14)

    def test_geometric(self):
        seq = make_geometric_series(3)
        np.testing.assert_array_equal(seq.coefficients(), np.ones(4))
        assert seq.domain_radius == 1.0
        log_mag, arg = evaluate(make_geometric_series(1), 0.5, 0.0)
        assert math.exp(log_mag) == pytest.approx(1.5, rel=1e-15)

    def test_weight_series_matches_closed_forms(self):
        d = make_weight_series(WeightSequence.derivative(), 5)
        np.testing.assert_allclose(d.log_abs, make_exp_series(5).log_abs, atol=1e-14)
        assert d.domain_radius == np.inf
        t = make_weight_series(WeightSequence.taylor_shift(), 5)
        np.testing.assert_array_equal(t.log_abs, np.zeros(6))
        assert t.domain_radius == 1.0
        two = make_weight_series(WeightSequence.constant(2.0, "plane"), 4)
        assert two.log_abs[4] == pytest.approx(-4 * math.log(2), abs=1e-14)

    def test_zero_weight_rejected(self):
        w = WeightSequence(lambda n: np.where(np.asarray(n) == 3, 0.0, 1.0), "plane", horizon=1)
        with pytest.raises(DomainError):
            make_weight_series(w, 5)

    def test_phases_wrapped(self):
        seq = CoefficientSequence([0.0, 0.0, 0.0], [np.pi, -np.pi, 7.0])
        assert np.all(seq.phase >= -np.pi) and np.all(seq.phase < np.pi)
        assert seq.phase[0] == pytest.approx(-np.pi)

    def test_invalid(self):
        with pytest.raises(DomainError):
            CoefficientSequence([], [])
        with pytest.raises(DomainError):
            CoefficientSequence([0.0], [0.0, 1.0])
        with pytest.raises(DomainError):
            CoefficientSequence([np.nan], [0.0])

    def test_immutable(self):
        seq = make_exp_series(3)
        with pytest.raises(ValueError):
            seq.log_abs[0] = 1.0

    def test_nonconstant(self):
        assert not CoefficientSequence.from_coefficients([1.0, 0.0]).is_nonconstant
        assert CoefficientSequence.from_coefficients([0.0, 2.0]).is_nonconstant
        assert CoefficientSequence.from_coefficients([0.0, 0.0]).is_zero

    def test_csv_roundtrip(self):
        seq = CoefficientSequence.from_coefficients([1.0, -2.0j, 0.0, 3.5 - 1j])
        text = seq.to_csv()
        assert text.splitlines()[0] == "n,log_abs,phase"
        back = CoefficientSequence.from_csv(text)
        np.testing.assert_array_equal(back.log_abs, seq.log_abs)
        np.testing.assert_array_equal(back.phase, seq.phase)


class TestTruncation:
    def test_exp_r1(self):
        assert truncation_index(make_exp_series(200), 1.0, 1e-12) <= 40

    def test_geometric_half(self):
        assert truncation_index(make_geometric_series(200), 0.5, 1e-12) <= 100

    def test_geometric_insufficient(self):
        with pytest.raises(InsufficientTruncation) as exc:
            truncation_index(make_geometric_series(100), 0.999, 1e-12)
        assert exc.value.suggested_length > 100

    def test_every_later_term_negligible(self):
        seq = make_exp_series(600)
        for r in (1.0, 10.0, 200.0):
            n_star = truncation_index(seq, r)
            terms = seq.log_abs + np.arange(seq.length) * np.log(r)
            assert np.all(terms[n_star:] < terms.max() + np.log(1e-12))
            assert seq.length - n_star >= 50

    def test_polynomial_needs_no_window(self):
        p = CoefficientSequence.from_coefficients([1.0, 2.0, 3.0], polynomial=True)
        assert truncation_index(p, 10.0) == 2

    def test_monotone_in_r(self):
        for seq, radii in ((make_exp_series(800), np.geomspace(0.5, 400, 40)),
                           (make_geometric_series(30000), np.linspace(0.1, 0.998, 40))):
            idx = [truncation_index(seq, r) for r in radii]
            assert np.all(np.diff(idx) >= 0)

    def test_outside_domain(self):
        with pytest.raises(DomainError):
            truncation_index(make_geometric_series(100), 1.0)


class TestEvaluate:
    def test_e(self):
        log_mag, arg = evaluate(make_exp_series(60), 1.0, 0.0)
        assert log_mag == pytest.approx(1.0, abs=1e-15)
        assert arg == 0.0

    def test_geometric_minus_half(self):
        log_mag, arg = evaluate(make_geometric_series(200), 0.5, np.pi)
        assert math.exp(log_mag) == pytest.approx(2 / 3, rel=1e-14)

    def test_no_overflow(self):
        log_mag, _ = evaluate(make_exp_series(1400), 700.0, 0.0)
        assert log_mag == pytest.approx(700.0, rel=1e-13)

    def test_multipliers(self):
        seq = CoefficientSequence.from_coefficients([0.0, 1.0])
        log_mag, arg = evaluate(seq, 2.0, 0.0, multipliers=[5.0, 1j])
        assert math.exp(log_mag) == pytest.approx(2.0)
        assert arg == pytest.approx(np.pi / 2)

    def test_array_theta(self):
        theta = np.linspace(0, 2 * np.pi, 7)
        log_mag, arg = evaluate(make_geometric_series(200), 0.5, theta)
        z = 0.5 * np.exp(1j * theta)
        np.testing.assert_allclose(np.exp(log_mag), np.abs(1 / (1 - z)), rtol=1e-13)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(-30, 5), min_size=1, max_size=51), st.floats(0.05, 3.0))
    def test_matches_high_precision_partial_sum(self, log_abs, r):
        seq = CoefficientSequence(log_abs, np.zeros(len(log_abs)), polynomial=True)
        log_mag, _ = evaluate(seq, r, 0.0)
        with mpmath.workdps(40):
            exact = mpmath.log(mpmath.fsum(mpmath.exp(a) * mpmath.mpf(r) ** n
                                           for n, a in enumerate(log_abs)))
        assert log_mag == pytest.approx(float(exact), rel=1e-12, abs=1e-13)


class TestRadiusEstimate:
    def test_geometric(self):
        assert 0.99 <= radius_of_convergence_estimate(make_geometric_series(1000)) <= 1.01

    def test_exp(self):
        assert radius_of_convergence_estimate(make_exp_series(1000)) == np.inf

    def test_gaussian_geometric(self):
        seq = make_geometric_series(5000)
        hits = 0
        for seed in range(100):
            x = sample_sequence(complex_gaussian(1.0), seq.length, SeedSpec(seed))
            est = radius_of_convergence_estimate(seq, multipliers=x)
            hits += 0.98 <= est <= 1.02
        assert hits >= 95


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.1, 10.0) | st.floats(-10.0, -0.1), min_size=1, max_size=40))
def test_weight_series_cancels_prefix_product(ws):
    w = WeightSequence(lambda n: np.asarray(ws, dtype=float)[np.asarray(n) - 1], "plane",
                       horizon=len(ws))
    seq = make_weight_series(w, len(ws))
    prod_log = np.concatenate([[0.0], np.cumsum(np.log(np.abs(ws)))])
    np.testing.assert_allclose(seq.log_abs + prod_log, 0.0, atol=1e-12)


@given(st.floats(-1e6, 1e6))
def test_wrap_phase_range(x):
    y = float(wrap_phase(x))
    assert -np.pi <= y < np.pi
    assert math.isclose(math.cos(y), math.cos(x), abs_tol=1e-6)
