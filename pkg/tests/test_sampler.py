import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wvlab.errors import DomainError
from wvlab.growth import s_norm
from wvlab.sampler import (
    SeedSpec,
    bounded_custom,
    complex_gaussian,
    from_config,
    mgf_bound_estimate,
    rademacher,
    randomize,
    sample_sequence,
    shrinking_uniform,
    steinhaus,
    tail_certificate_check,
    uniform_disk,
)
from wvlab.series import CoefficientSequence, make_exp_series


def test_rademacher_centred():
    x = sample_sequence(rademacher(), 10**5, SeedSpec(1))
    assert set(np.unique(x.real)) == {-1.0, 1.0}
    assert abs(x.mean()) <= 0.02


def test_steinhaus_unimodular():
    x = sample_sequence(steinhaus(), 10**4, SeedSpec(2))
    np.testing.assert_allclose(np.abs(x), 1.0, rtol=0, atol=1e-15)


def test_shrinking_uniform_indexed():
    x = sample_sequence(shrinking_uniform(), 1000, SeedSpec(3))
    assert abs(x[9]) <= 0.1
    assert np.all(np.abs(x) <= 1.0 / (np.arange(1000) + 1.0))
    y = sample_sequence(shrinking_uniform(), 10, SeedSpec(3), start=100)
    assert np.all(np.abs(y) <= 1.0 / 101)


def test_gaussian_scale():
    x = sample_sequence(complex_gaussian(2.0), 2 * 10**5, SeedSpec(4))
    assert np.mean(np.abs(x) ** 2) == pytest.approx(4.0, rel=0.02)
    assert np.std(x.real) == pytest.approx(math.sqrt(2.0), rel=0.02)


def test_uniform_disk_bounded():
    x = sample_sequence(uniform_disk(0.5), 10**4, SeedSpec(5))
    assert np.all(np.abs(x) <= 0.5)


def test_bounded_custom():
    s = bounded_custom([1, -1, 2j, -2j])
    assert s.centred
    x = sample_sequence(s, 1000, SeedSpec(6))
    assert set(np.round(x, 12)) <= {1, -1, 2j, -2j}
    assert not bounded_custom([1, 2]).centred
    with pytest.raises(DomainError):
        bounded_custom([1, 2], [0.2, 0.2])


def test_reproducible_and_independent_streams():
    a = sample_sequence(complex_gaussian(), 5000, SeedSpec(7, 0))
    b = sample_sequence(complex_gaussian(), 5000, SeedSpec(7, 0))
    c = sample_sequence(complex_gaussian(), 5000, SeedSpec(7, 1))
    assert a.tobytes() == b.tobytes()
    corr = abs(np.vdot(a, c)) / np.sqrt(np.vdot(a, a).real * np.vdot(c, c).real)
    assert corr <= 3 / math.sqrt(5000)


def test_full_support_flags():
    assert complex_gaussian().full_support
    assert not rademacher().full_support
    assert not steinhaus().full_support


def test_certificates():
    assert rademacher().certificate == (math.e, 1.0)
    assert complex_gaussian(1.5).certificate == (2.0, 3.0)


class TestTailCheck:
    def test_rademacher(self):
        rows = tail_certificate_check(rademacher(), 10**4, [2.0], SeedSpec(8))
        assert rows[0].empirical_prob == 0.0 and rows[0].bound > 0 and not rows[0].flagged

    def test_gaussian(self):
        rows = tail_certificate_check(complex_gaussian(1.0), 10**5, [0.5, 1.0, 2.0, 3.0], SeedSpec(9))
        assert not any(r.flagged for r in rows)
        # |X|^2 is exponential with mean 1, so P(|X| > 3) = e^{-9}
        assert rows[-1].empirical_prob <= 10 * math.exp(-9)

    def test_uniform_disk(self):
        rows = tail_certificate_check(uniform_disk(1.0), 10**4, [1.5], SeedSpec(10))
        assert rows[0].empirical_prob == 0.0

    def test_bad_certificate_flagged(self):
        s = complex_gaussian(1.0)
        from dataclasses import replace

        bad = replace(s, certificate=(0.1, 0.1))
        rows = tail_certificate_check(bad, 10**4, [0.5], SeedSpec(11))
        assert rows[0].flagged

    def test_needs_trials(self):
        with pytest.raises(DomainError):
            tail_certificate_check(rademacher(), 100, [1.0])


class TestMgf:
    grid = np.linspace(-2, 2, 9)

    def test_rademacher(self):
        # cosh(l) <= exp(l^2/2) on the whole grid
        assert np.all(np.cosh(self.grid) <= np.exp(self.grid**2 / 2))
        est = mgf_bound_estimate(rademacher(), self.grid, 10**5, SeedSpec(12))
        assert est <= 1 / math.sqrt(2) + 0.02

    def test_normal(self):
        s = complex_gaussian(math.sqrt(2.0))  # real part N(0, 1)
        est = mgf_bound_estimate(s, self.grid, 10**5, SeedSpec(13))
        assert est == pytest.approx(1 / math.sqrt(2), abs=0.03)

    def test_zero(self):
        est = mgf_bound_estimate(bounded_custom([0.0]), self.grid, 10**5, SeedSpec(14))
        assert est == 0.0


class TestRandomize:
    def test_steinhaus_preserves_moduli(self):
        seq = make_exp_series(30)
        g = randomize(seq, steinhaus(), SeedSpec(15))
        np.testing.assert_allclose(g.as_sequence().log_abs, seq.log_abs, atol=1e-14)

    def test_rademacher_preserves_S(self):
        seq = make_exp_series(200)
        g = randomize(seq, rademacher(), SeedSpec(16))
        assert s_norm(g, 5.0) == s_norm(seq, 5.0)

    def test_zero_positions(self):
        seq = CoefficientSequence.from_coefficients([1.0, 0.0, 2.0, 0.0])
        g = randomize(seq, complex_gaussian(), SeedSpec(17))
        assert np.isneginf(g.as_sequence().log_abs[[1, 3]]).all()

    def test_multipliers_csv(self):
        g = randomize(make_exp_series(3), complex_gaussian(), SeedSpec(18))
        lines = g.multipliers_csv().splitlines()
        assert lines[0] == "n,re,im" and len(lines) == 5


def test_from_config_roundtrip():
    for s in (rademacher(), steinhaus(), complex_gaussian(0.5), uniform_disk(2.0),
              shrinking_uniform(), bounded_custom([1, -1j], [0.25, 0.75])):
        assert from_config(s.to_config()).to_config() == s.to_config()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**64 - 1), st.integers(0, 2**32))
def test_seed_determines_stream(master, stream):
    a = sample_sequence(steinhaus(), 16, SeedSpec(master, stream))
    b = sample_sequence(steinhaus(), 16, SeedSpec(master, stream))
    assert a.tobytes() == b.tobytes()
