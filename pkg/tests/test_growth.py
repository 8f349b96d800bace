import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wvlab.errors import DomainError, InsufficientTruncation
from wvlab.growth import (
    GrowthProfile,
    RadiusGrid,
    g_norm,
    growth_profile,
    max_modulus,
    max_term,
    parseval_check,
    s_norm,
    trig_sup,
)
from wvlab.sampler import SeedSpec, complex_gaussian, rademacher, randomize, steinhaus
from wvlab.series import CoefficientSequence, make_exp_series, make_geometric_series

EXP = make_exp_series(1200)
GEOM = make_geometric_series(8000)

# brute-force max of 10^n/n! over n <= 100, frozen
LOG_MU_EXP_10 = 7.921438356864941


def test_mu_oracle():
    best = max(10**n / math.factorial(n) for n in range(101))
    assert math.log(best) == pytest.approx(LOG_MU_EXP_10, rel=1e-15)


class TestMaxTerm:
    def test_exp_10(self):
        log_mu, n = max_term(EXP, 10.0)
        assert log_mu == pytest.approx(LOG_MU_EXP_10, rel=1e-13)
        assert n in (9, 10)

    def test_geometric(self):
        assert max_term(GEOM, 0.9) == (0.0, 0)
        assert max_term(GEOM, 0.5)[0] == 0.0

    def test_exp_1(self):
        assert max_term(EXP, 1.0)[0] == pytest.approx(0.0, abs=1e-15)

    def test_zero_series(self):
        with pytest.raises(DomainError):
            max_term(CoefficientSequence([-np.inf, -np.inf], [0, 0]), 1.0)

    def test_stirling(self):
        for r in (100.0, 300.0, 600.0):
            dev = max_term(EXP, r)[0] - (r - 0.5 * math.log(r) - 0.5 * math.log(2 * math.pi))
            assert abs(dev) <= 0.01


class TestNorms:
    def test_s_geometric(self):
        assert math.exp(s_norm(GEOM, 0.9)) == pytest.approx(1 / math.sqrt(1 - 0.81), rel=1e-12)

    def test_s_steinhaus(self):
        g = randomize(EXP, steinhaus(), SeedSpec(0))
        assert s_norm(g, 7.0) == pytest.approx(s_norm(EXP, 7.0), abs=1e-13)

    def test_s_single_term(self):
        seq = CoefficientSequence([0.0], [0.0], polynomial=True)
        assert s_norm(seq, 3.0) == 0.0

    def test_g(self):
        assert g_norm(GEOM, 0.9) == pytest.approx(math.log(10), rel=1e-12)
        assert g_norm(EXP, 5.0) == pytest.approx(5.0, rel=1e-14)
        assert g_norm(randomize(EXP, rademacher(), SeedSpec(1)), 5.0) == pytest.approx(5.0, rel=1e-14)

    def test_insufficient(self):
        with pytest.raises(InsufficientTruncation):
            s_norm(make_geometric_series(100), 0.99)


class TestMaxModulus:
    def test_exp(self):
        assert max_modulus(EXP, 2.0) == pytest.approx(2.0, rel=1e-12)

    def test_geometric(self):
        assert math.exp(max_modulus(GEOM, 0.5)) == pytest.approx(2.0, rel=1e-12)

    def test_single_monomial(self):
        seq = CoefficientSequence.from_coefficients([0.0, 1.0], polynomial=True)
        x = np.array([0.3, 2.0 - 1.5j])
        for r in (0.5, 3.0, 40.0):
            assert math.exp(max_modulus(seq, r, multipliers=x)) == pytest.approx(2.5 * r, rel=1e-12)

    def test_lower_bound_of_dense_evaluation(self):
        g = randomize(make_exp_series(300), complex_gaussian(), SeedSpec(2))
        seq = g.as_sequence()
        r = 20.0
        log_M = max_modulus(g, r)
        theta = np.linspace(0, 2 * np.pi, 1 << 15, endpoint=False)
        terms = seq.log_abs + np.arange(seq.length) * np.log(r)
        top = terms.max()
        c = np.exp(terms - top + 1j * seq.phase)
        dense = top + np.log(np.abs(np.exp(1j * np.outer(theta, np.arange(seq.length))) @ c).max())
        assert log_M >= dense - 1e-9
        assert log_M <= math.log(sum(np.abs(c))) + top + 1e-12

    def test_trig_sup_quadratic(self):
        # |1 + e^{it}| peaks at t = 0 with value 2
        val, theta = trig_sup(np.array([1.0, 1.0]))
        assert val == pytest.approx(2.0, rel=1e-15)


class TestParseval:
    def test_exp(self):
        assert parseval_check(EXP, 3.0, samples=4096) <= 1e-10

    def test_geometric_polynomial(self):
        p = make_geometric_series(64).as_polynomial()
        assert parseval_check(p, 0.5, samples=2048) <= 1e-10

    def test_single_term(self):
        assert parseval_check(CoefficientSequence([0.0], [0.0], polynomial=True), 2.0) <= 1e-15

    def test_too_few_samples(self):
        with pytest.raises(DomainError):
            parseval_check(EXP, 3.0, samples=16)


class TestProfile:
    def test_exp_log_M(self):
        p = growth_profile(EXP, RadiusGrid.explicit([1, 2, 4, 8]))
        np.testing.assert_allclose(p.log_M, [1, 2, 4, 8], rtol=1e-9)

    def test_geometric_approach(self):
        grid = RadiusGrid.approach_disk(0.5, 0.5, 8)
        p = growth_profile(GEOM, grid)
        np.testing.assert_allclose(p.log_G, -np.log1p(-grid.radii), rtol=1e-11)
        np.testing.assert_allclose(p.log_M, p.log_G, rtol=1e-11)

    def test_reports_offending_radius(self):
        with pytest.raises(InsufficientTruncation) as exc:
            growth_profile(make_exp_series(100), RadiusGrid.explicit([1.0, 10.0, 80.0]))
        assert exc.value.r == 80.0

    def test_csv_roundtrip(self):
        p = growth_profile(EXP, RadiusGrid.geometric_plane(1.0, 2.0, 5))
        text = p.to_csv()
        assert text.splitlines()[0] == "r,log_mu,log_S,log_G,log_M,N_trunc"
        q = GrowthProfile.from_csv(text)
        np.testing.assert_array_equal(q.log_M, p.log_M)
        np.testing.assert_array_equal(q.n_trunc, p.n_trunc)

    def test_grid_validation(self):
        with pytest.raises(DomainError):
            RadiusGrid.explicit([1.0, 1.0])
        with pytest.raises(DomainError):
            RadiusGrid.explicit([0.5, 1.0], domain_radius=1.0)
        with pytest.raises(DomainError):
            RadiusGrid.approach_disk(0.5, 1.5, 3)

    def test_M_non_decreasing(self):
        g = randomize(EXP, complex_gaussian(), SeedSpec(3))
        p = growth_profile(g, RadiusGrid.geometric_between(1.0, 256.0, 4))
        assert np.all(np.diff(p.log_M) >= -1e-12)

    def test_positive_coefficients_M_equals_G(self):
        p = growth_profile(EXP, RadiusGrid.geometric_between(0.5, 300.0, 2))
        np.testing.assert_allclose(p.log_M, p.log_G, rtol=1e-12, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.floats(0.3, 200.0), st.sampled_from(["rademacher", "gauss", "steinhaus"]))
def test_ordering_invariant(seed, r, kind):
    s = {"rademacher": rademacher(), "gauss": complex_gaussian(), "steinhaus": steinhaus()}[kind]
    g = randomize(EXP, s, SeedSpec(seed))
    p = growth_profile(g, RadiusGrid.explicit([r]))
    assert p.log_mu[0] <= p.log_S[0] + 1e-12
    assert p.log_S[0] <= p.log_G[0] + 1e-12
    assert p.log_M[0] <= p.log_G[0] + 1e-12
    assert p.log_S[0] <= p.log_M[0] + 1e-9  # the circle mean never exceeds the max
