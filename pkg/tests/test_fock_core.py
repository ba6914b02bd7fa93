"""Unit tests for single-mode Fock amplitudes and quadrature statistics."""

import math

import numpy as np
import pytest

from fock_core import (
    FockVector,
    SqueezeParams,
    coherent_state,
    coherent_tail_mass,
    direct_pair_coefficients,
    fock_state,
    mean_photon_number,
    pair_coefficients,
    photon_number_distribution,
    quadrature_statistics,
    squeezed_vacuum_coefficients,
    truncation_for_tolerance,
    vacuum,
)


def squeezing_factor(r, phi, theta):
    return math.cosh(2 * r) - math.sinh(2 * r) * math.cos(2 * theta - phi)


class TestSqueezeParams:
    """Validation and normalization of (r, phi)."""

    def test_phase_reduced(self):
        """phi is reduced into [0, 2pi)."""
        params = SqueezeParams(0.5, 2 * math.pi + 1.0)
        assert params.phi == pytest.approx(1.0)
        assert SqueezeParams(0.5, -1.0).phi == pytest.approx(2 * math.pi - 1.0)

    @pytest.mark.parametrize("r", [-0.1, float("nan"), float("inf")])
    def test_invalid_r(self, r):
        """Negative or non-finite r is rejected."""
        with pytest.raises(ValueError):
            SqueezeParams(r)

    def test_xi(self):
        """xi = r e^{i phi}."""
        params = SqueezeParams(2.0, math.pi / 2)
        assert params.xi == pytest.approx(2.0j)


class TestPairCoefficients:
    """The ratio recurrence for C_m."""

    def test_vacuum_limit(self):
        """r = 0 gives C_0 = 1 and nothing else."""
        pairs = pair_coefficients(SqueezeParams(0.0), 10)
        assert pairs[0] == 1.0
        assert np.all(pairs[1:] == 0.0)

    def test_first_terms(self, tol):
        """C_0 = sqrt(sech r), C_1 = -C_0 e^{i phi} tanh r / sqrt 2."""
        r, phi = 1.0, 0.4
        pairs = pair_coefficients(SqueezeParams(r, phi), 1)
        c0 = 1 / math.sqrt(math.cosh(r))
        assert pairs[0] == pytest.approx(c0, abs=tol)
        expected = -c0 * np.exp(1j * phi) * math.tanh(r) / math.sqrt(2)
        assert abs(pairs[1] - expected) < tol

    @pytest.mark.parametrize("r,phi", [(0.3, 0.0), (1.0, 0.7), (2.5, 4.0)])
    def test_recurrence_matches_direct(self, r, phi):
        """Recurrence and log-space closed form agree to 1e-12 relative."""
        params = SqueezeParams(r, phi)
        recurrence = pair_coefficients(params, 150)
        direct = direct_pair_coefficients(params, 150)
        assert np.allclose(recurrence, direct, rtol=1e-12, atol=0.0)

    def test_no_overflow_at_large_m(self):
        """m well past 85 stays finite and the squared norm stays below one."""
        pairs = pair_coefficients(SqueezeParams(3.0), 2000)
        assert np.all(np.isfinite(pairs))
        assert np.sum(np.abs(pairs) ** 2) <= 1.0 + 1e-9

    def test_read_only(self):
        """Returned arrays cannot be mutated."""
        pairs = pair_coefficients(SqueezeParams(1.0), 5)
        with pytest.raises(ValueError):
            pairs[0] = 0.0


class TestSqueezedVacuum:
    """Interleaved even-photon FockVector."""

    def test_odd_entries_zero(self):
        """Odd photon numbers carry exactly zero amplitude."""
        state = squeezed_vacuum_coefficients(SqueezeParams(1.2, 0.3), 40)
        assert len(state) == 81
        assert np.all(state.amplitudes[1::2] == 0.0)
        assert np.all(state.amplitudes[::2] != 0.0)

    @pytest.mark.parametrize("r", [0.1, 1.0, 2.0])
    def test_truncation_for_tolerance(self, r):
        """The chosen m_max is the smallest one leaving less than the requested tail."""
        tail = 1e-10
        m_max = truncation_for_tolerance(r, tail)
        kept = np.sum(np.abs(pair_coefficients(SqueezeParams(r), m_max)) ** 2)
        assert 1.0 - kept < tail
        if m_max > 0:
            short = np.sum(np.abs(pair_coefficients(SqueezeParams(r), m_max - 1)) ** 2)
            assert 1.0 - short >= tail

    def test_truncation_vacuum(self):
        """No pairs are needed at r = 0."""
        assert truncation_for_tolerance(0.0, 1e-12) == 0

    @pytest.mark.parametrize("tail", [0.0, 1.0, -1e-3])
    def test_truncation_rejects_tail(self, tail):
        """The tail budget must lie in (0, 1)."""
        with pytest.raises(ValueError):
            truncation_for_tolerance(1.0, tail)

    def test_mean_photon_number(self):
        """<n> = sinh^2 r."""
        r = 1.3
        state = squeezed_vacuum_coefficients(SqueezeParams(r), truncation_for_tolerance(r, 1e-14))
        assert mean_photon_number(state) == pytest.approx(math.sinh(r) ** 2, rel=1e-10)
        populations = photon_number_distribution(state)
        assert np.all(populations[1::2] == 0.0)


class TestConstructors:
    """Vacuum, number and coherent states."""

    def test_vacuum_and_fock(self):
        """Number states put all weight on one entry."""
        assert vacuum(3).amplitudes.tolist() == [1, 0, 0, 0]
        assert fock_state(2).amplitudes.tolist() == [0, 0, 1]
        with pytest.raises(ValueError):
            fock_state(4, cutoff=2)

    def test_norm_above_one_rejected(self):
        """A FockVector may not carry more than unit probability."""
        with pytest.raises(ValueError):
            FockVector(np.array([1.0, 0.1]))

    def test_coherent_normalized(self):
        """A generous cutoff captures the whole Poisson distribution."""
        state = coherent_state(3.0, 0.5, 80)
        assert state.squared_norm == pytest.approx(1.0, abs=1e-12)
        assert coherent_tail_mass(3.0, 80) < 1e-20

    def test_coherent_tail_mass_zero_beta(self):
        """The vacuum has no tail."""
        assert coherent_tail_mass(0.0, 0) == 0.0


class TestQuadratureStatistics:
    """Exact X(theta) moments."""

    def test_vacuum(self, tol):
        """Vacuum: mean 0, variance 1/4 at every angle."""
        for theta in np.linspace(0, math.pi, 5):
            stats = quadrature_statistics(vacuum(4), theta)
            assert stats.mean == pytest.approx(0.0, abs=tol)
            assert stats.variance == pytest.approx(0.25, abs=tol)

    @pytest.mark.parametrize("r,phi", [(0.5, 0.0), (1.0, 0.0), (1.0, 1.1)])
    def test_squeezed_variance(self, r, phi):
        """Var X(theta) = F(r, phi, theta) / 4; e^{-2r}/4 at 2 theta = phi."""
        params = SqueezeParams(r, phi)
        state = squeezed_vacuum_coefficients(params, truncation_for_tolerance(r, 1e-15))
        for theta in np.linspace(0, math.pi, 9):
            stats = quadrature_statistics(state, theta)
            assert stats.mean == pytest.approx(0.0, abs=1e-12)
            assert stats.variance == pytest.approx(squeezing_factor(r, phi, theta) / 4, rel=1e-8)
        assert quadrature_statistics(state, phi / 2).variance == pytest.approx(math.exp(-2 * r) / 4, rel=1e-8)

    def test_coherent_mean(self):
        """<X(theta)> = beta cos(varphi - theta) with vacuum-level variance."""
        beta, varphi = 2.0, 0.3
        state = coherent_state(beta, varphi, 60)
        for theta in (0.0, 0.7, 2.0):
            stats = quadrature_statistics(state, theta)
            assert stats.mean == pytest.approx(beta * math.cos(varphi - theta), rel=1e-10)
            assert stats.variance == pytest.approx(0.25, rel=1e-8)

    def test_unnormalized_rejected(self):
        """Truncations that lose noticeable probability are refused."""
        state = squeezed_vacuum_coefficients(SqueezeParams(2.0), 3)
        with pytest.raises(ValueError):
            quadrature_statistics(state, 0.0)
