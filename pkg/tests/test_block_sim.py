"""Unit tests for the two-mode block oracle and the n_bc sampler."""

import logging
import math

import numpy as np
import pytest
from scipy.stats import poisson

from analytic import Route, nbc_variance_coherent_exact, nbc_variance_fock
from block_sim import (
    TwoModeBlock,
    TwoModeState,
    apply_nbc,
    build_entangled_state,
    coherent_lo_state,
    nbc_eigensystem,
    nbc_generator_block,
    nbc_moments,
    outcome_distribution,
    sample_nbc,
    shot_noise_state,
    summarize_samples,
)
from core import Tolerances
from fock_core import SqueezeParams, squeezed_vacuum_coefficients, truncation_for_tolerance, vacuum


def entangled(r, n_total, theta, phi=0.0):
    """The Fock-basis state measuring quadrature theta (varphi = theta - pi/2)."""
    return TwoModeState.from_block(build_entangled_state(SqueezeParams(r, phi), n_total, theta - math.pi / 2))


class TestGenerator:
    """n_bc inside one block."""

    @pytest.mark.parametrize("n_total", [1, 2, 50, 200, 399, 400])
    def test_spectrum(self, n_total):
        """Eigenvalues are N - 2j, j = 0..N."""
        spectrum = nbc_eigensystem(n_total)
        assert np.allclose(spectrum.eigenvalues, np.arange(-n_total, n_total + 1, 2), atol=1e-8, rtol=0)
        assert spectrum.outcomes.tolist() == list(range(-n_total, n_total + 1, 2))

    def test_empty_block(self):
        """Block N = 0 has the single outcome 0."""
        assert nbc_eigensystem(0).outcomes.tolist() == [0]

    @pytest.mark.parametrize("n_total", [3, 8, 21])
    def test_hermitian_and_gauge(self, n_total, tol):
        """The block matrix is Hermitian and the i^k gauge makes it real symmetric."""
        generator = nbc_generator_block(n_total)
        matrix = generator.dense()
        assert np.allclose(matrix, matrix.conj().T, atol=tol)
        gauged = generator.gauge.conj()[:, None] * matrix * generator.gauge[None, :]
        k = np.arange(n_total)
        expected = np.zeros((n_total + 1, n_total + 1))
        expected[k + 1, k] = expected[k, k + 1] = np.sqrt((k + 1) * (n_total - k))
        assert np.allclose(gauged, expected, atol=tol)

    def test_eigenvectors_orthonormal(self, tol):
        """Eigenvectors in the block basis form a unitary matrix and diagonalize n_bc."""
        spectrum = nbc_eigensystem(30)
        vectors = spectrum.eigenvectors
        assert np.allclose(vectors.conj().T @ vectors, np.eye(31), atol=tol)
        matrix = nbc_generator_block(30).dense()
        assert np.allclose(matrix @ vectors, vectors * spectrum.eigenvalues, atol=1e-9)

    def test_apply_matches_dense(self, tol):
        """The O(N) action equals the dense matrix-vector product."""
        rng = np.random.default_rng(7)
        amplitudes = rng.normal(size=13) + 1j * rng.normal(size=13)
        amplitudes /= np.linalg.norm(amplitudes)
        block = TwoModeBlock(12, amplitudes)
        assert np.allclose(apply_nbc(block), nbc_generator_block(12).dense() @ amplitudes, atol=tol)

    def test_block_conservation(self, tol):
        """On the full two-mode space n_bc only fills the blocks the state already occupies."""
        signal = squeezed_vacuum_coefficients(SqueezeParams(0.4, 0.9), 3)
        state = coherent_lo_state(1.0, 0.3, signal)
        dim = state.max_total + 2
        lowering = np.diag(np.sqrt(np.arange(1, dim)), k=1)
        psi = np.zeros((dim, dim), dtype=complex)
        for n_total, block in state.blocks.items():
            k = np.arange(n_total + 1)
            psi[k, n_total - k] = block.amplitudes

        # i (a^dag a0 - a0^dag a), mode a on rows and a0 on columns
        image = 1j * (lowering.T @ psi @ lowering.T - lowering @ psi @ lowering)
        totals = np.add.outer(np.arange(dim), np.arange(dim))
        outside = ~np.isin(totals, list(state.blocks))
        assert np.allclose(image[outside], 0.0, atol=tol)
        for n_total, block in state.blocks.items():
            k = np.arange(n_total + 1)
            assert np.allclose(image[k, n_total - k], apply_nbc(block), atol=tol)


class TestStates:
    """Block-structured state construction."""

    def test_entangled_structure(self):
        """Only even signal photon numbers are occupied; the LO takes the rest."""
        block = build_entangled_state(SqueezeParams(1.0), 200, 0.3)
        assert block.n_total == 200
        assert np.all(block.amplitudes[1::2] == 0.0)
        assert block.squared_norm == pytest.approx(1.0, abs=1e-12)

    def test_entangled_rejects_overlong_pairs(self):
        """2 m_max may not exceed N."""
        with pytest.raises(ValueError):
            build_entangled_state(SqueezeParams(1.0), 10, 0.0, m_max=6)

    def test_block_size_checked(self):
        """Block N needs N + 1 amplitudes."""
        with pytest.raises(ValueError):
            TwoModeBlock(3, np.ones(3) / math.sqrt(3))

    def test_coherent_lo_blocks(self):
        """The product state splits into blocks whose norms sum to one."""
        signal = squeezed_vacuum_coefficients(SqueezeParams(0.8), truncation_for_tolerance(0.8, 1e-12))
        state = coherent_lo_state(4.0, 0.0, signal)
        assert state.squared_norm == pytest.approx(1.0, abs=1e-9)
        assert list(state.blocks) == sorted(state.blocks)

    def test_coherent_lo_vacuum_signal(self):
        """beta = 4 against a vacuum signal: block norms follow Poisson(16)."""
        state = coherent_lo_state(4.0, 0.7, vacuum())
        totals = np.array(list(state.blocks))
        norms = np.array([block.squared_norm for block in state.blocks.values()])
        assert totals.tolist() == list(range(totals[-1] + 1))
        assert np.allclose(norms, poisson.pmf(totals, 16.0), rtol=1e-10, atol=1e-300)
        for block in state.blocks.values():
            assert np.all(block.amplitudes[1:] == 0.0)

    def test_coherent_lo_cutoff_guard(self):
        """Too small an LO cutoff leaves an unacceptable coherent tail."""
        with pytest.raises(ValueError):
            coherent_lo_state(4.0, 0.0, squeezed_vacuum_coefficients(SqueezeParams(0.5), 5), cutoff_lo=10)


class TestOracle:
    """Exact block moments against the analytic formulas."""

    def test_shot_noise(self):
        """|0>|N> gives mean 0 and variance exactly N."""
        report = nbc_moments(shot_noise_state(200))
        assert report.route is Route.ORACLE
        assert report.mean == pytest.approx(0.0, abs=1e-12)
        assert report.variance == pytest.approx(200.0, rel=1e-9)

    def test_fock_formula_sweep(self):
        """N = 200, r = 1: within 3% of N F, or 0.03 N where N F is below 0.05 N."""
        n_total = 200
        params = SqueezeParams(1.0)
        for theta in np.arange(16) * math.pi / 16:
            oracle = nbc_moments(entangled(1.0, n_total, theta)).variance
            predicted = nbc_variance_fock(n_total, params, theta).variance
            if predicted > 0.05 * n_total:
                assert abs(oracle - predicted) / predicted < 0.03
            else:
                assert abs(oracle - predicted) < 0.03 * n_total

    @pytest.mark.parametrize("r", [0.5, 1.0, 1.5])
    def test_converges_with_n(self, r):
        """The relative error at the squeezing minimum shrinks as N doubles."""
        params = SqueezeParams(r)
        errors = []
        for n_total in (100, 200, 400):
            oracle = nbc_moments(entangled(r, n_total, 0.0)).variance
            predicted = nbc_variance_fock(n_total, params, 0.0).variance
            errors.append(abs(oracle - predicted) / predicted)
        assert errors[0] > errors[1] > errors[2]

    def test_coherent_lo_exact(self):
        """beta = 4, r = 0.8: the block-exact variance equals beta^2 F + sinh^2 r."""
        params = SqueezeParams(0.8)
        signal = squeezed_vacuum_coefficients(params, truncation_for_tolerance(0.8, 1e-13))
        for theta in np.arange(8) * math.pi / 8:
            state = coherent_lo_state(4.0, theta - math.pi / 2, signal)
            report = nbc_moments(state)
            exact = nbc_variance_coherent_exact(4.0, params, theta).variance
            assert report.variance == pytest.approx(exact, rel=1e-6)
            assert report.mean == pytest.approx(0.0, abs=1e-8)

    @pytest.mark.parametrize("n_total", [1, 7, 200])
    def test_all_signal_block(self, n_total):
        """|N>|0> is the mirror of shot noise: mean 0, variance N."""
        amplitudes = np.zeros(n_total + 1, dtype=complex)
        amplitudes[-1] = 1.0
        report = nbc_moments(TwoModeState.from_block(TwoModeBlock(n_total, amplitudes)))
        assert report.mean == pytest.approx(0.0, abs=1e-12)
        assert report.variance == pytest.approx(float(n_total), rel=1e-12)

    def test_phase_covariance(self):
        """Over a varphi grid the variance is exactly A - B cos(2 theta - phi)."""
        r, phi, n_total = 1.0, 0.6, 200
        thetas = np.arange(12) * math.pi / 12
        variances = np.array([nbc_moments(entangled(r, n_total, theta, phi)).variance for theta in thetas])
        design = np.column_stack([np.ones_like(thetas), np.cos(2 * thetas), np.sin(2 * thetas)])
        (offset, c_cos, c_sin), *_ = np.linalg.lstsq(design, variances, rcond=None)
        assert np.allclose(design @ [offset, c_cos, c_sin], variances, rtol=1e-9, atol=0)
        assert math.hypot(c_cos, c_sin) > 0.0
        assert math.atan2(-c_sin, -c_cos) == pytest.approx(phi, abs=1e-8)

    @pytest.mark.parametrize("delta", [0.2, 1.1, 2.9])
    def test_lo_shift_moves_squeeze_phase(self, delta):
        """Advancing varphi by delta equals retarding phi by 2 delta."""
        r, phi, n_total, theta = 0.9, 0.4, 120, 0.3
        shifted = nbc_moments(entangled(r, n_total, theta + delta, phi))
        rotated = nbc_moments(entangled(r, n_total, theta, phi - 2 * delta))
        assert shifted.variance == pytest.approx(rotated.variance, rel=1e-10)

    def test_block_phases_leave_moments_real(self, caplog):
        """Random phases on each block change neither moment nor leave an imaginary mean."""
        signal = squeezed_vacuum_coefficients(SqueezeParams(0.8), truncation_for_tolerance(0.8, 1e-12))
        state = coherent_lo_state(3.0, 0.2, signal)
        rng = np.random.default_rng(5)
        rotated = TwoModeState(
            {
                n_total: TwoModeBlock(n_total, block.amplitudes * np.exp(1j * rng.uniform(0.0, 2 * math.pi)))
                for n_total, block in state.blocks.items()
            }
        )
        reference = nbc_moments(state)
        with caplog.at_level(logging.WARNING, logger="block_sim"):
            report = nbc_moments(rotated)
        assert not [record for record in caplog.records if record.levelno >= logging.WARNING]
        assert report.mean == pytest.approx(reference.mean, abs=1e-9)
        assert report.variance == pytest.approx(reference.variance, rel=1e-10)

    def test_truncated_state_accepted(self):
        """N = 100 at r = 1.5 loses a few 1e-6 of pair mass and is still measured."""
        block = build_entangled_state(SqueezeParams(1.5), 100, 0.0)
        assert 1.0 - 1e-4 < block.squared_norm < 1.0 - 1e-6
        state = TwoModeState.from_block(block)
        assert nbc_moments(state).variance > 0.0
        with pytest.raises(ValueError, match="truncation_mass"):
            nbc_moments(state, Tolerances(truncation_mass=1e-9))

    def test_unnormalized_rejected(self):
        """Moments of a lossy truncation are refused."""
        block = TwoModeBlock(2, np.array([0.5, 0.0, 0.5]))
        with pytest.raises(ValueError):
            nbc_moments(TwoModeState.from_block(block))


class TestSampling:
    """Seeded Monte Carlo of n_bc outcomes."""

    def test_outcome_distribution_moments(self):
        """The exact outcome distribution reproduces the oracle moments."""
        state = entangled(0.7, 60, 0.4)
        distribution = outcome_distribution(state)
        outcomes = np.array(list(distribution))
        probabilities = np.array(list(distribution.values()))
        assert probabilities.sum() == pytest.approx(1.0, abs=1e-12)
        mean = np.dot(outcomes, probabilities)
        variance = np.dot((outcomes - mean) ** 2, probabilities)
        assert variance == pytest.approx(nbc_moments(state).variance, rel=1e-8)

    def test_shot_noise_sampling(self):
        """10^5 samples of |0>|200> have variance within 5% of 200 and the parity of N."""
        samples = sample_nbc(shot_noise_state(200), 100_000, seed=42)
        assert samples.dtype == np.int64
        assert np.all(samples % 2 == 0)
        report = summarize_samples(samples)
        assert report.route is Route.MONTE_CARLO
        assert report.variance == pytest.approx(200.0, rel=0.05)

    def test_entangled_sampling(self):
        """N = 200, r = 1: 10^5 samples give the oracle variance within 5%."""
        state = entangled(1.0, 200, 0.0)
        report = summarize_samples(sample_nbc(state, 100_000, seed=42))
        assert report.variance == pytest.approx(nbc_moments(state).variance, rel=0.05)

    @pytest.mark.parametrize("n_samples", [10_000, 100_000])
    def test_entangled_sampling_error(self, n_samples):
        """Sample moments sit within five standard errors of the exact ones."""
        state = entangled(1.0, 200, 0.0)
        distribution = outcome_distribution(state)
        outcomes = np.array(list(distribution), dtype=float)
        probabilities = np.array(list(distribution.values()))
        variance = np.dot(outcomes**2, probabilities)
        fourth = np.dot(outcomes**4, probabilities)
        report = summarize_samples(sample_nbc(state, n_samples, seed=2024))
        assert abs(report.mean) < 5.0 * math.sqrt(variance / n_samples)
        assert abs(report.variance - variance) < 5.0 * math.sqrt((fourth - variance**2) / n_samples)

    def test_reproducible(self):
        """The same seed reproduces the record; another seed changes it."""
        state = entangled(1.0, 40, 0.0)
        first = sample_nbc(state, 5000, seed=3, chunk_size=1000)
        assert np.array_equal(first, sample_nbc(state, 5000, seed=3, chunk_size=1000))
        assert not np.array_equal(first, sample_nbc(state, 5000, seed=4, chunk_size=1000))

    def test_independent_of_workers(self):
        """Thread count does not change the record."""
        state = shot_noise_state(31)
        serial = sample_nbc(state, 10_000, seed=11, chunk_size=1500, max_workers=1)
        threaded = sample_nbc(state, 10_000, seed=11, chunk_size=1500, max_workers=4)
        assert np.array_equal(serial, threaded)
        assert np.all(serial % 2 == 1)

    @pytest.mark.parametrize("seed", [-1, 2**64])
    def test_seed_range(self, seed):
        """Seeds outside [0, 2**64) are rejected."""
        with pytest.raises(ValueError):
            sample_nbc(shot_noise_state(4), 10, seed=seed)

    def test_summary_needs_two_samples(self):
        """A single record has no sample variance."""
        with pytest.raises(ValueError):
            summarize_samples(np.array([2]))
