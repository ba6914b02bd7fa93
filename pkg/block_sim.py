"""
block_sim - brute-force oracle for the two-mode homodyne experiment.

States of modes a (signal) and a0 (local oscillator) are stored block by block:
block N holds the amplitudes of |k>_a |N - k>_{a0}, k = 0..N. The measured
observable

    n_bc = n_b - n_c = i (a^dag a0 - a0^dag a),

follows from b = (a + i a0)/sqrt(2) and c = (a0 + i a)/sqrt(2). It conserves the
total photon number and is tridiagonal inside a block:

    <k+1| n_bc |k> = i sqrt((k+1)(N-k)),   <k| n_bc |k+1> = -i sqrt((k+1)(N-k)).

The gauge |k> -> i^k |k> turns it into the real symmetric tridiagonal matrix
with off-diagonal sqrt((k+1)(N-k)), i.e. 2 J_x for spin N/2, whose spectrum is
{N - 2j : j = 0..N}.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from types import MappingProxyType
from typing import Mapping

import numpy as np
from scipy.linalg import eigh_tridiagonal

from analytic import Route, VarianceReport
from core import (
    DEFAULT_TOLERANCES,
    Tolerances,
    check_norm_bound,
    check_truncated_norm,
    frozen_array,
    parallel_map,
    require_finite,
    require_non_negative,
    require_non_negative_int,
    require_positive_int,
    squared_norm,
)
from fock_core import FockVector, SqueezeParams, coherent_state, coherent_tail_mass, pair_coefficients

logger = logging.getLogger(__name__)

# Largest coherent-state tail coherent_lo_state accepts.
LO_TAIL_MASS = 1e-9
DEFAULT_CHUNK_SIZE = 65536
SEED_LIMIT = 2**64
# i^k for k mod 4, exact.
_I_POWERS = np.array([1.0, 1.0j, -1.0, -1.0j])


@dataclass(frozen=True)
class TwoModeBlock:
    """Amplitudes of |k>_a |N-k>_{a0} for k = 0..N at fixed total photon number N."""

    n_total: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        n_total = require_non_negative_int("N", self.n_total)
        amplitudes = frozen_array(self.amplitudes)
        if amplitudes.size != n_total + 1:
            raise ValueError(
                f"block N={n_total} needs {n_total + 1} amplitudes, got {amplitudes.size}"
            )
        check_norm_bound(squared_norm(amplitudes), f"TwoModeBlock N={n_total}")
        object.__setattr__(self, "n_total", n_total)
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def squared_norm(self) -> float:
        return squared_norm(self.amplitudes)


@dataclass(frozen=True)
class TwoModeState:
    """Superposition over total-photon-number blocks, keyed by N in ascending order."""

    blocks: Mapping[int, TwoModeBlock]

    def __post_init__(self):
        ordered = {}
        for n_total in sorted(self.blocks):
            block = self.blocks[n_total]
            if block.n_total != n_total:
                raise ValueError(f"block stored under N={n_total} has N={block.n_total}")
            ordered[n_total] = block
        if not ordered:
            raise ValueError("TwoModeState needs at least one block")
        check_norm_bound(sum(b.squared_norm for b in ordered.values()), "TwoModeState")
        object.__setattr__(self, "blocks", MappingProxyType(ordered))

    @classmethod
    def from_block(cls, block: TwoModeBlock) -> "TwoModeState":
        return cls({block.n_total: block})

    @property
    def squared_norm(self) -> float:
        return sum(block.squared_norm for block in self.blocks.values())

    @property
    def max_total(self) -> int:
        return max(self.blocks)


@dataclass(frozen=True)
class NbcGenerator:
    """
    n_bc restricted to block N, stored as its tridiagonal bands.

    `coupling[k]` = sqrt((k+1)(N-k)) is the off-diagonal of the real symmetric
    gauge form; `gauge[k]` = i^k maps gauge-form vectors back to the block basis.
    """

    n_total: int
    coupling: np.ndarray = field(repr=False)
    gauge: np.ndarray = field(repr=False)

    @property
    def lower(self) -> np.ndarray:
        """Entries (k+1, k) of the Hermitian block matrix."""
        return 1j * self.coupling

    def dense(self) -> np.ndarray:
        """The (N+1) x (N+1) Hermitian matrix; for tests and small blocks."""
        matrix = np.zeros((self.n_total + 1, self.n_total + 1), dtype=complex)
        k = np.arange(self.n_total)
        matrix[k + 1, k] = self.lower
        matrix[k, k + 1] = np.conj(self.lower)
        return matrix

    def real_symmetric(self) -> tuple[np.ndarray, np.ndarray]:
        """(diagonal, off-diagonal) of the gauge-transformed real symmetric form."""
        return np.zeros(self.n_total + 1), self.coupling

    def apply(self, amplitudes: np.ndarray) -> np.ndarray:
        """n_bc |psi> for one block's amplitudes, O(N)."""
        psi = np.asarray(amplitudes, dtype=complex)
        if psi.size != self.n_total + 1:
            raise ValueError(f"expected {self.n_total + 1} amplitudes, got {psi.size}")
        out = np.zeros_like(psi)
        out[1:] += 1j * self.coupling * psi[:-1]
        out[:-1] -= 1j * self.coupling * psi[1:]
        return out


@dataclass(frozen=True)
class NbcSpectrum:
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns, block basis) of n_bc in block N."""

    n_total: int
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)

    @property
    def outcomes(self) -> np.ndarray:
        """Eigenvalues snapped to the integer lattice N - 2j."""
        return np.rint(self.eigenvalues).astype(np.int64)


@lru_cache(maxsize=256)
def nbc_generator_block(n_total: int) -> NbcGenerator:
    """
    Tridiagonal Hermitian representation of n_bc in block N.

    Entry (k+1, k) is i sqrt((k+1)(N-k)), entry (k, k+1) its conjugate, diagonal zero.
    """
    n_total = require_non_negative_int("N", n_total)
    k = np.arange(n_total, dtype=float)
    coupling = np.sqrt((k + 1.0) * (n_total - k))
    coupling.setflags(write=False)
    gauge = frozen_array(_I_POWERS[np.arange(n_total + 1) % 4])
    return NbcGenerator(n_total=n_total, coupling=coupling, gauge=gauge)


@lru_cache(maxsize=256)
def nbc_eigensystem(n_total: int) -> NbcSpectrum:
    """
    Full spectral decomposition of n_bc in block N.

    The real symmetric gauge form is diagonalized with LAPACK's tridiagonal
    solver; eigenvectors v are mapped back as (i^k v_k).
    """
    generator = nbc_generator_block(n_total)
    if generator.n_total == 0:
        eigenvalues = np.zeros(1)
        real_vectors = np.ones((1, 1))
    else:
        diagonal, off_diagonal = generator.real_symmetric()
        eigenvalues, real_vectors = eigh_tridiagonal(diagonal, off_diagonal)
    eigenvectors = generator.gauge[:, None] * real_vectors
    eigenvalues = np.ascontiguousarray(eigenvalues)
    eigenvalues.setflags(write=False)
    eigenvectors.setflags(write=False)
    logger.debug(f"Diagonalized n_bc block N={generator.n_total}")
    return NbcSpectrum(n_total=generator.n_total, eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def build_entangled_state(
    params: SqueezeParams, n_total: int, varphi: float, m_max: int | None = None
) -> TwoModeBlock:
    """
    The entangled signal/LO state sum_m C_m |2m>_a |N-2m>_{a0} e^{i(N-2m) varphi}.

    Args:
        params: Squeeze parameters of the pair amplitudes C_m
        n_total: Total photon number N in modes a and a0
        varphi: Local-oscillator phase; the measured quadrature is theta = varphi + pi/2
        m_max: Highest pair index kept; defaults to N // 2

    Returns:
        TwoModeBlock for block N

    Raises:
        ValueError: If 2 m_max > N.
    """
    n_total = require_non_negative_int("N", n_total)
    varphi = require_finite("varphi", varphi)
    m_max = n_total // 2 if m_max is None else require_non_negative_int("m_max", m_max)
    if 2 * m_max > n_total:
        raise ValueError(f"2*m_max = {2 * m_max} exceeds N = {n_total}; |N-2m> would be negative")

    pairs = pair_coefficients(params, m_max)
    m = np.arange(m_max + 1)
    amplitudes = np.zeros(n_total + 1, dtype=complex)
    amplitudes[2 * m] = pairs * np.exp(1j * (n_total - 2 * m) * varphi)
    return TwoModeBlock(n_total=n_total, amplitudes=amplitudes)


def shot_noise_state(n_total: int) -> TwoModeState:
    """|0>_a |N>_{a0}: vacuum signal against an N-photon local oscillator."""
    n_total = require_non_negative_int("N", n_total)
    amplitudes = np.zeros(n_total + 1, dtype=complex)
    amplitudes[0] = 1.0
    return TwoModeState.from_block(TwoModeBlock(n_total=n_total, amplitudes=amplitudes))


def default_lo_cutoff(beta: float) -> int:
    """beta^2 + 10 beta + 10, rounded up."""
    beta = require_non_negative("beta", beta)
    return int(math.ceil(beta**2 + 10.0 * beta + 10.0))


def coherent_lo_state(
    beta: float, varphi: float, signal: FockVector, cutoff_lo: int | None = None
) -> TwoModeState:
    """
    Product of a signal state in mode a and |beta e^{i varphi}> in mode a0, split into blocks.

    Block N collects the anti-diagonal s_k c_{N-k}; blocks with exactly zero
    amplitude are dropped.

    Raises:
        ValueError: If the coherent-state tail beyond cutoff_lo exceeds 1e-9.
    """
    beta = require_non_negative("beta", beta)
    cutoff_lo = default_lo_cutoff(beta) if cutoff_lo is None else require_non_negative_int("cutoff_lo", cutoff_lo)
    tail = coherent_tail_mass(beta, cutoff_lo)
    if tail > LO_TAIL_MASS:
        raise ValueError(
            f"cutoff_lo={cutoff_lo} leaves coherent tail {tail:.3g} > {LO_TAIL_MASS:g} for beta={beta:g}"
        )

    lo = coherent_state(beta, varphi, cutoff_lo).amplitudes
    s = signal.amplitudes
    flipped = np.fliplr(np.outer(s, lo))
    blocks = {}
    for n_total in range(s.size + lo.size - 1):
        k_min = max(0, n_total - cutoff_lo)
        anti_diagonal = flipped.diagonal(cutoff_lo - n_total)
        if not np.any(anti_diagonal):
            continue
        amplitudes = np.zeros(n_total + 1, dtype=complex)
        amplitudes[k_min : k_min + anti_diagonal.size] = anti_diagonal
        blocks[n_total] = TwoModeBlock(n_total=n_total, amplitudes=amplitudes)

    state = TwoModeState(blocks)
    logger.debug(
        f"Coherent LO state beta={beta:g}: {len(blocks)} blocks up to N={state.max_total}, "
        f"norm {state.squared_norm:.15g}"
    )
    return state


def apply_nbc(block: TwoModeBlock) -> np.ndarray:
    """n_bc applied to one block; the result lives in the same block."""
    return nbc_generator_block(block.n_total).apply(block.amplitudes)


def nbc_moments(state: TwoModeState, tolerances: Tolerances = DEFAULT_TOLERANCES) -> VarianceReport:
    """
    Exact <n_bc> and <(Delta n_bc)^2> by applying the generator block by block.

    <n_bc> = sum_N <psi_N| n_bc |psi_N>, <n_bc^2> = sum_N ||n_bc psi_N||^2, both
    divided by the state's squared norm, so a truncated state reports moments
    conditional on its kept components. No large-N approximation is made.

    Raises:
        ValueError: If the state exceeds unit norm or has lost more than
            tolerances.truncation_mass.
    """
    norm = state.squared_norm
    check_truncated_norm(norm, "nbc_moments input", tolerances)

    first = 0.0 + 0.0j
    second = 0.0
    for block in state.blocks.values():
        image = apply_nbc(block)
        first += np.vdot(block.amplitudes, image)
        second += squared_norm(image)
    first /= norm
    second /= norm

    if abs(first.imag) > tolerances.hermitian * max(1.0, abs(first.real)):
        logger.warning(f"<n_bc> has imaginary residue {first.imag:.3g}; discarding it")
    mean = float(first.real)
    return VarianceReport(mean=mean, variance=max(second - mean**2, 0.0), route=Route.ORACLE)


def _block_outcome_probabilities(block: TwoModeBlock) -> tuple[np.ndarray, np.ndarray]:
    """(outcomes, probabilities) of n_bc inside one block, probabilities summing to 1."""
    spectrum = nbc_eigensystem(block.n_total)
    overlaps = spectrum.eigenvectors.conj().T @ block.amplitudes
    probabilities = np.abs(overlaps) ** 2
    return spectrum.outcomes, probabilities / probabilities.sum()


def outcome_distribution(state: TwoModeState) -> dict[int, float]:
    """Exact probability of every n_bc outcome, summed over blocks."""
    norm = state.squared_norm
    distribution: dict[int, float] = {}
    for block in state.blocks.values():
        weight = block.squared_norm / norm
        outcomes, probabilities = _block_outcome_probabilities(block)
        for outcome, probability in zip(outcomes.tolist(), probabilities.tolist()):
            distribution[outcome] = distribution.get(outcome, 0.0) + weight * probability
    return dict(sorted(distribution.items()))


def _sample_chunk(
    state: TwoModeState, seed_sequence: np.random.SeedSequence, size: int
) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed_sequence))
    blocks = list(state.blocks.values())
    block_weights = np.array([b.squared_norm for b in blocks])
    chosen = rng.choice(len(blocks), size=size, p=block_weights / block_weights.sum())

    samples = np.empty(size, dtype=np.int64)
    for index, block in enumerate(blocks):
        positions = np.nonzero(chosen == index)[0]
        if positions.size == 0:
            continue
        outcomes, probabilities = _block_outcome_probabilities(block)
        samples[positions] = rng.choice(outcomes, size=positions.size, p=probabilities)
    return samples


def sample_nbc(
    state: TwoModeState,
    n_samples: int,
    seed: int,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    max_workers: int | None = 1,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> np.ndarray:
    """
    Draw i.i.d. n_bc outcomes: a block by its norm, then an eigenvalue by its projection.

    The sample range is cut into fixed chunks; chunk i uses
    PCG64(SeedSequence(seed).spawn(n_chunks)[i]), so the record depends on the
    seed and chunk size but not on `max_workers`.

    Args:
        state: Two-mode state, normalized up to truncation
        n_samples: Number of records, positive
        seed: Non-negative integer below 2**64
        chunk_size: Samples per independent stream
        max_workers: Threads used to fill the chunks
        tolerances: Norm acceptance limits

    Returns:
        int64 array of outcomes, each with the parity of its block's N
    """
    n_samples = require_positive_int("n_samples", n_samples)
    chunk_size = require_positive_int("chunk_size", chunk_size)
    seed = require_non_negative_int("seed", seed)
    if seed >= SEED_LIMIT:
        raise ValueError(f"seed must be below 2**64, got {seed}")
    check_truncated_norm(state.squared_norm, "sample_nbc input", tolerances)

    n_chunks = -(-n_samples // chunk_size)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    sizes = [min(chunk_size, n_samples - i * chunk_size) for i in range(n_chunks)]
    logger.debug(f"Sampling {n_samples} records in {n_chunks} chunks (seed={seed})")
    chunks = parallel_map(
        lambda job: _sample_chunk(state, job[0], job[1]), zip(children, sizes), max_workers
    )
    return np.concatenate(chunks)


def summarize_samples(samples: np.ndarray) -> VarianceReport:
    """Sample mean and unbiased sample variance of an n_bc record."""
    samples = np.asarray(samples, dtype=float)
    if samples.size < 2:
        raise ValueError("need at least two samples to estimate a variance")
    return VarianceReport(
        mean=float(samples.mean()),
        variance=float(samples.var(ddof=1)),
        route=Route.MONTE_CARLO,
    )
