# core.py
# Shared numerical plumbing for squeeze2phase: tolerances, argument checks and
# the ordered worker pool used by the sweeps.

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, TypeVar

import numpy as np

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

# Rounding allowance on squared norms.
EPS_NORM = 1e-9
# Imaginary residue tolerated on moments of Hermitian observables.
EPS_HERMITIAN = 1e-10

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Tolerances:
    """
    Acceptance limits applied inside the library.

    The defaults mirror the `tolerances` section of settings/config.yaml;
    SettingsManager.get_tolerances() builds an instance from the file.

    Attributes:
        norm: Rounding allowance on squared norms, above and below
        hermitian: Imaginary residue tolerated on Hermitian moments
        truncation_mass: Largest probability a truncated state may have lost;
            moments of such a state are conditional on the kept components
        window_mass: Smallest mass a restricted phase window may hold
        poisson_window_mass: Largest Poisson mass a photon-number window may miss
    """

    norm: float = EPS_NORM
    hermitian: float = EPS_HERMITIAN
    truncation_mass: float = 1e-4
    window_mass: float = 1e-12
    poisson_window_mass: float = 1e-9

    def __post_init__(self):
        for name in ("norm", "hermitian", "truncation_mass", "window_mass", "poisson_window_mass"):
            value = float(getattr(self, name))
            if not np.isfinite(value) or value < 0.0:
                raise ValueError(f"tolerance {name} must be a finite non-negative real, got {value!r}")
            object.__setattr__(self, name, value)


DEFAULT_TOLERANCES = Tolerances()

def squared_norm(amplitudes: np.ndarray) -> float:
    """Return sum |c_k|^2 of a complex amplitude array."""
    return float(np.vdot(amplitudes, amplitudes).real)


def frozen_array(values, dtype=complex) -> np.ndarray:
    """
    Copy `values` into a read-only 1-D numpy array.

    State containers hand these out, so callers cannot mutate a value that
    another thread (or an lru_cache) still holds.
    """
    array = np.array(values, dtype=dtype, copy=True).reshape(-1)
    array.setflags(write=False)
    return array


def require_non_negative_int(name: str, value) -> int:
    if isinstance(value, bool) or int(value) != value or value < 0:
        raise ValueError(f"{name} must be a non-negative integer, got {value!r}")
    return int(value)


def require_positive_int(name: str, value) -> int:
    value = require_non_negative_int(name, value)
    if value == 0:
        raise ValueError(f"{name} must be a positive integer, got 0")
    return value


def require_non_negative(name: str, value: float) -> float:
    value = float(value)
    if not np.isfinite(value) or value < 0.0:
        raise ValueError(f"{name} must be a finite non-negative real, got {value!r}")
    return value


def require_finite(name: str, value: float) -> float:
    value = float(value)
    if not np.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


def check_norm_bound(norm: float, what: str, tolerance: float = EPS_NORM) -> None:
    """Raise ValueError if a squared norm exceeds unity beyond rounding."""
    if norm > 1.0 + tolerance:
        raise ValueError(
            f"{what} has squared norm {norm:.15g} > 1 + {tolerance:g}"
        )


def check_truncated_norm(norm: float, what: str, tolerances: Tolerances = DEFAULT_TOLERANCES) -> None:
    """
    Accept a squared norm in [1 - truncation_mass - norm, 1 + norm].

    A finite truncation of an infinite superposition loses a little probability;
    callers divide their moments by the squared norm.

    Raises:
        ValueError: If the norm exceeds one or the state has lost more than truncation_mass.
    """
    check_norm_bound(norm, what, tolerances.norm)
    if norm < 1.0 - tolerances.truncation_mass - tolerances.norm:
        raise ValueError(
            f"{what} is not normalized: squared norm {norm:.15g} has lost more than "
            f"truncation_mass={tolerances.truncation_mass:g}"
        )


def parallel_map(
    func: Callable[[T], R], items: Iterable[T], max_workers: int | None = None
) -> list[R]:
    """
    Evaluate `func` over `items` on a thread pool and return results in input order.

    Args:
        func: Pure function of one item
        items: Inputs; consumed once
        max_workers: Pool size. 1 (or a single item) runs inline.

    Returns:
        List of results, ordered like `items`
    """
    items = list(items)
    if max_workers == 1 or len(items) <= 1:
        return [func(item) for item in items]

    logger.debug(f"Dispatching {len(items)} tasks to a pool of {max_workers or 'default'} workers")
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(func, items))
