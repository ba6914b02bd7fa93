"""Shared fixtures for the squeeze2phase test suite."""

import pytest

from settings import get_settings_manager

TOL = 1e-10


@pytest.fixture
def tol():
    """Numerical tolerance for exact-arithmetic comparisons."""
    return TOL


@pytest.fixture
def settings():
    """A fresh SettingsManager on the shipped configuration."""
    return get_settings_manager()
