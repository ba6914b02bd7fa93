"""
Settings package for squeeze2phase.

This package loads the YAML configuration holding numerical tolerances,
per-subcommand defaults and the published figure parameters.
"""

from .manager import SettingsManager, get_settings_manager

__all__ = ['SettingsManager', 'get_settings_manager']
__version__ = '1.0.0'
