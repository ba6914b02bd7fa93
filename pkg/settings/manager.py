"""
Settings management for squeeze2phase.

This module provides a SettingsManager class that loads the YAML configuration
and hands out tolerances, numerical defaults and per-subcommand parameters.
"""

import logging
from dataclasses import fields
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

from core import Tolerances

logger = logging.getLogger(__name__)


class SettingsManager:
    """
    Loads squeeze2phase settings and resolves per-command defaults.

    The configuration has four sections: `tolerances`, `numerics`, `commands`
    (one mapping of default parameters per CLI subcommand) and `acceptance`
    (thresholds used by the invariant suite).
    """

    def __init__(self, config_path: Optional[Union[str, Path]] = None):
        """
        Initialize the SettingsManager.

        Args:
            config_path: Path to the YAML configuration file. If None, uses
                        the config.yaml shipped in the settings directory.
        """
        if config_path is None:
            config_path = Path(__file__).parent / "config.yaml"

        self.config_path = Path(config_path).resolve()
        self.config = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        """
        Load the YAML configuration file.

        Returns:
            Dict containing the loaded configuration.

        Raises:
            FileNotFoundError: If the config file doesn't exist.
            yaml.YAMLError: If the config file is malformed.
            KeyError: If a required section is missing.
        """
        try:
            with self.config_path.open("r", encoding="utf-8") as f:
                config = yaml.safe_load(f) or {}
        except FileNotFoundError:
            raise FileNotFoundError(
                f"Settings file not found: {self.config_path}"
            )
        except yaml.YAMLError as e:
            raise yaml.YAMLError(f"Error parsing YAML configuration: {e}")

        missing = [s for s in ("tolerances", "numerics", "commands", "acceptance") if s not in config]
        if missing:
            raise KeyError(f"Settings file {self.config_path} lacks sections: {missing}")

        logger.debug(f"Loaded settings from {self.config_path}")
        return config

    def get_section(self, name: str) -> Dict[str, Any]:
        """
        Return one top-level section as a fresh dict.

        Raises:
            KeyError: If the section is not present.
        """
        try:
            return dict(self.config[name])
        except KeyError:
            raise KeyError(
                f"Section '{name}' not found. Available sections: {list(self.config.keys())}"
            )

    def get_tolerance(self, name: str) -> float:
        """
        Return a named tolerance from the `tolerances` section.

        Raises:
            KeyError: If the tolerance is not defined.
        """
        tolerances = self.config["tolerances"]
        if name not in tolerances:
            raise KeyError(
                f"Tolerance '{name}' not found. Available tolerances: {list(tolerances.keys())}"
            )
        return float(tolerances[name])

    def get_tolerances(self) -> Tolerances:
        """
        Build the library's Tolerances from the `tolerances` section.

        Keys the library does not use (spectrum, orthonormal, ...) are left to
        get_tolerance; keys absent from the file keep their Tolerances default.

        Raises:
            ValueError: If a value is negative or not finite.
        """
        known = {f.name for f in fields(Tolerances)}
        values = {k: float(v) for k, v in self.config["tolerances"].items() if k in known}
        return Tolerances(**values)

    def get_numeric(self, name: str) -> Any:
        numerics = self.config["numerics"]
        if name not in numerics:
            raise KeyError(
                f"Numeric setting '{name}' not found. Available settings: {list(numerics.keys())}"
            )
        return numerics[name]

    def get_defaults(self, command: str, **overrides) -> Dict[str, Any]:
        """
        Get the default parameters for a subcommand, merged with overrides.

        Overrides whose value is None are ignored, so an unset CLI flag keeps
        the configured default.

        Args:
            command: Subcommand name, e.g. 'variance' or 'fig2b'.
            **overrides: Values taken from the command line.

        Returns:
            Dict of resolved parameters.

        Raises:
            KeyError: If the command has no defaults block.
        """
        commands = self.config["commands"]
        if command not in commands:
            raise KeyError(
                f"Command '{command}' not found. Available commands: {list(commands.keys())}"
            )
        resolved = dict(commands[command] or {})
        resolved.update({k: v for k, v in overrides.items() if v is not None})
        logger.debug(f"Resolved {len(resolved)} parameters for command '{command}'")
        return resolved

    def validate_parameters(self, command: str, **kwargs) -> bool:
        """
        Validate that every provided parameter is known for the command.

        Returns:
            True if all parameters are recognised.

        Raises:
            ValueError: If unknown parameters are supplied.
        """
        known = set(self.get_defaults(command).keys())
        unknown = set(kwargs.keys()) - known
        if unknown:
            raise ValueError(
                f"Unknown parameters for command '{command}': {sorted(unknown)}"
            )
        return True

    def update_defaults(self, command: str, **values) -> None:
        """
        Replace in-memory defaults of a command; the YAML file is not touched.

        None values are ignored, like in get_defaults.

        Raises:
            ValueError: If a key is not already a parameter of the command.
        """
        self.validate_parameters(command, **values)
        self.config["commands"][command].update(
            {k: v for k, v in values.items() if v is not None}
        )

    def list_commands(self) -> list:
        """
        Get the subcommands that have a defaults block.
        """
        return list(self.config["commands"].keys())

    def reload_config(self) -> None:
        """
        Reload the configuration from the file.
        """
        self.config = self._load_config()
        logger.info("Settings reloaded")


def get_settings_manager(config_path: Optional[Union[str, Path]] = None) -> SettingsManager:
    """
    Factory function to create a SettingsManager instance.

    Args:
        config_path: Optional path to configuration file.

    Returns:
        SettingsManager instance.
    """
    return SettingsManager(config_path)
