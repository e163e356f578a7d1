from pathlib import Path
import importlib
from typing import Any, Mapping, Optional
from box import Box
from .strategy_registry import get_strategy_class
from .types_custom import Config
from .units import LOG_BASES

REQUIRED_SECTIONS = ["output", "cxi_verify", "bloch", "hg"]


class ConfigLoader:
    """
    Loads and manages application configuration.

    `default_config.yaml` supplies every key; the user file (`config.yaml`, or
    a JSON document when the suffix is `.json`) and command-line overrides are
    merged on top. Keys the defaults do not know are rejected.
    """
    def __init__(
        self,
        config_file: str = "config.yaml",
        default_config_file: str = "default_config.yaml",
        overrides: Optional[Mapping[str, Any]] = None,
    ):
        """
        Initializes the ConfigLoader by loading configuration files.

        Args:
            config_file (str): The path to the user configuration (YAML or JSON).
            default_config_file (str): The path to the default configuration YAML file.
            overrides (Mapping[str, Any]): Dotted keys (e.g. "hg.simulation.seed") set last.
                `None` values are ignored.

        Raises:
            FileNotFoundError: If the default_config_file does not exist.
            KeyError: If keys are unknown or essential keys are missing.
            ValueError: If a value is out of its allowed set.
        """
        self.default_config_file: str = default_config_file
        self.config_file = Path(config_file)

        # Load default config
        self._config: Config = Box.from_yaml(filename=self.default_config_file)

        # Load user config and merge it into the default config
        if self.config_file.exists():
            if self.config_file.suffix == ".json":
                user_config = Box.from_json(filename=self.config_file)
            else:
                user_config = Box.from_yaml(filename=self.config_file)
            self._check_known_keys(user_config, self._config)
            self._config.merge_update(user_config)

        for dotted, value in (overrides or {}).items():
            if value is not None:
                self._apply_override(dotted, value)

        self._validate()
        importlib.import_module('src.utils.strategies')

    @staticmethod
    def _check_known_keys(user: Mapping, defaults: Mapping, prefix: str = ""):
        """
        Raises:
            KeyError: For the first key of `user` that `defaults` does not have.
        """
        for key, value in user.items():
            path = f"{prefix}{key}"
            if key not in defaults:
                raise KeyError(f"Unknown config key: {path}")
            if isinstance(value, Mapping) and isinstance(defaults[key], Mapping):
                ConfigLoader._check_known_keys(value, defaults[key], prefix=f"{path}.")

    def _apply_override(self, dotted: str, value: Any):
        *parents, leaf = dotted.split(".")
        node = self._config
        for key in parents:
            if key not in node:
                raise KeyError(f"Unknown config key: {dotted}")
            node = node[key]
        if leaf not in node:
            raise KeyError(f"Unknown config key: {dotted}")
        node[leaf] = value

    def _validate(self):
        """
        Performs basic validation of the loaded configuration.

        Raises:
            KeyError: If essential keys are missing.
            ValueError: If the log base is not one of nats/bits.
        """
        for key in REQUIRED_SECTIONS:
            if key not in self._config:
                raise KeyError(f"Missing key: {key}")

        for key in ["directory", "log_base"]:
            if key not in self._config["output"] or self._config["output"][key] is None:
                raise KeyError(f"Missing key in output section: {key}")

        if self._config["output"]["log_base"] not in LOG_BASES:
            raise ValueError(f"log_base must be one of {LOG_BASES}, got {self._config['output']['log_base']}")

        for strategy in self._config["hg"]["simulation"]["strategies"]:
            if "name" not in strategy:
                raise KeyError("Missing key: name in hg.simulation.strategies entry")

    @property
    def settings(self) -> Config:
        """
        Returns the main application settings.

        Returns:
            Config: The main configuration object.
        """
        return self._config

    def require_seed(self, section: str) -> int:
        """
        Master seed of a stochastic section ("cxi_verify" or "hg.simulation").

        Raises:
            KeyError: If the seed is missing or null.
        """
        node = self._config
        for key in section.split("."):
            node = node[key]
        seed = node.get("seed")
        if seed is None or isinstance(seed, bool) or not isinstance(seed, int):
            raise KeyError(f"Missing key: seed in {section} section")
        if seed < 0:
            raise ValueError(f"Seed in {section} section must be non-negative, got {seed}")
        return seed

    def get_strategy_instance(self, name: str, **kwargs):
        """
        Instantiates a registered strategy class.

        Raises:
            KeyError: If the strategy name is not registered.
        """
        return get_strategy_class(name)(**kwargs)
