"""
cspline Configuration Manager

Handles configuration management: defaults, the JSON config file and
CSPLINE_* environment overrides, validated into a Settings model.
"""

import json
import os
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator
from pydantic import ValidationError as PydanticValidationError
from rich.console import Console
from rich.table import Table

from .exceptions import ConfigurationError

console = Console()


class Settings(BaseModel):
    """Effective settings for solver and estimator runs."""

    model_config = ConfigDict(extra="forbid")

    tol: float = Field(default=1e-9, gt=0)
    seed: int = 0
    states: int = Field(default=64, ge=1)
    targets: int = Field(default=64, ge=1)
    candidates: int = Field(default=32, ge=0)
    k_grid: List[float] = Field(default_factory=lambda: [1.0], min_length=1)
    rcond: float = Field(default=1e-8, gt=0)
    verbose: bool = False

    @field_validator("k_grid", mode="before")
    @classmethod
    def _split_k_grid(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [item.strip() for item in value.split(",") if item.strip()]
        if isinstance(value, (int, float)):
            return [value]
        return value

    @field_validator("k_grid")
    @classmethod
    def _check_k_grid(cls, value: List[float]) -> List[float]:
        for k in value:
            if not 0 < k <= 1:
                raise ValueError(f"k values must lie in (0, 1], got {k}")
        return sorted(set(value))


class ConfigManager:
    """
    Manages cspline configuration.
    """

    CONFIG_FILE = "config.json"
    ENV_PREFIX = "CSPLINE_"

    def __init__(self, config_dir: Optional[Path] = None):
        """
        Initialize configuration manager.

        Args:
            config_dir: Directory holding config.json (default ~/.config/cspline)
        """
        self.config_dir = Path(config_dir) if config_dir else Path.home() / '.config' / 'cspline'
        self.config_file = self.config_dir / self.CONFIG_FILE

        # Load existing configuration
        self._config = self._load_config()

    def get_config(self) -> Dict[str, Any]:
        """Get current configuration with environment overrides applied."""
        config = self._config.copy()
        config.update(self._env_overrides())
        return config

    def get_settings(self, **overrides: Any) -> Settings:
        """
        Validate the configuration into Settings.

        Args:
            **overrides: Values taking precedence over file and environment;
                None values are ignored

        Returns:
            Validated Settings
        """
        config = self.get_config()
        config.update({key: value for key, value in overrides.items() if value is not None})
        try:
            return Settings(**config)
        except PydanticValidationError as e:
            raise ConfigurationError(f"Invalid configuration: {e}")

    def set_values(self, values: Dict[str, Any]) -> Settings:
        """Validate ``values`` on top of the file configuration and save them."""
        merged = self._config.copy()
        merged.update(values)
        try:
            settings = Settings(**merged)
        except PydanticValidationError as e:
            raise ConfigurationError(f"Invalid configuration: {e}")
        self._config = settings.model_dump()
        self._save_config()
        return settings

    def show_config(self, settings: Optional[Settings] = None) -> None:
        """Show current configuration."""
        settings = settings or self.get_settings()
        env = self._env_overrides()

        table = Table(title="Configuration Settings")
        table.add_column("Setting", style="cyan")
        table.add_column("Value", style="green")
        table.add_column("Source", style="dim")

        file_values = self._file_values()
        for key, value in settings.model_dump().items():
            if key in env:
                source = f"{self.ENV_PREFIX}{key.upper()}"
            elif key in file_values:
                source = str(self.config_file)
            else:
                source = "default"
            table.add_row(key, str(value), source)

        console.print(table)

    def _env_overrides(self) -> Dict[str, Any]:
        overrides = {}
        for key in Settings.model_fields:
            value = os.getenv(f"{self.ENV_PREFIX}{key.upper()}")
            if value is not None and value.strip():
                overrides[key] = value.strip()
        return overrides

    def _file_values(self) -> Dict[str, Any]:
        if not self.config_file.exists():
            return {}
        try:
            with open(self.config_file, 'r') as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"Could not load config file {self.config_file}: {e}")
        if not isinstance(data, dict):
            raise ConfigurationError(f"Config file {self.config_file} must hold a JSON object")
        return data

    def _load_config(self) -> Dict[str, Any]:
        """Load configuration from file."""
        default_config = Settings().model_dump()

        # Merge with defaults to ensure all keys exist
        merged_config = default_config.copy()
        merged_config.update(self._file_values())
        return merged_config

    def _save_config(self) -> None:
        """Save configuration to file."""
        try:
            self.config_dir.mkdir(parents=True, exist_ok=True)
            with open(self.config_file, 'w') as f:
                json.dump(self._config, f, indent=2)
        except OSError as e:
            raise ConfigurationError(f"Failed to save configuration: {e}")
