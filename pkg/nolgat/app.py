"""
Application context shared by NOL-GAT CLI commands.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

from .config import ExperimentConfig, get_paths, load_config
from .logger import init_logging


@dataclass
class NolGatApp:
    """
    Container for runtime state shared across CLI commands.

    Paths are resolved once at bootstrap; the experiment config is loaded on
    demand because most commands take it as an argument.
    """

    paths: Dict[str, Path]
    state: Dict[str, Any] = field(default_factory=dict)
    _config: Optional[ExperimentConfig] = field(default=None, init=False, repr=False)

    @classmethod
    def bootstrap(cls) -> NolGatApp:
        """
        Create a context with runtime directories in place and logging installed.
        """
        paths = get_paths()
        init_logging()
        return cls(paths=paths)

    def load(self, path: Path) -> ExperimentConfig:
        self._config = load_config(path)
        self.state["config_path"] = str(path)
        return self._config

    @property
    def config(self) -> Optional[ExperimentConfig]:
        return self._config


__all__ = ["NolGatApp"]
