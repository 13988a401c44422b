"""
Configuration helpers for NOL-GAT experiments.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

import yaml

from . import constants
from .diffcore import AdamState
from .errors import ConfigError
from .model import NolGatConfig


DEFAULT_CONFIG: Dict[str, Any] = {
    "dataset_path": None,
    "text_path": None,
    "labels_path": None,
    "featurizer": "precomputed",
    "feature_dim": constants.DEFAULT_FEATURE_DIM,
    "knn_k": list(constants.DEFAULT_KNN_SWEEP),
    "label_fraction": constants.LABEL_FRACTIONS[0],
    "epochs": constants.DEFAULT_EPOCHS,
    "repetitions": constants.DEFAULT_REPETITIONS,
    "seed": 0,
    "layers": 2,
    "hidden": list(constants.DEFAULT_HIDDEN),
    "heads": constants.DEFAULT_HEADS,
    "phi_hop": 1,
    "max_order_cap": constants.DEFAULT_MAX_ORDER_CAP,
    "mlp_hidden": list(constants.DEFAULT_MLP_HIDDEN),
    "temperature": 1.0,
    "anneal": False,
    "anneal_min": 0.1,
    "relaxation_mode": "straight-through",
    "eval_argmax": False,
    "dropout": 0.0,
    "learning_rate": 0.01,
    "beta1": 0.9,
    "beta2": 0.999,
    "adam_epsilon": 1e-8,
    "weight_decay": 5e-4,
    "compare_baseline": False,
    "export_orders": False,
    "workers": 1,
    "output_dir": "results",
}

_PATH_KEYS = ("dataset_path", "text_path", "labels_path", "output_dir")
_INT_KEYS = ("feature_dim", "epochs", "repetitions", "seed", "layers", "phi_hop", "max_order_cap", "workers")
_FLOAT_KEYS = (
    "temperature",
    "anneal_min",
    "dropout",
    "learning_rate",
    "beta1",
    "beta2",
    "adam_epsilon",
    "weight_decay",
)
_BOOL_KEYS = ("anneal", "eval_argmax", "compare_baseline", "export_orders")


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _int_list(key: str, value: Any) -> Tuple[int, ...]:
    items = value if isinstance(value, (list, tuple)) else [value]
    if not items or not all(_is_int(item) for item in items):
        raise ConfigError(f"'{key}' must be an integer or a list of integers (got {value!r})")
    return tuple(int(item) for item in items)


def _float_list(key: str, value: Any) -> Tuple[float, ...]:
    items = value if isinstance(value, (list, tuple)) else [value]
    if not items or not all(_is_number(item) for item in items):
        raise ConfigError(f"'{key}' must be a number or a list of numbers (got {value!r})")
    return tuple(float(item) for item in items)


@dataclass(frozen=True)
class ExperimentConfig:
    dataset_path: Optional[str] = None
    text_path: Optional[str] = None
    labels_path: Optional[str] = None
    featurizer: str = "precomputed"
    feature_dim: int = constants.DEFAULT_FEATURE_DIM
    knn_k: Tuple[int, ...] = tuple(constants.DEFAULT_KNN_SWEEP)
    label_fraction: Tuple[float, ...] = (constants.LABEL_FRACTIONS[0],)
    epochs: int = constants.DEFAULT_EPOCHS
    repetitions: int = constants.DEFAULT_REPETITIONS
    seed: int = 0
    layers: int = 2
    hidden: Tuple[int, ...] = tuple(constants.DEFAULT_HIDDEN)
    heads: Tuple[int, ...] = (constants.DEFAULT_HEADS,)
    phi_hop: int = 1
    max_order_cap: int = constants.DEFAULT_MAX_ORDER_CAP
    mlp_hidden: Tuple[int, ...] = tuple(constants.DEFAULT_MLP_HIDDEN)
    temperature: float = 1.0
    anneal: bool = False
    anneal_min: float = 0.1
    relaxation_mode: str = "straight-through"
    eval_argmax: bool = False
    dropout: float = 0.0
    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    adam_epsilon: float = 1e-8
    weight_decay: float = 5e-4
    compare_baseline: bool = False
    export_orders: bool = False
    workers: int = 1
    output_dir: str = "results"

    def __post_init__(self) -> None:
        if self.featurizer not in constants.FEATURIZERS:
            raise ConfigError(f"featurizer must be one of {constants.FEATURIZERS} (got '{self.featurizer}')")
        if any(not 0.0 < fraction < 1.0 for fraction in self.label_fraction):
            raise ConfigError(f"label_fraction values must lie in (0, 1) (got {list(self.label_fraction)})")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if any(k < 1 for k in self.knn_k):
            raise ConfigError("knn_k values must be >= 1")
        if self.max_order_cap < 1:
            raise ConfigError("max_order_cap must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.anneal and not 0.0 < self.anneal_min <= self.temperature:
            raise ConfigError("anneal_min must lie in (0, temperature]")
        # surfaces model-level violations with the same error type
        self.model_config()
        self.adam_state()

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any], base_dir: Optional[Path] = None) -> ExperimentConfig:
        unknown = sorted(set(values) - set(DEFAULT_CONFIG))
        if unknown:
            raise ConfigError(f"Unknown config key(s): {', '.join(unknown)}")
        merged = dict(DEFAULT_CONFIG)
        merged.update(values)
        kwargs: Dict[str, Any] = {}
        for key, value in merged.items():
            kwargs[key] = _coerce(key, value, base_dir)
        return cls(**kwargs)

    @property
    def label_fractions(self) -> Tuple[float, ...]:
        return self.label_fraction

    def model_config(self, baseline: bool = False) -> NolGatConfig:
        try:
            return NolGatConfig(
                layers=self.layers,
                phi_hop=self.phi_hop,
                hidden=self.hidden,
                heads=self.heads[0] if len(self.heads) == 1 else self.heads,
                temperature=self.temperature,
                relaxation_mode=self.relaxation_mode,
                baseline_mode=baseline,
                mlp_hidden=self.mlp_hidden,
                eval_argmax=self.eval_argmax,
                dropout=self.dropout,
            )
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def adam_state(self) -> AdamState:
        try:
            return AdamState(
                learning_rate=self.learning_rate,
                beta1=self.beta1,
                beta2=self.beta2,
                epsilon=self.adam_epsilon,
                weight_decay=self.weight_decay,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def echo(self) -> Dict[str, Any]:
        """Plain mapping of every field, lists in place of tuples."""
        return {
            key: list(value) if isinstance(value, tuple) else value for key, value in sorted(asdict(self).items())
        }


def _coerce(key: str, value: Any, base_dir: Optional[Path]) -> Any:
    if key in _PATH_KEYS:
        if value is None:
            return None
        if not isinstance(value, str) or not value:
            raise ConfigError(f"'{key}' must be a path string (got {value!r})")
        path = Path(value).expanduser()
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return str(path)
    if key in _INT_KEYS:
        if not _is_int(value):
            raise ConfigError(f"'{key}' must be an integer (got {value!r})")
        return int(value)
    if key in _FLOAT_KEYS:
        if not _is_number(value):
            raise ConfigError(f"'{key}' must be a number (got {value!r})")
        return float(value)
    if key in _BOOL_KEYS:
        if not isinstance(value, bool):
            raise ConfigError(f"'{key}' must be true or false (got {value!r})")
        return value
    if key in ("knn_k", "hidden", "heads", "mlp_hidden"):
        if key == "mlp_hidden" and value == []:
            return ()
        return _int_list(key, value)
    if key == "label_fraction":
        return _float_list(key, value)
    if not isinstance(value, str):
        raise ConfigError(f"'{key}' must be a string (got {value!r})")
    return value


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, Any]:
    """Flat ``key = value`` lines; values are read as YAML scalars or flow lists."""
    values: Dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, _, raw_value = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: missing key")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key '{key}'")
        try:
            values[key] = yaml.safe_load(raw_value.strip()) if raw_value.strip() else None
        except yaml.YAMLError as exc:
            raise ConfigError(f"{source}:{lineno}: cannot parse value for '{key}': {exc}") from exc
    return values


def load_config(path: Path) -> ExperimentConfig:
    """Load a config file; relative paths inside it resolve against its directory."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    text = path.read_text(encoding="utf-8")
    if path.suffix in (".yaml", ".yml"):
        try:
            values = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
        if not isinstance(values, dict):
            raise ConfigError(f"{path}: expected a flat mapping")
    else:
        values = parse_config_text(text, str(path))
    return ExperimentConfig.from_mapping(values, base_dir=path.parent)


def save_config(config: ExperimentConfig, path: Path) -> Path:
    """Persist the config echo as sorted YAML."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        yaml.safe_dump(config.echo(), fh, sort_keys=True)
    return path


def ensure_directories() -> None:
    """Ensure the runtime directories exist."""
    constants.refresh_paths()
    for path in (constants.HOME, constants.DATA_DIR, constants.LOG_DIR):
        path.mkdir(parents=True, exist_ok=True)


def get_paths() -> Dict[str, Path]:
    ensure_directories()
    return {
        "home": constants.HOME,
        "data_dir": constants.DATA_DIR,
        "log_dir": constants.LOG_DIR,
        "system_log": constants.SYSTEM_LOG_FILE,
        "run_log_template": constants.RUN_LOG_TEMPLATE,
        "verification_log": constants.VERIFICATION_LOG_FILE,
    }


__all__ = [
    "DEFAULT_CONFIG",
    "ExperimentConfig",
    "ensure_directories",
    "get_paths",
    "load_config",
    "parse_config_text",
    "save_config",
]
