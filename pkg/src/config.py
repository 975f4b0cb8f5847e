# src/config.py
"""
GraphMerge configuration module
"""

from dataclasses import dataclass, field, fields, asdict
from types import UnionType
from typing import Any, Dict, List, Optional, Union, get_args, get_origin, get_type_hints
import yaml

from src.errors import ConfigError

GRAPH_MODES = ('merge', 'union', 'intersect')
ARCHITECTURES = ('graphmerge', 'feature_ensemble')
EMBEDDING_MODES = ('trainable', 'file')
ATTENTION_ACTIVATIONS = ('relu', 'leaky_relu')
OPTIMIZERS = ('adam', 'sgd')

# learning rates used when train.learning_rate is left empty
TRAINABLE_LEARNING_RATE = 1e-3
FILE_MODE_LEARNING_RATE = 1e-5


def _load_yaml(text, where: str):
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"{where}: invalid YAML: {e}") from e


def coerce_value(value: Any, annotation: Any, key: str) -> Any:
    """Check a YAML value against a dataclass field type; ints widen to float"""
    if get_origin(annotation) in (Union, UnionType):
        options = [a for a in get_args(annotation) if a is not type(None)]
        if value is None:
            return None
        return coerce_value(value, options[0], key)

    if value is None:
        raise ConfigError(f"{key} must not be empty")

    if get_origin(annotation) in (list, List):
        if not isinstance(value, list):
            raise ConfigError(f"{key} must be a list, got {value!r}")
        (item_type,) = get_args(annotation) or (str,)
        return [coerce_value(item, item_type, key) for item in value]

    if annotation is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{key} must be true or false, got {value!r}")
        return value
    if annotation is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer, got {value!r}")
        return value
    if annotation is float:
        # PyYAML reads 1e-6 without a dot as a string
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            raise ConfigError(f"{key} must be a number, got {value!r}")
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"{key} must be a number, got {value!r}") from None
    if annotation is str:
        if isinstance(value, bool) or not isinstance(value, (str, int, float)):
            raise ConfigError(f"{key} must be a string, got {value!r}")
        return str(value)
    return value


def _field_types(owner) -> Dict[str, Any]:
    return get_type_hints(type(owner))


@dataclass
class DataConfig:
    dataset: str = "./data/synth/dataset.jsonl"
    parses: List[str] = field(default_factory=lambda: [
        "./data/synth/parser0.conllu",
        "./data/synth/parser1.conllu",
        "./data/synth/parser2.conllu",
    ])
    gold_parse: Optional[str] = None
    embeddings_path: Optional[str] = None


@dataclass
class TrainConfig:
    learning_rate: Optional[float] = None
    batch_size: int = 4
    epochs: int = 5
    hidden_dim: int = 64
    heads: int = 4
    layers: int = 2
    dropout: float = 0.1
    l2: float = 1e-6
    seed: int = 42
    dev_fraction: float = 0.05
    graph_mode: str = "merge"
    use_edge_types: bool = True
    use_position: bool = True
    optimizer: str = "adam"
    embedding_mode: str = "trainable"
    embedding_dim: int = 64
    max_len: int = 100
    attention_activation: str = "relu"
    leaky_slope: float = 0.2
    shared_attention: bool = True
    architecture: str = "graphmerge"
    d_out: Optional[int] = None
    debug_numerics: bool = False
    show_progress: bool = True

    def resolved_learning_rate(self) -> float:
        if self.learning_rate is not None:
            return float(self.learning_rate)
        if self.embedding_mode == 'file':
            return FILE_MODE_LEARNING_RATE
        return TRAINABLE_LEARNING_RATE


@dataclass
class OutputConfig:
    checkpoint: str = "./data/checkpoints/model.ckpt"
    metrics: str = "./logs/metrics.jsonl"
    predictions: Optional[str] = None


@dataclass
class Config:
    data: DataConfig = field(default_factory=DataConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    log_level: str = "INFO"
    log_file: str = "./logs/graphmerge.log"

    @classmethod
    def from_yaml(cls, path: str) -> 'Config':
        """Load configuration from YAML file"""
        with open(path, 'r', encoding='utf-8') as f:
            data = _load_yaml(f, path) or {}

        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a mapping")

        config = cls()

        try:
            if 'data' in data:
                config.data = DataConfig(**data['data'])
            if 'train' in data:
                config.train = TrainConfig(**data['train'])
            if 'output' in data:
                config.output = OutputConfig(**data['output'])
        except TypeError as e:
            raise ConfigError(f"{path}: {e}") from e

        if 'log_level' in data:
            config.log_level = data['log_level']
        if 'log_file' in data:
            config.log_file = data['log_file']

        config._coerce_all(path)

        return config

    def sections(self) -> Dict[str, Any]:
        return {'data': self.data, 'train': self.train, 'output': self.output}

    def _coerce_all(self, where: str):
        for section_name, section in self.sections().items():
            for name, annotation in _field_types(section).items():
                key = f"{where}: {section_name}.{name}"
                setattr(section, name, coerce_value(getattr(section, name), annotation, key))
        for name in ('log_level', 'log_file'):
            setattr(self, name, coerce_value(getattr(self, name), str, f"{where}: {name}"))

    def apply_overrides(self, overrides: List[str]) -> 'Config':
        """Apply `key=value` overrides; keys are `section.field` or a unique bare field"""
        for item in overrides or []:
            if '=' not in item:
                raise ConfigError(f"override '{item}' is not of the form key=value")

            key, raw_value = item.split('=', 1)
            key = key.strip()
            value = _load_yaml(raw_value, f"override '{item}'") if raw_value.strip() else None

            if key in ('log_level', 'log_file'):
                setattr(self, key, coerce_value(value, str, key))
                continue

            section, name = self._resolve_key(key)
            setattr(section, name, coerce_value(value, _field_types(section)[name], key))

        return self

    def _resolve_key(self, key: str):
        sections = self.sections()

        if '.' in key:
            section_name, name = key.split('.', 1)
            section = sections.get(section_name)
            if section is None or name not in {f.name for f in fields(section)}:
                raise ConfigError(f"unknown configuration key '{key}'")
            return section, name

        matches = [
            section for section in sections.values()
            if key in {f.name for f in fields(section)}
        ]
        if not matches:
            raise ConfigError(f"unknown configuration key '{key}'")
        if len(matches) > 1:
            raise ConfigError(f"ambiguous configuration key '{key}', use section.{key}")
        return matches[0], key

    def validate(self) -> 'Config':
        """Check value ranges; raises ConfigError"""
        t = self.train

        if t.batch_size < 1:
            raise ConfigError("train.batch_size must be >= 1")
        if t.epochs < 0:
            raise ConfigError("train.epochs must be >= 0")
        if t.heads < 1 or t.hidden_dim < 1 or t.layers < 0:
            raise ConfigError("train.heads and train.hidden_dim must be >= 1, train.layers >= 0")
        if t.hidden_dim % t.heads != 0:
            raise ConfigError(
                f"train.hidden_dim ({t.hidden_dim}) must be divisible by train.heads ({t.heads})"
            )
        if not 0.0 <= t.dropout < 1.0:
            raise ConfigError("train.dropout must lie in [0, 1)")
        if t.l2 < 0:
            raise ConfigError("train.l2 must be >= 0")
        if not 0.0 <= t.dev_fraction < 1.0:
            raise ConfigError("train.dev_fraction must lie in [0, 1)")
        if t.learning_rate is not None and t.learning_rate <= 0:
            raise ConfigError("train.learning_rate must be > 0")
        if t.attention_activation not in ATTENTION_ACTIVATIONS:
            raise ConfigError(f"train.attention_activation must be one of {ATTENTION_ACTIVATIONS}")
        if t.attention_activation == 'leaky_relu' and t.leaky_slope <= 0:
            raise ConfigError("train.leaky_slope must be > 0")
        if t.architecture not in ARCHITECTURES:
            raise ConfigError(f"train.architecture must be one of {ARCHITECTURES}")
        if t.embedding_mode not in EMBEDDING_MODES:
            raise ConfigError(f"train.embedding_mode must be one of {EMBEDDING_MODES}")
        if t.embedding_mode == 'file' and not self.data.embeddings_path:
            raise ConfigError("data.embeddings_path is required in file embedding mode")
        if t.optimizer not in OPTIMIZERS:
            raise ConfigError(f"train.optimizer must be one of {OPTIMIZERS}")
        if t.d_out is not None and t.d_out < 1:
            raise ConfigError("train.d_out must be >= 1")
        if t.max_len < 1:
            raise ConfigError("train.max_len must be >= 1")

        mode = t.graph_mode
        if mode not in GRAPH_MODES and not (mode.startswith('single:') and len(mode) > len('single:')):
            raise ConfigError(
                f"train.graph_mode must be merge, intersect or single:<parser_id>, got '{mode}'"
            )

        return self

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
