# Copyright (c) 2026, POP-CNN contributors
# For license information, please see license.txt

"""
Pipeline configuration

A flat ``key = value`` text file; ``#`` starts a comment. Values resolve as
command-line override > config file > POP_SEED (seed only) > built-in default.
"""

import configparser
import os
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional

from pop_cnn.enose.signal_model import PreprocessConfig
from pop_cnn.enose.synth_data import SynthConfig
from pop_cnn.exceptions import ConfigurationError, throw
from pop_cnn.experiment.training import TrainConfig
from pop_cnn.network.pop_model import PopConfig
from pop_cnn.utils.constants import CONFIG_DEFAULTS, get_default, is_config_key

SEED_ENV_VAR = "POP_SEED"
_SECTION = "pop_cnn"


@dataclass(frozen=True)
class PipelineConfig:
    """Resolved values plus the per-module configs built from them"""

    values: Mapping[str, Any]
    pop: PopConfig
    train: TrainConfig
    synth: SynthConfig
    preprocess: PreprocessConfig

    @property
    def seed(self) -> int:
        return self.values["seed"]

    @property
    def neutral_half_width(self) -> float:
        return self.values["neutral_half_width"]

    @property
    def label_midpoint(self) -> float:
        return self.values["label_midpoint"]


def _convert(key: str, raw: Any) -> Any:
    """Cast ``raw`` to the type of the key's default"""
    target = type(get_default(key))
    if isinstance(raw, target) and not isinstance(raw, bool):
        return raw
    try:
        if target is int:
            return int(str(raw).strip())
        return float(str(raw).strip())
    except ValueError:
        throw("Config value for {0} is not a valid {1}: {2!r}".format(key, target.__name__, raw), ConfigurationError)


def read_config_file(path: str) -> Dict[str, Any]:
    """
    Parse a flat key=value file

    Raises:
        FileNotFoundError: path does not exist
        ConfigurationError: unknown key, duplicate key, bad syntax or bad value
    """
    with open(path, encoding="utf-8") as f:
        text = f.read()

    parser = configparser.ConfigParser(delimiters=("=",), comment_prefixes=("#",), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string("[{0}]\n{1}".format(_SECTION, text), source=path)
    except configparser.Error as e:
        throw("Cannot parse config {0}: {1}".format(path, e), ConfigurationError)

    values = {}
    for key, raw in parser.items(_SECTION):
        if not is_config_key(key):
            throw("Unknown config key '{0}' in {1}".format(key, path), ConfigurationError)
        values[key] = _convert(key, raw)
    return values


def resolve_values(
    path: Optional[str] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    environ: Optional[Mapping[str, str]] = None
) -> Dict[str, Any]:
    environ = os.environ if environ is None else environ
    values = dict(CONFIG_DEFAULTS)

    if environ.get(SEED_ENV_VAR):
        values["seed"] = _convert("seed", environ[SEED_ENV_VAR])
    if path:
        values.update(read_config_file(path))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if not is_config_key(key):
            throw("Unknown override '{0}'".format(key), ConfigurationError)
        values[key] = _convert(key, value)
    return values


def build_config(values: Mapping[str, Any]) -> PipelineConfig:
    """
    Split resolved values into the per-module configs

    Raises:
        ConfigurationError: a module config rejects its values
    """
    seed = values["seed"]
    pop = PopConfig(
        sensors=values["sensors"],
        width=values["width"],
        filters1=values["filters1"],
        filters2=values["filters2"],
        stride_w=values["stride_w"],
        seed=seed,
    )
    train = TrainConfig(
        batch_size=values["batch"],
        momentum=values["momentum"],
        lr_initial=values["lr_initial"],
        lr_final=values["lr_final"],
        lr_divisor=values["lr_divisor"],
        plateau_patience=values["plateau_patience"],
        weight_decay=values["weight_decay"],
        max_epochs=values["epochs"],
        max_grad_norm=values["max_grad_norm"],
        seed=seed,
    )
    synth = SynthConfig(
        n_odors=values["n_odors"],
        repeats_per_odor=values["repeats"],
        sensors=values["sensors"],
        seconds=values["seconds"],
        noise_sigma=values["noise_sigma"],
        label_noise_sigma=values["label_noise_sigma"],
        seed=seed,
    )
    try:
        preprocess = PreprocessConfig(
            keep_seconds=values["keep_seconds"],
            width=values["width"],
            threshold_T=values["threshold_T"],
            label_midpoint=values["label_midpoint"],
        )
    except ValueError as e:
        throw(str(e), ConfigurationError)

    pop.validate()
    train.validate()
    synth.validate()
    return PipelineConfig(dict(values), pop, train, synth, preprocess)


def load_config(
    path: Optional[str] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    environ: Optional[Mapping[str, str]] = None
) -> PipelineConfig:
    """
    Resolve configuration from defaults, POP_SEED, a file and overrides

    Args:
        path: Optional config file
        overrides: Command-line values; None entries are ignored
        environ: Environment to read POP_SEED from, defaults to os.environ

    Returns:
        The resolved PipelineConfig
    """
    return build_config(resolve_values(path, overrides, environ))
