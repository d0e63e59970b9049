"""YAML run configuration.

A run file has up to five sections (all optional, all with defaults):

data:   path, lags
synth:  generator overrides (seed, n_hours, noise_scale, ...)
split:  either a single ``start`` for the standard two-year layout or the
        six explicit boundaries (train/valid/test start and end)
dms:    window, horizon, top_k, alpha, gamma, episodes, reward, seed
pool:   base_seed plus an optional explicit model list

Unknown keys raise ConfigError naming the offending key.
"""

import dataclasses
import logging

import yaml

from .backtest import WindowConfig
from .dataio import SplitSpec, SynthConfig, two_year_split
from .errors import ConfigError
from .pool.spec import ModelSpec
from .qlearn import AgentConfig

log = logging.getLogger(__name__)

_SECTIONS = ("data", "synth", "split", "dms", "pool", "evaluate")


@dataclasses.dataclass
class RunConfig:
    data_path: str = None
    lags: int = 24
    synth: SynthConfig = dataclasses.field(default_factory=SynthConfig)
    split: SplitSpec = None
    pool_seed: int = 7
    pool_specs: list = None
    window: WindowConfig = dataclasses.field(default_factory=WindowConfig)
    dms_seed: int = 11
    capacity: float = None

    def __post_init__(self):
        if self.split is None:
            self.split = two_year_split(self.synth.start)

    def with_reward(self, reward):
        agent = dataclasses.replace(self.window.agent, reward=reward)
        window = dataclasses.replace(self.window, agent=agent)
        return dataclasses.replace(self, window=window)


def default_config():
    return RunConfig()


def _check_keys(section, d, allowed):
    for key in d:
        if key not in allowed:
            raise ConfigError("unknown key %r in section %r (expected one of "
                              "%s)" % (key, section, sorted(allowed)))


def _get(d, key, types, default, section):
    v = d.get(key, default)
    if v is not None and not isinstance(v, types):
        raise ConfigError("%s.%s has type %s, expected %s"
                          % (section, key, type(v).__name__, types))
    return v


def config_from_dict(raw):
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("run configuration must be a mapping")
    _check_keys("<root>", raw, _SECTIONS)

    data = raw.get("data") or {}
    _check_keys("data", data, {"path", "lags"})
    data_path = _get(data, "path", str, None, "data")
    lags = _get(data, "lags", int, 24, "data")
    if lags < 1:
        raise ConfigError("data.lags must be >= 1, got %d" % lags)

    synth_over = dict(raw.get("synth") or {})
    synth_fields = {f.name for f in dataclasses.fields(SynthConfig)}
    _check_keys("synth", synth_over, synth_fields)
    if "start" in synth_over:
        # YAML may parse an unquoted timestamp into a datetime object.
        synth_over["start"] = str(synth_over["start"])
    synth = SynthConfig(**synth_over)

    split_d = raw.get("split") or {}
    _check_keys("split", split_d,
                {"start", "train_start", "train_end", "valid_start",
                 "valid_end", "test_start", "test_end"})
    if "start" in split_d:
        if len(split_d) > 1:
            raise ConfigError("split.start excludes explicit boundaries")
        split = two_year_split(str(split_d["start"]))
    elif split_d:
        needed = ("train_start", "train_end", "valid_start", "valid_end",
                  "test_start", "test_end")
        missing = [k for k in needed if k not in split_d]
        if missing:
            raise ConfigError("split is missing keys: %s" % missing)
        split = SplitSpec.from_strings(**{k: str(split_d[k]) for k in needed})
    else:
        split = two_year_split(synth.start)

    dms = raw.get("dms") or {}
    _check_keys("dms", dms, {"window", "horizon", "top_k", "alpha", "gamma",
                             "episodes", "reward", "seed"})
    agent = AgentConfig(
        alpha=float(_get(dms, "alpha", (int, float), 0.1, "dms")),
        gamma=float(_get(dms, "gamma", (int, float), 0.8, "dms")),
        episodes=_get(dms, "episodes", int, 100, "dms"),
        reward=_get(dms, "reward", str, "rank", "dms"))
    window = WindowConfig(
        window=_get(dms, "window", int, 72, "dms"),
        horizon=_get(dms, "horizon", int, 4, "dms"),
        top_k=_get(dms, "top_k", int, 4, "dms"),
        agent=agent)
    dms_seed = _get(dms, "seed", int, 11, "dms")

    pool = raw.get("pool") or {}
    _check_keys("pool", pool, {"base_seed", "models"})
    pool_seed = _get(pool, "base_seed", int, 7, "pool")
    pool_specs = None
    if "models" in pool:
        entries = pool["models"]
        if not isinstance(entries, list) or not entries:
            raise ConfigError("pool.models must be a non-empty list")
        pool_specs = []
        for i, e in enumerate(entries):
            if not isinstance(e, dict):
                raise ConfigError("pool.models[%d] must be a mapping" % i)
            _check_keys("pool.models[%d]" % i, e,
                        {"model_id", "family", "variant", "params"})
            try:
                pool_specs.append(ModelSpec(e.get("model_id", "M%d" % (i + 1)),
                                            e["family"], e["variant"],
                                            e.get("params", {})))
            except KeyError as exc:
                raise ConfigError("pool.models[%d] is missing key %s"
                                  % (i, exc)) from exc

    ev = raw.get("evaluate") or {}
    _check_keys("evaluate", ev, {"capacity"})
    capacity = _get(ev, "capacity", (int, float), None, "evaluate")

    return RunConfig(data_path=data_path, lags=lags, synth=synth, split=split,
                     pool_seed=pool_seed, pool_specs=pool_specs,
                     window=window, dms_seed=dms_seed,
                     capacity=None if capacity is None else float(capacity))


def load_config(path):
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError("cannot read config %s: %s" % (path, exc)) from exc
    except yaml.YAMLError as exc:
        raise ConfigError("invalid YAML in %s: %s" % (path, exc)) from exc
    cfg = config_from_dict(raw)
    log.info("loaded configuration from %s", path)
    return cfg
