"""Experiment configs: flat INI files, strictly validated.

One experiment per file.  Section [experiment] carries kind/seed/out;
the kind-specific knobs live in [run].  Unknown sections or keys are
rejected so a typo can never silently fall back to a default.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass

from .errors import ConfigError

KINDS = (
    "consistency",
    "partition-fmv",
    "lemma1",
    "lemma2-tail",
    "adversary",
    "fool-test",
    "frechet-convergence",
    "bayes-excess",
)


def _int(raw: str) -> int:
    return int(raw)


def _float(raw: str) -> float:
    return float(raw)


def _str(raw: str) -> str:
    return raw.strip()


def _int_list(raw: str) -> tuple:
    return tuple(int(tok) for tok in raw.split())


def _float_list(raw: str) -> tuple:
    return tuple(float(tok) for tok in raw.split())


# key -> (parser, default); a None default marks a required key
_RUN_SCHEMAS = {
    "consistency": {
        "runs": (_int, 1000),
        "horizon": (_int, 100_000),
        "support_size": (_int, 10),
        "rule": (_str, "memorization"),
    },
    "bayes-excess": {
        "runs": (_int, 100),
        "horizon": (_int, 100_000),
        "support_size": (_int, 5),
        "noise_sigma": (_float, 0.5),
        "threshold": (_float, 0.05),
        "quota": (_float, 0.95),
    },
    "partition-fmv": {
        "sampler": (_str, "iid-uniform"),
        "levels": (_int, 5),
        "trials": (_int, 2000),
        "schedule_trials": (_int, 1000),
        "margin": (_float, 0.03),
    },
    "lemma1": {
        "levels": (_int_list, (1, 2)),
        "trials": (_int, 10_000),
        "margin": (_float, 0.012),
    },
    "lemma2-tail": {
        "levels": (_int, 6),
        "trials": (_int, 10_000),
        "points": (_float_list, (0.1, 0.3, 0.5, 0.7, 0.9)),
    },
    "adversary": {
        "k_max": (_int, 5),
        "runs": (_int, 500),
        "threshold_trials": (_int, 200),
        "horizon": (_int, 64),
    },
    "fool-test": {
        "switches": (_int, 4),
        "replays": (_int, 200),
        "search_cap": (_int, 4096),
    },
    "frechet-convergence": {
        "power": (_float, 2.0),
        "sizes": (_int_list, (100, 1000, 10_000)),
        "trials": (_int, 100),
        "support": (_float_list, (0.0, 1.0, 2.0)),
        "threshold": (_float, 0.05),
    },
}

# the knob `--trials N` rescales per kind
TRIALS_KEY = {
    "consistency": "runs",
    "bayes-excess": "runs",
    "partition-fmv": "trials",
    "lemma1": "trials",
    "lemma2-tail": "trials",
    "adversary": "runs",
    "fool-test": "replays",
    "frechet-convergence": "trials",
}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    seed: int
    out: str | None
    params: dict

    def echo(self) -> tuple:
        """Canonical flat echo, sufficient to reproduce the run."""
        lines = [f"experiment.kind={self.kind}", f"experiment.seed={self.seed}"]
        if self.out:
            lines.append(f"experiment.out={self.out}")
        for key in sorted(self.params):
            value = self.params[key]
            if isinstance(value, tuple):
                value = " ".join(str(v) for v in value)
            lines.append(f"run.{key}={value}")
        return tuple(lines)


def default_config(kind: str, seed: int = 0, out: str | None = None) -> ExperimentConfig:
    if kind not in _RUN_SCHEMAS:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    params = {key: default for key, (_, default) in _RUN_SCHEMAS[kind].items()}
    return ExperimentConfig(kind, seed, out, params)


def load_config(path: str) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")
    sections = set(parser.sections())
    if "experiment" not in sections:
        raise ConfigError("config must have an [experiment] section")
    extra = sections - {"experiment", "run"}
    if extra:
        raise ConfigError(f"unknown sections: {sorted(extra)}")

    exp = dict(parser.items("experiment"))
    kind = exp.pop("kind", None)
    if kind is None:
        raise ConfigError("[experiment] must set kind")
    if kind not in _RUN_SCHEMAS:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    try:
        seed = int(exp.pop("seed", "0"))
    except ValueError as err:
        raise ConfigError(f"seed must be an integer: {err}") from None
    out = exp.pop("out", None)
    if exp:
        raise ConfigError(f"unknown [experiment] keys: {sorted(exp)}")

    schema = _RUN_SCHEMAS[kind]
    params = {key: default for key, (_, default) in schema.items()}
    if parser.has_section("run"):
        for key, raw in parser.items("run"):
            if key not in schema:
                raise ConfigError(f"unknown [run] key {key!r} for kind {kind}")
            parse, _ = schema[key]
            try:
                params[key] = parse(raw)
            except ValueError as err:
                raise ConfigError(f"bad value for {key!r}: {err}") from None
    missing = [k for k, v in params.items() if v is None]
    if missing:
        raise ConfigError(f"missing required keys: {missing}")
    return ExperimentConfig(kind, seed, out, params)


def override(config: ExperimentConfig, seed=None, out=None, trials=None) -> ExperimentConfig:
    params = dict(config.params)
    if trials is not None:
        params[TRIALS_KEY[config.kind]] = trials
    return ExperimentConfig(
        config.kind,
        config.seed if seed is None else seed,
        config.out if out is None else out,
        params,
    )
