"""Run configuration: INI-style file with [paths] / [llm] / [plan] / [run]
sections, overridable by CLI flags (flags win). Secrets never live here; the
API key is read from the environment at request time.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, asdict
from pathlib import Path

DEFAULT_SEEDS = (40, 41, 42)


class ConfigError(Exception):
    pass


@dataclass
class LlmConfig:
    base_url: str = "https://api.openai.com/v1"
    model: str = "gpt-4o-mini"
    temperature: float = 1.0
    token_budget: int = 128_000
    retry_cap: int = 5
    mock_mode: str = ""  # "", "scripted", or "mapped"
    mock_fixture: str = ""


@dataclass
class PlanConfig:
    total_trials: int = 2
    per_intervention_cap: int = 0  # 0 = unlimited
    label_policy: str = "alternate"
    fixed_label: int = 1
    seed: int = 40


@dataclass
class RunConfig:
    xml_dir: str = ""
    labels_csv: str = ""
    vocab_txt: str = ""
    output_dir: str = "."
    llm: LlmConfig = field(default_factory=LlmConfig)
    plan: PlanConfig = field(default_factory=PlanConfig)
    seeds: tuple[int, ...] = DEFAULT_SEEDS

    def as_dict(self) -> dict:
        out = asdict(self)
        out["seeds"] = list(self.seeds)
        return out


def _parse_seeds(raw: str) -> tuple[int, ...]:
    seeds = tuple(int(s) for s in raw.replace(",", " ").split())
    if not seeds:
        raise ConfigError("seeds must be a non-empty list of integers")
    return seeds


def load_config(path: str | Path | None) -> RunConfig:
    """Load a config file; missing path yields pure defaults."""
    config = RunConfig()
    if path is None:
        return config
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    if parser.has_section("paths"):
        section = parser["paths"]
        config.xml_dir = section.get("xml_dir", config.xml_dir)
        config.labels_csv = section.get("labels_csv", config.labels_csv)
        config.vocab_txt = section.get("vocab_txt", config.vocab_txt)
        config.output_dir = section.get("output_dir", config.output_dir)
    if parser.has_section("llm"):
        section = parser["llm"]
        llm = config.llm
        llm.base_url = section.get("base_url", llm.base_url)
        llm.model = section.get("model", llm.model)
        llm.temperature = section.getfloat("temperature", llm.temperature)
        llm.token_budget = section.getint("token_budget", llm.token_budget)
        llm.retry_cap = section.getint("retry_cap", llm.retry_cap)
        llm.mock_mode = section.get("mock_mode", llm.mock_mode)
        llm.mock_fixture = section.get("mock_fixture", llm.mock_fixture)
    if parser.has_section("plan"):
        section = parser["plan"]
        plan = config.plan
        plan.total_trials = section.getint("total_trials", plan.total_trials)
        plan.per_intervention_cap = section.getint(
            "per_intervention_cap", plan.per_intervention_cap
        )
        plan.label_policy = section.get("label_policy", plan.label_policy)
        plan.fixed_label = section.getint("fixed_label", plan.fixed_label)
        plan.seed = section.getint("seed", plan.seed)
    if parser.has_section("run"):
        section = parser["run"]
        if section.get("seeds"):
            config.seeds = _parse_seeds(section["seeds"])
    _check_paths(config)
    return config


def _check_paths(config: RunConfig) -> None:
    # referenced paths must exist at load; unset entries are legitimately blank
    referenced = {
        "paths.xml_dir": config.xml_dir,
        "paths.labels_csv": config.labels_csv,
        "paths.vocab_txt": config.vocab_txt,
        "llm.mock_fixture": config.llm.mock_fixture,
    }
    for key, value in referenced.items():
        if value and not Path(value).exists():
            raise ConfigError(f"{key} does not exist: {value}")
