"""
Run configuration
Pydantic models for experiment configs, loaded from and written back to YAML
"""

from pathlib import Path
from typing import List, Literal, Optional, Union

import pydantic
import yaml
from pydantic import BaseModel, ConfigDict, Field, model_validator

from optimizers.base_optimizer import Genome, default_n_init, genome_universe
from optimizers.genetic_selection import GAConfig
from optimizers.reward_ledger import RewardConfig, RewardConstants
from tools.acquisition_tools import AcquisitionKind, AcquisitionParams, SearchConfig
from tools.objective_tools import BUILTIN_FUNCTIONS, builtin_space, check_command
from tools.space_tools import Dimension, ParamSpace
from tools.surrogate_tools import SurrogateConfig, SurrogateKind
from utils.exceptions import ConfigError


class ObjectiveConfig(BaseModel):
    """Either a builtin test function or an external command"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    builtin: Optional[str] = None
    command: Optional[Union[str, List[str]]] = None
    timeout: float = Field(default=600.0, gt=0)

    @model_validator(mode="after")
    def _one_binding(self) -> "ObjectiveConfig":
        if (self.builtin is None) == (self.command is None):
            raise ValueError("objective needs exactly one of 'builtin' or 'command'")
        if self.builtin is not None and self.builtin not in BUILTIN_FUNCTIONS:
            raise ValueError(f"unknown builtin objective '{self.builtin}'; "
                             f"choose from {', '.join(sorted(BUILTIN_FUNCTIONS))}")
        return self


class OutputConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    directory: str = "results"
    log_wall_time: bool = False


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "experiment"
    objective: ObjectiveConfig
    maximize: bool = False
    space: Optional[List[Dimension]] = None
    n_rounds: int = Field(default=100, ge=1)
    n_suggestions: int = Field(default=1, ge=1)
    n_init: Optional[int] = Field(default=None, ge=0)
    seeds: List[int] = Field(default_factory=lambda: list(range(10)))
    selection: Literal["auto", "weighted", "genetic"] = "auto"
    pool: Union[Literal["full", "surrogates"], List[str]] = "full"
    compare: Literal["all", "adaptive", "base"] = "all"
    reward: RewardConstants = RewardConstants()
    genetic: GAConfig = GAConfig()
    surrogate: SurrogateConfig = SurrogateConfig()
    acquisition: AcquisitionParams = AcquisitionParams()
    search: SearchConfig = SearchConfig()
    output: OutputConfig = OutputConfig()
    max_workers: Optional[int] = Field(default=None, ge=1)
    # concurrent seed x optimizer runs, joblib convention: -1 uses every core
    n_jobs: int = Field(default=1, ge=-1)

    @model_validator(mode="after")
    def _check(self) -> "RunConfig":
        if not self.seeds:
            raise ValueError("seeds must not be empty")
        if self.n_jobs == 0:
            raise ValueError("n_jobs must be a positive count or -1")
        if self.space is None and self.objective.builtin is None:
            raise ValueError("external objectives need an explicit 'space'")
        if self.space is not None:
            ParamSpace(dims=tuple(self.space))
        self.genomes()
        return self

    def param_space(self) -> ParamSpace:
        if self.space is not None:
            return ParamSpace(dims=tuple(self.space))
        return builtin_space(self.objective.builtin)

    def resolved_n_init(self) -> int:
        return self.n_init if self.n_init is not None else default_n_init(self.param_space())

    def reward_config(self) -> RewardConfig:
        return RewardConfig(**self.reward.model_dump(), n_rounds=self.n_rounds,
                            n_suggestions=self.n_suggestions)

    def genomes(self) -> List[Genome]:
        """The adaptive pool, which is also the set of base genomes compared against"""
        if self.pool == "full":
            return list(genome_universe(self.acquisition))
        if self.pool == "surrogates":
            return [Genome(surrogate=s, acquisition=AcquisitionKind.GP_HEDGE, params=self.acquisition)
                    for s in SurrogateKind]
        try:
            genomes = [Genome.from_label(label, self.acquisition) for label in self.pool]
        except ValueError as e:
            raise ValueError(f"invalid genome label in pool: {e}") from e
        if not genomes:
            raise ValueError("pool must list at least one genome")
        return list(dict.fromkeys(genomes))

    def workers(self) -> int:
        return self.max_workers if self.max_workers is not None else self.n_suggestions


def load_config(path: Union[str, Path], check_objective: bool = True) -> RunConfig:
    """Read and validate a YAML run config; check_objective also resolves an external command's executable"""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"config {path} is not valid YAML: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must be a mapping")
    config = parse_config(raw, source=str(path))
    if check_objective and config.objective.command is not None:
        check_command(config.objective.command)
    return config


def parse_config(raw: dict, source: str = "<config>") -> RunConfig:
    try:
        return RunConfig.model_validate(raw)
    except pydantic.ValidationError as e:
        raise ConfigError(f"invalid config {source}:\n{e}") from e


def dump_config(config: RunConfig) -> str:
    """YAML text that loads back into an equal RunConfig"""
    return yaml.safe_dump(config.model_dump(mode="json"), sort_keys=False)
