from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveInt

from ..convnet.config import TrainConfig
from ..experiments.config import ExperimentConfig, ExperimentName
from ..mle.config import FitConfig
from ..partition import DEFAULT_ITERS, PartitionMethod
from ..preprocess import DEFAULT_GRID


class RunConfig(BaseModel):
    """Validated parameters of one command run; its YAML dump reproduces the run"""

    model_config = ConfigDict(extra="forbid")

    out_dir: Path


class SimulateConfig(RunConfig):
    setting: Literal[1, 2, 3]
    n: PositiveInt = 2500
    seed: NonNegativeInt = 0
    bandwidth: float = Field(default=0.05, gt=0.0)


class CorpusConfig(RunConfig):
    n_stationary: PositiveInt = 500
    n_nonstationary: PositiveInt = 500
    n: PositiveInt = 2500
    seed: NonNegativeInt = 0


class TrainCommandConfig(RunConfig):
    corpus: Path = Field(description="Corpus directory or its manifest.yaml")
    g: PositiveInt = DEFAULT_GRID
    test_fraction: float = Field(default=0.0, ge=0.0, lt=1.0)
    split_seed: NonNegativeInt = 0
    train: TrainConfig = TrainConfig()


class ClassifyConfig(RunConfig):
    model: Path
    field: Path


class PartitionConfig(RunConfig):
    field: Path
    model: Optional[Path] = None
    method: PartitionMethod = "convnet"
    k: PositiveInt = 2
    iters: PositiveInt = DEFAULT_ITERS
    seed: NonNegativeInt = 0


class FitCommandConfig(RunConfig):
    field: Path
    model: Optional[Path] = None
    partition: PartitionMethod = "convnet"
    k: List[PositiveInt] = Field(default_factory=lambda: [3], min_length=1)
    iters: PositiveInt = DEFAULT_ITERS
    seed: NonNegativeInt = 0
    heatmap_side: PositiveInt = 50
    fit: FitConfig = FitConfig()


class ExperimentCommandConfig(RunConfig):
    name: ExperimentName
    model: Optional[Path] = None
    corpus: Optional[Path] = None
    experiment: ExperimentConfig = ExperimentConfig()
