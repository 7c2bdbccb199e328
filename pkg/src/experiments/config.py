from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveInt

from ..convnet.config import TrainConfig
from ..mle.config import FitConfig
from ..partition import DEFAULT_ITERS, PartitionMethod

ExperimentName = Literal["accuracy", "setting1", "setting2", "setting3"]
Plan = Tuple[PartitionMethod, PositiveInt]

# (method, K) pairs fitted in each estimation setting
DEFAULT_PLANS = {
    1: [("convnet", 2), ("convnet", 3), ("user", 2), ("user", 3)],
    2: [("convnet", 2), ("user", 2)],
    3: [("convnet", 3), ("convnet", 4)],
}


class AccuracyConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_stationary: PositiveInt = 500
    n_nonstationary: PositiveInt = 500
    test_fraction: float = Field(default=0.2, ge=0.0, lt=1.0)
    g: PositiveInt = 100
    histogram_bins: PositiveInt = 20
    train: TrainConfig = TrainConfig()


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    replicates: PositiveInt = 10
    n: PositiveInt = Field(default=2500, description="Observations per field (a perfect square)")
    seed: NonNegativeInt = 0
    iters: PositiveInt = DEFAULT_ITERS
    bandwidth: float = Field(default=0.05, gt=0.0)
    heatmap_side: PositiveInt = 50
    plans: Optional[List[Plan]] = Field(
        default=None, description="Methods and K to fit; the setting's defaults when unset"
    )
    fit: FitConfig = FitConfig(n_starts=1)
    accuracy: AccuracyConfig = AccuracyConfig()

    def plans_for(self, setting: int) -> List[Plan]:
        return list(self.plans) if self.plans else list(DEFAULT_PLANS[setting])
