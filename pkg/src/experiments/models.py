from typing import List, Optional, Tuple

from pydantic import BaseModel, Field

from ..partition import PartitionMethod

METHOD_LABELS = {"convnet": "ConvNet", "user": "user-defined"}


class ReplicateFit(BaseModel):
    replicate: int
    method: PartitionMethod
    k: int
    loglik: float
    loglik_truth: float
    aic: float
    n_evals: int
    partition_score: Optional[float] = None
    regime_agreement: float = Field(
        description="Share of observations whose subregion matches the generating regime"
    )
    mse: Tuple[float, float, float] = Field(description="Per-location MSE of σ, λ, ν")
    anchor_params: List[Tuple[float, float, float]] = Field(
        description="Fitted (σ, λ, ν) per subregion"
    )


class MethodSummary(BaseModel):
    """One Table-1 style row plus the per-subregion means used for Table-2 style rows"""

    method: PartitionMethod
    k: int
    replicates: int
    mse: Tuple[float, float, float]
    se: Tuple[float, float, float]
    subregion_means: List[Tuple[float, float, float]]
    regime_agreement: float = Field(description="Mean regime agreement over replicates")

    @property
    def label(self) -> str:
        return METHOD_LABELS[self.method]


class StudyReport(BaseModel):
    setting: int
    n: int
    replicates: int
    summaries: List[MethodSummary]
    fits: List[ReplicateFit] = Field(default_factory=list)

    def summary(self, method: PartitionMethod, k: int) -> MethodSummary:
        for s in self.summaries:
            if s.method == method and s.k == k:
                return s
        raise KeyError(f"no summary for {method}, K={k}")


class HistogramBin(BaseModel):
    lo: float
    hi: float
    stationary: int
    nonstationary: int


class AccuracyReport(BaseModel):
    accuracy: float
    stationary_accuracy: float
    nonstationary_accuracy: float
    n_train: int
    n_stationary: int
    n_nonstationary: int
    histogram: List[HistogramBin]
