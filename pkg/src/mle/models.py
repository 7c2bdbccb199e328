from typing import List

from pydantic import Field

from ..covariance import LocalParams, ParamField
from ..models import FloatArray, FrozenArrayModel


class FitResult(FrozenArrayModel):
    """Best maximum-likelihood fit across multistarts"""

    anchors: FloatArray
    anchor_params: List[LocalParams]
    loglik: float
    aic: float
    n_evals: int = Field(description="Likelihood evaluations of the winning start")
    total_evals: int = Field(description="Likelihood evaluations over all starts")
    converged: bool
    start_index: int
    applied_jitter: float = 0.0
    bandwidth: float
    trace: List[float] = Field(
        default_factory=list, description="Best loglik after each simplex iteration"
    )

    @property
    def k(self) -> int:
        return len(self.anchor_params)

    @property
    def n_params(self) -> int:
        return 3 * self.k

    def param_field(self) -> ParamField:
        return ParamField(
            anchors=self.anchors,
            anchor_params=self.anchor_params,
            bandwidth=self.bandwidth,
        )
