import math

from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, model_validator

from ..models import FloatArray, FrozenArrayModel

LOG_2PI = math.log(2.0 * math.pi)


class CholeskyFactor(FrozenArrayModel):
    lower: FloatArray = Field(description="Lower-triangular L with LLᵀ = M + jitter·I")
    applied_jitter: NonNegativeFloat = Field(
        description="Absolute value added to the diagonal before factorization"
    )

    @property
    def n(self) -> int:
        return int(self.lower.shape[0])

    @property
    def logdet(self) -> float:
        return float(2.0 * math.fsum(math.log(v) for v in self.lower.diagonal()))


class LogLikResult(BaseModel):
    """Gaussian log-likelihood and its parts"""

    model_config = ConfigDict(frozen=True)

    loglik: float
    n: int
    logdet: float
    quad_form: float = Field(description="Zᵀ Σ⁻¹ Z")
    applied_jitter: float = 0.0

    @model_validator(mode="after")
    def _identity(self) -> "LogLikResult":
        expected = -0.5 * (self.n * LOG_2PI + self.logdet + self.quad_form)
        if not math.isclose(self.loglik, expected, rel_tol=1e-12, abs_tol=1e-9):
            raise ValueError("loglik does not match its components")
        return self

    @classmethod
    def from_parts(
        cls, n: int, logdet: float, quad_form: float, applied_jitter: float = 0.0
    ) -> "LogLikResult":
        return cls(
            loglik=-0.5 * (n * LOG_2PI + logdet + quad_form),
            n=n,
            logdet=logdet,
            quad_form=quad_form,
            applied_jitter=applied_jitter,
        )
