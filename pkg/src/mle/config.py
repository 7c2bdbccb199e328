import math
from typing import Optional, Tuple

from pydantic import BaseModel, Field, NonNegativeInt, PositiveFloat, PositiveInt, model_validator

Bounds = Tuple[PositiveFloat, PositiveFloat]


class FitConfig(BaseModel):
    sigma_bounds: Bounds = (0.01, 10.0)
    lambda_bounds: Bounds = (1e-5, 5.0)
    nu_bounds: Bounds = (0.05, 4.0)
    max_evals: Optional[PositiveInt] = Field(
        default=None, description="Nelder-Mead evaluation budget per start; 2000·K when unset"
    )
    x_tol: PositiveFloat = 1e-6
    f_tol: PositiveFloat = 1e-8
    n_starts: PositiveInt = 3
    start_spread: PositiveFloat = Field(
        default=0.5, description="Std of the log-space perturbation for starts after the first"
    )
    bandwidth: PositiveFloat = 0.05
    phi: float = math.pi / 2
    tau: float = Field(default=0.0, ge=0.0)
    seed: NonNegativeInt = 0

    @model_validator(mode="after")
    def _ordered(self) -> "FitConfig":
        for name in ("sigma_bounds", "lambda_bounds", "nu_bounds"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ValueError(f"{name} must be ordered (lo < hi)")
        if not (0.0 < self.phi <= math.pi / 2):
            raise ValueError("phi must lie in (0, π/2]")
        return self

    def evals_for(self, k: int) -> int:
        return self.max_evals or 2000 * k
