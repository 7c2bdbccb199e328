import math
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, model_validator

from ..field import Location
from ..models import FloatArray, FrozenArrayModel

# column order of the parameter tables produced by smoothing
PARAM_NAMES: Tuple[str, ...] = ("sigma", "lambda1", "lambda2", "phi", "nu", "tau")


class StationaryParams(BaseModel):
    """Isotropic Matérn parameters θ = (σ², α, ν)"""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    sigma2: PositiveFloat = Field(description="Variance")
    alpha: PositiveFloat = Field(description="Range")
    nu: PositiveFloat = Field(description="Smoothness")

    def to_local(self) -> "LocalParams":
        """Same covariance in the nonstationary parameterization (λ = 4να²)"""
        lam = 4.0 * self.nu * self.alpha**2
        return LocalParams(
            sigma=math.sqrt(self.sigma2), lambda1=lam, lambda2=lam, nu=self.nu
        )


class LocalParams(BaseModel):
    """Covariance parameters at one location"""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    sigma: PositiveFloat = Field(description="Standard deviation σ(s)")
    lambda1: PositiveFloat = Field(description="First anisotropy eigenvalue λ₁(s)")
    lambda2: PositiveFloat = Field(description="Second anisotropy eigenvalue λ₂(s)")
    phi: float = Field(default=math.pi / 2, description="Rotation angle in (0, π/2]")
    nu: PositiveFloat = Field(description="Smoothness ν(s)")
    tau: float = Field(default=0.0, ge=0.0, description="Nugget standard deviation τ(s)")

    @model_validator(mode="after")
    def _phi_range(self) -> "LocalParams":
        if not (0.0 < self.phi <= math.pi / 2):
            raise ValueError("phi must lie in (0, π/2]")
        return self

    @classmethod
    def isotropic(
        cls, sigma: float, lam: float, nu: float, phi: float = math.pi / 2, tau: float = 0.0
    ) -> "LocalParams":
        return cls(sigma=sigma, lambda1=lam, lambda2=lam, phi=phi, nu=nu, tau=tau)

    def as_row(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in PARAM_NAMES])

    @classmethod
    def from_row(cls, row: np.ndarray) -> "LocalParams":
        return cls(**{name: float(v) for name, v in zip(PARAM_NAMES, row)})


class ParamField(FrozenArrayModel):
    """Anchor parameters mixed by Gaussian-kernel weights into θ(s)"""

    anchors: FloatArray
    anchor_params: List[LocalParams]
    bandwidth: PositiveFloat = Field(default=0.05, allow_inf_nan=False)

    @model_validator(mode="after")
    def _consistent(self) -> "ParamField":
        if self.anchors.ndim != 2 or self.anchors.shape[1] != 2:
            raise ValueError("anchors must have shape (K, 2)")
        k = self.anchors.shape[0]
        if k < 1 or len(self.anchor_params) != k:
            raise ValueError("need K >= 1 anchors with one parameter set each")
        if not np.isfinite(self.anchors).all():
            raise ValueError("anchors must be finite")
        if len({tuple(a) for a in self.anchors.tolist()}) != k:
            raise ValueError("anchors must be pairwise distinct")
        return self

    @classmethod
    def constant(cls, params: LocalParams, bandwidth: float = 0.05) -> "ParamField":
        return cls(anchors=[[0.5, 0.5]], anchor_params=[params], bandwidth=bandwidth)

    @property
    def k(self) -> int:
        return len(self.anchor_params)

    @property
    def anchor_locations(self) -> List[Location]:
        return [Location(x=float(x), y=float(y)) for x, y in self.anchors]

    def param_table(self) -> np.ndarray:
        """(K, 6) table of anchor parameters in PARAM_NAMES order"""
        return np.vstack([p.as_row() for p in self.anchor_params])
