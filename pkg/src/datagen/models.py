import math
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, model_validator

from ..convnet.models import Label
from ..covariance import LocalParams, ParamField, StationaryParams
from ..field import SpatialField
from ..models import FloatArray, FrozenArrayModel, IntArray

SETTING_PHI = math.pi / 2


class PatternSpec(BaseModel):
    """A spatially varying standard-deviation pattern σ^(u) and its stationary base field"""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    u: int = Field(ge=1, le=5, description="Pattern id")
    theta: float = Field(description="Direction of the pattern")
    r: Optional[PositiveFloat] = Field(default=None, description="Frequency, u = 1, 2, 3")
    p: Optional[PositiveInt] = Field(default=None, description="Power, u = 2")
    base: StationaryParams
    h_eff: Optional[PositiveFloat] = Field(
        default=None, description="Effective range the base α was solved from"
    )

    @model_validator(mode="after")
    def _hyperparams(self) -> "PatternSpec":
        if self.u in (1, 2, 3) and self.r is None:
            raise ValueError(f"pattern {self.u} needs a frequency r")
        if self.u == 2 and self.p is None:
            raise ValueError("pattern 2 needs a power p")
        return self


class SettingSpec(FrozenArrayModel):
    """Ground truth of one estimation setting: anchors, their parameters, grid size"""

    setting: int = Field(ge=1, le=3)
    anchors: FloatArray
    params: List[LocalParams]
    n: int = Field(default=2500, ge=1)
    bandwidth: PositiveFloat = 0.05

    @model_validator(mode="after")
    def _consistent(self) -> "SettingSpec":
        if self.anchors.shape != (len(self.params), 2):
            raise ValueError("need one parameter set per anchor")
        return self

    @classmethod
    def standard(cls, setting: int, n: int = 2500, bandwidth: float = 0.05) -> "SettingSpec":
        """Settings 1-3 of the estimation study"""
        weak = LocalParams.isotropic(sigma=0.8, lam=0.02, nu=0.4, phi=SETTING_PHI)
        if setting == 1:
            anchors = [[0.25, 0.25], [0.25, 0.75], [0.75, 0.25], [0.75, 0.75]]
            strong = LocalParams.isotropic(sigma=1.2, lam=0.05, nu=0.9, phi=SETTING_PHI)
            params = [strong, weak, weak, weak]
        elif setting == 2:
            anchors = [[0.25, 0.25], [0.75, 0.75]]
            strong = LocalParams.isotropic(sigma=1.6, lam=0.09, nu=1.1, phi=SETTING_PHI)
            params = [strong, weak]
        elif setting == 3:
            anchors = [[0.5, 0.5]]
            params = [LocalParams.isotropic(sigma=2.0, lam=0.15, nu=0.8, phi=SETTING_PHI)]
        else:
            raise ValueError(f"unknown setting {setting}, expected 1, 2 or 3")
        return cls(setting=setting, anchors=anchors, params=params, n=n, bandwidth=bandwidth)

    @property
    def k(self) -> int:
        return len(self.params)

    def param_field(self) -> ParamField:
        return ParamField(
            anchors=self.anchors, anchor_params=self.params, bandwidth=self.bandwidth
        )


class NonstationarySample(FrozenArrayModel):
    """A modulated field with the σ^(u) profile that produced it"""

    field: SpatialField
    spec: PatternSpec
    sigma: FloatArray = Field(description="σ^(u) at each observation")
    regimes: IntArray = Field(description="1 where σ^(u) < 0.5, 2 otherwise")

    @model_validator(mode="after")
    def _consistent(self) -> "NonstationarySample":
        if self.sigma.shape != (self.field.n,) or self.regimes.shape != (self.field.n,):
            raise ValueError("sigma and regimes need one entry per observation")
        return self


class CorpusEntry(BaseModel):
    path: str = Field(description="Field CSV, relative to the manifest")
    label: Label
    seed: int
    nu: float
    h_eff: float
    pattern: Optional[PatternSpec] = None


class CorpusManifest(BaseModel):
    """Everything needed to regenerate a labeled corpus"""

    kind: Literal["nsconv-corpus"] = "nsconv-corpus"
    seed: int
    n: int
    entries: List[CorpusEntry] = Field(default_factory=list)

    def count(self, label: Label) -> int:
        return sum(1 for e in self.entries if e.label == label)


def regimes_from_sigma(sigma: np.ndarray) -> np.ndarray:
    return np.where(np.asarray(sigma) >= 0.5, 2, 1)
