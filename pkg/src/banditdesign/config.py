"""Run configuration schema shared by the CLI and the HTTP service.

A config is a single versioned JSON document describing the experiment
(arms and prior), the hypothesis test, the statistical constraints, the
candidate policy family, and the simulation budget. The seed is mandatory:
no run is ever seeded from the clock.
"""

from __future__ import annotations

from typing import Literal

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from .power import PriorKind, PriorSpec
from .simcore import RewardKind
from .stattests import Sidedness, TestKind, TestSpec


class PriorConfig(BaseModel):
    kind: Literal["beta_iid", "gaussian_iid", "fixed"]
    a: float = 1.0
    b: float = 1.0
    loc: float = 0.0
    scale: float = 1.0
    reward_scale: float = 0.0
    means: list[float] | None = None


class TestConfig(BaseModel):
    kind: Literal["two_sample_t", "t_constant", "t_control", "anova", "tukey_best"]
    sidedness: Literal["one_sided_right", "two_sided"] | None = None
    baseline: float = 0.5
    control_arm: int = 0
    min_effect: float = Field(0.0, ge=0.0)
    family_wise: bool = True
    variance_form: Literal["pooled", "welch"] = "pooled"


class WGridConfig(BaseModel):
    lo: float = Field(1e-4, gt=0)
    hi: float = Field(1.0, gt=0)
    points: int = Field(50, ge=2)


class RunConfig(BaseModel):
    version: int = 1
    seed: int = Field(..., ge=0, description="master seed; mandatory, no wall-clock seeding")
    k: int = Field(..., description="number of arms")
    reward_kind: Literal["bernoulli", "gaussian"] = "bernoulli"
    prior: PriorConfig
    test: TestConfig
    alpha: float = Field(0.05, gt=0, lt=1)
    beta_target: float = Field(0.2, gt=0, lt=1)
    w: float = Field(..., ge=0)
    w_grid: WGridConfig = WGridConfig()
    epsilons: list[float] = Field(default_factory=lambda: [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 1.0])
    horizon_max: int = Field(..., ge=2)
    replications: int = Field(2000, ge=100)
    grid_points: int = Field(10, ge=2)

    @field_validator("k")
    @classmethod
    def k_at_least_two(cls, v):
        if v < 2:
            raise ValueError("K must be >= 2")
        return v

    @field_validator("epsilons")
    @classmethod
    def epsilons_valid(cls, v):
        if not v:
            raise ValueError("epsilons must be nonempty")
        if any(not 0.0 <= e <= 1.0 for e in v):
            raise ValueError("every epsilon must lie in [0, 1]")
        return v

    @model_validator(mode="after")
    def cross_checks(self):
        if self.prior.kind == "fixed":
            if not self.prior.means or len(self.prior.means) != self.k:
                raise ValueError("fixed prior needs a means vector of length K")
        if self.reward_kind == "gaussian" and self.prior.kind in ("gaussian_iid", "fixed"):
            if self.prior.reward_scale <= 0:
                raise ValueError("gaussian rewards need prior.reward_scale > 0")
        if self.test.control_arm >= self.k:
            raise ValueError("control_arm out of range")
        return self

    def prior_spec(self) -> PriorSpec:
        p = self.prior
        if p.kind == "beta_iid":
            return PriorSpec(PriorKind.BETA_IID, k=self.k, a=p.a, b=p.b)
        if p.kind == "gaussian_iid":
            return PriorSpec(PriorKind.GAUSSIAN_IID, k=self.k, loc=p.loc, scale=p.scale,
                             reward_scale=p.reward_scale)
        return PriorSpec(
            PriorKind.FIXED, k=self.k, means=tuple(p.means),
            reward_kind=RewardKind(self.reward_kind), reward_scale=p.reward_scale,
        )

    def test_spec(self) -> TestSpec:
        t = self.test
        return TestSpec(
            kind=TestKind(t.kind),
            sidedness=Sidedness(t.sidedness) if t.sidedness else None,
            baseline=t.baseline,
            control_arm=t.control_arm,
            min_effect=t.min_effect,
            family_wise=t.family_wise,
            variance_form=t.variance_form,
        )

    def w_values(self) -> np.ndarray:
        g = self.w_grid
        return np.logspace(np.log10(g.lo), np.log10(g.hi), g.points)


def load_config(path: str) -> RunConfig:
    import json

    with open(path) as fp:
        data = json.load(fp)
    return RunConfig.model_validate(data)
