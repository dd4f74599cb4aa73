"""Simulation and optimization toolkit for statistically valid adaptive experiments.

The package covers the full design loop for multi-armed bandit experiments:

- reward models, bandit policies, and exact/batched experiment runners
  (:mod:`banditdesign.simcore`, :mod:`banditdesign.engine`);
- classical test statistics computed from compressed histories
  (:mod:`banditdesign.stattests`);
- simulation-based recalibration of critical regions for adaptively
  collected data, plus the adaptive randomization-test baseline
  (:mod:`banditdesign.calibration`);
- Monte-Carlo power analysis with grid-binned null calibration
  (:mod:`banditdesign.power`);
- the cost-penalized reward objective and design optimization
  (:mod:`banditdesign.objective`).

The CLI (:mod:`banditdesign.cli`) and HTTP service (:mod:`banditdesign.service`)
are thin front ends over the same library calls.
"""

from .rng import derive_stream
from .simcore import (
    ArmVector,
    BatchSchedule,
    CompressedHistory,
    Policy,
    PolicyKind,
    PolicyState,
    RewardKernel,
    RewardKind,
    batch_schedule,
    policy_select,
    run_batched,
    run_exact,
)
from .stattests import StatValue, TestKind, TestSpec, Sidedness, classical_threshold
from .calibration import CriticalSchedule, NullEstimate, ait_calibrate, art_calibrate, estimate_null
from .power import PowerCurve, PriorSpec, fpr_analysis, power_analysis, power_comparison
from .objective import (
    DesignRecommendation,
    EcpConfig,
    InfeasibleDesignError,
    ecp,
    ecp_property_suite,
    obj_opt,
    post_experiment_eval,
    relative_ecp_curve,
    sensitivity_sweep,
)

__all__ = [
    "ArmVector",
    "BatchSchedule",
    "CompressedHistory",
    "CriticalSchedule",
    "DesignRecommendation",
    "EcpConfig",
    "InfeasibleDesignError",
    "NullEstimate",
    "Policy",
    "PolicyKind",
    "PolicyState",
    "PowerCurve",
    "PriorSpec",
    "RewardKernel",
    "RewardKind",
    "Sidedness",
    "StatValue",
    "TestKind",
    "TestSpec",
    "ait_calibrate",
    "art_calibrate",
    "batch_schedule",
    "classical_threshold",
    "derive_stream",
    "ecp",
    "ecp_property_suite",
    "estimate_null",
    "fpr_analysis",
    "obj_opt",
    "policy_select",
    "post_experiment_eval",
    "power_analysis",
    "power_comparison",
    "relative_ecp_curve",
    "run_batched",
    "run_exact",
    "sensitivity_sweep",
]

__version__ = "0.1.0"
