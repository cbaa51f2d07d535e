"""Index policies, regret bounds and a reproducible Monte Carlo harness for
multi-armed bandits with uniform rewards of unknown support."""
from .core import (ArmStats, BanditInstance, InvalidParameterError, RandomnessContract, UniformArm, sample_arm,
                   update_stats)
from .kernels import BACKEND
from .montecarlo import RegretCurve, Scenario, c2_probe, run_scenario
from .policies import (PolicySpec, index_bk, index_chk_normal, index_kr, index_ucb_uniform, run_policy,
                       select_arm)

__version__ = "0.1.0"

__all__ = [
    "ArmStats", "BACKEND", "BanditInstance", "InvalidParameterError", "PolicySpec", "RandomnessContract",
    "RegretCurve", "Scenario", "UniformArm", "c2_probe", "index_bk", "index_chk_normal", "index_kr",
    "index_ucb_uniform", "run_policy", "run_scenario", "sample_arm", "select_arm", "update_stats",
]
