"""Constrained optimization by gradient training.

Optimization variables become trainable parameters, constraints are removed
by differentiable reparameterizations, and the objective is the training
loss. Ships a complete IRS-aided multi-user MIMO joint-beamforming instance.
"""

try:
    from . import _core
except ImportError:  # pragma: no cover - in-tree builds put _core on sys.path
    import _core

ChannelSet = _core.ChannelSet
Solution = _core.Solution
baseline_random_mrt = _core.baseline_random_mrt
box = _core.box
effective_channel = _core.effective_channel
frobenius_power = _core.frobenius_power
gen_channels = _core.gen_channels
lin_eq_factorize = _core.lin_eq_factorize
load_scenario = _core.load_scenario
oracle_grid = _core.oracle_grid
oracle_k1_m1 = _core.oracle_k1_m1
path_loss_db = _core.path_loss_db
save_scenario = _core.save_scenario
sinr = _core.sinr
solve = _core.solve
steering = _core.steering
sum_power = _core.sum_power
sum_rate = _core.sum_rate
unit_modulus = _core.unit_modulus

__all__ = [
    "ChannelSet",
    "Solution",
    "baseline_random_mrt",
    "box",
    "effective_channel",
    "frobenius_power",
    "gen_channels",
    "lin_eq_factorize",
    "load_scenario",
    "oracle_grid",
    "oracle_k1_m1",
    "path_loss_db",
    "save_scenario",
    "sinr",
    "solve",
    "steering",
    "sum_power",
    "sum_rate",
    "unit_modulus",
]
