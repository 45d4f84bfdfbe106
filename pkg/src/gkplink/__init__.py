"""Quantum-repeater links that swap qudits encoded in GKP states.

The package computes heralded shift-error distributions for square and
hexagonal GKP qudits, hashing-bound link rates and their low-loss asymptote,
the fidelity of a cavity-mediated CSUM gate, and Monte Carlo checks of the
swap measurement.
"""

__version__ = "0.1.0"

from .channel import AmpMode, ChannelConfig, transform_variance  # noqa: E402
from .csum import Gate, amplitude_schedule, csum_fidelity, simulate_csum  # noqa: E402
from .gkp import GkpCode, Lattice, SqueezedGkp, shift_distribution, shift_probability  # noqa: E402
from .montecarlo import SwapTrialConfig, run_swap_trials  # noqa: E402
from .qudit import bell_state, swap_update, weyl  # noqa: E402
from .rates import Combine, capacity, hashing_rate, link_rate, optimize_xi, twirled_bell  # noqa: E402

__all__ = [
    "AmpMode", "ChannelConfig", "Combine", "Gate", "GkpCode", "Lattice", "SqueezedGkp",
    "SwapTrialConfig", "amplitude_schedule", "bell_state", "capacity", "csum_fidelity",
    "hashing_rate", "link_rate", "optimize_xi", "run_swap_trials", "shift_distribution",
    "shift_probability", "simulate_csum", "swap_update", "transform_variance",
    "twirled_bell", "weyl",
]
