"""Monte Carlo oracle for the dual-homodyne qudit swap.

Trials work on lattice arithmetic: an ideal homodyne value ``(a + n*d) * s``
for a random logical value ``a`` and lattice period ``n`` plus a Gaussian
shift. The noise variance follows the shift-error model's convention
(see :mod:`gkplink.gkp`): a model width ``sigma2`` is a quadrature shift of
variance ``sigma2 / 2``.

Each ``shard`` of trials draws from its own Philox substream keyed by
``(seed, shard_index)``, so results do not depend on how shards are scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import make_rng, sample_displacements
from .gkp import GkpCode, bin_lattice_units, centered_shift, shift_range
from .qudit import swap_update
from .rates import Combine

SHARD_SIZE = 1 << 16


@dataclass(frozen=True)
class SwapTrialConfig:
    code: GkpCode
    sigma2_arm: float
    n_trials: int
    seed: int = 0
    combine: Combine = Combine.SUM

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if not self.sigma2_arm >= 0:
            raise ValueError("sigma2_arm must be >= 0")
        object.__setattr__(self, "combine", Combine.parse(self.combine))

    @property
    def sigma2_eff(self) -> float:
        return self.sigma2_arm if self.combine is Combine.SINGLE else 2 * self.sigma2_arm


@dataclass(frozen=True)
class SwapOutcome:
    x: float
    y: float
    x_L: int
    y_L: int
    x_f: float
    y_f: float
    heralded: tuple[int, int]
    true_shift: tuple[int, int]


@dataclass
class SwapOutcomes:
    """Column-wise outcome stream; ``row(i)`` gives a :class:`SwapOutcome`."""

    x: np.ndarray
    y: np.ndarray
    x_L: np.ndarray
    y_L: np.ndarray
    x_f: np.ndarray
    y_f: np.ndarray
    k_label: np.ndarray
    l_label: np.ndarray
    shift_x: np.ndarray
    shift_y: np.ndarray

    COLUMNS = ("x", "y", "x_L", "y_L", "x_f", "y_f", "k_label", "l_label", "shift_x", "shift_y")

    def __len__(self) -> int:
        return len(self.x)

    def row(self, i: int) -> SwapOutcome:
        return SwapOutcome(
            float(self.x[i]),
            float(self.y[i]),
            int(self.x_L[i]),
            int(self.y_L[i]),
            float(self.x_f[i]),
            float(self.y_f[i]),
            (int(self.k_label[i]), int(self.l_label[i])),
            (int(self.shift_x[i]), int(self.shift_y[i])),
        )

    @classmethod
    def concat(cls, parts: list["SwapOutcomes"]) -> "SwapOutcomes":
        return cls(*(np.concatenate([getattr(p, c) for p in parts]) for c in cls.COLUMNS))


@dataclass
class SwapResult:
    config: SwapTrialConfig
    ks: np.ndarray
    counts: np.ndarray = field(repr=False)  # counts[i, j] for shifts (ks[i], ks[j])
    outcomes: SwapOutcomes | None = None

    @property
    def n_trials(self) -> int:
        return int(self.counts.sum())

    def marginal(self, axis: str) -> np.ndarray:
        return self.counts.sum(axis=1 if axis == "x" else 0)

    def frequencies(self) -> np.ndarray:
        return self.counts / self.n_trials


def heralded_label(x_L: int, y_L: int, d: int) -> tuple[int, int]:
    """Bell label heralded by logical outcomes ``(x_L, y_L)`` on ideal inputs.

    Both links start in ``|Psi_{0,0}>``; the outcome corresponds to the Bell
    projection ``r = -x_L``, ``s = y_L``, leaving ``|Psi_{x_L, -y_L}>``.
    """
    return swap_update(0, 0, 0, 0, (-x_L) % d, y_L % d, d)


def _shard(config: SwapTrialConfig, index: int, size: int, keep: bool):
    code = config.code
    d, s = code.d, code.spacing
    rng = make_rng(config.seed, index)
    q_var = config.sigma2_arm / 2
    u1, v1 = sample_displacements(q_var, rng, size)
    if config.combine is Combine.SUM:
        u2, v2 = sample_displacements(q_var, rng, size)
        # difference of q and sum of p after the rescaled 50:50 beamsplitter
        nx, ny = u1 - u2, v1 + v2
    else:
        nx, ny = u1, v1
    ax = rng.integers(0, d, size)
    ay = rng.integers(0, d, size)
    px = rng.integers(-2, 3, size)
    py = rng.integers(-2, 3, size)
    # bin in lattice units so noiseless trials land exactly on a peak
    ux = (ax + px * d) + nx / s
    uy = (ay + py * d) + ny / s
    x_L, x_f = bin_lattice_units(ux, d)
    y_L, y_f = bin_lattice_units(uy, d)
    x, y = ux * s, uy * s

    obs_x = centered_shift(x_L - ax, d)
    obs_y = centered_shift(y_L - ay, d)
    true_x = np.floor(nx / s + 0.5).astype(np.int64)
    true_y = np.floor(ny / s + 0.5).astype(np.int64)

    counts = np.zeros((d, d), dtype=np.int64)
    np.add.at(counts, (obs_x + d // 2 - 1, obs_y + d // 2 - 1), 1)

    outcomes = None
    if keep:
        k_lab = x_L % d
        l_lab = (-y_L) % d
        outcomes = SwapOutcomes(x, y, x_L, y_L, x_f, y_f, k_lab, l_lab, true_x, true_y)
    return counts, outcomes


def run_swap_trials(config: SwapTrialConfig, keep_outcomes: bool = False, threads: int = 1) -> SwapResult:
    """Run ``config.n_trials`` simulated swaps and histogram the logical shifts."""
    sizes = [SHARD_SIZE] * (config.n_trials // SHARD_SIZE)
    if config.n_trials % SHARD_SIZE:
        sizes.append(config.n_trials % SHARD_SIZE)
    jobs = list(enumerate(sizes))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda job: _shard(config, job[0], job[1], keep_outcomes), jobs))
    else:
        parts = [_shard(config, i, n, keep_outcomes) for i, n in jobs]
    counts = sum(p[0] for p in parts)
    outcomes = SwapOutcomes.concat([p[1] for p in parts]) if keep_outcomes else None
    return SwapResult(config, shift_range(config.code.d), counts, outcomes)


def wrapped_normal_cdf(x, std: float, n_wrap: int | None = None):
    """CDF on ``[-1/2, 1/2)`` of a zero-mean normal of deviation ``std`` wrapped onto the unit circle."""
    from scipy.stats import norm

    if n_wrap is None:
        n_wrap = 10 + int(math.ceil(10 * std))
    x = np.asarray(x, dtype=float)
    j = np.arange(-n_wrap, n_wrap + 1)[:, None]
    return np.sum(norm.cdf((x[None, :] + j) / std) - norm.cdf((-0.5 + j) / std), axis=0)


def z_scores(counts: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """Signed deviation of observed counts from model probabilities, in normal units.

    Each bin's exact binomial tail probability (upper tail for an excess,
    lower tail for a deficit) is mapped to the normal quantile with the same
    tail mass. Unlike ``(f - p) / se`` this stays calibrated for bins whose
    expected count is below one. Returns 0 when the count is not in the tail
    and ``+-inf`` for counts the model forbids.
    """
    from scipy.stats import binom, norm

    counts = np.asarray(counts, dtype=np.int64)
    probs = np.clip(np.asarray(probs, dtype=float), 0.0, 1.0)
    n = int(counts.sum())
    expected = n * probs
    z = np.zeros(len(counts))
    for i, (c, p, mu) in enumerate(zip(counts, probs, expected)):
        if c > mu:
            tail = binom.sf(c - 1, n, p)
            z[i] = math.inf if tail == 0 else max(0.0, float(norm.isf(tail)))
        elif c < mu:
            tail = binom.cdf(c, n, p)
            z[i] = -math.inf if tail == 0 else min(0.0, float(norm.ppf(tail)))
    return z
