"""Pure-loss channel with amplification, reduced to Gaussian displacement noise."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class AmpMode(str, enum.Enum):
    PRE = "pre"
    CC = "cc"

    @classmethod
    def parse(cls, value) -> "AmpMode":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"pre": cls.PRE, "preamplify": cls.PRE, "cc": cls.CC, "ccamplify": cls.CC}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown amplification mode {value!r}; expected 'pre' or 'cc'") from None


@dataclass(frozen=True)
class ChannelConfig:
    eta: float
    amp_mode: AmpMode = AmpMode.PRE

    def __post_init__(self):
        if not 0 < self.eta <= 1:
            raise ValueError(f"transmissivity must lie in (0, 1], got {self.eta!r}")
        object.__setattr__(self, "amp_mode", AmpMode.parse(self.amp_mode))

    def transform(self, sigma2: float) -> float:
        return transform_variance(sigma2, self.eta, self.amp_mode)


@dataclass(frozen=True)
class DisplacementSample:
    u: float
    v: float


def db_to_transmissivity(loss_db: float) -> float:
    """Power transmissivity for a loss given in dB."""
    if not loss_db >= 0:
        raise ValueError(f"loss must be >= 0 dB, got {loss_db!r}")
    return 10 ** (-loss_db / 10)


def transmissivity_to_db(eta: float) -> float:
    return -10 * math.log10(eta)


def transform_variance(sigma2: float, eta: float, mode=AmpMode.PRE) -> float:
    """Peak variance after a loss ``eta`` followed by the chosen amplification.

    ``pre`` adds ``1 - eta``; ``cc`` adds ``(1 - eta) / (2 * eta)``.
    """
    if not sigma2 >= 0:
        raise ValueError(f"sigma2 must be >= 0, got {sigma2!r}")
    if not 0 < eta <= 1:
        raise ValueError(f"transmissivity must lie in (0, 1], got {eta!r}")
    mode = AmpMode.parse(mode)
    if eta == 1:
        return sigma2
    if mode is AmpMode.PRE:
        return sigma2 + (1 - eta)
    return sigma2 + (1 - eta) / (2 * eta)


def make_rng(seed: int, *spawn_key: int) -> np.random.Generator:
    """Counter-based (Philox) stream; ``spawn_key`` selects an independent substream."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in spawn_key))
    return np.random.Generator(np.random.Philox(ss))


def sample_displacements(sigma2: float, rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``size`` independent (u, v) quadrature shifts of variance ``sigma2`` each."""
    if not sigma2 >= 0:
        raise ValueError(f"sigma2 must be >= 0, got {sigma2!r}")
    if sigma2 == 0:
        return np.zeros(size), np.zeros(size)
    z = rng.standard_normal((2, size)) * math.sqrt(sigma2)
    return z[0], z[1]


def sample_displacement(sigma2: float, rng: np.random.Generator) -> DisplacementSample:
    u, v = sample_displacements(sigma2, rng, 1)
    return DisplacementSample(float(u[0]), float(v[0]))
