"""Weyl-Heisenberg operators and Bell states for d-dimensional qudits.

Conventions
-----------
``W(n, m) = sum_k exp(2j*pi*k*n/d) |k><k+m|`` so that ``W(0, j)|k> = |k-j>``.
Bell states are ``|Psi_{k,l}> = d**-0.5 * sum_k' exp(2j*pi*k'*l/d) |k'>|k'-k>``
with the first factor as the slow (row-major) index of the ``d**2`` vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _check_dim(d: int) -> None:
    if int(d) != d or d < 2:
        raise ValueError(f"qudit dimension must be an integer >= 2, got {d!r}")


def _check_index(name: str, value: int, d: int) -> None:
    if int(value) != value or not 0 <= value < d:
        raise ValueError(f"{name}={value!r} outside [0, {d})")


@dataclass(frozen=True)
class WeylOperator:
    d: int
    n: int
    m: int
    matrix: np.ndarray

    def __matmul__(self, other):
        if isinstance(other, WeylOperator):
            return self.matrix @ other.matrix
        return self.matrix @ np.asarray(other)


@dataclass(frozen=True)
class QuditBellState:
    d: int
    k: int
    l: int
    amplitudes: np.ndarray


def weyl(d: int, n: int, m: int) -> WeylOperator:
    """Return the Weyl operator ``W_d^{(n,m)}`` as a dense matrix."""
    _check_dim(d)
    _check_index("n", n, d)
    _check_index("m", m, d)
    k = np.arange(d)
    mat = np.zeros((d, d), dtype=complex)
    mat[k, (k + m) % d] = np.exp(2j * np.pi * k * n / d)
    mat.setflags(write=False)
    return WeylOperator(d, int(n), int(m), mat)


def basis(d: int, k: int) -> np.ndarray:
    _check_dim(d)
    _check_index("k", k, d)
    v = np.zeros(d, dtype=complex)
    v[k] = 1.0
    return v


def bell_state(d: int, k: int, l: int) -> QuditBellState:
    """Maximally entangled two-qudit state ``|Psi_{k,l}>``."""
    _check_dim(d)
    _check_index("k", k, d)
    _check_index("l", l, d)
    kp = np.arange(d)
    amps = np.zeros(d * d, dtype=complex)
    amps[kp * d + (kp - k) % d] = np.exp(2j * np.pi * kp * l / d) / np.sqrt(d)
    amps.setflags(write=False)
    return QuditBellState(d, int(k), int(l), amps)


def swap_update(k1: int, l1: int, k2: int, l2: int, r: int, s: int, d: int) -> tuple[int, int]:
    """Bell label of systems (1, 4) after a Bell measurement on (2, 3).

    Given ``|Psi_{k1,l1}>_{12} |Psi_{k2,l2}>_{34}`` and outcome ``r, s``, the
    remaining pair is left in ``|Psi_{k',l'}>_{14}`` with
    ``k' = k1 + k2 - r`` and ``l' = l1 + l2 - s`` (mod d).

    The outcome label refers to the measured pair read as (3, 2): projecting
    with ``<Psi_{r,s}|_{32}``. Reading the pair as (2, 3) instead flips the
    sign of ``r`` in the update.
    """
    _check_dim(d)
    for name, v in (("k1", k1), ("l1", l1), ("k2", k2), ("l2", l2), ("r", r), ("s", s)):
        _check_index(name, v, d)
    return (k1 + k2 - r) % d, (l1 + l2 - s) % d
