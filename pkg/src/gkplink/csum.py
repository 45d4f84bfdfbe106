"""Memory-register to GKP-qudit CSUM / CPHASE gate built from cavity-reflected pulses.

Each memory ``M_k`` (k = 1 is the most significant bit of ``m``) reflects a
coherent pulse ``alpha_k``; the reflected pulse then displaces the GKP mode
through a nearly reflective beamsplitter of reflectivity ``zeta`` (the
schedule's ``zeta``, independent of the cavity efficiency). Displacements are
complex numbers ``q + i p`` in the units of the amplitude table.

The resulting hybrid state is kept as ``(g, beta)``: coherence factors
between memory basis states and the displacement each basis state imparts.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .cavity import (
    CavityParams,
    PulseSpec,
    coefficients,
    dephasing_matrix,
    flat_top_pulse,
    gaussian_pulse,
    memory_bits,
)
from .gkp import GkpCode, Lattice


class Gate(str, enum.Enum):
    CSUM = "csum"
    CPHASE = "cphase"

    @classmethod
    def parse(cls, value) -> "Gate":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown gate {value!r}; expected 'csum' or 'cphase'") from None


def lattice_step(code: GkpCode, gate=Gate.CSUM) -> complex:
    """Displacement advancing the logical label by one for the given gate."""
    gate = Gate.parse(gate)
    d = code.d
    if code.lattice is Lattice.SQUARE:
        unit = math.sqrt(2 * math.pi / d)
        return complex(unit) if gate is Gate.CSUM else 1j * unit
    unit = math.sqrt(2 * math.pi / (math.sqrt(3) * d))
    if gate is Gate.CSUM:
        return unit * (math.sqrt(3) - 1j) / 2
    return 1j * unit


@dataclass(frozen=True)
class GateSchedule:
    gate: Gate
    code: GkpCode
    zeta: float
    amplitudes: np.ndarray = field(repr=False)  # alpha_k * sqrt(1 - zeta), k = 1..N
    pre_displacement: complex

    @property
    def alphas(self) -> np.ndarray:
        return self.amplitudes / math.sqrt(1 - self.zeta)

    @property
    def step(self) -> complex:
        return lattice_step(self.code, self.gate)


@dataclass(frozen=True)
class HybridState:
    """Memory-GKP state after the gate.

    ``g[m, m']`` are the coherence factors (unit diagonal); the memory density
    matrix is ``g / d`` for the uniform ``|+>^N`` input. ``beta[m]`` is the
    displacement imparted on the GKP mode for memory state ``m`` before the
    pre-displacement is added.
    """

    d: int
    g: np.ndarray = field(repr=False)
    beta: np.ndarray = field(repr=False)
    pre_displacement: complex = 0j
    step: complex = 1 + 0j
    extra_variance: float = 0.0

    @property
    def rho_memory(self) -> np.ndarray:
        return self.g / self.d

    @property
    def target(self) -> np.ndarray:
        """Ideal total displacement ``m * step`` for each memory state."""
        return np.arange(self.d) * self.step

    @property
    def displacement_error(self) -> np.ndarray:
        return self.beta + self.pre_displacement - self.target


def amplitude_schedule(code: GkpCode, gate=Gate.CSUM, zeta: float = 0.9) -> GateSchedule:
    """Coherent amplitudes and pre-displacement for the requested gate."""
    gate = Gate.parse(gate)
    if not 0 <= zeta < 1:
        raise ValueError(f"beamsplitter reflectivity must lie in [0, 1), got {zeta!r}")
    d = code.d
    step = lattice_step(code, gate)
    k = np.arange(1, code.n_qubits + 1)
    amplitudes = (d / 2.0 ** (k + 1)) * step
    pre = (d - 1) / 2 * step
    return GateSchedule(gate, code, float(zeta), amplitudes.astype(complex), complex(pre))


def net_displacement(m: int, code: GkpCode, gate=Gate.CSUM) -> complex:
    """Ideal displacement ``(m - (d-1)/2) * step`` imparted for memory state ``m``."""
    if not 0 <= m < code.d:
        raise ValueError(f"memory state {m!r} outside [0, {code.d})")
    return (m - (code.d - 1) / 2) * lattice_step(code, gate)


def schedule_displacement(schedule: GateSchedule, m: int) -> complex:
    """Sum of the signed pulse amplitudes ``sum_k (-1)**(m_k + 1) * alpha_k sqrt(1-zeta)``."""
    n = schedule.code.n_qubits
    signs = np.array([1.0 if b else -1.0 for b in memory_bits(m, n)])
    return complex(np.sum(signs * schedule.amplitudes))


def flip_memory(m: int, d: int) -> int:
    """Label of ``m`` after a Pauli X on every memory."""
    return (d - 1) - m


def schedule_pulses(schedule: GateSchedule, tau: float, shape: str = "gaussian", **grid) -> list[PulseSpec]:
    """Pulses of the given shape carrying the schedule's amplitudes."""
    if shape == "gaussian":
        base = gaussian_pulse(tau, 1.0, **grid)
    elif shape in ("flat", "flat-top", "flattop"):
        base = flat_top_pulse(tau, 1.0, **grid)
    else:
        raise ValueError(f"unknown pulse shape {shape!r}")
    return [base.with_alpha(a) for a in schedule.alphas]


def _check_pulses(schedule: GateSchedule, pulses: list[PulseSpec]) -> None:
    if len(pulses) != schedule.code.n_qubits:
        raise ValueError(f"expected {schedule.code.n_qubits} pulses, got {len(pulses)}")
    for k, (p, a) in enumerate(zip(pulses, schedule.alphas), start=1):
        if not np.isclose(p.alpha, a, rtol=1e-9, atol=1e-12):
            raise ValueError(f"pulse {k} amplitude {p.alpha} does not match schedule {a}")


def simulate_csum(
    schedule: GateSchedule,
    cavity: CavityParams,
    pulses: list[PulseSpec],
    variant: str = "real",
    bs_noise: bool = False,
) -> HybridState:
    """Propagate the uniform memory superposition through the imperfect gate.

    ``beta[m]`` keeps only the component of each reflected pulse that is
    mode-matched to its input shape; the remainder leaves the GKP mode and is
    counted with the cavity loss modes in ``g``. With ``bs_noise`` each
    beamsplitter pass adds Gaussian variance ``1 - zeta`` to the GKP peaks.
    """
    _check_pulses(schedule, pulses)
    n = schedule.code.n_qubits
    d = schedule.code.d

    # mean reflection seen by each pulse shape, per memory bit
    mean_r = np.zeros((n, 2), dtype=complex)
    mismatch_log = np.zeros((n, 2, 2), dtype=complex)
    for j, pulse in enumerate(pulses):
        w = np.abs(pulse.f) ** 2 * pulse.domega
        resid = []
        for b in (0, 1):
            r, _, _ = coefficients(cavity, pulse.omega, bool(b), variant)
            mean_r[j, b] = np.sum(w * r)
            amp = schedule.amplitudes[j] * (r - mean_r[j, b]) * pulse.f * math.sqrt(pulse.domega)
            resid.append(amp)
        for b in (0, 1):
            for bp in (0, 1):
                if b != bp:
                    a, c = resid[b], resid[bp]
                    mismatch_log[j, b, bp] = np.sum(-0.5 * np.abs(a) ** 2 - 0.5 * np.abs(c) ** 2 + np.conj(a) * c)

    bits = np.array([memory_bits(m, n) for m in range(d)]).reshape(d, n)
    beta = np.zeros(d, dtype=complex)
    mismatch = np.zeros((d, d), dtype=complex)
    for j in range(n):
        beta += schedule.amplitudes[j] * mean_r[j, bits[:, j]]
        mismatch += mismatch_log[j][bits[:, j][:, None], bits[:, j][None, :]]

    lam_first = dephasing_matrix(cavity, pulses, variant)
    # second reflection happens with every memory flipped by the X gates
    flipped = flip_memory(np.arange(d), d)
    lam_second = lam_first[np.ix_(flipped, flipped)]
    g = lam_first * lam_second * np.exp(mismatch)
    np.fill_diagonal(g, 1.0)

    extra = n * (1 - schedule.zeta) if bs_noise else 0.0
    return HybridState(d, g, beta, schedule.pre_displacement, schedule.step, extra)


def ideal_state(schedule: GateSchedule) -> HybridState:
    """The perfect-interface limit: full coherence and exact displacements."""
    d = schedule.code.d
    beta = np.array([schedule_displacement(schedule, m) for m in range(d)])
    return HybridState(d, np.ones((d, d), dtype=complex), beta, schedule.pre_displacement, schedule.step)


def csum_fidelity(state: HybridState, sigma2: float) -> float:
    """Overlap of the gate output with the ideal memory-GKP entangled state.

    Each memory branch contributes an amplitude ``o_m`` for its GKP peak
    landing on the target: ``o_m = exp(-|err_m|**2 / (8 * s2))`` for Gaussian
    peaks of variance ``s2 = sigma2 + state.extra_variance``, and 1 or 0 for
    ideal peaks depending on whether the error vanishes. Then
    ``F = Re(o^T g o) / d**2``.
    """
    if not sigma2 >= 0:
        raise ValueError(f"sigma2 must be >= 0, got {sigma2!r}")
    s2 = sigma2 + state.extra_variance
    err2 = np.abs(state.displacement_error) ** 2
    if s2 == 0:
        o = (err2 < 1e-24).astype(float)
    else:
        o = np.exp(-err2 / (8 * s2))
    f = float(np.real(o @ state.g @ o)) / state.d**2
    return min(max(f, 0.0), 1.0)
