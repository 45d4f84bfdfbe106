"""Atom-cavity reflection and loss coefficients, pulse discretization and
the loss-mode overlap (dephasing) factors of the controlled-phase interaction.

Frequencies are angular (rad/s). Detunings in :class:`CavityParams` are the
carrier detunings; a pulse's frequency grid holds offsets from the carrier.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DEFAULT_SAMPLES = 2048
DEFAULT_SPAN = 6.0
DEFAULT_MARGIN = 10.0

VARIANTS = ("real", "literal")


@dataclass(frozen=True)
class CavityParams:
    C: float
    zeta: float
    kappa: float = 1e9
    gamma_m: float = 1e8
    delta_c: float = 0.0
    delta_a: float = 0.0

    def __post_init__(self):
        if not self.C >= 0:
            raise ValueError(f"cooperativity must be >= 0, got {self.C!r}")
        if not 0 <= self.zeta <= 1:
            raise ValueError(f"cavity efficiency must lie in [0, 1], got {self.zeta!r}")
        if not self.kappa > 0 or not self.gamma_m > 0:
            raise ValueError("kappa and gamma_m must be > 0")


@dataclass(frozen=True)
class PulseSpec:
    """A coherent pulse ``alpha`` in the spectral mode ``f`` sampled on ``omega``.

    ``omega`` are cell midpoints of a uniform grid with spacing ``domega``;
    ``sum(|f|**2) * domega == 1``.
    """

    omega: np.ndarray = field(repr=False)
    f: np.ndarray = field(repr=False)
    tau: float
    alpha: complex

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float)
        f = np.asarray(self.f, dtype=complex)
        if omega.ndim != 1 or omega.shape != f.shape or omega.size < 2:
            raise ValueError("omega and f must be 1-d arrays of equal length >= 2")
        steps = np.diff(omega)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise ValueError("frequency grid must be uniform")
        if not self.tau > 0:
            raise ValueError("pulse duration must be > 0")
        norm = float(np.sum(np.abs(f) ** 2) * steps[0])
        if abs(norm - 1) > 1e-9:
            raise ValueError(f"spectral shape is not normalized (integral of |f|^2 = {norm:.12g})")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "f", f)

    @property
    def domega(self) -> float:
        return float(self.omega[1] - self.omega[0])

    def with_alpha(self, alpha: complex) -> "PulseSpec":
        return PulseSpec(self.omega, self.f, self.tau, complex(alpha))


def _grid(half_width: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    edges = np.linspace(-half_width, half_width, n + 1)
    return edges, 0.5 * (edges[1:] + edges[:-1])


def gaussian_pulse(tau: float, alpha: complex = 1.0, n: int = DEFAULT_SAMPLES, span: float = DEFAULT_SPAN) -> PulseSpec:
    """Gaussian pulse with spectral intensity std ``1/tau``; grid covers +-``span``/tau."""
    bw = 1.0 / tau
    _, w = _grid(span * bw, n)
    f = np.exp(-((w / bw) ** 2) / 4)
    f = f / math.sqrt(np.sum(f**2) * (w[1] - w[0]))
    return PulseSpec(w, f.astype(complex), tau, complex(alpha))


def flat_top_pulse(tau: float, alpha: complex = 1.0, n: int = DEFAULT_SAMPLES, span: float = DEFAULT_SPAN) -> PulseSpec:
    """Spectrally flat pulse of full bandwidth ``2*pi/tau``.

    Cells straddling the band edge get intensity weighted by their covered
    fraction, so the band is integrated exactly at any resolution.
    """
    bw = 2 * math.pi / tau
    edges, w = _grid(span * bw, n)
    lo = np.clip(edges[:-1], -bw / 2, bw / 2)
    hi = np.clip(edges[1:], -bw / 2, bw / 2)
    cover = (hi - lo) / (edges[1] - edges[0])
    f = np.sqrt(cover / bw)
    f = f / math.sqrt(np.sum(f**2) * (w[1] - w[0]))
    return PulseSpec(w, f.astype(complex), tau, complex(alpha))


def load_pulse(path, tau: float, alpha: complex = 1.0) -> PulseSpec:
    """Read a tabulated spectral shape: columns ``omega re(f) im(f)``.

    Whitespace or comma separated; ``#`` starts a comment. The grid must be
    uniform and the shape normalized.
    """
    text = Path(path).read_text()
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].replace(",", " ").strip()
        if line:
            rows.append([float(tok) for tok in line.split()])
    data = np.array(rows, dtype=float)
    if data.ndim != 2 or data.shape[1] != 3:
        raise ValueError(f"{path}: expected three numeric columns (omega, re, im)")
    return PulseSpec(data[:, 0], data[:, 1] + 1j * data[:, 2], tau, complex(alpha))


def coefficients(params: CavityParams, omega, coupled: bool, variant: str = "real"):
    """``(r, l_C, l_A)`` at carrier offsets ``omega`` (scalar or array).

    ``coupled=False`` evaluates the memory-in-|0> response, i.e. ``C = 0``.
    ``variant="real"`` uses the numerator ``2*zeta`` in ``r``, which conserves
    photon number and has the ideal limits ``r -> -1`` (bare cavity) and
    ``r -> +1`` (``C -> inf``). ``variant="literal"`` uses ``2j*zeta``.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    omega = np.asarray(omega, dtype=float)
    C = params.C if coupled else 0.0
    atom = 1 - 2j * (params.delta_a + omega) / params.gamma_m
    denom = 1 - 2j * (params.delta_c + omega) / params.kappa + C / atom
    num = 2 * params.zeta if variant == "real" else 2j * params.zeta
    r = 1 - num / denom
    l_c = -2 * math.sqrt(params.zeta * (1 - params.zeta)) / denom
    l_a = (-2j * math.sqrt(params.zeta * C) / atom) / denom
    return r, l_c, l_a


def reflection_coeffs(params: CavityParams, coupled: bool, variant: str = "real") -> tuple[complex, complex, complex]:
    """Reflection and loss coefficients at the carrier detunings of ``params``."""
    r, l_c, l_a = coefficients(params, 0.0, coupled, variant)
    return complex(r), complex(l_c), complex(l_a)


def memory_bits(m: int, n: int) -> list[int]:
    """Bits of ``m`` for memories 1..n, memory 1 being the most significant."""
    return [(m >> (n - j)) & 1 for j in range(1, n + 1)]


def _log_overlap(a: np.ndarray, b: np.ndarray) -> complex:
    # sum over bins of log <a|b> for coherent states
    return complex(np.sum(-0.5 * np.abs(a) ** 2 - 0.5 * np.abs(b) ** 2 + np.conj(a) * b))


def loss_amplitudes(params: CavityParams, pulse: PulseSpec, bit: int, variant: str = "real"):
    """Per-bin coherent amplitudes leaked into the cavity and atomic loss modes."""
    _, l_c, l_a = coefficients(params, pulse.omega, bool(bit), variant)
    scale = pulse.alpha * pulse.f * math.sqrt(pulse.domega)
    return l_c * scale, l_a * scale


def dephasing_lambda(
    params: CavityParams,
    pulses: list[PulseSpec],
    m: int,
    m_prime: int,
    variant: str = "real",
) -> complex:
    """Single-pass loss-mode overlap ``lambda_{m,m'}`` for memory basis states m, m'.

    One pulse per memory; memory 1 carries the most significant bit.
    """
    n = len(pulses)
    d = 2**n
    if n < 1:
        raise ValueError("need at least one pulse")
    if not (0 <= m < d and 0 <= m_prime < d):
        raise ValueError(f"memory indices must lie in [0, {d}) for {n} pulses")
    if m == m_prime:
        return 1.0 + 0.0j
    total = 0j
    for pulse, b, bp in zip(pulses, memory_bits(m, n), memory_bits(m_prime, n)):
        if b == bp:
            continue
        lc, la = loss_amplitudes(params, pulse, b, variant)
        lcp, lap = loss_amplitudes(params, pulse, bp, variant)
        total += _log_overlap(lc, lcp) + _log_overlap(la, lap)
    return complex(np.exp(total))


def dephasing_matrix(params: CavityParams, pulses: list[PulseSpec], variant: str = "real") -> np.ndarray:
    """All ``lambda_{m,m'}`` at once; entry [m, m']."""
    n = len(pulses)
    d = 2**n
    # per-memory pairwise log overlaps between the bit-0 and bit-1 loss states
    logs = np.zeros((n, 2, 2), dtype=complex)
    for j, pulse in enumerate(pulses):
        amps = [loss_amplitudes(params, pulse, b, variant) for b in (0, 1)]
        for b in (0, 1):
            for bp in (0, 1):
                if b != bp:
                    logs[j, b, bp] = _log_overlap(amps[b][0], amps[bp][0]) + _log_overlap(amps[b][1], amps[bp][1])
    ms = np.arange(d)
    bits = np.array([memory_bits(int(m), n) for m in ms]).reshape(d, n)
    total = np.zeros((d, d), dtype=complex)
    for j in range(n):
        total += logs[j][bits[:, j][:, None], bits[:, j][None, :]]
    return np.exp(total)


def pulse_length_threshold(d: int, kappa: float, zeta: float, margin: float = DEFAULT_MARGIN) -> float:
    """``margin * pi * d / (16 * kappa * (1 - zeta))``; infinite for ``zeta == 1``."""
    if margin < 1:
        raise ValueError("margin must be >= 1")
    if zeta >= 1:
        return math.inf
    return margin * math.pi * d / (16 * kappa * (1 - zeta))


def pulse_length_check(d: int, kappa: float, zeta: float, tau: float, margin: float = DEFAULT_MARGIN) -> tuple[bool, float]:
    """Check that the pulse is long enough to keep below one photon per cavity lifetime.

    Returns ``(passed, threshold)``; failures also emit a ``RuntimeWarning``.
    """
    threshold = pulse_length_threshold(d, kappa, zeta, margin)
    passed = tau >= threshold
    if not passed:
        warnings.warn(
            f"pulse duration {tau:.3g} s below {threshold:.3g} s (d={d}, margin={margin})",
            RuntimeWarning,
            stacklevel=2,
        )
    return passed, threshold
