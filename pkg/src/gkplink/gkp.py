"""GKP qudit lattice geometry, homodyne binning and shift-error probabilities.

Noise convention: the shift-error model takes a width parameter ``sigma2``
and bins a zero-mean Gaussian with density proportional to
``exp(-x**2 / sigma2)``, i.e. a quadrature shift of variance ``sigma2 / 2``.
This is the convention under which the erf expression below is an exact
binned probability, and it is the one the rate engine works in throughout.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf, erfc

DEFAULT_JMAX = 20

# erfc(x) underflows to zero in double precision beyond this argument.
_ERFC_CUTOFF = 27.3


class Lattice(str, enum.Enum):
    SQUARE = "sq"
    HEXAGONAL = "hex"

    @classmethod
    def parse(cls, value) -> "Lattice":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"sq": cls.SQUARE, "square": cls.SQUARE, "hex": cls.HEXAGONAL, "hexagonal": cls.HEXAGONAL}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown lattice {value!r}; expected 'sq' or 'hex'") from None


@dataclass(frozen=True)
class GkpCode:
    """A GKP qudit of dimension ``d = 2**n_qubits`` on a square or hexagonal lattice."""

    lattice: Lattice
    n_qubits: int

    def __post_init__(self):
        object.__setattr__(self, "lattice", Lattice.parse(self.lattice))
        if int(self.n_qubits) != self.n_qubits or self.n_qubits < 1:
            raise ValueError(f"n_qubits must be an integer >= 1, got {self.n_qubits!r}")

    @classmethod
    def from_dimension(cls, lattice, d: int) -> "GkpCode":
        n = int(d).bit_length() - 1
        if d < 2 or 2**n != d:
            raise ValueError(f"dimension must be a power of two >= 2, got {d!r}")
        return cls(lattice, n)

    @property
    def d(self) -> int:
        return 2**self.n_qubits

    @property
    def N(self) -> int:
        return self.n_qubits

    @property
    def spacing(self) -> float:
        """Distance between neighbouring logical peaks along a logical axis."""
        if self.lattice is Lattice.SQUARE:
            return math.sqrt(2 * math.pi / self.d)
        return math.sqrt(4 * math.pi / (math.sqrt(3) * self.d))


@dataclass(frozen=True)
class SqueezedGkp:
    code: GkpCode
    sigma2: float

    def __post_init__(self):
        if not self.sigma2 >= 0:
            raise ValueError(f"sigma2 must be >= 0, got {self.sigma2!r}")


@dataclass(frozen=True)
class ShiftDistribution:
    """Per-quadrature logical shift distribution.

    ``ks`` runs over ``-(d//2)+1, ..., d//2`` and ``probs[i]`` is ``P(ks[i])``.
    """

    code: GkpCode
    ks: np.ndarray
    probs: np.ndarray = field(repr=False)

    def __getitem__(self, k: int) -> float:
        return float(self.probs[_index_of(k, self.code.d)])

    def as_dict(self) -> dict[int, float]:
        return {int(k): float(p) for k, p in zip(self.ks, self.probs)}


def shift_range(d: int) -> np.ndarray:
    return np.arange(-(d // 2) + 1, d // 2 + 1)


def centered_shift(k, d: int):
    """Map integer shifts modulo ``d`` into ``-(d//2)+1 .. d//2``."""
    return (np.asarray(k) + d // 2 - 1) % d - d // 2 + 1


def _index_of(k: int, d: int) -> int:
    return int(centered_shift(k, d)) + d // 2 - 1


def squeezing_db_to_variance(s_db: float) -> float:
    """Convert squeezing in dB to peak variance, ``0.5 * 10**(-s_db/10)``.

    Infinite squeezing maps to exactly zero.
    """
    if math.isinf(s_db) and s_db > 0:
        return 0.0
    if not s_db >= 0:
        raise ValueError(f"squeezing must be >= 0 dB or inf, got {s_db!r}")
    return 0.5 * 10 ** (-s_db / 10)


def logical_bin(x: float, code: GkpCode, mode: str = "round") -> tuple[int, float]:
    """Split a homodyne value into a logical outcome and fractional remainder.

    ``mode="round"`` (default) bins to the nearest peak and returns a remainder
    in ``[-1/2, 1/2)``; ``mode="floor"`` uses floor binning with a remainder in
    ``[0, 1)``.
    """
    if not math.isfinite(x):
        raise ValueError(f"homodyne value must be finite, got {x!r}")
    xl, xf = logical_bin_array(np.array([x], dtype=float), code, mode)
    return int(xl[0]), float(xf[0])


def logical_bin_array(x: np.ndarray, code: GkpCode, mode: str = "round") -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`logical_bin`."""
    return bin_lattice_units(np.asarray(x, dtype=float) / code.spacing, code.d, mode)


def bin_lattice_units(u: np.ndarray, d: int, mode: str = "round") -> tuple[np.ndarray, np.ndarray]:
    """Binning for values already expressed in units of the peak spacing."""
    u = np.asarray(u, dtype=float)
    if mode == "round":
        # floor(u + 1/2) keeps the remainder in [-1/2, 1/2) including ties
        n = np.floor(u + 0.5)
    elif mode == "floor":
        n = np.floor(u)
    else:
        raise ValueError(f"mode must be 'round' or 'floor', got {mode!r}")
    return (n.astype(np.int64) % d), u - n


def erf_scale(code: GkpCode, sigma2: float) -> float:
    """The factor ``a`` multiplying ``(jd + k +- 1/2)`` inside the erf terms."""
    sigma = math.sqrt(sigma2)
    if code.lattice is Lattice.SQUARE:
        return math.sqrt(2 * math.pi / code.d) / sigma
    return math.sqrt(2 * math.pi / code.d) / (sigma * (math.sqrt(3) / 2) ** 0.5)


def _bin_probs(a: float, n: np.ndarray) -> np.ndarray:
    """Mass of ``[(n - 1/2), (n + 1/2)]`` (units of ``1/a``) under the model Gaussian.

    Uses erfc on the far side of zero so the tails keep full relative precision.
    """
    m = np.abs(n).astype(float)
    out = 0.5 * (erfc(a * (m - 0.5)) - erfc(a * (m + 0.5)))
    zero = m == 0
    out[zero] = erf(0.5 * a)
    return out


def shift_probability(state: SqueezedGkp, k: int, j_max: int = DEFAULT_JMAX) -> float:
    """Probability of a ``k``-step logical shift on one quadrature.

    Sums the Gaussian mass of every bin ``j*d + k`` for ``|j| <= j_max``.
    """
    d = state.code.d
    if int(k) != k or not -(d // 2) + 1 <= k <= d // 2:
        raise ValueError(f"shift index {k!r} outside [{-(d // 2) + 1}, {d // 2}]")
    if j_max < 0:
        raise ValueError("j_max must be >= 0")
    if state.sigma2 == 0:
        return 1.0 if k == 0 else 0.0
    a = erf_scale(state.code, state.sigma2)
    n = np.arange(-j_max, j_max + 1) * d + k
    return float(np.sum(_bin_probs(a, n)))


def shift_distribution(state: SqueezedGkp, j_max: int = DEFAULT_JMAX) -> ShiftDistribution:
    """Full per-quadrature shift distribution (identical for X and Z)."""
    code = state.code
    d = code.d
    ks = shift_range(d)
    if j_max < 0:
        raise ValueError("j_max must be >= 0")
    if state.sigma2 == 0:
        probs = (ks == 0).astype(float)
        return ShiftDistribution(code, ks, probs)
    a = erf_scale(code, state.sigma2)
    # bins past the erfc cutoff carry exactly zero mass in double precision
    n_cut = min(int(math.ceil(_ERFC_CUTOFF / a + 0.5)), j_max * d + d // 2)
    n = np.arange(-n_cut, n_cut + 1)
    keep = (n >= -j_max * d - (d // 2) + 1) & (n <= j_max * d + d // 2)
    n = n[keep]
    mass = _bin_probs(a, n)
    probs = np.zeros(d)
    np.add.at(probs, centered_shift(n, d) + d // 2 - 1, mass)
    return ShiftDistribution(code, ks, probs)
