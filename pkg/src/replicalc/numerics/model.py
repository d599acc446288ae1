"""Finite SK instances enumerated exactly over all 2**N spin configurations."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import CapacityError, DomainError
from . import _kernels

MAX_SPINS = 14


class KernelMode(enum.Enum):
    """Value of an overlap edge between two configurations.

    IDEALIZED is the squared overlap ``q**2``.  EXACT is the true covariance of
    the deformation field, ``(q**2 - 1/N) / 2``.
    """

    IDEALIZED = "idealized"
    EXACT = "exact"


@lru_cache(maxsize=None)
def configurations(n: int) -> np.ndarray:
    """All ``2**n`` spin vectors in {-1, +1}, shape ``(2**n, n)``."""
    if not 1 <= n <= MAX_SPINS:
        raise CapacityError(f"N={n} outside 1..{MAX_SPINS}")
    arr = np.array(list(itertools.product((1.0, -1.0), repeat=n)))
    arr.flags.writeable = False
    return arr


@lru_cache(maxsize=None)
def pairs(n: int) -> tuple[tuple[int, int], ...]:
    return tuple(itertools.combinations(range(n), 2))


@lru_cache(maxsize=None)
def pair_signs(n: int) -> np.ndarray:
    """``sigma_i * sigma_j`` for every configuration (rows) and pair ``i<j`` (columns)."""
    s = configurations(n)
    out = np.array([[row[i] * row[j] for i, j in pairs(n)] for row in s])
    out.flags.writeable = False
    return out


def overlap_kernel(sigma, sigma_prime, mode: KernelMode = KernelMode.IDEALIZED) -> float:
    a = np.asarray(sigma, dtype=float)
    b = np.asarray(sigma_prime, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise DomainError(f"configurations must have equal length, got {a.shape} and {b.shape}")
    n = a.shape[0]
    q2 = (a @ b / n) ** 2
    if mode is KernelMode.EXACT:
        return (q2 - 1.0 / n) / 2.0
    return q2


@lru_cache(maxsize=None)
def kernel_matrix(n: int, mode: KernelMode) -> np.ndarray:
    s = configurations(n)
    q2 = (s @ s.T / n) ** 2
    k = (q2 - 1.0 / n) / 2.0 if mode is KernelMode.EXACT else q2
    k.flags.writeable = False
    return k


def diagonal_value(n: int, mode: KernelMode) -> float:
    return (1.0 - 1.0 / n) / 2.0 if mode is KernelMode.EXACT else 1.0


@dataclass(frozen=True)
class SpinModel:
    """One disorder realization: ``H = -N**-0.5 * sum_{i<j} J_ij s_i s_j``."""

    n: int
    couplings: tuple[float, ...]
    beta: float

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("N must be >= 2")
        if self.n > MAX_SPINS:
            raise CapacityError(f"N={self.n} exceeds the enumeration cap {MAX_SPINS}")
        if len(self.couplings) != self.n * (self.n - 1) // 2:
            raise DomainError(f"expected {self.n * (self.n - 1) // 2} couplings, got {len(self.couplings)}")
        if self.beta < 0:
            raise DomainError("beta must be non-negative")

    @classmethod
    def sample(cls, n: int, beta: float, seed: int | None = None) -> "SpinModel":
        rng = np.random.default_rng(seed)
        return cls(n, tuple(rng.standard_normal(n * (n - 1) // 2)), beta)

    def energies(self) -> np.ndarray:
        return -(pair_signs(self.n) @ np.asarray(self.couplings)) / np.sqrt(self.n)

    def effective_couplings(self) -> np.ndarray:
        """Per-pair coefficients ``g`` with Boltzmann weight ``exp(sum g_p s_i s_j)``."""
        return self.beta * np.asarray(self.couplings) / np.sqrt(self.n)


@dataclass(frozen=True)
class GibbsState:
    weights: np.ndarray
    log_z: float
    free_energy_density: float  # -beta f = log(Z) / N for this disorder


def gibbs_state(model: SpinModel) -> GibbsState:
    g = model.effective_couplings()[None, :]
    w, logz = _kernels.gibbs_weights(g, pair_signs(model.n))
    return GibbsState(w[0], float(logz[0]), float(logz[0]) / model.n)
