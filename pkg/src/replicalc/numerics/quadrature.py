"""Gaussian averages over couplings: tensor Gauss-Hermite grids, seeded Monte Carlo beyond."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

from ..errors import CapacityError

MAX_QUADRATURE_DIM = 8
MIN_NODES = 6


@dataclass(frozen=True)
class QuadratureSpec:
    """How ``Av`` over standard Gaussian couplings is realized.

    ``nodes_per_dim`` is reduced when the full tensor grid would exceed
    ``max_points``; below ``MIN_NODES`` (or above ``MAX_QUADRATURE_DIM``
    dimensions) seeded Monte Carlo with ``mc_samples`` draws is used instead.
    """

    nodes_per_dim: int = 20
    max_points: int = 64_000_000
    mc_samples: int = 0
    seed: int = 12345
    chunk: int = 1 << 16

    def __post_init__(self):
        if self.nodes_per_dim < 2:
            raise ValueError("nodes_per_dim must be >= 2")

    def nodes_for(self, dim: int) -> int:
        if dim == 0:
            return 1
        n = self.nodes_per_dim
        while n**dim > self.max_points:
            n -= 1
        return n

    def uses_quadrature(self, dim: int) -> bool:
        return dim <= MAX_QUADRATURE_DIM and self.nodes_for(dim) >= min(MIN_NODES, self.nodes_per_dim)


@lru_cache(maxsize=None)
def gauss_hermite(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for the standard normal density (weights sum to 1)."""
    x, w = hermegauss(n)
    return x, w / math.sqrt(2.0 * math.pi)


def tensor_chunks(dim: int, nodes: int, chunk: int) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    x, w = gauss_hermite(nodes)
    total = nodes**dim
    shape = (nodes,) * dim
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        digits = np.unravel_index(idx, shape)
        pts = np.stack([x[d] for d in digits], axis=1) if dim else np.zeros((len(idx), 0))
        wts = np.ones(len(idx))
        for d in digits:
            wts = wts * w[d]
        yield pts, wts


def mc_chunks(dim: int, samples: int, seed: int, chunk: int) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    rng = np.random.default_rng(seed)
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        yield rng.standard_normal((m, dim)), np.full(m, 1.0 / samples)
        done += m


def gaussian_chunks(dim: int, spec: QuadratureSpec) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Points and weights approximating the standard Gaussian measure on R**dim."""
    if spec.uses_quadrature(dim):
        return tensor_chunks(dim, spec.nodes_for(dim), spec.chunk)
    if spec.mc_samples > 0:
        return mc_chunks(dim, spec.mc_samples, spec.seed, spec.chunk)
    raise CapacityError(
        f"{dim}-dimensional average exceeds the quadrature limits "
        f"(max {MAX_QUADRATURE_DIM} dims, {spec.max_points} points) and mc_samples is 0"
    )


def coupling_chunks(
    linear: np.ndarray, spec: QuadratureSpec, offset: np.ndarray | None = None
) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Couplings ``offset + X @ linear`` and weights over the Gaussian measure of ``X``.

    For tensor grids the trailing dimensions form a fixed inner block whose
    image under ``linear`` is computed once; the leading dimensions only shift it.
    """
    dim, width = linear.shape
    base = np.zeros(width) if offset is None else np.asarray(offset, dtype=float)
    if not spec.uses_quadrature(dim):
        for pts, wts in gaussian_chunks(dim, spec):
            yield base + pts @ linear, wts
        return
    nodes = spec.nodes_for(dim)
    x, w = gauss_hermite(nodes)
    d_in = dim
    while d_in > 1 and nodes**d_in > spec.chunk:
        d_in -= 1
    d_out = dim - d_in
    (inner_pts, inner_w), = tensor_chunks(d_in, nodes, nodes**d_in)
    inner_g = inner_pts @ linear[d_out:]
    for idx in itertools.product(range(nodes), repeat=d_out):
        shift = base + (x[list(idx)] @ linear[:d_out] if d_out else 0.0)
        yield inner_g + shift, inner_w * float(np.prod(w[list(idx)]))


def describe(dim: int, spec: QuadratureSpec) -> dict:
    if spec.uses_quadrature(dim):
        n = spec.nodes_for(dim)
        return {"method": "gauss-hermite", "dim": dim, "nodes_per_dim": n, "points": n**dim}
    return {"method": "monte-carlo", "dim": dim, "samples": spec.mc_samples, "seed": spec.seed}
