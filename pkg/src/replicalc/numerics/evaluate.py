"""Quenched and deformed expectations of overlap polynomials on small SK systems."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..algebra import Polynomial
from ..errors import DomainError
from ..graph import GeneralizedGraph, canonicalize, components, render
from . import _kernels
from .model import KernelMode, SpinModel, diagonal_value, kernel_matrix, pair_signs
from .quadrature import QuadratureSpec, coupling_chunks


# --------------------------------------------------------------------------
# compilation

Component = tuple[int, list[tuple[int, int, int]], list[int]]


def _component_shape(g: GeneralizedGraph) -> Component:
    labels = {v: i for i, v in enumerate(sorted(g.vertices))}
    k = len(labels)
    loops = [0] * k
    edges = []
    for (u, v), m in g.edges:
        if u == v:
            loops[labels[u]] += m
        else:
            edges.append((labels[u], labels[v], m))
    return k, edges, loops


def _elimination_ops(comp: Component, slot0: int) -> tuple[list[list[int]], int] | None:
    """Min-degree elimination into LOAD/LEAF/SERIES/MERGE/ROOT rows; None if some step needs degree >= 3."""
    k, edges, _ = comp
    rows: list[list[int]] = []
    slot = slot0
    factor: dict[frozenset, tuple[int, int, int]] = {}  # {u,v} -> (slot, row vertex, col vertex)
    for u, v, m in edges:
        rows.append([_kernels.OP_LOAD, 0, 0, 0, 0, 0, 0, 0, slot, m])
        factor[frozenset((u, v))] = (slot, u, v)
        slot += 1

    def oriented(a: int, b: int) -> tuple[int, int]:
        s, r, _ = factor[frozenset((a, b))]
        return s, (0 if r == a else 1)

    alive = set(range(k))
    while alive:
        deg = {v: sum(1 for key in factor if v in key) for v in alive}
        v = min(alive, key=lambda x: (deg[x], x))
        nbrs = sorted(next(iter(key - {v})) for key in factor if v in key)
        if len(nbrs) == 0:
            rows.append([_kernels.OP_ROOT, v, 0, 0, 0, 0, 0, 0, 0, 0])
        elif len(nbrs) == 1:
            u = nbrs[0]
            s1, t1 = oriented(u, v)
            rows.append([_kernels.OP_LEAF, v, u, 0, s1, t1, 0, 0, 0, 0])
            del factor[frozenset((u, v))]
        elif len(nbrs) == 2:
            u, x = nbrs
            s1, t1 = oriented(u, v)
            s2, t2 = oriented(v, x)
            new = slot
            slot += 1
            rows.append([_kernels.OP_SERIES, v, u, x, s1, t1, s2, t2, new, 0])
            del factor[frozenset((u, v))]
            del factor[frozenset((v, x))]
            key = frozenset((u, x))
            if key in factor:
                s3, t3 = oriented(u, x)
                merged = slot
                slot += 1
                rows.append([_kernels.OP_MERGE, 0, u, x, new, 0, s3, t3, merged, 0])
                factor[key] = (merged, u, x)
            else:
                factor[key] = (new, u, x)
        else:
            return None
        alive.remove(v)
    return rows, slot


@dataclass
class ContractionProgram:
    """A polynomial flattened into distinct connected components plus per-term products."""

    n: int
    kernel: KernelMode
    components: list[Component]
    term_coeffs: np.ndarray
    term_components: list[list[int]]
    kpow: np.ndarray
    loopdiag: np.ndarray
    ops: np.ndarray
    op_start: np.ndarray
    vloops: np.ndarray
    v_start: np.ndarray
    n_slots: int
    max_vertices: int
    fallback: list[int]

    def combine(self, values: np.ndarray) -> np.ndarray:
        """Per-node polynomial value from per-node component values."""
        total = np.zeros(values.shape[0])
        for c, idx in zip(self.term_coeffs, self.term_components):
            if idx:
                total += c * np.prod(values[:, idx], axis=1)
            else:
                total += c
        return total


def compile_polynomial(p, n: int, kernel: KernelMode) -> ContractionProgram:
    p = _as_poly(p)
    for g in p:
        if g.legs:
            raise DomainError(f"expectations need leg-free terms; {render(g)} has legs")
    comp_index: dict[GeneralizedGraph, int] = {}
    comps: list[Component] = []
    coeffs, term_comps = [], []
    for g, c in p.sorted_terms():
        idx = []
        for piece in components(g):
            key = canonicalize(piece).graph
            if key not in comp_index:
                comp_index[key] = len(comps)
                comps.append(_component_shape(key))
            idx.append(comp_index[key])
        coeffs.append(float(c))
        term_comps.append(sorted(idx))

    kmat = kernel_matrix(n, kernel)
    max_m = max((m for _, es, _ in comps for _, _, m in es), default=1)
    kpow = np.stack([kmat**m for m in range(max_m + 1)])
    c = kmat.shape[0]
    loopdiag = np.full(c, diagonal_value(n, kernel))

    rows: list[list[int]] = []
    op_start = [0]
    vloops: list[int] = []
    v_start = [0]
    fallback = []
    n_slots = 0
    for ci, comp in enumerate(comps):
        res = _elimination_ops(comp, n_slots)
        if res is None:
            fallback.append(ci)
            ops_c: list[list[int]] = []
        else:
            ops_c, used = res
            n_slots = max(n_slots, used)
        rows.extend(ops_c)
        op_start.append(len(rows))
        vloops.extend(comp[2])
        v_start.append(len(vloops))
    ops = np.array(rows, dtype=np.int64).reshape(-1, _kernels.OP_WIDTH)
    return ContractionProgram(
        n=n,
        kernel=kernel,
        components=comps,
        term_coeffs=np.array(coeffs),
        term_components=term_comps,
        kpow=np.ascontiguousarray(kpow),
        loopdiag=loopdiag,
        ops=ops,
        op_start=np.array(op_start, dtype=np.int64),
        vloops=np.array(vloops, dtype=np.int64),
        v_start=np.array(v_start, dtype=np.int64),
        n_slots=n_slots,
        max_vertices=max((k for k, _, _ in comps), default=1),
        fallback=fallback,
    )


@lru_cache(maxsize=256)
def _compiled(p: Polynomial, n: int, kernel: KernelMode) -> ContractionProgram:
    return compile_polynomial(p, n, kernel)


def _as_poly(p) -> Polynomial:
    if isinstance(p, Polynomial):
        return p
    if isinstance(p, GeneralizedGraph):
        return Polynomial.monomial(p)
    if isinstance(p, str):
        return Polynomial.parse(p)
    raise TypeError(f"expected Polynomial, GeneralizedGraph or str, got {type(p).__name__}")


# --------------------------------------------------------------------------
# expectations

def thermal_expect(p, couplings: np.ndarray, n: int, kernel: KernelMode = KernelMode.EXACT,
                   use_numba: bool | None = None) -> np.ndarray:
    """Replica-product Gibbs expectation for each row of effective couplings (no disorder average)."""
    prog = _compiled(_as_poly(p), n, kernel)
    vals, _ = _kernels.component_values(np.atleast_2d(couplings), pair_signs(n), prog, use_numba)
    return prog.combine(vals)


def gaussian_average(
    p,
    n: int,
    linear: np.ndarray,
    quad: QuadratureSpec,
    kernel: KernelMode = KernelMode.EXACT,
    offset: np.ndarray | None = None,
    use_numba: bool | None = None,
) -> float:
    """Average over standard Gaussian ``X`` of the thermal expectation at couplings ``offset + X @ linear``."""
    prog = _compiled(_as_poly(p), n, kernel)
    signs = pair_signs(n)
    total = 0.0
    for g, wts in coupling_chunks(linear, quad, offset):
        vals, _ = _kernels.component_values(g, signs, prog, use_numba)
        total += float(wts @ prog.combine(vals))
    return total


def quenched_expect(
    p,
    n: int,
    beta: float,
    quad: QuadratureSpec | None = None,
    kernel: KernelMode = KernelMode.EXACT,
    use_numba: bool | None = None,
) -> float:
    """``E(P)``: disorder average of the replica-product Gibbs expectation."""
    quad = quad or QuadratureSpec()
    n_pairs = n * (n - 1) // 2
    linear = (beta / np.sqrt(n)) * np.eye(n_pairs)
    return gaussian_average(p, n, linear, quad, kernel, use_numba=use_numba)


def deformed_expect(
    p,
    lam: float,
    model: SpinModel,
    quad: QuadratureSpec | None = None,
    kernel: KernelMode = KernelMode.EXACT,
    use_numba: bool | None = None,
) -> float:
    """Deformed state for fixed ``J``, averaged over the deformation couplings ``J'``.

    Each replica carries weight ``exp(-beta H(J) + lam K(J'))`` with
    ``K = -N**-1 sum_{i<j} J'_ij s_i s_j``.
    """
    quad = quad or QuadratureSpec()
    n = model.n
    n_pairs = n * (n - 1) // 2
    linear = -(lam / n) * np.eye(n_pairs)
    return gaussian_average(p, n, linear, quad, kernel, offset=model.effective_couplings(), use_numba=use_numba)


def averaged_deformed_expect(
    p,
    lam: float,
    n: int,
    beta: float,
    quad: QuadratureSpec | None = None,
    kernel: KernelMode = KernelMode.EXACT,
    use_numba: bool | None = None,
) -> float:
    """``Av_J Av_J'`` of the deformed state: joint grid over both coupling sets."""
    quad = quad or QuadratureSpec()
    n_pairs = n * (n - 1) // 2
    linear = np.vstack([(beta / np.sqrt(n)) * np.eye(n_pairs), -(lam / n) * np.eye(n_pairs)])
    return gaussian_average(p, n, linear, quad, kernel, use_numba=use_numba)


def log_partition_average(n: int, beta: float, quad: QuadratureSpec | None = None) -> float:
    """``Av(log Z) / N`` by the same quadrature, for the free-energy sanity probe."""
    quad = quad or QuadratureSpec()
    n_pairs = n * (n - 1) // 2
    linear = (beta / np.sqrt(n)) * np.eye(n_pairs)
    signs = pair_signs(n)
    total = 0.0
    for g, wts in coupling_chunks(linear, quad):
        _, logz = _kernels.gibbs_weights(g, signs)
        total += float(wts @ logz)
    return total / n
