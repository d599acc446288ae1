"""Hot loops of the numeric oracle: Gibbs weights and replica contractions per quadrature node.

Two interchangeable implementations:

* numba: one fused pass per node (weights, then each component's elimination
  program), no intermediate arrays.
* numpy: batched ``matmul``/``exp`` for the weights and ``einsum`` per
  component over a chunk of nodes.

Set ``REPLICALC_DISABLE_NUMBA=1`` to force the numpy path.  Both paths take
the same inputs and must agree to rounding.
"""

from __future__ import annotations

import os

import numpy as np

DISABLE_NUMBA = os.environ.get("REPLICALC_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")

try:
    if DISABLE_NUMBA:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"


# elimination opcodes; one row = [op, v, u, x, s1, t1, s2, t2, sout, m]
OP_LOAD, OP_LEAF, OP_SERIES, OP_MERGE, OP_ROOT = 0, 1, 2, 3, 4
OP_WIDTH = 10


# --------------------------------------------------------------------------
# numpy path

def gibbs_weights_numpy(couplings: np.ndarray, signs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Normalized Boltzmann weights ``exp(sum_p g_p s_p) / Z`` and ``log Z`` per row of ``couplings``."""
    logits = couplings @ signs.T
    top = logits.max(axis=1, keepdims=True)
    w = np.exp(logits - top)
    z = w.sum(axis=1, keepdims=True)
    return w / z, (np.log(z) + top)[:, 0]


_LETTERS = "abcdefghijklmopqrstuvwxyz"  # 'n' is the node axis


def component_values_numpy(weights: np.ndarray, comps: list, kpow: np.ndarray, loopdiag: np.ndarray) -> np.ndarray:
    """Per-node value of each component by batched einsum.

    ``comps`` items are ``(n_vertices, edges, loops)`` with ``edges`` a list of
    ``(u, v, multiplicity)`` and ``loops`` a per-vertex self-loop count.
    """
    out = np.empty((weights.shape[0], len(comps)))
    for ci, (k, edges, loops) in enumerate(comps):
        subs, ops = [], []
        for v in range(k):
            vec = weights if not loops[v] else weights * loopdiag**loops[v]
            subs.append("n" + _LETTERS[v])
            ops.append(vec)
        for u, v, m in edges:
            subs.append(_LETTERS[u] + _LETTERS[v])
            ops.append(kpow[m])
        expr = ",".join(subs) + "->n"
        out[:, ci] = np.einsum(expr, *ops, optimize="greedy")
    return out


# --------------------------------------------------------------------------
# numba path

@njit(cache=True)
def _weights_into(g, signs, w):
    # one exp per coupling: each factor is 1 when the pair term is at its max, else exp(-2|g|)
    c = signs.shape[0]
    p = signs.shape[1]
    for s in range(c):
        w[s] = 1.0
    for q in range(p):
        gq = g[q]
        r = np.exp(-2.0 * abs(gq))
        for s in range(c):
            if signs[s, q] * gq < 0.0:
                w[s] *= r
    z = 0.0
    for s in range(c):
        z += w[s]
    for s in range(c):
        w[s] /= z
    logz = np.log(z)
    for q in range(p):
        logz += abs(g[q])
    return logz


@njit(cache=True)
def _factor(F, slot, trans, i, j):
    if trans == 0:
        return F[slot, i, j]
    return F[slot, j, i]


@njit(cache=True)
def _load_factors(ops, kpow, F):
    # base edge factors are node-independent: filled once, before the node loop
    c = kpow.shape[1]
    for r in range(ops.shape[0]):
        if ops[r, 0] == 0:
            so = ops[r, 8]
            m = ops[r, 9]
            for i in range(c):
                for j in range(c):
                    F[so, i, j] = kpow[m, i, j]


@njit(cache=True)
def _run_component(w, ops, op_lo, op_hi, vloops, v_lo, nv, loopdiag, msg, F):
    c = w.shape[0]
    for v in range(nv):
        lv = vloops[v_lo + v]
        for s in range(c):
            x = w[s]
            for _ in range(lv):
                x *= loopdiag[s]
            msg[v, s] = x
    value = 1.0
    for r in range(op_lo, op_hi):
        op = ops[r, 0]
        if op == 0:
            continue
        v = ops[r, 1]
        u = ops[r, 2]
        s1 = ops[r, 4]
        t1 = ops[r, 5]
        s2 = ops[r, 6]
        t2 = ops[r, 7]
        so = ops[r, 8]
        if op == 1:
            for i in range(c):
                acc = 0.0
                if t1 == 0:
                    for j in range(c):
                        acc += F[s1, i, j] * msg[v, j]
                else:
                    for j in range(c):
                        acc += F[s1, j, i] * msg[v, j]
                msg[u, i] *= acc
        elif op == 2:
            for i in range(c):
                for l in range(c):
                    acc = 0.0
                    for j in range(c):
                        acc += _factor(F, s1, t1, i, j) * msg[v, j] * _factor(F, s2, t2, j, l)
                    F[so, i, l] = acc
        elif op == 3:
            for i in range(c):
                for l in range(c):
                    F[so, i, l] = _factor(F, s1, t1, i, l) * _factor(F, s2, t2, i, l)
        else:
            acc = 0.0
            for s in range(c):
                acc += msg[v, s]
            value *= acc
    return value


@njit(cache=True)
def _component_values_numba(couplings, signs, kpow, loopdiag, ops, op_start, vloops, v_start, n_slots, max_v):
    n = couplings.shape[0]
    c = signs.shape[0]
    ncomp = op_start.shape[0] - 1
    out = np.empty((n, ncomp))
    logz = np.empty(n)
    w = np.empty(c)
    msg = np.empty((max(max_v, 1), c))
    F = np.empty((max(n_slots, 1), c, c))
    _load_factors(ops, kpow, F)
    for i in range(n):
        logz[i] = _weights_into(couplings[i], signs, w)
        for ci in range(ncomp):
            nv = v_start[ci + 1] - v_start[ci]
            out[i, ci] = _run_component(
                w, ops, op_start[ci], op_start[ci + 1], vloops, v_start[ci], nv, loopdiag, msg, F
            )
    return out, logz


@njit(cache=True)
def _gibbs_weights_numba(couplings, signs):
    n = couplings.shape[0]
    c = signs.shape[0]
    out = np.empty((n, c))
    logz = np.empty(n)
    for i in range(n):
        logz[i] = _weights_into(couplings[i], signs, out[i])
    return out, logz


# --------------------------------------------------------------------------
# dispatch

def gibbs_weights(couplings: np.ndarray, signs: np.ndarray, use_numba: bool | None = None):
    use_numba = HAVE_NUMBA if use_numba is None else (use_numba and HAVE_NUMBA)
    couplings = np.ascontiguousarray(couplings, dtype=np.float64)
    signs = np.ascontiguousarray(signs, dtype=np.float64)
    if use_numba:
        return _gibbs_weights_numba(couplings, signs)
    return gibbs_weights_numpy(couplings, signs)


def component_values(couplings: np.ndarray, signs: np.ndarray, program, use_numba: bool | None = None):
    """Per-node component values and ``log Z`` for a chunk of coupling vectors.

    ``program`` is a :class:`replicalc.numerics.evaluate.ContractionProgram`.
    Components the elimination cannot handle are always done by einsum.
    """
    use_numba = HAVE_NUMBA if use_numba is None else (use_numba and HAVE_NUMBA)
    couplings = np.ascontiguousarray(couplings, dtype=np.float64)
    signs = np.ascontiguousarray(signs, dtype=np.float64)
    if not use_numba:
        w, logz = gibbs_weights_numpy(couplings, signs)
        return component_values_numpy(w, program.components, program.kpow, program.loopdiag), logz
    out, logz = _component_values_numba(
        couplings, signs, program.kpow, program.loopdiag, program.ops, program.op_start,
        program.vloops, program.v_start, program.n_slots, program.max_vertices,
    )
    if program.fallback:
        w, _ = gibbs_weights_numpy(couplings, signs)
        sub = [program.components[i] for i in program.fallback]
        out[:, program.fallback] = component_values_numpy(w, sub, program.kpow, program.loopdiag)
    return out, logz
