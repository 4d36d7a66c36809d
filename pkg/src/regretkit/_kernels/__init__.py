"""Search-kernel backend selection and shared problem packing.

The branch-and-bound over attribute assignments is the hot loop of every
regret computation on constraint spaces, so it exists twice: a Cython
extension (_search_core) and a pure-Python twin (search_py) with identical
semantics and arithmetic order.  The compiled kernel is used when importable;
set REGRETKIT_PURE_PYTHON=1 to force the fallback.  benchmarks/bench_kernels.py
compares the two.

Packing flattens the factored min-max problem into depth-indexed arrays.  The
assignment order may be any attribute permutation: each factor's local table
is transposed so its digits arrive most-significant-first along that order,
which keeps the prefix-indexed completion bounds valid.  Search results are
reported in schema order regardless.
"""

from __future__ import annotations

import os

import numpy as np

if os.environ.get("REGRETKIT_PURE_PYTHON") == "1":
    from . import search_py as _impl

    KERNEL_BACKEND = "python"
else:
    try:
        from . import _search_core as _impl  # type: ignore[attr-defined]

        KERNEL_BACKEND = "compiled"
    except ImportError:
        from . import search_py as _impl

        KERNEL_BACKEND = "python"


def pack_problem(domain_sizes, factors, tables, nogoods, order=None):
    """Flatten the factored min-max problem into kernel arrays.

    tables: per scenario, per factor, a dense value vector over local codes
    (schema-order big-endian radix).  Block minima over every digit prefix of
    the assignment order are precomputed here (admissible completion bounds).
    """
    n = len(domain_sizes)
    m = len(factors)
    n_scen = len(tables)
    if order is None:
        order = list(range(n))
    pos = [0] * n  # attribute -> depth
    for d, a in enumerate(order):
        pos[a] = d
    ds = np.asarray([domain_sizes[a] for a in order], dtype=np.int32)

    # per factor: axis permutation so digits follow the assignment order
    fsizes = [[int(domain_sizes[a]) for a in f] for f in factors]
    farrival = [sorted(range(len(f)), key=lambda t: pos[f[t]]) for f in factors]

    n_digits = np.array([len(f) for f in factors], dtype=np.int32)
    fq_start = np.zeros(m + 1, dtype=np.int64)
    for j in range(m):
        fq_start[j + 1] = fq_start[j] + n_digits[j] + 1

    lvl_off = np.zeros(fq_start[m], dtype=np.int64)
    off = 0
    for j in range(m):
        sizes = [fsizes[j][t] for t in farrival[j]]
        for q in range(len(sizes) + 1):
            lvl_off[fq_start[j] + q] = off
            off += int(np.prod(sizes[:q], dtype=np.int64)) if q > 0 else 1
    total = off

    blob = np.empty((max(n_scen, 1), total), dtype=np.float64)
    for t in range(n_scen):
        for j in range(m):
            arr = np.asarray(tables[t][j], dtype=np.float64).reshape(fsizes[j])
            arr = np.ascontiguousarray(arr.transpose(farrival[j]))
            p = arr.ndim
            for q in range(p + 1):
                block = arr if q == p else arr.min(axis=tuple(range(q, p)))
                start = lvl_off[fq_start[j] + q]
                blob[t, start:start + block.size] = np.asarray(block).ravel()

    af_factor, af_pos = [], []
    af_off = np.zeros(n + 1, dtype=np.int64)
    for d in range(n):
        a = order[d]
        for j, f in enumerate(factors):
            for arrival_q, t in enumerate(farrival[j]):
                if f[t] == a:
                    af_factor.append(j)
                    af_pos.append(arrival_q)
        af_off[d + 1] = len(af_factor)

    ng_len = np.array([len(g) for g in nogoods], dtype=np.int32)
    ngw_id, ngw_level = [], []
    ngw_off = np.zeros(n + 1, dtype=np.int64)
    for d in range(n):
        a = order[d]
        for gi, g in enumerate(nogoods):
            for ga, gv in g:
                if ga == a:
                    ngw_id.append(gi)
                    ngw_level.append(gv)
        ngw_off[d + 1] = len(ngw_id)

    return dict(
        ds=ds,
        af_off=af_off,
        af_factor=np.array(af_factor, dtype=np.int32),
        af_pos=np.array(af_pos, dtype=np.int32),
        fq_start=fq_start,
        n_digits=n_digits,
        lvl_off=lvl_off,
        blob=blob[:n_scen] if n_scen else blob[:0],
        ng_len=ng_len,
        ngw_off=ngw_off,
        ngw_id=np.array(ngw_id, dtype=np.int32),
        ngw_level=np.array(ngw_level, dtype=np.int32),
    )


def impact_order(domain_sizes, factors, tables) -> list[int]:
    """Assignment order: attributes of high-swing factors first.

    Deterministic; swing is the summed value range of every scenario table
    the attribute participates in.
    """
    n = len(domain_sizes)
    swing = np.zeros(n)
    for scen in tables:
        for j, f in enumerate(factors):
            arr = np.asarray(scen[j], dtype=float)
            r = float(arr.max() - arr.min()) if arr.size else 0.0
            for a in f:
                swing[a] += r
    return sorted(range(n), key=lambda a: (-swing[a], a))


def run_min_max_search(domain_sizes, factors, tables, nogoods, warm=None, order=None):
    """(value, assignment) minimizing the max scenario sum; (inf, None) if empty.

    warm, when given, is a (value, assignment) incumbent whose assignment must
    be feasible and whose value must be its exact scenario max; the result is
    identical to a cold search, just faster.  order is the attribute
    exploration order; ties among optima resolve lexicographically along it,
    so callers wanting schema-order ties must repair afterwards.
    """
    n = len(domain_sizes)
    if order is None:
        order = list(range(n))
    packed = pack_problem(domain_sizes, factors, tables, nogoods, order)
    if warm is not None:
        packed["warm_value"] = float(warm[0])
        packed["warm_asg"] = np.asarray(
            [warm[1][a] for a in order], dtype=np.int32
        )
    found, value, assignment = _impl.search(**packed)
    if not found:
        return float("inf"), None
    out = [0] * n
    for d, a in enumerate(order):
        out[a] = int(assignment[d])
    return float(value), out
