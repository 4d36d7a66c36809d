"""Pure-Python search kernel; semantics and arithmetic order match _search_core.

Depth-first over attributes in schema order, levels ascending.  Per scenario
the running bound is the sum of per-factor block minima for the assigned
prefix (admissible), saved per depth and restored on backtrack so no float
drift accumulates.  A subtree is pruned when every completion is at least the
incumbent; strict improvement therefore keeps the lexicographically smallest
optimum.  Nogood counters track fully-matched forbidden assignments.
"""

from __future__ import annotations

import numpy as np


def search(
    ds,
    af_off,
    af_factor,
    af_pos,
    fq_start,
    n_digits,
    lvl_off,
    blob,
    ng_len,
    ngw_off,
    ngw_id,
    ngw_level,
    warm_value=None,
    warm_asg=None,
):
    n = len(ds)
    m = len(fq_start) - 1
    n_scen = blob.shape[0]
    n_goods = len(ng_len)

    pfx = [0] * m
    bound = [0.0] * n_scen
    for t in range(n_scen):
        acc = 0.0
        for j in range(m):
            acc += blob[t, lvl_off[fq_start[j]]]
        bound[t] = acc

    asg = [0] * n
    best_asg = np.zeros(n, dtype=np.int32)
    ng_count = [0] * n_goods
    # A warm incumbent prunes immediately; the epsilon keeps value-ties
    # explorable so the lexicographically smallest optimum is still returned.
    if warm_value is not None:
        best_asg[:] = warm_asg
        state = {"best": warm_value + 1e-12, "found": True, "violated": 0}
    else:
        state = {"best": float("inf"), "found": False, "violated": 0}
    bound_save = [[0.0] * n_scen for _ in range(n + 1)]
    pfx_save = [0] * len(af_factor)

    blob_l = blob  # local alias; indexing pattern shared with the compiled twin

    def rec(d: int) -> None:
        if d == n:
            value = -np.inf
            for t in range(n_scen):
                acc = 0.0
                for j in range(m):
                    acc += blob_l[t, lvl_off[fq_start[j] + n_digits[j]] + pfx[j]]
                if acc > value:
                    value = acc
            if n_scen == 0:
                value = 0.0
            if value < state["best"]:
                state["best"] = value
                state["found"] = True
                best_asg[:] = asg
            return
        a0, a1 = af_off[d], af_off[d + 1]
        w0, w1 = ngw_off[d], ngw_off[d + 1]
        size = ds[d]
        for level in range(size):
            asg[d] = level
            for t in range(n_scen):
                bound_save[d][t] = bound[t]
            for k in range(a0, a1):
                j = af_factor[k]
                q = af_pos[k]
                pfx_save[k] = pfx[j]
                new_pfx = pfx[j] * size + level
                old_off = lvl_off[fq_start[j] + q] + pfx[j]
                new_off = lvl_off[fq_start[j] + q + 1] + new_pfx
                for t in range(n_scen):
                    bound[t] += blob_l[t, new_off] - blob_l[t, old_off]
                pfx[j] = new_pfx
            for w in range(w0, w1):
                if ngw_level[w] == level:
                    g = ngw_id[w]
                    ng_count[g] += 1
                    if ng_count[g] == ng_len[g]:
                        state["violated"] += 1
            if state["violated"] == 0:
                node_bound = 0.0 if n_scen == 0 else max(bound)
                if node_bound < state["best"]:
                    rec(d + 1)
            # undo
            for w in range(w0, w1):
                if ngw_level[w] == level:
                    g = ngw_id[w]
                    if ng_count[g] == ng_len[g]:
                        state["violated"] -= 1
                    ng_count[g] -= 1
            for k in range(a0, a1):
                pfx[af_factor[k]] = pfx_save[k]
            for t in range(n_scen):
                bound[t] = bound_save[d][t]

    rec(0)
    return state["found"], state["best"], best_asg
