# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled search kernel; pure-Python twin in search_py (same arithmetic)."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef double INF = float("inf")


cdef class _Search:
    cdef int n, m, n_scen, n_goods
    cdef int[::1] ds, af_factor, af_pos, n_digits, ng_len, ngw_id, ngw_level
    cdef long long[::1] af_off, fq_start, lvl_off, ngw_off
    cdef double[:, ::1] blob
    cdef long long[::1] pfx, pfx_save
    cdef double[::1] bound
    cdef double[:, ::1] bound_save
    cdef int[::1] asg, best_asg, ng_count
    cdef int violated
    cdef bint found
    cdef double best

    def __init__(self, ds, af_off, af_factor, af_pos, fq_start, n_digits,
                 lvl_off, blob, ng_len, ngw_off, ngw_id, ngw_level):
        self.ds = ds
        self.af_off = af_off
        self.af_factor = af_factor
        self.af_pos = af_pos
        self.fq_start = fq_start
        self.n_digits = n_digits
        self.lvl_off = lvl_off
        self.blob = np.ascontiguousarray(blob)
        self.ng_len = ng_len
        self.ngw_off = ngw_off
        self.ngw_id = ngw_id
        self.ngw_level = ngw_level
        self.n = len(ds)
        self.m = len(fq_start) - 1
        self.n_scen = blob.shape[0]
        self.n_goods = len(ng_len)
        self.pfx = np.zeros(self.m, dtype=np.int64)
        self.pfx_save = np.zeros(max(len(af_factor), 1), dtype=np.int64)
        self.bound = np.zeros(max(self.n_scen, 1), dtype=np.float64)
        self.bound_save = np.zeros((self.n + 1, max(self.n_scen, 1)), dtype=np.float64)
        self.asg = np.zeros(self.n, dtype=np.int32)
        self.best_asg = np.zeros(self.n, dtype=np.int32)
        self.ng_count = np.zeros(max(self.n_goods, 1), dtype=np.int32)
        self.violated = 0
        self.found = False
        self.best = INF

    cdef void rec(self, int d) noexcept:
        cdef int t, j, q, k, w, g, level, size
        cdef long long a0, a1, w0, w1, new_pfx, old_off, new_off
        cdef double value, acc, node_bound
        if d == self.n:
            value = -INF
            for t in range(self.n_scen):
                acc = 0.0
                for j in range(self.m):
                    acc += self.blob[t, self.lvl_off[self.fq_start[j] + self.n_digits[j]] + self.pfx[j]]
                if acc > value:
                    value = acc
            if self.n_scen == 0:
                value = 0.0
            if value < self.best:
                self.best = value
                self.found = True
                for k in range(self.n):
                    self.best_asg[k] = self.asg[k]
            return
        a0 = self.af_off[d]
        a1 = self.af_off[d + 1]
        w0 = self.ngw_off[d]
        w1 = self.ngw_off[d + 1]
        size = self.ds[d]
        for level in range(size):
            self.asg[d] = level
            for t in range(self.n_scen):
                self.bound_save[d, t] = self.bound[t]
            for k in range(<int> a0, <int> a1):
                j = self.af_factor[k]
                q = self.af_pos[k]
                self.pfx_save[k] = self.pfx[j]
                new_pfx = self.pfx[j] * size + level
                old_off = self.lvl_off[self.fq_start[j] + q] + self.pfx[j]
                new_off = self.lvl_off[self.fq_start[j] + q + 1] + new_pfx
                for t in range(self.n_scen):
                    self.bound[t] += self.blob[t, new_off] - self.blob[t, old_off]
                self.pfx[j] = new_pfx
            for w in range(<int> w0, <int> w1):
                if self.ngw_level[w] == level:
                    g = self.ngw_id[w]
                    self.ng_count[g] += 1
                    if self.ng_count[g] == self.ng_len[g]:
                        self.violated += 1
            if self.violated == 0:
                if self.n_scen == 0:
                    node_bound = 0.0
                else:
                    node_bound = -INF
                    for t in range(self.n_scen):
                        if self.bound[t] > node_bound:
                            node_bound = self.bound[t]
                if node_bound < self.best:
                    self.rec(d + 1)
            for w in range(<int> w0, <int> w1):
                if self.ngw_level[w] == level:
                    g = self.ngw_id[w]
                    if self.ng_count[g] == self.ng_len[g]:
                        self.violated -= 1
                    self.ng_count[g] -= 1
            for k in range(<int> a0, <int> a1):
                self.pfx[self.af_factor[k]] = self.pfx_save[k]
            for t in range(self.n_scen):
                self.bound[t] = self.bound_save[d, t]


def search(ds, af_off, af_factor, af_pos, fq_start, n_digits, lvl_off, blob,
           ng_len, ngw_off, ngw_id, ngw_level, warm_value=None, warm_asg=None):
    cdef _Search s = _Search(ds, af_off, af_factor, af_pos, fq_start, n_digits,
                             lvl_off, blob, ng_len, ngw_off, ngw_id, ngw_level)
    cdef int t, j
    cdef double acc
    for t in range(s.n_scen):
        acc = 0.0
        for j in range(s.m):
            acc += s.blob[t, s.lvl_off[s.fq_start[j]]]
        s.bound[t] = acc
    # a warm incumbent prunes immediately; the epsilon keeps value-ties
    # explorable so the lexicographically smallest optimum is still returned
    if warm_value is not None:
        for j in range(s.n):
            s.best_asg[j] = warm_asg[j]
        s.best = float(warm_value) + 1e-12
        s.found = True
    s.rec(0)
    return bool(s.found), float(s.best), np.asarray(s.best_asg)
