"""Compare the compiled search kernel against its pure-Python twin.

Times the two backends on identical packed problems (the results are asserted
bit-identical): adversary maximizations and constraint-generation masters on
the car-rental-shape preset, plus the small trend preset.

Run:  python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from regretkit._kernels import impact_order, pack_problem, search_py
from regretkit.regret import _codes, local_regret_col, local_regret_row
from regretkit.simulate import GeneratorSpec, PriorSpec, generate_problem, sample_prior
from regretkit.search import first_feasible

try:
    from regretkit._kernels import _search_core
except ImportError:
    _search_core = None


def build_cases():
    cases = []
    for preset, scen_counts in (("trend-10x5", (1, 4)), ("car-rental-shape", (1, 8, 24))):
        doc = generate_problem(GeneratorSpec(preset=preset, seed=3))
        st = doc.structure
        space = sample_prior(PriorSpec(seed=1), st)
        w_lo, w_hi = space.weight_intervals()
        x0 = first_feasible(st, doc.feasibility)
        codes = _codes(st, x0)
        rows = [local_regret_row(space, j, codes[j]) for j in range(st.n_factors)]
        adversary = [
            np.maximum(w_lo[j] * rows[j], w_hi[j] * rows[j]) for j in range(st.n_factors)
        ]
        rng = np.random.default_rng(0)
        grid = st.schema.outcome_grid() if st.schema.n_outcomes <= 4096 else None
        witnesses = []
        for _ in range(max(scen_counts)):
            if grid is not None:
                w = tuple(int(v) for v in grid[rng.integers(0, len(grid))])
            else:
                w = tuple(int(rng.integers(0, d)) for d in st.schema.domain_sizes)
            witnesses.append(w)
        cuts = []
        for w in witnesses:
            wc = _codes(st, w)
            cols = [local_regret_col(space, j, wc[j]) for j in range(st.n_factors)]
            cuts.append(
                [np.maximum(w_lo[j] * cols[j], w_hi[j] * cols[j]) for j in range(st.n_factors)]
            )
        feas = doc.feasibility
        cases.append((f"{preset} adversary", st, feas, [[-t for t in adversary]]))
        for count in scen_counts:
            cases.append((f"{preset} master T={count}", st, feas, cuts[:count]))
    return cases


def run_backend(impl, st, feas, scenarios, repeats):
    sizes = st.schema.domain_sizes
    order = impact_order(sizes, st.factors, scenarios)
    packed = pack_problem(sizes, st.factors, scenarios, feas.nogoods or (), order)
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = impl.search(**packed)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    if _search_core is None:
        print("compiled kernel unavailable; build the extension first")
        return
    print(f"{'case':34s} {'compiled':>12s} {'python':>12s} {'speedup':>9s}")
    for name, st, feas, scenarios in build_cases():
        t_c, r_c = run_backend(_search_core, st, feas, scenarios, repeats=3)
        t_p, r_p = run_backend(search_py, st, feas, scenarios, repeats=1)
        assert r_c[0] == r_p[0] and r_c[1] == r_p[1] and list(r_c[2]) == list(r_p[2]), name
        print(f"{name:34s} {t_c * 1e3:10.2f}ms {t_p * 1e3:10.2f}ms {t_p / t_c:8.1f}x")
    print("results bit-identical across backends")


if __name__ == "__main__":
    main()
