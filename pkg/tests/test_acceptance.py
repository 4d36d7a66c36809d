"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines.  Tolerances are pinned here and nowhere else.
"""

import itertools
import subprocess
import sys
import time

import numpy as np

from regretkit.elicit import ElicitationSession, Termination
from regretkit.model import canonical_from_oracle, compute_coefficients
from regretkit.regret import db_minimax, max_regret, minimax_regret
from regretkit.schema import Attribute, AttributeSchema
from regretkit.search import iter_feasible
from regretkit.simulate import (
    ExperimentSpec,
    GeneratorSpec,
    PriorSpec,
    generate_problem,
    run_experiment,
    sample_prior,
    sample_true_utility,
    simulate_answer,
)

from conftest import make_structure, random_nogoods, random_space
from oracles import RegretOracle, coefficients_by_subsets


def _report(name: str, ok: bool, detail: str = ""):
    print(f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}" + (f"  ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def _random_gai_instance(rng, max_attrs=10, max_domain=3, max_factor=4, cap=6561):
    n = int(rng.integers(4, max_attrs + 1))
    sizes = [int(rng.integers(2, max_domain + 1)) for _ in range(n)]
    while int(np.prod(sizes, dtype=np.int64)) > cap:
        sizes[int(rng.integers(0, n))] = 2
    factors = []
    for _ in range(int(rng.integers(2, 6))):
        k = int(rng.integers(1, min(max_factor, n) + 1))
        factors.append(tuple(sorted(rng.choice(n, k, replace=False).tolist())))
    covered = set().union(*map(set, factors))
    rest = tuple(sorted(set(range(n)) - covered))
    if rest:
        factors.append(rest)
    # guarantee at least one overlapping pair
    if all(not (set(a) & set(b)) for a in factors for b in factors if a != b):
        base = max(factors, key=len)
        other = min(factors, key=len)
        factors.append(tuple(sorted({base[0], other[0]})))
    tables = []
    for f in factors:
        shape = tuple(sizes[a] for a in f)
        tables.append((tuple(f), rng.uniform(-1, 1, shape)))

    def u(x):
        return float(sum(tab[tuple(x[a] for a in f)] for f, tab in tables))

    outcomes = list(itertools.product(*[range(s) for s in sizes]))
    worst = min(outcomes, key=u)
    best = max(outcomes, key=u)
    attrs = tuple(
        Attribute(f"x{i}", tuple(f"l{k}" for k in range(sizes[i]))) for i in range(n)
    )
    schema = AttributeSchema(attrs, worst, best, worst)
    return schema, factors, u


def test_canonical_round_trip():
    """200 random overlapping structures: extraction is lossless at 1e-9."""
    t0 = time.time()
    worst_err = 0.0
    for trial in range(200):
        rng = np.random.default_rng(1000 + trial)
        schema, factors, u = _random_gai_instance(rng)
        fit = canonical_from_oracle(u, schema, factors)
        refit = canonical_from_oracle(fit.model.evaluate, schema, factors)
        grid = schema.outcome_grid()
        err = float(
            np.max(np.abs(refit.model.evaluate_grid(grid) - fit.model.evaluate_grid(grid)))
        )
        worst_err = max(worst_err, fit.max_abs_error, refit.max_abs_error, err)
        if worst_err > 1e-9:
            break
    elapsed = time.time() - t0
    _report(
        "canonical-round-trip",
        worst_err <= 1e-9 and elapsed <= 60.0,
        f"worst error {worst_err:.2e}, {elapsed:.1f}s for 200 structures",
    )


def test_coefficient_oracle():
    """100 random structures (m <= 5): integer-exact table agreement."""
    checked = 0
    for trial in range(100):
        rng = np.random.default_rng(2000 + trial)
        n = int(rng.integers(3, 7))
        sizes = [int(rng.integers(2, 4)) for _ in range(n)]
        factors = []
        for _ in range(int(rng.integers(2, 5))):
            k = int(rng.integers(1, min(4, n) + 1))
            factors.append(tuple(sorted(rng.choice(n, k, replace=False).tolist())))
        covered = set().union(*map(set, factors))
        rest = tuple(sorted(set(range(n)) - covered))
        if rest:
            factors.append(rest)  # at most 5 factors total
        st = make_structure(sizes, factors)
        mine = compute_coefficients(st)
        expected = coefficients_by_subsets(st)
        for j in range(st.n_factors):
            for code in range(st.factor_sizes[j]):
                assert mine.mapping(j, code) == expected[j][code], (trial, j, code)
        checked += 1
    _report("coefficient-oracle", checked == 100, f"{checked} structures integer-exact")


def _oracle_instance(seed):
    """<= 4096 outcomes, <= 5 nogoods, random priors + comparison constraints.

    Comparison constraints go to factors with <= 6 parameters so the oracle's
    vertex enumeration stays cheap; every third instance gets additional
    anchor comparisons on a <= 3-factor structure (6 anchor parameters)."""
    from regretkit.errors import InconsistentConstraintError
    from regretkit.space import ComparisonConstraint, ParamRef

    rng = np.random.default_rng(3000 + seed)
    with_ac = seed % 3 == 0
    if with_ac:
        n = int(rng.integers(5, 7))
        sizes = [int(rng.integers(2, 4)) for _ in range(n)]
        cuts = sorted(rng.choice(range(1, n - 1), size=2, replace=False))
        bounds = [0, cuts[0], cuts[1], n - 1]
        factors = [
            tuple(range(bounds[0], bounds[1] + 1)),
            tuple(range(bounds[1], bounds[2] + 1)),
            tuple(range(bounds[2], bounds[3] + 1)),
        ]
    else:
        big = seed % 5 == 0
        n = int(rng.integers(8, 13)) if big else int(rng.integers(5, 9))
        sizes = [int(rng.integers(2, 4)) for _ in range(n)]
        while int(np.prod(sizes, dtype=np.int64)) > 4096:
            sizes[int(np.argmax(sizes))] = 2
        factors = [(i, i + 1) for i in range(0, n - 1, 2)]
        covered = set().union(*map(set, factors))
        rest = tuple(sorted(set(range(n)) - covered))
        if rest:
            factors.append(rest)
        if len(factors) >= 2:
            factors.append((factors[0][-1], factors[1][0]))  # force an overlap
        factors = sorted(set(tuple(sorted(set(f))) for f in factors))
    st = make_structure(sizes, factors)
    space = random_space(st, rng, comparisons=0, anchor_comparisons=2 if with_ac else 0)
    small = [j for j in range(st.n_factors) if st.factor_sizes[j] <= 6]
    for _ in range(3):
        if not small:
            break
        j = small[int(rng.integers(0, len(small)))]
        i, k = rng.choice(st.factor_sizes[j], size=2, replace=False)
        try:
            space = space.assert_constraint(
                ComparisonConstraint(ParamRef("local", j, int(i)), ParamRef("local", j, int(k)))
            )
        except InconsistentConstraintError:
            pass
    feas = random_nogoods(st, rng, int(rng.integers(0, 6)))
    return st, space, feas


def test_regret_oracles():
    """100 instances: max and minimax regret match exhaustive double loops."""
    t0 = time.time()
    worst = 0.0
    max_iters = 0
    for seed in range(100):
        st, space, feas = _oracle_instance(seed)
        oracle = RegretOracle(space)
        feasible = list(iter_feasible(st.schema, feas))
        pw = oracle.pairwise_matrix(feasible)
        row_max = pw.max(axis=1)
        rng = np.random.default_rng(seed)
        idx = int(rng.integers(0, len(feasible)))
        mr = max_regret(space, feasible[idx], feas)
        worst = max(worst, abs(mr.value - row_max[idx]))
        res = minimax_regret(space, feas)
        worst = max(worst, abs(res.value - row_max.min()))
        max_iters = max(max_iters, res.iterations)
        if worst > 1e-6 or max_iters > 50:
            break
    elapsed = time.time() - t0
    _report(
        "regret-oracles",
        worst <= 1e-6 and max_iters <= 50 and elapsed <= 300.0,
        f"worst gap {worst:.2e}, max CG iterations {max_iters}, {elapsed:.0f}s",
    )


def test_database_path():
    """20 random 186-item catalogs: value equals exhaustive pairwise minimax;
    evaluation count is linear in the catalog with a small recorded pool
    (one column per adversary plus one row per optimality test)."""
    worst = 0.0
    max_pool = 0
    for seed in range(20):
        doc = generate_problem(GeneratorSpec(preset="apartment-shape", seed=100 + seed))
        st = doc.structure
        space = sample_prior(PriorSpec(seed=200 + seed), st)
        catalog = list(doc.feasibility.catalog)
        n = len(catalog)
        res = db_minimax(space, catalog)
        oracle = RegretOracle(space)
        pw = oracle.pairwise_matrix(catalog)
        worst = max(worst, abs(res.value - pw.max(axis=1).min()))
        s = res.db_stats
        pool = s.adversary_count + s.verifications
        max_pool = max(max_pool, pool)
        assert s.pairwise_evaluations <= n + pool * n, (seed, s)
        assert pool <= n // 10, (seed, s)
    _report(
        "database-path",
        worst <= 1e-9,
        f"worst gap {worst:.2e}, max generation pool {max_pool} of 186 items",
    )


def test_monotonicity_suite():
    """1000 (instance, consistent constraint) pairs: minimax regret never
    increases under a consistent assertion."""
    pairs = 0
    worst = -np.inf
    for inst in range(600):
        rng = np.random.default_rng(5000 + inst)
        n = int(rng.integers(4, 7))
        sizes = [int(rng.integers(2, 3 + 1)) for _ in range(n)]
        # overlapping chain: no outcome dominates, so regret stays positive
        factors = [(i, i + 1) for i in range(n - 1)]
        st = make_structure(sizes, factors)
        space = random_space(st, rng)
        feas = random_nogoods(st, rng, 2)
        truth = sample_true_utility(space, seed=inst)
        session = ElicitationSession(
            st, space, feas, "AB+LC+LB", Termination(0.0, 10), seed=inst
        )
        prev = session.current.value
        for _ in range(10):
            q = session.select_query()
            if q is None:
                break
            session.apply_response(q, simulate_answer(truth, q))
            worst = max(worst, session.current.value - prev)
            prev = session.current.value
            pairs += 1
        if pairs >= 1000:
            break
    _report(
        "monotonicity",
        pairs >= 1000 and worst <= 1e-9,
        f"{pairs} assertions, worst increase {worst:.2e}",
    )


TREND_SPEC = ExperimentSpec(
    problem=GeneratorSpec(preset="trend-10x5", seed=20),
    strategies=("LB", "LC", "LC(LB)", "LC+LB", "AB+LB", "AB+LC+LB", "random"),
    runs=20,
    max_queries=200,
    seed=33,
    threshold_normalized=0.005,
)


def test_strategy_trends():
    """Qualitative replication: sharp early regret drop, anchor strategies
    reach (near) zero, bound-query strategies beat the random baseline."""
    res = run_experiment(TREND_SPEC)
    problems = []
    # simulated sessions never exceed minimax regret with the true regret
    if res.max_true_regret_violation > 1e-9:
        problems.append(f"true regret violation {res.max_true_regret_violation:.2e}")
    ab_lb = res.curve("AB+LB")
    if not ab_lb[40] <= 0.35 * ab_lb[0]:
        problems.append(f"AB+LB at 40 queries: {ab_lb[40] / ab_lb[0]:.2f} of initial")
    for strategy in ("AB+LB", "AB+LC+LB"):
        rows = [np.array(r.mmr) / r.width for r in res.records if r.strategy == strategy]
        reached = sum(1 for row in rows if row[-1] <= 0.01)
        if reached < 0.9 * len(rows):
            problems.append(f"{strategy}: only {reached}/{len(rows)} runs reached 0.01")
    for strategy in TREND_SPEC.strategies:
        if np.any(np.diff(res.curve(strategy)) > 1e-9):
            problems.append(f"{strategy}: curve not non-increasing")
    random_20 = res.curve("random")[20]
    for strategy in ("LB", "LC(LB)", "LC+LB", "AB+LB", "AB+LC+LB"):
        if not res.curve(strategy)[20] <= random_20:
            problems.append(f"{strategy} at 20 queries above random baseline")
    _report(
        "strategy-trends",
        not problems,
        "; ".join(problems) or
        f"AB+LB 40-query ratio {ab_lb[40] / ab_lb[0]:.3f}, initial {ab_lb[0]:.3f}",
    )


def test_determinism():
    """Seeded experiment CSVs and CLI outputs are byte-identical."""
    spec = ExperimentSpec(
        problem=GeneratorSpec(preset="trend-10x5", seed=11),
        strategies=("AB+LB",),
        runs=2,
        max_queries=5,
        seed=9,
    )
    csv_ok = run_experiment(spec).to_csv() == run_experiment(spec).to_csv()

    import tempfile
    from pathlib import Path

    tmp = Path(tempfile.mkdtemp())
    prob = tmp / "p.json"
    subprocess.run(
        [sys.executable, "-m", "regretkit.cli", "generate", "--preset", "trend-10x5",
         "--seed", "4", "--out", str(prob)],
        check=True, capture_output=True,
    )
    outs = []
    for _ in range(2):
        r = subprocess.run(
            [sys.executable, "-m", "regretkit.cli", "elicit", str(prob), "--simulate",
             "--seed", "7", "--max-queries", "5"],
            check=True, capture_output=True,
        )
        outs.append(r.stdout)
    solves = []
    for _ in range(2):
        r = subprocess.run(
            [sys.executable, "-m", "regretkit.cli", "solve", str(prob)],
            check=True, capture_output=True,
        )
        solves.append(r.stdout)
    cli_ok = outs[0] == outs[1] and solves[0] == solves[1]
    _report("determinism", csv_ok and cli_ok, "experiment CSV + CLI bytes identical")


def test_interactive_latency():
    """car-rental-shape preset: each minimax solve (constraint generation)
    finishes within 5 seconds, including the cold initial solve."""
    doc = generate_problem(GeneratorSpec(preset="car-rental-shape", seed=3))
    st = doc.structure
    space = sample_prior(PriorSpec(seed=1), st)
    truth = sample_true_utility(space, seed=2)
    t0 = time.time()
    session = ElicitationSession(
        st, space, doc.feasibility, "AB+LB", Termination(0.0, 5), seed=0
    )
    times = [time.time() - t0]
    for _ in range(5):
        q = session.select_query()
        if q is None:
            break
        t0 = time.time()
        session.apply_response(q, simulate_answer(truth, q))
        times.append(time.time() - t0)
    _report(
        "interactive-latency",
        max(times) <= 5.0,
        f"max step {max(times):.2f}s over {len(times)} solves "
        f"(26 attributes, 13 factors, 378 parameters)",
    )
