"""Acceptance suite: one test per criterion, each logging a PASS/FAIL line."""
import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from latgreedy.gim import (ExactGimObjective, FixedSampleActivation, GimOracleAdapter, build_gim, dr_lower_bound,
                           estimate_marginal_gain, exact_activation, from_edges, recompute_active_sets,
                           reduce_from_boosting, reduce_from_ic_im, sample_thresholds, scale_free_graph,
                           total_probability)
from latgreedy.maximizers import (binary_search_pivot, fast_greedy, standard_greedy, threshold_greedy,
                                  threshold_greedy_parallel)
from latgreedy.metrics import (exact_curvature, exact_dr_ratio, exact_submodularity_ratio,
                               greedy_submodularity_ratio, parallel_bound, performance_bound)
from latgreedy.objectives import TabulatedObjective, make_synthetic_objective, random_monotone_table

from conftest import acceptance, bfs_reach, brute_opt, ic_spread, random_tiny_instance

KAPPA, EPS, DELTA = 0.95, 0.05, 0.9
# float slack for comparing a bound against a brute-force optimum
REL_TOL = 1e-12


# -- criterion 1 ---------------------------------------------------------

def pivot_ok(table, g, s, l, lmax, tau):
    def val(x):
        return table[tuple(x)]
    top = g.copy()
    top[s] += l
    if val(top) - val(g) < l * tau:
        return False
    if l == lmax:
        return True
    nxt = top.copy()
    nxt[s] += 1
    return val(nxt) - val(top) < tau


def test_criterion_01_pivot():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    failures, calls, worst = 0, 0, 0
    for _ in range(1000):
        n = int(rng.integers(1, 4))
        bounds = rng.integers(1, 9, size=n)
        table = random_monotone_table(bounds, rng)
        f = TabulatedObjective(table, check=False)
        for _ in range(3):
            g = np.array([rng.integers(0, b + 1) for b in bounds])
            s = int(rng.integers(n))
            k = int(g.sum() + rng.integers(1, 10))
            lmax = min(int(bounds[s] - g[s]), k - int(g.sum()))
            # aim thresholds at real average gains so every branch is visited
            l0 = max(1, int(rng.integers(0, lmax + 1)))
            hi = g.copy()
            hi[s] = min(bounds[s], g[s] + l0)
            avg = (table[tuple(hi)] - table[tuple(g)]) / max(1, hi[s] - g[s])
            tau = max(1e-6, avg * rng.uniform(0.5, 1.5)) if rng.random() < 0.8 else rng.exponential(3) + 1e-6
            q0 = f.n_queries
            l = binary_search_pivot(f, g, bounds, s, k, tau)
            used = f.n_queries - q0
            calls += 1
            budget = 0 if lmax == 0 else 2 + 2 * math.ceil(math.log2(lmax))
            ok = 0 <= l <= lmax and used <= budget and (lmax == 0 or pivot_ok(table, g, s, l, lmax, tau))
            failures += not ok
            worst = max(worst, used - (2 + math.ceil(math.log2(lmax))) if lmax else used)
    elapsed = time.perf_counter() - t0
    acceptance(1, failures == 0 and elapsed < 10,
               f"{calls} pivot calls on 1000 tables, {failures} failures, {elapsed:.1f}s, "
               f"max excess over 2+ceil(log2 l_max): {worst}")


# -- criteria 2-5: one enumerated corpus -----------------------------------

def corpus(size=240, seed=7):
    rng = np.random.default_rng(seed)
    kinds = ["random-monotone", "epsilon-perturbed-coverage", "budget-saturated", "modular"]
    out = []
    for i in range(size):
        n = int(rng.integers(1, 5))
        bounds = [int(b) for b in rng.integers(1, 5, size=n)]
        k = int(rng.integers(1, 7))
        kind = kinds[i % len(kinds)]
        params = {"bounds": bounds}
        if kind == "epsilon-perturbed-coverage":
            params["epsilon"] = float(rng.choice([0.05, 0.2, 0.5]))
        if kind == "budget-saturated":
            params["cap"] = float(rng.uniform(1, 4))
        f = make_synthetic_objective(kind, params, n, seed=int(rng.integers(2 ** 31)))
        box = np.minimum(bounds, k)
        gd, _ = exact_dr_ratio(f, box)
        gs, _ = exact_submodularity_ratio(f, box)
        al, _ = exact_curvature(f, box)
        out.append((kind, f, k, box, brute_opt(f, k, box), gd, gs, al))
    return out


@pytest.fixture(scope="module")
def enumerated():
    t0 = time.perf_counter()
    c = corpus()
    return c, time.perf_counter() - t0


def test_criterion_02_threshold_bound(enumerated):
    cases, setup = enumerated
    t0 = time.perf_counter()
    bad = []
    for kind, f, k, box, opt, gd, gs, al in cases:
        res = threshold_greedy(f, k, box, KAPPA, EPS)
        need = performance_bound(KAPPA, gd, gs, EPS) * opt
        if res.value < need - REL_TOL * opt:
            bad.append((kind, res.value, need))
    elapsed = setup + time.perf_counter() - t0
    acceptance(2, not bad and elapsed < 120,
               f"{len(cases)} instances, {len(bad)} violations, {elapsed:.1f}s {bad[:3]}")


def test_criterion_03_fast_bound(enumerated):
    cases, _ = enumerated
    bad_value, bad_beta, exact_runs = [], [], 0
    for kind, f, k, box, opt, gd, gs, al in cases:
        res = fast_greedy(f, k, box, KAPPA, DELTA, EPS)
        need = performance_bound(KAPPA, res.beta_star, gs, EPS) * opt
        if res.value < need - REL_TOL * opt:
            bad_value.append((kind, res.value, need))
        if res.solution.sum() == k:
            exact_runs += 1
            if res.beta_star < DELTA * gd:
                bad_beta.append((kind, res.beta_star, gd))
    acceptance(3, not bad_value and not bad_beta,
               f"{len(cases)} instances, {len(bad_value)} bound violations, "
               f"{len(bad_beta)} beta* < delta*gamma_d among {exact_runs} budget-exhausting runs")


def test_criterion_04_parallel_bound(enumerated):
    cases, _ = enumerated
    bad, mismatch = [], 0
    for kind, f, k, box, opt, gd, gs, al in cases:
        one = threshold_greedy_parallel(f, k, box, KAPPA, EPS, workers=1)
        four = threshold_greedy_parallel(f, k, box, KAPPA, EPS, workers=4)
        mismatch += one.solution.tolist() != four.solution.tolist()
        need = parallel_bound(al, gd, gs, EPS) * opt
        if one.value < need - REL_TOL * opt:
            bad.append((kind, one.value, need))
    acceptance(4, not bad and mismatch == 0,
               f"{len(cases)} instances, {len(bad)} bound violations, {mismatch} worker mismatches")


def exact_ratio_pair(f, box):
    """gamma_d and gamma_s in rational arithmetic over the evaluated floats."""
    pts = [np.array(x) for x in itertools.product(*[range(int(b) + 1) for b in box])]
    val = {tuple(x): Fraction(f.evaluate(x)) for x in pts}
    n = len(box)

    def gain(x, s):
        y = list(x)
        y[s] += 1
        return val[tuple(y)] - val[tuple(x)]

    gd = gs = Fraction(1)
    for v in pts:
        for w in pts:
            if not np.all(v <= w):
                continue
            for s in range(n):
                if w[s] < box[s]:
                    den = gain(w, s)
                    if den > 0:
                        gd = min(gd, gain(v, s) / den)
            den = val[tuple(w)] - val[tuple(v)]
            if den > 0:
                num = sum((int(w[s] - v[s]) * gain(v, s) for s in range(n) if w[s] > v[s]), Fraction(0))
                gs = min(gs, num / den)
    return max(gd, Fraction(0)), max(gs, Fraction(0))


def test_criterion_05_ratio_order(enumerated):
    cases, _ = enumerated
    flagged = [(f, box, gd - gs) for kind, f, k, box, opt, gd, gs, al in cases if not gd <= gs]
    # float minimisation rounds each ratio separately; settle flagged cases exactly
    exact_bad = 0
    for f, box, _ in flagged:
        egd, egs = exact_ratio_pair(f, box)
        exact_bad += egd > egs
    gap = max((d for _, _, d in flagged), default=0.0)
    acceptance(5, exact_bad == 0,
               f"{len(cases)} instances, {exact_bad} exact violations "
               f"({len(flagged)} float-rounding inversions, largest {gap:.1e})")


# -- criterion 6 ---------------------------------------------------------

def test_criterion_06_formula():
    v = performance_bound(0.95, 0.9, 0.69857, 0)
    acceptance(6, abs(v - 0.449692) <= 1e-6, f"value {v:.7f}, target 0.449692")


# -- criterion 7 ---------------------------------------------------------

def test_criterion_07_query_scaling():
    t0 = time.perf_counter()
    f = make_synthetic_objective("modular", None, 50, seed=11)
    ks = [16, 64, 256, 1024]
    q = {name: [] for name in ("standard", "threshold", "fast")}
    for k in ks:
        q["standard"].append(standard_greedy(f, k).queries)
        q["threshold"].append(threshold_greedy(f, k).queries)
        q["fast"].append(fast_greedy(f, k).queries)
    fit = stats.linregress(ks, q["standard"])
    r2 = fit.rvalue ** 2
    growth = {a: q[a][-1] / q[a][0] for a in ("threshold", "fast")}
    share = {a: q[a][-1] / q["standard"][-1] for a in ("threshold", "fast")}
    elapsed = time.perf_counter() - t0
    ok = r2 >= 0.99 and all(g < 15 for g in growth.values()) and all(s < 0.25 for s in share.values()) \
        and elapsed < 60
    acceptance(7, ok, f"queries {q}, standard R^2 {r2:.6f}, growth {growth}, share of standard {share}, "
                      f"{elapsed:.1f}s")


# -- criterion 8 ---------------------------------------------------------

def test_criterion_08_fast_uses_fewer_queries():
    inst = build_gim(scale_free_graph(100, 2, seed=8), 10)
    parts, ok = [], True
    for K in (2, 4):
        k = K * 10
        tg = threshold_greedy(GimOracleAdapter(inst, 1000, seed=100 + K), k)
        fg = fast_greedy(GimOracleAdapter(inst, 1000, seed=100 + K), k)
        ok &= fg.queries <= tg.queries
        parts.append(f"K={K}: threshold {tg.queries}, fast {fg.queries} "
                     f"({100 * (1 - fg.queries / tg.queries):.1f}% fewer)")
    acceptance(8, ok, "; ".join(parts))


# -- criterion 9 ---------------------------------------------------------

def test_criterion_09_estimator():
    rng = np.random.default_rng(99)
    t0 = time.perf_counter()
    within, worst_norm = 0, 0.0
    for trial in range(100):
        inst = random_tiny_instance(rng, max_nodes=6, max_edges=10, levels=3)
        g = rng.integers(0, 3, size=inst.n_nodes)
        s = int(rng.integers(inst.n_nodes))
        l = int(rng.integers(1, 4 - g[s]))
        up = g.copy()
        up[s] += l
        exact = exact_activation(inst, up) - exact_activation(inst, g)
        samples = recompute_active_sets(inst, sample_thresholds(inst, 10_000, seed=trial), g)
        est, se = estimate_marginal_gain(inst, samples, g, s, l, return_stderr=True)
        within += abs(est - exact) <= max(3 * se, 1e-12)
        for x in (g, up):
            worst_norm = max(worst_norm, abs(total_probability(inst, x) - 1))
    elapsed = time.perf_counter() - t0
    acceptance(9, within >= 95 and worst_norm <= 1e-9 and elapsed < 120,
               f"{within}/100 within 3 SE, max normalization error {worst_norm:.2e}, {elapsed:.1f}s")


# -- criterion 10 --------------------------------------------------------

def test_criterion_10_reductions():
    rng = np.random.default_rng(10)
    arcs = [(u, v) for u in range(3) for v in range(3) if u != v]
    worst, graphs = 0.0, 0
    for m in range(1, 5):
        for edges in itertools.combinations(arcs, m):
            edges = list(edges)
            graphs += 1
            w = rng.uniform(0.05, 0.95, size=m)
            ic = reduce_from_ic_im(from_edges(edges, 3, w), 2)
            for x in itertools.product((0, 1), repeat=3):
                seeds = [u for u in range(3) if x[u]]
                worst = max(worst, abs(exact_activation(ic, x) - ic_spread(3, edges, w, seeds)))
            p = rng.uniform(0.05, 0.6, size=m)
            p2 = np.minimum(0.99, p + rng.uniform(0.05, 0.4, size=m))
            seeds = [u for u in range(3) if rng.random() < 0.5] or [0]
            boost = reduce_from_boosting(from_edges(edges, 3), p, p2, seeds, 1)
            base = ic_spread(3, edges, p, seeds)
            for x in itertools.product((0, 1), repeat=3):
                mixed = [p2[e] if x[v] else p[e] for e, (u, v) in enumerate(edges)]
                want = ic_spread(3, edges, mixed, seeds) - base
                worst = max(worst, abs(exact_activation(boost, x) - want))
    acceptance(10, worst <= 1e-12, f"{graphs} graphs, max deviation {worst:.2e}")


# -- criterion 11 --------------------------------------------------------

def test_criterion_11_level_ratio_lower_bound():
    rng = np.random.default_rng(11)
    bad, lowest = [], (1.0, 1.0)
    for trial in range(20):
        n = int(rng.integers(2, 5))
        arcs = [(u, v) for u in range(n) for v in range(n) if u != v]
        m = int(rng.integers(1, min(5, len(arcs)) + 1))
        edges = [arcs[i] for i in sorted(rng.choice(len(arcs), size=m, replace=False))]
        k = int(rng.integers(1, 4))
        inst = build_gim(from_edges(edges, n), 2, k=k)
        bound = dr_lower_bound(inst, k)
        f = ExactGimObjective(inst)
        res = fast_greedy(f, k)
        gs = greedy_submodularity_ratio(f, res, k).gamma_s_greedy
        lowest = (min(lowest[0], gs), min(lowest[1], res.beta_star))
        if gs < bound or res.beta_star < bound:
            bad.append((trial, gs, res.beta_star, bound))
    acceptance(11, not bad, f"20 instances, {len(bad)} violations; smallest greedy gamma_s "
                            f"{lowest[0]:.4f}, smallest beta* {lowest[1]:.4f}")


# -- criterion 12 --------------------------------------------------------

def test_criterion_12_beta_shape():
    inst = build_gim(scale_free_graph(10, 2, seed=12), 10)
    f = FixedSampleActivation(inst, n_samples=1000, seed=12)
    rows = []
    for k in (5, 7, 9, 10):
        res = fast_greedy(f, k)
        gs = greedy_submodularity_ratio(f, res, k).gamma_s_greedy
        rows.append((k, res.beta_star, gs, 1 - math.exp(-KAPPA * res.beta_star * gs)))
    betas = [r[1] for r in rows]
    steps_ok = all(0 <= a - b < 0.05 for a, b in zip(betas, betas[1:]))
    ok = steps_ok and all(r[3] > 0 for r in rows)
    acceptance(12, ok, "k, beta*, gamma_s, bound: " +
               "; ".join(f"{k} {b:.3f} {g:.3f} {v:.3f}" for k, b, g, v in rows))
