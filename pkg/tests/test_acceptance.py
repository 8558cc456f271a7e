"""Acceptance criteria.  Each test records a single PASS/FAIL line, shown in
the "acceptance criteria" section of the pytest summary."""

import math
import time

import numpy as np

from multipack.bounds import (
    BOUNDED_LOWER,
    PLOTKIN_VANISHING,
    BoundName,
    bounded_to_unbounded_rate,
    eval_bound,
    khinchin_constant,
    maximize_E,
    maximize_E_numeric,
)
from multipack.covering import (
    build_covering,
    cap_code_identity,
    certified_cap_code,
    coverage_fraction,
    plotkin_cap_check,
    plotkin_size_limit,
)
from multipack.ensembles import CHUNKS, EnsembleSpec, draw, sample, sample_cap, substream
from multipack.expurgation import choose_eps, construct, initial_size
from multipack.geometry import (
    AVG_FORMS,
    Code,
    PackingParams,
    avg_sq_radius,
    cheb_sq_radius,
    lift_ball_to_sphere,
    max_sq_radius,
    verify_packing,
)
from multipack.montecarlo import gaussian_tail_exact, gaussian_tail_log, mc_tail

from oracles import grid_minimax_sq_radius

B = BoundName


def test_criterion_01_representation(criterion):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst_form, chain_bad = 0.0, 0
    for _ in range(10_000):
        n, L = int(rng.integers(1, 65)), int(rng.integers(1, 9))
        X = rng.standard_normal((L, n)) * rng.uniform(0.1, 10)
        vals = [avg_sq_radius(X, f) for f in AVG_FORMS]
        if vals[0] > 0:
            worst_form = max(worst_form, max(abs(v - vals[0]) for v in vals) / vals[0])
        c = cheb_sq_radius(X)[0]
        m = max_sq_radius(X)
        slack = 1e-9 * (1 + m)
        chain_bad += not (vals[0] <= c + slack and c <= m + slack)
    dt = time.perf_counter() - t0
    ok = worst_form <= 1e-9 and chain_bad == 0 and dt < 5
    criterion(1, "representation suite", ok,
              f"max form disagreement {worst_form:.2e} (tol 1e-9), chain violations {chain_bad}, {dt:.1f}s (< 5s)")


def test_criterion_02_chebyshev_oracle(criterion):
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        X = rng.standard_normal((int(rng.integers(1, 6)), int(rng.integers(1, 4))))
        worst = max(worst, abs(cheb_sq_radius(X)[0] - grid_minimax_sq_radius(X)))
    pair = cheb_sq_radius([(0, 0), (2, 0)])[0]
    tri = cheb_sq_radius([(0, 0), (1, 0), (0.5, math.sqrt(3) / 2)])[0]
    right = cheb_sq_radius([(0, 0), (2, 0), (0, 2)])[0]
    fix = max(abs(pair - 1.0), abs(tri - 1 / 3), abs(right - 2.0))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-4 and fix <= 1e-9 and dt < 30
    criterion(2, "chebyshev oracle", ok,
              f"grid oracle max |diff| {worst:.2e} (tol 1e-4), fixtures max |diff| {fix:.1e} (tol 1e-9), {dt:.1f}s (< 30s)")


def test_criterion_03_gaussian_tail_golden(criterion):
    t0 = time.perf_counter()
    est = mc_tail(EnsembleSpec("gaussian", 20, 1.0), 3, 20 * 0.3, 1_000_000, seed=2024)
    exact = gaussian_tail_exact(20, 3, 1.0, 0.3)
    dt = time.perf_counter() - t0
    z = abs(est.p_hat - exact) / est.stderr
    criterion(3, "gaussian tail golden test", z <= 3 and dt < 60,
              f"p_hat {est.p_hat:.6f} vs exact {exact:.6f}, |z| = {z:.2f} (<= 3), {dt:.1f}s (< 60s)")


def test_criterion_04_exponent_convergence(criterion):
    t0 = time.perf_counter()
    n, L, P, N = 800, 3, 1.0, 0.5
    rate = -gaussian_tail_log(n, L, P, N) / n
    err1 = abs(rate - 0.037682) / 0.037682
    lb = eval_bound(B.lb_gaussian, L, N / P)
    err2 = abs(rate / (L - 1) - lb) / lb
    dt = time.perf_counter() - t0
    ok = err1 <= 0.02 and err2 <= 0.02 and abs(lb - 0.018841) < 5e-7 and dt < 1
    criterion(4, "exponent convergence", ok,
              f"-ln p/n at n=800 is {rate:.6f} vs 0.037682 (rel err {err1:.2%}, tol 2%); "
              f"rate/(L-1) {rate / 2:.6f} vs lb_gaussian {lb:.6f} (rel err {err2:.2%}); {dt:.2f}s")


def test_criterion_05_bound_curves(criterion):
    t0 = time.perf_counter()
    zero = order = si = 0.0
    for L in range(2, 11):
        pp = (L - 1) / L
        zero = max(zero, max(abs(eval_bound(b, L, pp)) for b in PLOTKIN_VANISHING))
        for x in np.linspace(0, pp, 1001)[1:]:
            ub = eval_bound(B.ub_eb, L, x)
            order = max(order, max(eval_bound(b, L, x) - ub for b in BOUNDED_LOWER))
            si = max(si, eval_bound(B.lb_spherical, L, x) - eval_bound(B.lb_spherical_improved, L, x))
    large = 0.0
    for x in (0.05, 0.2, 0.5, 0.8, 0.95):
        cap = eval_bound(B.cap_large_L, 10**6, x)
        large = max(large, abs(eval_bound(B.ub_eb, 10**6, x) - cap),
                    abs(eval_bound(B.lb_spherical_improved, 10**6, x) - cap))
    for N in (0.005, 0.02, 0.05):
        cap = eval_bound(B.cap_large_L_unbdd, 10**6, N)
        large = max(large, abs(eval_bound(B.ub_eb_unbdd, 10**6, N) - cap), abs(eval_bound(B.lb_ppp, 10**6, N) - cap))
    transform = 0.0
    for L in range(2, 11):
        for P in (0.5, 1.0, 4.0):
            for N in np.linspace(0.01, 0.99 * (L - 1) / L * P, 50):
                transform = max(transform, abs(bounded_to_unbounded_rate(eval_bound(B.ub_eb, L, N / P), P)
                                               - eval_bound(B.ub_eb_unbdd, L, N)))
    v = {b: eval_bound(b, 5, 0.4) for b in (B.lb_spherical_improved, B.lb_blachman_few, B.lb_spherical,
                                             B.lb_gaussian, B.ub_eb)}
    ref = {B.lb_spherical_improved: 0.2092, B.lb_blachman_few: 0.1438, B.lb_spherical: 0.1127,
           B.lb_gaussian: 0.0966, B.ub_eb: 0.3466}
    ranking = (v[B.lb_spherical_improved] > v[B.lb_blachman_few] > v[B.lb_spherical] > v[B.lb_gaussian]
               and v[B.ub_eb] > v[B.lb_spherical_improved]
               and all(abs(v[b] - ref[b]) < 5e-5 for b in ref))
    dt = time.perf_counter() - t0
    ok = zero <= 1e-12 and order <= 1e-12 and si <= 1e-12 and large <= 1e-5 and transform <= 1e-12 and ranking and dt < 5
    criterion(5, "bound-curve suite", ok,
              f"Plotkin zeros {zero:.1e}, lower-upper excess {order:.1e}, spherical-improved excess {si:.1e}, "
              f"large-L gap {large:.1e} (tol 1e-5), transform {transform:.1e} (tol 1e-12), "
              f"L=5 ranking {'ok' if ranking else 'WRONG'} "
              f"({', '.join(f'{b.value} {v[b]:.4f}' for b in v)}), {dt:.1f}s")


def test_criterion_06_exponent_maximization(criterion):
    t0 = time.perf_counter()
    arg = val = match = 0.0
    for L in range(2, 22):
        pp = (L - 1) / L
        for k in range(1, 21):
            x = pp * k / 21
            a, b = maximize_E(L, 1.0, x), maximize_E_numeric(L, 1.0, x)
            arg = max(arg, abs(a.s - b.s), abs(a.lam - b.lam))
            val = max(val, abs(a.value - b.value))
            match = max(match, abs(a.value / (L - 1) - eval_bound(B.lb_spherical_improved, L, x)))
    P, N = 1.0, 0.25
    red = abs(maximize_E(2, P, N).value - 0.5 * math.log(P * P / (4 * N * (P - N))))
    dt = time.perf_counter() - t0
    ok = arg <= 1e-6 and val <= 1e-9 and match <= 1e-9 and red <= 1e-9 and dt < 5
    criterion(6, "exponent maximization", ok,
              f"20x20 grid: max arg diff {arg:.1e} (tol 1e-6), value diff {val:.1e} (tol 1e-9), "
              f"value/(L-1) vs lb_spherical_improved {match:.1e}, L=2 reduction {red:.1e}, {dt:.1f}s")


def test_criterion_07_expurgation(criterion):
    t0 = time.perf_counter()
    n, L, P, N = 50, 3, 1.0, 0.45
    rate = 0.8 * eval_bound(B.lb_gaussian, L, N / P)
    # variance back-off chosen to minimize the expected number of deletions
    eps = choose_eps(n, L, P, N, initial_size(n, rate))
    params = PackingParams(n, L, N, P, "average-radius")
    verified = half = 0
    sizes = []
    for seed in range(20):
        code, rep = construct(EnsembleSpec("gaussian", n, P, seed=seed, eps=eps), params, rate)
        verified += rep.verified and verify_packing(code, params).ok
        half += 2 * rep.final_size >= rep.initial_size
        sizes.append(rep.final_size)
    dt = time.perf_counter() - t0
    plain = sum(2 * construct(EnsembleSpec("gaussian", n, P, seed=seed), params, rate)[1].final_size
                >= initial_size(n, rate) for seed in range(20))
    ok = verified == 20 and half >= 19 and dt < 120
    criterion(7, "expurgation", ok,
              f"eps {eps:.3f}, M {initial_size(n, rate)}: verified {verified}/20, final >= initial/2 in {half}/20 "
              f"(need 19), sizes {sizes}, {dt:.1f}s; without back-off {plain}/20 keep half")


def test_criterion_08_plotkin_covering(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    ident = 0.0
    for i in range(1000):
        L = int(rng.integers(2, 5))
        M = int(rng.integers(L, 65))
        n = int(rng.integers(2, 17))
        code = sample(EnsembleSpec("sphere", n, float(rng.uniform(0.5, 2)), seed=i), M)
        lhs, rhs = cap_code_identity(code, L)
        ident = max(ident, abs(lhs - rhs) / (1 + abs(rhs)))
    plotkin_fail = 0
    for i in range(1000):
        L = int(rng.integers(2, 5))
        M = int(rng.integers(L, 17))
        n = int(rng.integers(2, 17))
        alpha = float(rng.uniform(0.2, math.pi / 2))
        plotkin_fail += not plotkin_cap_check(sample_cap(n, 1.0, alpha, M, 10_000 + i), L, alpha)[2]
    size_bad, certified = 0, 0
    for rho in (0.5, 1.0):
        for L in (2, 3):
            for seed in range(5):
                _, rep = certified_cap_code(6, L, math.pi / 2, rho, 40, seed)
                certified += rep.verified
                size_bad += rep.verified and rep.final_size > plotkin_size_limit(rho)
    covered = [coverage_fraction(build_covering(8, math.pi / 3, 4, seed=s), 100_000, seed=1000 + s)
               for s in range(20)]
    good = sum(c >= 0.999 for c in covered)
    dt = time.perf_counter() - t0
    ok = ident <= 1e-9 and plotkin_fail == 0 and size_bad == 0 and good >= 18 and dt < 120
    criterion(8, "Plotkin/covering suite", ok,
              f"identity max rel diff {ident:.1e} (tol 1e-9), Plotkin check failures {plotkin_fail}/1000, "
              f"size-limit violations {size_bad}/{certified} certified codes, covering (K=13) >= 99.9% in "
              f"{good}/20 seeds (need 18; median coverage {np.median(covered):.3f}), {dt:.1f}s")


def test_criterion_09_khinchin(criterion):
    t0 = time.perf_counter()
    sphere2 = max(abs(khinchin_constant(n, 2, "sphere") - 1.0) for n in range(2, 200))
    ball2 = max(abs(khinchin_constant(n, 2, "ball") - math.sqrt(n / (n + 2))) for n in range(1, 200))
    n, L, lists, chunk = 16, 4, 1_000_000, 1 << 15
    spec = EnsembleSpec("sphere", n, 1.0 / n)
    sums = {p: [0.0, 0.0] for p in (2, 4, 8)}
    for c in range(-(-lists // chunk)):
        m = min(chunk, lists - c * chunk)
        u = draw(spec, substream(99, CHUNKS, c), m * L).reshape(m, L, n)
        r = np.linalg.norm(u.sum(axis=1), axis=1)
        for p in sums:
            v = r**p
            sums[p][0] += v.sum()
            sums[p][1] += (v * v).sum()
    margins = {}
    ok_mc = True
    for p, (s1, s2) in sums.items():
        mean = s1 / lists
        se = math.sqrt(max(s2 / lists - mean**2, 0.0) / lists)
        rhs = khinchin_constant(n, p, "sphere") ** p * L ** (p / 2) * (1 + 5 * se / mean)
        margins[p] = mean / rhs
        ok_mc &= mean <= rhs
    dt = time.perf_counter() - t0
    ok = sphere2 <= 1e-15 and ball2 <= 1e-15 and ok_mc and dt < 60
    criterion(9, "Khinchin suite", ok,
              f"|C_n,2 - 1| {sphere2:.1e}, ball |C_n,2 - sqrt(n/(n+2))| {ball2:.1e}, "
              f"MC moment / bound {', '.join(f'p={p}: {m:.3f}' for p, m in margins.items())}, {dt:.1f}s")


def test_criterion_10_lift(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(10)
    norm_err, decreases = 0.0, 0
    checked = 0
    for i in range(1000):
        n = int(rng.integers(1, 9))
        P = float(rng.uniform(0.5, 2))
        code = sample(EnsembleSpec("ball", n, P, seed=i), int(rng.integers(2, 9)))
        lifted = lift_ball_to_sphere(code)
        norm_err = max(norm_err, float(np.max(np.abs(lifted.sq_norms / ((n + 1) * P) - 1))))
        for _ in range(3):
            L = int(rng.integers(2, code.M + 1))
            S = np.sort(rng.choice(code.M, L, replace=False))
            a, b = code.points[S], lifted.points[S]
            decreases += avg_sq_radius(b) < avg_sq_radius(a) * (1 - 1e-12)
            decreases += cheb_sq_radius(b)[0] < cheb_sq_radius(a)[0] * (1 - 1e-9)
            checked += 2
    dt = time.perf_counter() - t0
    ok = norm_err <= 1e-9 and decreases == 0 and dt < 10
    criterion(10, "lift suite", ok,
              f"max rel norm error {norm_err:.1e} (tol 1e-9), radius decreases {decreases}/{checked}, {dt:.1f}s")


def test_covering_with_calibrated_oversample():
    """Not an acceptance criterion: the coverage target of criterion 8 is
    reached once the oversample factor is calibrated from the cap area."""
    from multipack.covering import oversample_for

    over = oversample_for(8, math.pi / 3, 0.9995)
    good = sum(coverage_fraction(build_covering(8, math.pi / 3, over, seed=s), 100_000, seed=1000 + s) >= 0.999
               for s in range(20))
    assert good >= 18


def test_exponent_convergence_at_larger_n():
    """Not an acceptance criterion: the 2% tolerance of criterion 4 is met
    once n is large enough for the polynomial prefactor to fade."""
    errs = {n: abs(-gaussian_tail_log(n, 3, 1.0, 0.5) / n - 0.037682) / 0.037682 for n in (800, 3200, 12800)}
    assert errs[800] > errs[3200] > errs[12800]
    assert errs[12800] < 0.02
