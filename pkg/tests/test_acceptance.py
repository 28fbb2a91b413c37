"""Acceptance suite: one test per criterion, one printed pass/fail line each."""
import math
import time

import numpy as np
import pytest

from blowup import (CylState, Dimension, canonical_v, canonical_vsecond,
                    choose_T_for_epsilon, energy, fit_neck_period_law,
                    integrate, kelvin_of_bubble, plan_stages, solve_by_neck,
                    solve_by_period, standard_solution, symmetric_radius,
                    translation_lemma_check)
from blowup.cli import main as cli_main
from blowup.conformal import Bubble, KelvinMap, offset_source
from blowup.glue import compute_K, splice
from blowup.odecore import ode_rhs_second
from blowup.verify import (DimensionRestrictionError, assembled_residual,
                           critical_order_check, cylindrical_residual,
                           euclid_residual, holder_check,
                           lipschitz_extension_check, lipschitz_predicate,
                           scan_T_for_lipschitz)

SWEEP_T = (15.0, 20.0, 25.0, 30.0, 35.0)


def report(num, ok, detail):
    status = "PASS" if ok else "FAIL"
    print(f"criterion {num:02d} {status}: {detail}")
    assert ok, f"criterion {num}: {detail}"


@pytest.fixture(scope="module")
def lipschitz_run(n5, n5_lipschitz):
    return lipschitz_extension_check(n5, n5_lipschitz, pairs=100000, seed=0)


def test_criterion_01_neck_period_law():
    t0 = time.monotonic()
    worst_slope_err, worst_residual = 0.0, 0.0
    for n in (3, 4, 5, 6):
        dim = Dimension(n)
        fit = fit_neck_period_law(dim, SWEEP_T)
        expected = -(n - 2) / 4.0
        worst_slope_err = max(worst_slope_err,
                              abs(fit.slope - expected) / abs(expected))
        worst_residual = max(worst_residual, fit.residual)
    elapsed = time.monotonic() - t0
    ok = worst_slope_err < 0.03 and worst_residual < 0.1 and elapsed < 120.0
    report(1, ok, f"slope err {worst_slope_err:.2e} (<3%), residual "
                  f"{worst_residual:.2e} (<0.1), {elapsed:.1f}s (<120s)")


def test_criterion_02_energy_conservation():
    worst = 0.0
    for n in (3, 4, 5, 6):
        dim = Dimension(n)
        for frac in (0.3, 0.5, 0.8):
            prof = solve_by_neck(dim, frac * dim.v_cyl, tol=1e-10)
            traj = integrate(dim, CylState(0.0, prof.vmax, 0.0),
                             (0.0, 10.0 * prof.T), tol=1e-10)
            worst = max(worst, traj.energy_drift())
    report(2, worst < 1e-9, f"max relative energy drift {worst:.2e} (<1e-9) "
                            "over 10 periods, n in 3..6")


def test_criterion_03_canonical_profile_exactness():
    t = np.linspace(-30.0, 30.0, 12001)
    worst = 0.0
    for n in range(3, 9):
        dim = Dimension(n)
        res = canonical_vsecond(dim, t) - ode_rhs_second(dim, canonical_v(dim, t))
        worst = max(worst, float(np.max(np.abs(res))))
    report(3, worst < 1e-12,
           f"max closed-form ODE residual {worst:.2e} (<1e-12), n in 3..8")


def test_criterion_04_c2_closeness_scaling(n3_profiles):
    t = np.linspace(-6.0, 6.0, 2001)
    v_ratios, vp_ratios = [], []
    for T, prof in n3_profiles.items():
        eta2 = prof.eta**2
        v_ratios.append(float(np.max(np.abs(prof.w(t)))) / eta2)
        vp_ratios.append(float(np.max(np.abs(prof.wprime(t)))) / eta2)
    bands = (max(v_ratios) / min(v_ratios), max(vp_ratios) / min(vp_ratios))
    ok = bands[0] < 3.0 and bands[1] < 3.0
    report(4, ok, f"sup|v_T-v_s|/eta^2 band {bands[0]:.2f}, derivative band "
                  f"{bands[1]:.2f} (each <3) over T in 15..35")


def test_criterion_05_glue_identity_and_fd_order(n3, n3_kprofs):
    mod = n3_kprofs[20.0].mod
    t = np.linspace(-2.0, 22.0, 9601)
    v, _, vpp = mod.values(t)
    res = np.abs(vpp - (n3.quarter_sq * v
                        - n3.nonlinear_coeff * mod.k(t) * v**n3.p))
    identity = float(np.max(res))
    rep = cylindrical_residual(lambda s: mod.values(s)[0], mod.k,
                               (2.5, 6.5), [1e-2, 5e-3, 2.5e-3], n3)
    ok = identity < 1e-10 and 1.7 <= rep.order <= 2.3
    report(5, ok, f"identity residual {identity:.2e} (<1e-10), FD order "
                  f"{rep.order:.2f} (in [1.7, 2.3])")


def test_criterion_06_epsilon_attainability(n3, n3_kprofs):
    t0 = time.monotonic()
    T2, kp2 = choose_T_for_epsilon(n3, 3.0, 2, 1e-2)
    T3, kp3 = choose_T_for_epsilon(n3, 3.0, 2, 1e-3)
    elapsed = time.monotonic() - t0
    sweep = [n3_kprofs[T].sup_deviation for T in SWEEP_T]
    decreasing = all(a > b for a, b in zip(sweep, sweep[1:]))
    ok = (kp2.sup_deviation <= 1e-2 and kp3.sup_deviation <= 1e-3
          and math.isfinite(T2) and math.isfinite(T3) and decreasing
          and elapsed < 60.0)
    report(6, ok, f"eps 1e-2 at T={T2:.1f} (sup {kp2.sup_deviation:.2e}), "
                  f"1e-3 at T={T3:.1f} (sup {kp3.sup_deviation:.2e}), "
                  f"sweep decreasing {decreasing}, {elapsed:.1f}s (<60s)")


def test_criterion_07_lipschitz_scaling(n3_profiles, n3_kprofs):
    ratios = [n3_kprofs[T].lipschitz_estimate / n3_profiles[T].eta ** 2
              for T in SWEEP_T]
    band = max(ratios) / min(ratios)
    report(7, band < 3.0,
           f"Lip(K)/eta^2 band {band:.2f} (<3) over T in 15..35")


def test_criterion_08_kelvin_involutions():
    rng = np.random.default_rng(12)
    worst_reflect, worst_transform = 0.0, 0.0
    for _ in range(10):
        n = int(rng.integers(3, 7))
        dim = Dimension(n)
        km = KelvinMap(dim=dim, xi=rng.normal(size=n) * 4.0,
                       a=float(rng.uniform(0.5, 3.0)))
        x = km.xi + rng.normal(size=(1000, n)) * 3.0
        back = km.reflect(km.reflect(x))
        worst_reflect = max(worst_reflect,
                            float(np.max(np.abs(back - x) / np.abs(x).max())))
        u = Bubble(dim=dim, lam=float(rng.uniform(0.5, 2.0)),
                   center=rng.normal(size=n))
        twice = km.transform(km.transform(u))
        worst_transform = max(worst_transform,
                              float(np.max(np.abs(twice(x) / u(x) - 1.0))))
    ok = worst_reflect < 1e-12 and worst_transform < 1e-12
    report(8, ok, f"double-reflect {worst_reflect:.2e}, double-transform "
                  f"{worst_transform:.2e} (each <1e-12 relative)")


def test_criterion_09_bubble_transformation_law():
    rng = np.random.default_rng(21)
    worst_law, worst_fixed, worst_offset = 0.0, 0.0, 0.0
    for _ in range(10):
        n = int(rng.integers(3, 7))
        dim = Dimension(n)
        km = KelvinMap(dim=dim, xi=rng.normal(size=n) * 4.0,
                       a=float(rng.uniform(0.5, 3.0)))
        b = Bubble(dim=dim, lam=float(rng.uniform(0.3, 2.0)),
                   center=rng.normal(size=n) * 2.0)
        image = kelvin_of_bubble(km, b)
        x = km.xi + rng.normal(size=(500, n)) * 3.0
        worst_law = max(worst_law, float(
            np.max(np.abs(km.transform(b)(x) / image(x) - 1.0))))
        xi = rng.normal(size=n) * 6.0
        sym = KelvinMap(dim=dim, xi=xi, a=symmetric_radius(xi))
        fixed = kelvin_of_bubble(sym, standard_solution(dim))
        worst_fixed = max(worst_fixed, abs(fixed.lam - 1.0),
                          float(np.max(np.abs(fixed.center))))
        worst_offset = max(worst_offset, float(
            np.max(np.abs(sym.reflect(np.zeros(n)) - offset_source(xi)))))
        ball_c, ball_r = sym.ball_image(np.zeros(n), 0.05)
        nx2 = float(xi @ xi)
        denom = nx2 - 0.05**2
        a2 = 1.0 + nx2
        worst_offset = max(
            worst_offset,
            abs(ball_r - a2 * 0.05 / denom),
            float(np.max(np.abs(ball_c - xi * (1.0 - a2 / denom)))))
    ok = worst_law < 1e-12 and worst_fixed < 1e-13 and worst_offset < 1e-13
    report(9, ok, f"law vs transform {worst_law:.2e} (<1e-12), fixed point "
                  f"{worst_fixed:.2e}, offset/ball {worst_offset:.2e} (<1e-13)")


def test_criterion_10_translation_lemma(n3):
    rng = np.random.default_rng(33)
    t = np.linspace(-10.0, 10.0, 4001)
    worst = 0.0
    for _ in range(20):
        lam1, lam2 = np.exp(rng.uniform(-1.5, 1.5, 2))
        worst = max(worst, translation_lemma_check(n3, float(lam1),
                                                   float(lam2), t))
    report(10, worst < 1e-13,
           f"max profile-translation gap {worst:.2e} (<1e-13), 20 pairs")


def test_criterion_11_five_stage_construction(n3):
    t0 = time.monotonic()
    sol = plan_stages(n3, eps=0.1, count=5, growth=10.0)
    elapsed = time.monotonic() - t0
    complete = sol.infeasible_note is None and len(sol.stages) == 5
    max_dev = max(s.kprof.sup_deviation for s in sol.stages)
    diags = [s.diagnostic for s in sol.stages]
    growth_ok = all(b >= 10.0 * a for a, b in zip(diags, diags[1:]))
    rng = np.random.default_rng(2)
    outside_exact = True
    base = sol.base
    for _ in range(2000):
        x = rng.normal(size=3) * rng.uniform(0.05, 3.0)
        if np.any(x) and sol._locate(x) is None:
            outside_exact &= sol.eval_u(x) == base(x) and sol.eval_K(x) == 1.0
    ok = (complete and max_dev <= 0.1 and growth_ok and outside_exact
          and elapsed < 300.0)
    report(11, ok, f"5 disjoint stages, max sup|K-1| {max_dev:.3f} (<=0.1), "
                   f"growth>=10 {growth_ok}, outside-support exact "
                   f"{outside_exact}, {elapsed:.1f}s (<300s)")


def test_criterion_12_pde_residuals(n3, n3_kprofs):
    u_s = lambda r: (1.0 / (1.0 + np.asarray(r) ** 2)) ** 0.5
    one = lambda r: np.ones_like(np.asarray(r, dtype=float))
    base = euclid_residual(u_s, one, (0.5, 2.0), [1e-3], n3, scale_aware=False)
    mod = n3_kprofs[20.0].mod
    spliced = cylindrical_residual(lambda t: mod.values(t)[0], mod.k,
                                   (2.5, 6.5), [1e-2, 5e-3, 2.5e-3], n3)
    sol = plan_stages(n3, eps=0.1, count=1, growth=10.0)
    c, r = sol.stages[0].ball
    pts = [c + np.array([f * r, 0.0, 0.0]) for f in (-0.6, 0.3, 0.6)]
    assembled = assembled_residual(sol, pts, [2.5e-4, 5e-4, 1e-3])
    ok = (base.max_residuals[0] < 1e-6 and 1.7 <= spliced.order <= 2.3
          and 1.7 <= assembled.order <= 2.3)
    report(12, ok, f"u_s residual {base.max_residuals[0]:.2e} (<1e-6 at "
                   f"h=1e-3), spliced order {spliced.order:.2f}, assembled "
                   f"order {assembled.order:.2f} (each in [1.7, 2.3])")


def test_criterion_13_lipschitz_extension(n3, lipschitz_run):
    rep = lipschitz_run
    refused = False
    try:
        scan_T_for_lipschitz(n3, 3.0)
    except DimensionRestrictionError:
        refused = True
    ok = rep.passed and rep.pair_count >= 100000 and refused
    report(13, ok, f"n=5: max ratio {rep.max_ratio:.2e} (<=1) over "
                   f"{rep.pair_count} stratified pairs at T={rep.T:.0f}; "
                   f"n=3 refused {refused}")


def test_criterion_14_holder_corollary(n5_lipschitz, lipschitz_run):
    C = max(lipschitz_run.max_ratio, lipschitz_predicate(n5_lipschitz))
    results = {}
    ok = True
    for alpha in (0.25, 0.5, 1.0):
        rep = holder_check(n5_lipschitz, alpha, C)
        results[alpha] = rep.max_ratio
        ok &= rep.passed
    report(14, ok, "max |K(x)-K(y)|/|x-y|^a on B2: " +
           ", ".join(f"a={a}: {v:.1e}" for a, v in results.items()) +
           f" (each <= 4C = {4 * C:.2e})")


def test_criterion_15_critical_order_bound(n3):
    rep = critical_order_check(n3, beta=0.25)
    ok = rep.passed
    report(15, ok, f"|K-1| <= |x|^((n-2)/2 - 0.25) on the glued annulus at "
                   f"T={rep.T:.0f}, max ratio {rep.max_ratio:.3f} (<=1)")


def test_criterion_16_cli_determinism(tmp_path):
    import json as _json
    configs = {
        "delaunay": {"n": 3, "T_grid": [15, 20, 25], "periods": 5},
        "glue": {"n": 3, "T_grid": [20], "D": 3.0, "m": 2},
        "construct": {"n": 3, "eps": 0.1, "count": 1, "growth": 10},
        "verify": {"n": 3, "suites": ["critical"], "beta": 0.25},
    }
    identical = True
    for command, cfg in configs.items():
        cfg_path = tmp_path / f"{command}.json"
        cfg_path.write_text(_json.dumps(cfg), encoding="utf-8")
        dirs = []
        for run in ("a", "b"):
            out = tmp_path / f"{command}_{run}"
            cli_main([command, "--config", str(cfg_path), "--out", str(out),
                      "--seed", "5"])
            dirs.append(out)
        for path in sorted(dirs[0].iterdir()):
            identical &= path.read_bytes() == (dirs[1] / path.name).read_bytes()
    report(16, identical,
           "re-runs byte-identical across delaunay/glue/construct/verify")
