"""Independent numerical verification of the constructed solutions.

Finite-difference residual checks in cylindrical and Euclidean coordinates,
the Lipschitz extension of the coefficient through the origin (dimension
five and up), the Hölder consequence on the closed 2-ball, and the
critical-order smallness bound on the glued annulus.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dimension import Dimension
from .glue import KRadialProfile, ModifiedProfile, compute_K, splice
from .odecore import DEFAULT_TOL, canonical_v, solve_by_period


@dataclass
class ResidualReport:
    """Max PDE residual per grid step and the implied convergence order."""

    h_values: list[float]
    max_residuals: list[float]
    order: float
    witness_t: float

    @property
    def converged(self) -> bool:
        return 1.7 <= self.order <= 2.3


def _order_estimate(h, res):
    h = np.asarray(h, dtype=float)
    res = np.asarray(res, dtype=float)
    if h.size < 2:
        return math.nan  # a single step carries no order information
    if np.any(res <= 0):
        return 2.0  # residual at rounding floor; treat as converged
    slope, _ = np.polyfit(np.log(h), np.log(res), 1)
    return float(slope)


def cylindrical_residual(v, k, t_window, h_list, dim: Dimension,
                         scale_aware: bool = True) -> ResidualReport:
    """Residual of v'' = c2 v - n(n-2) K v^p with central-difference v''.

    `v` and `k` are callables of t; the residual is normalized by the local
    magnitude of the dominant term when scale_aware is set.
    """
    lo, hi = t_window
    h_list = sorted(float(h) for h in h_list)
    ts = np.linspace(lo, hi, 201)
    maxres = []
    witness = lo
    for h in h_list:
        vm, v0, vp = v(ts - h), v(ts), v(ts + h)
        vpp = (vm - 2.0 * v0 + vp) / h**2
        res = np.abs(vpp - dim.quarter_sq * v0
                     + dim.nonlinear_coeff * k(ts) * v0**dim.p)
        if scale_aware:
            scale = np.maximum(dim.quarter_sq * np.abs(v0),
                               dim.nonlinear_coeff * np.abs(v0) ** dim.p)
            res = res / np.maximum(scale, 1e-300)
        i = int(np.argmax(res))
        maxres.append(float(res[i]))
        witness = float(ts[i])
    return ResidualReport(h_values=h_list, max_residuals=maxres,
                          order=_order_estimate(h_list, maxres),
                          witness_t=witness)


def euclid_residual(u, k, r_window, h_list, dim: Dimension,
                    scale_aware: bool = True) -> ResidualReport:
    """Residual of u'' + (n-1)/r u' + n(n-2) K u^p = 0 for radial u(r)."""
    lo, hi = r_window
    h_list = sorted(float(h) for h in h_list)
    if lo - 3 * h_list[-1] <= 0:
        raise ValueError("radial window must clear the origin by 3h")
    rs = np.linspace(lo, hi, 201)
    maxres = []
    witness = lo
    for h in h_list:
        um, u0, up = u(rs - h), u(rs), u(rs + h)
        upp = (um - 2.0 * u0 + up) / h**2
        upr = (up - um) / (2.0 * h)
        res = np.abs(upp + (dim.n - 1) / rs * upr
                     + dim.nonlinear_coeff * k(rs) * u0**dim.p)
        if scale_aware:
            scale = np.maximum(dim.nonlinear_coeff * np.abs(u0) ** dim.p,
                               np.abs(upp))
            res = res / np.maximum(scale, 1e-300)
        i = int(np.argmax(res))
        maxres.append(float(res[i]))
        witness = float(rs[i])
    return ResidualReport(h_values=h_list, max_residuals=maxres,
                          order=_order_estimate(h_list, maxres),
                          witness_t=witness)


def assembled_residual(sol, points, h_list, scale_aware: bool = True) -> ResidualReport:
    """Residual of the full equation for an assembled solution.

    Central-difference Laplacian at the given points; points must sit in
    smooth regions (away from stage peaks and support boundaries by a few
    grid steps).
    """
    dim = sol.dim
    h_list = sorted(float(h) for h in h_list)
    pts = [np.asarray(x, dtype=float) for x in points]
    eye = np.eye(dim.n)
    maxres = []
    witness = 0.0
    for h in h_list:
        worst = 0.0
        for x in pts:
            u0 = sol.eval_u(x)
            lap = sum(sol.eval_u(x + h * eye[i]) - 2.0 * u0 + sol.eval_u(x - h * eye[i])
                      for i in range(dim.n)) / h**2
            nonlin = dim.nonlinear_coeff * sol.eval_K(x) * u0**dim.p
            res = abs(lap + nonlin)
            if scale_aware:
                res /= max(abs(nonlin), abs(lap), 1e-300)
            if res > worst:
                worst = res
                witness = float(np.linalg.norm(x))
        maxres.append(worst)
    return ResidualReport(h_values=h_list, max_residuals=maxres,
                          order=_order_estimate(h_list, maxres),
                          witness_t=witness)


# ---------------------------------------------------------------------------
# Lipschitz extension through the origin
# ---------------------------------------------------------------------------

class DimensionRestrictionError(ValueError):
    """The Lipschitz extension argument needs n > 4."""


@dataclass
class LipschitzReport:
    """Sampled certificate for |K(x) - K(y)| <= L |x - y| with K(0) = 1."""

    pair_count: int
    max_ratio: float
    worst_pair: tuple[float, float]
    by_case: dict = field(default_factory=dict)
    T: float = 0.0
    predicate: float = 0.0

    @property
    def passed(self) -> bool:
        return self.max_ratio <= 1.0


def _radial_k_deviation(kprof: KRadialProfile):
    """K - 1 as a function of Euclidean radius, with K(0) - 1 = 0.

    Differences |K(x) - K(y)| are taken between deviations, which keeps
    full relative accuracy when the deviation is below machine epsilon.
    """
    def dev_of_r(r):
        r = np.asarray(r, dtype=float)
        t = -np.log(np.maximum(r, 1e-300))
        return np.where(r == 0.0, 0.0, kprof.k_deviation(t))
    return dev_of_r


def lipschitz_predicate(kprof: KRadialProfile, samples: int = 4096) -> float:
    """Max of |dK/dr| = |K'(t)| e^t over the splice windows.

    At most 1 makes r -> K a contraction in radius, which is sufficient for
    the full Lipschitz bound: rotational symmetry reduces any pair to
    collinear points, and the pair through the origin follows by the mean
    value bound since K = 1 there.
    """
    worst = 0.0
    for lo, hi in kprof.mod.windows:
        t = np.linspace(lo, hi, samples)
        worst = max(worst, float(np.max(np.abs(kprof.kprime(t)) * np.exp(t))))
    return worst


def scan_T_for_lipschitz(dim: Dimension, D: float, m: int = 2,
                         tol: float = DEFAULT_TOL,
                         t_start: float | None = None) -> KRadialProfile:
    """Smallest doubling-scan period whose coefficient contracts in radius.

    The deviation decays like e^(-(n-2)T/2) while the radial stretch grows
    like e^T, so the predicate improves only for n > 4; smaller dimensions
    are refused.
    """
    if dim.n <= 4:
        raise DimensionRestrictionError(
            f"radial contraction fails for n = {dim.n}: the deviation decay "
            "rate (n-2)/2 must exceed the stretch rate 1, so n > 4 is required")
    T = t_start if t_start is not None else max(4.0 * D + 2.0, 2.0 * dim.min_period)
    while T <= dim.period_ceiling:
        kprof = compute_K(splice(solve_by_period(dim, T, tol), D, m))
        if lipschitz_predicate(kprof) <= 1.0:
            return kprof
        T *= 2.0
    raise RuntimeError("contraction not reached below the period ceiling")


def lipschitz_extension_check(dim: Dimension, kprof: KRadialProfile,
                              pairs: int = 100000,
                              seed: int = 0) -> LipschitzReport:
    """Stratified sampled check of |K(x) - K(y)| <= |x - y| with K(0) := 1.

    Pairs are stratified over the three radial zones (inner core, glued
    annulus, outer region) including the y = 0 case and cross-zone pairs;
    rotational symmetry reduces everything to pairs of radii with the
    collinear distance |r1 - r2| being the sharpest separation.
    """
    if dim.n <= 4:
        raise DimensionRestrictionError(
            f"the Lipschitz extension through the origin requires n > 4, "
            f"got n = {dim.n}")
    mod = kprof.mod
    T, D = mod.T, mod.D
    r_in = math.exp(-(mod.m - 1) * T + D)
    r_out = math.exp(-D)
    dev = _radial_k_deviation(kprof)
    rng = np.random.default_rng(seed)

    def sample_zone(which, size):
        if which == "core":
            return rng.uniform(0.0, r_in, size)
        if which == "annulus":
            # log-uniform to cover both splice windows
            return np.exp(rng.uniform(math.log(r_in), math.log(r_out), size))
        return rng.uniform(r_out, 4.0, size)

    cases = {
        "origin-core": ("zero", "core"),
        "origin-annulus": ("zero", "annulus"),
        "origin-outer": ("zero", "outer"),
        "annulus-annulus": ("annulus", "annulus"),
        "annulus-window": ("window", "window"),
        "core-annulus": ("core", "annulus"),
        "annulus-outer": ("annulus", "outer"),
        "core-outer": ("core", "outer"),
    }
    per_case = pairs // len(cases)
    by_case = {}
    worst = (0.0, (0.0, 0.0))
    for name, (za, zb) in cases.items():
        if za == "zero":
            r1 = np.zeros(per_case)
        elif za == "window":
            # concentrate on the splice windows where K varies
            lo, hi = kprof.support[0]
            r1 = np.exp(-rng.uniform(lo, hi, per_case))
        else:
            r1 = sample_zone(za, per_case)
        if zb == "window":
            lo, hi = kprof.support[-1]
            r2 = np.exp(-rng.uniform(lo, hi, per_case))
        else:
            r2 = sample_zone(zb, per_case)
        d = np.abs(r1 - r2)
        good = d > 0
        ratio = np.abs(dev(r1[good]) - dev(r2[good])) / d[good]
        if ratio.size:
            i = int(np.argmax(ratio))
            by_case[name] = float(ratio[i])
            if ratio[i] > worst[0]:
                rg1, rg2 = r1[good], r2[good]
                worst = (float(ratio[i]), (float(rg1[i]), float(rg2[i])))
        else:
            by_case[name] = 0.0
    return LipschitzReport(pair_count=per_case * len(cases),
                           max_ratio=worst[0], worst_pair=worst[1],
                           by_case=by_case, T=T,
                           predicate=lipschitz_predicate(kprof))


@dataclass
class HolderReport:
    alpha: float
    bound: float
    max_ratio: float
    worst_pair: tuple[float, float]

    @property
    def passed(self) -> bool:
        return self.max_ratio <= self.bound


def holder_check(kprof: KRadialProfile, alpha: float, C: float,
                 pairs: int = 20000, seed: int = 0) -> HolderReport:
    """Check |K(x) - K(y)| <= 4C |x - y|^alpha on the closed 2-ball.

    Follows from the Lipschitz constant C: distances at most 1 lose nothing
    (|d|^alpha >= |d|), distances in [1, 4] cost at most the factor 4.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"Hölder exponent must lie in (0, 1], got {alpha:g}")
    if C <= 0:
        raise ValueError("need a positive certified Lipschitz constant")
    dev = _radial_k_deviation(kprof)
    rng = np.random.default_rng(seed)
    # radii in [0, 2] with a stratum on the splice windows
    lo, hi = -math.log(kprof.support[0][0]), -math.log(kprof.support[-1][1])
    r1 = np.concatenate([rng.uniform(0.0, 2.0, pairs // 2),
                         np.exp(rng.uniform(min(lo, hi), max(lo, hi), pairs - pairs // 2))])
    r2 = rng.uniform(0.0, 2.0, pairs)
    d = np.abs(r1 - r2)
    good = d > 0
    ratio = np.abs(dev(r1[good]) - dev(r2[good])) / d[good] ** alpha
    i = int(np.argmax(ratio))
    rg1, rg2 = r1[good], r2[good]
    return HolderReport(alpha=alpha, bound=4.0 * C, max_ratio=float(ratio[i]),
                        worst_pair=(float(rg1[i]), float(rg2[i])))


# ---------------------------------------------------------------------------
# critical-order smallness over the glued annulus
# ---------------------------------------------------------------------------

@dataclass
class CriticalOrderReport:
    beta: float
    T: float
    max_ratio: float
    witness_t: float

    @property
    def passed(self) -> bool:
        return self.max_ratio <= 1.0


def critical_order_ratio(kprof: KRadialProfile, beta: float,
                         samples: int = 4096) -> tuple[float, float]:
    """Max of |K - 1| / |x|^((n-2)/2 - beta) over the glued annulus."""
    gamma = (kprof.dim.n - 2) / 2.0 - beta
    worst, wt = 0.0, 0.0
    for lo, hi in kprof.mod.windows:
        t = np.linspace(lo, hi, samples)
        ratio = np.abs(kprof.k_deviation(t)) * np.exp(gamma * t)
        i = int(np.argmax(ratio))
        if ratio[i] > worst:
            worst, wt = float(ratio[i]), float(t[i])
    return worst, wt


def critical_order_check(dim: Dimension, beta: float, D: float = 3.0,
                         m: int = 2, tol: float = DEFAULT_TOL,
                         t_start: float | None = None) -> CriticalOrderReport:
    """Doubling-scan period until |K - 1| <= |x|^((n-2)/2 - beta) holds.

    Any n >= 3 works: the deviation decay rate (n-2)/2 strictly exceeds the
    required order (n-2)/2 - beta.
    """
    if not 0.0 < beta < (dim.n - 2) / 2.0:
        raise ValueError(
            f"beta must lie in (0, (n-2)/2) = (0, {(dim.n - 2) / 2:g}), "
            f"got {beta:g}")
    T = t_start if t_start is not None else max(4.0 * D + 2.0, 2.0 * dim.min_period)
    while T <= dim.period_ceiling:
        kprof = compute_K(splice(solve_by_period(dim, T, tol), D, m))
        ratio, wt = critical_order_ratio(kprof, beta)
        if ratio <= 1.0:
            return CriticalOrderReport(beta=beta, T=T, max_ratio=ratio,
                                       witness_t=wt)
        T *= 2.0
    raise RuntimeError("critical-order bound not reached below the period ceiling")
