"""Cut-and-glue-in of periodic profiles with the canonical profile.

Splices an m-cycle periodic profile v_T with translates of the canonical
profile v_s through a C^3 polynomial cutoff, and evaluates the coefficient
K induced by the spliced function together with its derivative, supremum
deviation from 1 and Lipschitz diagnostics.

All coefficient quantities are computed in the deviation variable
w = v_T - v_s so that K - 1 (which scales like the squared neck-size)
retains full relative accuracy at large periods.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dimension import Dimension
from .odecore import (DEFAULT_TOL, DelaunayProfile, canonical_v,
                      canonical_vprime, ode_rhs_second, solve_by_period)

# degree-7 smoothstep on [0, 1] and its derivatives
_S = lambda x: x**4 * (35.0 - 84.0 * x + 70.0 * x**2 - 20.0 * x**3)
_S1 = lambda x: 140.0 * x**3 * (1.0 - x) ** 3
_S2 = lambda x: 420.0 * x**2 * (1.0 - x) ** 2 * (1.0 - 2.0 * x)
_S3 = lambda x: 840.0 * x * (1.0 - x) * (1.0 - 5.0 * x + 5.0 * x**2)

#: smallest half-width for which the scaled degree-7 transition satisfies
#: the |phi'''| <= 2D derivative bound (52.5 / D^3 <= 2D)
MIN_HALF_WIDTH = (52.5 / 2.0) ** 0.25


class CutoffBoundError(ValueError):
    """The transition violates the required derivative bounds."""


class PrecisionCeilingError(RuntimeError):
    """The scan hit the double-precision period ceiling before succeeding."""


@dataclass(frozen=True)
class Cutoff:
    """C^3 cutoff: 1 for t <= D, 0 for t >= 2D, degree-7 transition between.

    The first three derivatives are bounded by 2D on the transition window,
    which the constructor verifies by dense sampling.
    """

    D: float
    degree: int = 7

    def __post_init__(self):
        if self.D < 1.0:
            raise ValueError(f"half-width D must be >= 1, got {self.D:g}")
        x = np.linspace(0.0, 1.0, 20001)
        bound = 2.0 * self.D
        worst = max(np.max(np.abs(_S1(x))) / self.D,
                    np.max(np.abs(_S2(x))) / self.D**2,
                    np.max(np.abs(_S3(x))) / self.D**3)
        if worst > bound:
            raise CutoffBoundError(
                f"D = {self.D:g} too small: transition derivative reaches "
                f"{worst:.4g} > 2D = {bound:g} (need D >= {MIN_HALF_WIDTH:.4g})")

    @property
    def window(self) -> tuple[float, float]:
        return (self.D, 2.0 * self.D)

    def _x(self, t):
        return np.clip((np.asarray(t, dtype=float) - self.D) / self.D, 0.0, 1.0)

    def phi1(self, t):
        return 1.0 - _S(self._x(t))

    def phi2(self, t):
        return _S(self._x(t))

    def d1(self, t):
        x = self._x(t)
        return np.where((x > 0) & (x < 1), -_S1(x) / self.D, 0.0)

    def d2(self, t):
        x = self._x(t)
        return np.where((x > 0) & (x < 1), -_S2(x) / self.D**2, 0.0)

    def d3(self, t):
        x = self._x(t)
        return np.where((x > 0) & (x < 1), -_S3(x) / self.D**3, 0.0)


def build_cutoff(D: float) -> Cutoff:
    """Cutoff with verified derivative bounds on the window [D, 2D]."""
    return Cutoff(D=float(D))


def power_lipschitz_constant(alpha: float, lo: float, hi: float) -> float:
    """Lipschitz constant of x -> x^alpha on [lo, hi]: alpha*max endpoint slope."""
    if not 0 < lo <= hi:
        raise ValueError("need 0 < lo <= hi")
    return alpha * max(lo ** (alpha - 1.0), hi ** (alpha - 1.0))


# ---------------------------------------------------------------------------
# spliced profile
# ---------------------------------------------------------------------------

class SpliceError(ValueError):
    """Invalid splice layout (overlapping windows, bad cycle count)."""


@dataclass
class ModifiedProfile:
    """The m-cycle spliced function: v_s translates glued into v_T.

    Bump centers sit at kT for k = 0..m-1; the function equals v_s(t - kT)
    within distance D of each center, v_T between the transition windows,
    and a cutoff blend on each window of width D.
    """

    base: DelaunayProfile
    D: float
    m: int
    cutoff: Cutoff = field(init=False)

    def __post_init__(self):
        if self.m < 2:
            raise SpliceError(f"cycle count m must be >= 2, got {self.m}")
        if self.base.T <= 4.0 * self.D:
            raise SpliceError(
                f"period T = {self.base.T:g} must exceed 4D = {4 * self.D:g} "
                "so the splice windows stay disjoint")
        self.cutoff = build_cutoff(self.D)

    @property
    def dim(self) -> Dimension:
        return self.base.dim

    @property
    def T(self) -> float:
        return self.base.T

    @property
    def eta(self) -> float:
        return self.base.eta

    @property
    def windows(self) -> list[tuple[float, float]]:
        """The 2(m-1) transition windows, in increasing order."""
        out = []
        for k in range(self.m - 1):
            out.append((k * self.T + self.D, k * self.T + 2.0 * self.D))
            out.append(((k + 1) * self.T - 2.0 * self.D, (k + 1) * self.T - self.D))
        return out

    # -- zone classification ------------------------------------------------

    def _frame(self, t):
        """Map t to the local window coordinate s and orientation sigma.

        Returns (s, sigma, zone) arrays where zone is 0 for pure canonical,
        1 for a blend window (s in [D, 2D], d/dt = sigma * d/ds) and 2 for
        pure v_T.  s is always the distance to the nearest bump center,
        clipped into [0, T/2].
        """
        t = np.asarray(t, dtype=float)
        k = np.clip(np.round(t / self.T), 0, self.m - 1)
        s_signed = t - k * self.T
        sigma = np.where(s_signed >= 0, 1.0, -1.0)
        s = np.abs(s_signed)
        # beyond the outermost bumps the profile is canonical for good
        outer = ((t <= 0) & (k == 0)) | ((t >= (self.m - 1) * self.T) & (k == self.m - 1))
        zone = np.where(s <= self.D, 0, np.where(s < 2.0 * self.D, 1, 2))
        zone = np.where(outer, 0, zone)
        return s, sigma, zone

    # -- evaluation ---------------------------------------------------------

    def _blend_parts(self, s):
        """Everything needed on a blend window, as functions of s in [D, 2D]."""
        dim = self.dim
        w = self.base.w(s)
        wp = self.base.wprime(s)
        vs = canonical_v(dim, s)
        vsp = canonical_vprime(dim, s)
        phi2 = self.cutoff.phi2(s)
        d1 = self.cutoff.d1(s)
        d2 = self.cutoff.d2(s)
        r = w / vs
        wpp = dim.quarter_sq * w - dim.nonlinear_coeff * vs**dim.p * np.expm1(dim.p * np.log1p(r))
        v = vs + phi2 * w
        vp = vsp - d1 * w + phi2 * wp
        vss = ode_rhs_second(dim, vs)
        vpp = vss - d2 * w - 2.0 * d1 * wp + phi2 * wpp
        return w, wp, wpp, vs, vsp, phi2, r, v, vp, vpp

    def values(self, t):
        """(v, v', v'') of the spliced function, vectorized."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        s, sigma, zone = self._frame(t)
        v = np.empty_like(t)
        vp = np.empty_like(t)
        vpp = np.empty_like(t)

        mask = zone == 0
        if mask.any():
            v[mask] = canonical_v(self.dim, s[mask])
            vp[mask] = sigma[mask] * canonical_vprime(self.dim, s[mask])
            vpp[mask] = ode_rhs_second(self.dim, v[mask])
        mask = zone == 1
        if mask.any():
            _, _, _, _, _, _, _, bv, bvp, bvpp = self._blend_parts(s[mask])
            v[mask] = bv
            vp[mask] = sigma[mask] * bvp
            vpp[mask] = bvpp
        mask = zone == 2
        if mask.any():
            v[mask] = self.base.v(t[mask])
            vp[mask] = self.base.vprime(t[mask])
            vpp[mask] = ode_rhs_second(self.dim, v[mask])
        if scalar:
            return float(v[0]), float(vp[0]), float(vpp[0])
        return v, vp, vpp

    def v(self, t):
        return self.values(t)[0]

    def vsecond(self, t):
        return self.values(t)[2]

    # -- induced coefficient ------------------------------------------------

    def _deviation_parts(self, s, want_derivative: bool):
        """K - 1 (and optionally d(K-1)/ds) on a blend window.

        Grouped so every term is proportional to the deviation w; no
        large-term cancellation occurs at any period.
        """
        dim = self.dim
        p = dim.p
        nn = dim.nonlinear_coeff
        w, wp, wpp, vs, vsp, phi2, r, v, vp, _ = self._blend_parts(s)
        phi1 = 1.0 - phi2
        d1 = self.cutoff.d1(s)
        d2 = self.cutoff.d2(s)

        A = np.expm1(p * np.log1p(r))          # (1+r)^p - 1
        B = np.expm1(p * np.log1p(phi2 * r))   # (1+phi2 r)^p - 1
        small = np.abs(r) < 1e-6
        # convexity gap phi1 vs^p + phi2 vT^p - vblend^p = vs^p * g
        g = np.where(small, 0.5 * p * (p - 1.0) * phi1 * phi2 * r**2, phi2 * A - B)
        vs_p = vs**p
        U = nn * vs_p * g + 2.0 * d1 * wp + d2 * w
        V = nn * vs_p * (1.0 + B)
        dev = U / V
        if not want_derivative:
            return dev, None

        d3 = self.cutoff.d3(s)
        rp = (wp - r * vsp) / vs
        Ap = p * (1.0 + A) * rp / (1.0 + r)
        Bp = p * (1.0 + B) * (-d1 * r + phi2 * rp) / (1.0 + phi2 * r)
        gp_small = 0.5 * p * (p - 1.0) * (-d1 * (phi2 - phi1) * r**2 + 2.0 * phi1 * phi2 * r * rp)
        gp = np.where(small, gp_small, -d1 * A + phi2 * Ap - Bp)
        vs_p_prime = p * vs ** (p - 1.0) * vsp
        Up = nn * (vs_p_prime * g + vs_p * gp) + 2.0 * d2 * wp + 2.0 * d1 * wpp + d3 * w + d2 * wp
        Vp = nn * (vs_p_prime * (1.0 + B) + vs_p * Bp)
        devp = Up / V - dev * (Vp / V)
        return dev, devp

    def k(self, t):
        """The induced coefficient; exactly 1 outside the transition windows."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        s, _, zone = self._frame(t)
        out = np.ones_like(t)
        mask = zone == 1
        if mask.any():
            dev, _ = self._deviation_parts(s[mask], want_derivative=False)
            out[mask] = 1.0 + dev
        return float(out[0]) if scalar else out

    def k_deviation(self, t):
        """K(t) - 1, computed at full relative accuracy."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        s, _, zone = self._frame(t)
        out = np.zeros_like(t)
        mask = zone == 1
        if mask.any():
            dev, _ = self._deviation_parts(s[mask], want_derivative=False)
            out[mask] = dev
        return float(out[0]) if scalar else out

    def kprime(self, t):
        """Closed-form derivative of the induced coefficient."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        s, sigma, zone = self._frame(t)
        out = np.zeros_like(t)
        mask = zone == 1
        if mask.any():
            _, devp = self._deviation_parts(s[mask], want_derivative=True)
            out[mask] = sigma[mask] * devp
        return float(out[0]) if scalar else out


def splice(base: DelaunayProfile, D: float, m: int) -> ModifiedProfile:
    """Build the m-cycle spliced profile from a periodic base profile."""
    return ModifiedProfile(base=base, D=float(D), m=int(m))


# ---------------------------------------------------------------------------
# induced-coefficient diagnostics
# ---------------------------------------------------------------------------

@dataclass
class KRadialProfile:
    """Diagnostics of the induced coefficient of one spliced profile."""

    mod: ModifiedProfile
    sup_deviation: float
    sup_witness_t: float
    lipschitz_estimate: float
    max_abs_kprime: float
    min_k: float
    samples_per_window: int

    @property
    def dim(self) -> Dimension:
        return self.mod.dim

    @property
    def eta(self) -> float:
        return self.mod.eta

    @property
    def support(self) -> list[tuple[float, float]]:
        return self.mod.windows

    def k(self, t):
        return self.mod.k(t)

    def k_deviation(self, t):
        return self.mod.k_deviation(t)

    def kprime(self, t):
        return self.mod.kprime(t)


def compute_K(mod: ModifiedProfile, samples_per_window: int = 4096) -> KRadialProfile:
    """Dense diagnostics of the induced coefficient.

    The deviation pattern is identical on every glue-out window and mirrored
    on every glue-in window (periodicity of v_T, even symmetry of v_s), so
    dense work happens once on the window coordinate s in [D, 2D].
    """
    D = mod.D
    s = np.linspace(D, 2.0 * D, samples_per_window)
    dev, devp = mod._deviation_parts(s, want_derivative=True)
    vblend = mod._blend_parts(s)[7]
    if np.any(vblend <= 0):
        raise SpliceError("spliced profile is not positive on a window")

    i = int(np.argmax(np.abs(dev)))
    lo, hi = s[max(i - 1, 0)], s[min(i + 1, samples_per_window - 1)]
    # Chebyshev-clustered refinement around the detected extremum
    theta = np.cos(np.pi * np.arange(513) / 512.0)
    s_ref = 0.5 * (lo + hi) + 0.5 * (hi - lo) * theta
    dev_ref, _ = mod._deviation_parts(s_ref, want_derivative=False)
    sup = max(float(np.max(np.abs(dev))), float(np.max(np.abs(dev_ref))))
    t_witness = float(s_ref[np.argmax(np.abs(dev_ref))]) if np.max(np.abs(dev_ref)) >= np.max(np.abs(dev)) else float(s[i])

    lip = float(np.max(np.abs(np.diff(1.0 + dev)) / np.diff(s)))
    return KRadialProfile(mod=mod,
                          sup_deviation=sup,
                          sup_witness_t=t_witness,
                          lipschitz_estimate=lip,
                          max_abs_kprime=float(np.max(np.abs(devp))),
                          min_k=float(1.0 + np.min(dev)),
                          samples_per_window=samples_per_window)


def choose_T_for_epsilon(dim: Dimension, D: float, m: int, eps: float,
                         tol: float = DEFAULT_TOL,
                         t_start: float | None = None,
                         t_step: float = 2.5,
                         profile_solver: Callable = solve_by_period) -> tuple[float, KRadialProfile]:
    """Smallest grid period T with sup |K - 1| <= eps.

    Scans the grid t_start + k*t_step upward with extrapolated jumps (the
    deviation decays like exp(-(n-2)T/2)), then backtracks to the smallest
    passing grid point.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if D < 1.0:
        raise ValueError("D must be >= 1")
    if t_start is None:
        t_start = max(4.0 * D + t_step, 4.0 * dim.min_period)

    def probe(T):
        prof = profile_solver(dim, T, tol)
        return compute_K(splice(prof, D, m))

    rate = 0.45 * (dim.n - 2)  # conservative decay rate of sup|K-1| in T
    results: dict[int, KRadialProfile] = {}

    def grid_T(k):
        return t_start + k * t_step

    k = 0
    best = None
    while True:
        if grid_T(k) > dim.period_ceiling:
            raise PrecisionCeilingError(
                f"sup|K-1| <= {eps:g} not reachable below the period ceiling "
                f"{dim.period_ceiling:g} for n = {dim.n}")
        kp = probe(grid_T(k))
        results[k] = kp
        if kp.sup_deviation <= eps:
            best = k
            break
        jump = math.log(kp.sup_deviation / eps) / rate
        k += max(1, int(jump / t_step))

    # walk back on the grid to the smallest passing point
    lo = max([j for j in results if results[j].sup_deviation > eps], default=-1)
    hi = best
    while hi - lo > 1:
        mid = (lo + hi) // 2
        kp = results.get(mid) or probe(grid_T(mid))
        results[mid] = kp
        if kp.sup_deviation <= eps:
            hi = mid
        else:
            lo = mid
    return grid_T(hi), results[hi]
