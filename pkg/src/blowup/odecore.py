"""Periodic cylindrical profiles of v'' = ((n-2)^2/4) v - n(n-2) v^((n+2)/(n-2)).

Profiles are standardized so that a maximum of v sits at t = 0 and are
indexed either by their neck-size (the minimum of v) or by their period.

The solver works in the deviation variable w(t) = v(t) - v_s(t), where
v_s(t) = (2 cosh t)^((2-n)/2) is the canonical profile.  Shooting on the
value of w at the maximum keeps full relative accuracy even when the
deviation is dozens of orders of magnitude below the profile itself,
which is what the gluing diagnostics need at large periods.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .dimension import Dimension

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10


class IntegrationError(RuntimeError):
    """The trajectory left the admissible region or the stepper failed."""


class NoPeriodicOrbitError(ValueError):
    """The requested neck-size or period admits no periodic orbit."""


@dataclass(frozen=True)
class CylState:
    """A point (t, v, v') of a cylindrical trajectory."""

    t: float
    v: float
    vprime: float


# ---------------------------------------------------------------------------
# canonical profile, closed forms
# ---------------------------------------------------------------------------

def _log_2cosh(t):
    t = np.abs(t)
    return t + np.log1p(np.exp(-2.0 * t))


def canonical_v(dim: Dimension, t):
    """v_s(t) = (2 cosh t)^((2-n)/2), overflow-safe for any t."""
    return np.exp((2 - dim.n) / 2.0 * _log_2cosh(t))


def canonical_vprime(dim: Dimension, t):
    return canonical_v(dim, t) * ((2 - dim.n) / 2.0) * np.tanh(t)


def canonical_vsecond(dim: Dimension, t):
    """Second derivative of v_s from the closed form (not via the ODE)."""
    half = (2 - dim.n) / 2.0
    th = np.tanh(t)
    sech2 = 1.0 - th * th
    return canonical_v(dim, t) * (half * half * th * th + half * sech2)


def canonical_vthird(dim: Dimension, t):
    """Third derivative of v_s, via differentiating the ODE once."""
    v = canonical_v(dim, t)
    vp = canonical_vprime(dim, t)
    return dim.quarter_sq * vp - dim.nonlinear_coeff * dim.p * v ** (dim.p - 1) * vp


def canonical_profile(dim: Dimension, t):
    """Evaluate the canonical profile: (v_s, v_s', v_s'')."""
    return canonical_v(dim, t), canonical_vprime(dim, t), canonical_vsecond(dim, t)


def ode_rhs_second(dim: Dimension, v):
    """Right-hand side ((n-2)^2/4) v - n(n-2) v^p of the cylindrical ODE."""
    return dim.quarter_sq * v - dim.nonlinear_coeff * np.asarray(v) ** dim.p


def energy(dim: Dimension, v, vprime):
    """First integral H = v'^2/2 - ((n-2)^2/8) v^2 + ((n-2)^2/2) v^(2n/(n-2))."""
    v = np.asarray(v, dtype=float)
    c = (dim.n - 2) ** 2
    return np.asarray(vprime, dtype=float) ** 2 / 2.0 - (c / 8.0) * v**2 + (c / 2.0) * v**dim.q


# ---------------------------------------------------------------------------
# direct integration
# ---------------------------------------------------------------------------

@dataclass
class Trajectory:
    """Dense output of a direct integration of the cylindrical ODE."""

    dim: Dimension
    states: list[CylState]
    sol: object  # scipy OdeSolution
    tol: float

    def v(self, t):
        return self.sol(np.asarray(t, dtype=float))[0]

    def vprime(self, t):
        return self.sol(np.asarray(t, dtype=float))[1]

    def energy_drift(self) -> float:
        """Max relative sample-to-sample drift of the first integral."""
        h = np.array([energy(self.dim, s.v, s.vprime) for s in self.states])
        return float(np.max(np.abs(h - h[0])) / abs(h[0]))


def integrate(dim: Dimension, initial: CylState, t_span, tol: float = DEFAULT_TOL,
              max_samples: int = 4096) -> Trajectory:
    """Adaptive integration of the cylindrical ODE with dense output.

    Raises IntegrationError if v reaches zero or the stepper gives up.
    """
    if initial.v <= 0:
        raise ValueError("initial v must be positive")
    if tol <= 0:
        raise ValueError("tol must be positive")
    t0, t1 = float(t_span[0]), float(t_span[1])

    def rhs(t, y):
        return (y[1], dim.quarter_sq * y[0] - dim.nonlinear_coeff * y[0] ** dim.p)

    def hit_zero(t, y):
        return y[0]

    hit_zero.terminal = True
    hit_zero.direction = -1

    sol = solve_ivp(rhs, (t0, t1), [initial.v, initial.vprime], method="DOP853",
                    rtol=max(tol * 1e-2, 1e-13), atol=tol * 1e-3,
                    dense_output=True, events=hit_zero)
    if sol.t_events[0].size:
        raise IntegrationError(f"v reached 0 at t = {sol.t_events[0][0]:.6g}")
    if not sol.success:
        raise IntegrationError(sol.message)
    ts = np.linspace(t0, t1, max_samples)
    vv, vp = sol.sol(ts)
    states = [CylState(float(t), float(a), float(b)) for t, a, b in zip(ts, vv, vp)]
    return Trajectory(dim=dim, states=states, sol=sol.sol, tol=tol)


# ---------------------------------------------------------------------------
# deviation shooting
# ---------------------------------------------------------------------------

def _power_diff(dim: Dimension, v_s, w):
    """(v_s + w)^p - v_s^p without cancellation, valid for any |w| < v_s scale."""
    r = w / v_s
    return v_s**dim.p * np.expm1(dim.p * np.log1p(r))


def _shoot_half(dim: Dimension, z: float, t_max: float, tol: float):
    """Integrate w from the maximum (w0 = -e^z, w0' = 0) to the next neck.

    Returns (t_half, eta, dense_solution); t_half is None if no neck was
    reached before t_max.
    """
    w0 = -math.exp(z)

    def rhs(t, y):
        return (y[1], dim.quarter_sq * y[0] - dim.nonlinear_coeff * _power_diff(dim, canonical_v(dim, t), y[0]))

    def neck(t, y):
        # v' = w' + v_s' crosses zero upward exactly at the neck
        return y[1] + canonical_vprime(dim, t)

    neck.terminal = True
    neck.direction = 1

    sol = solve_ivp(rhs, (0.0, t_max), [w0, 0.0], method="DOP853",
                    rtol=max(tol * 1e-2, 1e-13), atol=abs(w0) * 1e-14,
                    dense_output=True, events=neck)
    if not sol.success:
        raise IntegrationError(sol.message)
    if not sol.t_events[0].size:
        return None, None, sol
    th = float(sol.t_events[0][0])
    w_n = float(sol.sol(th)[0])
    eta = float(canonical_v(dim, th)) + w_n
    return th, eta, sol


@dataclass
class DelaunayProfile:
    """A standardized periodic profile with period T and neck-size eta.

    Stored as the deviation w = v - v_s on the half period [0, T/2];
    evaluation anywhere uses periodicity and even symmetry about t = 0.
    """

    dim: Dimension
    T: float
    eta: float
    tol: float
    _wsol: object
    _samples: np.ndarray | None = field(default=None, repr=False)

    @property
    def vmax(self) -> float:
        return float(canonical_v(self.dim, 0.0)) + float(self._wsol(0.0)[0])

    def _fold(self, t):
        t = np.asarray(t, dtype=float)
        s = np.mod(t, self.T)
        sign = np.where(s > self.T / 2.0, -1.0, 1.0)
        s = np.where(s > self.T / 2.0, self.T - s, s)
        return s, sign

    def w(self, t):
        """Deviation v_T(t) - v_s(t - kT) about the nearest bump center kT."""
        s, _ = self._fold(t)
        return self._wsol(s)[0]

    def wprime(self, t):
        s, sign = self._fold(t)
        return sign * self._wsol(s)[1]

    def v(self, t):
        s, _ = self._fold(t)
        return canonical_v(self.dim, s) + self._wsol(s)[0]

    def vprime(self, t):
        s, sign = self._fold(t)
        return sign * (canonical_vprime(self.dim, s) + self._wsol(s)[1])

    def vsecond(self, t):
        return ode_rhs_second(self.dim, self.v(t))

    def state(self, t: float) -> CylState:
        return CylState(float(t), float(self.v(t)), float(self.vprime(t)))

    def samples(self, num: int = 2048) -> np.ndarray:
        """Uniform samples (t, v, v') over one full period."""
        if self._samples is None or self._samples.shape[0] != num:
            ts = np.linspace(0.0, self.T, num, endpoint=False)
            self._samples = np.column_stack([ts, self.v(ts), self.vprime(ts)])
        return self._samples


def _warn_if_extreme(dim: Dimension, T: float) -> None:
    if T > 0.9 * dim.period_ceiling:
        warnings.warn(
            f"period T = {T:g} is close to the precision ceiling "
            f"{dim.period_ceiling:g} for n = {dim.n}; neck-size quantities "
            "approach double-precision underflow", RuntimeWarning, stacklevel=3)


def _solve_profile(dim: Dimension, kind: str, target: float, tol: float) -> DelaunayProfile:
    """Root-find the deviation-at-maximum so the half-period shot hits target.

    kind is 'period' (target = T) or 'neck' (target = eta).
    """
    vs0 = float(canonical_v(dim, 0.0))
    z_hi = math.log(vs0 - dim.v_cyl) - 1e-9

    if kind == "period":
        T_est = target
    else:
        # first guess from the asymptotic law ln(eta) ~ -(n-2)T/4
        T_est = max(-4.0 * math.log(target) / (dim.n - 2) + 8.0, 2.0 * dim.min_period)
    _warn_if_extreme(dim, T_est)
    t_max = 1.6 * T_est + 10.0

    def objective(z):
        th, eta, _ = _shoot_half(dim, z, t_max, tol)
        if kind == "period":
            return (th if th is not None else t_max) - target / 2.0
        return (eta if eta is not None else dim.v_cyl) - target

    # objective is monotone decreasing in -z for 'period' and increasing for
    # 'neck'; expand the lower end until the signs bracket a root
    z_lo = min(-(dim.n - 2) * T_est / 2.0, z_hi - 5.0)
    f_hi = objective(z_hi)
    f_lo = objective(z_lo)
    for _ in range(80):
        if f_lo * f_hi <= 0:
            break
        z_lo -= 6.0
        if z_lo < math.log(1e-290):
            raise NoPeriodicOrbitError(
                f"target {kind} = {target:g} beyond the double-precision "
                f"ceiling for n = {dim.n}")
        f_lo = objective(z_lo)
    if f_lo * f_hi > 0:
        raise NoPeriodicOrbitError(
            f"could not bracket a periodic orbit for {kind} = {target:g}")

    z = brentq(objective, z_lo, z_hi, xtol=1e-13, rtol=8.9e-16)
    th, eta, sol = _shoot_half(dim, z, t_max, tol)
    if th is None:
        raise IntegrationError("shot lost the neck after root-finding")
    return DelaunayProfile(dim=dim, T=2.0 * th, eta=eta, tol=tol, _wsol=sol.sol)


def solve_by_neck(dim: Dimension, eta: float, tol: float = DEFAULT_TOL) -> DelaunayProfile:
    """Profile whose minimum over a period equals eta (0 < eta < v_cyl)."""
    if eta <= 0:
        raise NoPeriodicOrbitError(f"neck-size must be positive, got {eta:g}")
    if eta >= dim.v_cyl:
        raise NoPeriodicOrbitError(
            f"neck-size {eta:g} >= constant solution v_cyl = {dim.v_cyl:.12g}; "
            "no periodic orbit")
    return _solve_profile(dim, "neck", eta, tol)


def solve_by_period(dim: Dimension, T: float, tol: float = DEFAULT_TOL) -> DelaunayProfile:
    """Profile with the given period T (T above the minimal period)."""
    if T <= dim.min_period:
        raise NoPeriodicOrbitError(
            f"period {T:g} is at or below the minimal period "
            f"{dim.min_period:.12g} = 2*pi/sqrt(n-2) for n = {dim.n}")
    prof = _solve_profile(dim, "period", T, tol)
    if abs(prof.T - T) > max(100 * tol, 1e-8 * T):
        raise IntegrationError(
            f"period missed: requested {T:g}, got {prof.T:.12g}")
    return prof


# ---------------------------------------------------------------------------
# neck-size / period law
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NeckPeriodFit:
    slope: float
    intercept: float
    residual: float
    c_bound: float
    periods: tuple
    necks: tuple


def fit_neck_period_law(dim: Dimension, T_list: Sequence[float],
                        tol: float = DEFAULT_TOL,
                        min_T: float = 10.0) -> NeckPeriodFit:
    """Least-squares fit of ln(eta) against T over the given periods."""
    Ts = [float(T) for T in T_list]
    if len(Ts) < 3:
        raise ValueError("need at least 3 periods for the fit")
    if min(Ts) < min_T:
        raise ValueError(f"all periods must be >= {min_T:g} for the asymptotic law")
    if max(Ts) - min(Ts) < 1e-9:
        raise ValueError("degenerate fit: identical periods")
    etas = [solve_by_period(dim, T, tol).eta for T in Ts]
    ln_eta = np.log(etas)
    slope, intercept = np.polyfit(Ts, ln_eta, 1)
    shifted = ln_eta + (dim.n - 2) / 4.0 * np.asarray(Ts)
    residual = float(np.max(np.abs(shifted - intercept)))
    return NeckPeriodFit(slope=float(slope), intercept=float(intercept),
                         residual=residual,
                         c_bound=float(np.exp(np.max(np.abs(shifted)))),
                         periods=tuple(Ts), necks=tuple(etas))
