"""Stage planning and evaluation of the global blow-up pair (u_b, K).

Each stage conjugates a spliced cylindrical profile by a sphere inversion,
producing a tall bump supported in a small ball U whose center accumulates
at the origin.  Outside the union of the stage balls the solution is
exactly the standard bubble and K is exactly 1, so stages compose by
disjointness alone.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .conformal import Bubble, KelvinMap, standard_solution
from .dimension import Dimension
from .glue import (KRadialProfile, ModifiedProfile, PrecisionCeilingError,
                   choose_T_for_epsilon, compute_K, splice)
from .odecore import DEFAULT_TOL, solve_by_period

#: default margin in e^D >= OFFSET_MARGIN * |xi|, keeping 0 out of closure(U)
OFFSET_MARGIN = 10.0


class PlanError(ValueError):
    """Invalid stage-plan parameters."""


@dataclass
class Stage:
    """One Kelvin-conjugated spliced profile supported in the ball U."""

    dim: Dimension
    xi: np.ndarray
    D: float
    T: float
    m: int
    mod: ModifiedProfile
    kprof: KRadialProfile

    def __post_init__(self):
        self.xi = np.asarray(self.xi, dtype=float)
        if self.xi.shape != (self.dim.n,):
            raise PlanError(f"xi must have shape ({self.dim.n},)")
        if math.exp(self.D) < OFFSET_MARGIN * self.xi_norm * (1.0 - 1e-12):
            raise PlanError(
                f"D = {self.D:g} too small for |xi| = {self.xi_norm:g}: "
                f"need e^D >= {OFFSET_MARGIN:g}|xi| so U avoids the origin")

    @property
    def xi_norm(self) -> float:
        return float(np.linalg.norm(self.xi))

    @property
    def a(self) -> float:
        """Inversion radius; a^2 = 1 + |xi|^2 keeps the standard bubble fixed."""
        return math.sqrt(1.0 + self.xi_norm**2)

    @property
    def kelvin(self) -> KelvinMap:
        return KelvinMap(dim=self.dim, xi=self.xi, a=self.a)

    @property
    def center(self) -> np.ndarray:
        """Accumulation point -xi/|xi|^2 where the stage peak sits."""
        return -self.xi / self.xi_norm**2

    @property
    def ball(self) -> tuple[np.ndarray, float]:
        """Support ball U: the inversion image of |x| <= e^(-D)."""
        return self.kelvin.ball_image(np.zeros(self.dim.n), math.exp(-self.D))

    @property
    def volume(self) -> float:
        n = self.dim.n
        _, r = self.ball
        return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0) * r**n

    @property
    def peak(self) -> float:
        """Value of the stage solution at the center, in closed form.

        The pre-image bump height is e^((m-1)T(n-2)/2), scaled by the
        inversion kernel (|xi|/a)^(n-2) at the center.
        """
        half = (self.dim.n - 2) / 2.0
        return ((self.xi_norm / self.a) ** (self.dim.n - 2)
                * math.exp((self.m - 1) * self.T * half))

    @property
    def diagnostic(self) -> float:
        """Slow-decay violation witness u_b(x_c) |x_c|^((n-2)/2)."""
        return self.peak * (1.0 / self.xi_norm) ** ((self.dim.n - 2) / 2.0)

    # -- radial pre-image evaluation ---------------------------------------

    def u_breve(self, r):
        """The radial spliced solution of the pre-image, with exact tails.

        Equals the standard bubble for r >= e^(-D), the bubble of scale
        e^(-(m-1)T) for r <= e^(-(m-1)T+D), and the spliced profile in
        cylindrical coordinates between.
        """
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        half = (self.dim.n - 2) / 2.0
        out = np.empty_like(r)
        r_out = math.exp(-self.D)
        r_in = math.exp(-(self.m - 1) * self.T + self.D)

        mask = r >= r_out
        if mask.any():
            out[mask] = (1.0 / (1.0 + r[mask] ** 2)) ** half
        mask = r <= r_in
        if mask.any():
            lam = math.exp(-(self.m - 1) * self.T)
            out[mask] = (lam / (lam**2 + r[mask] ** 2)) ** half
        mask = (r > r_in) & (r < r_out)
        if mask.any():
            t = -np.log(r[mask])
            out[mask] = r[mask] ** (-half) * self.mod.v(t)
        return float(out[0]) if scalar else out

    def k_breve(self, r):
        """The radial coefficient of the pre-image; 1 outside the windows."""
        r = np.asarray(r, dtype=float)
        return self.mod.k(-np.log(np.maximum(r, 1e-300)))

    def to_dict(self) -> dict:
        return {
            "xi": [repr(float(c)) for c in self.xi],
            "D": repr(float(self.D)),
            "T": repr(float(self.T)),
            "m": self.m,
            "sup_deviation": repr(float(self.kprof.sup_deviation)),
            "peak": repr(float(self.peak)),
            "diagnostic": repr(float(self.diagnostic)),
        }


def build_stage(dim: Dimension, xi: Sequence[float], D: float, T: float,
                m: int = 2, tol: float = DEFAULT_TOL) -> Stage:
    prof = solve_by_period(dim, T, tol)
    mod = splice(prof, D, m)
    return Stage(dim=dim, xi=np.asarray(xi, dtype=float), D=D, T=T, m=m,
                 mod=mod, kprof=compute_K(mod))


@dataclass
class BlowupSolution:
    """Finite stage list with pairwise-disjoint supports, plus the base bubble."""

    dim: Dimension
    eps: float
    stages: list[Stage]
    infeasible_note: str | None = None
    base: Bubble = field(init=False)

    def __post_init__(self):
        self.base = standard_solution(self.dim)
        balls = [s.ball for s in self.stages]
        for i in range(len(balls)):
            ci, ri = balls[i]
            if float(np.linalg.norm(ci)) <= ri:
                raise PlanError(f"stage {i} support ball contains the origin")
            for j in range(i + 1, len(balls)):
                cj, rj = balls[j]
                gap = float(np.linalg.norm(ci - cj)) - ri - rj
                if gap < max(ri, rj):
                    raise PlanError(
                        f"stage supports {i} and {j} too close: gap {gap:g} "
                        f"below the separation margin {max(ri, rj):g}")

    @property
    def total_measure(self) -> float:
        return sum(s.volume for s in self.stages)

    def _locate(self, x: np.ndarray) -> int | None:
        for i, s in enumerate(self.stages):
            c, r = s.ball
            if float(np.linalg.norm(x - c)) < r:
                return i
        return None

    def eval_u(self, x) -> float:
        """The blow-up solution at a single point x != 0."""
        x = np.asarray(x, dtype=float)
        if not np.any(x):
            raise ValueError("u_b is defined on punctured space; x = 0 rejected")
        i = self._locate(x)
        if i is None:
            return float(self.base(x))
        s = self.stages[i]
        if np.array_equal(x, s.center):
            # the reflection cancels catastrophically at the exact center;
            # the peak is known in closed form
            return s.peak
        km = s.kelvin
        y = km.reflect(x)
        return float(km.conformal_factor(x) * s.u_breve(np.linalg.norm(y)))

    def eval_K(self, x) -> float:
        """The coefficient at a single point x != 0; exactly 1 outside supports."""
        x = np.asarray(x, dtype=float)
        if not np.any(x):
            raise ValueError("K is evaluated on punctured space; x = 0 rejected")
        i = self._locate(x)
        if i is None:
            return 1.0
        s = self.stages[i]
        if np.array_equal(x, s.center):
            return 1.0
        y = s.kelvin.reflect(x)
        return float(s.k_breve(np.linalg.norm(y)))

    def to_dict(self) -> dict:
        d = {
            "version": 1,
            "n": self.dim.n,
            "eps": repr(float(self.eps)),
            "stages": [s.to_dict() for s in self.stages],
            "total_measure": repr(float(self.total_measure)),
        }
        if self.infeasible_note:
            d["infeasible_note"] = self.infeasible_note
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def solution_from_dict(doc: dict, tol: float = DEFAULT_TOL) -> BlowupSolution:
    if doc.get("version") != 1:
        raise ValueError("unsupported plan document version")
    dim = Dimension(int(doc["n"]))
    stages = [build_stage(dim,
                          [float(c) for c in sd["xi"]],
                          float(sd["D"]), float(sd["T"]), int(sd["m"]), tol)
              for sd in doc["stages"]]
    return BlowupSolution(dim=dim, eps=float(doc["eps"]), stages=stages,
                          infeasible_note=doc.get("infeasible_note"))


def blowup_diagnostic(sol: BlowupSolution) -> list[tuple[float, float]]:
    """Per-stage pairs (|x_c|, u_b(x_c) |x_c|^((n-2)/2))."""
    if not sol.stages:
        raise ValueError("diagnostic needs at least one stage")
    return [(1.0 / s.xi_norm, s.diagnostic) for s in sol.stages]


def plan_stages(dim: Dimension, eps: float, count: int, growth: float,
                xi0: float = 8.0, xi_factor: float = 2.0,
                direction: Sequence[float] | None = None,
                m: int = 2, tol: float = DEFAULT_TOL) -> BlowupSolution:
    """Plan `count` stages, each with sup|K-1| <= eps and diagnostic growth.

    The stage period is the larger of the smallest period meeting the
    deviation budget and the closed-form period forcing the diagnostic to
    grow by at least `growth` over its predecessor.  If the precision
    ceiling is hit, the feasible prefix is returned with a note.
    """
    if eps <= 0:
        raise PlanError("eps must be positive")
    if count < 1:
        raise PlanError("count must be >= 1")
    if growth <= 1:
        raise PlanError("growth must exceed 1")
    if direction is None:
        direction = np.zeros(dim.n)
        direction[0] = 1.0
    e = np.asarray(direction, dtype=float)
    e = e / np.linalg.norm(e)

    half = (dim.n - 2) / 2.0
    stages: list[Stage] = []
    note = None
    prev_diag = 0.0
    for i in range(count):
        xi_norm = xi0 * xi_factor**i
        D = math.log(OFFSET_MARGIN * xi_norm)
        a = math.sqrt(1.0 + xi_norm**2)
        kernel = (xi_norm / a) ** (dim.n - 2) * xi_norm ** (-half)
        # small headroom so the planned growth survives roundoff post hoc
        target = max(growth * prev_diag, growth) * (1.0 + 1e-9)
        # diagnostic = kernel * e^((m-1) T half); invert for the growth period
        t_growth = math.log(target / kernel) / ((m - 1) * half)
        try:
            t_eps, kprof = choose_T_for_epsilon(
                dim, D, m, eps, tol=tol,
                t_start=max(4.0 * D + 2.5, t_growth, 4.0 * dim.min_period))
        except PrecisionCeilingError as exc:
            note = f"stage {i} infeasible: {exc}"
            break
        stages.append(Stage(dim=dim, xi=xi_norm * e, D=D, T=t_eps, m=m,
                            mod=kprof.mod, kprof=kprof))
        prev_diag = stages[-1].diagnostic
    return BlowupSolution(dim=dim, eps=eps, stages=stages, infeasible_note=note)
