"""Kelvin reflections, standard bubbles, and the cylinder/space dictionary.

The scalar-curvature-type equation is conformally covariant: pulling a
solution back through a sphere inversion and multiplying by the conformal
factor yields another solution.  This module implements the inversion, its
action on the standard bubble family, and the radial change of variables
t = -ln|x|, v = |x|^{(n-2)/2} u that turns radial solutions into
cylindrical profiles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dimension import Dimension


@dataclass(frozen=True)
class Bubble:
    """Standard bubble (lam / (lam^2 + |x - center|^2))^((n-2)/2).

    Solves the critical equation with unit coefficient; the family is
    parametrized by scale lam > 0 and center.
    """

    dim: Dimension
    lam: float
    center: np.ndarray

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError(f"bubble scale must be positive, got {self.lam:g}")
        c = np.asarray(self.center, dtype=float)
        if c.shape != (self.dim.n,):
            raise ValueError(f"center must have shape ({self.dim.n},), got {c.shape}")
        object.__setattr__(self, "center", c)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        d2 = np.sum((x - self.center) ** 2, axis=-1)
        return (self.lam / (self.lam**2 + d2)) ** ((self.dim.n - 2) / 2.0)

    @property
    def peak(self) -> float:
        return self.lam ** ((2 - self.dim.n) / 2.0)


def standard_solution(dim: Dimension) -> Bubble:
    """The bubble with lam = 1 centered at the origin."""
    return Bubble(dim=dim, lam=1.0, center=np.zeros(dim.n))


@dataclass(frozen=True)
class KelvinMap:
    """Inversion x -> xi + a^2 (x - xi)/|x - xi|^2 in the sphere S(xi, a)."""

    dim: Dimension
    xi: np.ndarray
    a: float

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError(f"inversion radius must be positive, got {self.a:g}")
        xi = np.asarray(self.xi, dtype=float)
        if xi.shape != (self.dim.n,):
            raise ValueError(f"center must have shape ({self.dim.n},), got {xi.shape}")
        object.__setattr__(self, "xi", xi)

    def reflect(self, x):
        x = np.asarray(x, dtype=float)
        y = x - self.xi
        d2 = np.sum(y * y, axis=-1, keepdims=True)
        return self.xi + self.a**2 * y / d2

    def conformal_factor(self, x):
        """The weight (a / |x - xi|)^(n-2) multiplying the pulled-back function."""
        x = np.asarray(x, dtype=float)
        d = np.sqrt(np.sum((x - self.xi) ** 2, axis=-1))
        return (self.a / d) ** (self.dim.n - 2)

    def transform(self, u: Callable) -> Callable:
        """Pull a solution back through the inversion with its conformal weight."""
        def u_tilde(x):
            return self.conformal_factor(x) * u(self.reflect(x))
        return u_tilde

    def ball_image(self, center: np.ndarray, radius: float) -> tuple[np.ndarray, float]:
        """Image of the ball B(center, radius); must not meet the sphere center.

        For a ball not containing xi the image is again a ball; its center is
        not the image of the original center.
        """
        center = np.asarray(center, dtype=float)
        y = center - self.xi
        d2 = float(np.sum(y * y))
        if radius <= 0:
            raise ValueError("radius must be positive")
        if d2 <= radius**2:
            raise ValueError("ball contains the inversion center; image is unbounded")
        denom = d2 - radius**2
        new_center = self.xi + self.a**2 * y / denom
        new_radius = self.a**2 * radius / denom
        return new_center, new_radius


def kelvin_of_bubble(kmap: KelvinMap, bubble: Bubble) -> Bubble:
    """The inversion maps the bubble family to itself; return the image bubble.

    With mu = lam^2 + |center - xi|^2 the image has scale a^2 lam / mu and
    center xi + a^2 (center - xi) / mu.
    """
    if bubble.dim != kmap.dim:
        raise ValueError("dimension mismatch between map and bubble")
    y = bubble.center - kmap.xi
    mu = bubble.lam**2 + float(np.sum(y * y))
    return Bubble(dim=bubble.dim,
                  lam=kmap.a**2 * bubble.lam / mu,
                  center=kmap.xi + kmap.a**2 * y / mu)


def symmetric_radius(xi: np.ndarray, lam: float = 1.0) -> float:
    """Radius a = sqrt(lam^2 + |xi|^2) for which the bubble of scale lam at the
    origin is a fixed point of the inversion in S(xi, a)."""
    xi = np.asarray(xi, dtype=float)
    return math.sqrt(lam**2 + float(np.sum(xi * xi)))


def offset_source(xi: np.ndarray) -> np.ndarray:
    """Image -xi/|xi|^2 of the origin under inversion in S(xi, sqrt(1+|xi|^2)).

    A singular tower concentrated at the origin is carried to this point,
    which accumulates at the origin as |xi| grows; that is how countably
    many blow-up points are packed into a bounded set.
    """
    xi = np.asarray(xi, dtype=float)
    d2 = float(np.sum(xi * xi))
    if d2 == 0:
        raise ValueError("offset undefined for xi = 0")
    return -xi / d2


# ---------------------------------------------------------------------------
# cylinder dictionary
# ---------------------------------------------------------------------------

def euclid_to_cyl(dim: Dimension, r, u):
    """Radial solution to cylindrical profile: v(t) = r^((n-2)/2) u(r), t = -ln r."""
    r = np.asarray(r, dtype=float)
    return -np.log(r), r ** ((dim.n - 2) / 2.0) * np.asarray(u, dtype=float)


def cyl_to_euclid(dim: Dimension, t, v):
    """Cylindrical profile to radial solution: u(r) = r^((2-n)/2) v(-ln r)."""
    t = np.asarray(t, dtype=float)
    r = np.exp(-t)
    return r, r ** ((2 - dim.n) / 2.0) * np.asarray(v, dtype=float)


@dataclass(frozen=True)
class RadialEuclidFunction:
    """Radial function of |x| given by a cylindrical profile in t = -ln r."""

    dim: Dimension
    profile: Callable
    profile_prime: Callable | None = None

    def radial(self, r):
        r = np.asarray(r, dtype=float)
        return r ** ((2 - self.dim.n) / 2.0) * self.profile(-np.log(r))

    def radial_prime(self, r):
        if self.profile_prime is None:
            raise ValueError("profile derivative not supplied")
        r = np.asarray(r, dtype=float)
        t = -np.log(r)
        half = (2 - self.dim.n) / 2.0
        return r ** (half - 1.0) * (half * self.profile(t) - self.profile_prime(t))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.radial(np.sqrt(np.sum(x * x, axis=-1)))


def bubble_profile(dim: Dimension, lam: float):
    """Cylindrical profile of the origin-centered bubble of scale lam.

    Equals the canonical profile translated by ln lam:
    v(t) = (lam e^{-t} / (lam^2 + e^{-2t}))^((n-2)/2)
         = (2 cosh(t + ln lam))^((2-n)/2).
    """
    shift = math.log(lam)

    def prof(t):
        from .odecore import canonical_v
        return canonical_v(dim, np.asarray(t, dtype=float) + shift)
    return prof


def translation_lemma_check(dim: Dimension, lam1: float, lam2: float,
                            t_grid=None) -> float:
    """Max gap between the profiles of two bubble scales after translating
    by ln(lam2/lam1).  Exact bubble covariance makes this zero."""
    if t_grid is None:
        t_grid = np.linspace(-20.0, 20.0, 4001)
    p1 = bubble_profile(dim, lam1)
    p2 = bubble_profile(dim, lam2)
    tbar = math.log(lam1 / lam2)
    return float(np.max(np.abs(p1(t_grid) - p2(t_grid + tbar))))
