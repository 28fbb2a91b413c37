"""Ambient dimension and the constants derived from it."""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Dimension:
    """Ambient dimension n >= 3 of the critical-exponent equation.

    Carries the derived exponents and balance constants used throughout:
    the critical exponent p = (n+2)/(n-2), the first-integral power
    q = 2n/(n-2), and the constant cylindrical solution v_cyl.
    """

    n: int

    def __post_init__(self):
        if not isinstance(self.n, int) or isinstance(self.n, bool):
            raise TypeError(f"dimension must be an integer, got {self.n!r}")
        if self.n < 3:
            raise ValueError(f"dimension must be >= 3, got {self.n}")

    @property
    def p(self) -> float:
        """Critical exponent (n+2)/(n-2)."""
        return (self.n + 2) / (self.n - 2)

    @property
    def q(self) -> float:
        """Power 2n/(n-2) appearing in the first integral."""
        return 2 * self.n / (self.n - 2)

    @property
    def quarter_sq(self) -> float:
        """Linear coefficient (n-2)^2/4 of the cylindrical equation."""
        return (self.n - 2) ** 2 / 4.0

    @property
    def nonlinear_coeff(self) -> float:
        """Coefficient n(n-2) of the nonlinear term."""
        return float(self.n * (self.n - 2))

    @property
    def v_cyl(self) -> float:
        """Constant solution ((n-2)/(4n))^((n-2)/4) of the cylindrical ODE."""
        return ((self.n - 2) / (4.0 * self.n)) ** ((self.n - 2) / 4.0)

    @property
    def v_canonical_max(self) -> float:
        """Peak value 2^((2-n)/2) of the canonical cylindrical profile."""
        return 2.0 ** ((2 - self.n) / 2.0)

    @property
    def min_period(self) -> float:
        """Infimum 2*pi/sqrt(n-2) of periods, from linearizing at v_cyl."""
        return 2.0 * math.pi / math.sqrt(self.n - 2)

    @property
    def period_ceiling(self) -> float:
        """Period beyond which the neck-size underflows double precision."""
        # deviation at the maximum ~ eta^2 ~ e^{-(n-2)T/2} must stay above ~1e-290
        return 2 * 660.0 / (self.n - 2)
