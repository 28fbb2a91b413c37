import pytest

from blowup import Dimension, compute_K, solve_by_period, splice
from blowup.verify import scan_T_for_lipschitz

SWEEP_T = (15.0, 20.0, 25.0, 30.0, 35.0)


@pytest.fixture(scope="session")
def n3():
    return Dimension(3)


@pytest.fixture(scope="session")
def n5():
    return Dimension(5)


@pytest.fixture(scope="session")
def n3_profiles(n3):
    """Periodic profiles for the standard period sweep, n = 3."""
    return {T: solve_by_period(n3, T) for T in SWEEP_T}


@pytest.fixture(scope="session")
def n3_kprofs(n3_profiles):
    """Coefficient diagnostics of the spliced sweep profiles, D = 3, m = 2."""
    return {T: compute_K(splice(prof, 3.0, 2))
            for T, prof in n3_profiles.items()}


@pytest.fixture(scope="session")
def n5_lipschitz(n5):
    """The n = 5 coefficient accepted by the radial-contraction scan."""
    return scan_T_for_lipschitz(n5, 3.0)
