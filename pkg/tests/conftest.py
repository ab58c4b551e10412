import math

import pytest

from ricci_compare import KappaProfile, ModelManifold, RadialProfile, RadialPotential, build_cheng_model, solve_jacobi


@pytest.fixture(scope="session")
def sphere():
    return ModelManifold(3, 1, RadialProfile.from_selectors("sin"))


@pytest.fixture(scope="session")
def euclid():
    return ModelManifold(3, 0, RadialProfile.from_selectors("r"), extent=20.0)


@pytest.fixture(scope="session")
def gaussian():
    return ModelManifold(3, 0, RadialProfile.from_selectors("r", "linear", 1.0), extent=20.0)


@pytest.fixture(scope="session")
def hyperbolic():
    return ModelManifold(3, 0, RadialProfile.from_selectors("sinh"), extent=10.0)


@pytest.fixture(scope="session")
def logweight():
    return ModelManifold(3, 0, RadialProfile.from_selectors("r", "log", 1.0), extent=20.0)


@pytest.fixture(scope="session")
def mf_one():
    return solve_jacobi(KappaProfile.constant(1.0), 4.0)


@pytest.fixture(scope="session")
def mf_zero():
    return solve_jacobi(KappaProfile.constant(0.0), 25.0)


@pytest.fixture(scope="session")
def mf_third():
    return solve_jacobi(KappaProfile.constant(1.0 / 3.0), 6.0)


@pytest.fixture(scope="session")
def mf_minus_one():
    return solve_jacobi(KappaProfile.constant(-1.0), 10.5)


@pytest.fixture(scope="session")
def cheng():
    return build_cheng_model(3, KappaProfile.constant(1.0), RadialPotential.quadratic(0.05))


SQRT_3PI_HALF = math.sqrt(3 * math.pi) / 2
