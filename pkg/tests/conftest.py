import pytest

from lorenzlab import Params, derive_constants


@pytest.fixture(scope="session")
def p_default():
    return Params()


@pytest.fixture(scope="session")
def c_default(p_default):
    return derive_constants(p_default)


def alpha_of(ahat, c):
    """Transformed-units noise strength for an original-units value."""
    return ahat * c.nu * c.sigma ** 0.5
