import numpy as np
import pytest

from conjgen.function_space import BasisFunction, FeatureBasis
from conjgen.number_theory import build_pi_table, grid_dataset
from conjgen.simple_groups import build_catalog


@pytest.fixture(scope="session")
def table_small():
    return build_pi_table(10_000)


@pytest.fixture(scope="session")
def table_mid():
    return build_pi_table(40_000)


@pytest.fixture(scope="session")
def table_big():
    return build_pi_table(4_000_000)


@pytest.fixture(scope="session")
def catalog():
    return build_catalog()


def hl_basis(table, variables=("a", "b"), basis_id="hl2"):
    """{pi(a)+pi(b), pi(a*b), pi(a+b)} over two variables."""
    entries = (
        BasisFunction(combine="var-sum", hook="pi"),
        BasisFunction(combine="sym", exponents=((2, 1),), hook="pi"),
        BasisFunction(combine="sym", exponents=((1, 1),), hook="pi"),
    )
    return FeatureBasis(entries, d1=2, d2=1, variables=variables,
                        basis_id=basis_id, pi=table)


@pytest.fixture(scope="session")
def basis_200(table_mid):
    return hl_basis(table_mid)


@pytest.fixture(scope="session")
def dataset_200():
    return grid_dataset([(2, 200), (2, 200)])


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
