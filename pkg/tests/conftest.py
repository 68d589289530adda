import pytest

from ptsusy import numerics, verify
from ptsusy.susy_core import ScarfParams, scarf2_potentials


@pytest.fixture(scope="session")
def table_params():
    return ScarfParams(1.0, -2.5)


@pytest.fixture(scope="session")
def grid():
    return numerics.default_grid(1.0)


@pytest.fixture(scope="session")
def table_pair(table_params):
    return scarf2_potentials(table_params)


@pytest.fixture(scope="session")
def partner2_spectrum(table_pair, grid, table_params):
    return numerics.solve_refined(table_pair.v2, grid, table_params.continuum_edge, hermitian=True)


@pytest.fixture(scope="session")
def partner1_spectrum(table_pair, grid, table_params):
    return numerics.solve_refined(table_pair.v1, grid, table_params.continuum_edge, hermitian=False)


@pytest.fixture(scope="session")
def table_report(table_params, grid):
    return verify.table1_report(table_params, grid)
