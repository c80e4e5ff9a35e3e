import pytest

from stratlab.fm import universe as U


@pytest.fixture(scope="session")
def u_small():
    # 2 litters of 4 atoms plus 2 parent atoms: every census is instant
    return U.build_universe(U.FMParams(k=4, s_max=3, litters0=2))


@pytest.fixture(scope="session")
def u_default():
    return U.build_universe(U.FMParams(k=4, s_max=3, litters0=3))


@pytest.fixture(scope="session")
def u_staged():
    return U.build_universe(U.FMParams(k=4, s_max=3, litters0=3), stages=2)
