import pytest

from structid import benchmarks as bm
from structid.simulate import simulate


@pytest.fixture(scope="session")
def burgers_bench():
    return bm.benchmark("burgers")


@pytest.fixture(scope="session")
def burgers_clean(burgers_bench):
    return simulate(burgers_bench.sim)


@pytest.fixture(scope="session")
def diffusion_bench():
    return bm.benchmark("diffusion")


@pytest.fixture(scope="session")
def diffusion_clean(diffusion_bench):
    return simulate(diffusion_bench.sim)


@pytest.fixture(scope="session")
def allen_cahn_bench():
    return bm.benchmark("allen_cahn")


@pytest.fixture(scope="session")
def allen_cahn_clean(allen_cahn_bench):
    return simulate(allen_cahn_bench.sim)


@pytest.fixture(scope="session")
def harmonic_bench():
    return bm.benchmark("harmonic")


@pytest.fixture(scope="session")
def harmonic_clean(harmonic_bench):
    return simulate(harmonic_bench.sim)


@pytest.fixture(scope="session")
def three_body_bench():
    return bm.benchmark("three_body")


@pytest.fixture(scope="session")
def three_body_clean(three_body_bench):
    return simulate(three_body_bench.sim)


@pytest.fixture(scope="session")
def swe_bench():
    return bm.benchmark("swe")


@pytest.fixture(scope="session")
def swe_clean(swe_bench):
    return simulate(swe_bench.sim)
