import numpy as np
import pytest

from schwinger.hamiltonian import LatticeParams, build_parity_hamiltonian


@pytest.fixture(scope="session")
def benchmark_params():
    return LatticeParams(m=1.0, eE=20.0, a=0.45, n_sites=5)


@pytest.fixture(scope="session")
def h_plus(benchmark_params):
    return build_parity_hamiltonian("even", benchmark_params)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def default_benchmark(tmp_path_factory):
    """Full default benchmark, run once per session and written to disk."""
    from schwinger.pipeline import ExperimentConfig, run_benchmark

    out = tmp_path_factory.mktemp("bench_a")
    return run_benchmark(ExperimentConfig(), out_dir=out), out
