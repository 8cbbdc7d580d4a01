import time

import numpy as np
import pytest

from pide_schauder.harness.suites import modulated_benchmark
from pide_schauder.scheme import SchemeConfig, run_scheme, solve_base, taylor_at_origin


class Benchmark:
    """Hölder-modulated benchmark (sigma = 1.3, alpha = 0.5) run once per session."""

    sigma = 1.3
    alpha = 0.5

    def __init__(self):
        self.kernel, self.f, self.g = modulated_benchmark(self.sigma, self.alpha)
        self.cfg = SchemeConfig(h=2.0 ** -6, i_max=3)
        t0 = time.perf_counter()
        self.base = solve_base(self.kernel, self.f, self.g, self.cfg)
        self.seq = run_scheme(self.base, self.kernel, self.f, self.cfg, self.alpha)
        self.runtime = time.perf_counter() - t0
        self.taylor = taylor_at_origin(self.seq, self.sigma, self.alpha)
        self.view = self.seq.multiscale()


@pytest.fixture(scope="session")
def benchmark():
    return Benchmark()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
