import math

import numpy as np
import pytest

from polematch import benchmarks
from polematch.adaptive import AdaptiveConfig, Repository, build_repository
from polematch.rom import PoleResidueROM, StateSpaceROM

TAU_E = 1e-3


def random_stable_system(rng, k):
    """Real (A, B, C) with well separated, strictly stable eigenvalues.

    A is a block-diagonal modal form hidden behind a random similarity.
    """
    n_pairs = rng.integers(0, k // 2 + 1)
    n_real = k - 2 * n_pairs
    blocks = []
    for _ in range(n_pairs):
        a = -rng.uniform(0.1, 5.0)
        b = rng.uniform(0.5, 20.0)
        blocks.append(np.array([[a, b], [-b, a]]))
    for lam in -rng.permutation(np.arange(1, n_real + 1)) * rng.uniform(0.3, 1.0):
        blocks.append(np.array([[lam]]))
    L = np.zeros((k, k))
    i = 0
    for blk in blocks:
        m = blk.shape[0]
        L[i : i + m, i : i + m] = blk
        i += m
    T = rng.standard_normal((k, k)) + 3 * np.eye(k)
    A = T @ L @ np.linalg.inv(T)
    return StateSpaceROM(A, rng.standard_normal(k), rng.standard_normal(k))


def random_prom(rng, n_d, n_s, param=0.0):
    D = np.column_stack(
        [
            -rng.uniform(0.5, 10, n_d),
            rng.uniform(1, 50, n_d),
            rng.standard_normal(n_d),
            rng.standard_normal(n_d),
        ]
    )
    S = np.column_stack([-rng.uniform(0.5, 10, n_s), rng.standard_normal(n_s)])
    return PoleResidueROM(D.reshape(n_d, 4), S.reshape(n_s, 2), param)


def offset_system(rom, shift):
    """Shift every pole left by ``shift`` (keeps transfer-function shape)."""
    D = rom.D.copy()
    D[:, 0] -= shift
    S = rom.S.copy()
    S[:, 0] -= shift
    return rom.replace(D=D, S=S)


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)


@pytest.fixture(scope="session")
def n_real():
    return benchmarks.select_n_real(TAU_E)


@pytest.fixture(scope="session")
def fom_oracle(n_real):
    return benchmarks.FomOracle(benchmarks.TruncationConfig(4, n_real))


@pytest.fixture(scope="session")
def benchmark_config():
    return AdaptiveConfig(-10.0, 10.0, math.pi / 3, TAU_E, q=5)


@pytest.fixture(scope="session")
def adaptive_repo(fom_oracle, benchmark_config):
    return build_repository(fom_oracle, benchmark_config)


@pytest.fixture(scope="session")
def fixed_step_repo(fom_oracle, benchmark_config):
    from dataclasses import replace

    return build_repository(fom_oracle, replace(benchmark_config, refine=False))


@pytest.fixture
def overshoot_repo():
    """Four stable nodes whose near-axis real part bulges under a cubic spline.

    The a-track is -1, -1e-3, -1e-3, -1 at p = 0..3; the not-a-knot spline
    through four points is the interpolating cubic, which peaks at p = 1.5
    with a value of about +0.124.
    """
    a = [-1.0, -1e-3, -1e-3, -1.0]
    roms = [
        PoleResidueROM([[ak, 10.0, 1.0, 0.0]], [[-5.0, 1.0]], float(p))
        for p, ak in enumerate(a)
    ]
    return Repository([0.0, 1.0, 2.0, 3.0], roms, 4)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
