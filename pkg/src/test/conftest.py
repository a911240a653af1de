"""Shared test fixtures for the coagfrag-lab test suite."""

from pathlib import Path

import numpy as np
import pytest
import yaml

from src.kernels import CoagKernel, CollisionFragSpec, FragSpec, KernelSet
from src.models import (
    CoagFamily,
    DiffusionDescriptor,
    DiffusionFamily,
    FragFamily,
    GridParams,
    InitialDataDescriptor,
    KernelDescriptor,
    SimConfig,
    TimeParams,
)
from src.pde import run

# ---------------------------------------------------------------------------
# Random states
# ---------------------------------------------------------------------------


@pytest.fixture
def rng():
    """Seeded generator so random-instance tests are reproducible."""
    return np.random.default_rng(20240611)


# ---------------------------------------------------------------------------
# Coefficient sets
# ---------------------------------------------------------------------------


@pytest.fixture
def constant_kernel():
    return CoagKernel.from_descriptor(KernelDescriptor(family=CoagFamily.CONSTANT))


@pytest.fixture
def sqrt_kernel():
    return CoagKernel.from_descriptor(KernelDescriptor(family=CoagFamily.SQRT_PRODUCT))


@pytest.fixture
def linear_frag_set(constant_kernel):
    """Constant kernel with binary-uniform fragmentation on N = 20."""
    frag = FragSpec.generate(FragFamily.BINARY_UNIFORM, 20, rate=0.7, exponent=0.5)
    return KernelSet(coag=constant_kernel, frag=frag)


@pytest.fixture
def collision_set(sqrt_kernel):
    """sqrt-product coagulation with uniform-in-mass collision fragmentation."""
    b = CoagKernel.from_descriptor(KernelDescriptor(family=CoagFamily.CONSTANT, c=0.5))
    return KernelSet(
        coag=sqrt_kernel,
        frag=FragSpec.none(20),
        collision=CollisionFragSpec(kernel=b),
    )


# ---------------------------------------------------------------------------
# Simulation configurations and runs
# ---------------------------------------------------------------------------


def make_config(**overrides) -> SimConfig:
    """Small homogeneous configuration; keyword arguments override fields."""
    base = dict(
        n=16,
        grid=GridParams(length=1.0, cells=1),
        time=TimeParams(dt=1.0e-2, t_final=0.5, sample_stride=1),
        kernel=KernelDescriptor(family=CoagFamily.CONSTANT),
        initial=InitialDataDescriptor(),
        tracked_sizes=[1, 2],
    )
    base.update(overrides)
    return SimConfig(**base)


@pytest.fixture
def config_factory():
    return make_config


@pytest.fixture(scope="module")
def diffusive_run():
    """Constant kernel with binary fragmentation, alternating d, bump data."""
    cfg = make_config(
        n=12,
        grid=GridParams(length=1.0, cells=16),
        time=TimeParams(dt=5.0e-3, t_final=0.5, sample_stride=2),
        fragmentation={"family": "binary_uniform", "rate": 0.5},
        diffusion=DiffusionDescriptor(family=DiffusionFamily.ALTERNATING),
        initial=InitialDataDescriptor(spatial="bump", amplitude=2.0, sigma=0.1),
        tracked_sizes=[1, 2, 5],
    )
    return run(cfg)


# ---------------------------------------------------------------------------
# Scenario files
# ---------------------------------------------------------------------------


@pytest.fixture
def write_scenario(tmp_path):
    """Write a scenario mapping (or raw text) to a YAML file and return its path."""

    def _write(content, name: str = "scenario.yml") -> Path:
        path = tmp_path / name
        if isinstance(content, str):
            path.write_text(content)
        else:
            path.write_text(yaml.safe_dump(content, sort_keys=False))
        return path

    return _write
