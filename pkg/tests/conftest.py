"""Shared fixtures for the kerrq test suite."""

import os

import pytest

from kerrq.engine import KerrModel
from kerrq.types import EnsembleConfig, InitialMode, NoiseConfig

@pytest.fixture(autouse=True)
def clean_environment(monkeypatch: pytest.MonkeyPatch) -> None:
    """Keep ``KERRQ_*`` variables of the calling shell out of every test."""
    for name in list(os.environ):
        if name.startswith("KERRQ_"):
            monkeypatch.delenv(name)


@pytest.fixture
def q_model() -> KerrModel:
    return KerrModel.q(1.0)


@pytest.fixture
def p_model() -> KerrModel:
    return KerrModel.positive_p(1.0)


@pytest.fixture
def q_noise() -> NoiseConfig:
    return NoiseConfig(mu=1.0, dt=1e-3, stream_seed=42)


@pytest.fixture
def p_noise() -> NoiseConfig:
    return NoiseConfig(mu=1.0, dt=1e-3, representation_sign=-1, stream_seed=42)


@pytest.fixture
def small_ensemble() -> EnsembleConfig:
    return EnsembleConfig(
        n_trajectories=64,
        initial_mode=InitialMode.fixed_beta(complex(0.001, 0.1)),
        t_final=0.2,
        dt=1e-3,
        record_stride=20,
        master_seed=7,
        chunk_size=16,
    )
