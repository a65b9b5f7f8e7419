from __future__ import annotations

import numpy as np
import pytest

from hallab.virtlab import (Background, LabConfig, PowerPoint, QubitSpec,
                            ResonatorSpec, Storage)


@pytest.fixture
def storage(tmp_path):
    return Storage(tmp_path / "datasets")


@pytest.fixture
def single_resonator_config():
    return LabConfig(
        resonators=(ResonatorSpec(f_r=5.0e9, q_i=2.0e4, q_c=8.0e3, phi=0.1),),
        background=Background(a=0.97, alpha=0.35),
        noise_sigma=0.003,
    )


@pytest.fixture
def leaky_qubit():
    return QubitSpec(leak=0.124, assign_error=0.02, pi_error=0.005)


@pytest.fixture
def powered_qubit():
    return QubitSpec(
        leak=0.05, assign_error=0.02, pi_error=0.005,
        power_table=(
            PowerPoint(power=1000.0, leak=0.01, assign_error=0.12),
            PowerPoint(power=3000.0, leak=0.02, assign_error=0.05),
            PowerPoint(power=5000.0, leak=0.05, assign_error=0.02),
            PowerPoint(power=7000.0, leak=0.12, assign_error=0.012),
            PowerPoint(power=9000.0, leak=0.25, assign_error=0.01),
        ),
    )


def rng(seed):
    return np.random.Generator(np.random.PCG64(seed))
