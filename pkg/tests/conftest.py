"""Session fixtures: golden model files and the designs derived from them."""
from __future__ import annotations

from pathlib import Path

import pytest

from h2contain import (
    design_heterogeneous,
    design_homogeneous,
    h2_norm,
    load_model,
)
from h2contain.heterog import assemble_error_system as assemble_heterog
from h2contain.homog import assemble_error_system as assemble_homog

REPO_ROOT = Path(__file__).resolve().parent.parent
MODELS_DIR = REPO_ROOT / "models"


@pytest.fixture(scope="session")
def homog_model_path() -> Path:
    return MODELS_DIR / "homogeneous_example.json"


@pytest.fixture(scope="session")
def heterog_model_path() -> Path:
    return MODELS_DIR / "heterogeneous_example.json"


@pytest.fixture(scope="session")
def homog_model(homog_model_path):
    return load_model(homog_model_path)


@pytest.fixture(scope="session")
def heterog_model(heterog_model_path):
    return load_model(heterog_model_path)


@pytest.fixture(scope="session")
def homog_gains(homog_model):
    d = homog_model.design
    return design_homogeneous(
        homog_model.plant, homog_model.partition, d.gamma,
        c_p=d.c_p, delta=d.delta, eta=d.eta,
    )


@pytest.fixture(scope="session")
def homog_clp(homog_model, homog_gains):
    return assemble_homog(homog_model.plant, homog_model.partition, homog_gains)


@pytest.fixture(scope="session")
def homog_h2(homog_clp):
    return h2_norm(homog_clp)


@pytest.fixture(scope="session")
def heterog_gains(heterog_model):
    d = heterog_model.design
    return design_heterogeneous(
        heterog_model.agents, heterog_model.leader, heterog_model.partition,
        d.gamma, delta=d.delta, eta=d.eta,
    )


@pytest.fixture(scope="session")
def heterog_clp(heterog_model, heterog_gains):
    return assemble_heterog(
        heterog_model.agents, heterog_model.leader, heterog_model.partition,
        heterog_gains,
    )


@pytest.fixture(scope="session")
def heterog_h2(heterog_clp):
    return h2_norm(heterog_clp)
