import numpy as np
import pytest

from segbench import encoding, lut, problems, surrogate


@pytest.fixture(scope="session")
def table():
    return lut.generate_synthetic_table(0)


@pytest.fixture(scope="session")
def quick_model(table):
    """Small, fast surrogate fit; good enough for plumbing tests."""
    genotypes = encoding.sample_random(512, 42)
    errors = surrogate.synthetic_error_batch(genotypes, seed=0, table=table)
    cfg = surrogate.TrainingConfig(epochs=40)
    model, _ = surrogate.train(list(zip(genotypes, errors)), cfg, seed=0)
    return model


@pytest.fixture(scope="session")
def evaluators(table, quick_model):
    return problems.Evaluators(table, quick_model, perturb=True)


@pytest.fixture(scope="session")
def evaluators_no_perturb(table, quick_model):
    return problems.Evaluators(table, quick_model, perturb=False)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
