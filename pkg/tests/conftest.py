import numpy as np
import pytest

from relbel.model import FiniteModel, PsiMap, validate


def random_model(rng, max_theta=6, max_x=6, max_psi=4, min_prior=0.01):
    """Random validated model plus a surjective psi assignment.

    Prior masses are rejected below ``min_prior`` and likelihood rows are
    strictly positive, so every outcome is possible and evidence argmax
    ties have probability zero.
    """
    n_theta = int(rng.integers(2, max_theta + 1))
    n_x = int(rng.integers(2, max_x + 1))
    n_psi = int(rng.integers(2, min(max_psi, n_theta) + 1))
    while True:
        prior = rng.dirichlet(np.full(n_theta, 2.0))
        if prior.min() >= min_prior:
            break
    likelihood = rng.dirichlet(np.full(n_x, 1.5), size=n_theta)
    assignment = np.concatenate(
        [np.arange(n_psi), rng.integers(0, n_psi, size=n_theta - n_psi)]
    )
    rng.shuffle(assignment)
    model = validate(
        FiniteModel(
            theta_labels=tuple(f"t{i}" for i in range(n_theta)),
            x_labels=tuple(f"x{i}" for i in range(n_x)),
            likelihood=likelihood,
            prior=prior,
        )
    )
    psi = PsiMap(tuple(int(j) for j in assignment), tuple(f"p{j}" for j in range(n_psi)))
    return model, psi


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def make_model():
    return random_model
