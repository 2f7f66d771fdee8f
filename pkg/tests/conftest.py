import numpy as np
import pytest

from gorom import (
    Basis,
    ProblemConfig,
    dual_truth_solve,
    make_advection_diffusion_problem,
    make_diffusion_problem,
    truth_solve,
)


@pytest.fixture(scope="session")
def spd_small():
    cfg = ProblemConfig(n=100, d=3, l=8, seed=1, kind="diffusion-spd")
    return make_diffusion_problem(cfg)


@pytest.fixture(scope="session")
def gen_small():
    cfg = ProblemConfig(n=100, d=4, l=2, seed=2, kind="advection-diffusion")
    return make_advection_diffusion_problem(cfg)


def snapshot_spaces(model, n_primal, n_dual, seed):
    """Primal/dual bases from truth snapshots at sampled points."""
    rng = np.random.default_rng(seed)
    xis = model.domain.sample(n_primal + n_dual, rng)
    V = Basis(model.gram_v0, model.n, name="V")
    WQ = Basis(model.gram_v0, model.n, name="WQ")
    for xi in xis[:n_primal]:
        u, _ = truth_solve(model, xi)
        V.append(u)
    for xi in xis[n_primal:]:
        WQ.extend(dual_truth_solve(model, xi))
    return V, WQ


@pytest.fixture(scope="session")
def spd_spaces(spd_small):
    return snapshot_spaces(spd_small, 4, 1, seed=101)


@pytest.fixture(scope="session")
def gen_spaces(gen_small):
    return snapshot_spaces(gen_small, 4, 2, seed=102)
