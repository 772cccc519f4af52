"""Smoke tests for the python bindings: every exported operation runs and
returns self-consistent values on small models."""

import math

import numpy as np
import pytest

try:
    import envnet
except ImportError:
    import _envnet as envnet

MODEL = """
[species]
names = S

[environment]
states = lo hi
row lo = -1.0 1.0
row hi = 1.0 -1.0

[reactions]
reaction = 0 -> S : 4.0 4.0
reaction = S -> 0 : 1.0 1.0
"""

GENE = """
[species]
names = P

[environment]
states = g0 g1
row g0 = -1.0 1.0
row g1 = 2.0 -2.0

[reactions]
reaction = 0 -> P : 0.0 3.0
reaction = P -> 0 : 1.0 1.0
"""


@pytest.fixture(scope="module")
def model():
    return envnet.parse_model(MODEL)


@pytest.fixture(scope="module")
def gene():
    return envnet.parse_model(GENE)


def test_model_surface(model):
    assert model.species == ["S"]
    assert model.env_states == ["lo", "hi"]
    assert model.generator.shape == (2, 2)
    again = envnet.parse_model(model.serialize())
    assert again.species == model.species

    a, b = model.modulation()
    assert a[0][0, 0] == pytest.approx(-1.0)
    assert b[0][0] == pytest.approx(4.0)


def test_rejection_raises():
    bad = MODEL.replace("0 -> S", "2 S -> 3 S")
    with pytest.raises(envnet.ModelRejected):
        envnet.parse_model(bad)


def test_env_analysis(model, gene):
    pi = envnet.stationary_env(model)
    assert pi == pytest.approx([0.5, 0.5])
    assert envnet.mean_production(model) == pytest.approx(4.0)

    verdict = envnet.check_ergodicity(gene)
    assert verdict["satisfied"]
    assert verdict["produced"] == ["P"]
    assert verdict["violations"] == []

    alpha = envnet.estimate_alpha(model, anchor="lo", alpha_max=3, replicas=2000, seed=5)
    assert alpha["alpha"] == 1


def test_paths_and_propagation(model):
    path = envnet.simulate_env(model, x0="lo", horizon=5.0, seed=9)
    assert path.total_time == pytest.approx(5.0)
    assert len(path) >= 1
    assert path.state_at(0.0) == 0

    again = envnet.simulate_env(model, x0="lo", horizon=5.0, seed=9)
    assert path.holdings == again.holdings

    phi, w = envnet.propagate(model, path, 0.0, 5.0)
    # One species with unit degradation in both states: the survival factor
    # is exactly e^{-t} and the production integral is 4 (1 - e^{-t}).
    assert phi[0, 0] == pytest.approx(math.exp(-5.0), rel=1e-10)
    assert w[0] == pytest.approx(4.0 * (1.0 - math.exp(-5.0)), rel=1e-10)

    ret_path, taus = envnet.simulate_env_until_return(model, anchor="lo", k=3, seed=4)
    assert len(taus) == 4
    assert taus[0] == 0.0
    assert ret_path.total_time == pytest.approx(taus[-1])


def test_finite_time_consistency(model):
    path = envnet.simulate_env(model, x0=0, horizon=2.0, seed=11)
    draws = envnet.sample_finite_time(model, path, 2.0, None, seed=3, replicas=20000)
    assert draws.shape == (20000, 1)

    law = envnet.burst_intensities(model, path, 2.0)
    assert law["poisson_vector"]
    mean = float(law["W"][0])

    pmf = envnet.finite_time_pmf(model, path, 2.0, None, [30])
    values = np.asarray(pmf["values"])
    assert pmf["covered"] == pytest.approx(1.0, abs=1e-8)
    # The lattice pmf is the Poisson law with the accumulated intensity.
    expected = [math.exp(-mean) * mean**k / math.factorial(k) for k in range(31)]
    assert np.max(np.abs(values - expected)) < 1e-9
    assert abs(draws.mean() - mean) < 0.05


def test_ssa_and_oracle(model):
    traj = envnet.ssa(model, x0=0, z0=None, horizon=20.0, seed=2)
    assert traj["counts"].shape[0] == len(traj["time"])

    caps = envnet.pilot_caps(model, x0=0, z0=None, t=20.0, seed=3)
    oracle = envnet.oracle_transient(model, caps, x0=0, z0=None, t=2.0)
    assert oracle["overflow"] < 1e-8
    assert np.asarray(oracle["p"]).sum() == pytest.approx(1.0, abs=1e-9)

    stat = envnet.oracle_stationary(model, caps)
    assert stat["residual"] < 1e-9
    cond = np.asarray(stat["conditional"][0])
    # Constant rates: stationary law is Poisson(4) in both environment states.
    expected = [math.exp(-4.0) * 4.0**k / math.factorial(k) for k in range(len(cond))]
    assert 0.5 * np.abs(cond - expected).sum() < 1e-6


def test_ssa_accepts_general_mass_action_text():
    raw = """
[species]
names = A B

[environment]
states = x
row x = 0.0

[reactions]
reaction = A + B -> B : 1.0
reaction = 0 -> A : 2.0
"""
    with pytest.raises(envnet.ModelRejected):
        envnet.parse_model(raw)
    traj = envnet.ssa(raw, x0=0, z0=np.array([0, 1], dtype=np.int32), horizon=50.0, seed=7)
    counts = traj["counts"]
    assert counts[:, 1].min() == 1  # catalyst is conserved
    assert counts[-1, 0] < 50  # degradation keeps A finite


def test_stationary_pipeline(model, gene):
    cert = envnet.error_certificate(model, anchor=0, seed=5, replicas=5000)
    assert cert["available"]
    assert cert["r_hat"] > 0
    n = envnet.certificate_iterations(model, anchor=0, eps=1e-3, seed=5, replicas=5000)

    draws = envnet.stationary_sample(model, anchor=0, component_totals=[], n=n, seed=8,
                                     replicas=30000)
    mean = draws.mean()
    assert abs(mean - 4.0) < 0.05  # Poisson(4) stationary law

    atoms = envnet.sre_atoms(gene, anchor="g1", n=25, seed=6, replicas=200)
    w = np.array([float(v[0]) for v in atoms["w_vector"]])
    assert (w >= 0).all()
    assert 0.0 < w.mean() < 3.0

    values, ses = envnet.factorial_moments(model, q_max=2, cycles=40000, seed=12)
    assert values[0] == 1.0
    assert values[1] == pytest.approx(4.0, rel=0.05)
    assert values[2] == pytest.approx(16.0, rel=0.05)


def test_fixture_catalogue():
    fixtures = envnet.fixtures()
    assert "case-study" in fixtures
    net = envnet.parse_model(fixtures["gene-n1"])
    assert net.species == ["P"]
