import numpy as np
import pytest

from dbcasim import chain_mc
from dbcasim.markov import (
    MacTiming,
    ModelParams,
    normalized_throughput,
    solve_fixed_point,
    success_probs,
    transmission_prob,
)

TIMING = MacTiming()
BACKENDS = ["numba", "numpy"] if chain_mc._HAVE_NUMBA else ["numpy"]


@pytest.mark.parametrize("backend", BACKENDS)
def test_deterministic_per_seed(backend):
    a = chain_mc.simulate_chain(5, 16, 3, 0.2, 200_000, TIMING, seed=7, backend=backend)
    b = chain_mc.simulate_chain(5, 16, 3, 0.2, 200_000, TIMING, seed=7, backend=backend)
    assert a == b
    c = chain_mc.simulate_chain(5, 16, 3, 0.2, 200_000, TIMING, seed=8, backend=backend)
    assert a != c


@pytest.mark.parametrize("backend", BACKENDS)
def test_matches_chain_formula(backend):
    for upsilon in (0.0, 0.2, 0.45):
        stats = chain_mc.simulate_chain(5, 16, 3, upsilon, 1_000_000, TIMING,
                                        seed=11, backend=backend)
        nu = transmission_prob(upsilon, 16, 3)
        assert stats.nu_hat == pytest.approx(nu, rel=0.01)
        p_one, p_s = success_probs(nu, 5)
        assert stats.p_one_hat == pytest.approx(p_one, rel=0.01)
        assert stats.p_s_hat == pytest.approx(p_s, rel=0.01)
        expected = normalized_throughput(p_one, p_s, TIMING)
        assert stats.throughput_hat == pytest.approx(expected, rel=0.02)


def test_backends_statistically_agree():
    if not chain_mc._HAVE_NUMBA:
        pytest.skip("numba unavailable")
    a = chain_mc.simulate_chain(10, 16, 5, 0.3, 1_000_000, TIMING, seed=3, backend="numba")
    b = chain_mc.simulate_chain(10, 16, 5, 0.3, 1_000_000, TIMING, seed=3, backend="numpy")
    assert a.nu_hat == pytest.approx(b.nu_hat, rel=0.02)
    assert a.throughput_hat == pytest.approx(b.throughput_hat, rel=0.02)


def test_solo_transmissions_only_for_single_station():
    stats = chain_mc.simulate_chain(1, 16, 3, 0.0, 100_000, TIMING, seed=1)
    assert stats.multi_slots == 0
    assert stats.nu_hat == pytest.approx(2 / 17, rel=0.02)


def test_matches_solved_model_end_to_end():
    params = ModelParams(n=5, W=16, m=3, u=4, kappa=0.3)
    sol = solve_fixed_point(params, TIMING)
    stats = chain_mc.simulate_chain(5, 16, 3, sol.upsilon_c, 2_000_000, TIMING, seed=21)
    assert stats.throughput_hat == pytest.approx(sol.throughput, rel=0.02)


def test_backend_selection_env(monkeypatch):
    monkeypatch.setenv(chain_mc.BACKEND_ENV, "numpy")
    assert chain_mc.active_backend() == "numpy"
    monkeypatch.setenv(chain_mc.BACKEND_ENV, "bogus")
    with pytest.raises(ValueError):
        chain_mc.active_backend()
    monkeypatch.delenv(chain_mc.BACKEND_ENV)
    assert chain_mc.active_backend() in ("numba", "numpy")


def test_input_validation():
    with pytest.raises(ValueError):
        chain_mc.simulate_chain(0, 16, 3, 0.2, 100, TIMING, seed=1)
    with pytest.raises(ValueError):
        chain_mc.simulate_chain(2, 16, 3, 1.5, 100, TIMING, seed=1)
