import numpy as np
import pytest

from bosonkit import DeadTimeExp, DeadTimeMono, LossyPNR, OnOffArray, cond_prob, pkm_mc_oracle
from bosonkit.detectors import IdealPNR
from bosonkit.errors import ParameterError
from bosonkit.montecarlo import MCEstimate, shard_generators, simulate_counts


@pytest.mark.parametrize(
    "model",
    [LossyPNR(0.7), OnOffArray(3, 0.8), DeadTimeMono(0.3, 0.9), DeadTimeExp(0.2, 10.0, 0.9)],
    ids=lambda m: m.kind,
)
def test_oracle_agrees_with_formulas(model):
    for m in (2, 3):
        for k in range(m + 1):
            est = pkm_mc_oracle(model, k, m, 40_000, seed=k + 10 * m)
            assert est.agrees_with(cond_prob(model, k, m), sigmas=4.5)


def test_deterministic_per_seed_and_shards():
    model = DeadTimeMono(0.25)
    a = pkm_mc_oracle(model, 2, 3, 10_000, seed=5, shards=3)
    b = pkm_mc_oracle(model, 2, 3, 10_000, seed=5, shards=3)
    assert a == b
    assert pkm_mc_oracle(model, 2, 3, 10_000, seed=6, shards=3) != a


def test_shard_streams_are_distinct():
    g = shard_generators(1, 3)
    draws = [x.random(4) for x in g]
    assert not np.allclose(draws[0], draws[1])


def test_simulated_counts_are_in_range():
    rng = np.random.default_rng(0)
    counts = simulate_counts(OnOffArray(2), 5, 1000, rng)
    assert counts.min() >= 1 and counts.max() <= 2
    counts = simulate_counts(DeadTimeMono(0.5), 8, 1000, rng)
    assert counts.max() <= 3
    assert np.all(simulate_counts(IdealPNR(), 4, 10, rng) == 4)
    assert np.all(simulate_counts(LossyPNR(0.5), 0, 10, rng) == 0)


def test_error_bar_floor():
    est = MCEstimate(0.0, 0.0, 100)
    assert est.agrees_with(0.01)
    assert not est.agrees_with(0.1)


def test_rejects_bad_trials():
    with pytest.raises(ParameterError):
        pkm_mc_oracle(LossyPNR(0.5), 1, 1, 0, seed=0)
    with pytest.raises(ParameterError):
        pkm_mc_oracle(LossyPNR(0.5), 1, 1, 10, seed=0, shards=0)
