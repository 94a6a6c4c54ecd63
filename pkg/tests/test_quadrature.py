import math

import numpy as np
import pytest

from bosonkit import AccuracyError, DeadTimeExp, QuadratureSpec, cond_prob_table, pkm_deadtime_exp
from bosonkit.detectors import pkk_deadtime_exp_analytic, pkm_deadtime_mono
from bosonkit.errors import ParameterError
from bosonkit.quadrature import Intensity, deadtime_column, window_count

SIMPLEX = QuadratureSpec(method="simplex")


def test_intensity_normalization():
    for gamma in (1e-6, 1.0, 10.0, 200.0):
        inten = Intensity(gamma, 0.8)
        assert inten.cumulative(1.0) == pytest.approx(0.8, rel=1e-12)
        assert inten.cumulative(-1.0) == 0.0
        t = np.linspace(0, 1, 2001)
        assert np.trapezoid(inten.density(t), t) == pytest.approx(0.8, rel=1e-3)


def test_window_count():
    assert window_count(0.1) == 10
    assert window_count(0.3) == 3
    assert window_count(1.0) == 1
    assert window_count(0.0) is None


@pytest.mark.parametrize("gamma,r", [(1.0, 0.1), (10.0, 0.2), (3.0, 0.35), (25.0, 0.05)])
def test_diagonal_matches_closed_form(gamma, r):
    for k in (1, 2, 3):
        if (k - 1) * r > 1:
            continue
        assert pkm_deadtime_exp(r, gamma, 0.9, k, k) == pytest.approx(
            pkk_deadtime_exp_analytic(r, gamma, 0.9, k), abs=1e-9
        )


@pytest.mark.parametrize("gamma,r,eta", [(2.0, 0.15, 1.0), (10.0, 0.3, 0.8)])
def test_chain_and_simplex_routes_agree(gamma, r, eta):
    for k in (1, 2, 3, 4):
        chain = deadtime_column(r, gamma, eta, k, 6)
        simplex = deadtime_column(r, gamma, eta, k, 6, SIMPLEX)
        np.testing.assert_allclose(chain, simplex, atol=1e-8)


def test_flat_limit_matches_mono():
    for r in (0.1, 0.25, 0.4):
        for m in range(0, 9):
            for k in range(0, m + 1):
                assert pkm_deadtime_exp(r, 1e-6, 0.9, k, m) == pytest.approx(
                    pkm_deadtime_mono(r, 0.9, k, m), abs=1e-6
                )


def test_zero_ratio_matches_binomial():
    # without dead time, each photon is detected with probability eta
    for k in range(5):
        assert pkm_deadtime_exp(0.0, 5.0, 0.7, k, 4) == pytest.approx(
            math.comb(4, k) * 0.7**k * 0.3 ** (4 - k), abs=1e-9
        )


def test_infeasible_counts_vanish():
    assert pkm_deadtime_exp(0.5, 4.0, 1.0, 4, 6) == 0.0
    assert pkm_deadtime_exp(0.5, 4.0, 1.0, 3, 2) == 0.0


def test_accuracy_error_when_target_unreachable():
    spec = QuadratureSpec(nodes=4, tol=1e-30, method="simplex")
    with pytest.raises(AccuracyError) as exc:
        deadtime_column(0.2, 10.0, 1.0, 2, 4, spec)
    assert exc.value.error_bound > 1e-30
    assert 0 <= exc.value.estimate <= 1


def test_spec_validation():
    with pytest.raises(ParameterError):
        QuadratureSpec(nodes=2)
    with pytest.raises(ParameterError):
        QuadratureSpec(method="mc")
    with pytest.raises(ParameterError):
        deadtime_column(0.2, 10.0, 1.0, 5, 6, SIMPLEX)


def test_exp_table_completeness():
    table = cond_prob_table(DeadTimeExp(0.2, 10.0, 0.9), 10)
    assert np.max(np.abs(table.completeness_residual())) < 1e-6
    assert np.all(table.values >= 0)


def test_decay_lowers_double_counts():
    # a pulse concentrated early makes the second photon land in dead time more often
    slow = pkm_deadtime_exp(0.2, 0.5, 1.0, 2, 2)
    fast = pkm_deadtime_exp(0.2, 10.0, 1.0, 2, 2)
    assert fast < slow < pkm_deadtime_mono(0.2, 1.0, 2, 2)
