import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bosonkit import (
    DeadTimeExp,
    DeadTimeMono,
    DomainError,
    IdealPNR,
    LossyPNR,
    OnOffArray,
    correction_coefficient,
    correction_table,
    haar_random_unitary,
    ideal_distribution,
    postselected_probability,
    postselection_efficiency,
    realistic_distribution,
    reduced_identifier,
)
from bosonkit.realistic import (
    correction_csv,
    format_identifier,
    identifier_coefficient,
    identifiers_up_to,
    parse_identifier,
    postselected_distribution,
)


def test_reduced_identifier():
    assert reduced_identifier((0, 2, 1, 3)) == (3, 2)
    assert reduced_identifier((1, 1, 0)) == ()
    assert format_identifier((3, 2)) == "{3,2}"
    assert format_identifier(()) == "{}"
    assert parse_identifier("{2,3}") == (3, 2)
    assert parse_identifier("{}") == ()


def test_identifiers_up_to():
    assert identifiers_up_to(4) == [(), (2,), (3,), (4,), (2, 2)]
    assert len(identifiers_up_to(6)) == 1 + 1 + 1 + 2 + 2 + 4


def test_identifier_coefficient_matches_pattern_coefficient():
    model = OnOffArray(6, 0.9)
    p = (3, 0, 2, 1)
    assert identifier_coefficient(model, reduced_identifier(p), sum(p)) == pytest.approx(
        correction_coefficient(model, p), abs=1e-15
    )


def test_correction_out_of_range_raises():
    with pytest.raises(DomainError):
        correction_coefficient(OnOffArray(2), (3, 0))
    assert correction_table(OnOffArray(2), 3).entries[(3,)] == 0.0


def test_ideal_detector_needs_no_correction():
    assert all(c == 1.0 for c in correction_table(IdealPNR(), 5).entries.values())


def test_lossy_correction_is_eta_power():
    table = correction_table(LossyPNR(0.9), 4)
    assert all(c == pytest.approx(0.9**4) for c in table.entries.values())


def test_hom_with_arrays(hom):
    # a single on/off detector per port merges the bunched outcomes into one click
    dist = realistic_distribution(hom, (1, 1), OnOffArray(1))
    assert dist[(1, 0)] == pytest.approx(0.5)
    assert dist[(0, 1)] == pytest.approx(0.5)
    assert dist[(1, 1)] == pytest.approx(0.0, abs=1e-15)
    dist = realistic_distribution(hom, (1, 1), OnOffArray(2))
    assert dist[(2, 0)] == pytest.approx(0.25)
    assert dist[(1, 0)] == pytest.approx(0.25)


def test_realistic_is_normalized_with_full_support(haar4):
    for model in (LossyPNR(0.6), OnOffArray(2, 0.8), DeadTimeMono(0.4, 0.9)):
        dist = realistic_distribution(haar4, (1, 1, 1, 0), model)
        assert dist.total() == pytest.approx(1.0, abs=1e-12)
        assert (0, 0, 0, 0) in dist.entries
        assert all(p >= 0 for _, p in dist)


def test_ideal_detector_reproduces_ideal(haar4):
    inp = (2, 1, 0, 0)
    ideal = ideal_distribution(haar4, inp)
    real = realistic_distribution(haar4, inp, IdealPNR())
    for out, p in ideal:
        assert real[out] == pytest.approx(p, abs=1e-15)


def test_lossy_postselection_efficiency(haar4):
    assert postselection_efficiency(haar4, (1, 1, 1, 0), LossyPNR(0.8)) == pytest.approx(
        0.512, abs=1e-12
    )


def test_postselected_probability_requires_matching_total(haar4):
    with pytest.raises(DomainError):
        postselected_probability(haar4, (1, 1, 0, 0), LossyPNR(0.5), (1, 0, 0, 0))


models = st.sampled_from(
    [
        LossyPNR(0.75),
        OnOffArray(2, 0.9),
        OnOffArray(5),
        DeadTimeMono(0.3, 0.95),
        DeadTimeMono(0.6),
        DeadTimeExp(0.2, 5.0, 0.9),
    ]
)


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(0, 2**31),
    modes=st.integers(2, 3),
    counts=st.lists(st.integers(0, 2), min_size=3, max_size=3),
    model=models,
)
def test_factorization_identity(seed, modes, counts, model):
    u = haar_random_unitary(modes, seed)
    inp = tuple(counts[:modes])
    n = sum(inp)
    real = realistic_distribution(u, inp, model)
    post = postselected_distribution(u, inp, model)
    for out, p in real:
        if sum(out) == n:
            assert p == pytest.approx(post[out], abs=1e-10)


def test_postselected_probability_for_one_pattern(haar4):
    model = DeadTimeMono(0.25)
    inp = (1, 1, 1, 0)
    real = realistic_distribution(haar4, inp, model)
    assert postselected_probability(haar4, inp, model, (2, 1, 0, 0)) == pytest.approx(
        real[(2, 1, 0, 0)], abs=1e-12
    )


def test_correction_csv_layout():
    text = correction_csv([correction_table(OnOffArray(3), 3), correction_table(OnOffArray(4), 3)])
    lines = text.splitlines()
    assert lines[0] == "identifier,K_or_r,coefficient"
    assert "{}" in lines[1] and lines[1].endswith(",1")
    assert "{2},4,0.75" in lines
    assert len(lines) == 1 + 2 * 3


def test_mono_coefficient_closed_form():
    for r in np.linspace(0, 1, 11):
        table = correction_table(DeadTimeMono(float(r)), 4)
        assert table[(2,)] == pytest.approx((1 - r) ** 2, abs=1e-12)
        assert table[(3,)] == pytest.approx(max(0.0, 1 - 2 * r) ** 3, abs=1e-12)
        assert table[(2, 2)] == pytest.approx((1 - r) ** 4, abs=1e-12)
    assert math.isclose(correction_table(DeadTimeMono(0.0), 3)[()], 1.0)
