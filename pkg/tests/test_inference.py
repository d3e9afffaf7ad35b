"""Bayesian inversion and signature optimisation against the enumeration oracle."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from countfix.detector import ConditionalMatrix, DetectorParams, build_matrix
from countfix.inference import optimisation_map, posterior
from countfix.priors import custom_prior, pdc_prior, uniform_prior
from oracles import argmax_smallest, enum_posterior

LOSSY = DetectorParams(p_loss=0.5, lam=0.0)
NOISY = DetectorParams(p_loss=0.3, lam=1.2)


def test_ideal_posterior_is_identity_full_support():
    mat = build_matrix(DetectorParams(p_loss=0.0, lam=0.0), 19)
    post = posterior(mat, pdc_prior(0.7, n_max=19))
    assert post.defined.all()
    np.testing.assert_allclose(post.entries, np.eye(20), atol=1e-15)


def test_ideal_posterior_truncated_prior_leaves_tail_undefined():
    mat = build_matrix(DetectorParams(p_loss=0.0, lam=0.0), 19)
    post = posterior(mat, uniform_prior(0, 9))
    np.testing.assert_array_equal(post.defined, np.arange(20) <= 9)
    np.testing.assert_allclose(post.entries[:10, :10], np.eye(10), atol=1e-15)
    assert np.all(post.entries[:, 10:] == 0.0)


def test_total_loss_posterior_reproduces_prior_at_zero():
    mat = build_matrix(DetectorParams(p_loss=1.0, lam=0.0), 6)
    prior = pdc_prior(0.6, n_max=6)
    post = posterior(mat, prior)
    np.testing.assert_array_equal(post.defined, [True] + [False] * 6)
    np.testing.assert_allclose(post.entries[:, 0], prior.probs, rtol=1e-14)
    assert post.outcome_marginal[0] == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("p_loss", [0.3, 0.7])
@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_posterior_matches_enumeration_oracle(p_loss, lam):
    params = DetectorParams(p_loss=p_loss, lam=lam)
    mat = build_matrix(params, 4)
    prior = pdc_prior(0.6, n_max=4)
    post = posterior(mat, prior)
    expected, marginal, defined = enum_posterior(p_loss, lam, prior.probs, mat.m_max)
    np.testing.assert_array_equal(post.defined, defined)
    np.testing.assert_allclose(post.entries, expected, atol=1e-12)
    np.testing.assert_allclose(post.outcome_marginal, marginal, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(
    p_loss=st.floats(0.0, 1.0),
    lam=st.floats(0.0, 4.0),
    chi=st.floats(0.0, 0.9),
    n_max=st.integers(0, 5),
)
def test_posterior_oracle_property(p_loss, lam, chi, n_max):
    mat = build_matrix(DetectorParams(p_loss=p_loss, lam=lam), n_max)
    prior = pdc_prior(chi, n_max=n_max)
    post = posterior(mat, prior)
    expected, marginal, defined = enum_posterior(p_loss, lam, prior.probs, mat.m_max)
    np.testing.assert_array_equal(post.defined, defined)
    np.testing.assert_allclose(post.entries, expected, atol=1e-12)
    np.testing.assert_allclose(post.outcome_marginal, marginal, atol=1e-12)


def test_posterior_columns_normalized_and_marginal_mass_retained():
    mat = build_matrix(NOISY, 12)
    for prior in (pdc_prior(0.7, n_max=12), uniform_prior(0, 9)):
        post = posterior(mat, prior)
        for m in np.flatnonzero(post.defined):
            s = math.fsum(post.entries[:, m].tolist())
            assert s == pytest.approx(1.0, abs=1e-12)
        mass = math.fsum(post.outcome_marginal.tolist())
        assert 1.0 - 2e-10 <= mass <= 1.0 + 1e-12


def test_short_prior_is_zero_padded():
    mat = build_matrix(LOSSY, 6)
    short = posterior(mat, uniform_prior(0, 3))
    padded = posterior(mat, custom_prior([1, 1, 1, 1, 0, 0, 0]))
    np.testing.assert_array_equal(short.entries[:4], padded.entries[:4])
    assert np.all(padded.entries[4:] == 0.0)
    np.testing.assert_array_equal(short.outcome_marginal, padded.outcome_marginal)


def test_long_prior_with_zero_excess_is_truncated():
    mat = build_matrix(LOSSY, 2)
    post = posterior(mat, custom_prior([1, 1, 1, 0, 0]))
    assert post.n_max == 2


def test_long_prior_with_mass_beyond_matrix_rejected():
    mat = build_matrix(LOSSY, 2)
    with pytest.raises(ValueError, match="n_max"):
        posterior(mat, uniform_prior(0, 4))


def test_undefined_outcomes_are_flagged_not_fatal():
    mat = build_matrix(DetectorParams(p_loss=0.0, lam=0.0), 6)
    post = posterior(mat, uniform_prior(0, 3))
    report = optimisation_map(post)
    undefined = np.arange(7) > 3
    np.testing.assert_array_equal(~post.defined, undefined)
    assert np.all(post.outcome_marginal[undefined] == 0.0)
    assert np.all(report.map[undefined] == -1)
    assert np.all(np.isnan(report.fidelity_raw[undefined]))
    assert np.all(np.isnan(report.fidelity_opt[undefined]))


def test_exact_tie_resolves_to_smallest_n():
    entries = np.full((2, 2), 0.5)
    mat = ConditionalMatrix(n_max=1, m_max=1, entries=entries)
    report = optimisation_map(posterior(mat, uniform_prior(0, 1)))
    np.testing.assert_array_equal(report.map, [0, 0])
    assert report.tie.all()
    np.testing.assert_allclose(report.fidelity_opt, [0.5, 0.5], rtol=1e-15)


def test_map_values_stay_inside_prior_support():
    mat = build_matrix(NOISY, 9)
    report = optimisation_map(posterior(mat, pdc_prior(0.7, n_max=9)))
    defined = report.defined
    assert np.all(report.map[defined] >= 0)
    assert np.all(report.map[defined] <= 9)


def test_optimised_fidelity_is_posterior_at_mapped_signature():
    mat = build_matrix(NOISY, 9)
    post = posterior(mat, pdc_prior(0.7, n_max=9))
    report = optimisation_map(post)
    for m in np.flatnonzero(report.defined):
        chosen = post.entries[report.map[m], m]
        if report.tie[m]:
            assert report.fidelity_opt[m] == pytest.approx(chosen, rel=2e-12)
        else:
            assert report.fidelity_opt[m] == chosen
        assert report.fidelity_opt[m] == post.entries[:, m].max()


def test_fidelity_improvement_pointwise():
    for params in (LOSSY, NOISY, DetectorParams(p_loss=0.0, lam=5.0)):
        mat = build_matrix(params, 12)
        for prior in (pdc_prior(0.7, n_max=12), uniform_prior(0, 9)):
            report = optimisation_map(posterior(mat, prior))
            defined = np.flatnonzero(report.defined)
            assert np.all(
                report.fidelity_opt[defined] >= report.fidelity_raw[defined]
            )
            assert report.avg_fidelity_opt >= report.avg_fidelity_raw


def test_raw_fidelity_zero_beyond_prior_support():
    mat = build_matrix(DetectorParams(p_loss=0.0, lam=5.0), 4)
    post = posterior(mat, uniform_prior(0, 4))
    report = optimisation_map(post)
    beyond = np.flatnonzero(report.defined & (np.arange(mat.m_max + 1) > 4))
    assert beyond.size > 0
    assert np.all(report.fidelity_raw[beyond] == 0.0)


def test_average_fidelities_are_marginal_weighted():
    mat = build_matrix(NOISY, 9)
    post = posterior(mat, uniform_prior(0, 9))
    report = optimisation_map(post)
    defined = np.flatnonzero(report.defined)
    raw = math.fsum(
        (post.outcome_marginal[m] * report.fidelity_raw[m] for m in defined)
    )
    opt = math.fsum(
        (post.outcome_marginal[m] * report.fidelity_opt[m] for m in defined)
    )
    assert report.avg_fidelity_raw == pytest.approx(raw, rel=1e-13)
    assert report.avg_fidelity_opt == pytest.approx(opt, rel=1e-13)


def test_prior_scaling_by_power_of_two_is_bit_identical():
    weights = [0.3, 1.7, 0.9, 0.2]
    mat = build_matrix(NOISY, 3)
    base = posterior(mat, custom_prior(weights))
    scaled = posterior(mat, custom_prior([4.0 * w for w in weights]))
    np.testing.assert_array_equal(base.entries, scaled.entries)
    np.testing.assert_array_equal(base.outcome_marginal, scaled.outcome_marginal)


@settings(max_examples=40, deadline=None)
@given(scale=st.floats(1e-3, 1e3), seed=st.integers(0, 10))
def test_prior_scaling_leaves_map_invariant(scale, seed):
    rng = np.random.default_rng(seed)
    weights = rng.random(5) + 1e-3
    mat = build_matrix(NOISY, 4)
    base = optimisation_map(posterior(mat, custom_prior(weights.tolist())))
    scaled = optimisation_map(
        posterior(mat, custom_prior((scale * weights).tolist()))
    )
    np.testing.assert_array_equal(base.map, scaled.map)
    np.testing.assert_allclose(base.fidelity_opt, scaled.fidelity_opt, rtol=1e-12)


def test_argmax_agrees_with_oracle_tie_rule():
    mat = build_matrix(DetectorParams(p_loss=0.5, lam=0.0), 9)
    post = posterior(mat, uniform_prior(0, 9))
    report = optimisation_map(post)
    for m in np.flatnonzero(report.defined):
        idx, tied = argmax_smallest(post.entries[:, m])
        assert report.map[m] == idx
        assert report.tie[m] == tied


def test_posterior_arrays_immutable():
    mat = build_matrix(NOISY, 4)
    post = posterior(mat, uniform_prior(0, 4))
    for arr in (post.entries, post.outcome_marginal, post.defined):
        assert not arr.flags.writeable
