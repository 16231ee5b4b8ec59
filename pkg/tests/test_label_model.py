import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from iws.errors import ConfigurationError, ValidationError
from iws.label_model import (
    FitConfig,
    LabelModelParams,
    closed_form_theta,
    fit_mle,
    gradient,
    implied_accuracy_propensity,
    log_marginal_likelihood,
    majority_vote,
    posterior_prob_labels,
    theorem_bound,
)


def _joint_weight(row, y, th1, th2, pi):
    """p(y, row) computed cell by cell, sharing nothing with the package."""
    prod = pi if y == 1 else 1.0 - pi
    for v, a, b in zip(row, th1, th2):
        z = math.exp(a + b) + math.exp(b) + 1.0
        prod *= math.exp(a * (v == y) + b * (v != 0)) / z
    return prod


def _posterior_oracle(rows, th1, th2, pi):
    out = []
    for row in rows:
        w_pos = _joint_weight(row, 1, th1, th2, pi)
        w_neg = _joint_weight(row, -1, th1, th2, pi)
        out.append(w_pos / (w_pos + w_neg))
    return np.asarray(out)


def _loglik_oracle(rows, th1, th2, pi):
    total = 0.0
    for row in rows:
        total += math.log(
            _joint_weight(row, 1, th1, th2, pi) + _joint_weight(row, -1, th1, th2, pi)
        )
    return total


def _random_instance(rng, n=None, m=None):
    m = m or int(rng.integers(1, 5))
    n = n or int(rng.integers(2, 30))
    lam = rng.integers(-1, 2, size=(n, m)).astype(np.int8)
    th1 = rng.normal(0.0, 1.5, m)
    th2 = rng.normal(-0.5, 1.0, m)
    pi = float(rng.uniform(0.1, 0.9))
    return lam, th1, th2, pi


def test_posterior_matches_enumeration_on_all_small_rows():
    rng = np.random.default_rng(11)
    for m in (1, 2, 3, 4):
        rows = np.array(list(itertools.product((-1, 0, 1), repeat=m)), dtype=np.int8)
        th1 = rng.normal(0.0, 1.5, m)
        th2 = rng.normal(-0.5, 1.0, m)
        pi = float(rng.uniform(0.1, 0.9))
        got = posterior_prob_labels(rows, LabelModelParams(th1, th2, pi))
        want = _posterior_oracle(rows, th1, th2, pi)
        assert np.max(np.abs(got - want)) < 1e-12


def test_posterior_hand_values():
    params = LabelModelParams(np.array([1.0, 1.0]), np.zeros(2), 0.5)
    rows = np.array([[0, 0], [1, 1], [1, -1]], dtype=np.int8)
    got = posterior_prob_labels(rows, params)
    assert got[0] == pytest.approx(0.5, abs=1e-15)
    assert got[1] == pytest.approx(1.0 / (1.0 + math.exp(-2.0)), abs=1e-12)
    assert got[2] == pytest.approx(0.5, abs=1e-15)


def test_loglik_matches_enumeration_m3_n4():
    rng = np.random.default_rng(7)
    lam = rng.integers(-1, 2, size=(4, 3)).astype(np.int8)
    th1 = rng.normal(0.0, 1.0, 3)
    th2 = rng.normal(0.0, 1.0, 3)
    got = log_marginal_likelihood(lam, LabelModelParams(th1, th2, 0.4))
    want = _loglik_oracle(lam, th1, th2, 0.4)
    assert abs(got - want) < 1e-12


def test_loglik_at_zero_theta_is_uniform_over_cells():
    lam = np.array([[1, -1, 0], [0, 0, 1]], dtype=np.int8)
    params = LabelModelParams(np.zeros(3), np.zeros(3), 0.5)
    got = log_marginal_likelihood(lam, params)
    assert got == pytest.approx(-2 * 3 * math.log(3.0), abs=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_loglik_invariant_to_sample_permutation(seed):
    rng = np.random.default_rng(seed)
    lam, th1, th2, pi = _random_instance(rng)
    params = LabelModelParams(th1, th2, pi)
    perm = rng.permutation(lam.shape[0])
    a = log_marginal_likelihood(lam, params)
    b = log_marginal_likelihood(lam[perm], params)
    assert abs(a - b) < 1e-9


def test_gradient_matches_central_differences():
    rng = np.random.default_rng(23)
    h = 1e-5
    for _ in range(20):
        lam, th1, th2, pi = _random_instance(rng)
        params = LabelModelParams(th1, th2, pi)
        g1, g2 = gradient(lam, params)
        for k in range(th1.size):
            for idx, (grad, vec) in enumerate(((g1, th1), (g2, th2))):
                bump = np.zeros_like(vec)
                bump[k] = h
                up = (th1 + bump, th2) if idx == 0 else (th1, th2 + bump)
                dn = (th1 - bump, th2) if idx == 0 else (th1, th2 - bump)
                fd = (
                    log_marginal_likelihood(lam, LabelModelParams(*up, pi))
                    - log_marginal_likelihood(lam, LabelModelParams(*dn, pi))
                ) / (2 * h)
                denom = max(abs(fd), 1.0)
                assert abs(grad[k] - fd) / denom < 1e-5


def test_closed_form_spec_values():
    th1, th2 = closed_form_theta(0.7, 0.4, n_classes=2)
    assert th1 == pytest.approx(math.log(7.0 / 3.0), abs=1e-12)
    assert th2 == pytest.approx(math.log(0.2), abs=1e-12)
    th1, _ = closed_form_theta(0.5, 0.4, n_classes=2)
    assert th1 == pytest.approx(0.0, abs=1e-12)
    th, none = closed_form_theta(1.0 / 3.0, model="acc_only")
    assert th == pytest.approx(0.0, abs=1e-12)
    assert none is None


@given(
    st.floats(0.05, 0.95),
    st.floats(0.05, 0.95),
)
def test_closed_form_round_trip(alpha, ell):
    th1, th2 = closed_form_theta(alpha, ell, n_classes=2)
    back_alpha, back_ell = implied_accuracy_propensity(th1, th2, n_classes=2)
    assert back_alpha == pytest.approx(alpha, abs=1e-10)
    assert back_ell == pytest.approx(ell, abs=1e-10)


def test_closed_form_rejects_boundaries():
    for alpha, ell in ((0.0, 0.4), (1.0, 0.4), (0.7, 0.0), (0.7, 1.0)):
        with pytest.raises(ConfigurationError):
            closed_form_theta(alpha, ell)


def test_theorem_bound_hand_value_and_clamp():
    th = np.array([1.0, 1.0])
    alphas = np.array([0.9, 0.9])
    ells = np.array([1.0, 1.0])
    s = 1.0 * (2 * 0.9 - 1) * 1.0 * 2
    want = 1.0 - math.exp(-(s**2) / (2.0 * 2.0))
    assert theorem_bound(th, alphas, ells) == pytest.approx(want, abs=1e-12)
    assert 0.0 <= theorem_bound(np.array([0.1]), np.array([0.5]), np.array([0.5])) <= 1.0
    with pytest.raises(ConfigurationError):
        theorem_bound(np.zeros(3), alphas=np.full(3, 0.8), propensities=np.full(3, 0.5))


def test_majority_vote_ties_go_positive():
    lam = np.array([[1, -1], [-1, -1], [0, 0], [1, 0]], dtype=np.int8)
    got = majority_vote(lam)
    assert got.tolist() == [1, -1, 1, 1]


def test_params_validation_and_json_round_trip():
    with pytest.raises(ValidationError):
        LabelModelParams(np.zeros(2), np.zeros(3))
    with pytest.raises(ValidationError):
        LabelModelParams(np.array([np.inf]), np.zeros(1))
    with pytest.raises(ValidationError):
        LabelModelParams(np.zeros(1), np.zeros(1), 1.0)
    params = LabelModelParams(np.array([0.3, -1.2]), np.array([-0.5, 0.1]), 0.25)
    back = LabelModelParams.from_json(params.to_json())
    assert np.array_equal(back.theta_acc, params.theta_acc)
    assert np.array_equal(back.theta_lab, params.theta_lab)
    assert back.class_prior == params.class_prior


def _two_sided_votes(rng, n, alphas, ells):
    y = np.where(rng.random(n) < 0.5, 1, -1)
    fire = rng.random((n, alphas.size)) < ells
    correct = rng.random((n, alphas.size)) < alphas
    votes = np.where(correct, y[:, None], -y[:, None])
    return (votes * fire).astype(np.int8), y


def test_fit_recovers_two_sided_panel():
    rng = np.random.default_rng(5)
    alphas = np.array([0.85, 0.75, 0.9, 0.8])
    ells = np.array([0.7, 0.5, 0.9, 0.6])
    lam, _ = _two_sided_votes(rng, 8000, alphas, ells)
    params = fit_mle(lam, config=FitConfig(step=0.5, max_steps=4000))
    pairs = [
        implied_accuracy_propensity(a, b)
        for a, b in zip(params.theta_acc, params.theta_lab)
    ]
    got_alpha = np.array([p[0] for p in pairs])
    got_ell = np.array([p[1] for p in pairs])
    assert np.max(np.abs(got_alpha - alphas)) < 0.05
    assert np.max(np.abs(got_ell - ells)) < 0.05


def test_fit_gives_chance_lf_zero_accuracy_weight():
    """A 50%-accurate LF earns no weight once informative LFs pin the label."""
    rng = np.random.default_rng(9)
    alphas = np.array([0.9, 0.85, 0.5])
    ells = np.array([0.7, 0.6, 0.8])
    lam, _ = _two_sided_votes(rng, 8000, alphas, ells)
    params = fit_mle(lam, config=FitConfig(step=0.5, max_steps=4000))
    assert abs(params.theta_acc[2]) < 0.1
    assert params.theta_acc[0] > 1.0


def test_fit_init_options_all_accepted():
    rng = np.random.default_rng(3)
    lam, _ = _two_sided_votes(rng, 500, np.array([0.8, 0.7, 0.9]), np.array([0.6, 0.6, 0.6]))
    cfg = FitConfig(max_steps=50)
    for init in ("prior", "mv", "zeros", (np.zeros(3), np.zeros(3))):
        params = fit_mle(lam, init=init, config=cfg)
        assert np.all(np.isfinite(params.theta_acc))
        assert np.all(np.isfinite(params.theta_lab))


def test_fit_rejects_empty_and_zero_coverage():
    with pytest.raises(ValidationError):
        fit_mle(np.zeros((4, 0), dtype=np.int8))
    lam = np.array([[1, 0], [1, 0], [-1, 0]], dtype=np.int8)
    with pytest.raises(ValidationError):
        fit_mle(lam)


def test_vote_anchored_init_tracks_supervised_fit_on_one_sided_panel():
    """On a clean keyword-style panel the mv init must already label well."""
    rng = np.random.default_rng(17)
    n, m = 3000, 12
    y = np.where(rng.random(n) < 0.5, 1, -1)
    targets = np.where(np.arange(m) % 2 == 0, 1, -1)
    rho, cov = 0.85, 0.08
    fire_p = np.where(targets[None, :] == y[:, None], 2 * cov * rho, 2 * cov * (1 - rho))
    lam = (targets[None, :] * (rng.random((n, m)) < fire_p)).astype(np.int8)
    params = fit_mle(lam, init="mv", config=FitConfig(step=0.1, max_steps=200))
    probs = posterior_prob_labels(lam, params)
    covered = (lam != 0).any(axis=1)
    acc = np.mean(np.where(probs[covered] > 0.5, 1, -1) == y[covered])
    assert acc > 0.8
