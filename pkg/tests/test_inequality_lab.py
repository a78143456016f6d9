import hashlib

import numpy as np
import pytest

from prescurv.inequality_lab import (
    SampleConfig,
    check_gll,
    check_ivochkina_condition,
    check_krylov_convexity,
    draw_direction,
    run_campaign,
    sample_gamma_k,
    sample_rng,
)
from prescurv.symmfunc import in_gamma_k, sigma, sigma_grad


def test_gll_isotropic_identity_direction():
    rec = check_gll(np.ones(3), np.eye(3), 1.0, k=2)
    assert rec.lhs == pytest.approx(6.0)
    assert rec.rhs == pytest.approx(12.0)
    assert rec.margin == pytest.approx(6.0)
    assert rec.passed


def test_gll_zero_direction_equality():
    rec = check_gll(np.ones(3), np.zeros((3, 3)), 0.7, k=2)
    assert rec.lhs == 0.0 and rec.rhs == 0.0 and rec.passed


def test_gll_requires_cone_membership():
    with pytest.raises(ValueError):
        check_gll(np.array([1.0, 1.0, -0.9]), np.eye(3), 1.0, k=3)


def test_gll_scaling_covariance():
    rng = np.random.default_rng(8)
    cfg = SampleConfig(n=4, k=3, sample_count=1, seed=0)
    for trial in range(20):
        gen = sample_rng(cfg, trial)
        lam = sample_gamma_k(cfg, gen)
        B = draw_direction(cfg, gen)
        alpha = float(rng.uniform(0.2, 3.0))
        c = float(rng.uniform(0.3, 3.0))
        a = check_gll(lam, B, alpha, k=cfg.k)
        b = check_gll(c * lam, c * B, alpha, k=cfg.k)
        factor = c**cfg.k
        assert b.lhs == pytest.approx(factor * a.lhs, rel=1e-9, abs=1e-12)
        assert b.rhs == pytest.approx(factor * a.rhs, rel=1e-9, abs=1e-12)
        assert a.passed == b.passed


def test_gll_level_direction_concavity():
    # diagonal B chosen so the two logarithmic derivatives coincide: the
    # right side vanishes and the quadratic form must be nonpositive
    cfg = SampleConfig(n=4, k=2, sample_count=1, seed=3)
    for trial in range(20):
        gen = sample_rng(cfg, trial)
        lam = sample_gamma_k(cfg, gen)
        gk = sigma_grad(lam, cfg.k)
        v = gk / sigma(lam, cfg.k) - np.ones(cfg.n) / sigma(lam, 1)
        basis = np.linalg.svd(v[None])[2][1:]  # orthogonal complement of v
        d = basis.T @ gen.normal(size=cfg.n - 1)
        rec = check_gll(lam, np.diag(d), 1.0, k=cfg.k)
        assert abs(rec.rhs) <= 1e-9 * (1 + abs(rec.lhs))
        assert rec.lhs <= 1e-9 * (1 + abs(rec.lhs))


def test_sampled_spectra_lie_in_cone():
    cfg = SampleConfig(n=3, k=2, sample_count=1, seed=5, spectrum_box=(-1.0, 2.0))
    for i in range(200):
        lam = sample_gamma_k(cfg, sample_rng(cfg, i))
        ok, _ = in_gamma_k(lam, 2)
        assert ok
        assert np.all(lam >= -1.0) and np.all(lam <= 2.0)


def test_sampling_deterministic():
    cfg = SampleConfig(n=4, k=2, sample_count=1, seed=77)
    a = [sample_gamma_k(cfg, sample_rng(cfg, i)) for i in range(10)]
    b = [sample_gamma_k(cfg, sample_rng(cfg, i)) for i in range(10)]
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


def test_krylov_radial_direction_closed_form():
    # along B = diag(lambda) the ratio is (1+t)^{1-k} R, so the second
    # derivative of its alpha power is alpha(k-1)(alpha(k-1)+1) R^alpha
    lam = np.array([1.0, 0.8, 1.3])
    k, alpha = 2, 1.5
    R = sigma(lam, 1) / sigma(lam, k)
    expect = alpha * (k - 1) * (alpha * (k - 1) + 1.0) * R**alpha
    value, rec = check_krylov_convexity(lam, np.diag(lam), alpha, k)
    assert not rec.inconclusive
    assert value == pytest.approx(expect, rel=1e-5)
    assert value >= 0.0


def test_krylov_zero_direction():
    value, rec = check_krylov_convexity(np.ones(3), np.zeros((3, 3)), 1.0, 2)
    assert value == pytest.approx(0.0, abs=1e-12)
    assert rec.passed


def test_krylov_random_samples_nonnegative():
    cfg = SampleConfig(n=5, k=3, sample_count=1, seed=11)
    for i in range(100):
        gen = sample_rng(cfg, i)
        lam = sample_gamma_k(cfg, gen)
        B = draw_direction(cfg, gen)
        value, rec = check_krylov_convexity(lam, B, 1.0, cfg.k)
        assert rec.passed or rec.inconclusive


def test_ivochkina_boundary_cases():
    holds_low = check_ivochkina_condition(2, -1.0, p_box=1.0, grid=17)
    assert holds_low.holds
    holds_zero = check_ivochkina_condition(2, 0.0, p_box=3.0, grid=33)
    assert holds_zero.holds
    fails_one = check_ivochkina_condition(2, 1.0, p_box=3.0, grid=33)
    assert not fails_one.holds
    assert fails_one.worst_margin < 0.0
    assert max(abs(v) for v in fails_one.worst_point) <= 3.0


def test_ivochkina_convex_case_has_positive_hessian():
    # q = 0 gives chi^{1/k} = sqrt(1 + |p|^2), convex: worst margin is the
    # allowance alone and stays strictly positive
    rep = check_ivochkina_condition(2, 0.0, p_box=3.0, grid=33)
    assert rep.worst_margin > 0.0


def test_campaign_empty():
    s = run_campaign(SampleConfig(n=3, k=2, sample_count=0, seed=1))
    assert s.clean and s.counts == {}


def test_campaign_small_clean_and_deterministic(tmp_path):
    cfg = SampleConfig(n=3, k=2, sample_count=150, seed=404)
    digests = []
    for tag in ("a", "b"):
        path = tmp_path / f"campaign_{tag}.csv"
        s = run_campaign(cfg, keep_records=True, csv_path=path)
        assert s.clean
        digests.append(hashlib.sha256(path.read_bytes()).hexdigest())
    assert digests[0] == digests[1]
    header = (tmp_path / "campaign_a.csv").read_text().splitlines()[0]
    assert header.startswith("kind,n,k,alpha,seed_index,lhs,rhs,margin,pass")


def test_campaign_counts_structure():
    cfg = SampleConfig(n=2, k=2, sample_count=50, seed=9, alpha_list=(0.5, 2.0))
    s = run_campaign(cfg)
    total = sum(v for (kind, _), v in s.counts.items() if kind == "gll")
    assert total == 100  # samples x alphas


def test_config_validation():
    with pytest.raises(ValueError):
        SampleConfig(n=9, k=2)
    with pytest.raises(ValueError):
        SampleConfig(n=3, k=1)
    with pytest.raises(ValueError):
        SampleConfig(n=3, k=2, alpha_list=(0.0,))
    with pytest.raises(ValueError):
        SampleConfig(n=3, k=2, sample_count=-1)
