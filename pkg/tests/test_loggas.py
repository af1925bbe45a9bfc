import math

import numpy as np
import pytest

from bureshall.density import default_cutoff, unrestricted_moment
from bureshall.ensemble import EnsembleParams, log_jpd_unrestricted
from bureshall.loggas import (
    AcceptanceRateWarning,
    ChainConfig,
    energy,
    energy_delta,
    fixed_trace_samples,
    mc_entropy_estimates,
    run_chain,
    run_chains,
)
from bureshall.specfun import DomainError


def test_energy_n1():
    p = EnsembleParams.from_dims(1, 2)  # alpha = 1/2
    lam = 2.0
    assert energy(p, [lam]) == pytest.approx(0.5 * (-p.alpha * math.log(lam) + lam))


def test_energy_n2_hand_value():
    p = EnsembleParams.from_dims(2, 2)  # alpha = -1/2
    want = 0.5 * (
        -2.0 * math.log(1.0)
        + math.log(3.0)
        + 0.5 * (math.log(1.0) + math.log(2.0))
        + 3.0
    )
    assert energy(p, [1.0, 2.0]) == pytest.approx(want, rel=1e-14)


def test_energy_degenerate_configs():
    p = EnsembleParams.from_dims(2, 2)
    assert energy(p, [1.0, 1.0]) == math.inf
    assert energy(p, [-1.0, 2.0]) == math.inf


def test_energy_matches_jpd():
    # e^(-2 dW) must equal the jpd ratio for arbitrary single-particle moves
    rng = np.random.default_rng(31)
    for (n, m) in [(2, 2), (3, 5), (5, 6)]:
        p = EnsembleParams.from_dims(n, m)
        for _ in range(50):
            x = rng.uniform(0.05, 8.0, size=n)
            i = int(rng.integers(0, n))
            newv = float(rng.uniform(0.05, 8.0))
            y = x.copy()
            y[i] = newv
            dw = energy_delta(p, x, i, newv)
            log_ratio = log_jpd_unrestricted(p, list(y)) - log_jpd_unrestricted(p, list(x))
            assert -2.0 * dw == pytest.approx(log_ratio, abs=1e-10)


def test_energy_delta_matches_full_recompute():
    rng = np.random.default_rng(37)
    p = EnsembleParams.from_dims(4, 6)
    for _ in range(50):
        x = rng.uniform(0.05, 9.0, size=4)
        i = int(rng.integers(0, 4))
        newv = float(rng.uniform(0.05, 9.0))
        y = x.copy()
        y[i] = newv
        dw = energy_delta(p, x, i, newv)
        assert dw == pytest.approx(energy(p, y) - energy(p, x), abs=1e-12)
        # acceptance probability of the displacement move
        assert min(1.0, math.exp(-2.0 * dw)) == pytest.approx(
            min(1.0, math.exp(log_jpd_unrestricted(p, list(y)) - log_jpd_unrestricted(p, list(x)))),
            rel=1e-12,
        )


def test_config_validation():
    p = EnsembleParams.from_dims(2, 2)
    with pytest.raises(DomainError):
        ChainConfig(params=p, n_steps=100, burn_in=100)
    with pytest.raises(DomainError):
        ChainConfig(params=p, n_steps=100, burn_in=10, thin=0)
    with pytest.raises(DomainError):
        ChainConfig(params=p, n_steps=100, burn_in=10, proposal_width=-1.0)


def test_determinism():
    p = EnsembleParams.from_dims(2, 3)
    cfg = ChainConfig(params=p, n_steps=4000, burn_in=1000, thin=4, seed=99)
    a = run_chains(cfg, chains=8)
    b = run_chains(cfg, chains=8)
    assert np.array_equal(a.samples, b.samples)
    assert a.acceptance_rate == b.acceptance_rate
    c = run_chains(ChainConfig(params=p, n_steps=4000, burn_in=1000, thin=4, seed=100), chains=8)
    assert not np.array_equal(a.samples, c.samples)


def test_run_chain_single_replica():
    p = EnsembleParams.from_dims(2, 2)
    cfg = ChainConfig(params=p, n_steps=5000, burn_in=1000, thin=4, seed=5)
    res = run_chain(cfg)
    assert res.chains == 1
    assert res.samples.shape == ((5000 - 1000 + 3) // 4, 2)
    assert np.all(res.samples > 0.0)
    assert np.all(res.samples < res.config.lambda_cutoff)
    assert res.energy_drift < 1e-8


def test_n1_histogram_matches_gamma_density():
    # n=1, alpha=1/2: stationary law is Gamma(shape 3/2); 1e6 samples, 64 bins
    p = EnsembleParams.from_dims(1, 2)
    cfg = ChainConfig(params=p, n_steps=5000, burn_in=1000, thin=4, seed=12)
    res = run_chains(cfg, chains=1000)
    samples = res.samples.ravel()
    assert samples.size == 1_000_000
    edges = np.linspace(0.0, default_cutoff(p), 65)
    counts, _ = np.histogram(samples, bins=edges)
    width = edges[1] - edges[0]
    mc_density = counts / (samples.size * width)
    centers_lo, centers_hi = edges[:-1], edges[1:]
    from scipy.special import gammainc

    masses = gammainc(p.alpha + 1.0, centers_hi) - gammainc(p.alpha + 1.0, centers_lo)
    assert np.max(np.abs(mc_density - masses / width)) <= 0.02


def test_fixed_trace_normalization():
    p = EnsembleParams.from_dims(3, 4)
    cfg = ChainConfig(params=p, n_steps=3000, burn_in=500, thin=5, seed=3)
    res = run_chains(cfg, chains=16)
    mus = fixed_trace_samples(res.samples)
    assert np.abs(mus.sum(axis=1) - 1.0).max() < 1e-14
    with pytest.raises(DomainError):
        fixed_trace_samples(np.empty((0, 3)))


def test_mc_entropy_estimates_against_exact():
    from bureshall.entropy import avg_purity_exact, avg_von_neumann_exact

    p = EnsembleParams.from_dims(2, 2)
    cfg = ChainConfig(params=p, n_steps=26_000, burn_in=2000, thin=12, seed=8)
    res = run_chains(cfg, chains=64)
    mus = fixed_trace_samples(res.samples)
    mean, se = mc_entropy_estimates(mus, "purity")
    assert abs(mean - avg_purity_exact(p).to_float()) < 3.0 * se
    mean, se = mc_entropy_estimates(mus, "von_neumann")
    assert abs(mean - avg_von_neumann_exact(p).to_float()) < 3.0 * se
    mean_lin, _ = mc_entropy_estimates(mus, "linear")
    mean_pur, _ = mc_entropy_estimates(mus, "purity")
    assert mean_lin == pytest.approx(1.0 - mean_pur, abs=1e-12)
    mean_h2, _ = mc_entropy_estimates(mus, "hct", omega=2.0)
    assert mean_h2 == pytest.approx(mean_lin, abs=1e-12)


def test_mc_entropy_estimates_validation():
    mus = np.full((10, 2), 0.5)
    with pytest.raises(DomainError):
        mc_entropy_estimates(mus, "purity")
    big = np.full((2000, 2), 0.5)
    with pytest.raises(DomainError):
        mc_entropy_estimates(big, "hct", omega=1.0)


def test_n1_pure_state_entropy():
    p = EnsembleParams.from_dims(1, 3)
    cfg = ChainConfig(params=p, n_steps=6000, burn_in=500, thin=2, seed=2)
    res = run_chains(cfg, chains=4)
    mus = fixed_trace_samples(res.samples)
    vals, _ = mc_entropy_estimates(mus, "von_neumann")
    assert vals == pytest.approx(0.0, abs=1e-14)


def test_seed_pair_agreement():
    # independent seeds agree within combined errors
    p = EnsembleParams.from_dims(2, 4)
    means = []
    for seed in (41, 42):
        cfg = ChainConfig(params=p, n_steps=14_000, burn_in=2000, thin=6, seed=seed)
        res = run_chains(cfg, chains=64)
        mus = fixed_trace_samples(res.samples)
        means.append(mc_entropy_estimates(mus, "purity"))
    (m1, s1), (m2, s2) = means
    assert abs(m1 - m2) < 3.0 * math.hypot(s1, s2)


def test_acceptance_warning_for_bad_width():
    p = EnsembleParams.from_dims(2, 2)
    cfg = ChainConfig(
        params=p, n_steps=2000, burn_in=0, thin=1, proposal_width=500.0, seed=1
    )
    with pytest.warns(AcceptanceRateWarning):
        run_chains(cfg, chains=4)


def test_cutoff_contains_all_mass():
    for (n, m) in [(1, 2), (2, 2), (3, 5), (6, 6)]:
        p = EnsembleParams.from_dims(n, m)
        inside = _mass_within(p, default_cutoff(p))
        assert inside / n >= 1.0 - 1e-4


def _mass_within(p, cutoff):
    from scipy import integrate

    from bureshall.density import level_density_unrestricted

    val, _ = integrate.quad(
        lambda u: 2.0 * u * level_density_unrestricted(p, u * u),
        1e-8,
        math.sqrt(cutoff),
        limit=200,
    )
    return val


def test_export_snapshots_csv(tmp_path):
    from bureshall.loggas import export_snapshots_csv

    p = EnsembleParams.from_dims(2, 2)
    cfg = ChainConfig(params=p, n_steps=1200, burn_in=200, thin=10, seed=4)
    res = run_chains(cfg, chains=2)
    path = tmp_path / "snaps.csv"
    export_snapshots_csv(fixed_trace_samples(res.samples), path)
    lines = path.read_text().splitlines()
    assert lines[0] == "x_1,x_2"
    assert len(lines) == 1 + res.samples.shape[0]
