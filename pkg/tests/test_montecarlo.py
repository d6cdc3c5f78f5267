import math

import numpy as np
import pytest

from wignercorr import EnsembleSpec
from wignercorr.errors import DegenerateVariance
from wignercorr.montecarlo import (
    CHUNK,
    SamplerConfig,
    _joint_cumulant,
    estimate,
    sample_block,
    sample_matrix,
    scorecard,
    trace_powers,
)


def test_matrices_are_symmetric_with_zero_diagonal():
    cfg = SamplerConfig(n=6, samples=100, seed=3)
    m = sample_block(cfg, 0, 10)
    assert m.shape == (10, 6, 6)
    assert np.array_equal(m, m.transpose(0, 2, 1))
    assert np.all(np.diagonal(m, axis1=1, axis2=2) == 0)
    assert set(np.unique(m)) <= {-1.0, 0.0, 1.0}


def test_stream_is_addressable_by_index():
    cfg = SamplerConfig(n=5, distribution="gaussian", samples=1000, seed=11)
    block = sample_block(cfg, CHUNK - 3, CHUNK + 4)
    for i, idx in enumerate(range(CHUNK - 3, CHUNK + 4)):
        assert np.array_equal(block[i], sample_matrix(cfg, idx))
    other = SamplerConfig(n=5, distribution="gaussian", samples=1000, seed=12)
    assert not np.array_equal(sample_matrix(cfg, 0), sample_matrix(other, 0))


def test_estimates_are_reproducible():
    cfg = SamplerConfig(n=8, samples=2000, seed=5)
    a, b = estimate((4,), cfg), estimate((4,), cfg)
    assert a.estimate == b.estimate and a.standard_error == b.standard_error


def test_trace_powers_match_eigenvalues():
    cfg = SamplerConfig(n=7, distribution="uniform", param=2.0, samples=50)
    mats = sample_block(cfg, 0, 20)
    tr = trace_powers(mats, [2, 3, 6])
    ev = np.linalg.eigvalsh(mats)
    for k in (2, 3, 6):
        assert np.allclose(tr[k], (ev**k).sum(axis=1))


@pytest.mark.parametrize("dist,param", [("gaussian", 1.0), ("gaussian", 2.5), ("uniform", 1.5), ("two_point", 0.5)])
def test_entry_moments(dist, param):
    cfg = SamplerConfig(n=20, distribution=dist, param=param, samples=200)
    m = sample_block(cfg, 0, 200)
    iu = np.triu_indices(20, 1)
    x = m[:, iu[0], iu[1]].ravel()
    ens = cfg.ensemble()
    for j in (1, 2):
        se = np.std(x ** (2 * j)) / math.sqrt(len(x))
        assert abs(np.mean(x ** (2 * j)) - float(ens.v(j))) < 5 * se + 1e-12


@pytest.mark.parametrize("sig", [(2,), (4,), (2, 2), (4, 2), (3, 3)])
def test_gaussian_correlators_within_five_se(sig):
    cfg = SamplerConfig(n=10, distribution="gaussian", samples=40_000, seed=7)
    rep = estimate(sig, cfg)
    assert abs(rep.z_score) < 5


def test_raw_moment_estimate():
    cfg = SamplerConfig(n=10, samples=20_000, seed=1)
    rep = estimate((2, 2), cfg, connected=False)
    assert abs(rep.z_score) < 5
    # (tr A^2)^2 = (n(n-1))^2 for every sign matrix
    assert rep.exact_value == 90**2


def test_deterministic_statistic_is_degenerate():
    # tr A^2 = n(n-1) exactly for sign matrices, so every batch agrees
    cfg = SamplerConfig(n=6, samples=1000, seed=2)
    rep = estimate((2,), cfg)
    assert rep.degenerate and rep.z_score == 0 and rep.standard_error == 0
    wrong = SamplerConfig(
        n=6,
        distribution="custom",
        samples=1000,
        sampler=lambda rng, size: np.ones(size),
        ensemble_override=EnsembleSpec.custom([2]),
    )
    with pytest.raises(DegenerateVariance):
        estimate((2,), wrong)


def test_joint_cumulant_estimators():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(200_000)
    y = x + rng.standard_normal(200_000)
    assert _joint_cumulant([x, y]) == pytest.approx(1.0, abs=0.02)
    e = rng.exponential(size=400_000)
    assert _joint_cumulant([e, e, e]) == pytest.approx(2.0, abs=0.1)
    assert _joint_cumulant([e, e, e, e]) == pytest.approx(6.0, abs=0.6)


def test_scorecard_outputs():
    cfg = SamplerConfig(n=8, distribution="gaussian", samples=4000, seed=9)
    card = scorecard([(2,), (2, 2)], cfg)
    assert card.ok and not card.flagged
    csv_text = card.to_csv()
    assert csv_text.splitlines()[0] == "signature,connected,n,dist,samples,estimate,se,exact,z"
    assert len(csv_text.strip().splitlines()) == 3


def test_config_validation():
    with pytest.raises(ValueError):
        SamplerConfig(n=5, distribution="cauchy")
    with pytest.raises(ValueError):
        SamplerConfig(n=5, batch_count=5)
    with pytest.raises(ValueError):
        SamplerConfig(n=5, distribution="custom")


def test_diagonal_noise_has_no_exact_reference():
    cfg = SamplerConfig(n=6, diagonal_variance=1.0, samples=1000)
    rep = estimate((2,), cfg)
    assert rep.exact_value is None and rep.z_score is None
    assert rep.estimate == pytest.approx(30 + 6, rel=0.1)
