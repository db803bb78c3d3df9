import math

import numpy as np
import pytest
from scipy import stats

from obfcap.capacity import capacity_finite_d
from obfcap.model import INFINITE, ModelError, PathLossModel, SystemConfig
from obfcap.montecarlo import (
    BLOCK_SIZE, EmpiricalCdf, Mode, SimSeed, beam_sinrs, drop_users, empirical_outage_capacity,
    haar_beams, ks_band, run_trials, simulate_block,
)

UB, B = PathLossModel.unbounded(4), PathLossModel.bounded(4)


def test_poisson_counts():
    cfg = SystemConfig(4 / math.pi, 1.0, 2)
    _, outcomes = run_trials(cfg, UB, 100_000, SimSeed(11), outcomes=True)
    n = np.array([o.num_users for o in outcomes])
    assert abs(n.mean() - 4) <= 0.05
    assert abs(n.var() - 4) <= 0.15


def test_positions_uniform_in_disk():
    rng = np.random.default_rng(5)
    cfg = SystemConfig(100_000 / (math.pi * 4), 2.0, 2)
    d, g = drop_users(cfg, UB, rng)
    assert d.min() > 0 and d.max() <= 2.0
    assert stats.kstest(d**2 / 4, "uniform").statistic <= 0.01
    assert np.all(np.isfinite(g))


def test_tiny_distance_stays_finite():
    rng = np.random.default_rng(0)
    cfg = SystemConfig(1.0, 1.0, 2)
    g = UB.gain(np.array([1e-12]))
    s = beam_sinrs(g, cfg, rng)
    assert np.all(np.isfinite(s)) and np.all(s >= 0)


def test_single_beam_fading_is_exponential():
    rng = np.random.default_rng(1)
    cfg = SystemConfig(1.0, 1.0, 1, 2.0)
    g = np.full(100_000, 0.5)
    s = beam_sinrs(g, cfg, rng)[:, 0]
    assert stats.kstest(s / (2.0 * 0.5), "expon").statistic <= 0.01


@pytest.mark.parametrize("mode", list(Mode))
def test_two_beam_sinr_probability(mode):
    rng = np.random.default_rng(2)
    cfg = SystemConfig(1.0, 1.0, 2)
    if mode is Mode.PROJECTION:
        s = beam_sinrs(np.ones(100_000), cfg, rng, mode)[:, 0]
    else:
        # one beam set per user, as between independent trials
        s = np.concatenate([beam_sinrs(np.ones(1), cfg, rng, mode)[:, 0] for _ in range(20_000)])
    expected = 1 - math.exp(-1) / 2
    tol = 0.005 if mode is Mode.PROJECTION else 0.01
    assert abs(np.mean(s <= 1) - expected) <= tol


def test_projection_and_explicit_modes_agree(fig2_config):
    a = run_trials(fig2_config, UB, 50_000, SimSeed(7), Mode.PROJECTION)
    b = run_trials(fig2_config, UB, 50_000, SimSeed(8), Mode.EXPLICIT)
    assert stats.ks_2samp(a.samples, b.samples).statistic <= 0.015


def test_haar_beams_are_unitary():
    q = haar_beams(np.random.default_rng(0), 3, 10)
    eye = np.einsum("nij,nik->njk", q.conj(), q)
    assert np.allclose(eye, np.eye(3)[None], atol=1e-12)


def test_empty_cells_and_rate_cdf(fig2_config):
    cdf_ub, outcomes = run_trials(fig2_config, UB, 100_000, SimSeed(1), outcomes=True)
    empty = np.mean([o.num_users == 0 for o in outcomes])
    assert abs(empty - math.exp(-math.pi)) <= 0.005
    assert abs(cdf_ub.cdf(math.log(2)) - 0.309403631220037) <= 0.01
    cdf_b = run_trials(fig2_config, B, 100_000, SimSeed(1))
    assert abs(cdf_b.cdf(math.log(2)) - 0.649493443320124) <= 0.01
    assert all(o.rate == 0.0 for o in outcomes if o.num_users == 0)


def test_quantile_convention():
    cdf = EmpiricalCdf(np.arange(1, 1001, dtype=float))
    assert cdf.quantile(0.1) == 100.0
    assert cdf.quantile(0.1001) == 101.0
    assert cdf.quantile(1.0) == 1000.0
    qs = [cdf.quantile(q) for q in np.linspace(0.01, 1, 50)]
    assert all(b >= a for a, b in zip(qs, qs[1:]))
    with pytest.raises(ModelError):
        cdf.quantile(0.0)


def test_capacity_needs_enough_trials():
    with pytest.raises(ModelError):
        empirical_outage_capacity(EmpiricalCdf(np.ones(999)), 0.1)
    assert empirical_outage_capacity(EmpiricalCdf(np.zeros(1000)), 0.1) == 0.0


def test_ks_distance_with_atom():
    cdf = EmpiricalCdf([0.0, 0.0, 1.0, 2.0])
    # F has atom 0.5 at 0 then uniform on (0, 2]
    f = lambda v: 0.5 + 0.25 * min(max(v, 0), 2) if v >= 0 else 0.0
    left = lambda v: 0.0 if v <= 0 else f(v)
    assert cdf.ks_distance(f, left) == pytest.approx(0.25)
    assert ks_band(10_000) == pytest.approx(0.0163)


def test_empirical_capacity_matches_analytic():
    cfg = SystemConfig(10.0, 5.0, 2)
    cdf = run_trials(cfg, UB, 100_000, SimSeed(3))
    sim = empirical_outage_capacity(cdf, 0.1)
    ref = capacity_finite_d(cfg, UB, 0.1).capacity_nats
    assert abs(sim - ref) / ref <= 0.03


def test_deterministic_across_workers(fig2_config):
    a = run_trials(fig2_config, B, 3 * BLOCK_SIZE + 17, SimSeed(42), workers=1)
    b = run_trials(fig2_config, B, 3 * BLOCK_SIZE + 17, SimSeed(42), workers=2)
    assert np.array_equal(a.samples, b.samples)
    c = run_trials(fig2_config, B, 3 * BLOCK_SIZE + 17, SimSeed(43))
    assert not np.array_equal(a.samples, c.samples)


def test_prefix_property(fig2_config):
    _, short = run_trials(fig2_config, UB, 1000, SimSeed(9), outcomes=True)
    _, long = run_trials(fig2_config, UB, 2000, SimSeed(9), outcomes=True)
    assert long[:1000] == short


def test_beams_are_symmetric_in_explicit_mode(fig2_config):
    a = run_trials(fig2_config, UB, 20_000, SimSeed(4), Mode.EXPLICIT, beam=0)
    b = run_trials(fig2_config, UB, 20_000, SimSeed(4), Mode.EXPLICIT, beam=1)
    assert stats.ks_2samp(a.samples, b.samples).statistic <= 0.025


def test_block_shapes(fig2_config):
    counts, best = simulate_block(fig2_config, UB, SimSeed(0), 0)
    assert counts.shape == (BLOCK_SIZE,) and best.shape == (BLOCK_SIZE, 2)
    assert np.all(best[counts == 0] == 0) and np.all(best[counts > 0] > 0)


def test_rejects_bad_arguments(fig2_config):
    with pytest.raises(ModelError):
        run_trials(SystemConfig(1.0, INFINITE), UB, 10, SimSeed(0))
    with pytest.raises(ModelError):
        run_trials(fig2_config, UB, 0, SimSeed(0))
    with pytest.raises(ModelError):
        run_trials(fig2_config, UB, 10, SimSeed(0), beam=2)
    with pytest.raises(ModelError):
        SimSeed(-1)


def test_dump(tmp_path):
    cdf = EmpiricalCdf([0.5, 0.25])
    path = tmp_path / "s.txt"
    cdf.dump(path)
    assert [float(v) for v in path.read_text().split()] == [0.25, 0.5]
