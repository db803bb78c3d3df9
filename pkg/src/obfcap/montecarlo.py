"""Monte Carlo network simulator at the SINR level.

Per trial: drop a Poisson number of users uniformly in the disk, draw the
fading projections |h^T b_k|^2 for every user and beam, form the beam SINRs
and keep the best user per beam. Only one beam is recorded per trial since
the beams of one trial share their users.

Reproducibility: trials are grouped in fixed blocks of ``BLOCK_SIZE``; block
``j`` draws from a Philox stream keyed by (master_seed, j). A trial's outcome
therefore depends only on the seed, its index and the parameters, never on
how blocks are spread over workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import ModelError, PathLossModel, SystemConfig, check_epsilon

BLOCK_SIZE = 512
MIN_CAPACITY_TRIALS = 1000


class Mode(str, Enum):
    PROJECTION = "projection"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class SimSeed:
    master_seed: int

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise ModelError("seed must be an unsigned 64-bit integer")

    def block_rng(self, block: int) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.master_seed), spawn_key=(int(block),))
        return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class TrialOutcome:
    num_users: int
    max_sinr: float

    @property
    def rate(self) -> float:
        return math.log1p(self.max_sinr)


class EmpiricalCdf:
    """Sorted sample of beam rates."""

    def __init__(self, samples):
        self.samples = np.sort(np.asarray(samples, dtype=float))
        self.samples.setflags(write=False)

    @property
    def trial_count(self) -> int:
        return self.samples.size

    def __len__(self):
        return self.samples.size

    def cdf(self, x):
        """Fraction of samples <= x."""
        return np.searchsorted(self.samples, x, side="right") / self.samples.size

    def quantile(self, q: float) -> float:
        """The ceil(q n)-th order statistic (1-based), q in (0, 1]."""
        if not 0 < q <= 1:
            raise ModelError(f"quantile level must lie in (0, 1], got {q}")
        n = self.samples.size
        # tolerance keeps e.g. 0.1 * 1000 from rounding up past 100
        k = max(math.ceil(q * n - 1e-9), 1)
        return float(self.samples[min(k, n) - 1])

    def ks_distance(self, cdf, cdf_left=None) -> float:
        """sup |F_n - F| against a model CDF.

        ``cdf_left(v)`` gives the left limit F(v-); it defaults to ``cdf``
        (continuous F). Both sides of every jump of F_n are checked, which
        also covers atoms of F located at sample values.
        """
        values, counts = np.unique(self.samples, return_counts=True)
        n = self.samples.size
        upper = np.cumsum(counts) / n
        lower = upper - counts / n
        f_at = np.array([cdf(v) for v in values], dtype=float)
        f_left = f_at if cdf_left is None else np.array([cdf_left(v) for v in values], dtype=float)
        return float(max(np.max(np.abs(upper - f_at)), np.max(np.abs(lower - f_left))))

    def dump(self, path):
        """Write one rate per line."""
        with open(path, "w", encoding="utf-8") as fh:
            for v in self.samples:
                fh.write(f"{float(v)!r}\n")


def ks_band(trials: int) -> float:
    """99% Kolmogorov-Smirnov acceptance band, 1.63 / sqrt(n)."""
    return 1.63 / math.sqrt(trials)


def drop_users(config: SystemConfig, model: PathLossModel, rng: np.random.Generator):
    """One PPP realisation in the disk: (distances, gains)."""
    config.require_finite("drop_users")
    n = rng.poisson(config.mean_users)
    # 1 - U lies in (0, 1], so d > 0 and the singular law stays finite
    d = config.radius * np.sqrt(1.0 - rng.random(n))
    return d, np.asarray(model.gain(d), dtype=float).reshape(-1)


def _inverse_snr(config, model, d):
    """(rho g)^-1 per user, computed without forming g for the singular law."""
    return np.asarray(model.attenuation(d), dtype=float).reshape(-1) / config.power


def haar_beams(rng: np.random.Generator, m: int, count: int) -> np.ndarray:
    """``count`` random m x m unitary matrices; columns are the beams."""
    z = (rng.standard_normal((count, m, m)) + 1j * rng.standard_normal((count, m, m))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=1, axis2=2)
    return q * (diag / np.abs(diag))[:, None, :]


def _projections(rng, n_users, m, mode, trial_of_user=None, n_trials=1):
    """|h^T b_k|^2 for every user (rows) and beam (columns)."""
    if mode is Mode.PROJECTION:
        return rng.standard_exponential((n_users, m))
    beams = haar_beams(rng, m, n_trials)
    h = (rng.standard_normal((n_users, m)) + 1j * rng.standard_normal((n_users, m))) / math.sqrt(2)
    if trial_of_user is None:
        trial_of_user = np.zeros(n_users, dtype=np.intp)
    proj = np.einsum("um,umk->uk", h, beams[trial_of_user])
    return proj.real**2 + proj.imag**2


def _sinr_from_projections(proj, inv_snr):
    m = proj.shape[1]
    out = np.empty_like(proj)
    for k in range(m):
        others = np.delete(proj, k, axis=1).sum(axis=1) if m > 1 else 0.0
        out[:, k] = proj[:, k] / (inv_snr + others)
    return out


def beam_sinrs(gains, config: SystemConfig, rng: np.random.Generator, mode=Mode.PROJECTION):
    """Beam SINRs for users with path-loss values ``gains``; shape (users, M).

    In explicit mode all users share one random beam set, as within a trial.
    """
    gains = np.atleast_1d(np.asarray(gains, dtype=float))
    if np.any(~(gains > 0)):
        raise ModelError("gains must be > 0")
    proj = _projections(rng, gains.size, config.beams, Mode(mode))
    return _sinr_from_projections(proj, 1.0 / (config.power * gains))


def simulate_block(config: SystemConfig, model: PathLossModel, seed: SimSeed, block: int,
                   mode=Mode.PROJECTION):
    """Simulate one full block. Returns (user counts, max SINR per trial and beam)."""
    mode = Mode(mode)
    rng = seed.block_rng(block)
    counts = rng.poisson(config.mean_users, size=BLOCK_SIZE)
    total = int(counts.sum())
    d = config.radius * np.sqrt(1.0 - rng.random(total))
    trial_of_user = np.repeat(np.arange(BLOCK_SIZE), counts)
    proj = _projections(rng, total, config.beams, mode, trial_of_user, BLOCK_SIZE)
    sinr = _sinr_from_projections(proj, _inverse_snr(config, model, d))
    best = np.zeros((BLOCK_SIZE, config.beams))
    occupied = counts > 0
    if total:
        starts = np.concatenate(([0], np.cumsum(counts)[:-1]))[occupied]
        best[occupied] = np.maximum.reduceat(sinr, starts, axis=0)
    return counts, best


def _block_worker(args):
    config, model, seed, block, mode, beam = args
    counts, best = simulate_block(config, model, seed, block, mode)
    return counts, best[:, beam]


def run_trials(config: SystemConfig, model: PathLossModel, trials: int, seed: SimSeed,
               mode=Mode.PROJECTION, beam: int = 0, workers: int = 1, outcomes: bool = False):
    """Empirical CDF of the beam rate log(1 + max SINR) over ``trials`` trials.

    With ``outcomes=True`` also returns the per-trial TrialOutcome list in
    trial order.
    """
    config.require_finite("run_trials")
    if trials < 1:
        raise ModelError("need at least one trial")
    if not 0 <= beam < config.beams:
        raise ModelError(f"beam index must be in [0, {config.beams})")
    mode = Mode(mode)
    n_blocks = -(-trials // BLOCK_SIZE)
    jobs = [(config, model, seed, j, mode, beam) for j in range(n_blocks)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_block_worker, jobs, chunksize=max(1, n_blocks // (4 * workers))))
    else:
        parts = [_block_worker(job) for job in jobs]
    counts = np.concatenate([p[0] for p in parts])[:trials]
    best = np.concatenate([p[1] for p in parts])[:trials]
    cdf = EmpiricalCdf(np.log1p(best))
    if outcomes:
        return cdf, [TrialOutcome(int(n), float(s)) for n, s in zip(counts, best)]
    return cdf


def empirical_outage_capacity(cdf: EmpiricalCdf, epsilon: float) -> float:
    """Lower eps-quantile of the simulated rates."""
    check_epsilon(epsilon)
    if cdf.trial_count < MIN_CAPACITY_TRIALS:
        raise ModelError(
            f"need at least {MIN_CAPACITY_TRIALS} trials for a capacity estimate, got {cdf.trial_count}")
    return cdf.quantile(epsilon)
