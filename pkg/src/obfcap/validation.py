"""Property suite behind ``obfcap validate``.

Each check returns a :class:`CheckResult`; ``quick`` subsamples the grids.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from .capacity import (
    CapacityEquation, capacity_finite_d, capacity_single_beam_closed_form,
    large_system_capacity, scaling_diagnostic, unbounded_log_slope,
)
from .model import INFINITE, PathLossModel, SystemConfig, pathloss_cdf
from .montecarlo import SimSeed, ks_band, run_trials
from .outage import outage_general, outage_unbounded, outage_bounded, rate_outage, sinr_outage
from .specfun import complete_gamma, lower_incomplete_gamma

DEFAULT_SEED = 20240601


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def as_dict(self):
        return dict(name=self.name, passed=bool(self.passed), detail=self.detail,
                    seconds=round(self.seconds, 3))


def outage_grid(quick=False):
    """Parameter grid shared by the oracle-equivalence and exponent checks."""
    xs = np.logspace(-1, 1, 5 if quick else 20)
    lams = (0.5, 1.0, 10.0)
    radii = (0.5, 1.0, 2.0, 5.0)
    alphas = (2.5, 4.0)
    beams = (1, 2, 4)
    powers = (1.0,) if quick else (0.5, 1.0, 2.0, 5.0, 10.0)
    return xs, lams, radii, alphas, beams, powers


def check_gamma_recurrence(quick=False):
    worst = 0.0
    for s, x in itertools.product((0.4, 0.5, 2 / 3), (0.1, 1.0, 10.0)):
        lhs = lower_incomplete_gamma(s + 1, x)
        rhs = s * lower_incomplete_gamma(s, x) - x**s * math.exp(-x)
        worst = max(worst, abs(lhs - rhs))
    return worst <= 1e-10, f"max recurrence error {worst:.2e} (tol 1e-10)"


def check_gamma_limits(quick=False):
    worst = 0.0
    bounded = True
    for s in np.linspace(0.05, 1.0, 20):
        worst = max(worst, abs(lower_incomplete_gamma(s, 50.0) - complete_gamma(s)))
        for x in np.logspace(-6, 2, 30):
            v = lower_incomplete_gamma(s, x)
            bounded &= 0.0 <= v <= complete_gamma(s) * (1 + 1e-15)
    return worst <= 1e-10 and bounded, f"|gamma(s,50) - Gamma(s)| <= {worst:.2e}, bounds ok={bounded}"


def _models():
    return [PathLossModel.unbounded(4), PathLossModel.bounded(4), PathLossModel.bounded(2.5),
            PathLossModel.guard_zone(4, 0.5), PathLossModel.shifted(3)]


def check_pathloss(quick=False):
    rng = np.random.default_rng(1)
    ok = True
    for model in _models():
        d = np.sort(rng.uniform(1e-3, 50, 2000))
        g = model.gain(d)
        ok &= bool(np.all(np.diff(g) <= 0) and np.all(g > 0))
    guard = PathLossModel.guard_zone(4, 0.5)
    ok &= guard.inverse(guard.gain(0.5)) == 0.0
    cfg = SystemConfig(1.0, 2.0)
    for model in (PathLossModel.bounded(4), PathLossModel.shifted(4), guard):
        ok &= abs(pathloss_cdf(model, cfg, model.gain(2.0))) < 1e-12
        ok &= pathloss_cdf(model, cfg, model.peak_gain) == 1.0
        gs = np.sort(rng.uniform(model.gain(2.0), model.peak_gain, 500))
        ok &= bool(np.all(np.diff(pathloss_cdf(model, cfg, gs)) >= 0))
    return ok, "gain monotone and positive, guard plateau inverse 0, F_G endpoints and monotone"


def check_oracle_equivalence(quick=False):
    xs, lams, radii, alphas, beams, powers = outage_grid(quick)
    worst, n = 0.0, 0
    for x, lam, radius, alpha, m, rho in itertools.product(xs, lams, radii, alphas, beams, powers):
        cfg = SystemConfig(lam, radius, m, rho)
        for model in (PathLossModel.unbounded(alpha), PathLossModel.bounded(alpha)):
            closed = sinr_outage(cfg, model, x, "closed").sinr_cdf_value
            quad = outage_general(cfg, model, x).sinr_cdf_value
            worst = max(worst, abs(closed - quad))
            n += 1
    return worst <= 1e-8, f"{n} points, max |quadrature - closed form| {worst:.2e} (tol 1e-8)"


def check_exponent_relation(quick=False):
    xs, lams, radii, alphas, beams, powers = outage_grid(quick)
    worst, n = 0.0, 0
    for x, lam, radius, alpha, m, rho in itertools.product(
            xs, lams, radii + (INFINITE,), alphas, beams, powers):
        cfg = SystemConfig(lam, radius, m, rho)
        lu = outage_unbounded(cfg, alpha, x).exponent
        lb = outage_bounded(cfg, alpha, x).exponent
        worst = max(worst, abs(lb - math.exp(-x / rho) * lu))
        n += 1
    return worst <= 1e-12, f"{n} points, max log-domain gap {worst:.2e} (tol 1e-12)"


def check_outage_monotonicity(quick=False):
    xs = np.linspace(0, 20, 41)
    ok = True
    for alpha, m in itertools.product((2.5, 4.0), (1, 2, 4)):
        for model in (PathLossModel.unbounded(alpha), PathLossModel.bounded(alpha)):
            base = SystemConfig(1.0, 1.0, m, 1.0)
            f = [sinr_outage(base, model, x).sinr_cdf_value for x in xs]
            ok &= all(b >= a for a, b in zip(f, f[1:]))
            ok &= all(0.0 <= v <= 1.0 for v in f)
            for x in (0.5, 2.0):
                by_lam = [sinr_outage(base.replace(lam=lam), model, x).sinr_cdf_value
                          for lam in (0.1, 1, 10)]
                ok &= by_lam[0] >= by_lam[1] >= by_lam[2]
                by_d = [sinr_outage(base.replace(radius=r), model, x).sinr_cdf_value
                        for r in (0.5, 1, 2, 5, INFINITE)]
                ok &= all(a >= b for a, b in zip(by_d, by_d[1:]))
            for x in (0.5, 2.0):
                ub = sinr_outage(base, PathLossModel.unbounded(alpha), x).sinr_cdf_value
                bd = sinr_outage(base, PathLossModel.bounded(alpha), x).sinr_cdf_value
                ok &= bd >= ub
    return ok, "F* non-decreasing in x, non-increasing in lambda and D, bounded >= unbounded"


def check_single_beam_closed_form(quick=False):
    worst = 0.0
    for lam, alpha, eps in itertools.product((0.1, 1, 10, 100), (2.5, 3, 4), (0.01, 0.1, 0.5)):
        cfg = SystemConfig(lam, INFINITE, 1, 1.0)
        solved = large_system_capacity(cfg, PathLossModel.unbounded(alpha), eps).capacity_nats
        worst = max(worst, abs(solved - capacity_single_beam_closed_form(cfg, alpha, eps)))
    return worst <= 1e-9, f"max |solver - closed form| {worst:.2e} nats (tol 1e-9)"


def residual_grid():
    lams = np.logspace(-1, 12, 14)
    return lams, (1, 2, 4), (2.5, 4.0), (0.01, 0.1)


def check_root_residuals(quick=False):
    worst, unique = 0.0, True
    lams, beams, alphas, epsilons = residual_grid()
    for lam, m, alpha, eps in itertools.product(lams, beams, alphas, epsilons):
        cfg = SystemConfig(lam, INFINITE, m, 1.0)
        for model in (PathLossModel.unbounded(alpha), PathLossModel.bounded(alpha)):
            eq = CapacityEquation.build(cfg, model, eps)
            sol = large_system_capacity(cfg, model, eps)
            worst = max(worst, sol.residual)
            lo, hi = sol.bracket
            if lo < hi:
                unique &= eq.log_form(lo) <= 0 <= eq.log_form(hi)
            ys = 1 + np.logspace(-10, math.log10(max(sol.y_star, 2) * 10), 200)
            vals = [eq.log_form(y) for y in ys]
            unique &= all(b > a for a, b in zip(vals, vals[1:]))
    return worst <= 1e-9 and unique, f"max residual {worst:.2e} (tol 1e-9), single sign change={unique}"


def check_capacity_monotone(quick=False):
    ok = True
    for alpha, m in itertools.product((2.5, 4.0), (1, 2, 4)):
        ub, b = PathLossModel.unbounded(alpha), PathLossModel.bounded(alpha)
        for model in (ub, b):
            caps = [large_system_capacity(SystemConfig(lam, INFINITE, m), model, 0.1).capacity_nats
                    for lam in (0.1, 1, 10, 100, 1e4)]
            ok &= all(y > x for x, y in zip(caps, caps[1:]))
            caps = [large_system_capacity(SystemConfig(10, INFINITE, m), model, e).capacity_nats
                    for e in (0.01, 0.1, 0.5, 0.99)]
            ok &= all(y > x for x, y in zip(caps, caps[1:]))
        for lam, eps in itertools.product((0.1, 1, 10, 1e6), (0.01, 0.1, 0.5)):
            cfg = SystemConfig(lam, INFINITE, m)
            ok &= (large_system_capacity(cfg, b, eps).capacity_nats
                   <= large_system_capacity(cfg, ub, eps).capacity_nats)
    return ok, "capacity increasing in lambda and eps; bounded <= unbounded"


def check_finite_d_convergence(quick=False):
    cfg = SystemConfig(10, INFINITE, 2, 1.0)
    gaps = {}
    ok = True
    for model in (PathLossModel.unbounded(4), PathLossModel.bounded(4)):
        ref = large_system_capacity(cfg, model, 0.1).capacity_nats
        ok &= abs(capacity_finite_d(cfg, model, 0.1).capacity_nats - ref) <= 1e-9
        at5 = capacity_finite_d(cfg.replace(radius=5), model, 0.1).capacity_nats
        ok &= abs(at5 - ref) / ref <= 0.01
        at2 = capacity_finite_d(cfg.replace(radius=2), model, 0.1).capacity_nats
        gaps[model.label] = abs(at2 - ref) / ref
        ok &= gaps[model.label] <= 0.05
    ok &= gaps["unbounded"] <= gaps["bounded"]
    return ok, ("relative gap at D=2: "
                + ", ".join(f"{k} {v:.2e}" for k, v in gaps.items()))


def check_scaling(quick=False):
    cfg = SystemConfig(1.0, INFINITE, 2, 1.0)
    bounded = scaling_diagnostic(cfg, PathLossModel.bounded(4), 0.1, [1e2, 1e4, 1e6])[-1]
    b_err = abs(bounded["doubling"] - math.log(2)) / math.log(2)
    unbounded = scaling_diagnostic(cfg, PathLossModel.unbounded(4), 0.1, [1e2, 1e4, 1e6])[-1]
    u_err = abs(unbounded["doubling"] - unbounded["predicted"]) / unbounded["predicted"]
    single = scaling_diagnostic(cfg.replace(beams=1), PathLossModel.unbounded(4), 0.1,
                                [1e1, 1e2, 1e4])[-1]
    s_err = abs(single["doubling"] - single["predicted"]) / single["predicted"]
    ok = b_err <= 0.25 and u_err <= 0.10 and s_err <= 0.05
    slope = unbounded_log_slope(4, 2)
    return ok, (f"bounded doubling {bounded['doubling']:.4f} vs log 2 ({b_err:.1%}); unbounded M=2 "
                f"doubling {unbounded['doubling']:.3f} vs {slope:.3f} log(lam) ({u_err:.1%}); "
                f"M=1 {single['doubling']:.3f} vs {single['predicted']:.3f} ({s_err:.1%})")


def check_alpha_crossover(quick=False):
    def cap(lam, alpha):
        cfg = SystemConfig(lam, INFINITE, 2, 1.0)
        return large_system_capacity(cfg, PathLossModel.unbounded(alpha), 0.01).capacity_nats

    low = cap(0.1, 4) < cap(0.1, 3)
    high = cap(100, 4) > cap(100, 3)
    return low and high, f"decrease 3->4 at lambda=0.1: {low}; increase at lambda=100: {high}"


def check_monte_carlo(quick=False):
    trials = 20_000 if quick else 100_000
    band = ks_band(trials)
    worst = 0.0
    for model in (PathLossModel.unbounded(4), PathLossModel.bounded(4)):
        cfg = SystemConfig(1.0, 1.0, 2, 1.0)
        cdf = run_trials(cfg, model, trials, SimSeed(DEFAULT_SEED))
        worst = max(worst, cdf.ks_distance(*analytic_rate_cdf(cfg, model)))
    return worst <= band, f"{trials} trials, max KS {worst:.4f} (band {band:.4f})"


def analytic_rate_cdf(config, model, method="auto"):
    """(F_r, left-limit F_r) pair; the only atom is the empty cell at rate 0."""
    def cdf(r):
        return rate_outage(config, model, float(r), method).rate_cdf_value

    def left(r):
        return 0.0 if r <= 0 else cdf(r)

    return cdf, left


CHECKS = [
    ("gamma_recurrence", check_gamma_recurrence),
    ("gamma_limits", check_gamma_limits),
    ("pathloss_properties", check_pathloss),
    ("oracle_equivalence", check_oracle_equivalence),
    ("exponent_relation", check_exponent_relation),
    ("outage_monotonicity", check_outage_monotonicity),
    ("single_beam_closed_form", check_single_beam_closed_form),
    ("root_residuals", check_root_residuals),
    ("capacity_monotonicity", check_capacity_monotone),
    ("finite_radius_convergence", check_finite_d_convergence),
    ("scaling_laws", check_scaling),
    ("alpha_crossover", check_alpha_crossover),
    ("monte_carlo_ks", check_monte_carlo),
]


def run_all(quick=False, names=None):
    results = []
    for name, fn in CHECKS:
        if names and name not in names:
            continue
        start = time.perf_counter()
        try:
            passed, detail = fn(quick)
        except Exception as exc:  # a crashing property is a failed property
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(passed), detail, time.perf_counter() - start))
    return results
