import itertools
import math

import numpy as np
import pytest
from scipy.optimize import brentq

from obfcap.capacity import (
    CapacityEquation, EquationKind, capacity_finite_d, capacity_single_beam_closed_form,
    large_system_capacity, scaling_diagnostic, solve_capacity_bounded, solve_capacity_unbounded,
    unbounded_log_slope,
)
from obfcap.model import INFINITE, ModelError, PathLossModel, SystemConfig, UnsupportedOperation
from obfcap.outage import sinr_outage

UB, B = PathLossModel.unbounded(4), PathLossModel.bounded(4)


def eq(lam=10.0, m=2, alpha=4.0, rho=1.0, eps=0.1, model="unbounded"):
    return CapacityEquation.build(SystemConfig(lam, INFINITE, m, rho), model, eps, alpha)


def test_coefficients():
    e = eq()
    assert e.a == 2.0
    assert e.b == pytest.approx(2 * 10 * math.pi / 4 * math.sqrt(math.pi), rel=1e-15)
    assert math.exp(e.log_target) == pytest.approx(146.203661567074513, rel=1e-13)


def test_single_beam_closed_form_example():
    cfg = SystemConfig(1.0, INFINITE, 1, 1.0)
    closed = capacity_single_beam_closed_form(cfg, 4, 0.1)
    assert closed == pytest.approx(0.900988899979348570, rel=1e-14)
    sol = solve_capacity_unbounded(eq(lam=1.0, m=1))
    assert abs(sol.capacity_nats - closed) <= 1e-9


def test_two_beam_example_against_polynomial_roots():
    sol = solve_capacity_unbounded(eq())
    roots = np.roots([1.0, -1.0, 0.0, -146.203661567074513])
    real = max(r.real for r in roots if abs(r.imag) < 1e-9)
    assert sol.y_star == pytest.approx(real, rel=1e-13)
    assert sol.capacity_nats == pytest.approx(1.7269356238281506, abs=1e-12)
    assert sol.residual <= 1e-9
    assert sol.extra["relative_polynomial_residual"] <= 1e-12


@pytest.mark.parametrize("m", [2, 3, 4])
def test_unbounded_root_against_brentq(m):
    e = eq(lam=3.0, m=m, alpha=3.0, eps=0.05)
    k = math.exp(e.log_target)
    ref = brentq(lambda y: y ** (e.a + 1) - y**e.a - k, 1.0, 1e6, xtol=1e-15, rtol=1e-15)
    assert solve_capacity_unbounded(e).y_star == pytest.approx(ref, rel=1e-12)


def test_bounded_root_against_brentq_on_printed_form():
    e = eq(model="bounded")
    target = e.alpha / 2 * math.log(-e.b / math.log(e.epsilon))

    def printed(y):
        return math.log(y**e.a * (y - 1)) + e.alpha / (2 * e.rho) * (y - 1) - target

    ref = brentq(printed, 1 + 1e-12, 100, xtol=1e-15, rtol=1e-15)
    sol = solve_capacity_bounded(e)
    assert sol.y_star == pytest.approx(ref, rel=1e-12)
    # exponentiating the printed form reproduces K
    y = sol.y_star
    lhs = y**e.a * (y - 1) * math.exp(e.alpha / (2 * e.rho) * (y - 1))
    assert lhs == pytest.approx((-e.b / math.log(e.epsilon)) ** (e.alpha / 2), rel=1e-8)


def test_bounded_below_unbounded():
    assert solve_capacity_bounded(eq(model="bounded")).capacity_nats < solve_capacity_unbounded(eq()).capacity_nats


def test_wrong_kind_rejected():
    with pytest.raises(ModelError):
        solve_capacity_bounded(eq())
    with pytest.raises(ModelError):
        solve_capacity_unbounded(eq(model="bounded"))
    with pytest.raises(UnsupportedOperation):
        CapacityEquation.build(SystemConfig(1, INFINITE), PathLossModel.shifted(4), 0.1)


def test_capacity_grows_with_epsilon():
    caps = [solve_capacity_unbounded(eq(eps=e)).capacity_nats for e in (0.01, 0.5, 0.99)]
    assert caps[0] < caps[1] < caps[2]


@pytest.mark.parametrize("lam,alpha,eps", list(itertools.product((0.1, 1, 10, 100), (2.5, 3, 4), (0.01, 0.1, 0.5))))
def test_single_beam_solver_matches_closed_form(lam, alpha, eps):
    cfg = SystemConfig(lam, INFINITE, 1, 1.0)
    solved = large_system_capacity(cfg, PathLossModel.unbounded(alpha), eps).capacity_nats
    assert abs(solved - capacity_single_beam_closed_form(cfg, alpha, eps)) <= 1e-9


@pytest.mark.parametrize("kind", ["unbounded", "bounded"])
@pytest.mark.parametrize("m,alpha,eps", list(itertools.product((1, 2, 4), (2.5, 4.0), (0.01, 0.1))))
def test_residuals_and_uniqueness(kind, m, alpha, eps):
    for lam in np.logspace(-1, 12, 14):
        e = eq(lam=lam, m=m, alpha=alpha, eps=eps, model=kind)
        sol = large_system_capacity(SystemConfig(lam, INFINITE, m), PathLossModel(kind, alpha), eps)
        assert sol.residual <= 1e-9
        assert sol.y_star > 1 and sol.capacity_nats > 0
        lo, hi = sol.bracket
        assert e.log_form(lo) <= 0 <= e.log_form(hi) or lo == hi
        assert sol.iterations <= 200


def test_root_near_one_is_resolved():
    # tiny intensity puts y* just above 1
    e = eq(lam=1e-6, m=4, alpha=4.0, eps=0.01)
    sol = solve_capacity_unbounded(e)
    assert 0 < sol.y_star - 1 < 1e-6
    assert sol.residual <= 1e-9


def test_finite_radius_floor():
    cfg = SystemConfig(1.0, 1.0, 2, 1.0)
    sol = capacity_finite_d(cfg, UB, math.exp(-math.pi) * 0.999)
    assert sol.outage_floor and sol.capacity_nats == 0.0
    assert not capacity_finite_d(cfg, UB, math.exp(-math.pi) * 1.001).outage_floor


def test_finite_radius_quantile_matches_grid_scan():
    cfg = SystemConfig(1.0, 1.5, 2, 1.0)
    sol = capacity_finite_d(cfg, B, 0.3)
    xs = np.linspace(0, 3, 30001)
    f = np.array([sinr_outage(cfg, B, x).sinr_cdf_value for x in xs])
    x_scan = xs[np.argmax(f >= 0.3)]
    assert sol.y_star - 1 == pytest.approx(x_scan, abs=1e-4)
    assert abs(sinr_outage(cfg, B, sol.y_star - 1).sinr_cdf_value - 0.3) <= 1e-10


def test_finite_radius_delegates_for_infinite_cell(large_cell):
    for model in (UB, B):
        a = capacity_finite_d(large_cell, model, 0.1)
        b = large_system_capacity(large_cell, model, 0.1)
        assert a.capacity_nats == b.capacity_nats


def test_finite_radius_converges(large_cell):
    for model in (UB, B):
        ref = large_system_capacity(large_cell, model, 0.1).capacity_nats
        at5 = capacity_finite_d(large_cell.replace(radius=5.0), model, 0.1).capacity_nats
        assert abs(at5 - ref) / ref <= 0.01
        caps = [capacity_finite_d(large_cell.replace(radius=r), model, 0.1).capacity_nats
                for r in (0.3, 0.5, 1, 2, 5)]
        assert all(b >= a for a, b in zip(caps, caps[1:]))


def test_finite_radius_general_models():
    cfg = SystemConfig(2.0, 2.0, 2, 1.0)
    for model in (PathLossModel.guard_zone(4, 0.5), PathLossModel.shifted(4)):
        sol = capacity_finite_d(cfg, model, 0.2)
        assert sol.capacity_nats > 0
        assert abs(sinr_outage(cfg, model, sol.y_star - 1).sinr_cdf_value - 0.2) <= 1e-10


def test_monotone_in_lambda_and_bounded_below_unbounded():
    for m in (1, 2, 4):
        for model in (UB, B):
            caps = [large_system_capacity(SystemConfig(l, INFINITE, m), model, 0.1).capacity_nats
                    for l in (0.1, 1, 10, 1e3, 1e6)]
            assert all(b > a for a, b in zip(caps, caps[1:]))
        for lam in (0.1, 10, 1e8):
            cfg = SystemConfig(lam, INFINITE, m)
            assert (large_system_capacity(cfg, B, 0.1).capacity_nats
                    <= large_system_capacity(cfg, UB, 0.1).capacity_nats)


def test_scaling_diagnostic_rows():
    rows = scaling_diagnostic(SystemConfig(1.0, INFINITE, 2), B, 0.1, [1e2, 1e4, 1e6])
    assert [r["lam"] for r in rows] == [1e2, 1e4, 1e6]
    last = rows[-1]
    assert abs(last["doubling"] - math.log(2)) / math.log(2) <= 0.25
    rows = scaling_diagnostic(SystemConfig(1.0, INFINITE, 2), UB, 0.1, [1e2, 1e4, 1e6])
    assert rows[-1]["doubling"] == pytest.approx(unbounded_log_slope(4, 2) * math.log(1e6), rel=0.01)
    with pytest.raises(ModelError):
        scaling_diagnostic(SystemConfig(1.0, INFINITE, 2), B, 0.1, [1, 10])


def test_single_beam_closed_form_doubling():
    cfg = SystemConfig(1.0, INFINITE, 1)
    c = lambda lam: capacity_single_beam_closed_form(cfg.replace(lam=lam), 4, 0.1)
    # log(1 + c lam^2) gains log(lam^2) when lam is squared
    assert c(1e8) - c(1e4) == pytest.approx(2 * math.log(1e4), rel=0.05)


def test_bounded_double_log_signature():
    cfg = SystemConfig(1.0, INFINITE, 2)
    c6 = large_system_capacity(cfg.replace(lam=1e6), B, 0.1).capacity_nats
    c12 = large_system_capacity(cfg.replace(lam=1e12), B, 0.1).capacity_nats
    assert abs((c12 - c6) - math.log(2)) / math.log(2) <= 0.25
