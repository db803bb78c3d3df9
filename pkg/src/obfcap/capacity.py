"""Beam outage capacity.

Large-system capacities come from the root y* > 1 of

    unbounded:  y^a (y - 1) = K
    bounded:    log(y^a (y - 1)) + alpha/(2 rho) (y - 1) = log K

with a = alpha (M - 1) / 2, b = 2 lam pi Gamma(2/alpha) rho^(2/alpha) / alpha
and K = (-b / log eps)^(alpha/2). Both left sides are strictly increasing in
y, so a bracketed bisection always converges. Finite cells invert the
closed-form (or quadrature) outage CDF directly.

All capacities are in nats/s/Hz.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .model import Kind, ModelError, PathLossModel, SystemConfig, UnsupportedOperation, check_epsilon
from .outage import sinr_outage
from .specfun import complete_gamma

MAX_ITERATIONS = 200
RESIDUAL_TOLERANCE = 1e-9
CDF_TOLERANCE = 1e-10
LOWER_OFFSET = 1e-12


class ConvergenceError(ArithmeticError):
    pass


class EquationKind(str, Enum):
    UNBOUNDED = "unbounded"
    BOUNDED = "bounded"


@dataclass(frozen=True)
class CapacityEquation:
    a: float
    b: float
    alpha: float
    rho: float
    epsilon: float
    kind: EquationKind

    def __post_init__(self):
        check_epsilon(self.epsilon)
        if self.a < 0 or not self.b > 0:
            raise ModelError("need a >= 0 and b > 0")

    @classmethod
    def build(cls, config: SystemConfig, model: PathLossModel | Kind | str, epsilon: float,
              alpha: float | None = None) -> "CapacityEquation":
        if isinstance(model, PathLossModel):
            kind, alpha = model.kind, model.alpha
        else:
            kind = Kind(model)
        if kind not in (Kind.UNBOUNDED, Kind.BOUNDED):
            raise UnsupportedOperation(f"no large-system capacity equation for {kind.value}")
        if alpha is None or not alpha > 2:
            raise ModelError(f"path-loss exponent must be > 2, got {alpha}")
        a = alpha * (config.beams - 1) / 2.0
        b = (2.0 * config.lam * math.pi / alpha * complete_gamma(2.0 / alpha)
             * config.power ** (2.0 / alpha))
        return cls(a, b, alpha, config.power, epsilon, EquationKind(kind.value))

    @property
    def log_target(self) -> float:
        """log K = (alpha/2) log(-b / log eps)."""
        return self.alpha / 2.0 * (math.log(self.b) - math.log(-math.log(self.epsilon)))

    def log_form(self, y: float) -> float:
        """Equation value in log form, written in u = y - 1 to keep precision near y = 1."""
        return self._log_form_u(y - 1.0)

    def _log_form_u(self, u: float) -> float:
        value = self.a * math.log1p(u) + math.log(u) - self.log_target
        if self.kind is EquationKind.BOUNDED:
            value += self.alpha / (2.0 * self.rho) * u
        return value

    def polynomial(self, y: float) -> float:
        """y^(a+1) - y^a - K for the unbounded equation, as printed."""
        if self.kind is not EquationKind.UNBOUNDED:
            raise ModelError("polynomial form only exists for the unbounded equation")
        return y ** (self.a + 1) - y**self.a - math.exp(self.log_target)


@dataclass(frozen=True)
class CapacitySolution:
    """Solver output. ``residual`` is in the units of the equation solved:
    the log form for root equations, |F*(x) - eps| for finite cells."""

    y_star: float
    capacity_nats: float
    residual: float
    iterations: int
    bracket: tuple[float, float]
    outage_floor: bool = False
    method: str = ""
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def capacity_bits(self) -> float:
        return self.capacity_nats / math.log(2.0)


def _bisect_increasing(f, lo, hi, iterations=0):
    """Bisect an increasing f with f(lo) < 0 < f(hi) to full precision.

    Geometric midpoints while the bracket spans more than a factor of two,
    arithmetic after that.
    """
    while True:
        if iterations >= MAX_ITERATIONS:
            raise ConvergenceError(f"bisection exceeded {MAX_ITERATIONS} iterations")
        iterations += 1
        mid = math.sqrt(lo * hi) if lo > 0 and hi > 2.0 * lo else 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return lo, hi, iterations
        fm = f(mid)
        if fm == 0:
            return mid, mid, iterations
        if fm < 0:
            lo = mid
        else:
            hi = mid


def _solve(eq: CapacityEquation) -> CapacitySolution:
    f = eq._log_form_u
    iterations = 0
    lo = LOWER_OFFSET
    while f(lo) >= 0:
        lo *= 1e-6
        iterations += 1
        if lo < 1e-300:
            raise ConvergenceError("root lies below the smallest representable bracket")
    hi = 1.0
    while f(hi) <= 0:
        hi *= 2.0
        iterations += 1
        if iterations > MAX_ITERATIONS:
            raise ConvergenceError("could not bracket the root")
    lo, hi, iterations = _bisect_increasing(f, lo, hi, iterations)
    u = lo if abs(f(lo)) <= abs(f(hi)) else hi
    y = 1.0 + u
    residual = abs(f(u))
    extra = {}
    if eq.kind is EquationKind.UNBOUNDED:
        k = math.exp(eq.log_target)
        extra["relative_polynomial_residual"] = abs(eq.polynomial(y)) / k if k > 0 else 0.0
    return CapacitySolution(
        y_star=y, capacity_nats=math.log1p(u), residual=residual, iterations=iterations,
        bracket=(1.0 + lo, 1.0 + hi), method=f"root-{eq.kind.value}", extra=extra,
    )


def solve_capacity_unbounded(eq: CapacityEquation) -> CapacitySolution:
    if eq.kind is not EquationKind.UNBOUNDED:
        raise ModelError("expected the unbounded capacity equation")
    return _solve(eq)


def solve_capacity_bounded(eq: CapacityEquation) -> CapacitySolution:
    if eq.kind is not EquationKind.BOUNDED:
        raise ModelError("expected the bounded capacity equation")
    return _solve(eq)


def capacity_single_beam_closed_form(config: SystemConfig, alpha: float, epsilon: float) -> float:
    """Unbounded-law large-system capacity for M = 1 in closed form."""
    check_epsilon(epsilon)
    if config.beams != 1:
        raise ModelError("closed form only holds for a single beam")
    inner = -2.0 * config.lam * math.pi * complete_gamma(2.0 / alpha) / (alpha * math.log(epsilon))
    return math.log1p(config.power * inner ** (alpha / 2.0))


def large_system_capacity(config: SystemConfig, model: PathLossModel, epsilon: float) -> CapacitySolution:
    eq = CapacityEquation.build(config, model, epsilon)
    return _solve(eq)


def capacity_finite_d(config: SystemConfig, model: PathLossModel, epsilon: float,
                      method: str = "auto") -> CapacitySolution:
    """Capacity log(1 + F*^-1(eps)) for a cell of finite radius.

    Infinite cells go to the root equations. If eps does not exceed the
    empty-cell probability exp(-lam pi D^2) no positive rate meets the
    target; capacity 0 is returned with ``outage_floor`` set.
    """
    check_epsilon(epsilon)
    if not config.finite:
        return large_system_capacity(config, model, epsilon)
    log_eps = math.log(epsilon)
    floor_log = -config.mean_users
    if log_eps <= floor_log:
        return CapacitySolution(1.0, 0.0, 0.0, 0, (1.0, 1.0), outage_floor=True,
                                method="finite-floor")

    def f(x):
        return sinr_outage(config, model, x, method).exponent - log_eps

    iterations = 0
    hi = 1.0
    while f(hi) < 0:
        hi *= 2.0
        iterations += 1
        if iterations > MAX_ITERATIONS:
            raise ConvergenceError("could not bracket the outage quantile")
    lo, hi, iterations = _bisect_increasing(f, 0.0, hi, iterations)
    # inf{x : F*(x) >= eps} is the upper end of the collapsed bracket
    x = hi
    residual = abs(math.exp(f(x) + log_eps) - epsilon)
    if residual > CDF_TOLERANCE:
        raise ConvergenceError(f"outage quantile residual {residual:.3g} above tolerance")
    return CapacitySolution(1.0 + x, math.log1p(x), residual, iterations, (1.0 + lo, 1.0 + hi),
                            method=f"finite-{model.label}")


def scaling_diagnostic(config: SystemConfig, model: PathLossModel, epsilon: float, lambdas):
    """Large-system capacities over an increasing lambda grid.

    Each row holds C(lam), C(lam^2) and the doubling statistic
    C(lam^2) - C(lam), plus its leading-order prediction: log 2 for the
    bounded law, and alpha / (alpha (M-1) + 2) * log(lam) for the unbounded
    law, whose capacity grows like that multiple of log(lam).
    """
    lambdas = [float(v) for v in lambdas]
    if len(lambdas) < 3 or any(b <= a for a, b in zip(lambdas, lambdas[1:])):
        raise ModelError("lambda grid must be increasing with at least 3 points")
    cfg = config.replace(radius=math.inf)
    rows = []
    for lam in lambdas:
        c1 = large_system_capacity(cfg.replace(lam=lam), model, epsilon).capacity_nats
        c2 = large_system_capacity(cfg.replace(lam=lam * lam), model, epsilon).capacity_nats
        if model.kind is Kind.UNBOUNDED:
            predicted = unbounded_log_slope(model.alpha, config.beams) * math.log(lam)
        else:
            predicted = math.log(2.0)
        rows.append(dict(lam=lam, capacity=c1, capacity_squared=c2, doubling=c2 - c1,
                         predicted=predicted))
    return rows


def unbounded_log_slope(alpha: float, beams: int) -> float:
    """Limit of C(lam) / log(lam) for the unbounded law: alpha / (2 (a + 1))."""
    a = alpha * (beams - 1) / 2.0
    return alpha / (2.0 * (a + 1.0))
