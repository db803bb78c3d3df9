"""Beam outage probabilities.

Every function here takes an SINR threshold ``x`` and returns the CDF of the
maximum beam SINR, F*(x). The rate CDF is F_r(r) = F*(e^r - 1), see
:func:`rate_outage`. Closed forms accumulate log F* and exponentiate last so
that large ``lam * D**2`` never underflows the intermediate terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from scipy import integrate

from .model import Kind, ModelError, PathLossModel, SystemConfig, UnsupportedOperation
from .specfun import complete_gamma, lower_incomplete_gamma

QUAD_TOLERANCE = 1e-9


class Method(str, Enum):
    QUADRATURE = "quadrature"
    CLOSED_FORM_UNBOUNDED = "closed-unbounded"
    CLOSED_FORM_BOUNDED = "closed-bounded"
    LARGE_SYSTEM_UNBOUNDED = "large-unbounded"
    LARGE_SYSTEM_BOUNDED = "large-bounded"


class QuadratureError(ArithmeticError):
    def __init__(self, message, achieved):
        super().__init__(f"{message} (achieved abs error {achieved:.3g})")
        self.achieved = achieved


@dataclass(frozen=True)
class OutageResult:
    """F*(x) at one SINR threshold.

    ``exponent`` is log F*(x) (<= 0); the probabilities are exp(exponent).
    """

    threshold: float
    exponent: float
    method: Method
    abserr: float = 0.0

    @property
    def sinr_cdf_value(self) -> float:
        return math.exp(self.exponent)

    @property
    def rate_cdf_value(self) -> float:
        # F_r(log(1 + x)) = F*(x)
        return self.sinr_cdf_value

    @property
    def rate(self) -> float:
        return math.log1p(self.threshold)


def _check_threshold(x):
    if not x >= 0:
        raise ModelError(f"SINR threshold must be >= 0, got {x}")


def conditional_sinr_cdf(config: SystemConfig, g: float, x: float) -> float:
    """Per-user beam SINR CDF given path-loss value ``g``."""
    if not g > 0:
        raise ModelError("gain must be > 0")
    _check_threshold(x)
    tail = math.exp(-x / (g * config.power) - (config.beams - 1) * math.log1p(x))
    return 1.0 - tail


def _attenuation(model: PathLossModel):
    """Scalar t -> 1 / G(sqrt(t)); finite at t = 0 even for singular laws."""
    h = model.alpha / 2.0
    if model.kind is Kind.UNBOUNDED:
        return lambda t: t**h
    if model.kind is Kind.BOUNDED:
        return lambda t: 1.0 + t**h
    if model.kind is Kind.GUARD_ZONE:
        floor = model.d0**2
        return lambda t: max(floor, t) ** h
    a = model.alpha
    return lambda t: (1.0 + math.sqrt(t)) ** a


def _breakpoints(config, model, x):
    """Interior points where the integrand bends sharply."""
    upper = config.radius**2
    pts = []
    if model.kind is Kind.GUARD_ZONE and 0 < model.d0**2 < upper:
        pts.append(model.d0**2)
    # where x / (G rho) crosses 1 the integrand switches from ~1 to decaying
    if x > 0:
        target = x / config.power
        if target < model.peak_gain:
            t = float(model.inverse(target)) ** 2
            if 0 < t < upper:
                pts.append(t)
    return sorted(set(pts))


def outage_general(config: SystemConfig, model: PathLossModel, x: float) -> OutageResult:
    """F*(x) for any path-loss law, integrating over t = d^2 in [0, D^2]."""
    config.require_finite("outage_general")
    _check_threshold(x)
    upper = config.radius**2
    rho = config.power
    if x == 0:
        integral, abserr = upper, 0.0
    else:
        attenuation = _attenuation(model)
        scale = x / rho

        def integrand(t):
            return math.exp(-scale * attenuation(t))

        pts = _breakpoints(config, model, x)
        out = integrate.quad(
            integrand, 0.0, upper, epsabs=QUAD_TOLERANCE * 1e-2, epsrel=1e-12,
            limit=500, points=pts or None, full_output=1,
        )
        integral, abserr = out[0], out[1]
        if abserr > QUAD_TOLERANCE:
            raise QuadratureError("quadrature did not reach tolerance", abserr)
    exponent = -config.lam * math.pi * math.exp(-(config.beams - 1) * math.log1p(x)) * integral
    return OutageResult(x, exponent, Method.QUADRATURE, abserr)


def _closed_form_exponent(config: SystemConfig, alpha: float, x: float) -> float:
    """log F* for the unbounded law, finite or infinite radius (x > 0)."""
    s = 2.0 / alpha
    rho = config.power
    if config.finite:
        gam = lower_incomplete_gamma(s, x * config.radius**alpha / rho)
    else:
        gam = complete_gamma(s)
    scale = math.exp(s * math.log(rho / x) - (config.beams - 1) * math.log1p(x))
    return -2.0 * config.lam * math.pi / alpha * scale * gam


def _empty_cell(config: SystemConfig, method: Method) -> OutageResult:
    # x = 0: every user clears the threshold, F* is the void probability
    exponent = -config.mean_users if config.finite else -math.inf
    return OutageResult(0.0, exponent, method)


def outage_unbounded(config: SystemConfig, alpha: float, x: float) -> OutageResult:
    """Closed form for G(d) = d^-alpha; large-system form when radius is INFINITE."""
    PathLossModel.unbounded(alpha)
    _check_threshold(x)
    method = Method.CLOSED_FORM_UNBOUNDED if config.finite else Method.LARGE_SYSTEM_UNBOUNDED
    if x == 0:
        return _empty_cell(config, method)
    return OutageResult(x, _closed_form_exponent(config, alpha, x), method)


def outage_bounded(config: SystemConfig, alpha: float, x: float) -> OutageResult:
    """Closed form for G(d) = 1/(1 + d^alpha); the unbounded exponent times e^(-x/rho)."""
    PathLossModel.bounded(alpha)
    _check_threshold(x)
    method = Method.CLOSED_FORM_BOUNDED if config.finite else Method.LARGE_SYSTEM_BOUNDED
    if x == 0:
        return _empty_cell(config, method)
    exponent = math.exp(-x / config.power) * _closed_form_exponent(config, alpha, x)
    return OutageResult(x, exponent, method)


def sinr_outage(config: SystemConfig, model: PathLossModel, x: float,
                method: str = "auto") -> OutageResult:
    """Dispatch to a closed form where one exists, otherwise to quadrature.

    ``method`` is ``auto``, ``closed`` or ``quadrature``.
    """
    if method not in ("auto", "closed", "quadrature"):
        raise ModelError(f"unknown method {method!r}")
    has_closed = model.kind in (Kind.UNBOUNDED, Kind.BOUNDED)
    if method == "quadrature" or (method == "auto" and not has_closed):
        if not config.finite:
            raise UnsupportedOperation(
                f"{model.label} model has no large-system form; give a finite radius")
        return outage_general(config, model, x)
    if not has_closed:
        raise UnsupportedOperation(f"no closed form for the {model.label} model")
    if model.kind is Kind.UNBOUNDED:
        return outage_unbounded(config, model.alpha, x)
    return outage_bounded(config, model.alpha, x)


def rate_outage(config: SystemConfig, model: PathLossModel, rate: float,
                method: str = "auto") -> OutageResult:
    """Beam outage probability F_r(rate) for a target rate in nats/s/Hz."""
    if not rate >= 0:
        raise ModelError(f"target rate must be >= 0, got {rate}")
    return sinr_outage(config, model, math.expm1(rate), method)
