"""Lower incomplete gamma and complete gamma for real shape s in (0, 10].

gamma(s, x) is computed from the power series when x < s + 1 and as
Gamma(s) - Gamma(s, x) with a Lentz continued fraction for the upper tail
otherwise.
"""
import math

MAX_SHAPE = 10.0
_EPS = 1e-16
_TINY = 1e-300
_MAX_TERMS = 10_000


class SpecialFunctionError(ArithmeticError):
    pass


def _check_shape(s):
    if not s > 0:
        raise SpecialFunctionError(f"shape must be > 0, got {s}")
    if s > MAX_SHAPE:
        raise SpecialFunctionError(f"shape must be <= {MAX_SHAPE}, got {s}")


def complete_gamma(s: float) -> float:
    _check_shape(s)
    return math.gamma(s)


def _log_prefactor(s, x):
    # log(x^s e^-x)
    return s * math.log(x) - x


def _series(s, x):
    """sum_n x^n / (s (s+1) ... (s+n)); gamma(s, x) = x^s e^-x times this."""
    term = 1.0 / s
    total = term
    ap = s
    for _ in range(_MAX_TERMS):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total
    raise SpecialFunctionError(f"series did not converge for s={s}, x={x}")


def _upper_fraction(s, x):
    """Continued fraction for Gamma(s, x) e^x x^-s (modified Lentz)."""
    b = x + 1.0 - s
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_TERMS):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise SpecialFunctionError(f"continued fraction did not converge for s={s}, x={x}")


def lower_incomplete_gamma(s: float, x: float) -> float:
    """gamma(s, x) = integral_0^x t^(s-1) e^-t dt."""
    _check_shape(s)
    if not x >= 0:
        raise SpecialFunctionError(f"upper limit must be >= 0, got {x}")
    if x == 0:
        return 0.0
    if math.isinf(x):
        return math.gamma(s)
    if x < s + 1.0:
        return math.exp(_log_prefactor(s, x)) * _series(s, x)
    upper = math.exp(_log_prefactor(s, x)) * _upper_fraction(s, x)
    full = math.gamma(s)
    return min(max(full - upper, 0.0), full)


def upper_incomplete_gamma(s: float, x: float) -> float:
    """Gamma(s, x) = Gamma(s) - gamma(s, x), accurate in the far tail."""
    _check_shape(s)
    if not x >= 0:
        raise SpecialFunctionError(f"upper limit must be >= 0, got {x}")
    if x < s + 1.0:
        return math.gamma(s) - lower_incomplete_gamma(s, x)
    if math.isinf(x):
        return 0.0
    return math.exp(_log_prefactor(s, x)) * _upper_fraction(s, x)
