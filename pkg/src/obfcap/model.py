"""System parameters, path-loss laws and the user-location distributions.

All distances and gains are dimensionless. A cell of infinite radius is
represented by the ``INFINITE`` sentinel so that large-system formulas are
always chosen explicitly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

INFINITE = math.inf


class ModelError(ValueError):
    """Invalid parameters or an operation outside a model's domain."""


class UnsupportedOperation(ModelError):
    """Operation not defined for the given configuration (e.g. infinite cell)."""


class Kind(str, Enum):
    UNBOUNDED = "unbounded"
    BOUNDED = "bounded"
    GUARD_ZONE = "guard"
    SHIFTED = "shifted"


@dataclass(frozen=True)
class SystemConfig:
    """Cell and transmission parameters.

    lam: user intensity (users per unit area)
    radius: cell radius, or ``INFINITE`` for the large-system limit
    beams: number of transmit antennas / orthonormal beams
    power: transmit power per beam (linear)
    """

    lam: float
    radius: float = 1.0
    beams: int = 2
    power: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ModelError(f"lambda must be > 0, got {self.lam}")
        if not self.power > 0:
            raise ModelError(f"power must be > 0, got {self.power}")
        if int(self.beams) != self.beams or self.beams < 1:
            raise ModelError(f"beams must be an integer >= 1, got {self.beams}")
        if not self.radius > 0:
            raise ModelError(f"radius must be > 0 or INFINITE, got {self.radius}")
        object.__setattr__(self, "beams", int(self.beams))

    @property
    def finite(self) -> bool:
        return math.isfinite(self.radius)

    @property
    def mean_users(self) -> float:
        """Expected number of users in the cell, lambda * pi * D^2."""
        self.require_finite("mean_users")
        return self.lam * math.pi * self.radius**2

    def require_finite(self, what: str):
        if not self.finite:
            raise UnsupportedOperation(f"{what} needs a finite cell radius")

    def replace(self, **changes) -> "SystemConfig":
        fields = dict(lam=self.lam, radius=self.radius, beams=self.beams, power=self.power)
        fields.update(changes)
        return SystemConfig(**fields)


@dataclass(frozen=True)
class PathLossModel:
    """Distance-to-gain law G(d).

    ``unbounded``: d^-alpha, ``bounded``: 1/(1 + d^alpha),
    ``guard``: max(d0, d)^-alpha, ``shifted``: (1 + d)^-alpha.
    """

    kind: Kind
    alpha: float = 4.0
    d0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if not self.alpha > 2:
            raise ModelError(f"path-loss exponent must be > 2, got {self.alpha}")
        if self.kind is Kind.GUARD_ZONE:
            if not self.d0 >= 0:
                raise ModelError(f"guard distance must be >= 0, got {self.d0}")
        elif self.d0 != 0:
            raise ModelError("d0 only applies to the guard-zone model")

    @classmethod
    def unbounded(cls, alpha=4.0):
        return cls(Kind.UNBOUNDED, alpha)

    @classmethod
    def bounded(cls, alpha=4.0):
        return cls(Kind.BOUNDED, alpha)

    @classmethod
    def guard_zone(cls, alpha=4.0, d0=1.0):
        return cls(Kind.GUARD_ZONE, alpha, d0)

    @classmethod
    def shifted(cls, alpha=4.0):
        return cls(Kind.SHIFTED, alpha)

    @classmethod
    def parse(cls, text: str, alpha: float) -> "PathLossModel":
        """Parse ``unbounded``, ``bounded``, ``shifted`` or ``guard:<d0>``."""
        name, _, arg = text.strip().lower().partition(":")
        if name == "guard":
            if not arg:
                raise ModelError("guard model needs a distance, e.g. guard:0.5")
            return cls.guard_zone(alpha, float(arg))
        if arg:
            raise ModelError(f"model {name!r} takes no argument")
        try:
            kind = Kind(name)
        except ValueError:
            raise ModelError(f"unknown path-loss model {text!r}") from None
        return cls(kind, alpha)

    @property
    def label(self) -> str:
        if self.kind is Kind.GUARD_ZONE:
            return f"guard:{self.d0:g}"
        return self.kind.value

    @property
    def peak_gain(self) -> float:
        """G(0+); infinite for the unbounded law and for a zero guard distance."""
        if self.kind is Kind.UNBOUNDED:
            return math.inf
        if self.kind is Kind.GUARD_ZONE:
            return math.inf if self.d0 == 0 else self.d0 ** -self.alpha
        return 1.0

    def gain(self, d):
        """G(d) for scalar or array ``d``."""
        d = np.asarray(d, dtype=float)
        if np.any(d < 0) or np.any(np.isnan(d)):
            raise ModelError("distance must be >= 0")
        a = self.alpha
        if self.kind is Kind.UNBOUNDED:
            if np.any(d == 0):
                raise ModelError("unbounded path loss is singular at d = 0")
            g = d**-a
        elif self.kind is Kind.BOUNDED:
            g = 1.0 / (1.0 + d**a)
        elif self.kind is Kind.GUARD_ZONE:
            dd = np.maximum(self.d0, d)
            if np.any(dd == 0):
                raise ModelError("guard zone with d0 = 0 is singular at d = 0")
            g = dd**-a
        else:
            g = (1.0 + d) ** -a
        return g[()] if g.ndim == 0 else g

    def attenuation(self, d):
        """1 / G(d); finite down to d = 0 for every law."""
        d = np.asarray(d, dtype=float)
        if np.any(d < 0) or np.any(np.isnan(d)):
            raise ModelError("distance must be >= 0")
        a = self.alpha
        if self.kind is Kind.UNBOUNDED:
            out = d**a
        elif self.kind is Kind.BOUNDED:
            out = 1.0 + d**a
        elif self.kind is Kind.GUARD_ZONE:
            out = np.maximum(self.d0, d) ** a
        else:
            out = (1.0 + d) ** a
        return out[()] if out.ndim == 0 else out

    def inverse(self, g):
        """Generalised inverse inf{d >= 0 : G(d) <= g}.

        Plateaus map to their left end, so the guard-zone law returns 0 for
        every g >= G(d0).
        """
        g = np.asarray(g, dtype=float)
        if np.any(~(g > 0)):
            raise ModelError("gain must be > 0")
        a = self.alpha
        if self.kind is Kind.UNBOUNDED:
            d = g ** (-1.0 / a)
        elif self.kind is Kind.BOUNDED:
            # (1 - g) is exact near g = 1, unlike 1/g - 1
            d = np.where(g >= 1.0, 0.0, (np.maximum(1.0 - g, 0.0) / g) ** (1.0 / a))
        elif self.kind is Kind.GUARD_ZONE:
            d = np.where(g >= self.peak_gain, 0.0, g ** (-1.0 / a))
        else:
            d = np.where(g >= 1.0, 0.0, g ** (-1.0 / a) - 1.0)
        d = np.asarray(d, dtype=float)
        return d[()] if d.ndim == 0 else d


@dataclass(frozen=True)
class OutageQuery:
    """Target rate (nats/s/Hz) and outage tolerance."""

    rate: float
    epsilon: float

    def __post_init__(self):
        if not self.rate >= 0:
            raise ModelError(f"target rate must be >= 0, got {self.rate}")
        check_epsilon(self.epsilon)


def check_epsilon(epsilon: float) -> float:
    if not 0 < epsilon < 1:
        raise ModelError(f"epsilon must lie in (0, 1), got {epsilon}")
    return epsilon


def gain(model: PathLossModel, d):
    return model.gain(d)


def generalized_inverse(model: PathLossModel, g):
    return model.inverse(g)


def pathloss_cdf(model: PathLossModel, config: SystemConfig, g):
    """F_G(g) = 1 - (G^-1(g) / D)^2, clamped to [0, 1]."""
    config.require_finite("pathloss_cdf")
    r = np.asarray(model.inverse(g), dtype=float) / config.radius
    p = np.clip(1.0 - r * r, 0.0, 1.0)
    return p[()] if p.ndim == 0 else p
