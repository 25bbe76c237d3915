"""Domain types and parameter validation for the entanglement-free quantum duopoly.

All quantities are dimensionless; one photon is one unit of product.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

QUARTER_PI = math.pi / 4
GAMMA_LIMIT_EPS = 1e-9


class ParameterError(ValueError):
    """A parameter lies outside its documented domain."""


class NumericalError(RuntimeError):
    """Base class for numerical failures (exit code 3 in the CLI)."""


class TruncationError(NumericalError):
    """The Poisson grid needed to meet a tail bound exceeds the grid ceiling."""


class NonConvergence(NumericalError):
    """Best-response iteration hit its iteration cap.

    ``report`` carries the last iterate and its residual.
    """

    def __init__(self, message: str, report: "EquilibriumReport"):
        super().__init__(message)
        self.report = report


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ParameterError(f"{name} must be finite, got {value!r}")
    return value


class Region(str, enum.Enum):
    A = "A"
    B = "B"
    NOT_APPLICABLE = "NA"


class Source(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    ORACLE = "oracle"


@dataclass(frozen=True)
class MarketParams:
    """Linear inverse demand ``P = a - Q`` with unit cost ``c``.

    Use :func:`make_market` for a finite market and :func:`make_infinite_market`
    for the ``a, c -> infinity`` limit where only the margin ``k`` survives.
    """

    k: float
    a: Optional[float] = None
    c: Optional[float] = None

    @property
    def infinite(self) -> bool:
        return self.a is None


def make_market(a: float, c: float) -> MarketParams:
    a = _finite("a", a)
    c = _finite("c", c)
    if c < 0 or a < 0:
        raise ParameterError(f"a and c must be non-negative, got a={a}, c={c}")
    if not c < a:
        raise ParameterError(f"unit cost must satisfy c < a, got a={a}, c={c}")
    return MarketParams(k=a - c, a=a, c=c)


def make_infinite_market(k: float) -> MarketParams:
    k = _finite("k", k)
    if k < 1:
        raise ParameterError(f"infinite-limit market requires k >= 1, got k={k}")
    return MarketParams(k=k)


def check_margin(k: float) -> float:
    k = _finite("k", k)
    if k <= 0:
        raise ParameterError(f"margin k must be > 0, got k={k}")
    return k


@dataclass(frozen=True)
class Strategy:
    """Displacement magnitude chosen by one firm."""

    x: float

    def __post_init__(self):
        object.__setattr__(self, "x", check_strategy(self.x))

    def __float__(self) -> float:
        return self.x


def check_strategy(x: float) -> float:
    x = _finite("strategy x", x)
    if x < 0:
        raise ParameterError(f"strategy x must be >= 0, got {x}")
    return x


@dataclass(frozen=True)
class Coupling:
    """Beam-splitter angle ``gamma`` in ``[0, pi/4)``."""

    gamma: float

    def __post_init__(self):
        object.__setattr__(self, "gamma", check_gamma(self.gamma))

    @classmethod
    def limit(cls, eps: float = GAMMA_LIMIT_EPS) -> "Coupling":
        """Stand-in for ``gamma -> pi/4`` from below."""
        return cls(QUARTER_PI - eps)

    def __float__(self) -> float:
        return self.gamma


def check_gamma(gamma: float, *, closed: bool = False) -> float:
    """Validate a beam-splitter angle.

    ``closed=True`` admits ``pi/4`` itself, which the asymmetric-loss game allows.
    """
    gamma = _finite("gamma", float(gamma))
    upper_ok = gamma <= QUARTER_PI if closed else gamma < QUARTER_PI
    if gamma < 0 or not upper_ok:
        bracket = "]" if closed else ")"
        raise ParameterError(f"gamma must lie in [0, pi/4{bracket}, got {gamma}")
    return gamma


def check_eta(eta: float) -> float:
    eta = _finite("eta", eta)
    if not 0 < eta <= 1:
        raise ParameterError(f"transmissivity eta must lie in (0, 1], got {eta}")
    return eta


@dataclass(frozen=True)
class InfoStructure:
    """Firm 2's cost is ``c_H`` with probability ``theta``, else ``c_L``.

    Firm 1 produces at the average cost ``c1``; ``k = a - c1``.
    """

    theta: float
    c_H: float
    c_L: float
    a: float
    c1: float = field(init=False)
    delta: float = field(init=False)
    k: float = field(init=False)

    def __post_init__(self):
        theta = _finite("theta", self.theta)
        c_H = _finite("c_H", self.c_H)
        c_L = _finite("c_L", self.c_L)
        a = _finite("a", self.a)
        if not 0 < theta < 1:
            raise ParameterError(f"theta must lie in (0, 1), got {theta}")
        if c_L < 0:
            raise ParameterError(f"c_L must be >= 0, got {c_L}")
        if not c_H > c_L:
            raise ParameterError(f"need c_H > c_L, got c_H={c_H}, c_L={c_L}")
        if not a > c_H:
            raise ParameterError(f"need a > c_H, got a={a}, c_H={c_H}")
        c1 = theta * c_H + (1 - theta) * c_L
        object.__setattr__(self, "c1", c1)
        object.__setattr__(self, "delta", c_H - c_L)
        object.__setattr__(self, "k", a - c1)

    @property
    def k_high(self) -> float:
        """Margin ``a - c_H`` of the high-cost type."""
        return self.k - (1 - self.theta) * self.delta

    @property
    def k_low(self) -> float:
        return self.k + self.theta * self.delta

    @property
    def delta_over_k(self) -> float:
        return self.delta / self.k

    @property
    def asymmetry_degree(self) -> float:
        """``delta**2 * theta * (1 - theta) / k**2``; monotone in delta/k for fixed theta."""
        return self.delta**2 * self.theta * (1 - self.theta) / self.k**2


def make_info_structure(theta: float, c_H: float, c_L: float, a: float) -> InfoStructure:
    return InfoStructure(theta=theta, c_H=c_H, c_L=c_L, a=a)


def info_from_ratio(theta: float, delta_over_k: float, k: float = 1.0) -> InfoStructure:
    """Build an information structure from ``(theta, delta/k, k)``.

    Payoffs depend on costs only through ``k`` and ``delta``, so the low cost
    is pinned at zero and ``a`` chosen to give the requested ``k``.
    """
    k = check_margin(k)
    r = _finite("delta_over_k", delta_over_k)
    if r <= 0:
        raise ParameterError(f"delta/k must be > 0, got {r}")
    delta = r * k
    return InfoStructure(theta=theta, c_H=delta, c_L=0.0, a=k + theta * delta)


@dataclass(frozen=True)
class LossChannel:
    """Photon loss with intensity transmissivity ``eta = exp(-kappa_t)``."""

    eta: float
    kappa_t: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "eta", check_eta(self.eta))
        if self.kappa_t is not None and self.kappa_t < 0:
            raise ParameterError(f"kappa_t must be >= 0, got {self.kappa_t}")

    @classmethod
    def from_kappa_t(cls, kappa_t: float) -> "LossChannel":
        kappa_t = _finite("kappa_t", kappa_t)
        if kappa_t < 0:
            raise ParameterError(f"kappa_t must be >= 0, got {kappa_t}")
        return cls(eta=math.exp(-kappa_t), kappa_t=kappa_t)

    @property
    def decay_exponent(self) -> float:
        if self.kappa_t is not None:
            return self.kappa_t
        return -math.log(self.eta)

    @property
    def amplitude_factor(self) -> float:
        return math.sqrt(self.eta)


@dataclass(frozen=True)
class EquilibriumReport:
    """Equilibrium strategies and profits from a closed form or the oracle.

    For the Bayesian game ``x_star`` is ``(x1, x2H, x2L)`` and ``profits`` are
    the type-averaged profits of firm 1 and firm 2.
    """

    x_star: Tuple[float, ...]
    profits: Tuple[float, float]
    labels: Tuple[str, ...] = ("x1", "x2")
    region: Region = Region.NOT_APPLICABLE
    source: Source = Source.CLOSED_FORM
    residual: float = 0.0
    iterations: int = 0

    def as_dict(self) -> dict:
        return {
            "x_star": dict(zip(self.labels, self.x_star)),
            "profits": {"u1": self.profits[0], "u2": self.profits[1]},
            "region": self.region.value,
            "source": self.source.value,
            "residual": self.residual,
            "iterations": self.iterations,
        }
