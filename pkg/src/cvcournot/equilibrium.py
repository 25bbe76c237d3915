"""Closed-form equilibria of every game variant, plus the finite-market optimum."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

from scipy.optimize import brentq

from .model import (
    EquilibriumReport,
    InfoStructure,
    MarketParams,
    ParameterError,
    QUARTER_PI,
    Region,
    check_eta,
    check_gamma,
    check_margin,
    check_strategy,
    info_from_ratio,
)
from .oracle import golden_section_max
from .optics import PoissonTruncation, apply_loss, beam_splitter, encode_strategies, expected_quantities
from .payoffs import (
    PayoffPair,
    bayes_payoffs,
    quantum_apparatus_payoffs_finite,
)


def classical_nash(k: float) -> EquilibriumReport:
    k = check_margin(k)
    q = k / 3
    u = k * k / 9
    return EquilibriumReport(x_star=(q, q), profits=(u, u), labels=("q1", "q2"))


def _symmetric_apparatus(k: float, gamma: float) -> EquilibriumReport:
    c2 = math.cos(gamma) ** 2
    y = 2 * k * c2 / (1 + 2 * c2)
    u = k * k * c2 / (1 + 2 * c2) ** 2
    x = math.sqrt(y)
    return EquilibriumReport(x_star=(x, x), profits=(u, u))


def nash_classical_apparatus(k: float, gamma: float) -> EquilibriumReport:
    """Unique symmetric equilibrium under mean-photon-number readout.

    Profits rise from ``k**2/9`` at ``gamma = 0`` to ``k**2/8`` as ``gamma -> pi/4``.
    """
    return _symmetric_apparatus(check_margin(k), check_gamma(gamma))


def nash_quantum_apparatus(k: float, gamma: float) -> EquilibriumReport:
    """Photon-counting equilibrium in the infinite-market limit: the classical
    apparatus equilibrium with ``k`` replaced by ``k - 1``."""
    k = check_margin(k)
    if k < 1:
        raise ParameterError(f"photon-counting equilibrium requires k >= 1, got k={k}")
    return _symmetric_apparatus(k - 1, check_gamma(gamma))


@dataclass(frozen=True)
class FiniteOptimum:
    x_opt: float
    u_opt: float
    m_max: Tuple[int, int]
    tail: float


def finite_a_optimum(
    market: MarketParams,
    gamma: float,
    trunc: PoissonTruncation | None = None,
    x_hi: float | None = None,
    scan_points: int = 64,
) -> FiniteOptimum:
    """Best common strategy for both firms under photon counting with finite ``a``.

    A coarse scan brackets the maximum, then golden-section search refines it.
    """
    if market.infinite:
        raise ParameterError("finite_a_optimum needs a finite market (a, c)")
    gamma = check_gamma(gamma)
    trunc = trunc or PoissonTruncation()
    x_hi = x_hi if x_hi is not None else 4 * math.sqrt(2 * market.k)

    def u(x: float) -> float:
        return quantum_apparatus_payoffs_finite(x, x, gamma, market, trunc).u1

    step = x_hi / (scan_points - 1)
    samples = [u(i * step) for i in range(scan_points)]
    best = max(range(scan_points), key=samples.__getitem__)
    lo = max(0.0, (best - 1) * step)
    hi = min(x_hi, (best + 1) * step)
    x_opt = golden_section_max(u, lo, hi, xtol=1e-9)
    lam1, lam2 = expected_quantities(x_opt, x_opt, gamma)
    cut1, tail1 = trunc.cutoff(lam1)
    cut2, tail2 = trunc.cutoff(lam2)
    return FiniteOptimum(x_opt, u(x_opt), (cut1, cut2), tail1 + tail2)


@dataclass(frozen=True)
class RegionLabel:
    region: Region
    boundary_value: float


def region_boundary_value(info: InfoStructure) -> float:
    """``max[(2d - k)/(k - d), 0]`` with ``d = c_H - c1``; region A needs
    ``cos(2 gamma)`` strictly above it."""
    d = info.c_H - info.c1
    if not info.k > d:
        raise ParameterError(
            f"boundary undefined: need k > c_H - c1, got k={info.k}, c_H - c1={d}"
        )
    return max((2 * d - info.k) / (info.k - d), 0.0)


def classify_region(info: InfoStructure, gamma: float) -> RegionLabel:
    gamma = check_gamma(gamma)
    value = region_boundary_value(info)
    region = Region.A if value < math.cos(2 * gamma) else Region.B
    return RegionLabel(region, value)


def boundary_delta_over_k(theta: float, gamma: float) -> float:
    """``delta/k`` at which the A/B boundary is crossed for fixed ``theta, gamma``.

    Solves ``(2(1-theta)r - 1) / (1 - (1-theta)r) = cos(2 gamma)`` for ``r``.
    """
    w = math.cos(2 * check_gamma(gamma))
    return (1 + w) / ((1 - theta) * (2 + w))


def boundary_gamma(theta: float, delta_over_k: float) -> float | None:
    """Angle where a ``gamma`` sweep crosses the A/B boundary, or None if it never does."""
    value = region_boundary_value(info_from_ratio(theta, delta_over_k))
    if not 0 < value < 1:
        return None
    return 0.5 * math.acos(value)


def _check_bayes_gamma(gamma: float) -> float:
    gamma = check_gamma(gamma)
    if abs(1 - 4 * math.cos(gamma) ** 4) < 1e-14:
        raise ParameterError(f"gamma={gamma} is too close to pi/4 for the Bayesian equilibrium")
    return gamma


def bayes_nash_squared(info: InfoStructure, gamma: float) -> Tuple[Tuple[float, float, float], RegionLabel]:
    """Squared equilibrium strategies ``(x1**2, x2H**2, x2L**2)`` and the region.

    Region A uses interior first-order conditions; in region B the high-cost
    type is pinned at zero output.
    """
    gamma = _check_bayes_gamma(gamma)
    label = classify_region(info, gamma)
    c2 = math.cos(gamma) ** 2
    k, theta = info.k, info.theta
    if label.region is Region.A:
        # Written without the removable 1 - 4cos^4 singularity.
        y1 = 2 * k * c2 / (1 + 2 * c2)
        y_high = info.k_high - k / (1 + 2 * c2)
        y_low = info.k_low - k / (1 + 2 * c2)
    else:
        w = math.cos(2 * gamma)
        denom = theta + w * (2 + w)
        y1 = 2 * c2 * (theta * k - theta * (1 - theta) * info.delta + k * w) / denom
        y_high = 0.0
        y_low = 2 * c2 * (theta * info.delta + (k + theta * info.delta) * w) / denom
    return (max(y1, 0.0), max(y_high, 0.0), max(y_low, 0.0)), label


def bayes_nash_printed_region_a(info: InfoStructure, gamma: float) -> Tuple[float, float, float]:
    """Region-A squared strategies in the ``1 - 4cos^4`` form, for cross-checks."""
    gamma = _check_bayes_gamma(gamma)
    c2 = math.cos(gamma) ** 2
    k = info.k
    den = 1 - 4 * c2 * c2
    return (
        2 * k * c2 / (1 + 2 * c2),
        (2 * k * c2 - 4 * c2 * c2 * (info.a - info.c_H) - (1 - info.theta) * info.delta) / den,
        (2 * k * c2 - 4 * c2 * c2 * (info.a - info.c_L) + info.theta * info.delta) / den,
    )


def _average_profits(info: InfoStructure, gamma: float, x1: float, x_high: float, x_low: float) -> PayoffPair:
    theta = info.theta
    high = bayes_payoffs(x1, x_high, gamma, info)
    low = bayes_payoffs(x1, x_low, gamma, info)
    return PayoffPair(
        theta * high.u1 + (1 - theta) * low.u1,
        theta * high.u2H + (1 - theta) * low.u2L,
    )


def bayes_nash(info: InfoStructure, gamma: float) -> EquilibriumReport:
    ys, label = bayes_nash_squared(info, gamma)
    xs = tuple(math.sqrt(y) for y in ys)
    profits = _average_profits(info, gamma, *xs)
    return EquilibriumReport(
        x_star=xs,
        profits=tuple(profits),
        labels=("x1", "x2H", "x2L"),
        region=label.region,
    )


def bayes_average_profits(info: InfoStructure, gamma: float) -> PayoffPair:
    """Type-averaged equilibrium profits, evaluated from the strategies and payoffs."""
    return PayoffPair(*bayes_nash(info, gamma).profits)


def bayes_average_profits_printed(info: InfoStructure, gamma: float) -> PayoffPair:
    """Expanded closed forms of the averaged profits, written term by term.

    Kept only to cross-check :func:`bayes_average_profits`.
    """
    gamma = _check_bayes_gamma(gamma)
    label = classify_region(info, gamma)
    k, d, t = info.k, info.delta, info.theta
    w = math.cos(2 * gamma)
    w4 = math.cos(4 * gamma)
    c2 = math.cos(gamma) ** 2
    s2 = math.sin(gamma) ** 2
    s = d * d * t * (1 - t)
    if label.region is Region.A:
        u1 = 4 * (k * k - s) / (8 * (2 + w) ** 2) + (4 * k * k + s * w * (3 + w)) * w / (8 * (2 + w) ** 2)
        return PayoffPair(u1, u1 + 0.25 * s)
    den = 4 * (2 * t + 4 * w + w4 + 1) ** 2
    u1 = (
        c2
        * (
            4 * t * ((k + d * (t - 1)) * t + k * w)
            * (-2 * d * t * t + 2 * k * t + 2 * d * t + k - 2 * (k * (t - 3) + d * (t - 1) * t) * w + k * w4)
            * c2
            + (t - 1)
            * (2 * (k * (t - 2) + d * t * (t + 1)) * w + t * (-2 * k + d + 2 * d * t + d * w4))
            * (2 * (d * (t - 1) * t + k * (t + 2)) * w + t * (2 * k - d + 2 * d * t - d * w4))
        )
        / den
    )
    u2 = (
        c2
        * (
            4 * t * ((k + d * (t - 1)) * t + k * w)
            * (
                2 * d * t * t + 2 * k * t + k - 2 * d
                - 2 * (k * (t - 3) + d * (t * t - 5 * t + 4)) * w
                + (k + 2 * d * (t - 1)) * w4
            )
            * s2
            - (t - 1) * (t * (2 * k + d + 2 * d * t + d * w4) - 2 * (k * (t - 2) + d * (t - 3) * t) * w) ** 2
        )
        / den
    )
    return PayoffPair(u1, u2)


def cooperation_threshold(
    theta: float = 0.5,
    k: float = 1.0,
    h: float = 1e-3,
    lo: float = 1e-3,
    hi: float = 4 / 3 - 1e-3,
    points: int = 400,
) -> float:
    """Locate the ``delta/k`` where firm 1's profit stops rising with small ``gamma``.

    Scans the sign of ``U1(gamma=h) - U1(0)`` over ``delta/k`` and refines the
    first sign change with Brent's method. Returns NaN if no change is found.
    """

    def slope(r: float) -> float:
        info = info_from_ratio(theta, r, k)
        return (bayes_average_profits(info, h).u1 - bayes_average_profits(info, 0.0).u1) / h

    step = (hi - lo) / (points - 1)
    prev_r, prev_s = lo, slope(lo)
    for i in range(1, points):
        r = lo + i * step
        s = slope(r)
        if prev_s == 0 or (prev_s > 0) != (s > 0):
            return brentq(slope, prev_r, r, xtol=1e-12)
        prev_r, prev_s = r, s
    return math.nan


def loss_profit_prefactor(k: float, gamma: float, eta: float) -> float:
    """Common prefactor of both firms' profits under asymmetric loss."""
    w = math.cos(2 * gamma)
    c2 = math.cos(gamma) ** 2
    den = _loss_denominator(gamma, eta)
    return 2 * k * k * c2 * ((1 + eta) ** 2 - (1 - eta) ** 2 * w * w) / den**2


def _loss_denominator(gamma: float, eta: float) -> float:
    return 1 + eta * (6 + eta) + 4 * eta * math.cos(2 * gamma) - (1 - eta) ** 2 * math.cos(4 * gamma)


def asym_loss_nash(k: float, gamma: float, eta: float) -> EquilibriumReport:
    """Equilibrium when only firm 2's light is attenuated (transmissivity ``eta``).

    Firm 2 raises its displacement by ``1/sqrt(eta)`` relative to firm 1.
    """
    k = check_margin(k)
    gamma = check_gamma(gamma, closed=True)
    eta = check_eta(eta)
    if eta == 1.0 and gamma < QUARTER_PI:
        # lossless: same evaluation path as the symmetric game, so results match bit for bit
        return nash_classical_apparatus(k, gamma)
    c2 = math.cos(gamma) ** 2
    w = math.cos(2 * gamma)
    den = _loss_denominator(gamma, eta)
    x1 = math.sqrt(8 * k * eta * c2 / den)
    x2 = math.sqrt(8 * k * c2 / den)
    xi = loss_profit_prefactor(k, gamma, eta)
    u1 = xi * (1 + eta - (1 - eta) * w)
    u2 = xi * eta * (1 + eta + (1 - eta) * w)
    return EquilibriumReport(x_star=(x1, x2), profits=(u1, u2))


def asym_loss_eta_zero_limit(k: float, gamma: float) -> PayoffPair:
    """Limiting profits as ``eta -> 0``; not an evaluable point of the game.

    The limit jumps at ``gamma = 0``: ``(k**2/9, k**2/9)`` there and
    ``(k**2/4, 0)`` for every ``gamma > 0``.
    """
    k = check_margin(k)
    gamma = check_gamma(gamma, closed=True)
    if gamma == 0:
        return PayoffPair(k * k / 9, k * k / 9)
    return PayoffPair(k * k / 4, 0.0)


def loss_compensation(x: float, kappa_t: float) -> float:
    """Pre-amplify a strategy so that symmetric loss ``exp(-kappa_t)`` is undone."""
    x = check_strategy(x)
    if not kappa_t >= 0:
        raise ParameterError(f"kappa_t must be >= 0, got {kappa_t}")
    return x * math.exp(kappa_t / 2)


def symmetric_lossy_payoffs(x1: float, x2: float, gamma: float, kappa_t: float, k: float) -> PayoffPair:
    """Power-meter payoffs after both modes lose photons at the same rate."""
    eta = math.exp(-kappa_t)
    out = beam_splitter(apply_loss(encode_strategies(x1, x2), eta, eta), gamma)
    n1, n2 = out.photon_numbers
    margin = k - n1 - n2
    return PayoffPair(n1 * margin, n2 * margin)
