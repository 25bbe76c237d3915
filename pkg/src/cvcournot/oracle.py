"""Iterated best response as an independent check on the closed-form equilibria.

Each player in turn maximizes its own (expected) payoff over ``[0, x_hi]`` by
golden-section search, holding the others fixed. The closed forms are never
consulted here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .model import (
    EquilibriumReport,
    InfoStructure,
    MarketParams,
    NonConvergence,
    ParameterError,
    Source,
    check_eta,
    check_gamma,
    check_margin,
    make_infinite_market,
)
from .payoffs import (
    bayes_payoffs,
    classical_apparatus_payoffs,
    classical_payoffs,
    lossy_payoffs,
    quantum_apparatus_payoffs_limit,
)

INV_PHI = (math.sqrt(5) - 1) / 2

Objective = Callable[[Sequence[float]], float]


@dataclass(frozen=True)
class OracleConfig:
    tol_x: float = 1e-10
    tol_u: float = 1e-12
    max_iters: int = 10_000
    x_hi: Optional[float] = None
    scan_points: int = 2048

    def __post_init__(self):
        if not (self.tol_x > 0 and self.tol_u > 0):
            raise ParameterError("oracle tolerances must be positive")
        if self.max_iters < 1:
            raise ParameterError("max_iters must be >= 1")
        if self.x_hi is not None and not self.x_hi > 0:
            raise ParameterError("x_hi must be positive")


@dataclass(frozen=True)
class Game:
    """A simultaneous game with one continuous, non-negative strategy per player.

    ``objectives[i](profile)`` is player ``i``'s payoff for the full profile;
    for a Bayesian game each type of a firm is its own player. ``report_profits``
    maps an equilibrium profile to the two firms' reported profits.
    """

    labels: Tuple[str, ...]
    objectives: Tuple[Objective, ...]
    report_profits: Callable[[Sequence[float]], Tuple[float, float]]
    x_hi: float


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, xtol: float) -> float:
    """Maximizer of a unimodal ``f`` on ``[lo, hi]`` to within ``xtol``."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    best = max((a, f(a)), (c, fc), (d, fd), (b, f(b)), key=lambda t: t[1])
    return best[0]


def _parabolic_polish(
    f: Callable[[float], float], x0: float, lo: float, hi: float, h: float, tol_u: float
) -> float:
    # Comparing function values cannot resolve the maximizer below ~sqrt(eps);
    # a three-point parabola through well-separated samples can.
    f0 = f(x0)
    for _ in range(4):
        fp, fm = f(x0 + h), f(x0 - h)
        curv = fp - 2 * f0 + fm
        if not curv < 0:
            break
        x1 = min(max(x0 - 0.5 * h * (fp - fm) / curv, lo), hi)
        f1 = f(x1)
        if f1 < f0 - tol_u:
            break
        done = abs(x1 - x0) < 1e-3 * h
        x0, f0 = x1, f1
        if done:
            break
    return x0


def best_response(
    objective: Objective, profile: List[float], i: int, x_hi: float, config: OracleConfig
) -> float:
    trial = list(profile)

    def own(x: float) -> float:
        trial[i] = x
        return objective(trial)

    x = golden_section_max(own, 0.0, x_hi, xtol=1e-7 * x_hi)
    scale = max(x, 1e-3 * x_hi)
    for rel in (1e-3, 1e-4, 1e-5):
        x = _parabolic_polish(own, x, 0.0, x_hi, h=rel * scale, tol_u=config.tol_u)
    return x


def deviation_gain(game: Game, profile: Sequence[float], points: int = 2048) -> float:
    """Largest payoff gain any single player finds on a uniform grid of own strategies."""
    grid = np.linspace(0.0, game.x_hi, points)
    worst = 0.0
    for i, objective in enumerate(game.objectives):
        base = objective(profile)
        trial = list(profile)
        for x in grid:
            trial[i] = float(x)
            worst = max(worst, objective(trial) - base)
    return worst


def best_response_oracle(
    game: Game,
    config: OracleConfig = OracleConfig(),
    start: Optional[Sequence[float]] = None,
) -> EquilibriumReport:
    """Gauss-Seidel best-response iteration until strategies move less than ``tol_x``."""
    x_hi = config.x_hi or game.x_hi
    n = len(game.objectives)
    profile = list(start) if start is not None else [0.5 * x_hi / 4] * n
    if len(profile) != n:
        raise ParameterError(f"start profile needs {n} entries")
    for it in range(1, config.max_iters + 1):
        change = 0.0
        for i, objective in enumerate(game.objectives):
            new = best_response(objective, profile, i, x_hi, config)
            change = max(change, abs(new - profile[i]))
            profile[i] = new
        if change < config.tol_x:
            return _report(game, profile, it, config)
    report = _report(game, profile, config.max_iters, config)
    raise NonConvergence(f"best response did not settle in {config.max_iters} sweeps", report)


def _report(game: Game, profile: List[float], iterations: int, config: OracleConfig) -> EquilibriumReport:
    return EquilibriumReport(
        x_star=tuple(profile),
        profits=tuple(game.report_profits(profile)),
        labels=game.labels,
        source=Source.ORACLE,
        residual=deviation_gain(game, profile, config.scan_points),
        iterations=iterations,
    )


def multistart_oracle(
    game: Game, config: OracleConfig = OracleConfig(), starts: int = 8, seed: int = 0
) -> Tuple[EquilibriumReport, float]:
    """Run the oracle from several seeded starting profiles.

    Returns the first report and the largest strategy spread across runs; a
    spread near zero supports uniqueness of the equilibrium.
    """
    rng = np.random.default_rng(seed)
    x_hi = config.x_hi or game.x_hi
    reports = [
        best_response_oracle(game, config, start=rng.uniform(0, x_hi / 2, len(game.objectives)).tolist())
        for _ in range(starts)
    ]
    xs = np.array([r.x_star for r in reports])
    return reports[0], float(np.max(xs.max(axis=0) - xs.min(axis=0)))


def _default_x_hi(k: float) -> float:
    return 4 * math.sqrt(2 * k)


def cournot_game(k: float) -> Game:
    """The classical game in quantities ``q_i`` (infinite market, no price floor)."""
    market = MarketParams(k=check_margin(k))
    return Game(
        labels=("q1", "q2"),
        objectives=(
            lambda p: classical_payoffs(p[0], p[1], market).u1,
            lambda p: classical_payoffs(p[0], p[1], market).u2,
        ),
        report_profits=lambda p: tuple(classical_payoffs(p[0], p[1], market)),
        x_hi=4 * market.k,
    )


def classical_apparatus_game(k: float, gamma: float) -> Game:
    k, gamma = check_margin(k), check_gamma(gamma)
    return Game(
        labels=("x1", "x2"),
        objectives=(
            lambda p: classical_apparatus_payoffs(p[0], p[1], gamma, k).u1,
            lambda p: classical_apparatus_payoffs(p[0], p[1], gamma, k).u2,
        ),
        report_profits=lambda p: tuple(classical_apparatus_payoffs(p[0], p[1], gamma, k)),
        x_hi=_default_x_hi(k),
    )


def quantum_apparatus_game(k: float, gamma: float) -> Game:
    market = make_infinite_market(k)
    gamma = check_gamma(gamma)
    return Game(
        labels=("x1", "x2"),
        objectives=(
            lambda p: quantum_apparatus_payoffs_limit(p[0], p[1], gamma, market).u1,
            lambda p: quantum_apparatus_payoffs_limit(p[0], p[1], gamma, market).u2,
        ),
        report_profits=lambda p: tuple(quantum_apparatus_payoffs_limit(p[0], p[1], gamma, market)),
        x_hi=_default_x_hi(market.k),
    )


def bayes_game(info: InfoStructure, gamma: float) -> Game:
    """Three players: firm 1, firm 2 if high-cost, firm 2 if low-cost.

    Firm 1 maximizes its payoff averaged over firm 2's type.
    """
    gamma = check_gamma(gamma)
    theta = info.theta

    def firm1(p):
        return theta * bayes_payoffs(p[0], p[1], gamma, info).u1 + (1 - theta) * bayes_payoffs(
            p[0], p[2], gamma, info
        ).u1

    def firm2_high(p):
        return bayes_payoffs(p[0], p[1], gamma, info).u2H

    def firm2_low(p):
        return bayes_payoffs(p[0], p[2], gamma, info).u2L

    def profits(p):
        high = bayes_payoffs(p[0], p[1], gamma, info)
        low = bayes_payoffs(p[0], p[2], gamma, info)
        return (
            theta * high.u1 + (1 - theta) * low.u1,
            theta * high.u2H + (1 - theta) * low.u2L,
        )

    return Game(
        labels=("x1", "x2H", "x2L"),
        objectives=(firm1, firm2_high, firm2_low),
        report_profits=profits,
        x_hi=_default_x_hi(info.k_low),
    )


def asym_loss_game(k: float, gamma: float, eta: float) -> Game:
    k, gamma, eta = check_margin(k), check_gamma(gamma, closed=True), check_eta(eta)
    # firm 2 must over-produce by 1/eta to compensate its loss
    return Game(
        labels=("x1", "x2"),
        objectives=(
            lambda p: lossy_payoffs(p[0], p[1], gamma, eta, k).u1,
            lambda p: lossy_payoffs(p[0], p[1], gamma, eta, k).u2,
        ),
        report_profits=lambda p: tuple(lossy_payoffs(p[0], p[1], gamma, eta, k)),
        x_hi=_default_x_hi(k / eta),
    )
