"""Payoff functionals of the classical and quantum Cournot games."""

from __future__ import annotations

from typing import NamedTuple, Union

import numpy as np

from .model import InfoStructure, MarketParams, ParameterError, check_eta, check_margin
from .optics import PoissonTruncation, expected_quantities, lossy_quantities, poisson_grid


class PayoffPair(NamedTuple):
    u1: float
    u2: float


class BayesPayoffs(NamedTuple):
    u1: float
    u2H: float
    u2L: float


def classical_payoffs(q1: float, q2: float, market: MarketParams) -> PayoffPair:
    """Profits ``q_i * (P(Q) - c)`` with the price floored at zero for ``Q > a``."""
    if q1 < 0 or q2 < 0:
        raise ParameterError(f"quantities must be >= 0, got q1={q1}, q2={q2}")
    total = q1 + q2
    if market.infinite or total <= market.a:
        margin = market.k - total
    else:
        margin = -market.c
    return PayoffPair(q1 * margin, q2 * margin)


def classical_apparatus_payoffs(x1: float, x2: float, gamma: float, k: float) -> PayoffPair:
    """Power-meter readout: mean photon numbers are the quantities."""
    n1, n2 = expected_quantities(x1, x2, gamma)
    margin = k - 0.5 * (x1 * x1 + x2 * x2)
    return PayoffPair(n1 * margin, n2 * margin)


def _limit_margin(market: Union[MarketParams, float]) -> float:
    if isinstance(market, MarketParams):
        if not market.infinite:
            raise ParameterError(
                "closed-form photon-counting payoffs hold only in the infinite-market limit; "
                "use quantum_apparatus_payoffs_finite for finite a, c"
            )
        return market.k
    k = check_margin(market)
    if k < 1:
        raise ParameterError(f"infinite-limit market requires k >= 1, got k={k}")
    return k


def quantum_apparatus_payoffs_limit(
    x1: float, x2: float, gamma: float, market: Union[MarketParams, float]
) -> PayoffPair:
    """Photon-counting payoffs for ``a, c -> infinity`` at fixed ``k``.

    Poisson fluctuations add ``<m_i>`` to ``<m_i (m1 + m2)>``, which is the
    same as shrinking the margin by one.
    """
    k = _limit_margin(market)
    return classical_apparatus_payoffs(x1, x2, gamma, k - 1)


def quantum_apparatus_payoffs_finite(
    x1: float,
    x2: float,
    gamma: float,
    market: MarketParams,
    trunc: PoissonTruncation | None = None,
) -> PayoffPair:
    """Photon-counting payoffs for a finite market, summed over the count grid.

    Outcomes with ``m1 + m2 > a`` sell at price zero and cost ``c * m_i``.
    """
    if market.infinite:
        raise ParameterError("finite-market payoffs need finite a and c")
    lam1, lam2 = expected_quantities(x1, x2, gamma)
    grid = poisson_grid(lam1, lam2, trunc)
    m1, m2 = grid.m1, grid.m2
    total = m1 + m2
    margin = np.where(total <= market.a, market.k - total, -market.c)
    u1 = float(np.sum(m1 * margin * grid.prob))
    u2 = float(np.sum(m2 * margin * grid.prob))
    return PayoffPair(u1, u2)


def bayes_payoffs(x1: float, x2: float, gamma: float, info: InfoStructure) -> BayesPayoffs:
    """Payoffs of firm 1 and of each cost type of firm 2 for one strategy pair."""
    n1, n2 = expected_quantities(x1, x2, gamma)
    total = 0.5 * (x1 * x1 + x2 * x2)
    return BayesPayoffs(
        n1 * (info.a - info.c1 - total),
        n2 * (info.a - info.c_H - total),
        n2 * (info.a - info.c_L - total),
    )


def lossy_payoffs(x1: float, x2: float, gamma: float, eta2: float, k: float) -> PayoffPair:
    """Payoffs when firm 2's mode is attenuated before counting.

    The lost photons never reach the market, so the price uses the lossy
    quantities.
    """
    n1, n2 = lossy_quantities(x1, x2, gamma, eta2)
    if check_eta(eta2) == 1.0:
        return classical_apparatus_payoffs(x1, x2, gamma, k)
    margin = k - n1 - n2
    return PayoffPair(n1 * margin, n2 * margin)
