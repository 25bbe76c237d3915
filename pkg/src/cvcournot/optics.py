"""Coherent-state amplitude arithmetic.

The game state is always a product of two coherent states, so two complex
amplitudes describe it exactly. Photon counts of a coherent state are Poisson
with mean ``|alpha|**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy.stats import poisson

from .model import TruncationError, check_eta, check_gamma, check_strategy

HALF_SQRT2 = math.sqrt(2) / 2


@dataclass(frozen=True)
class ModeAmplitudes:
    alpha1: complex
    alpha2: complex

    @property
    def photon_numbers(self) -> Tuple[float, float]:
        return abs(self.alpha1) ** 2, abs(self.alpha2) ** 2


def encode_strategies(x1: float, x2: float) -> ModeAmplitudes:
    """Displace each vacuum mode by ``(sqrt(2)/2) * x_i``."""
    x1, x2 = check_strategy(x1), check_strategy(x2)
    return ModeAmplitudes(complex(HALF_SQRT2 * x1), complex(HALF_SQRT2 * x2))


def beam_splitter(amps: ModeAmplitudes, gamma: float) -> ModeAmplitudes:
    g = check_gamma(gamma, closed=True)
    cg, sg = math.cos(g), math.sin(g)
    return ModeAmplitudes(
        amps.alpha1 * cg + 1j * amps.alpha2 * sg,
        amps.alpha2 * cg + 1j * amps.alpha1 * sg,
    )


def apply_loss(amps: ModeAmplitudes, eta1: float, eta2: float) -> ModeAmplitudes:
    """Pure-loss channel on each mode: a coherent state stays coherent with
    its amplitude damped by ``sqrt(eta)``."""
    eta1, eta2 = check_eta(eta1), check_eta(eta2)
    return ModeAmplitudes(amps.alpha1 * math.sqrt(eta1), amps.alpha2 * math.sqrt(eta2))


def expected_quantities(x1: float, x2: float, gamma: float) -> Tuple[float, float]:
    """Mean photon numbers of the two output modes (the firms' quantities)."""
    g = check_gamma(gamma, closed=True)
    c2, s2 = math.cos(g) ** 2, math.sin(g) ** 2
    y1, y2 = x1 * x1, x2 * x2
    return 0.5 * (y1 * c2 + y2 * s2), 0.5 * (y2 * c2 + y1 * s2)


def lossy_quantities(x1: float, x2: float, gamma: float, eta2: float) -> Tuple[float, float]:
    """Quantities when only firm 2's mode passes a loss channel before counting."""
    eta2 = check_eta(eta2)
    n1, n2 = expected_quantities(x1, x2, gamma)
    return n1, eta2 * n2


def poisson_joint_pmf(m1: int, m2: int, x1: float, x2: float, gamma: float) -> float:
    lam1, lam2 = expected_quantities(x1, x2, gamma)
    return float(poisson.pmf(m1, lam1) * poisson.pmf(m2, lam2))


def chernoff_upper_tail(lam: float, m: int) -> float:
    """Upper bound on ``P(X >= m)`` for ``X ~ Poisson(lam)``."""
    if m <= 0:
        return 1.0
    if lam == 0:
        return 0.0
    if m <= lam:
        return 1.0
    return min(1.0, math.exp(-lam + m * (1 + math.log(lam) - math.log(m))))


@dataclass(frozen=True)
class PoissonTruncation:
    """Per-mode cutoffs certified by a Chernoff bound.

    Each mode keeps counts ``0..m_max`` with ``P(X > m_max) <= tail_bound / 2``,
    so the omitted joint mass is at most ``tail_bound``.
    """

    tail_bound: float = 1e-12
    max_cutoff: int = 4096

    def cutoff(self, lam: float) -> Tuple[int, float]:
        """Return ``(m_max, certified tail)`` for one mode of mean ``lam``."""
        target = self.tail_bound / 2
        m = max(0, math.ceil(lam))
        while True:
            if m > self.max_cutoff:
                raise TruncationError(
                    f"Poisson mean {lam:g} needs a cutoff above {self.max_cutoff} "
                    f"to keep the tail below {target:g}"
                )
            tail = chernoff_upper_tail(lam, m + 1)
            if tail <= target:
                return m, tail
            m += 1


@dataclass(frozen=True)
class PoissonGrid:
    m1: np.ndarray
    m2: np.ndarray
    prob: np.ndarray
    m_max: Tuple[int, int]
    tail: float


def poisson_grid(lam1: float, lam2: float, trunc: PoissonTruncation | None = None) -> PoissonGrid:
    trunc = trunc or PoissonTruncation()
    cut1, tail1 = trunc.cutoff(lam1)
    cut2, tail2 = trunc.cutoff(lam2)
    k1 = np.arange(cut1 + 1)
    k2 = np.arange(cut2 + 1)
    p = np.outer(poisson.pmf(k1, lam1), poisson.pmf(k2, lam2))
    m1, m2 = np.meshgrid(k1, k2, indexing="ij")
    return PoissonGrid(m1, m2, p, (cut1, cut2), tail1 + tail2)


def truncated_expectation(
    kernel: Callable[[np.ndarray, np.ndarray], np.ndarray],
    x1: float,
    x2: float,
    gamma: float,
    trunc: PoissonTruncation | None = None,
) -> float:
    """Average ``kernel(m1, m2)`` over the joint photon-count distribution.

    ``kernel`` is called once on the full integer meshgrid. Summation order is
    fixed by the grid shape, so the result is bit-stable for a given truncation.
    """
    lam1, lam2 = expected_quantities(x1, x2, gamma)
    grid = poisson_grid(lam1, lam2, trunc)
    values = np.broadcast_to(kernel(grid.m1, grid.m2), grid.prob.shape)
    return float(np.sum(values * grid.prob))
