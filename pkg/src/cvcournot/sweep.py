"""Parameter sweeps over equilibrium profits and kink detection in the results."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .equilibrium import asym_loss_nash, bayes_nash, nash_classical_apparatus, nash_quantum_apparatus
from .model import GAMMA_LIMIT_EPS, QUARTER_PI, EquilibriumReport, ParameterError, info_from_ratio
from .oracle import (
    Game,
    asym_loss_game,
    bayes_game,
    classical_apparatus_game,
    deviation_gain,
    quantum_apparatus_game,
)

SCHEMA_VERSION = 1
GAMES = ("symmetric_classical", "symmetric_quantum", "bayes", "asym_loss")
VARIABLES = {
    "symmetric_classical": ("gamma",),
    "symmetric_quantum": ("gamma",),
    "bayes": ("gamma", "delta_over_k"),
    "asym_loss": ("gamma", "eta"),
}
DEFAULTS = {"k": 1.0, "gamma": 0.0, "theta": 0.5, "delta_over_k": 0.5, "eta": 1.0}
GAMMA_MAX = QUARTER_PI - GAMMA_LIMIT_EPS


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: ``variable`` over ``[lo, hi]`` in ``steps`` uniform points.

    ``variable2`` optionally adds an inner axis for a 2-D grid; ``fixed``
    holds every parameter not swept.
    """

    game: str
    variable: str
    lo: float
    hi: float
    steps: int = 201
    fixed: Dict[str, float] = field(default_factory=dict)
    variable2: Optional[str] = None
    lo2: float = 0.0
    hi2: float = 1.0
    steps2: int = 201

    def __post_init__(self):
        if self.game not in GAMES:
            raise ParameterError(f"unknown game {self.game!r}; choose from {', '.join(GAMES)}")
        allowed = VARIABLES[self.game]
        for var in filter(None, (self.variable, self.variable2)):
            if var not in allowed:
                raise ParameterError(f"game {self.game} cannot sweep {var!r}; allowed: {', '.join(allowed)}")
        if self.variable2 == self.variable:
            raise ParameterError("the two sweep variables must differ")
        if self.steps < 2 or (self.variable2 and self.steps2 < 2):
            raise ParameterError("a sweep needs at least 2 steps per axis")
        _check_range(self.variable, self.lo, self.hi)
        if self.variable2:
            _check_range(self.variable2, self.lo2, self.hi2)

    def params(self) -> Dict[str, float]:
        out = dict(DEFAULTS)
        out.update(self.fixed)
        return out

    def grid(self) -> List[Dict[str, float]]:
        base = self.params()
        points = []
        for v in np.linspace(self.lo, self.hi, self.steps):
            if self.variable2 is None:
                points.append({**base, self.variable: float(v)})
                continue
            for v2 in np.linspace(self.lo2, self.hi2, self.steps2):
                points.append({**base, self.variable: float(v), self.variable2: float(v2)})
        return points

    @property
    def columns(self) -> List[str]:
        axes = [self.variable] + ([self.variable2] if self.variable2 else [])
        return axes + list(strategy_labels(self.game)) + ["u1_k2", "u2_k2", "total_k2", "region"]


def _check_range(variable: str, lo: float, hi: float) -> None:
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ParameterError(f"{variable} range needs finite lo < hi, got [{lo}, {hi}]")
    if variable == "gamma" and not (0 <= lo and hi <= QUARTER_PI):
        raise ParameterError(f"gamma range must lie inside [0, pi/4], got [{lo}, {hi}]")
    if variable == "eta" and not (0 < lo and hi <= 1):
        raise ParameterError(f"eta range must lie inside (0, 1], got [{lo}, {hi}]")
    if variable == "delta_over_k" and not (0 < lo and hi < 2):
        raise ParameterError(f"delta/k range must lie inside (0, 2), got [{lo}, {hi}]")


def strategy_labels(game: str) -> Sequence[str]:
    return ("x1", "x2H", "x2L") if game == "bayes" else ("x1", "x2")


def solve_point(game: str, p: Dict[str, float]) -> EquilibriumReport:
    """Closed-form equilibrium of ``game`` at parameters ``p``."""
    if game == "symmetric_classical":
        return nash_classical_apparatus(p["k"], p["gamma"])
    if game == "symmetric_quantum":
        return nash_quantum_apparatus(p["k"], p["gamma"])
    if game == "bayes":
        return bayes_nash(info_from_ratio(p["theta"], p["delta_over_k"], p["k"]), p["gamma"])
    if game == "asym_loss":
        return asym_loss_nash(p["k"], p["gamma"], p["eta"])
    raise ParameterError(f"unknown game {game!r}")


def oracle_game(game: str, p: Dict[str, float]) -> Game:
    if game == "symmetric_classical":
        return classical_apparatus_game(p["k"], p["gamma"])
    if game == "symmetric_quantum":
        return quantum_apparatus_game(p["k"], p["gamma"])
    if game == "bayes":
        return bayes_game(info_from_ratio(p["theta"], p["delta_over_k"], p["k"]), p["gamma"])
    if game == "asym_loss":
        return asym_loss_game(p["k"], p["gamma"], p["eta"])
    raise ParameterError(f"unknown game {game!r}")


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    points: List[Dict[str, float]]
    reports: List[EquilibriumReport]

    def column(self, name: str) -> np.ndarray:
        return np.array([row[name] for row in self.rows()], dtype=float)

    def rows(self) -> List[Dict[str, object]]:
        spec = self.spec
        k2 = spec.params()["k"] ** 2
        out = []
        for p, rep in zip(self.points, self.reports):
            row: Dict[str, object] = {spec.variable: p[spec.variable]}
            if spec.variable2:
                row[spec.variable2] = p[spec.variable2]
            row.update(zip(strategy_labels(spec.game), rep.x_star))
            u1, u2 = rep.profits
            row.update(u1_k2=u1 / k2, u2_k2=u2 / k2, total_k2=(u1 + u2) / k2, region=rep.region.value)
            out.append(row)
        return out


def run_sweep(spec: SweepSpec) -> SweepResult:
    points = spec.grid()
    return SweepResult(spec, points, [solve_point(spec.game, p) for p in points])


def _fmt(value: object) -> str:
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    buf.write(f"# schema_version={SCHEMA_VERSION} game={result.spec.game}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(result.spec.columns)
    for row in result.rows():
        writer.writerow([_fmt(row[c]) for c in result.spec.columns])
    return buf.getvalue()


def write_csv(result: SweepResult, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(to_csv(result))


@dataclass(frozen=True)
class TransitionReport:
    location: float
    left_slope: float
    right_slope: float
    jump: float
    series: str = ""


def detect_transition(
    t: Sequence[float],
    y: Sequence[float],
    factor: float = 10.0,
    window: int = 5,
    rel_floor: float = 1e-6,
    series: str = "",
) -> List[TransitionReport]:
    """Find kinks (jumps in the first derivative) in a uniformly sampled curve.

    ``change[j]`` is the slope change across interior point ``t[j+1]``. On a
    smooth curve it drifts slowly, so its excess over the median of the
    surrounding ``2 * window + 1`` values (fewer near the ends) is close to zero; a kink shows up
    as an isolated excess. A point is reported when its excess is a local
    maximum and exceeds ``factor`` times the median local slope variation
    (the point-to-point fluctuation of ``change``). ``rel_floor`` times the
    curve's slope scale bounds the threshold from below so that round-off
    on flat stretches is ignored.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.size != y.size or t.size < 5:
        raise ParameterError("detect_transition needs at least 5 samples of equal length")
    h = np.diff(t)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise ParameterError("detect_transition needs a uniform grid")
    slopes = np.diff(y) / h[0]
    change = np.diff(slopes)
    n = change.size
    roughness = np.abs(np.diff(change))
    scale = float(np.max(np.abs(slopes))) + float(np.max(np.abs(y))) / (t[-1] - t[0])
    floor = rel_floor * scale
    excess = np.empty(n)
    threshold = np.empty(n)
    for j in range(n):
        half = min(window, j, n - 1 - j)  # symmetric, so a linear drift has zero excess
        lo, hi = j - half, j + half + 1
        excess[j] = abs(change[j] - np.median(change[lo:hi]))
        local = roughness[max(0, lo - 1) : max(hi - 1, lo)]
        threshold[j] = max(factor * float(np.median(local)) if local.size else 0.0, floor)
    found = []
    for j in range(n):
        left = excess[j - 1] if j > 0 else -np.inf
        right = excess[j + 1] if j + 1 < n else -np.inf
        if excess[j] > threshold[j] and excess[j] >= left and excess[j] > right:
            found.append(
                TransitionReport(
                    location=float(t[j + 1]),
                    left_slope=float(slopes[j]),
                    right_slope=float(slopes[j + 1]),
                    jump=float(abs(change[j])),
                    series=series,
                )
            )
    return found


def sweep_transitions(result: SweepResult, **kwargs) -> List[TransitionReport]:
    """Kinks in each profit column of a 1-D sweep."""
    if result.spec.variable2 is not None:
        return []
    t = result.column(result.spec.variable)
    found = []
    for name in ("u1_k2", "u2_k2", "total_k2"):
        found.extend(detect_transition(t, result.column(name), series=name, **kwargs))
    return found


def transitions_json(reports: Iterable[TransitionReport]) -> str:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "transitions": [r.__dict__ for r in reports],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def spot_check(result: SweepResult, fraction: float = 0.05, seed: int = 0, points: int = 2048) -> float:
    """Largest unilateral gain, in units of ``k**2``, over a seeded random subsample of rows."""
    n = len(result.points)
    size = max(1, int(round(fraction * n)))
    rng = np.random.default_rng(seed)
    picks = sorted(rng.choice(n, size=size, replace=False).tolist())
    k2 = result.spec.params()["k"] ** 2
    worst = 0.0
    for i in picks:
        game = oracle_game(result.spec.game, result.points[i])
        worst = max(worst, deviation_gain(game, result.reports[i].x_star, points) / k2)
    return worst


def figure_specs(name: str, steps: int = 201) -> Dict[str, SweepSpec]:
    """Preset sweeps for the standard profit plots, keyed by curve label.

    ``fig1``/``fig3b``: profits vs delta/k at theta=0.5 for five angles.
    ``fig2``/``fig3a``: profits vs gamma at theta=0.5 for five asymmetries.
    ``fig4``: asymmetric-loss profits on a (gamma, eta) grid.
    """
    dk_max = 2 - 1e-6
    if name in ("fig1", "fig3b"):
        gammas = {
            "g0": 0.0,
            "g_pi16": math.pi / 16,
            "g_pi8": math.pi / 8,
            "g_3pi16": 3 * math.pi / 16,
            "g_limit": GAMMA_MAX,
        }
        return {
            label: SweepSpec("bayes", "delta_over_k", 1e-6, dk_max, steps, {"theta": 0.5, "gamma": g})
            for label, g in gammas.items()
        }
    if name in ("fig2", "fig3a"):
        ratios = {"dk0": 1e-9, "dk0.5": 0.5, "dk1": 1.0, "dk1.5": 1.5, "dk_limit": dk_max}
        return {
            label: SweepSpec("bayes", "gamma", 0.0, GAMMA_MAX, steps, {"theta": 0.5, "delta_over_k": r})
            for label, r in ratios.items()
        }
    if name == "fig4":
        return {
            "grid": SweepSpec(
                "asym_loss", "gamma", 0.0, GAMMA_MAX, steps, {}, variable2="eta", lo2=0.005, hi2=1.0, steps2=steps
            )
        }
    raise ParameterError(f"unknown figure {name!r}; choose fig1, fig2, fig3a, fig3b, fig4")
