"""Robustness labels from percolation curves.

``s(rho)`` is the LCC fraction after attacking the first ``round(rho * N)``
nodes of an attack order. Two labels are offered: the discrete average of
``s`` over every removal count, and its integral over ``[0, 1]`` computed with
adaptive Simpson quadrature. The sampler memoizes on the removal count, so no
cascade is simulated twice for the same label.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Sequence

from pydantic import BaseModel, ConfigDict, Field, model_validator

from hyperrobust.cascade import (
    AttackKind,
    AttackSpec,
    attacked_lcc,
    check_order,
    dynamic_failure_order,
    removal_count,
    static_attack_order,
)
from hyperrobust.hypergraph import Hypergraph

logger = logging.getLogger(__name__)

DEFAULT_DELTA_PRED = 5e-3
# tolerance is this many times stricter than the target model error
TOLERANCE_FACTOR = 50.0


class QuadratureConfig(BaseModel):
    """Adaptive Simpson settings.

    ``epsilon`` defaults to ``delta_pred / 50``; ``d_max`` counts refinement
    levels including the root interval.
    """

    model_config = ConfigDict(frozen=True)

    epsilon: float = Field(default=DEFAULT_DELTA_PRED / TOLERANCE_FACTOR, gt=0.0)
    d_max: int = Field(default=10, ge=1)
    delta_pred: float = Field(default=DEFAULT_DELTA_PRED, gt=0.0)

    @model_validator(mode="before")
    @classmethod
    def _derive_epsilon(cls, data: object) -> object:
        if isinstance(data, dict) and data.get("epsilon") is None:
            delta = data.get("delta_pred", DEFAULT_DELTA_PRED)
            return {**data, "epsilon": float(delta) / TOLERANCE_FACTOR}
        return data

    @classmethod
    def from_delta_pred(cls, delta_pred: float, d_max: int = 10) -> QuadratureConfig:
        return cls(delta_pred=delta_pred, d_max=d_max)


@dataclass
class QuadratureStats:
    """Telemetry collected by :func:`adaptive_simpson`."""

    accepted_depths: Counter[int] = field(default_factory=Counter)
    accepted_intervals: list[tuple[float, float, int]] = field(default_factory=list)
    capped: int = 0

    @property
    def max_depth(self) -> int:
        return max(self.accepted_depths, default=0)


class PercolationSampler:
    """Memoizing evaluator of ``s`` keyed by removal count."""

    def __init__(self, h: Hypergraph, attack: AttackSpec, order: Sequence[int]) -> None:
        self.h = h
        self.attack = attack
        self.order = check_order(h, order)
        self.memo: dict[int, float] = {}

    @property
    def num_nodes(self) -> int:
        return self.h.num_nodes

    @property
    def eval_count(self) -> int:
        """Number of distinct simulations performed so far."""
        return len(self.memo)

    def at_count(self, q: int) -> float:
        if q not in self.memo:
            self.memo[q] = attacked_lcc(self.h, self.order[:q], self.attack)
        return self.memo[q]

    def __call__(self, rho: float) -> float:
        return self.at_count(removal_count(rho, self.h.num_nodes))


def robustness_discrete(sampler: PercolationSampler, n: int) -> float:
    """``(1/n) * sum(s(q) for q in 1..n)``; ``n`` is normally the node count."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return sum(sampler.at_count(q) for q in range(1, n + 1)) / n


def simpson_estimate(s: Callable[[float], float], x: float, y: float) -> float:
    return (y - x) / 6.0 * (s(x) + 4.0 * s((x + y) / 2.0) + s(y))


def adaptive_simpson(
    s: Callable[[float], float],
    a: float,
    b: float,
    cfg: QuadratureConfig,
    stats: QuadratureStats | None = None,
    grid: int | None = None,
    monotone: bool = False,
) -> float:
    """Integrate ``s`` over ``[a, b]`` by recursive bisection.

    The fine estimate of an interval is accepted when it differs from the
    coarse one by less than the local tolerance, which halves for each child.
    The deepest level accepts unconditionally.

    With ``grid=n`` the integrand is a step function of
    ``removal_count(x, n)`` on ``[0, 1]``. An interval holding at most one
    step edge is integrated exactly and wider ones are bisected, so the
    result is the exact step integral unless ``d_max`` caps the recursion.
    ``monotone`` declares ``s`` non-increasing: an interval whose end values
    agree is then constant.
    """
    if a > b:
        raise ValueError(f"expected a <= b, got a={a}, b={b}")

    def accept(x: float, y: float, depth: int, value: float, capped: bool) -> float:
        if stats is not None:
            stats.accepted_depths[depth] += 1
            stats.accepted_intervals.append((x, y, depth))
            stats.capped += int(capped)
        return value

    def refine(
        x: float, y: float, fx: float, fm: float, fy: float, whole: float, eps: float, depth: int
    ) -> float:
        m = (x + y) / 2.0
        lm = (x + m) / 2.0
        rm = (m + y) / 2.0
        flm = s(lm)
        frm = s(rm)
        left = (m - x) / 6.0 * (fx + 4.0 * flm + fm)
        right = (y - m) / 6.0 * (fm + 4.0 * frm + fy)
        fine = left + right
        converged = abs(whole - fine) < eps
        if converged or depth >= cfg.d_max - 1:
            return accept(x, y, depth, fine, not converged)
        return refine(x, m, fx, flm, fm, left, eps / 2.0, depth + 1) + refine(
            m, y, fm, frm, fy, right, eps / 2.0, depth + 1
        )

    def refine_steps(n: int, x: float, y: float, fx: float, fy: float, depth: int) -> float:
        qx, qy = removal_count(x, n), removal_count(y, n)
        if qx == qy or (monotone and fx == fy):
            return accept(x, y, depth, (y - x) * fx, False)
        if qy == qx + 1:
            edge = min(max((qx + 0.5) / n, x), y)
            return accept(x, y, depth, (edge - x) * fx + (y - edge) * fy, False)
        m = (x + y) / 2.0
        fm = s(m)
        if depth >= cfg.d_max - 1:
            return accept(x, y, depth, (y - x) / 6.0 * (fx + 4.0 * fm + fy), True)
        return refine_steps(n, x, m, fx, fm, depth + 1) + refine_steps(
            n, m, y, fm, fy, depth + 1
        )

    if grid is not None:
        if grid < 1:
            raise ValueError(f"grid must be >= 1, got {grid}")
        if a < 0.0 or b > 1.0:
            raise ValueError(f"a step grid covers [0, 1], got [{a}, {b}]")
        return refine_steps(grid, a, b, s(a), s(b), 0)

    fa, fm, fb = s(a), s((a + b) / 2.0), s(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return refine(a, b, fa, fm, fb, whole, cfg.epsilon, 0)


def attack_order(h: Hypergraph, attack: AttackSpec) -> list[int]:
    """Failure order used as the õ feature for this attack."""
    if attack.kind is AttackKind.STATIC:
        return static_attack_order(h)
    return dynamic_failure_order(h, attack.cascade)


def label_hypergraph(
    h: Hypergraph,
    attack: AttackSpec,
    cfg: QuadratureConfig,
    stats: QuadratureStats | None = None,
) -> tuple[float, int]:
    """Integral robustness label and the number of distinct simulations.

    Both attack kinds remove nodes in static hyperdegree order; dynamic
    attacks let each removal cascade from an intact network. The curve only
    changes at removal-count boundaries, so the quadrature runs on that grid
    and returns the exact step integral; static curves never increase.
    """
    sampler = PercolationSampler(h, attack, static_attack_order(h))
    if sampler.at_count(0) < 1.0:
        logger.warning(
            "labelling a hypergraph whose intact LCC fraction is %.4f",
            sampler.at_count(0),
        )
    grid = h.num_nodes if h.num_nodes > 0 else None
    monotone = attack.kind is AttackKind.STATIC
    value = adaptive_simpson(sampler, 0.0, 1.0, cfg, stats, grid=grid, monotone=monotone)
    logger.debug(
        "label %.6f after %d simulations (%s)", value, sampler.eval_count, attack.kind.value
    )
    return value, sampler.eval_count
