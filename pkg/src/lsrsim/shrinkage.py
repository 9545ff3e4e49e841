"""Line search for the outage-minimizing real shrinkage coefficient.

The objective ``b -> p(GMI(b) < rate)`` is evaluated by common-random-number
Monte Carlo: every evaluation reuses the same per-trial realizations (one
seed shared across the whole search), which makes the objective a
deterministic piecewise-constant function of ``b``.  A coarse grid over
``b / a`` (``a`` = LMMSE coefficient magnitude) followed by grid refinement
around the incumbent is therefore more robust than bracketing line searches
that assume smoothness.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelConfig, lmmse_coefficient
from .outage import OutageEstimate, gmi_samples_multi_b, wilson_interval

__all__ = ["SearchSpec", "BOptimum", "optimize_b", "b_sweep"]


@dataclass
class SearchSpec:
    """Search-domain and budget parameters for :func:`optimize_b`."""

    trials: int
    seed: int
    ratio_low: float = 0.0
    ratio_high: float = 2.0
    coarse_points: int = 41
    refine_iters: int = 3

    def __post_init__(self):
        if not (0 <= self.ratio_low < self.ratio_high):
            raise ValueError(
                f"need 0 <= ratio_low < ratio_high, got "
                f"[{self.ratio_low}, {self.ratio_high}]"
            )
        if self.coarse_points < 3:
            raise ValueError(f"coarse_points must be >= 3, got {self.coarse_points}")
        if self.refine_iters < 0:
            raise ValueError(f"refine_iters must be >= 0, got {self.refine_iters}")
        if self.trials < 1:
            raise ValueError(f"trials must be positive, got {self.trials}")


@dataclass
class BOptimum:
    """Optimization result: incumbent, its outage estimate, and the trace."""

    b_star: float
    outage: OutageEstimate
    sweep: list[tuple[float, float]] = field(default_factory=list)
    degenerate: bool = False


def _coarse_grid(spec: SearchSpec) -> np.ndarray:
    grid = np.linspace(spec.ratio_low, spec.ratio_high, spec.coarse_points)
    if spec.ratio_low <= 1.0 <= spec.ratio_high:
        # pin the LMMSE point: nearest coarse ratio snaps to exactly 1
        grid[int(np.argmin(np.abs(grid - 1.0)))] = 1.0
    return grid


def _estimate(gmi_row: np.ndarray, rate_nats: float, trials: int) -> OutageEstimate:
    failures = int(np.count_nonzero(gmi_row < rate_nats))
    low, high = wilson_interval(failures, trials)
    return OutageEstimate(
        p_hat=failures / trials,
        trials=trials,
        failures=failures,
        ci95_low=low,
        ci95_high=high,
    )


def optimize_b(
    config: ChannelConfig,
    rate_nats: float,
    spec: SearchSpec,
    *,
    workers: int = 1,
) -> BOptimum:
    """Minimize Monte Carlo outage over real ``b`` in ``[ratio_low, ratio_high] * a``.

    The coarse grid always contains ``b = a`` exactly (when ratio 1 is inside
    the search interval), so the optimum can never be worse than the LMMSE
    point.  Each refinement pass re-grids ``coarse_points`` values across the
    interval spanned by the evaluated neighbors of the incumbent.  Ties are
    broken toward smaller ``b``.  Fully deterministic for a fixed spec.
    """
    a = abs(lmmse_coefficient(config))
    evaluated: dict[float, OutageEstimate] = {}

    def run(b_list: list[float]) -> None:
        todo = [b for b in b_list if b not in evaluated]
        if not todo:
            return
        gmi = gmi_samples_multi_b(
            config, todo, spec.trials, spec.seed, workers=workers
        )
        for k, b in enumerate(todo):
            evaluated[b] = _estimate(gmi[k], rate_nats, spec.trials)

    def incumbent() -> float:
        return min(evaluated, key=lambda b: (evaluated[b].p_hat, b))

    run([float(r) * a for r in _coarse_grid(spec)])

    degenerate = False
    for _ in range(spec.refine_iters):
        best = incumbent()
        points = sorted(evaluated)
        i = points.index(best)
        lo = points[i - 1] if i > 0 else points[i]
        hi = points[i + 1] if i + 1 < len(points) else points[i]
        if not lo < hi:
            degenerate = True
            break
        before = len(evaluated)
        run([float(b) for b in np.linspace(lo, hi, spec.coarse_points)])
        if len(evaluated) == before:
            break  # interval no longer resolves new points

    best = incumbent()
    return BOptimum(
        b_star=best,
        outage=evaluated[best],
        sweep=[(b, evaluated[b].p_hat) for b in sorted(evaluated)],
        degenerate=degenerate,
    )


def b_sweep(
    config: ChannelConfig,
    rate_nats: float,
    b_values,
    trials: int,
    seed: int,
    *,
    workers: int = 1,
) -> list[tuple[float, OutageEstimate]]:
    """Common-seed outage estimates at each requested coefficient.

    Input order (and any duplicates) is preserved; duplicate entries yield
    identical estimates because all evaluations share realizations.
    """
    bs = [float(b) for b in b_values]
    if not bs:
        raise ValueError("b_values must be nonempty")
    gmi = gmi_samples_multi_b(config, bs, trials, seed, workers=workers)
    return [(b, _estimate(gmi[k], rate_nats, trials)) for k, b in enumerate(bs)]
