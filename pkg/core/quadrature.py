"""
Composite Simpson quadrature with panel doubling.

The kernel integrals of one component are computed for all grid nodes at
once: every node is a row with its own interval [0, q(t)], and each row is
refined until two successive doublings each agree with the estimate before
them. Refinement only samples the new midpoints; the previous odd sum
becomes part of the even sum.
"""

from __future__ import annotations

import logging
import math
from typing import Callable

import numpy as np
from django.conf import settings

from core.exceptions import DomainError, NumericError, ToleranceNotMet
from core.funcspace import TripleState
from core.problems import ProblemSpec
from core.schemas import QuadConfig

log = logging.getLogger(__name__)

# integrand(t_column, s_matrix) -> values of s_matrix's shape
RowIntegrand = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _chunk_rows(n_points: int) -> int:
    return max(1, int(settings.TRIPLED_QUAD_CHUNK) // max(n_points, 1))


def _sample(integrand: RowIntegrand, t: np.ndarray, s: np.ndarray, location: dict) -> np.ndarray:
    with np.errstate(all="ignore"):
        values = np.broadcast_to(
            np.asarray(integrand(t[:, None], s), dtype=np.float64), s.shape
        )
    finite = np.isfinite(values)
    if not finite.all():
        r, c = np.argwhere(~finite)[0]
        where = dict(location)
        if "t" not in where:
            where["t"] = float(t[r])
        where["s"] = float(s[r, c])
        raise NumericError("non-finite integrand sample", where)
    return values


def _sample_chunked(integrand, t, s_of, rows, n_points, location) -> np.ndarray:
    """Sum-ready samples for ``rows``, evaluated in row chunks bounded by TRIPLED_QUAD_CHUNK."""
    out = np.empty((rows.size, n_points))
    step = _chunk_rows(n_points)
    for start in range(0, rows.size, step):
        part = rows[start:start + step]
        out[start:start + part.size] = _sample(integrand, t[part], s_of(part), location)
    return out


def simpson_batch(
    integrand: RowIntegrand,
    t: np.ndarray,
    upper: np.ndarray,
    cfg: QuadConfig | None = None,
    *,
    lower: np.ndarray | float = 0.0,
    location: dict | None = None,
    report_t: bool = True,
) -> np.ndarray:
    """
    ∫_{lower_r}^{upper_r} integrand(t_r, s) ds for every row r.

    Rows with an empty interval are exactly 0 and are never sampled. Raises
    NumericError on the first non-finite sample and ToleranceNotMet when a
    row has not settled after ``cfg.max_refine`` doublings. A row settles when
    two successive doublings both agree with the previous estimate.
    """
    cfg = cfg or QuadConfig()
    t = np.asarray(t, dtype=np.float64).ravel()
    upper = np.broadcast_to(np.asarray(upper, dtype=np.float64), t.shape)
    lower = np.broadcast_to(np.asarray(lower, dtype=np.float64), t.shape)
    location = dict(location or {})
    if not report_t:
        location["t"] = None

    result = np.zeros(t.shape)
    active = np.flatnonzero(upper > lower)
    if active.size == 0:
        return result

    width = upper - lower
    n = cfg.base_panels
    h = width / n

    k = np.arange(n + 1, dtype=np.float64)
    samples = _sample_chunked(
        integrand, t, lambda rows: lower[rows, None] + h[rows, None] * k, active, n + 1, location
    )
    ends = samples[:, 0] + samples[:, -1]
    odd = samples[:, 1:-1:2].sum(axis=1)
    even = samples[:, 2:-1:2].sum(axis=1)
    estimate = h[active] / 3.0 * (ends + 4.0 * odd + 2.0 * even)
    difference = np.full(active.size, math.inf)
    agreed = np.zeros(active.size, dtype=bool)

    for _ in range(cfg.max_refine):
        n *= 2
        h = width / n
        even = even + odd
        mid = 2.0 * np.arange(n // 2, dtype=np.float64) + 1.0
        odd = _sample_chunked(
            integrand, t, lambda rows: lower[rows, None] + h[rows, None] * mid,
            active, n // 2, location,
        ).sum(axis=1)
        refined = h[active] / 3.0 * (ends + 4.0 * odd + 2.0 * even)
        difference = np.abs(refined - estimate)
        estimate = refined
        close = difference < np.maximum(cfg.abs_tol, cfg.rel_tol * np.abs(refined))
        done = close & agreed
        agreed = close
        result[active[done]] = refined[done]
        keep = ~done
        active, ends, odd, even = active[keep], ends[keep], odd[keep], even[keep]
        estimate, difference, agreed = estimate[keep], difference[keep], agreed[keep]
        if active.size == 0:
            return result

    row = int(active[0])
    where_t = location["t"] if "t" in location else float(t[row])
    log.warning({
        "msg": "quadrature_budget_exhausted",
        "rows_unsettled": int(active.size),
        "t": where_t,
        "difference": float(difference[0]),
        **{key: value for key, value in location.items() if key != "t"},
    })
    raise ToleranceNotMet(float(estimate[0]), float(difference[0]), where_t)


def integrate_scalar(fn: Callable[[np.ndarray], np.ndarray], a: float, b: float, cfg: QuadConfig | None = None) -> float:
    """∫_a^b fn(s) ds for a vectorised ``fn``; a <= b, both finite."""
    if not (math.isfinite(a) and math.isfinite(b)) or a > b:
        raise DomainError(f"need finite a <= b, got a={a!r}, b={b!r}")
    values = simpson_batch(
        lambda _t, s: fn(s),
        np.zeros(1), np.array([b]), cfg,
        lower=np.array([a]), report_t=False,
    )
    return float(values[0])


# ────────────────────────────────────────────────────────────────
# Kernel integrals ∫_0^{q_i(t)} h_i(t, s, x(η_i(s)), y(η_i(s)), z(η_i(s))) ds
# ────────────────────────────────────────────────────────────────
def kernel_integrand(spec: ProblemSpec, i: int, state: TripleState, hits: list[int] | None = None) -> RowIntegrand:
    """
    Integrand of component i over a fixed state.

    Warped arguments beyond t_max are counted into ``hits[0]``.
    """
    comp = spec.component(i)
    t_max = state.grid.t_max

    def integrand(t_col, s):
        warped = np.asarray(comp.eta(s), dtype=np.float64)
        if hits is not None:
            hits[0] += int(np.count_nonzero(warped > t_max))
        x, y, z = (f.evaluate(warped) for f in state)
        return comp.h(t_col, s, x, y, z)

    return integrand


def kernel_integrals(
    spec: ProblemSpec,
    i: int,
    state: TripleState,
    t: np.ndarray,
    cfg: QuadConfig | None = None,
) -> tuple[np.ndarray, int]:
    """Kernel integrals of component i at every point of ``t``, plus the extension-hit count."""
    comp = spec.component(i)
    t = np.asarray(t, dtype=np.float64)
    with np.errstate(all="ignore"):
        upper = np.broadcast_to(np.asarray(comp.q(t), dtype=np.float64), t.shape)
    bad = ~(np.isfinite(upper) & (upper >= 0))
    if bad.any():
        j = int(np.flatnonzero(bad)[0])
        raise DomainError(f"q_{i}({t[j]!r}) = {upper[j]!r} is not a finite nonnegative limit")
    hits = [0]
    values = simpson_batch(
        kernel_integrand(spec, i, state, hits), t, upper, cfg, location={"component": i}
    )
    return values, hits[0]


def integrate_kernel(spec: ProblemSpec, i: int, state: TripleState, t: float, cfg: QuadConfig | None = None) -> float:
    """Kernel integral of component i at a single time t in [0, t_max]."""
    if not (math.isfinite(t) and 0.0 <= t <= state.grid.t_max):
        raise DomainError(f"t must lie in [0, {state.grid.t_max}], got {t!r}")
    values, _ = kernel_integrals(spec, i, state, np.array([float(t)]), cfg)
    return float(values[0])
