"""
The fixed-point operator T = (T1, T2, T3):

    T_i(x, y, z)(t) = g_i(t) + f_i(t, x(ξ_i(t)), y(ξ_i(t)), z(ξ_i(t)), ψ_i(I_i(t)))

with I_i the kernel integral computed by ``core.quadrature``.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from django.conf import settings

from core.exceptions import NumericError
from core.funcspace import CSV_FORMAT, GridFunction, TripleState
from core.problems import ProblemSpec
from core.quadrature import kernel_integrals
from core.schemas import QuadConfig

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class OperatorEval:
    output: TripleState
    inner_integrals: tuple[GridFunction, GridFunction, GridFunction]
    extension_hits: int = 0

    def to_csv(self, path: str | Path) -> None:
        grid = self.output.grid
        table = np.column_stack(
            [grid.nodes]
            + [c.values for c in self.output]
            + [c.values for c in self.inner_integrals]
        )
        np.savetxt(
            path, table, fmt=CSV_FORMAT, delimiter=",",
            header="t,T1,T2,T3,I1,I2,I3", comments="",
        )


def _checked(values, nodes: np.ndarray, label: str, i: int) -> np.ndarray:
    values = np.broadcast_to(np.asarray(values, dtype=np.float64), nodes.shape)
    if not np.all(np.isfinite(values)):
        j = int(np.flatnonzero(~np.isfinite(values))[0])
        raise NumericError(f"non-finite {label}", {"component": i, "t": float(nodes[j])})
    return values


def _apply_component(spec: ProblemSpec, i: int, state: TripleState, cfg: QuadConfig):
    comp = spec.component(i)
    nodes = state.grid.nodes

    integral, hits = kernel_integrals(spec, i, state, nodes, cfg)

    with np.errstate(all="ignore"):
        warped = _checked(comp.xi(nodes), nodes, "xi", i)
        hits += int(np.count_nonzero(warped > state.grid.t_max))
        x, y, z = (f.evaluate(warped) for f in state)

        g = _checked(comp.g(nodes), nodes, "g", i)
        p = _checked(comp.psi(integral), nodes, "psi", i)
        outer = _checked(comp.f(nodes, x, y, z, p), nodes, "f", i)
        output = _checked(g + outer, nodes, "operator output", i)

    return GridFunction(state.grid, output), GridFunction(state.grid, integral), hits


def apply_T(spec: ProblemSpec, state: TripleState, cfg: QuadConfig | None = None) -> OperatorEval:
    """
    Evaluate T at ``state`` on its grid.

    The three components are independent; with ``TRIPLED_WORKERS`` > 1 they
    run on a thread pool. Results are collected in component order.
    """
    cfg = cfg or QuadConfig()
    workers = max(1, int(settings.TRIPLED_WORKERS))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=min(workers, 3)) as pool:
            futures = [pool.submit(_apply_component, spec, i, state, cfg) for i in (1, 2, 3)]
            parts = [fut.result() for fut in futures]
    else:
        parts = [_apply_component(spec, i, state, cfg) for i in (1, 2, 3)]

    outputs, integrals, hits = zip(*parts)
    return OperatorEval(
        output=TripleState(*outputs),
        inner_integrals=tuple(integrals),
        extension_hits=int(sum(hits)),
    )


def residual(spec: ProblemSpec, state: TripleState, cfg: QuadConfig | None = None) -> float:
    """max_i ‖T_i(state) − state_i‖_∞"""
    return apply_T(spec, state, cfg).output.distance(state)
