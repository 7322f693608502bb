"""
Sampled bounded continuous functions on a truncated half-line.

A ``GridFunction`` stands for an element of BC(R+) cut off at ``t_max``:
values live on a uniform grid, evaluation interpolates linearly between
nodes and extends the last value as a constant beyond ``t_max``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterator

import numpy as np

from core.exceptions import ContractViolation, DomainError, NumericError

# t_max = 20 with Δ = 0.01; kernels of the built-in problems decay like e^{-t}.
DEFAULT_T_MAX = 20.0
DEFAULT_N_NODES = 2001

CSV_FORMAT = "%.17g"


def _readonly(values) -> np.ndarray:
    array = np.array(values, dtype=np.float64, copy=True)
    array.setflags(write=False)
    return array


# ────────────────────────────────────────────────────────────────
# Grid
# ────────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class Grid:
    t_max: float = DEFAULT_T_MAX
    n_nodes: int = DEFAULT_N_NODES

    def __post_init__(self):
        if not (isinstance(self.t_max, (int, float)) and math.isfinite(self.t_max) and self.t_max > 0):
            raise DomainError(f"t_max must be finite and positive, got {self.t_max!r}")
        if int(self.n_nodes) != self.n_nodes or self.n_nodes < 2:
            raise DomainError(f"n_nodes must be an integer >= 2, got {self.n_nodes!r}")
        object.__setattr__(self, "t_max", float(self.t_max))
        object.__setattr__(self, "n_nodes", int(self.n_nodes))

    @classmethod
    def from_step(cls, t_max: float, step: float) -> Grid:
        """Grid on [0, t_max] whose step is ``step`` (t_max must be a multiple)."""
        cells = round(t_max / step)
        if cells < 1 or not math.isclose(cells * step, t_max, rel_tol=1e-12):
            raise DomainError(f"t_max={t_max!r} is not a multiple of step={step!r}")
        return cls(t_max=t_max, n_nodes=cells + 1)

    @property
    def step(self) -> float:
        return self.t_max / (self.n_nodes - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        return _readonly(np.linspace(0.0, self.t_max, self.n_nodes))

    def count_upto(self, bound: float) -> int:
        """Number of nodes t_j with t_j <= bound (robust to rounding of the step)."""
        if bound < 0:
            return 0
        return min(self.n_nodes, int(math.floor(bound / self.step + 1e-9)) + 1)

    def first_at_or_after(self, bound: float) -> int:
        """Index of the first node t_j >= bound."""
        if bound <= 0:
            return 0
        return min(self.n_nodes - 1, int(math.ceil(bound / self.step - 1e-9)))


# ────────────────────────────────────────────────────────────────
# GridFunction
# ────────────────────────────────────────────────────────────────
@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = _readonly(self.values)
        if values.shape != (self.grid.n_nodes,):
            raise ContractViolation(
                f"expected {self.grid.n_nodes} values, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise NumericError(
                "grid function holds a non-finite value",
                {"node": bad, "t": float(self.grid.nodes[bad])},
            )
        object.__setattr__(self, "values", values)

    # --- construction -----------------------------------------------------
    @classmethod
    def sample(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray]) -> GridFunction:
        """Sample a vectorised map on the grid nodes."""
        values = np.broadcast_to(np.asarray(fn(grid.nodes), dtype=np.float64), grid.nodes.shape)
        return cls(grid, values)

    @classmethod
    def constant(cls, grid: Grid, value: float) -> GridFunction:
        return cls(grid, np.full(grid.n_nodes, float(value)))

    @classmethod
    def zeros(cls, grid: Grid) -> GridFunction:
        return cls.constant(grid, 0.0)

    # --- evaluation -------------------------------------------------------
    def evaluate(self, t) -> np.ndarray:
        """Vectorised point evaluation; ``t`` must be finite and nonnegative."""
        t = np.asarray(t, dtype=np.float64)
        if t.size and not (np.all(np.isfinite(t)) and t.min() >= 0):
            bad = t[~(np.isfinite(t) & (t >= 0))].flat[0]
            raise DomainError(f"evaluation point must be finite and >= 0, got {bad!r}")
        # np.interp holds the end values outside the node range.
        return np.interp(t, self.grid.nodes, self.values)

    def __call__(self, t: float) -> float:
        return eval_at(self, t)

    # --- arithmetic used by the solver ------------------------------------
    def _check_grid(self, other: GridFunction) -> None:
        if other.grid != self.grid:
            raise ContractViolation(f"grid mismatch: {self.grid} vs {other.grid}")

    def __add__(self, other: GridFunction) -> GridFunction:
        self._check_grid(other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: GridFunction) -> GridFunction:
        self._check_grid(other)
        return GridFunction(self.grid, self.values - other.values)

    def scaled(self, factor: float) -> GridFunction:
        return GridFunction(self.grid, factor * self.values)

    def shifted(self, offset: float) -> GridFunction:
        return GridFunction(self.grid, self.values + offset)

    # --- serialization ----------------------------------------------------
    def to_csv(self, path: str | Path) -> None:
        table = np.column_stack([self.grid.nodes, self.values])
        np.savetxt(path, table, fmt=CSV_FORMAT, delimiter=",", header="t,value", comments="")

    @classmethod
    def from_csv(cls, path: str | Path) -> GridFunction:
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        nodes = table[:, 0]
        grid = Grid(t_max=float(nodes[-1]), n_nodes=len(nodes))
        if not np.allclose(nodes, grid.nodes, rtol=0, atol=1e-12 * max(1.0, grid.t_max)):
            raise ContractViolation(f"{path}: nodes are not a uniform grid starting at 0")
        return cls(grid, table[:, 1])


def eval_at(f: GridFunction, t: float) -> float:
    """Value of ``f`` at a single point ``t >= 0``."""
    if not (isinstance(t, (int, float, np.floating, np.integer)) and math.isfinite(t)) or t < 0:
        raise DomainError(f"evaluation point must be finite and >= 0, got {t!r}")
    return float(np.interp(float(t), f.grid.nodes, f.values))


def sup_dist(f: GridFunction, g: GridFunction) -> float:
    if f.grid != g.grid:
        raise ContractViolation(f"grid mismatch: {f.grid} vs {g.grid}")
    return float(np.max(np.abs(f.values - g.values)))


def sup_norm(f: GridFunction) -> float:
    return float(np.max(np.abs(f.values)))


# ────────────────────────────────────────────────────────────────
# TripleState
# ────────────────────────────────────────────────────────────────
@dataclass(frozen=True, eq=False)
class TripleState:
    x: GridFunction
    y: GridFunction
    z: GridFunction

    def __post_init__(self):
        if not (self.x.grid == self.y.grid == self.z.grid):
            raise ContractViolation("state components must share one grid")

    @property
    def grid(self) -> Grid:
        return self.x.grid

    @property
    def components(self) -> tuple[GridFunction, GridFunction, GridFunction]:
        return (self.x, self.y, self.z)

    def __iter__(self) -> Iterator[GridFunction]:
        return iter(self.components)

    def __getitem__(self, index: int) -> GridFunction:
        return self.components[index]

    @classmethod
    def zeros(cls, grid: Grid) -> TripleState:
        zero = GridFunction.zeros(grid)
        return cls(zero, zero, zero)

    def distance(self, other: TripleState) -> float:
        """Max-combiner distance: the largest component sup-distance."""
        return max(sup_dist(a, b) for a, b in zip(self, other))

    def norm(self) -> float:
        return max(sup_norm(c) for c in self)

    def blend(self, other: TripleState, theta: float) -> TripleState:
        """(1 - θ)·self + θ·other, componentwise."""
        if theta == 1.0:
            return other
        return TripleState(*(
            GridFunction(a.grid, (1.0 - theta) * a.values + theta * b.values)
            for a, b in zip(self, other)
        ))

    def to_csv(self, path: str | Path) -> None:
        table = np.column_stack([self.grid.nodes, self.x.values, self.y.values, self.z.values])
        np.savetxt(path, table, fmt=CSV_FORMAT, delimiter=",", header="t,x,y,z", comments="")


# ────────────────────────────────────────────────────────────────
# Random smooth states (probes, hypothesis checks, axiom trials)
# ────────────────────────────────────────────────────────────────
def random_function(rng: np.random.Generator, grid: Grid, bound: float = 1.0, modes: int = 4) -> GridFunction:
    """
    Smooth random function with sup norm <= ``bound``.

    A constant plus ``modes`` low-frequency cosines, rescaled by the sum of
    absolute amplitudes so the bound holds at every point.
    """
    amplitudes = rng.uniform(-1.0, 1.0, size=modes + 1)
    frequencies = rng.uniform(0.0, 3.0 * math.pi / grid.t_max, size=modes)
    phases = rng.uniform(0.0, 2.0 * math.pi, size=modes)
    nodes = grid.nodes
    values = amplitudes[0] + sum(
        a * np.cos(w * nodes + p) for a, w, p in zip(amplitudes[1:], frequencies, phases)
    )
    scale = bound / max(np.abs(amplitudes).sum(), 1e-300)
    return GridFunction(grid, np.clip(scale * values, -bound, bound))


def random_state(rng: np.random.Generator, grid: Grid, bound: float = 1.0) -> TripleState:
    return TripleState(*(random_function(rng, grid, bound) for _ in range(3)))
