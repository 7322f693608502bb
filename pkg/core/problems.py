"""
Problem data for tripled systems of the form

    x_i(t) = g_i(t) + f_i(t, x(ξ_i(t)), y(ξ_i(t)), z(ξ_i(t)),
                      ψ_i(∫_0^{q_i(t)} h_i(t, s, x(η_i(s)), y(η_i(s)), z(η_i(s))) ds))

and the registry of built-in problems. Every map is numpy-vectorised and
pure.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping

import numpy as np

from core.exceptions import DomainError, UnknownProblem
from core.funcspace import Grid
from core.validators import validate_problem_name, validate_problem_parameters

log = logging.getLogger(__name__)

ScalarMap = Callable[[np.ndarray], np.ndarray]
OuterMap = Callable[..., np.ndarray]      # (t, x, y, z, p)
KernelMap = Callable[..., np.ndarray]     # (t, s, x, y, z)
BoundMap = Callable[[np.ndarray, np.ndarray], np.ndarray]  # (t, s)

# Ladder on which comparison maps are checked for monotonicity / strictness.
COMPARISON_LADDER = np.logspace(-3, 3, 61)


# ────────────────────────────────────────────────────────────────
# Elementary maps
# ────────────────────────────────────────────────────────────────
def identity(u):
    return u


def half(r):
    return 0.5 * np.asarray(r, dtype=np.float64)


def vanish(r):
    return np.zeros_like(np.asarray(r, dtype=np.float64))


def zero_outer(t, x, y, z, p):
    return np.zeros(np.broadcast(t, x, y, z, p).shape)


def zero_kernel(t, s, x, y, z):
    return np.zeros(np.broadcast(t, s, x, y, z).shape)


def zero_bound(t, s):
    return np.zeros(np.broadcast(t, s).shape)


def constant_map(value: float) -> ScalarMap:
    def g(t):
        return np.full(np.shape(t), value, dtype=np.float64)
    return g


# ────────────────────────────────────────────────────────────────
# Problem specification
# ────────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class Component:
    """Data of one equation i of the system."""

    g: ScalarMap
    f: OuterMap
    h: KernelMap
    psi: ScalarMap = identity
    xi: ScalarMap = identity
    eta: ScalarMap = identity
    q: ScalarMap = identity
    delta: float = 1.0
    alpha: float = 1.0
    phi: ScalarMap = identity
    Phi: ScalarMap = identity
    M: float | None = None
    # |h(t, s, ·)| <= kernel_bound(t, s) and
    # |h(t, s, x, y, z) - h(t, s, u, v, w)| <= diff_bound(t, s)
    kernel_bound: BoundMap | None = None
    diff_bound: BoundMap | None = None


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    components: tuple[Component, Component, Component]
    parameters: Mapping[str, float] = field(default_factory=dict)
    description: str = ""
    D: float | None = None
    G: float | None = None

    def __post_init__(self):
        if len(self.components) != 3:
            raise DomainError(f"a tripled system needs 3 components, got {len(self.components)}")
        object.__setattr__(self, "parameters", MappingProxyType(dict(self.parameters)))

    def component(self, i: int) -> Component:
        """Component i in {1, 2, 3}."""
        if i not in (1, 2, 3):
            raise DomainError(f"component index must be 1, 2 or 3, got {i!r}")
        return self.components[i - 1]

    def with_component(self, i: int, **changes) -> ProblemSpec:
        """Copy of the spec with fields of component i replaced."""
        parts = list(self.components)
        parts[i - 1] = dataclasses.replace(self.component(i), **changes)
        return dataclasses.replace(self, components=tuple(parts))


@dataclass(frozen=True)
class Violation:
    condition: str
    component: int | None
    witness: tuple[float, ...]
    message: str = ""

    def __str__(self) -> str:
        where = f"component {self.component}" if self.component else "problem"
        return f"{self.condition} [{where}] at {self.witness}: {self.message}".rstrip(": ")


def validate_spec(spec: ProblemSpec, grid: Grid, n_samples: int = 1000) -> list[Violation]:
    """
    Sampled structural checks of a problem on a grid.

    Warps are checked on ``n_samples`` evenly spaced points of [0, t_max]
    together with the grid nodes. Violations are returned, never raised.
    """
    if n_samples < 1:
        raise DomainError(f"n_samples must be >= 1, got {n_samples!r}")
    points = np.union1d(np.linspace(0.0, grid.t_max, n_samples), grid.nodes)
    violations: list[Violation] = []

    with np.errstate(all="ignore"):
        for i, comp in enumerate(spec.components, start=1):
            for label, warp in (("xi", comp.xi), ("eta", comp.eta), ("q", comp.q)):
                values = np.broadcast_to(np.asarray(warp(points), dtype=np.float64), points.shape)
                bad = ~np.isfinite(values) | (values < 0)
                if bad.any():
                    j = int(np.flatnonzero(bad)[0])
                    violations.append(Violation(
                        "warp negative", i, (float(points[j]),),
                        f"{label}_{i}({points[j]:.6g}) = {values[j]:.6g}",
                    ))

            g_values = np.broadcast_to(np.asarray(comp.g(grid.nodes), dtype=np.float64), grid.nodes.shape)
            if not np.all(np.isfinite(g_values)):
                j = int(np.flatnonzero(~np.isfinite(g_values))[0])
                violations.append(Violation("g non-finite", i, (float(grid.nodes[j]),)))

            Phi_zero = float(np.asarray(comp.Phi(np.array([0.0])), dtype=np.float64)[0])
            if Phi_zero != 0.0:
                violations.append(Violation("Φ(0) ≠ 0", i, (0.0,), f"Φ_{i}(0) = {Phi_zero:.6g}"))

            for label, fn in (("φ", comp.phi), ("Φ", comp.Phi)):
                values = np.broadcast_to(
                    np.asarray(fn(COMPARISON_LADDER), dtype=np.float64), COMPARISON_LADDER.shape
                )
                if np.any(values < 0) or not np.all(np.isfinite(values)):
                    j = int(np.flatnonzero(~(values >= 0))[0])
                    violations.append(Violation(
                        f"{label} not a map into R+", i, (float(COMPARISON_LADDER[j]),)
                    ))
                drops = np.flatnonzero(np.diff(values) < 0)
                if drops.size:
                    j = int(drops[0])
                    violations.append(Violation(
                        f"{label} decreasing", i,
                        (float(COMPARISON_LADDER[j]), float(COMPARISON_LADDER[j + 1])),
                    ))

            for label, value in (("delta", comp.delta), ("alpha", comp.alpha)):
                if not (math.isfinite(value) and value > 0):
                    violations.append(Violation("constant not positive", i, (float(value),), label))
            if comp.M is not None and not (math.isfinite(comp.M) and comp.M >= 0):
                violations.append(Violation("constant not positive", i, (float(comp.M),), "M"))

    if spec.D is not None and not (math.isfinite(spec.D) and spec.D > 0):
        violations.append(Violation("constant not positive", None, (float(spec.D),), "D"))
    if spec.G is not None and not (math.isfinite(spec.G) and spec.G >= 0):
        violations.append(Violation("constant not positive", None, (float(spec.G),), "G"))

    for v in violations:
        log.warning({"msg": "spec_violation", "problem": spec.name, "violation": str(v)})
    return violations


# ────────────────────────────────────────────────────────────────
# Registry
# ────────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class RegistryEntry:
    name: str
    builder: Callable[[dict[str, float]], ProblemSpec]
    defaults: Mapping[str, float]
    description: str


REGISTRY: dict[str, RegistryEntry] = {}


def register(name: str, *, defaults: Mapping[str, float] | None = None, description: str = ""):
    """Decorator adding a problem builder to the registry under ``name``."""
    name = validate_problem_name(name)

    def decorator(builder: Callable[[dict[str, float]], ProblemSpec]):
        REGISTRY[name] = RegistryEntry(
            name=name,
            builder=builder,
            defaults=MappingProxyType(dict(defaults or {})),
            description=description,
        )
        return builder

    return decorator


def get_problem(problem_id) -> ProblemSpec:
    """
    Build the registered problem named by ``problem_id``.

    Accepts a ``core.schemas.ProblemId`` or a bare name. Unknown names raise
    UnknownProblem; bad parameters raise django ValidationError.
    """
    if isinstance(problem_id, str):
        name, supplied = problem_id, {}
    else:
        name, supplied = problem_id.name, problem_id.parameters
    entry = REGISTRY.get((name or "").lower().strip())
    if entry is None:
        raise UnknownProblem(
            f"unknown problem '{name}'. Registered: {', '.join(sorted(REGISTRY))}"
        )
    parameters = validate_problem_parameters(entry.defaults, supplied)
    return entry.builder(parameters)


# ────────────────────────────────────────────────────────────────
# Worked example (three coupled equations, unbounded horizon)
# ────────────────────────────────────────────────────────────────
def _g1(t):
    return t**2 / (2 + 2 * t**4)


def _g2(t):
    return 0.5 * np.exp(-t**2)


def _g3(t):
    return 1 / (2 * np.sqrt(1 + t**4))


def _f1(t, x, y, z, p):
    return (x + y + z) / (3 * t**2 + 3) + p


def _f2(t, x, y, z, p):
    return t**2 * (x + y + z) / (3 * t**4 + 3) + p


def _f3(t, x, y, z, p):
    return t**3 * (x + y + z) / (3 * t**5 + 3) + p


def _h1(t, s, x, y, z):
    sin_y, cos_z = np.sin(y), np.cos(z)
    return (
        x * s * np.abs(sin_y) * np.abs(cos_z)
        / (np.exp(t) * (1 + x**2) * (1 + sin_y**2) * (1 + cos_z**2))
    )


def _h2_listed(t, s, x, y, z):
    # Numerator and denominator share their state factors.
    common = (1 + y**2) * (1 + np.sin(x) ** 2) * (1 + np.cos(z) ** 2)
    return np.exp(s - t**2) * common / common


def _h2_system(t, s, x, y, z):
    return (
        np.exp(s - t**2) * y**2 * (1 + np.cos(x) ** 2) * (1 + np.sin(z) ** 2)
        / ((1 + y**2) * (1 + np.sin(x) ** 2) * (1 + np.cos(z) ** 2))
    )


def _h3(t, s, x, y, z):
    weight = (1 + z**2) * (1 + np.sin(y) ** 2) * (1 + np.cos(x) ** 2)
    # sqrt(e^s · w) written as e^{s/2}·sqrt(w) to stay finite longer
    return (s**2 * np.abs(np.cos(z)) + np.exp(s / 2) * np.sqrt(weight)) / (np.exp(t) * weight)


def _s_over_et(t, s):
    return s / np.exp(t)


def _es_over_et2(t, s):
    return np.exp(s - t**2)


def _h3_bound(t, s):
    # Each of the two summands lies in [0, s²/e^t] resp. (0, e^{s/2}/e^t].
    return (s**2 + np.exp(s / 2)) / np.exp(t)


def _square(t):
    return t**2


def _example_components(h2: KernelMap, h2_bound: BoundMap, h2_diff: BoundMap):
    return (
        Component(
            g=_g1, f=_f1, h=_h1, psi=np.arctan,
            xi=np.sqrt, eta=_square, q=np.sqrt,
            M=0.0, kernel_bound=_s_over_et, diff_bound=_s_over_et,
        ),
        Component(
            g=_g2, f=_f2, h=h2, psi=np.sin,
            M=0.0, kernel_bound=h2_bound, diff_bound=h2_diff,
        ),
        Component(
            g=_g3, f=_f3, h=_h3, psi=np.cos, q=_square,
            M=0.0, kernel_bound=_h3_bound, diff_bound=_h3_bound,
        ),
    )


@register(
    "paper_example",
    description=(
        "Worked three-equation example: arctan/sin/cos outer maps, warps "
        "sqrt(t), t², t; kernels decaying like e^{-t} and e^{-t²}."
    ),
)
def paper_example(parameters: dict[str, float]) -> ProblemSpec:
    return ProblemSpec(
        name="paper_example",
        components=_example_components(
            _h2_listed,
            _es_over_et2,
            lambda t, s: 2 * np.exp(s - t**2),
        ),
        parameters=parameters,
        description=REGISTRY["paper_example"].description,
        G=0.5,
    )


@register(
    "paper_example_system",
    description=(
        "Worked example with the second kernel in its state-dependent form "
        "e^s·y²(1+cos²x)(1+sin²z) / (e^{t²}(1+y²)(1+sin²x)(1+cos²z))."
    ),
)
def paper_example_system(parameters: dict[str, float]) -> ProblemSpec:
    # (1+cos²x)/(1+sin²x) <= 2 and (1+sin²z)/(1+cos²z) <= 2
    four_es_over_et2 = lambda t, s: 4 * np.exp(s - t**2)  # noqa: E731
    return ProblemSpec(
        name="paper_example_system",
        components=_example_components(_h2_system, four_es_over_et2, four_es_over_et2),
        parameters=parameters,
        description=REGISTRY["paper_example_system"].description,
        G=0.5,
    )


# ────────────────────────────────────────────────────────────────
# Oracle problems
# ────────────────────────────────────────────────────────────────
def _trivial_component(value: float) -> Component:
    return Component(
        g=constant_map(value), f=zero_outer, h=zero_kernel,
        phi=half, M=0.0, kernel_bound=zero_bound, diff_bound=zero_bound,
    )


@register(
    "decoupled_identity",
    defaults={"c1": 1.0, "c2": -0.5, "c3": 2.0},
    description="f ≡ 0, h ≡ 0, g_i ≡ c_i; the exact solution is (c1, c2, c3).",
)
def decoupled_identity(parameters: dict[str, float]) -> ProblemSpec:
    values = (parameters["c1"], parameters["c2"], parameters["c3"])
    return ProblemSpec(
        name="decoupled_identity",
        components=tuple(_trivial_component(c) for c in values),
        parameters=parameters,
        description=REGISTRY["decoupled_identity"].description,
        G=max(abs(c) for c in values),
    )


@register(
    "linear_volterra",
    defaults={"lam": 1.0},
    description=(
        "x = 1 + lam·∫_0^t x(s) ds in the first slot, trivial zero equations "
        "in the others; exact solution x(t) = e^{lam·t}."
    ),
)
def linear_volterra(parameters: dict[str, float]) -> ProblemSpec:
    lam = parameters["lam"]

    def h1(t, s, x, y, z):
        return lam * x

    def f1(t, x, y, z, p):
        return np.broadcast_to(p, np.broadcast(t, x, y, z, p).shape).astype(np.float64)

    first = Component(g=constant_map(1.0), f=f1, h=h1, phi=vanish, M=0.0)
    return ProblemSpec(
        name="linear_volterra",
        components=(first, _trivial_component(0.0), _trivial_component(0.0)),
        parameters=parameters,
        description=REGISTRY["linear_volterra"].description,
        G=1.0,
    )
