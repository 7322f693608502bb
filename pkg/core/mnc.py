"""
Finite-family estimators of the BC(R+) measure of noncompactness

    μ(X) = ω0(X) + lim sup_{t→∞} diam X(t)

where ω0 is the limit of the family modulus of continuity ω^K(X, ε). The
double limit is read off at the extremes of a (K, ε) ladder and the lim sup
is replaced by the maximum over a trailing window [tail_start, t_max].
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Literal, Sequence

import numpy as np

from core.exceptions import ContractViolation, DomainError
from core.funcspace import CSV_FORMAT, Grid, GridFunction, random_function
from core.schemas import MncParams

log = logging.getLogger(__name__)

Family = Sequence[GridFunction]
FamilyGenerator = Callable[[np.random.Generator], list[GridFunction]]

CONVEX_WEIGHTS = (0.0, 0.25, 0.5, 0.75, 1.0)
AXIOM_SLACK = 1e-12
TAIL_FRACTION = 0.8


# ────────────────────────────────────────────────────────────────
# Helpers
# ────────────────────────────────────────────────────────────────
def _stack(family: Family) -> tuple[Grid, np.ndarray]:
    members = list(family)
    if not members:
        raise DomainError("family must not be empty")
    grid = members[0].grid
    if any(f.grid != grid for f in members[1:]):
        raise ContractViolation("family members must share one grid")
    return grid, np.stack([f.values for f in members])


def _check_window(grid: Grid, k: float, eps: float) -> None:
    if not k > 0:
        raise DomainError(f"k must be positive, got {k!r}")
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps!r}")
    if k > grid.t_max * (1 + 1e-12):
        raise DomainError(f"k={k!r} exceeds the horizon t_max={grid.t_max!r}")


def _modulus_table(grid: Grid, values: np.ndarray, ks: Sequence[float], epss: Sequence[float]) -> np.ndarray:
    """
    Family moduli for every (k, ε) pair, shape (len(ks), len(epss)).

    One pass over node lags d: the largest gap at lag d among pairs inside
    [0, k] is a prefix maximum, and the modulus at ε is the running maximum
    over d <= ε/step.
    """
    for k in ks:
        for eps in epss:
            _check_window(grid, k, eps)
    counts = [grid.count_upto(k) for k in ks]
    lags = [int(np.floor(eps / grid.step + 1e-9)) for eps in epss]
    max_lag = min(max(lags), max(counts) - 1)

    best = np.zeros((max_lag + 1, len(ks)))
    for d in range(1, max_lag + 1):
        gaps = np.maximum.accumulate(np.abs(values[:, d:] - values[:, :-d]).max(axis=0))
        for j, m in enumerate(counts):
            inside = gaps[m - d - 1] if m - d - 1 >= 0 else 0.0
            best[d, j] = max(best[d - 1, j], inside)

    table = np.empty((len(ks), len(epss)))
    for a in range(len(ks)):
        for b, lag in enumerate(lags):
            table[a, b] = best[min(lag, max_lag), a]
    return table


def _stacked_modulus(grid: Grid, values: np.ndarray, k: float, eps: float) -> float:
    return float(_modulus_table(grid, values, [k], [eps])[0, 0])


def _diam_curve(values: np.ndarray) -> np.ndarray:
    return values.max(axis=0) - values.min(axis=0)


def resolve_params(params: MncParams | None, grid: Grid) -> tuple[list[float], list[float], float]:
    """(k_ladder, eps_ladder, tail_start) with grid-dependent defaults filled in."""
    params = params or MncParams()
    k_ladder = list(params.k_ladder or (grid.t_max / 4, grid.t_max / 2, grid.t_max))
    for k in k_ladder:
        _check_window(grid, k, params.eps_ladder[-1])
    tail_start = TAIL_FRACTION * grid.t_max if params.tail_start is None else params.tail_start
    if not tail_start < grid.t_max:
        raise DomainError(f"tail_start={tail_start!r} must be below t_max={grid.t_max!r}")
    return k_ladder, list(params.eps_ladder), tail_start


# ────────────────────────────────────────────────────────────────
# Moduli and diameters
# ────────────────────────────────────────────────────────────────
def modulus(f: GridFunction, k: float, eps: float) -> float:
    """ω^k(f, ε): largest |f(t_i) − f(t_j)| over nodes in [0, k] with |t_i − t_j| <= ε."""
    return _stacked_modulus(f.grid, f.values[None, :], k, eps)


def family_modulus(family: Family, k: float, eps: float) -> float:
    grid, values = _stack(family)
    return _stacked_modulus(grid, values, k, eps)


def diam_at(family: Family, t: float) -> float:
    """max_{f,g ∈ F} |f(t) − g(t)|"""
    _stack(family)
    point = np.array([float(t)])
    samples = np.array([f.evaluate(point)[0] for f in family])
    return float(samples.max() - samples.min())


def tail_diam(family: Family, params: MncParams | None = None) -> float:
    grid, values = _stack(family)
    _, _, tail_start = resolve_params(params, grid)
    start = grid.first_at_or_after(tail_start)
    return float(_diam_curve(values)[start:].max())


# ────────────────────────────────────────────────────────────────
# Estimates
# ────────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class ModulusEntry:
    k: float
    eps: float
    value: float


@dataclass(frozen=True)
class MncReport:
    omega0_est: float
    tail_diam_est: float
    mu_est: float
    modulus_table: tuple[ModulusEntry, ...] = ()
    diam: GridFunction | None = field(default=None, repr=False)

    def diam_to_csv(self, path: str | Path) -> None:
        if self.diam is None:
            raise ContractViolation("report carries no diameter curve")
        table = np.column_stack([self.diam.grid.nodes, self.diam.values])
        np.savetxt(path, table, fmt=CSV_FORMAT, delimiter=",", header="t,diam", comments="")


def mnc_estimate(family: Family, params: MncParams | None = None) -> MncReport:
    grid, values = _stack(family)
    k_ladder, eps_ladder, tail_start = resolve_params(params, grid)

    moduli = _modulus_table(grid, values, k_ladder, eps_ladder)
    table = tuple(
        ModulusEntry(k=k, eps=eps, value=float(moduli[a, b]))
        for a, k in enumerate(k_ladder)
        for b, eps in enumerate(eps_ladder)
    )
    # largest K, smallest ε
    omega0 = table[-1].value

    curve = _diam_curve(values)
    tail = float(curve[grid.first_at_or_after(tail_start):].max())
    return MncReport(
        omega0_est=omega0,
        tail_diam_est=tail,
        mu_est=omega0 + tail,
        modulus_table=table,
        diam=GridFunction(grid, curve),
    )


def product_mnc(reports: Sequence[MncReport], combiner: Literal["max", "sum"] = "max") -> float:
    """Combine three component estimates with the max or the sum combiner."""
    if len(reports) != 3:
        raise DomainError(f"product measure needs 3 reports, got {len(reports)}")
    mus = [r.mu_est for r in reports]
    if combiner == "max":
        return max(mus)
    if combiner == "sum":
        return mus[0] + mus[1] + mus[2]
    raise DomainError(f"unknown combiner {combiner!r}")


# ────────────────────────────────────────────────────────────────
# Axiom checks on random finite families
# ────────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class AxiomFailure:
    trial: int
    check: Literal["monotonicity", "convexity"]
    lam: float | None
    lhs: float
    rhs: float


@dataclass(frozen=True)
class AxiomSuite:
    trials: int
    monotonicity_passed: int
    convexity_passed: int
    failures: tuple[AxiomFailure, ...]

    @property
    def passed(self) -> bool:
        return self.monotonicity_passed == self.trials and self.convexity_passed == self.trials


def random_family(grid: Grid, size: int = 5, bound: float = 1.0) -> FamilyGenerator:
    """Generator of ``size`` smooth random functions with sup norm <= bound."""
    if size < 1:
        raise DomainError(f"family size must be >= 1, got {size!r}")

    def generate(rng: np.random.Generator) -> list[GridFunction]:
        return [random_function(rng, grid, bound) for _ in range(size)]

    return generate


def axiom_suite(
    generator: FamilyGenerator,
    n_trials: int,
    seed: int,
    params: MncParams | None = None,
) -> AxiomSuite:
    """
    Subset monotonicity (F ⊆ F ∪ E ⇒ μ̂(F) <= μ̂(F ∪ E)) and convexity
    (μ̂(λF + (1−λ)G) <= λμ̂(F) + (1−λ)μ̂(G), elementwise combination) on
    ``n_trials`` random families.
    """
    if n_trials < 1:
        raise DomainError(f"n_trials must be >= 1, got {n_trials!r}")
    rng = np.random.default_rng(seed)
    failures: list[AxiomFailure] = []
    mono_ok = convex_ok = 0

    for trial in range(n_trials):
        first = generator(rng)
        extra = generator(rng)
        second = generator(rng)

        mu_first = mnc_estimate(first, params).mu_est
        mu_union = mnc_estimate(first + extra, params).mu_est
        if mu_first <= mu_union:
            mono_ok += 1
        else:
            failures.append(AxiomFailure(trial, "monotonicity", None, mu_first, mu_union))

        size = min(len(first), len(second))
        mu_second = mnc_estimate(second[:size], params).mu_est
        mu_head = mnc_estimate(first[:size], params).mu_est
        trial_ok = True
        for lam in CONVEX_WEIGHTS:
            mixed = [
                GridFunction(f.grid, lam * f.values + (1.0 - lam) * g.values)
                for f, g in zip(first[:size], second[:size])
            ]
            lhs = mnc_estimate(mixed, params).mu_est
            rhs = lam * mu_head + (1.0 - lam) * mu_second
            if lhs > rhs + AXIOM_SLACK:
                trial_ok = False
                failures.append(AxiomFailure(trial, "convexity", lam, lhs, rhs))
        convex_ok += trial_ok

    suite = AxiomSuite(n_trials, mono_ok, convex_ok, tuple(failures))
    log.info({
        "msg": "axiom_suite_finished",
        "trials": n_trials,
        "monotonicity_passed": mono_ok,
        "convexity_passed": convex_ok,
    })
    return suite
