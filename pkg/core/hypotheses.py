"""
Sampled checks of the existence hypotheses of a tripled system.

Sampling never proves a universally quantified condition, so a passing
check is reported as ``verified-on-samples``. A failing check is
``violated`` and carries a witness that re-triggers the failure when
evaluated again. Quantities that can only be estimated are ``advisory``.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np

from core.exceptions import DomainError, InsufficientSamples, NumericError, SolverError, ToleranceNotMet
from core.funcspace import CSV_FORMAT, Grid, GridFunction, random_state, sup_norm
from core.operators import apply_T
from core.problems import COMPARISON_LADDER, ProblemSpec, validate_spec
from core.quadrature import kernel_integrals, kernel_integrand, simpson_batch
from core.schemas import QuadConfig, VerifyConfig
from core.solver import contraction_probe

log = logging.getLogger(__name__)

Status = Literal["verified-on-samples", "violated", "advisory"]
VERIFIED: Status = "verified-on-samples"
VIOLATED: Status = "violated"
ADVISORY: Status = "advisory"

SLACK = 1e-12
DECAY_THRESHOLD = 1e-6
RADIUS_SCAN = tuple(2.0**k for k in range(-4, 21))


@dataclass(frozen=True)
class ConditionResult:
    condition: str
    status: Status
    component: int | None = None
    witness: tuple[float, ...] | None = None
    measured: float | None = None
    note: str = ""

    def __post_init__(self):
        if self.status == VIOLATED and not self.witness:
            raise DomainError(f"violated condition '{self.condition}' needs a witness")

    def labelled(self, condition: str, component: int | None) -> ConditionResult:
        return ConditionResult(condition, self.status, component, self.witness, self.measured, self.note)


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def _as_array(values, shape) -> np.ndarray:
    return np.broadcast_to(np.asarray(values, dtype=np.float64), shape)


# ────────────────────────────────────────────────────────────────
# (ii) Hölder continuity of ψ
# ────────────────────────────────────────────────────────────────
def check_holder(
    psi: Callable[[np.ndarray], np.ndarray],
    delta: float,
    alpha: float,
    n_samples: int,
    range_bound: float,
    seed: int,
) -> ConditionResult:
    """|ψ(t1) − ψ(t2)| <= δ·|t1 − t2|^α on random pairs in [0, range_bound]."""
    if not (delta > 0 and alpha > 0):
        raise DomainError(f"delta and alpha must be positive, got {delta!r}, {alpha!r}")
    rng = _rng(seed)
    t1 = rng.uniform(0.0, range_bound, n_samples)
    t2 = rng.uniform(0.0, range_bound, n_samples)
    with np.errstate(all="ignore"):
        lhs = np.abs(_as_array(psi(t1), t1.shape) - _as_array(psi(t2), t2.shape))
        rhs = delta * np.abs(t1 - t2) ** alpha
    excess = lhs - rhs
    j = int(np.argmax(np.where(np.isfinite(excess), excess, np.inf)))
    worst = float(excess[j])
    if not np.isfinite(excess[j]) or worst > SLACK:
        return ConditionResult("holder", VIOLATED, witness=(float(t1[j]), float(t2[j])), measured=worst)
    return ConditionResult("holder", VERIFIED, measured=worst)


# ────────────────────────────────────────────────────────────────
# (iii) growth of f in the state and integral slots
# ────────────────────────────────────────────────────────────────
def check_f_bound(spec: ProblemSpec, i: int, n_samples: int, box_bound: float, seed: int) -> ConditionResult:
    """
    |f_i(t, x, y, z, p) − f_i(t, u, v, w, ρ)| <= φ_i(max |Δstate|) + Φ_i(|p − ρ|).

    A third of the samples share the integral slot (ρ = p) and a third share
    the state, so each comparison map is exercised on its own.
    """
    comp = spec.component(i)
    rng = _rng(seed)
    n = n_samples
    t = rng.uniform(0.0, box_bound, n)
    first = rng.uniform(-box_bound, box_bound, (4, n))
    second = rng.uniform(-box_bound, box_bound, (4, n))
    third = n // 3
    second[3, :third] = first[3, :third]
    second[:3, third:2 * third] = first[:3, third:2 * third]

    with np.errstate(all="ignore"):
        lhs = np.abs(_as_array(comp.f(t, *first), t.shape) - _as_array(comp.f(t, *second), t.shape))
        spread = np.max(np.abs(first[:3] - second[:3]), axis=0)
        rhs = _as_array(comp.phi(spread), t.shape) + _as_array(comp.Phi(np.abs(first[3] - second[3])), t.shape)
    excess = lhs - rhs
    j = int(np.argmax(np.where(np.isfinite(excess), excess, np.inf)))
    worst = float(excess[j])
    if not np.isfinite(worst) or worst > SLACK:
        witness = (float(t[j]), *map(float, first[:, j]), *map(float, second[:, j]))
        return ConditionResult("f_bound", VIOLATED, i, witness, worst)
    return ConditionResult("f_bound", VERIFIED, i, measured=worst)


def check_phi_strict(spec: ProblemSpec, i: int) -> ConditionResult:
    """φ_i(r) < r on the comparison ladder; reported as advisory only."""
    comp = spec.component(i)
    values = _as_array(comp.phi(COMPARISON_LADDER), COMPARISON_LADDER.shape)
    weak = np.flatnonzero(~(values < COMPARISON_LADDER))
    if weak.size:
        r = float(COMPARISON_LADDER[weak[0]])
        return ConditionResult(
            "phi_strict", ADVISORY, i, (r,), float(values[weak[0]]),
            "φ(r) >= r on the ladder; strictness not witnessed",
        )
    return ConditionResult("phi_strict", ADVISORY, i, note="φ(r) < r on 1e-3..1e3")


# ────────────────────────────────────────────────────────────────
# (i) divergence of ξ
# ────────────────────────────────────────────────────────────────
def check_xi_growth(spec: ProblemSpec, i: int, grid: Grid, n_samples: int = 1000) -> ConditionResult:
    """ξ_i nondecreasing on [t_max/2, t_max]; ξ_i → ∞ is not observable on a horizon."""
    comp = spec.component(i)
    t = np.linspace(grid.t_max / 2, grid.t_max, max(n_samples, 2))
    with np.errstate(all="ignore"):
        values = _as_array(comp.xi(t), t.shape)
    drops = np.flatnonzero(np.diff(values) < 0)
    if drops.size:
        j = int(drops[0])
        note = f"ξ decreases between {t[j]:.6g} and {t[j + 1]:.6g}"
        return ConditionResult("xi_growth", ADVISORY, i, (float(t[j]), float(t[j + 1])), float(values[-1]), note)
    return ConditionResult(
        "xi_growth", ADVISORY, i, measured=float(values[-1]),
        note="ξ nondecreasing beyond t_max/2; divergence itself is untestable",
    )


# ────────────────────────────────────────────────────────────────
# (iv) M_i and (v) D, decay, kernel majorants
# ────────────────────────────────────────────────────────────────
def _f_at_zero(spec: ProblemSpec, i: int, grid: Grid) -> np.ndarray:
    comp = spec.component(i)
    nodes = grid.nodes
    zero = np.zeros_like(nodes)
    with np.errstate(all="ignore"):
        values = np.abs(_as_array(comp.f(nodes, zero, zero, zero, zero), nodes.shape))
    if not np.all(np.isfinite(values)):
        j = int(np.flatnonzero(~np.isfinite(values))[0])
        raise NumericError("non-finite f(t, 0, 0, 0, 0)", {"component": i, "t": float(nodes[j])})
    return values


def check_M(spec: ProblemSpec, i: int, grid: Grid) -> float:
    """max over grid nodes of |f_i(t, 0, 0, 0, 0)|"""
    return float(_f_at_zero(spec, i, grid).max())


def check_D(
    spec: ProblemSpec,
    i: int,
    n_states: int,
    grid: Grid,
    qcfg: QuadConfig | None,
    seed: int,
    *,
    bound: float = 1.0,
) -> float:
    """
    Largest |∫_0^{q_i(t)} h_i ds| over random states with norm <= bound and
    all grid nodes. A lower bound for the supremum over every state.
    """
    if n_states < 1:
        raise DomainError(f"n_states must be >= 1, got {n_states!r}")
    rng = _rng(seed)
    best = 0.0
    for _ in range(n_states):
        values, _ = kernel_integrals(spec, i, random_state(rng, grid, bound), grid.nodes, qcfg)
        best = max(best, float(np.max(np.abs(values))))
    return best


def majorant_D(spec: ProblemSpec, i: int, grid: Grid, qcfg: QuadConfig | None = None) -> float | None:
    """max_t ∫_0^{q_i(t)} kernel_bound_i(t, s) ds when a kernel majorant is declared."""
    comp = spec.component(i)
    if comp.kernel_bound is None:
        return None
    nodes = grid.nodes
    upper = _as_array(comp.q(nodes), nodes.shape)
    values = simpson_batch(comp.kernel_bound, nodes, upper, qcfg, location={"component": i})
    return float(np.max(np.abs(values)))


@dataclass(frozen=True)
class DecayCurve:
    component: int
    t: tuple[float, ...]
    values: tuple[float, ...]
    status: Status

    def to_csv(self, path) -> None:
        table = np.column_stack([self.t, self.values])
        np.savetxt(path, table, fmt=CSV_FORMAT, delimiter=",", header="t,max_diff_integral", comments="")


def check_kernel_decay(
    spec: ProblemSpec,
    i: int,
    n_pairs: int,
    t_ladder: Sequence[float],
    qcfg: QuadConfig | None,
    seed: int,
    grid: Grid,
    *,
    bound: float = 1.0,
) -> DecayCurve:
    """
    max over random state pairs of |∫_0^{q_i(t)} [h_i(…x…) − h_i(…u…)] ds|
    at each ladder time. Ladder times may exceed the grid horizon; states
    then extend as constants.

    Verified when the last value is below 1e-6 and the last three values do
    not increase.
    """
    ladder = np.asarray(t_ladder, dtype=np.float64)
    if ladder.size == 0 or np.any(np.diff(ladder) <= 0) or ladder[0] < 0:
        raise DomainError("t_ladder must be a nonempty increasing sequence of times >= 0")
    comp = spec.component(i)
    qcfg = qcfg or QuadConfig()
    with np.errstate(all="ignore"):
        upper = _as_array(comp.q(ladder), ladder.shape)
    rng = _rng(seed)
    curve = np.zeros_like(ladder)

    for _ in range(n_pairs):
        a = random_state(rng, grid, bound)
        b = random_state(rng, grid, bound)
        first, second = kernel_integrand(spec, i, a), kernel_integrand(spec, i, b)
        values = simpson_batch(
            lambda t, s: first(t, s) - second(t, s), ladder, upper, qcfg,
            location={"component": i},
        )
        curve = np.maximum(curve, np.abs(values))

    tail = curve[-3:]
    settled = bool(np.all(np.diff(tail) <= qcfg.abs_tol))
    status = VERIFIED if curve[-1] < DECAY_THRESHOLD and settled else VIOLATED
    return DecayCurve(i, tuple(map(float, ladder)), tuple(map(float, curve)), status)


def check_kernel_bound(
    spec: ProblemSpec,
    i: int,
    n_samples: int,
    box_bound: float,
    seed: int,
) -> ConditionResult:
    """|h_i(t, s, x, y, z) − h_i(t, s, u, v, w)| <= diff_bound_i(t, s) on random tuples with s <= q_i(t)."""
    comp = spec.component(i)
    if comp.diff_bound is None:
        return ConditionResult("kernel_bound", ADVISORY, i, note="no kernel difference majorant declared")
    rng = _rng(seed)
    t = rng.uniform(0.0, box_bound, n_samples)
    with np.errstate(all="ignore"):
        s = rng.uniform(0.0, 1.0, n_samples) * _as_array(comp.q(t), t.shape)
        first = rng.uniform(-box_bound, box_bound, (3, n_samples))
        second = rng.uniform(-box_bound, box_bound, (3, n_samples))
        lhs = np.abs(_as_array(comp.h(t, s, *first), t.shape) - _as_array(comp.h(t, s, *second), t.shape))
        rhs = _as_array(comp.diff_bound(t, s), t.shape)
    excess = lhs - rhs * (1.0 + SLACK) - SLACK
    j = int(np.argmax(np.where(np.isfinite(excess), excess, np.inf)))
    if not np.isfinite(excess[j]) or excess[j] > 0:
        witness = (float(t[j]), float(s[j]), *map(float, first[:, j]), *map(float, second[:, j]))
        return ConditionResult("kernel_bound", VIOLATED, i, witness, float(lhs[j] - rhs[j]))
    return ConditionResult("kernel_bound", VERIFIED, i, measured=float(np.max(lhs - rhs)))


# ────────────────────────────────────────────────────────────────
# Invariant ball
# ────────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class Constants:
    G: float | None
    M: tuple[float, float, float]
    D: float
    delta: tuple[float, float, float]
    alpha: tuple[float, float, float]


def radius_bound(spec: ProblemSpec, r: float, G: float, constants: Constants) -> float:
    """max_i φ_i(r) + G + M_i + Φ_i(δ_i·D^{α_i})"""
    worst = -math.inf
    for comp, M, delta, alpha in zip(spec.components, constants.M, constants.delta, constants.alpha):
        phi = float(np.asarray(comp.phi(np.array([r])), dtype=np.float64)[0])
        Phi = float(np.asarray(comp.Phi(np.array([delta * constants.D**alpha])), dtype=np.float64)[0])
        worst = max(worst, phi + G + M + Phi)
    return worst


def g_bound(spec: ProblemSpec, grid: Grid) -> float:
    return max(sup_norm(GridFunction.sample(grid, c.g)) for c in spec.components)


def find_invariant_radius(spec: ProblemSpec, grid: Grid, constants: Constants) -> float | None:
    """Smallest r in 2^-4 … 2^20 with radius_bound(r) <= r, else None."""
    G = g_bound(spec, grid) if constants.G is None else constants.G
    for r in RADIUS_SCAN:
        if radius_bound(spec, r, G, constants) <= r:
            return r
    return None


def check_invariant_ball(
    spec: ProblemSpec,
    grid: Grid,
    r0: float,
    n_states: int,
    seed: int,
    qcfg: QuadConfig | None = None,
) -> ConditionResult:
    """Apply T to random states of norm <= r0 and compare the largest output norm with r0."""
    rng = _rng(seed)
    worst, witness = 0.0, (0.0, 0.0)
    for trial in range(n_states):
        output = apply_T(spec, random_state(rng, grid, r0), qcfg).output
        for i, component in enumerate(output, start=1):
            norm = sup_norm(component)
            if norm > worst:
                worst, witness = norm, (float(trial), float(i))
    if worst > r0 * (1.0 + SLACK):
        return ConditionResult("invariant_ball", VIOLATED, witness=witness, measured=worst,
                               note=f"‖T(state)‖ exceeds r0 = {r0!r}")
    return ConditionResult("invariant_ball", VERIFIED, measured=worst, note=f"r0 = {r0!r}")


# ────────────────────────────────────────────────────────────────
# Aggregate report
# ────────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class HypothesisConstants:
    G: float
    M: tuple[float, ...]
    D_estimate: tuple[float | None, ...]
    D_upper: tuple[float | None, ...]
    delta: tuple[float, ...]
    alpha: tuple[float, ...]
    r0: float | None


@dataclass(frozen=True)
class HypothesisReport:
    problem: str
    conditions: tuple[ConditionResult, ...]
    constants: HypothesisConstants
    decay: tuple[DecayCurve, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return not any(c.status == VIOLATED for c in self.conditions)

    @property
    def violations(self) -> list[ConditionResult]:
        return [c for c in self.conditions if c.status == VIOLATED]


def _numeric_failure(condition: str, i: int, exc: SolverError) -> ConditionResult:
    location = getattr(exc, "location", {}) or {}
    witness = tuple(float(location[k]) for k in ("t", "s") if location.get(k) is not None)
    if not witness and isinstance(exc, ToleranceNotMet) and exc.t is not None:
        witness = (float(exc.t),)
    return ConditionResult(condition, VIOLATED, i, witness, note=str(exc))


def _integral_checks(
    spec: ProblemSpec,
    i: int,
    grid: Grid,
    vcfg: VerifyConfig,
    qcfg: QuadConfig | None,
    seed: int,
) -> tuple[float | None, float | None, DecayCurve | None, list[ConditionResult]]:
    """D majorant, empirical D and decay curve of component i with their conditions."""
    conditions: list[ConditionResult] = []
    try:
        upper = majorant_D(spec, i, grid, qcfg)
    except (NumericError, ToleranceNotMet):
        upper = None

    D = None
    try:
        D = check_D(spec, i, vcfg.n_states, grid, qcfg, seed, bound=vcfg.state_bound)
        note = "empirical lower bound" + (f"; majorant bound {upper!r}" if upper is not None else "")
        conditions.append(ConditionResult("D", ADVISORY, i, measured=D, note=note))
    except (NumericError, ToleranceNotMet) as exc:
        conditions.append(_numeric_failure("D", i, exc))

    curve = None
    try:
        curve = check_kernel_decay(spec, i, vcfg.n_pairs, vcfg.t_ladder, qcfg, seed, grid, bound=vcfg.state_bound)
        witness = (curve.t[-1], curve.values[-1]) if curve.status == VIOLATED else None
        conditions.append(ConditionResult("kernel_decay", curve.status, i, witness, curve.values[-1]))
    except (NumericError, ToleranceNotMet) as exc:
        conditions.append(_numeric_failure("kernel_decay", i, exc))
    return upper, D, curve, conditions


def verify_problem(
    spec: ProblemSpec,
    grid: Grid,
    vcfg: VerifyConfig | None = None,
    qcfg: QuadConfig | None = None,
    seed: int = 0,
) -> HypothesisReport:
    """
    Run every sampled check of conditions (i) to (v), the invariant ball and
    the contraction probe. Structural violations skip the checks that
    integrate over states.
    """
    vcfg = vcfg or VerifyConfig()
    conditions: list[ConditionResult] = []
    decay: list[DecayCurve] = []
    M_values, D_estimates, D_upper = [], [], []
    started = time.monotonic()

    structural = validate_spec(spec, grid, vcfg.warp_samples)
    for v in structural:
        conditions.append(ConditionResult(
            f"structure: {v.condition}", VIOLATED, v.component, v.witness, note=v.message,
        ))

    for i, comp in enumerate(spec.components, start=1):
        conditions.append(check_xi_growth(spec, i, grid, vcfg.warp_samples))
        conditions.append(
            check_holder(comp.psi, comp.delta, comp.alpha, vcfg.n_samples, vcfg.range_bound, seed + i)
            .labelled("holder", i)
        )
        conditions.append(check_f_bound(spec, i, vcfg.n_samples, vcfg.box_bound, seed + i))
        conditions.append(check_phi_strict(spec, i))

        at_zero = _f_at_zero(spec, i, grid)
        M = float(at_zero.max())
        M_values.append(M)
        if comp.M is not None and M > comp.M + SLACK:
            t_worst = float(grid.nodes[int(np.argmax(at_zero))])
            conditions.append(ConditionResult("M", VIOLATED, i, (t_worst,), M, f"declared M = {comp.M!r}"))
        else:
            conditions.append(ConditionResult("M", VERIFIED, i, measured=M))

        if structural:
            D_upper.append(None)
            D_estimates.append(None)
        else:
            upper, D, curve, found = _integral_checks(spec, i, grid, vcfg, qcfg, seed + i)
            D_upper.append(upper)
            D_estimates.append(D)
            conditions.extend(found)
            if curve is not None:
                decay.append(curve)

        conditions.append(check_kernel_bound(spec, i, vcfg.n_samples, vcfg.box_bound, seed + i))

    G = spec.G if spec.G is not None else g_bound(spec, grid)
    r0 = None
    if all(d is not None for d in D_estimates):
        constants = Constants(
            G=G,
            M=tuple(M_values),
            D=max(u if u is not None else d for u, d in zip(D_upper, D_estimates)),
            delta=tuple(c.delta for c in spec.components),
            alpha=tuple(c.alpha for c in spec.components),
        )
        r0 = find_invariant_radius(spec, grid, constants)

    if r0 is None:
        conditions.append(ConditionResult("invariant_ball", ADVISORY, note="no radius in 2^-4 … 2^20 qualifies"))
    else:
        conditions.append(check_invariant_ball(spec, grid, r0, vcfg.n_pairs, seed, qcfg))

    if not structural:
        try:
            probe = contraction_probe(spec, grid, vcfg.n_pairs, seed, qcfg, bound=vcfg.state_bound)
            w = probe.witness
            conditions.append(ConditionResult(
                "contraction", ADVISORY, w.component, (float(w.pair), w.step, *w.norms), probe.max_ratio,
                "largest ‖T(a) − T(b)‖ / ‖a − b‖ over sampled pairs",
            ))
        except (NumericError, ToleranceNotMet, InsufficientSamples) as exc:
            conditions.append(ConditionResult("contraction", ADVISORY, note=str(exc)))

    report = HypothesisReport(
        problem=spec.name,
        conditions=tuple(conditions),
        constants=HypothesisConstants(
            G=G,
            M=tuple(M_values),
            D_estimate=tuple(D_estimates),
            D_upper=tuple(D_upper),
            delta=tuple(c.delta for c in spec.components),
            alpha=tuple(c.alpha for c in spec.components),
            r0=r0,
        ),
        decay=tuple(decay),
    )
    for c in report.violations:
        log.warning({
            "msg": "hypothesis_violated", "problem": spec.name, "condition": c.condition,
            "component": c.component, "witness": c.witness,
        })
    log.info({
        "msg": "verify_finished", "problem": spec.name, "passed": report.passed,
        "duration_ms": int((time.monotonic() - started) * 1000),
    })
    return report
