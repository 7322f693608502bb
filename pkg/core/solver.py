"""
Successive approximation for the tripled system and empirical probes of
the operator's contraction and condensing behaviour.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from core.exceptions import DivergenceError, InsufficientSamples, InvalidProblem, UsageError
from core.funcspace import Grid, GridFunction, TripleState, random_function, random_state, sup_dist
from core.mnc import MncReport, mnc_estimate, product_mnc
from core.operators import OperatorEval, apply_T
from core.problems import ProblemSpec, validate_spec
from core.schemas import MncParams, QuadConfig, SolveConfig

log = logging.getLogger(__name__)

MIN_PAIR_DISTANCE = 1e-12


# ────────────────────────────────────────────────────────────────
# Picard iteration
# ────────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class WindowMnc:
    """μ̂ of the iterates start..stop-1, per component and combined."""

    start: int
    stop: int
    components: tuple[MncReport, MncReport, MncReport]
    mu_max: float
    mu_sum: float


@dataclass(frozen=True)
class SolveReport:
    final: TripleState
    residuals: tuple[float, ...]
    iterations: int
    converged: bool
    final_eval: OperatorEval | None = field(default=None, repr=False)
    trace: tuple[TripleState, ...] | None = field(default=None, repr=False)
    mnc_trace: tuple[WindowMnc, ...] | None = None
    extension_hits: int = 0

    @property
    def status(self) -> str:
        return "converged" if self.converged else "inconclusive"

    @property
    def final_residual(self) -> float:
        return self.residuals[-1] if self.residuals else math.nan


def initial_state(spec: ProblemSpec, grid: Grid, policy: str = "g") -> TripleState:
    if policy == "zero":
        return TripleState.zeros(grid)
    return TripleState(*(GridFunction.sample(grid, c.g) for c in spec.components))


def picard_solve(
    spec: ProblemSpec,
    grid: Grid,
    cfg: SolveConfig | None = None,
    qcfg: QuadConfig | None = None,
    *,
    retain_trace: bool = False,
    initial: TripleState | None = None,
) -> SolveReport:
    """
    Iterate state ← (1 − θ)·state + θ·T(state) until the residual
    ‖T(state) − state‖ drops to ``cfg.tol`` or ``cfg.max_iter`` evaluations.

    ``final`` is the last state whose residual was measured, so a converged
    report satisfies residual(final) <= tol. Raises InvalidProblem when the
    sampled structural checks fail and DivergenceError when the residual
    exceeds divergence_factor·(1 + r_0).
    """
    cfg = cfg or SolveConfig()
    qcfg = qcfg or QuadConfig()

    violations = validate_spec(spec, grid)
    if violations:
        raise InvalidProblem(violations)

    state = initial if initial is not None else initial_state(spec, grid, cfg.init)
    trace: list[TripleState] = []
    residuals: list[float] = []
    hits = 0
    converged = False
    last_eval: OperatorEval | None = None

    for n in range(cfg.max_iter):
        if retain_trace:
            trace.append(state)
        last_eval = apply_T(spec, state, qcfg)
        hits += last_eval.extension_hits
        r = last_eval.output.distance(state)
        residuals.append(r)
        log.debug({"msg": "picard_step", "problem": spec.name, "iteration": n, "residual": r})

        threshold = cfg.divergence_factor * (1.0 + residuals[0])
        if not math.isfinite(r) or r > threshold:
            log.error({
                "msg": "picard_diverged", "problem": spec.name,
                "iteration": n, "residual": r, "threshold": threshold,
            })
            raise DivergenceError(residuals, threshold)

        if r <= cfg.tol:
            converged = True
            break
        if n + 1 < cfg.max_iter:
            state = state.blend(last_eval.output, cfg.damping)

    report = SolveReport(
        final=state,
        residuals=tuple(residuals),
        iterations=len(residuals),
        converged=converged,
        final_eval=last_eval,
        trace=tuple(trace) if retain_trace else None,
        extension_hits=hits,
    )
    if converged:
        log.info({
            "msg": "picard_converged", "problem": spec.name,
            "iteration": report.iterations, "residual": report.final_residual,
        })
    else:
        log.warning({
            "msg": "picard_inconclusive", "problem": spec.name,
            "iteration": report.iterations, "residual": report.final_residual,
        })
    if hits:
        log.info({"msg": "horizon_extension_used", "problem": spec.name, "extension_hits": hits})
    return report


# ────────────────────────────────────────────────────────────────
# Contraction probe
# ────────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class ProbeWitness:
    """The pair with the worst ratio; ``a`` and ``b`` replay it through apply_T."""

    pair: int
    component: int
    step: float
    distance: float
    ratio: float
    a: TripleState = field(repr=False)
    b: TripleState = field(repr=False)

    @property
    def norms(self) -> tuple[float, float]:
        return self.a.norm(), self.b.norm()


@dataclass(frozen=True)
class ContractionProbe:
    max_ratio: float
    witness: ProbeWitness
    buckets: dict[int, float]
    pairs_used: int
    pairs_skipped: int


def contraction_probe(
    spec: ProblemSpec,
    grid: Grid,
    n_pairs: int,
    seed: int,
    qcfg: QuadConfig | None = None,
    *,
    bound: float = 1.0,
) -> ContractionProbe:
    """
    Largest ‖T_i(a) − T_i(b)‖ / ‖a − b‖ over random state pairs.

    ``a`` is a random state with norm <= bound and ``b`` moves towards a
    second random state by a log-uniform step in [1e-3, 1], so distances
    cover several decades. Buckets hold the worst ratio per decade of
    ‖a − b‖. Pairs closer than 1e-12 are skipped.
    """
    if n_pairs < 1:
        raise InsufficientSamples(f"n_pairs must be >= 1, got {n_pairs!r}")
    rng = np.random.default_rng(seed)
    witness: ProbeWitness | None = None
    buckets: dict[int, float] = {}
    skipped = 0

    for pair in range(n_pairs):
        a = random_state(rng, grid, bound)
        target = random_state(rng, grid, bound)
        step = float(10.0 ** rng.uniform(-3.0, 0.0))
        b = a.blend(target, step)
        distance = a.distance(b)
        if distance < MIN_PAIR_DISTANCE:
            skipped += 1
            continue

        image_a = apply_T(spec, a, qcfg).output
        image_b = apply_T(spec, b, qcfg).output
        decade = int(math.floor(math.log10(distance)))
        for i, (u, v) in enumerate(zip(image_a, image_b), start=1):
            ratio = sup_dist(u, v) / distance
            buckets[decade] = max(buckets.get(decade, 0.0), ratio)
            if witness is None or ratio > witness.ratio:
                witness = ProbeWitness(pair, i, step, distance, ratio, a, b)

    if witness is None:
        raise InsufficientSamples(f"all {n_pairs} probe pairs were degenerate")
    probe = ContractionProbe(
        max_ratio=witness.ratio,
        witness=witness,
        buckets=dict(sorted(buckets.items())),
        pairs_used=n_pairs - skipped,
        pairs_skipped=skipped,
    )
    log.info({
        "msg": "contraction_probe", "problem": spec.name,
        "max_ratio": probe.max_ratio, "pairs_used": probe.pairs_used,
    })
    return probe


# ────────────────────────────────────────────────────────────────
# Measures of iterate sets and images
# ────────────────────────────────────────────────────────────────
def _window(states, params: MncParams | None, start: int) -> WindowMnc:
    reports = tuple(mnc_estimate([s[c] for s in states], params) for c in range(3))
    return WindowMnc(
        start=start,
        stop=start + len(states),
        components=reports,
        mu_max=product_mnc(reports, "max"),
        mu_sum=product_mnc(reports, "sum"),
    )


def iterate_set_diagnostic(report: SolveReport, window: int, params: MncParams | None = None) -> list[WindowMnc]:
    """μ̂ of every run of ``window`` consecutive retained iterates, in order."""
    if report.trace is None:
        raise UsageError("iterate diagnostics need a retained trace (retain_trace)")
    if window < 1:
        raise UsageError(f"window must be >= 1, got {window!r}")
    if len(report.trace) < window:
        raise UsageError(f"trace holds {len(report.trace)} states, window needs {window}")
    return [
        _window(report.trace[n:n + window], params, n)
        for n in range(len(report.trace) - window + 1)
    ]


@dataclass(frozen=True)
class CondensingTrial:
    mu_in: float
    mu_out: tuple[float, float, float]
    ratio: float | None


@dataclass(frozen=True)
class CondensingProbe:
    trials: tuple[CondensingTrial, ...]
    max_ratio: float | None
    worst_trial: int | None


def condensing_probe(
    spec: ProblemSpec,
    grid: Grid,
    n_trials: int,
    family_size: int,
    seed: int,
    qcfg: QuadConfig | None = None,
    params: MncParams | None = None,
    *,
    bound: float = 1.0,
) -> CondensingProbe:
    """
    Compare μ̂(T_i(X1 × X2 × X3)) with max_j μ̂(X_j) on random finite families.

    The image family of T_i is taken over the full product of the three
    families, ``family_size``³ states per trial. Trials whose input measure
    vanishes carry no ratio.
    """
    if n_trials < 1 or family_size < 1:
        raise InsufficientSamples("condensing probe needs n_trials >= 1 and family_size >= 1")
    rng = np.random.default_rng(seed)
    trials: list[CondensingTrial] = []

    for _ in range(n_trials):
        families = [[random_function(rng, grid, bound) for _ in range(family_size)] for _ in range(3)]
        mu_in = max(mnc_estimate(f, params).mu_est for f in families)
        images = [apply_T(spec, TripleState(*members), qcfg).output for members in itertools.product(*families)]
        mu_out = tuple(mnc_estimate([img[c] for img in images], params).mu_est for c in range(3))
        ratio = max(mu_out) / mu_in if mu_in > 0 else None
        trials.append(CondensingTrial(mu_in, mu_out, ratio))

    ratios = [(t.ratio, n) for n, t in enumerate(trials) if t.ratio is not None]
    max_ratio, worst = max(ratios) if ratios else (None, None)
    log.info({"msg": "condensing_probe", "problem": spec.name, "max_ratio": max_ratio})
    return CondensingProbe(tuple(trials), max_ratio, worst)
