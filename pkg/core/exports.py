import json
import math
from pathlib import Path

import numpy as np
from ninja import Schema

from core.funcspace import CSV_FORMAT, Grid
from core.hypotheses import HypothesisReport
from core.mnc import AxiomSuite, MncReport
from core.problems import ProblemSpec, RegistryEntry
from core.schemas import (
    AxiomFailureOut,
    AxiomSuiteOut,
    CondensingOut,
    CondensingTrialOut,
    ConditionOut,
    ConstantsOut,
    DecayCurveOut,
    DiagnoseOut,
    HypothesisReportOut,
    ModulusEntryOut,
    MncReportOut,
    ProblemOut,
    SolveConfig,
    SolveReportOut,
    WindowMncOut,
)
from core.solver import CondensingProbe, SolveReport, WindowMnc


# -------------------------------------------------------------------
# FILES
# -------------------------------------------------------------------
def output_dir(path: str | Path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_json(path: str | Path, payload: Schema) -> None:
    """Sorted, indented JSON with a trailing newline; floats in shortest round-trip form."""
    text = json.dumps(payload.model_dump(mode="json"), indent=2, sort_keys=True, allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def _finite(value: float | None) -> float | None:
    if value is None or not math.isfinite(value):
        return None
    return float(value)


# -------------------------------------------------------------------
# PAYLOADS
# -------------------------------------------------------------------
def mnc_payload(report: MncReport) -> MncReportOut:
    return MncReportOut(
        omega0_est=report.omega0_est,
        tail_diam_est=report.tail_diam_est,
        mu_est=report.mu_est,
        modulus_table=[ModulusEntryOut(k=e.k, eps=e.eps, value=e.value) for e in report.modulus_table],
    )


def window_payload(window: WindowMnc) -> WindowMncOut:
    return WindowMncOut(
        start=window.start,
        stop=window.stop,
        components=[mnc_payload(r) for r in window.components],
        mu_max=window.mu_max,
        mu_sum=window.mu_sum,
    )


def solve_payload(spec: ProblemSpec, grid: Grid, cfg: SolveConfig, report: SolveReport) -> SolveReportOut:
    return SolveReportOut(
        problem=spec.name,
        parameters=dict(spec.parameters),
        t_max=grid.t_max,
        n_nodes=grid.n_nodes,
        tol=cfg.tol,
        damping=cfg.damping,
        status=report.status,
        converged=report.converged,
        iterations=report.iterations,
        final_residual=report.final_residual,
        residuals=list(report.residuals),
        extension_hits=report.extension_hits,
        mnc_trace=None if report.mnc_trace is None else [window_payload(w) for w in report.mnc_trace],
    )


def hypotheses_payload(report: HypothesisReport) -> HypothesisReportOut:
    c = report.constants
    return HypothesisReportOut(
        problem=report.problem,
        passed=report.passed,
        conditions=[
            ConditionOut(
                condition=r.condition,
                component=r.component,
                status=r.status,
                witness=None if r.witness is None else [_finite(w) for w in r.witness],
                measured=_finite(r.measured),
                note=r.note,
            )
            for r in report.conditions
        ],
        constants=ConstantsOut(
            G=c.G,
            M=list(c.M),
            D_estimate=[_finite(d) for d in c.D_estimate],
            D_upper=[_finite(d) for d in c.D_upper],
            delta=list(c.delta),
            alpha=list(c.alpha),
            r0=c.r0,
        ),
        decay=[
            DecayCurveOut(component=d.component, t=list(d.t), values=list(d.values), status=d.status)
            for d in report.decay
        ],
    )


def axiom_payload(suite: AxiomSuite) -> AxiomSuiteOut:
    return AxiomSuiteOut(
        trials=suite.trials,
        monotonicity_passed=suite.monotonicity_passed,
        convexity_passed=suite.convexity_passed,
        passed=suite.passed,
        failures=[
            AxiomFailureOut(trial=f.trial, check=f.check, lam=f.lam, lhs=f.lhs, rhs=f.rhs)
            for f in suite.failures
        ],
    )


def condensing_payload(probe: CondensingProbe) -> CondensingOut:
    return CondensingOut(
        trials=[
            CondensingTrialOut(mu_in=t.mu_in, mu_out=list(t.mu_out), ratio=t.ratio)
            for t in probe.trials
        ],
        max_ratio=probe.max_ratio,
        worst_trial=probe.worst_trial,
    )


def problem_payload(entry: RegistryEntry) -> ProblemOut:
    return ProblemOut(name=entry.name, description=entry.description, parameters=dict(entry.defaults))


def window_diam_csv(window: WindowMnc, path: str | Path) -> None:
    """Pointwise max over components of the window's diameter curves."""
    curves = [r.diam for r in window.components]
    grid = curves[0].grid
    combined = np.max(np.vstack([c.values for c in curves]), axis=0)
    np.savetxt(path, np.column_stack([grid.nodes, combined]), fmt=CSV_FORMAT, delimiter=",", header="t,diam", comments="")


def diagnose_payload(
    spec: ProblemSpec,
    window: int,
    report: SolveReport,
    windows: list[WindowMnc],
    suite: AxiomSuite,
    condensing: CondensingProbe | None,
) -> DiagnoseOut:
    return DiagnoseOut(
        problem=spec.name,
        window=window,
        solve_status=report.status,
        iterations=report.iterations,
        windows=[window_payload(w) for w in windows],
        final_window=window_payload(windows[-1]) if windows else None,
        axioms=axiom_payload(suite),
        condensing=None if condensing is None else condensing_payload(condensing),
    )
