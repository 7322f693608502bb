import dataclasses

from core.exceptions import UsageError
from core.exports import diagnose_payload, output_dir, window_diam_csv, write_json
from core.management.base import EXIT_ERROR, EXIT_OK, RunCommand
from core.mnc import axiom_suite, random_family
from core.problems import get_problem
from core.schemas import RunConfig
from core.solver import condensing_probe, iterate_set_diagnostic, picard_solve


class Command(RunCommand):
    help = (
        "Solve with a retained trace, estimate the measure of noncompactness over "
        "iterate windows and run the axiom suite; writes mnc.json and diam.csv."
    )

    def run(self, config: RunConfig) -> int:
        if not config.retain_trace:
            raise UsageError("diagnose needs retain_trace (pass --retain-trace or set it in the config)")

        spec = get_problem(config.problem)
        grid = config.grid.build()
        dcfg = config.diagnose
        report = picard_solve(spec, grid, config.solve, config.quad, retain_trace=True)

        window = min(dcfg.window, len(report.trace))
        windows = iterate_set_diagnostic(report, window, config.mnc)
        report = dataclasses.replace(report, mnc_trace=tuple(windows))

        suite = axiom_suite(
            random_family(grid, dcfg.family_size, config.verify.state_bound),
            dcfg.axiom_trials,
            config.seed,
            config.mnc,
        )
        condensing = None
        if dcfg.condensing_trials > 0:
            condensing = condensing_probe(
                spec, grid, dcfg.condensing_trials, dcfg.condensing_family, config.seed,
                config.quad, config.mnc, bound=config.verify.state_bound,
            )

        out = output_dir(config.output_dir)
        write_json(out / "mnc.json", diagnose_payload(spec, window, report, windows, suite, condensing))
        window_diam_csv(windows[-1], out / "diam.csv")

        final = windows[-1]
        self.stdout.write(
            f"{spec.name}: {report.status} after {report.iterations} iteration(s); "
            f"final window mu_max={final.mu_max:.3e} mu_sum={final.mu_sum:.3e}"
        )
        self.stdout.write(
            f"axioms: monotonicity {suite.monotonicity_passed}/{suite.trials}, "
            f"convexity {suite.convexity_passed}/{suite.trials}"
        )
        if condensing is not None and condensing.max_ratio is not None:
            self.stdout.write(f"condensing ratio (max over trials): {condensing.max_ratio:.3e}")
        return EXIT_OK if suite.passed else EXIT_ERROR
