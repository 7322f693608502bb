import dataclasses
import logging

from core.exports import output_dir, solve_payload, write_json
from core.management.base import EXIT_INCONCLUSIVE, EXIT_OK, RunCommand
from core.problems import get_problem
from core.schemas import RunConfig
from core.solver import iterate_set_diagnostic, picard_solve

log = logging.getLogger(__name__)


class Command(RunCommand):
    help = "Picard-solve a registered problem; writes solution.csv, operator.csv and report.json."

    def run(self, config: RunConfig) -> int:
        spec = get_problem(config.problem)
        grid = config.grid.build()
        report = picard_solve(spec, grid, config.solve, config.quad, retain_trace=config.retain_trace)

        if config.retain_trace:
            window = min(config.diagnose.window, len(report.trace))
            windows = iterate_set_diagnostic(report, window, config.mnc)
            report = dataclasses.replace(report, mnc_trace=tuple(windows))

        out = output_dir(config.output_dir)
        report.final.to_csv(out / "solution.csv")
        report.final_eval.to_csv(out / "operator.csv")
        write_json(out / "report.json", solve_payload(spec, grid, config.solve, report))

        self.stdout.write(
            f"{spec.name}: {report.status} after {report.iterations} iteration(s), "
            f"residual {report.final_residual:.3e} (tol {config.solve.tol:.1e})"
        )
        if report.extension_hits:
            self.stdout.write(f"warped arguments beyond t_max: {report.extension_hits}")
        return EXIT_OK if report.converged else EXIT_INCONCLUSIVE
