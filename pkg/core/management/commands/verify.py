from core.exports import hypotheses_payload, output_dir, write_json
from core.hypotheses import VIOLATED, verify_problem
from core.management.base import EXIT_ERROR, EXIT_OK, RunCommand
from core.problems import get_problem
from core.schemas import RunConfig


class Command(RunCommand):
    help = "Check the existence hypotheses on samples; writes hypotheses.json and decay_<i>.csv."

    def run(self, config: RunConfig) -> int:
        spec = get_problem(config.problem)
        grid = config.grid.build()
        report = verify_problem(spec, grid, config.verify, config.quad, config.seed)

        out = output_dir(config.output_dir)
        write_json(out / "hypotheses.json", hypotheses_payload(report))
        for curve in report.decay:
            curve.to_csv(out / f"decay_{curve.component}.csv")

        for c in report.conditions:
            if c.status == VIOLATED:
                where = f" [component {c.component}]" if c.component else ""
                self.stdout.write(f"VIOLATED {c.condition}{where} witness={list(c.witness)} {c.note}".rstrip())
        counts = {s: sum(c.status == s for c in report.conditions) for s in ("verified-on-samples", "violated", "advisory")}
        self.stdout.write(
            f"{spec.name}: {counts['verified-on-samples']} verified-on-samples, "
            f"{counts['violated']} violated, {counts['advisory']} advisory"
        )
        return EXIT_OK if report.passed else EXIT_ERROR
