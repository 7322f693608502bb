import logging
import time

from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from core.config import load_run_config
from core.exceptions import ConfigError, SolverError
from core.schemas import RunConfig

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCONCLUSIVE = 2


class RunCommand(BaseCommand):
    """Base for commands driven by a RunConfig.

    - Shared config flags (``--config`` plus key overrides)
    - Exit codes: 0 success, 1 error or violation, 2 inconclusive
    - Logs success/failure events with duration
    """

    requires_system_checks = []

    def add_arguments(self, parser):
        parser.add_argument("--config", help="JSON run config; every key is optional")
        parser.add_argument("--problem", help="registered problem name (problem.name)")
        parser.add_argument("--tol", type=float, help="residual tolerance (solve.tol)")
        parser.add_argument("--max-iter", type=int, help="iteration cap (solve.max_iter)")
        parser.add_argument("--t-max", type=float, help="horizon (grid.t_max)")
        parser.add_argument("--n-nodes", type=int, help="grid node count (grid.n_nodes)")
        parser.add_argument("--seed", type=int, help="seed for every sampled check")
        parser.add_argument("--output-dir", help="directory for CSV/JSON artifacts")
        parser.add_argument(
            "--retain-trace", action="store_true", default=None,
            help="keep every iterate for window diagnostics",
        )

    def run(self, config: RunConfig) -> int:
        raise NotImplementedError

    def on_success(self, code: int, config: RunConfig, duration_ms: int) -> None:
        """Log completion of a command."""
        log.info(
            {
                "msg": "command_success",
                "command": self.command_name,
                "problem": config.problem.name,
                "exit_code": code,
                "duration_ms": duration_ms,
            }
        )

    def on_failure(self, exc: Exception, duration_ms: int) -> None:
        """Log failure details when a command raises."""
        log.error(
            {
                "msg": "command_failure",
                "command": self.command_name,
                "error": str(exc),
                "error_type": type(exc).__name__,
                "duration_ms": duration_ms,
            }
        )

    @property
    def command_name(self) -> str:
        return self.__module__.rsplit(".", 1)[-1]

    def handle(self, *args, **options):
        started = time.monotonic()
        overrides = {
            "problem": options.get("problem"),
            "tol": options.get("tol"),
            "max_iter": options.get("max_iter"),
            "t_max": options.get("t_max"),
            "n_nodes": options.get("n_nodes"),
            "seed": options.get("seed"),
            "output_dir": options.get("output_dir"),
            "retain_trace": options.get("retain_trace"),
        }
        try:
            config = load_run_config(options.get("config"), overrides)
            code = self.run(config)
        except ValidationError as exc:
            self.on_failure(exc, self._elapsed(started))
            raise CommandError("; ".join(exc.messages), returncode=EXIT_ERROR)
        except ConfigError as exc:
            self.on_failure(exc, self._elapsed(started))
            raise CommandError(f"invalid config:\n{exc}", returncode=EXIT_ERROR)
        except (SolverError, OSError) as exc:
            self.on_failure(exc, self._elapsed(started))
            raise CommandError(str(exc), returncode=EXIT_ERROR)

        self.on_success(code, config, self._elapsed(started))
        if code == EXIT_INCONCLUSIVE:
            raise CommandError("inconclusive: iteration cap reached without convergence", returncode=code)
        if code != EXIT_OK:
            raise CommandError(f"{self.command_name} failed", returncode=code)

    @staticmethod
    def _elapsed(started: float) -> int:
        return int((time.monotonic() - started) * 1000)
