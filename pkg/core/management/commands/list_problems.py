import json

from django.core.management.base import BaseCommand

from core.exports import problem_payload
from core.problems import REGISTRY


class Command(BaseCommand):
    help = "List registered problems with their default parameters."

    requires_system_checks = []

    def add_arguments(self, parser):
        parser.add_argument("--json", action="store_true", help="print the registry as JSON")

    def handle(self, *args, **options):
        payloads = [problem_payload(REGISTRY[name]) for name in sorted(REGISTRY)]
        if options["json"]:
            text = json.dumps([p.model_dump(mode="json") for p in payloads], indent=2, sort_keys=True)
            self.stdout.write(text)
            return
        for p in payloads:
            params = ", ".join(f"{k}={v:g}" for k, v in sorted(p.parameters.items())) or "no parameters"
            self.stdout.write(f"{p.name} ({params})")
            self.stdout.write(f"    {p.description}")
