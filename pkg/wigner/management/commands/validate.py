from django.core.management.base import BaseCommand, CommandError

from wigner.lab.diagnostics import parse_partition, validate_measure
from wigner.lab.snapshots import decode_snapshot

from ._common import exit_codes


class Command(BaseCommand):
    help = "Check a WIG1 snapshot against the probability axioms and print the report as key=value lines."

    def add_arguments(self, parser):
        parser.add_argument("snapshot", help="path of a WIG1 file")
        parser.add_argument("--partition", default="4x4", help="box partition, e.g. 4x4")

    def handle(self, *args, **options):
        try:
            with open(options["snapshot"], "rb") as handle:
                data = handle.read()
        except OSError as exc:
            raise CommandError(f"cannot read snapshot: {exc}", returncode=2) from exc
        with exit_codes():
            field = decode_snapshot(data)
            report = validate_measure(field, parse_partition(options["partition"], field.grid))
        # classification is information, not failure: exit 0 either way
        for key, value in report.as_dict().items():
            self.stdout.write(f"{key}={value}")
