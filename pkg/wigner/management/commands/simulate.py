from django.core.management.base import BaseCommand

from wigner.lab.scenarios import load_config, run_config

from ._common import add_config_arguments, exit_codes, output_dir, parse_overrides


class Command(BaseCommand):
    help = "Run one scenario and write WIG1 snapshots, diagnostics.csv and manifest.json."

    def add_arguments(self, parser):
        add_config_arguments(parser)

    def handle(self, *args, **options):
        with exit_codes():
            config = load_config(options["config"], parse_overrides(options["overrides"]))
            out = output_dir(options, config, config.scenario)
            trajectory = run_config(config, output_dir=out)

        final = trajectory.records[-1]
        self.stdout.write(
            f"{len(trajectory.snapshots)} snapshots, t={final.time:.6g}, "
            f"negativity_volume={final.negativity_volume:.6g}, min_value={final.min_value:.6g}"
        )
        if trajectory.boundary_flagged:
            self.stderr.write(self.style.WARNING("field stopped decaying at the grid boundary"))
        self.stdout.write(self.style.SUCCESS(f"wrote {out}"))
