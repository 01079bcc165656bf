from django.core.management.base import BaseCommand

from wigner.lab.scenarios import load_config, run_triptych

from ._common import add_config_arguments, exit_codes, output_dir, parse_overrides


class Command(BaseCommand):
    help = "Render quantum, decohered and classical panels of the quartic scenario as PPM heatmaps."

    def add_arguments(self, parser):
        add_config_arguments(parser)

    def handle(self, *args, **options):
        with exit_codes():
            config = load_config(options["config"], parse_overrides(options["overrides"]))
            out = output_dir(options, config, "triptych")
            summary = run_triptych(config, out)

        for name, panel in summary["panels"].items():
            self.stdout.write(
                f"{name}: min_value={panel['min_value']:.6g} negativity_volume={panel['negativity_volume']:.6g}"
            )
        self.stdout.write(self.style.SUCCESS(f"wrote {out}"))
