from django.core.management.base import BaseCommand

from wigner.lab.scenarios import load_config
from wigner.lab.sweeps import SWEEP_PARAMETERS, parse_values, run_sweep

from ._common import add_config_arguments, exit_codes, output_dir, parse_overrides


class Command(BaseCommand):
    help = "Repeat a run over values of hbar, D or m; writes summary.csv and fitted log-log exponents."

    def add_arguments(self, parser):
        add_config_arguments(parser)
        parser.add_argument("--param", required=True, choices=sorted(SWEEP_PARAMETERS))
        parser.add_argument("--values", required=True, help="comma-separated list, e.g. 1,0.5,0.25")

    def handle(self, *args, **options):
        with exit_codes():
            values = parse_values(options["values"])
            config = load_config(options["config"], parse_overrides(options["overrides"]))
            out = output_dir(options, config, f"sweep-{options['param']}")
            summary, exponents = run_sweep(config, options["param"], values, out)

        for row in summary.itertuples(index=False):
            line = f"{options['param']}={row.value:g} status={row.status} t_D={row.t_D:.6g} " \
                   f"max_flux_deviation={row.max_flux_deviation:.6g}"
            self.stdout.write(line)
        for name, exponent in exponents.items():
            if name != "parameter" and exponent is not None:
                self.stdout.write(f"exponent[{name}]={exponent:.4f}")
        failed = int((summary["status"] != "ok").sum())
        if failed:
            self.stderr.write(self.style.WARNING(f"{failed} of {len(summary)} points failed; see summary.csv"))
        self.stdout.write(self.style.SUCCESS(f"wrote {out}"))
