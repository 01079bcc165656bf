from django.apps import AppConfig


class WignerConfig(AppConfig):
    name = 'wigner'
    verbose_name = 'Wigner phase-space laboratory'
