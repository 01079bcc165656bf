from django.conf import settings
from django.core.exceptions import ImproperlyConfigured
from pydantic import BaseModel, PositiveFloat, PositiveInt


class Tolerances(BaseModel):
    NORM_TOLERANCE: PositiveFloat = 1e-8
    HERMITIAN_TOLERANCE: PositiveFloat = 1e-10
    IMAG_RESIDUE: PositiveFloat = 1e-12
    BOUNDARY_DECAY: PositiveFloat = 1e-10
    POSITIVITY_FACTOR: PositiveFloat = 1e-6
    POSITIVITY_SUSTAIN: PositiveInt = 10
    SUPPORT_MASS: PositiveFloat = 0.99
    SUPPORT_SLACK: PositiveFloat = 0.9
    PURITY_TOLERANCE: PositiveFloat = 2e-3
    MAX_POLY_DEGREE: PositiveInt = 8
    MAX_STAR_ORDER: PositiveInt = 6
    STABILITY_SAFETY: PositiveFloat = 0.2
    NORM_ABORT: PositiveFloat = 1e-4
    CLIP_MASS_LIMIT: PositiveFloat = 1e-8
    ADDITIVITY_TOLERANCE: PositiveFloat = 1e-10

    def positivity_threshold(self, hbar):
        """min W must exceed minus this value to count as positive."""
        return self.POSITIVITY_FACTOR * 2.0 / hbar


def get_tolerances():
    # worker processes see DJANGO_SETTINGS_MODULE but have not touched settings yet
    try:
        overrides = getattr(settings, "PHASELAB", {})
    except ImproperlyConfigured:
        overrides = {}
    return Tolerances(**overrides)
