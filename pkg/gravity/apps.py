"""
Adaptive-Gravity Application Configuration

Django-Konfiguration der gravity-App. Die App besitzt keine Modelle; sie
stellt die Service-Pakete unter ``gravity.services`` und das Management
Command ``agrav`` bereit.

Author: DSP Development Team
Version: 1.0.0
"""

import logging

from django.apps import AppConfig
from django.conf import settings

logger = logging.getLogger(__name__)


class GravityConfig(AppConfig):
    """
    Configuration class for the Adaptive-Gravity Django application.

    Attributes:
        name: Application name for Django registration
        verbose_name: Human-readable application name
    """

    default_auto_field: str = 'django.db.models.BigAutoField'
    name: str = 'gravity'
    verbose_name: str = 'Adaptive Gravity'

    def ready(self) -> None:
        super().ready()
        logger.debug(
            f"gravity bereit (Ausgabe: {getattr(settings, 'GRAVITY_OUTPUT_DIR', 'runs')}, "
            f"NaN-Guard: {getattr(settings, 'GRAVITY_NAN_GUARD', True)})"
        )
