"""
agrav Management Command

Einstiegspunkt für die Experiment-Pipeline:

    python manage.py agrav train    --config configs/blobs.json [--role substitute]
    python manage.py agrav gravity  --config configs/blobs.json
    python manage.py agrav select   --config configs/blobs.json
    python manage.py agrav attack   --config configs/blobs.json [--checkpoint gravity/checkpoints/iter_003.agrv]
    python manage.py agrav blackbox --config configs/blobs.json [--substitute ...] [--target ...]

Exit-Codes: 0 Erfolg, 1 ungültige Konfiguration, 2 Laufzeitfehler.

Author: DSP Development Team
Version: 1.0.0
"""

import json
import logging

from django.core.management.base import BaseCommand, CommandError

from gravity.exceptions import ConfigValidationError, GravityException
from gravity.services.experiments import (
    ROLES,
    cmd_attack,
    cmd_blackbox,
    cmd_gravity,
    cmd_select,
    cmd_train_baseline,
    load_config,
)

logger = logging.getLogger(__name__)

SUBCOMMANDS = ('train', 'gravity', 'select', 'attack', 'blackbox')


class Command(BaseCommand):
    """
    Django Management Command für die Adaptive-Gravity-Pipeline.

    Jede Stufe liest die Artefakte der vorherigen aus dem Ausgabeverzeichnis;
    fehlt ein Artefakt, endet das Kommando mit Exit-Code 2.
    """

    help = 'Adaptive-Gravity-Pipeline: train | gravity | select | attack | blackbox'

    def add_arguments(self, parser):
        parser.add_argument('subcommand', choices=SUBCOMMANDS)
        parser.add_argument('--config', required=True, help='Pfad zur JSON-Konfiguration')
        parser.add_argument('--out', default=None, help='Ausgabeverzeichnis (überschreibt output_dir)')
        parser.add_argument('--role', choices=ROLES, default='target', help='train: Zielmodell oder Substitut')
        parser.add_argument('--checkpoint', default=None, help='attack: zu evaluierender Checkpoint')
        parser.add_argument('--substitute', default=None, help='blackbox: Checkpoint des Substituts')
        parser.add_argument('--target', default=None, help='blackbox: Checkpoint des Zielmodells')

    def handle(self, *args, **options):
        subcommand = options['subcommand']
        try:
            config = load_config(options['config'], output_dir=options['out'])
            self.stdout.write(f"agrav {subcommand}: Ausgabe nach {config.output_dir}")

            if subcommand == 'train':
                result = cmd_train_baseline(config, role=options['role'])
            elif subcommand == 'gravity':
                result = cmd_gravity(config)
            elif subcommand == 'select':
                result = cmd_select(config)
            elif subcommand == 'attack':
                result = cmd_attack(config, checkpoint=options['checkpoint'])
            else:
                result = cmd_blackbox(config, substitute_ckpt=options['substitute'], target_ckpt=options['target'])

        except ConfigValidationError as e:
            logger.error(f"Ungültige Konfiguration: {e.field_errors}")
            raise CommandError(e.message, returncode=1)
        except GravityException as e:
            logger.error(f"agrav {subcommand} fehlgeschlagen [{e.error_code}]: {e.message}", exc_info=True)
            raise CommandError(f"{e.error_code}: {e.message}", returncode=2)

        for output in result.outputs:
            self.stdout.write(f'  - {output}')
        self.stdout.write(json.dumps(result.summary, indent=2, sort_keys=True, default=str))
        self.stdout.write(self.style.SUCCESS(f'agrav {subcommand} erfolgreich abgeschlossen.'))
