"""
Experiment-Konfiguration

Ein Experiment wird durch ein JSON-Dokument beschrieben und mit Django REST
Framework Serializern validiert. Validierungsfehler werden auf gepunktete
Feldpfade (z.B. ``dataset.train_images``) abgebildet und als
ConfigValidationError geworfen.

Schema:
    seed            int, Pflicht
    output_dir      Ausgabeverzeichnis (Standard: GRAVITY_OUTPUT_DIR/<config-name>)
    dataset         {kind: "idx", train_images, train_labels, eval_images,
                     eval_labels, train_size, eval_size}
                    oder {kind: "blobs", means, std, samples_per_class,
                     eval_fraction, bounds}
    model           {name: "lenet_lite" | "mlp", hidden_dims}
    substitute      wie model; Substitut für Black-Box-Angriffe
    baseline        {epochs, batch_size, learning_rate, adversarial}
    gravity         {G_head, G_tail, iterations, epochs_per_iteration,
                     batch_size, learning_rate, adversarial, mass_mode,
                     warm_start}
    selection       {threshold, icc_mode, normalization, attack}
    attacks         [{family, epsilon, step_size, steps, decay, random_start}]

Author: DSP Development Team
Version: 1.0.0
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from django.conf import settings
from rest_framework import serializers

from ...exceptions import ConfigValidationError
from ..attacks.white_box import FAMILIES, AttackSpec
from ..data.blobs import BlobSpec
from ..geometry.forces import MASS_MODES
from ..metrics.icc_icd import ICC_MODES
from ..metrics.selection import NORMALIZATIONS
from ..training.gravity import GravityConfig
from ..training.trainer import AUGMENT_FAMILIES, TrainingConfig

logger = logging.getLogger(__name__)

MODEL_NAMES = ('lenet_lite', 'mlp')
DATASET_KINDS = ('idx', 'blobs')
DEFAULT_SELECTION_ATTACK = {'family': 'pgd', 'epsilon': 0.1}
DEFAULT_SUBSTITUTE = {'name': 'mlp', 'hidden_dims': [128, 32]}
OPTIONAL_BLOCKS = ('baseline', 'gravity', 'selection')


class AttackSpecSerializer(serializers.Serializer):
    """Serializer für eine AttackSpec"""
    family = serializers.ChoiceField(choices=list(FAMILIES))
    epsilon = serializers.FloatField(min_value=0.0)
    step_size = serializers.FloatField(required=False, allow_null=True, default=None)
    steps = serializers.IntegerField(required=False, min_value=1, default=10)
    decay = serializers.FloatField(required=False, min_value=0.0, default=1.0)
    random_start = serializers.BooleanField(required=False, default=True)

    def validate_step_size(self, value):
        if value is not None and value <= 0:
            raise serializers.ValidationError("step_size muss > 0 sein.")
        return value


class DatasetSerializer(serializers.Serializer):
    """
    Serializer für den Dataset-Block; die Pflichtfelder hängen von `kind` ab.
    """
    kind = serializers.ChoiceField(choices=list(DATASET_KINDS))
    train_images = serializers.CharField(required=False)
    train_labels = serializers.CharField(required=False)
    eval_images = serializers.CharField(required=False)
    eval_labels = serializers.CharField(required=False)
    train_size = serializers.IntegerField(required=False, min_value=1, allow_null=True, default=5000)
    eval_size = serializers.IntegerField(required=False, min_value=1, allow_null=True, default=1000)
    means = serializers.ListField(
        child=serializers.ListField(child=serializers.FloatField(), min_length=1),
        required=False, min_length=2,
    )
    std = serializers.FloatField(required=False, default=0.1)
    samples_per_class = serializers.IntegerField(required=False, min_value=2, default=500)
    eval_fraction = serializers.FloatField(required=False, default=0.2)
    bounds = serializers.ListField(child=serializers.FloatField(), required=False,
                                   min_length=2, max_length=2, default=[0.0, 1.0])

    IDX_FIELDS = ('train_images', 'train_labels', 'eval_images', 'eval_labels')

    def validate(self, attrs):
        errors = {}
        if attrs['kind'] == 'idx':
            for name in self.IDX_FIELDS:
                if not attrs.get(name):
                    errors[name] = ["Pflichtfeld für kind='idx'."]
                elif not Path(attrs[name]).exists():
                    errors[name] = [f"Datei existiert nicht: {attrs[name]}"]
        else:
            means = attrs.get('means')
            if not means:
                errors['means'] = ["Pflichtfeld für kind='blobs'."]
            elif len({len(m) for m in means}) != 1:
                errors['means'] = ["Alle Mittelwert-Vektoren müssen dieselbe Dimension haben."]
            elif len({tuple(m) for m in means}) != len(means):
                errors['means'] = ["Die Mittelwert-Vektoren müssen verschieden sein."]
            if attrs.get('std', 0.1) <= 0:
                errors['std'] = ["std muss > 0 sein."]
            if not 0.0 < attrs.get('eval_fraction', 0.2) < 1.0:
                errors['eval_fraction'] = ["eval_fraction muss in (0, 1) liegen."]
            bounds = attrs.get('bounds', [0.0, 1.0])
            if bounds[1] <= bounds[0]:
                errors['bounds'] = ["bounds muss [lo, hi] mit hi > lo sein."]
        if errors:
            raise serializers.ValidationError(errors)
        return attrs


class ModelSerializer(serializers.Serializer):
    name = serializers.ChoiceField(choices=list(MODEL_NAMES))
    hidden_dims = serializers.ListField(child=serializers.IntegerField(min_value=1), required=False,
                                        default=[64, 16])

    def validate(self, attrs):
        if attrs['name'] == 'mlp' and not attrs.get('hidden_dims'):
            raise serializers.ValidationError({'hidden_dims': ["Ein MLP braucht mindestens einen Hidden-Layer."]})
        return attrs


class AdversarialFieldMixin:
    """Gemeinsame Prüfung für Adversarial-Training-Blöcke"""

    def validate_adversarial(self, value):
        if value is not None and value['family'] not in AUGMENT_FAMILIES:
            raise serializers.ValidationError(
                f"Adversarial Training unterstützt nur {list(AUGMENT_FAMILIES)}."
            )
        return value


class BaselineSerializer(AdversarialFieldMixin, serializers.Serializer):
    epochs = serializers.IntegerField(min_value=1, default=5)
    batch_size = serializers.IntegerField(min_value=1, default=64)
    learning_rate = serializers.FloatField(min_value=0.0, default=1e-4)
    adversarial = AttackSpecSerializer(required=False, allow_null=True, default=None)


class GravitySerializer(AdversarialFieldMixin, serializers.Serializer):
    G_head = serializers.FloatField(default=100.0)
    G_tail = serializers.FloatField(default=200.0)
    iterations = serializers.IntegerField(min_value=1, default=50)
    epochs_per_iteration = serializers.IntegerField(min_value=1, default=2)
    batch_size = serializers.IntegerField(min_value=1, default=64)
    learning_rate = serializers.FloatField(min_value=0.0, default=1e-4)
    adversarial = AttackSpecSerializer(required=False, allow_null=True, default=None)
    mass_mode = serializers.ChoiceField(choices=list(MASS_MODES), default='norm')
    warm_start = serializers.BooleanField(default=True)

    def validate_G_head(self, value):
        if value <= 0:
            raise serializers.ValidationError("G_head muss > 0 sein.")
        return value

    def validate_G_tail(self, value):
        if value <= 0:
            raise serializers.ValidationError("G_tail muss > 0 sein.")
        return value


class SelectionSerializer(serializers.Serializer):
    threshold = serializers.FloatField(default=0.9965)
    icc_mode = serializers.ChoiceField(choices=list(ICC_MODES), default='mean_distance')
    normalization = serializers.ChoiceField(choices=list(NORMALIZATIONS), default='min_icd')
    attack = AttackSpecSerializer(required=False, default=DEFAULT_SELECTION_ATTACK)

    def validate_threshold(self, value):
        if not 0.0 < value < 1.0:
            raise serializers.ValidationError("threshold muss in (0, 1) liegen.")
        return value


class ExperimentConfigSerializer(serializers.Serializer):
    """
    Serializer für das komplette Experiment-Dokument
    """
    seed = serializers.IntegerField(min_value=0)
    output_dir = serializers.CharField(required=False, allow_null=True, default=None)
    dataset = DatasetSerializer()
    model = ModelSerializer()
    substitute = ModelSerializer()
    baseline = BaselineSerializer()
    gravity = GravitySerializer()
    selection = SelectionSerializer()
    attacks = AttackSpecSerializer(many=True, allow_empty=True)

    def validate(self, attrs):
        if attrs['model']['name'] == 'lenet_lite' and attrs['dataset']['kind'] != 'idx':
            raise serializers.ValidationError({'model': {'name': ["lenet_lite erwartet MNIST-Bilder (kind='idx')."]}})
        return attrs


def flatten_errors(errors: Any, prefix: str = '') -> Dict[str, List[str]]:
    """Bildet verschachtelte Serializer-Fehler auf gepunktete Pfade ab."""
    flat: Dict[str, List[str]] = {}
    if isinstance(errors, dict):
        for key, value in errors.items():
            name = prefix if key == 'non_field_errors' else (f"{prefix}.{key}" if prefix else str(key))
            for path, messages in flatten_errors(value, name).items():
                flat.setdefault(path, []).extend(messages)
    elif isinstance(errors, list) and errors and all(isinstance(e, (dict, list)) for e in errors):
        for index, value in enumerate(errors):
            if value:
                flat.update(flatten_errors(value, f"{prefix}.{index}" if prefix else str(index)))
    else:
        items = errors if isinstance(errors, list) else [errors]
        flat[prefix or 'config'] = [str(item) for item in items]
    return flat


def _attack_spec(data: Optional[Dict], seed: int) -> Optional[AttackSpec]:
    if data is None:
        return None
    return AttackSpec(
        family=data['family'],
        epsilon=float(data['epsilon']),
        step_size=data.get('step_size'),
        steps=int(data.get('steps', 10)),
        decay=float(data.get('decay', 1.0)),
        random_start=bool(data.get('random_start', True)),
        seed=seed,
    ).validate()


@dataclass
class SelectionConfig:
    threshold: float
    icc_mode: str
    normalization: str
    attack: AttackSpec


@dataclass
class ExperimentConfig:
    """
    Validierte Experiment-Konfiguration.

    `data` enthält das validierte Dokument (inklusive Defaults), aus dem der
    Konfigurations-Hash berechnet wird.
    """
    seed: int
    output_dir: Path
    dataset: Dict[str, Any]
    model: Dict[str, Any]
    substitute: Dict[str, Any]
    baseline: TrainingConfig
    gravity: GravityConfig
    selection: SelectionConfig
    attacks: List[AttackSpec]
    data: Dict[str, Any] = field(default_factory=dict)

    @property
    def config_hash(self) -> str:
        return config_hash(self.data)

    def blob_spec(self) -> BlobSpec:
        block = self.dataset
        return BlobSpec(
            means=block['means'],
            std=block.get('std', 0.1),
            samples_per_class=block.get('samples_per_class', 500),
            seed=self.seed,
            eval_fraction=block.get('eval_fraction', 0.2),
            bounds=tuple(block.get('bounds', [0.0, 1.0])),
        )


def config_hash(data: Dict[str, Any]) -> str:
    """sha256 über das kanonische JSON (ohne output_dir)."""
    canonical = {k: v for k, v in data.items() if k != 'output_dir'}
    payload = json.dumps(canonical, sort_keys=True, separators=(',', ':'), default=str)
    return hashlib.sha256(payload.encode('utf-8')).hexdigest()


def _plain(value):
    return json.loads(json.dumps(value, default=str))


def parse_config(raw: Dict[str, Any], output_dir: Optional[Union[str, Path]] = None,
                 name: str = 'experiment') -> ExperimentConfig:
    """
    Validiert ein Konfigurations-Dokument.

    Raises:
        ConfigValidationError: mit gepunkteten Feldpfaden
    """
    raw = dict(raw)
    # fehlende Blöcke explizit anlegen, damit die Defaults der Unter-Serializer greifen
    for block in OPTIONAL_BLOCKS:
        if raw.get(block) is None:
            raw[block] = {}
    if raw.get('substitute') is None:
        raw['substitute'] = dict(DEFAULT_SUBSTITUTE)
    if raw.get('attacks') is None:
        raw['attacks'] = []
    serializer = ExperimentConfigSerializer(data=raw)
    if not serializer.is_valid():
        field_errors = flatten_errors(serializer.errors)
        logger.warning(f"Ungültige Konfiguration: {field_errors}")
        raise ConfigValidationError(field_errors)
    data = _plain(serializer.validated_data)
    seed = data['seed']

    try:
        gravity_block = data['gravity']
        selection_block = data['selection']
        gravity = GravityConfig(
            G_head=gravity_block['G_head'],
            G_tail=gravity_block['G_tail'],
            iterations=gravity_block['iterations'],
            epochs_per_iteration=gravity_block['epochs_per_iteration'],
            batch_size=gravity_block['batch_size'],
            learning_rate=gravity_block['learning_rate'],
            threshold=selection_block['threshold'],
            seed=seed,
            adversarial=_attack_spec(gravity_block.get('adversarial'), seed),
            mass_mode=gravity_block['mass_mode'],
            icc_mode=selection_block['icc_mode'],
            warm_start=gravity_block['warm_start'],
        ).validate()
        baseline_block = data['baseline']
        baseline = TrainingConfig(
            epochs=baseline_block['epochs'],
            batch_size=baseline_block['batch_size'],
            learning_rate=baseline_block['learning_rate'],
            seed=seed,
            adversarial=_attack_spec(baseline_block.get('adversarial'), seed),
        )
        selection = SelectionConfig(
            threshold=selection_block['threshold'],
            icc_mode=selection_block['icc_mode'],
            normalization=selection_block['normalization'],
            attack=_attack_spec(selection_block['attack'], seed),
        )
        attacks = [_attack_spec(block, seed) for block in data['attacks']]
    except ConfigValidationError:
        raise
    except Exception as e:
        raise ConfigValidationError({'config': [str(e)]}) from e

    resolved_dir = output_dir or data.get('output_dir') or Path(getattr(settings, 'GRAVITY_OUTPUT_DIR', 'runs')) / name
    return ExperimentConfig(
        seed=seed,
        output_dir=Path(resolved_dir),
        dataset=data['dataset'],
        model=data['model'],
        substitute=data['substitute'],
        baseline=baseline,
        gravity=gravity,
        selection=selection,
        attacks=attacks,
        data=data,
    )


def load_config(path: Union[str, Path], output_dir: Optional[Union[str, Path]] = None) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigValidationError({'config': [f"Konfigurationsdatei nicht gefunden: {path}"]})
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigValidationError({'config': [f"Kein gültiges JSON: {e}"]}) from e
    if not isinstance(raw, dict):
        raise ConfigValidationError({'config': ["Das Dokument muss ein JSON-Objekt sein."]})
    return parse_config(raw, output_dir=output_dir, name=path.stem)
