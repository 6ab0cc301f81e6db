"""
Experiment Pipeline Service

Koordiniert die fünf Stufen eines Experiments:
1. train     - Baseline-Modell (bzw. Substitut) trainieren
2. gravity   - Gravity-Iterationen ausführen, Records und Checkpoints schreiben
3. select    - Pareto-Auswahl der robustesten Iteration
4. attack    - White-Box-Robustheit eines Checkpoints messen
5. blackbox  - Transfer-Angriff vom Substitut auf ein Zielmodell

Jede Stufe liest die Artefakte der vorherigen aus dem Ausgabeverzeichnis und
registriert ihre eigenen Ausgaben im Manifest. Alle Artefakte außer dem
Manifest sind bei gleichem Seed byte-identisch.

Author: DSP Development Team
Version: 1.0.0
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from ... import __version__
from ...exceptions import ConfigValidationError
from ..attacks.robustness import evaluate_robustness, transfer_attack_eval, write_reports_csv
from ..data.blobs import make_blobs
from ..data.dataset import Dataset
from ..data.idx import load_mnist
from ..geometry.trajectory import export_trajectories
from ..metrics.records import read_records
from ..metrics.selection import candidate_front, pareto_select
from ..models.networks import Model, build_lenet_lite, build_mlp, spec_path_for
from ..seeding import SeedStreams
from ..training.gravity import RECORDS_FILENAME, run_gravity
from ..training.trainer import ModelTrainer
from .artifacts import ArtifactStore
from .config import ExperimentConfig

logger = logging.getLogger(__name__)

ROLES = ('target', 'substitute')
BASELINE_CHECKPOINT = 'baseline/model.agrv'
SUBSTITUTE_CHECKPOINT = 'substitute/model.agrv'
GRAVITY_DIR = 'gravity'
SELECTION_SUMMARY = 'selection/summary.json'


@dataclass
class CommandResult:
    """Ergebnis eines Pipeline-Kommandos."""
    command: str
    outputs: List[str] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)


def load_dataset(config: ExperimentConfig) -> Dataset:
    block = config.dataset
    if block['kind'] == 'blobs':
        return make_blobs(config.blob_spec())
    return load_mnist(
        block['train_images'], block['train_labels'], block['eval_images'], block['eval_labels'],
        train_size=block.get('train_size'), eval_size=block.get('eval_size'), seed=config.seed,
    )


def build_classifier(block: Dict[str, Any], dataset: Dataset, seed: int, role: str) -> Model:
    rng = SeedStreams(seed).rng('init', role)
    if block['name'] == 'lenet_lite':
        return build_lenet_lite(dataset.input_shape, dataset.num_classes, rng=rng)
    return build_mlp(dataset.input_shape, block['hidden_dims'], dataset.num_classes, rng=rng)


def checkpoint_label(path: Union[str, Path]) -> str:
    """'baseline/model.agrv' -> 'baseline', 'gravity/checkpoints/iter_007.agrv' -> 'iter_007'."""
    path = Path(path)
    return path.parent.name if path.stem == 'model' else path.stem


class ExperimentPipelineService:
    """
    Service für die Ausführung der Experiment-Stufen.

    Usage:
        service = ExperimentPipelineService(load_config('configs/blobs.json'))
        service.train_baseline()
        service.gravity()
        service.select()
    """

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.store = ArtifactStore(config.output_dir, config.config_hash, __version__)
        self.logger = logger
        self._dataset: Optional[Dataset] = None

    @property
    def dataset(self) -> Dataset:
        if self._dataset is None:
            self._dataset = load_dataset(self.config)
        return self._dataset

    def _load_model(self, relative: Union[str, Path], stage: str) -> Model:
        path = self.store.require(relative, stage)
        self.store.require(spec_path_for(path), stage)
        return Model.load(path)

    def _save_model(self, model: Model, relative: str) -> List[Path]:
        path = self.store.path(relative)
        model.save(path)
        self.store.register(path, spec_path_for(path))
        return [path, spec_path_for(path)]

    # --- Stufen ---

    def train_baseline(self, role: str = 'target') -> CommandResult:
        """Trainiert das Zielmodell (role='target') oder das Substitut."""
        if role not in ROLES:
            raise ConfigValidationError({'role': [f"Unbekannte Rolle '{role}', erlaubt: {list(ROLES)}"]})
        self.store.begin(f'train:{role}')
        block = self.config.model if role == 'target' else self.config.substitute
        model = build_classifier(block, self.dataset, self.config.seed, role)
        self.logger.info(f"Training {role} ({block['name']}, {model.parameter_count()} Parameter)")

        stream = ('baseline',) if role == 'target' else ('substitute',)
        result = ModelTrainer(model, self.config.baseline, stream=stream).train(self.dataset)

        relative = BASELINE_CHECKPOINT if role == 'target' else SUBSTITUTE_CHECKPOINT
        outputs = self._save_model(model, relative)
        report = {
            'role': role,
            'model': block['name'],
            'parameters': model.parameter_count(),
            'epochs': result.epochs,
            'steps': result.steps,
            'loss_history': result.loss_history,
            'eval_accuracy': result.eval_accuracy,
            'adversarial': self.config.baseline.adversarial.to_dict() if self.config.baseline.adversarial else None,
        }
        outputs.append(self.store.write_json(f'{Path(relative).parent}/report.json', report))
        self.store.finish(f'train:{role}')
        return CommandResult(command='train', outputs=[self.store.relative(p) for p in outputs], summary=report)

    def gravity(self) -> CommandResult:
        """Führt die Gravity-Iterationen ausgehend vom Baseline-Checkpoint aus."""
        self.store.begin('gravity')
        baseline = self._load_model(BASELINE_CHECKPOINT, 'train')
        gravity_dir = self.store.path(f'{GRAVITY_DIR}/{RECORDS_FILENAME}').parent
        run = run_gravity(self.config.gravity, self.dataset, baseline, output_dir=gravity_dir)

        outputs = [gravity_dir / RECORDS_FILENAME]
        for record in run.records:
            checkpoint = gravity_dir / record.checkpoint_path
            outputs.extend([checkpoint, spec_path_for(checkpoint)])
        snapshots = [snap for record in run.records for snap in record.snapshots()]
        outputs.append(export_trajectories(gravity_dir / 'trajectories.csv', snapshots, projection='none'))
        outputs.append(export_trajectories(gravity_dir / 'trajectories_pca2.csv', snapshots, projection='pca2'))
        self.store.register(*outputs)
        self.store.finish('gravity')

        summary = {
            'iterations': len(run.records) - 1,
            'accuracy': [r.accuracy for r in run.records],
            'gamma': run.state.gamma_history,
        }
        return CommandResult(command='gravity', outputs=[self.store.relative(p) for p in outputs], summary=summary)

    def _front_scores(self, records, front: List[int]) -> Dict[int, float]:
        """PGD Robust Accuracy der Front-Mitglieder, aus ihren Checkpoints berechnet."""
        by_k = {r.k: r for r in records}
        scores = {}
        for k in front:
            record = by_k[k]
            if record.pgd_accuracy is not None:
                scores[k] = record.pgd_accuracy
                continue
            model = self._load_model(Path(GRAVITY_DIR) / record.checkpoint_path, 'gravity')
            report = evaluate_robustness(model, self.dataset, [self.config.selection.attack])[0]
            scores[k] = report.robust_accuracy
        return scores

    def select(self) -> CommandResult:
        """Pareto-Auswahl; fehlende PGD-Werte der Front werden nachberechnet."""
        self.store.begin('select')
        selection_config = self.config.selection
        records = read_records(self.store.require(f'{GRAVITY_DIR}/{RECORDS_FILENAME}', 'gravity'))
        _, front, _ = candidate_front(records, selection_config.threshold, selection_config.normalization)
        scores = self._front_scores(records, front)
        selection = pareto_select(records, selection_config.threshold, scores, selection_config.normalization)

        chosen = next(r for r in records if r.k == selection.chosen_k)
        summary = selection.to_summary()
        summary['chosen_checkpoint'] = f'{GRAVITY_DIR}/{chosen.checkpoint_path}'
        summary['normalization'] = selection_config.normalization
        summary['attack'] = selection_config.attack.to_dict()

        outputs = [
            self.store.write_json(SELECTION_SUMMARY, summary),
            self.store.write_json('selection/robust_scores.json', {str(k): v for k, v in sorted(scores.items())}),
            selection.write_front_csv(self.store.path('selection/pareto.csv'), records),
        ]
        self.store.register(outputs[-1])
        self.store.finish('select')
        return CommandResult(command='select', outputs=[self.store.relative(p) for p in outputs], summary=summary)

    def default_target(self) -> str:
        """Gewählter Gravity-Checkpoint, falls vorhanden, sonst die Baseline."""
        summary_path = self.store.root / SELECTION_SUMMARY
        if summary_path.exists():
            return self.store.read_json(SELECTION_SUMMARY, 'select')['chosen_checkpoint']
        return BASELINE_CHECKPOINT

    def attack(self, checkpoint: Optional[str] = None) -> CommandResult:
        """White-Box-Evaluation aller konfigurierten Angriffe."""
        self.store.begin('attack')
        checkpoint = checkpoint or self.default_target()
        model = self._load_model(checkpoint, 'train')
        reports = evaluate_robustness(model, self.dataset, self.config.attacks)
        output = write_reports_csv(self.store.path(f'attack/robustness_{checkpoint_label(checkpoint)}.csv'), reports)
        self.store.register(output)
        self.store.finish('attack')
        return CommandResult(
            command='attack',
            outputs=[self.store.relative(output)],
            summary={'checkpoint': str(checkpoint), 'reports': [r.to_row() for r in reports]},
        )

    def blackbox(self, substitute: Optional[str] = None, target: Optional[str] = None) -> CommandResult:
        """Transfer-Angriffe: Adversarials vom Substitut, gemessen am Zielmodell."""
        self.store.begin('blackbox')
        substitute = substitute or SUBSTITUTE_CHECKPOINT
        target = target or self.default_target()
        substitute_model = self._load_model(substitute, 'train')
        target_model = self._load_model(target, 'train')
        reports = transfer_attack_eval(substitute_model, target_model, self.dataset, self.config.attacks)
        name = f'blackbox/transfer_{checkpoint_label(substitute)}_to_{checkpoint_label(target)}.csv'
        output = write_reports_csv(self.store.path(name), reports)
        self.store.register(output)
        self.store.finish('blackbox')
        return CommandResult(
            command='blackbox',
            outputs=[self.store.relative(output)],
            summary={'substitute': str(substitute), 'target': str(target),
                     'reports': [r.to_row() for r in reports]},
        )


def cmd_train_baseline(config: ExperimentConfig, role: str = 'target') -> CommandResult:
    return ExperimentPipelineService(config).train_baseline(role)


def cmd_gravity(config: ExperimentConfig) -> CommandResult:
    return ExperimentPipelineService(config).gravity()


def cmd_select(config: ExperimentConfig) -> CommandResult:
    return ExperimentPipelineService(config).select()


def cmd_attack(config: ExperimentConfig, checkpoint: Optional[str] = None) -> CommandResult:
    return ExperimentPipelineService(config).attack(checkpoint)


def cmd_blackbox(config: ExperimentConfig, substitute_ckpt: Optional[str] = None,
                 target_ckpt: Optional[str] = None) -> CommandResult:
    return ExperimentPipelineService(config).blackbox(substitute_ckpt, target_ckpt)
