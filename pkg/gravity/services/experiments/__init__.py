"""
Experiment Services Package

Konfiguration, Artefakte und Orchestrierung der Pipeline-Kommandos:
- ExperimentConfig (DRF-validiert), Konfigurations-Hash
- ArtifactStore / RunManifest
- ExperimentPipelineService und cmd_* Einstiegspunkte

Author: DSP Development Team
Version: 1.0.0
"""

from .config import ExperimentConfig, SelectionConfig, load_config, parse_config, config_hash, flatten_errors
from .artifacts import ArtifactStore, RunManifest, file_checksum, MANIFEST_FILENAME
from .pipeline import (
    CommandResult,
    ExperimentPipelineService,
    load_dataset,
    build_classifier,
    cmd_train_baseline,
    cmd_gravity,
    cmd_select,
    cmd_attack,
    cmd_blackbox,
    ROLES,
)

__all__ = [
    'ExperimentConfig',
    'SelectionConfig',
    'load_config',
    'parse_config',
    'config_hash',
    'flatten_errors',
    'ArtifactStore',
    'RunManifest',
    'file_checksum',
    'MANIFEST_FILENAME',
    'CommandResult',
    'ExperimentPipelineService',
    'load_dataset',
    'build_classifier',
    'cmd_train_baseline',
    'cmd_gravity',
    'cmd_select',
    'cmd_attack',
    'cmd_blackbox',
    'ROLES',
]
