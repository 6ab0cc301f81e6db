"""
Artefakt-Verwaltung eines Experiment-Laufs

Alle Ausgaben eines Laufs liegen unter einem Ausgabeverzeichnis. Die Datei
``manifest.json`` führt Konfigurations-Hash, Tool-Version, Zeitstempel pro
Kommando und eine sha256-Prüfsumme für jede erzeugte Datei.

Author: DSP Development Team
Version: 1.0.0
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

from django.utils import timezone

from ...exceptions import ArtifactMissingError

logger = logging.getLogger(__name__)

MANIFEST_FILENAME = 'manifest.json'


def file_checksum(path: Union[str, Path]) -> str:
    digest = hashlib.sha256()
    with Path(path).open('rb') as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b''):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    """
    Manifest eines Laufs.

    Attributes:
        config_hash: sha256 der kanonischen Konfiguration
        tool_version: Version des gravity-Pakets
        commands: pro Kommando {'started_at', 'finished_at'}
        files: relativer Pfad -> sha256
    """
    config_hash: str
    tool_version: str
    commands: Dict[str, Dict[str, str]] = field(default_factory=dict)
    files: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'config_hash': self.config_hash,
            'tool_version': self.tool_version,
            'commands': self.commands,
            'files': self.files,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunManifest":
        return cls(
            config_hash=data['config_hash'],
            tool_version=data['tool_version'],
            commands=dict(data.get('commands', {})),
            files=dict(data.get('files', {})),
        )


class ArtifactStore:
    """
    Schreibt Artefakte unter `root` und hält das Manifest aktuell.

    Usage:
        store = ArtifactStore(config.output_dir, config.config_hash, version)
        store.begin('train')
        path = store.path('baseline/model.agrv')
        model.save(path)
        store.register(path, spec_path_for(path))
        store.finish('train')
    """

    def __init__(self, root: Union[str, Path], config_hash: str, tool_version: str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.manifest_path = self.root / MANIFEST_FILENAME
        self.logger = logger
        self.manifest = self._load_or_create(config_hash, tool_version)

    def _load_or_create(self, config_hash: str, tool_version: str) -> RunManifest:
        if self.manifest_path.exists():
            manifest = RunManifest.from_dict(json.loads(self.manifest_path.read_text()))
            if manifest.config_hash != config_hash:
                self.logger.warning(
                    f"Konfigurations-Hash hat sich geändert ({manifest.config_hash[:12]} -> {config_hash[:12]}), "
                    f"Manifest wird neu begonnen"
                )
                return RunManifest(config_hash=config_hash, tool_version=tool_version)
            manifest.tool_version = tool_version
            return manifest
        return RunManifest(config_hash=config_hash, tool_version=tool_version)

    def path(self, relative: str) -> Path:
        target = self.root / relative
        target.parent.mkdir(parents=True, exist_ok=True)
        return target

    def require(self, relative: Union[str, Path], stage: str) -> Path:
        """
        Raises:
            ArtifactMissingError: wenn die Datei fehlt (vorherige Stufe nicht gelaufen)
        """
        target = Path(relative)
        if not target.is_absolute():
            target = self.root / target
        if not target.exists():
            raise ArtifactMissingError(str(target), stage)
        return target

    def relative(self, path: Union[str, Path]) -> str:
        path = Path(path)
        try:
            return path.resolve().relative_to(self.root.resolve()).as_posix()
        except ValueError:
            return path.as_posix()

    def register(self, *paths: Union[str, Path]) -> None:
        for path in paths:
            self.manifest.files[self.relative(path)] = file_checksum(path)

    def write_json(self, relative: str, data: Any) -> Path:
        target = self.path(relative)
        target.write_text(json.dumps(data, indent=2, sort_keys=True) + '\n')
        self.register(target)
        return target

    def read_json(self, relative: str, stage: str) -> Any:
        return json.loads(self.require(relative, stage).read_text())

    def begin(self, command: str) -> None:
        self.manifest.commands[command] = {'started_at': timezone.now().isoformat()}

    def finish(self, command: str) -> None:
        entry = self.manifest.commands.setdefault(command, {})
        entry['finished_at'] = timezone.now().isoformat()
        self.save()

    def save(self) -> Path:
        self.manifest.files = dict(sorted(self.manifest.files.items()))
        self.manifest_path.write_text(json.dumps(self.manifest.to_dict(), indent=2, sort_keys=True) + '\n')
        return self.manifest_path

    def verify(self) -> Dict[str, Optional[str]]:
        """Dateien, deren Prüfsumme nicht mehr stimmt (None = Datei fehlt)."""
        mismatches = {}
        for relative, checksum in self.manifest.files.items():
            target = self.root / relative
            if not target.exists():
                mismatches[relative] = None
            elif file_checksum(target) != checksum:
                mismatches[relative] = file_checksum(target)
        return mismatches
