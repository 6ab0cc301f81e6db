"""
Checkpoint-Codec für Modellparameter

Binärformat (little-endian):
    magic  b"AGRV"
    u32    Version
    u32    Anzahl Tensoren
    pro Tensor:
        u32    Länge des Namens, danach UTF-8 Name
        u32    Rang
        u64[]  Dimensionen
        f64[]  Payload (row-major)

Author: DSP Development Team
Version: 1.0.0
"""

import logging
import struct
from pathlib import Path
from typing import BinaryIO, Dict, Union

import numpy as np

from ...exceptions import CheckpointFormatError

logger = logging.getLogger(__name__)

MAGIC = b"AGRV"
FORMAT_VERSION = 1


def _read_exact(handle: BinaryIO, size: int, what: str) -> bytes:
    data = handle.read(size)
    if len(data) != size:
        raise CheckpointFormatError(f"Unexpected end of checkpoint while reading {what}")
    return data


def save_parameters(path: Union[str, Path], tensors: Dict[str, np.ndarray]) -> Path:
    """
    Schreibt benannte Arrays im AGRV-Format.

    Args:
        path: Zieldatei
        tensors: Name -> Array (Reihenfolge bleibt erhalten)

    Returns:
        Pfad der geschriebenen Datei
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('wb') as handle:
        handle.write(MAGIC)
        handle.write(struct.pack('<II', FORMAT_VERSION, len(tensors)))
        for name, array in tensors.items():
            encoded = name.encode('utf-8')
            array = np.ascontiguousarray(array, dtype='<f8')
            handle.write(struct.pack('<I', len(encoded)))
            handle.write(encoded)
            handle.write(struct.pack('<I', array.ndim))
            handle.write(struct.pack(f'<{array.ndim}Q', *array.shape))
            handle.write(array.tobytes(order='C'))
    logger.debug(f"Checkpoint geschrieben: {path} ({len(tensors)} Tensoren)")
    return path


def load_parameters(path: Union[str, Path]) -> Dict[str, np.ndarray]:
    """
    Liest eine AGRV-Datei.

    Raises:
        CheckpointFormatError: bei falschem Magic, unbekannter Version oder
            abgeschnittener Datei
    """
    path = Path(path)
    tensors: Dict[str, np.ndarray] = {}
    with path.open('rb') as handle:
        magic = handle.read(4)
        if magic != MAGIC:
            raise CheckpointFormatError(f"{path} is not an AGRV checkpoint (magic {magic!r})")
        version, count = struct.unpack('<II', _read_exact(handle, 8, 'header'))
        if version != FORMAT_VERSION:
            raise CheckpointFormatError(f"Unsupported checkpoint version {version} in {path}")
        for _ in range(count):
            (name_len,) = struct.unpack('<I', _read_exact(handle, 4, 'name length'))
            name = _read_exact(handle, name_len, 'name').decode('utf-8')
            (rank,) = struct.unpack('<I', _read_exact(handle, 4, f'rank of {name}'))
            dims = struct.unpack(f'<{rank}Q', _read_exact(handle, 8 * rank, f'dims of {name}'))
            count_values = int(np.prod(dims)) if rank else 1
            payload = _read_exact(handle, 8 * count_values, f'payload of {name}')
            tensors[name] = np.frombuffer(payload, dtype='<f8').astype(np.float64).reshape(dims)
    return tensors
