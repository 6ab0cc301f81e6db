"""
MNIST IDX Reader/Writer

Dateiformat (big-endian):
    i32   Magic (0x00000803 Bilder, 0x00000801 Labels)
    i32   Anzahl Items
    i32   Zeilen, i32 Spalten (nur Bilder)
    u8[]  Pixel bzw. Labels

Dateien mit Endung .gz werden transparent entpackt.

Author: DSP Development Team
Version: 1.0.0
"""

import gzip
import logging
import struct
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ...exceptions import BadMagicError, CountMismatchError, DatasetError, TruncatedFileError
from ..seeding import SeedStreams
from .dataset import Dataset, SampleSet, subsample

logger = logging.getLogger(__name__)

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801

PathLike = Union[str, Path]


def _read_bytes(path: PathLike) -> bytes:
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"IDX file not found: {path}", details={'path': str(path)})
    opener = gzip.open if path.suffix == '.gz' else open
    with opener(path, 'rb') as handle:
        return handle.read()


def _parse(path: PathLike, raw: bytes, magic: int, header_dims: int) -> tuple:
    header_size = 4 * (2 + header_dims)
    if len(raw) < header_size:
        raise TruncatedFileError(str(path), header_size, len(raw))
    found, *dims = struct.unpack(f'>{2 + header_dims}I', raw[:header_size])
    if found != magic:
        raise BadMagicError(str(path), magic, found)
    expected = header_size + int(np.prod(dims))
    if len(raw) < expected:
        raise TruncatedFileError(str(path), expected, len(raw))
    payload = np.frombuffer(raw, dtype=np.uint8, count=expected - header_size, offset=header_size)
    return dims, payload


def load_idx(images_path: PathLike, labels_path: PathLike) -> SampleSet:
    """
    Lädt ein IDX-Paar und skaliert Pixel mit 1/255 nach [0,1].

    Returns:
        SampleSet mit inputs (n, 1, rows, cols) und labels (n,)

    Raises:
        BadMagicError, TruncatedFileError, CountMismatchError
    """
    (count, rows, cols), pixels = _parse(images_path, _read_bytes(images_path), IMAGES_MAGIC, 3)
    (label_count,), labels = _parse(labels_path, _read_bytes(labels_path), LABELS_MAGIC, 1)
    if count != label_count:
        raise CountMismatchError(count, label_count)
    inputs = pixels.reshape(count, 1, rows, cols).astype(np.float64) / 255.0
    logger.info(f"{count} Bilder ({rows}x{cols}) aus {images_path} geladen")
    return SampleSet(inputs=inputs, labels=labels.astype(np.int64))


def write_idx(images_path: PathLike, labels_path: PathLike, inputs: np.ndarray, labels: np.ndarray) -> None:
    """
    Schreibt Bilder (Werte in [0,1]) und Labels im IDX-Format.

    Die Pixel werden auf Bytes quantisiert (round(x * 255)).
    """
    inputs = np.asarray(inputs)
    if inputs.ndim == 4:
        inputs = inputs[:, 0]
    count, rows, cols = inputs.shape
    pixels = np.clip(np.rint(inputs * 255.0), 0, 255).astype(np.uint8)
    for path, header, body in (
        (images_path, struct.pack('>4I', IMAGES_MAGIC, count, rows, cols), pixels.tobytes()),
        (labels_path, struct.pack('>2I', LABELS_MAGIC, len(labels)), np.asarray(labels, dtype=np.uint8).tobytes()),
    ):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        opener = gzip.open if path.suffix == '.gz' else open
        with opener(path, 'wb') as handle:
            handle.write(header + body)


def load_mnist(
    train_images: PathLike,
    train_labels: PathLike,
    eval_images: PathLike,
    eval_labels: PathLike,
    train_size: Optional[int] = 5000,
    eval_size: Optional[int] = 1000,
    seed: int = 0,
    num_classes: int = 10,
) -> Dataset:
    """
    Baut den Desk-Scale-MNIST-Datensatz: stratifizierte Teilmengen aus den
    Trainings- bzw. Testdateien (Standard 5.000 / 1.000 Samples).
    """
    streams = SeedStreams(seed)
    train = subsample(load_idx(train_images, train_labels), num_classes, train_size, streams.rng('split', 'train'))
    held_out = subsample(load_idx(eval_images, eval_labels), num_classes, eval_size, streams.rng('split', 'eval'))
    dataset = Dataset(
        train_inputs=train.inputs,
        train_labels=train.labels,
        eval_inputs=held_out.inputs,
        eval_labels=held_out.labels,
        num_classes=num_classes,
        name='mnist',
    )
    logger.info(f"MNIST Desk-Scale: {len(train)} Train / {len(held_out)} Eval")
    return dataset.validate()
