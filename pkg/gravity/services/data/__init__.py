"""
Data Services Package

Datenquellen für die Experimente:
- MNIST IDX-Dateien (optional gzip), stratifizierte Desk-Scale-Teilmengen
- synthetische Gaussian Blobs
- deterministische Batch-Iteration

Author: DSP Development Team
Version: 1.0.0
"""

from .dataset import Dataset, SampleSet, one_hot, subsample
from .idx import load_idx, write_idx, load_mnist, IMAGES_MAGIC, LABELS_MAGIC
from .blobs import BlobSpec, make_blobs, two_blob_spec
from .batching import Batch, batches

__all__ = [
    'Dataset',
    'SampleSet',
    'one_hot',
    'subsample',
    'load_idx',
    'write_idx',
    'load_mnist',
    'IMAGES_MAGIC',
    'LABELS_MAGIC',
    'BlobSpec',
    'make_blobs',
    'two_blob_spec',
    'Batch',
    'batches',
]
