# src/model/checkpoint.py
"""
Binary checkpoint: versioned JSON header plus shape-tagged float64 arrays

Layout (all integers little-endian):
    magic b"GMCK" | version u32 | header_len u64 | header JSON
    array_count u32 | per array: name_len u16, name, ndim u8, dims u32 * ndim,
    float64 data in row-major order
"""
import json
import struct
from pathlib import Path
from typing import Any, Dict, Optional, Tuple
import logging

import numpy as np

from src.errors import CheckpointError
from src.model.classifier import ModelParams, ModelSpec
from src.model.embeddings import EmbeddingProvider

logger = logging.getLogger(__name__)

MAGIC = b"GMCK"
FORMAT_VERSION = 1
FLOAT_DTYPE = np.dtype('<f8')


def save_checkpoint(path: str, params: ModelParams, metadata: Optional[Dict[str, Any]] = None):
    """Write params and run metadata to a single file"""
    logger.info(f"💾 Saving checkpoint to: {path}")

    header = {
        'model_spec': params.spec.to_dict(),
        'vocabulary': params.provider.vocabulary if params.provider.is_trainable else [],
        'embedding_mode': params.provider.mode,
        'embedding_dim': params.provider.dim,
        'embeddings_path': params.provider.source_path,
        'metadata': metadata or {},
    }
    header_bytes = json.dumps(header, sort_keys=True).encode('utf-8')

    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'wb') as f:
        f.write(MAGIC)
        f.write(struct.pack('<I', FORMAT_VERSION))
        f.write(struct.pack('<Q', len(header_bytes)))
        f.write(header_bytes)

        f.write(struct.pack('<I', len(params.arrays)))
        for name in sorted(params.arrays):
            array = np.ascontiguousarray(params.arrays[name], dtype=FLOAT_DTYPE)
            encoded = name.encode('utf-8')
            f.write(struct.pack('<H', len(encoded)))
            f.write(encoded)
            f.write(struct.pack('<B', array.ndim))
            f.write(struct.pack(f'<{array.ndim}I', *array.shape))
            f.write(array.tobytes(order='C'))

    logger.info(f"✅ Checkpoint saved ({len(params.arrays)} arrays)")


def _read_exact(f, size: int, path: str) -> bytes:
    data = f.read(size)
    if len(data) != size:
        raise CheckpointError(f"{path}: truncated checkpoint")
    return data


def read_checkpoint(path: str) -> Tuple[Dict[str, Any], Dict[str, np.ndarray]]:
    """Raw header and arrays"""
    with open(path, 'rb') as f:
        if _read_exact(f, 4, path) != MAGIC:
            raise CheckpointError(f"{path}: not a checkpoint file")
        (version,) = struct.unpack('<I', _read_exact(f, 4, path))
        if version != FORMAT_VERSION:
            raise CheckpointError(f"{path}: unsupported checkpoint version {version}")

        (header_len,) = struct.unpack('<Q', _read_exact(f, 8, path))
        try:
            header = json.loads(_read_exact(f, header_len, path).decode('utf-8'))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise CheckpointError(f"{path}: corrupt header ({e})") from None

        arrays: Dict[str, np.ndarray] = {}
        (count,) = struct.unpack('<I', _read_exact(f, 4, path))
        for _ in range(count):
            (name_len,) = struct.unpack('<H', _read_exact(f, 2, path))
            name = _read_exact(f, name_len, path).decode('utf-8')
            (ndim,) = struct.unpack('<B', _read_exact(f, 1, path))
            shape = struct.unpack(f'<{ndim}I', _read_exact(f, 4 * ndim, path))
            size = int(np.prod(shape)) if ndim else 1
            raw = _read_exact(f, size * FLOAT_DTYPE.itemsize, path)
            arrays[name] = np.frombuffer(raw, dtype=FLOAT_DTYPE).reshape(shape).astype(np.float64)

    return header, arrays


def load_checkpoint(path: str, embeddings_path: Optional[str] = None) -> Tuple[ModelParams, Dict[str, Any]]:
    """Rebuild ModelParams; file-mode vectors are reloaded from disk"""
    logger.info(f"📂 Loading checkpoint from: {path}")
    header, arrays = read_checkpoint(path)

    try:
        spec = ModelSpec(**header['model_spec'])
        mode = header['embedding_mode']
    except (KeyError, TypeError) as e:
        raise CheckpointError(f"{path}: incompatible header ({e})") from None

    if mode == 'trainable':
        provider = EmbeddingProvider(mode='trainable', dim=header['embedding_dim'], vocabulary=header['vocabulary'])
    else:
        source = embeddings_path or header.get('embeddings_path')
        if not source:
            raise CheckpointError(f"{path}: file-mode checkpoint without an embeddings path")
        provider = EmbeddingProvider.from_file(source)

    logger.info(f"✅ Checkpoint loaded ({len(arrays)} arrays)")
    return ModelParams(spec, arrays, provider), header.get('metadata', {})
