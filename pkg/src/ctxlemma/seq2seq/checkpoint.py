"""Binary checkpoint format.

Layout (all integers little-endian)::

    8 bytes   magic  b"CTXLEMS2"
    uint32    format version (1)
    32 bytes  SHA-256 of the vocabulary file text
    uint32    d, uint32 h, uint32 vocab size
    float64[] parameter arrays, row-major, in ModelParams field order
"""

from __future__ import annotations

import struct

import numpy as np

from .model import ModelParams, param_shapes

MAGIC = b"CTXLEMS2"
VERSION = 1
_HEADER = struct.Struct("<8sI32sIII")


class CheckpointError(ValueError):
    pass


def dumps(params: ModelParams, vocab_digest: bytes) -> bytes:
    if len(vocab_digest) != 32:
        raise ValueError("vocab digest must be 32 bytes")
    parts = [_HEADER.pack(MAGIC, VERSION, vocab_digest, params.d, params.h, params.vocab_size)]
    parts += [np.ascontiguousarray(a, dtype="<f8").tobytes() for a in params.arrays()]
    return b"".join(parts)


def loads(data: bytes) -> tuple[ModelParams, bytes]:
    if len(data) < _HEADER.size:
        raise CheckpointError("truncated checkpoint header")
    magic, version, digest, d, h, V = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    shapes = param_shapes(V, d, h)
    expected = _HEADER.size + 8 * sum(int(np.prod(s)) for s in shapes.values())
    if len(data) != expected:
        raise CheckpointError(f"checkpoint size {len(data)} != expected {expected}")
    off = _HEADER.size
    arrays = {}
    for name, shape in shapes.items():
        n = int(np.prod(shape))
        arrays[name] = np.frombuffer(data, dtype="<f8", count=n, offset=off).reshape(shape).astype(np.float64)
        off += 8 * n
    return ModelParams(**arrays), digest


def save(path, params: ModelParams, vocab_digest: bytes) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps(params, vocab_digest))


def load(path, vocab=None) -> ModelParams:
    """Load params; when ``vocab`` is given its digest must match the header."""
    with open(path, "rb") as fh:
        params, digest = loads(fh.read())
    if vocab is not None:
        if digest != vocab.digest():
            raise CheckpointError("checkpoint was trained with a different vocabulary")
        if vocab.size != params.vocab_size:
            raise CheckpointError("vocab size mismatch")
    return params
