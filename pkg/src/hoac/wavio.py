# -*- coding: utf-8 -*-
"""Multichannel WAV I/O.

HOA clips are stored as 32-bit float WAV with ACN channel order (documented
assumption; nothing in the file marks the convention).  Integer PCM input
is converted to float on read; output is always float32.
"""
import numpy as np
from scipy.io import wavfile

from .errors import FormatError

_INT_SCALES = {np.dtype(np.int16): 1 << 15, np.dtype(np.int32): 1 << 31}


def read_wav(path):
    """Read a WAV file as (data, sample_rate) with data shaped (ch, n)."""
    try:
        sr, data = wavfile.read(path)
    except ValueError as exc:
        raise FormatError(f"cannot read WAV file {path}: {exc}") from exc
    if data.ndim == 1:
        data = data[:, None]
    if data.dtype in (np.float32, np.float64):
        out = data.astype(float)
    elif data.dtype in _INT_SCALES:
        out = data.astype(float) / _INT_SCALES[data.dtype]
    else:
        raise FormatError(f"unsupported WAV sample format {data.dtype}")
    return out.T, int(sr)


def write_wav(path, data, sample_rate):
    """Write (ch, n) float data as a float32 WAV file."""
    data = np.atleast_2d(np.asarray(data, dtype=np.float32))
    wavfile.write(path, int(sample_rate), np.ascontiguousarray(data.T))
