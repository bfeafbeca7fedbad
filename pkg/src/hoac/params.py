# -*- coding: utf-8 -*-
"""Metadata quantization, band grouping, and frame serialization.

Per (frame, band, sector) the codec transmits a direction index into a
756-point grid (10 bits, index 0 meaning "no direction / fully diffuse")
and a diffuseness index into 8 geometrically widening bins (3 bits).
Low-frequency bands may additionally be decimated in time; the decoder
repeats held entries.
"""
from dataclasses import dataclass, field

import numpy as np

from . import grids, sph, stft

DOA_GRID_SIZE = 756
DOA_GRID_ID = "fibonacci"
DIFF_BINS = 8
DIFF_EXP_FACTOR = 1.25
ZEROING_THRESHOLD = 0.95
DOA_BITS = 10
DIFF_BITS = 3

# Bark-inspired 16-band default table (band edges in Hz, top bands merged).
DEFAULT_BAND_EDGES_HZ = (0., 200., 400., 630., 920., 1270., 1720., 2320.,
                         3150., 4400., 5800., 7700., 9500., 12000., 15500.,
                         20500., 24000.)


@dataclass(frozen=True)
class BandTable:
    """Grouping of STFT bins into perceptual bands.

    Attributes
    ----------
    edges : (num_bands+1,) np.ndarray of int
        Bin edges; band b covers bins [edges[b], edges[b+1]).
    downsample : (num_bands,) np.ndarray of int
        Temporal decimation factor per band (1, 2 or 4).
    """
    edges: np.ndarray
    downsample: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=int)
        ds = np.asarray(self.downsample, dtype=int)
        if edges.ndim != 1 or len(edges) < 2:
            raise ValueError("need at least one band")
        if np.any(np.diff(edges) <= 0):
            raise ValueError("band edges must be strictly increasing")
        if len(ds) != len(edges) - 1:
            raise ValueError("one downsample factor per band required")
        if not np.all(np.isin(ds, (1, 2, 4))):
            raise ValueError("downsample factors must be 1, 2 or 4")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "downsample", ds)

    @property
    def num_bands(self):
        return len(self.edges) - 1

    def bands_present(self, frame_index):
        """Indices of the bands transmitted in a given parameter frame."""
        return np.flatnonzero(frame_index % self.downsample == 0)

    def band_slices(self):
        return [slice(int(self.edges[b]), int(self.edges[b + 1]))
                for b in range(self.num_bands)]


def default_band_table(downsample=None, sample_rate=stft.SAMPLE_RATE,
                       edges_hz=DEFAULT_BAND_EDGES_HZ):
    """Build the default 16-band table over the 129 STFT bins."""
    hz_per_bin = sample_rate / stft.WINDOW
    edges = np.round(np.asarray(edges_hz) / hz_per_bin).astype(int)
    edges = np.clip(edges, 0, stft.NUM_BINS)
    # The top band always includes the Nyquist bin.
    edges[-1] = stft.NUM_BINS
    if downsample is None:
        downsample = np.ones(len(edges) - 1, dtype=int)
    return BandTable(edges=edges, downsample=np.asarray(downsample))


def c_weight(freq_hz):
    """IEC C-weighting magnitude, normalized to 1 at 1 kHz."""
    f2 = np.square(np.asarray(freq_hz, dtype=float))
    num = 12194.0 ** 2 * f2
    den = (f2 + 20.6 ** 2) * (f2 + 12194.0 ** 2)
    raw = np.where(den > 0, num / den, 0.0)
    ref = c_weight_raw_1khz()
    return raw / ref


def c_weight_raw_1khz():
    f2 = 1000.0 ** 2
    return (12194.0 ** 2 * f2) / ((f2 + 20.6 ** 2) * (f2 + 12194.0 ** 2))


# ---------------------------------------------------------------------------
# direction quantization

class DoaGrid:
    """Deterministic direction quantization grid with a reserved null index.

    Index 0 means "no direction"; grid points use indices 1..size.
    """

    def __init__(self, size=DOA_GRID_SIZE, grid_id=DOA_GRID_ID):
        if grid_id != DOA_GRID_ID:
            raise ValueError(f"unknown DoA grid id {grid_id!r}")
        self.grid_id = grid_id
        self.size = int(size)
        self.vecs = grids.fibonacci(self.size)
        self.dirs = sph.vec2dir(self.vecs)

    def quantize(self, vecs):
        """Nearest grid point (1-based index) for unit vectors (..., 3).

        Great-circle nearest neighbor; ties resolve to the lowest index.
        """
        vecs = np.asarray(vecs, dtype=float)
        dots = vecs @ self.vecs.T
        return np.argmax(dots, axis=-1).astype(np.uint16) + 1

    def dequantize(self, indices):
        """Unit vectors for 1-based indices; index 0 maps to the +x axis
        placeholder (callers treat it as 'fully diffuse' and ignore it)."""
        idx = np.asarray(indices, dtype=int)
        if np.any(idx < 0) or np.any(idx > self.size):
            raise ValueError("DoA index out of range")
        out = self.vecs[np.maximum(idx - 1, 0)]
        return out


def quantize_doa(vecs, grid):
    return grid.quantize(vecs)


# ---------------------------------------------------------------------------
# diffuseness quantization

def diffuseness_edges(num_bins=DIFF_BINS, factor=DIFF_EXP_FACTOR):
    """Bin edges in [0, 1]; widths grow geometrically by `factor`."""
    widths = factor ** np.arange(num_bins)
    edges = np.concatenate(([0.], np.cumsum(widths) / widths.sum()))
    edges[-1] = 1.0
    return edges


def quantize_diffuseness(psi, num_bins=DIFF_BINS, factor=DIFF_EXP_FACTOR):
    edges = diffuseness_edges(num_bins, factor)
    psi = np.asarray(psi, dtype=float)
    idx = np.searchsorted(edges[1:-1], psi, side="right")
    return idx.astype(np.uint8)


def dequantize_diffuseness(indices, num_bins=DIFF_BINS,
                           factor=DIFF_EXP_FACTOR):
    """Bin midpoints; unbiased within a bin absent a prior."""
    edges = diffuseness_edges(num_bins, factor)
    mids = 0.5 * (edges[:-1] + edges[1:])
    idx = np.asarray(indices, dtype=int)
    if np.any(idx < 0) or np.any(idx >= num_bins):
        raise ValueError("diffuseness index out of range")
    return mids[idx]


# ---------------------------------------------------------------------------
# quantized frames

@dataclass
class QuantizedParamFrame:
    """Quantized metadata of one parameter frame.

    doa_index, diff_index : (num_bands, num_sectors) integer arrays.
    A doa_index of 0 marks a fully diffuse entry (the encoder zeroes the
    index during very high diffuseness or degenerate energy; the decoder
    forces psi = 1 there).
    """
    doa_index: np.ndarray
    diff_index: np.ndarray

    @property
    def num_bands(self):
        return self.doa_index.shape[0]

    @property
    def num_sectors(self):
        return self.doa_index.shape[1]


def apply_doa_zeroing(frame, psi, threshold=ZEROING_THRESHOLD):
    """Zero direction indices wherever diffuseness exceeds the threshold.

    `psi` holds the encoder-side diffuseness values (post median filter)
    aligned with the frame entries; entries already zero stay zero.
    """
    mask = np.asarray(psi) > threshold
    frame.doa_index = np.where(mask, 0, frame.doa_index).astype(np.uint16)
    return frame


def downsample_params(frames, table):
    """Drop per-band entries according to the downsampling schedule.

    Returns a list of QuantizedParamFrame whose arrays only hold the bands
    present in each frame (in band order).
    """
    out = []
    for t, frame in enumerate(frames):
        keep = table.bands_present(t)
        out.append(QuantizedParamFrame(doa_index=frame.doa_index[keep],
                                       diff_index=frame.diff_index[keep]))
    return out


def upsample_params(sparse_frames, table):
    """Sample-and-hold reconstruction of the full per-band frame sequence."""
    out = []
    held_doa = None
    held_diff = None
    num_bands = table.num_bands
    for t, frame in enumerate(sparse_frames):
        keep = table.bands_present(t)
        if held_doa is None:
            if len(keep) != num_bands:
                raise ValueError("first frame must carry all bands")
            held_doa = frame.doa_index.copy()
            held_diff = frame.diff_index.copy()
        else:
            if frame.doa_index.shape[0] != len(keep):
                raise ValueError(f"frame {t} carries {frame.doa_index.shape[0]} "
                                 f"bands, schedule expects {len(keep)}")
            held_doa[keep] = frame.doa_index
            held_diff[keep] = frame.diff_index
        out.append(QuantizedParamFrame(doa_index=held_doa.copy(),
                                       diff_index=held_diff.copy()))
    return out


# ---------------------------------------------------------------------------
# bit-exact serialization (band-major, sector-minor, 10+3 bits per entry)

def serialized_frame_bytes(num_bands, num_sectors):
    return (num_bands * num_sectors * (DOA_BITS + DIFF_BITS) + 7) // 8


def serialize_param_frame(frame):
    """Pack a frame into bytes; fields MSB-first in fixed order."""
    doa = np.asarray(frame.doa_index, dtype=np.uint16).ravel()
    diff = np.asarray(frame.diff_index, dtype=np.uint16).ravel()
    if np.any(doa >= (1 << DOA_BITS)) or np.any(diff >= (1 << DIFF_BITS)):
        raise ValueError("quantized index out of field range")
    n = len(doa)
    bits = np.empty((n, DOA_BITS + DIFF_BITS), dtype=np.uint8)
    for b in range(DOA_BITS):
        bits[:, b] = (doa >> (DOA_BITS - 1 - b)) & 1
    for b in range(DIFF_BITS):
        bits[:, DOA_BITS + b] = (diff >> (DIFF_BITS - 1 - b)) & 1
    return np.packbits(bits.ravel()).tobytes()


def parse_param_frame(data, num_bands, num_sectors):
    """Inverse of :func:`serialize_param_frame`.

    Raises
    ------
    ValueError
        If the payload is shorter than the expected field count.
    """
    expected = serialized_frame_bytes(num_bands, num_sectors)
    if len(data) < expected:
        raise ValueError("truncated parameter frame payload")
    n = num_bands * num_sectors
    bits = np.unpackbits(np.frombuffer(data[:expected], dtype=np.uint8),
                         count=n * (DOA_BITS + DIFF_BITS))
    bits = bits.reshape(n, DOA_BITS + DIFF_BITS)
    doa = np.zeros(n, dtype=np.uint16)
    diff = np.zeros(n, dtype=np.uint8)
    for b in range(DOA_BITS):
        doa |= bits[:, b].astype(np.uint16) << (DOA_BITS - 1 - b)
    for b in range(DIFF_BITS):
        diff |= (bits[:, DOA_BITS + b] << (DIFF_BITS - 1 - b)).astype(np.uint8)
    return QuantizedParamFrame(
        doa_index=doa.reshape(num_bands, num_sectors),
        diff_index=diff.reshape(num_bands, num_sectors))
