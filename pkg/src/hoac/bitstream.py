# -*- coding: utf-8 -*-
"""Stream container: self-contained header plus checksummed frame records.

Little-endian, length-prefixed layout (full field list in FORMAT.md).  The
header carries everything a decoder needs -- order, sector grid directions,
band table, quantizer configuration, coder spec -- so no out-of-band data
is required.  Reading is streaming: records are yielded one at a time and
memory use does not grow with stream length.

Unknown versions and header size mismatches are rejected rather than
skipped; a changed format must bump the version.
"""
import io
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import grids, params, stft, transport
from .errors import CorruptStreamError, FormatError, TruncatedStreamError

MAGIC = b"HOAC"
VERSION = 1

CONVENTION_ACN_N3D = 0

_GRID_IDS = {grids.GRID_TETRAHEDRON: 0, grids.GRID_OCTAHEDRON: 1,
             grids.GRID_ICOSAHEDRON: 2, grids.GRID_FIBONACCI: 3,
             "custom": 255}
_GRID_NAMES = {v: k for k, v in _GRID_IDS.items()}
_CODER_KIND_IDS = {transport.KIND_PASSTHROUGH: 0,
                   transport.KIND_UNIFORM: 1,
                   transport.KIND_EXTERNAL: 2}
_CODER_KIND_NAMES = {v: k for k, v in _CODER_KIND_IDS.items()}


@dataclass
class StreamHeader:
    """Decodable description of one stream."""
    order: int
    num_sectors: int
    n_tilde: int
    sector_grid_id: str
    sector_dirs: np.ndarray          # (J, 2) azimuth/elevation, float64
    band_edges: np.ndarray           # (num_bands+1,) bin edges
    band_downsample: np.ndarray      # (num_bands,)
    doa_grid_id: str = params.DOA_GRID_ID
    doa_grid_size: int = params.DOA_GRID_SIZE
    diff_bins: int = params.DIFF_BINS
    diff_exp_factor: float = params.DIFF_EXP_FACTOR
    zeroing_threshold: float = params.ZEROING_THRESHOLD
    coder: transport.CoderSpec = field(
        default_factory=transport.CoderSpec)
    sample_rate: int = stft.SAMPLE_RATE
    frame_samples: int = stft.FRAME_SAMPLES
    num_samples: int = 0
    convention: int = CONVENTION_ACN_N3D

    @property
    def num_channels(self):
        return (self.order + 1) ** 2

    @property
    def num_frames(self):
        if self.num_samples == 0:
            return 0
        return stft.num_frames(self.num_samples)

    def band_table(self):
        return params.BandTable(edges=self.band_edges,
                                downsample=self.band_downsample)


@dataclass
class FrameRecord:
    """One frame's payloads as stored in the container."""
    index: int
    tc_payload: bytes
    md_payload: bytes


def _pack_header_body(h):
    out = bytearray()
    out += struct.pack("<BBBBB", h.order, h.convention, h.num_sectors,
                       h.n_tilde, _GRID_IDS[h.sector_grid_id])
    dirs = np.asarray(h.sector_dirs, dtype="<f8")
    if dirs.shape != (h.num_sectors, 2):
        raise ValueError("sector direction table has wrong shape")
    out += dirs.tobytes()
    nb = len(h.band_edges) - 1
    out += struct.pack("<B", nb)
    out += np.asarray(h.band_edges, dtype="<u2").tobytes()
    out += np.asarray(h.band_downsample, dtype="u1").tobytes()
    out += struct.pack("<BH", _GRID_IDS[h.doa_grid_id], h.doa_grid_size)
    out += struct.pack("<Bf", h.diff_bins, h.diff_exp_factor)
    out += struct.pack("<f", h.zeroing_threshold)
    cmd = h.coder.command.encode("utf-8")
    out += struct.pack("<BfBH", _CODER_KIND_IDS[h.coder.kind],
                       h.coder.kbps_per_channel, h.coder.bits, len(cmd))
    out += cmd
    out += struct.pack("<IHQ", h.sample_rate, h.frame_samples,
                       h.num_samples)
    return bytes(out)


class _Cursor:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.data):
            raise FormatError("header too short for declared fields")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def _parse_header_body(body):
    c = _Cursor(body)
    order, convention, J, n_tilde, grid_id = c.unpack("<BBBBB")
    if convention != CONVENTION_ACN_N3D:
        raise FormatError(f"unsupported channel convention {convention}")
    if grid_id not in _GRID_NAMES:
        raise FormatError(f"unknown sector grid id {grid_id}")
    dirs = np.frombuffer(c.take(J * 16), dtype="<f8").reshape(J, 2)
    (nb,) = c.unpack("<B")
    edges = np.frombuffer(c.take(2 * (nb + 1)), dtype="<u2").astype(int)
    ds = np.frombuffer(c.take(nb), dtype="u1").astype(int)
    doa_grid_id, doa_size = c.unpack("<BH")
    if doa_grid_id not in _GRID_NAMES:
        raise FormatError(f"unknown DoA grid id {doa_grid_id}")
    diff_bins, diff_factor = c.unpack("<Bf")
    (threshold,) = c.unpack("<f")
    coder_kind, kbps, bits, cmd_len = c.unpack("<BfBH")
    if coder_kind not in _CODER_KIND_NAMES:
        raise FormatError(f"unknown coder kind {coder_kind}")
    cmd = c.take(cmd_len).decode("utf-8")
    sample_rate, frame_samples, num_samples = c.unpack("<IHQ")
    if c.pos != len(body):
        raise FormatError("unexpected trailing header fields")
    coder = transport.CoderSpec(kind=_CODER_KIND_NAMES[coder_kind],
                                kbps_per_channel=float(kbps), bits=bits,
                                command=cmd)
    return StreamHeader(order=order, num_sectors=J, n_tilde=n_tilde,
                        sector_grid_id=_GRID_NAMES[grid_id],
                        sector_dirs=np.array(dirs),
                        band_edges=edges, band_downsample=ds,
                        doa_grid_id=_GRID_NAMES[doa_grid_id],
                        doa_grid_size=doa_size, diff_bins=diff_bins,
                        diff_exp_factor=float(diff_factor),
                        zeroing_threshold=float(threshold), coder=coder,
                        sample_rate=sample_rate,
                        frame_samples=frame_samples,
                        num_samples=num_samples, convention=convention)


def write_header(fp, header):
    body = _pack_header_body(header)
    fp.write(MAGIC)
    fp.write(struct.pack("<HI", VERSION, len(body)))
    fp.write(body)
    fp.write(struct.pack("<I", zlib.crc32(body)))


def write_frame(fp, record):
    head = struct.pack("<I", record.index)
    fp.write(head)
    fp.write(struct.pack("<I", len(record.tc_payload)))
    fp.write(record.tc_payload)
    fp.write(struct.pack("<I", len(record.md_payload)))
    fp.write(record.md_payload)
    crc = zlib.crc32(head)
    crc = zlib.crc32(record.tc_payload, crc)
    crc = zlib.crc32(record.md_payload, crc)
    fp.write(struct.pack("<I", crc))


def write_stream(fp_or_path, header, records):
    """Write a complete stream (header plus frame records, in order)."""
    if isinstance(fp_or_path, (str, bytes)) or hasattr(fp_or_path, "__fspath__"):
        with open(fp_or_path, "wb") as fp:
            write_stream(fp, header, records)
        return
    write_header(fp_or_path, header)
    for rec in records:
        write_frame(fp_or_path, rec)


def _read_exact(fp, n, what, frame_index=None):
    data = fp.read(n)
    if len(data) != n:
        raise TruncatedStreamError(f"stream ended inside {what}",
                                   frame_index=frame_index)
    return data


def read_header(fp):
    magic = fp.read(4)
    if magic != MAGIC:
        raise FormatError("bad stream magic")
    version, body_len = struct.unpack("<HI",
                                      _read_exact(fp, 6, "header"))
    if version != VERSION:
        raise FormatError(f"unsupported stream version {version}")
    body = _read_exact(fp, body_len, "header")
    (crc,) = struct.unpack("<I", _read_exact(fp, 4, "header checksum"))
    if zlib.crc32(body) != crc:
        raise CorruptStreamError("header checksum mismatch")
    return _parse_header_body(body)


def read_frames(fp):
    """Yield FrameRecords until the stream ends.

    Raises CorruptStreamError (with the frame index) on checksum mismatch
    and TruncatedStreamError if the stream stops mid-record; frames before
    the failure have already been yielded.
    """
    index = 0
    while True:
        head = fp.read(4)
        if len(head) == 0:
            return
        if len(head) < 4:
            raise TruncatedStreamError("stream ended inside a frame header",
                                       frame_index=index)
        (stored_index,) = struct.unpack("<I", head)
        (tc_len,) = struct.unpack(
            "<I", _read_exact(fp, 4, "frame", stored_index))
        tc = _read_exact(fp, tc_len, "transport payload", stored_index)
        (md_len,) = struct.unpack(
            "<I", _read_exact(fp, 4, "frame", stored_index))
        md = _read_exact(fp, md_len, "metadata payload", stored_index)
        (crc,) = struct.unpack(
            "<I", _read_exact(fp, 4, "frame checksum", stored_index))
        actual = zlib.crc32(head)
        actual = zlib.crc32(tc, actual)
        actual = zlib.crc32(md, actual)
        if actual != crc:
            raise CorruptStreamError(
                f"frame {stored_index} checksum mismatch",
                frame_index=stored_index)
        if stored_index != index:
            raise CorruptStreamError(
                f"frame index jump: expected {index}, got {stored_index}",
                frame_index=index)
        yield FrameRecord(index=stored_index, tc_payload=tc, md_payload=md)
        index += 1


def read_stream(fp_or_path):
    """Open a stream: returns (header, frame iterator).

    With a path argument the file stays open as long as the iterator is
    consumed.
    """
    if isinstance(fp_or_path, (str, bytes)) or hasattr(fp_or_path, "__fspath__"):
        fp = open(fp_or_path, "rb")
        header = read_header(fp)

        def gen():
            with fp:
                yield from read_frames(fp)

        return header, gen()
    header = read_header(fp_or_path)
    return header, read_frames(fp_or_path)


def measure_rates(fp_or_path):
    """Bitrate accounting for a finished stream.

    `tc_kbps` is the nominal configured transport rate (sectors times the
    per-channel accounting rate); measured payload rates are reported
    alongside.  Raises ValueError for zero-duration streams.
    """
    header, frames = read_stream(fp_or_path)
    tc_bytes = 0
    md_bytes = 0
    n = 0
    for rec in frames:
        tc_bytes += len(rec.tc_payload)
        md_bytes += len(rec.md_payload)
        n += 1
    duration = header.num_samples / header.sample_rate
    if duration <= 0:
        raise ValueError("zero-duration stream")
    tc_nominal = header.num_sectors * header.coder.kbps_per_channel
    return {
        "duration_s": duration,
        "num_frames": n,
        "tc_kbps": tc_nominal,
        "tc_kbps_measured": tc_bytes * 8 / duration / 1000.0,
        "metadata_kbps": md_bytes * 8 / duration / 1000.0,
        "total_kbps": tc_nominal + md_bytes * 8 / duration / 1000.0,
    }
