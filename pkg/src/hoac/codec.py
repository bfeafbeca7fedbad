# -*- coding: utf-8 -*-
"""End-to-end encoder and decoder pipelines.

Encoder: time-domain beamforming extracts the transport channels, the STFT
analysis estimates per-band sector parameters, which are median-filtered,
quantized, zeroed at very high diffuseness, temporally downsampled,
bit-packed, and entropy coded frame by frame.

Decoder: transport channels are decoded and re-transformed; per frame the
metadata is expanded (sample-and-hold), dequantized, smoothed, and turned
into per-band mixing matrices plus per-order energy-matching gains.

Tier presets mirror the three configurations the codec is normally run at:

    high   : J=12 at 48 kbps/ch nominal, two lowest bands decimated x2
    medium : J=9  at 48 kbps/ch nominal, eight lowest bands decimated x2
    low    : J=6  at 32 kbps/ch nominal, eight lowest bands decimated x2
"""
from dataclasses import dataclass

import numpy as np

from . import analysis, bitstream, entropy, params, sectors, sph, stft, \
    synthesis, transport
from .errors import FormatError, HoacError


@dataclass(frozen=True)
class TierPreset:
    name: str
    num_sectors: int
    kbps_per_channel: float
    downsample: tuple


TIER_PRESETS = {
    "high": TierPreset("high", 12, 48.0, (2, 2) + (1,) * 14),
    "medium": TierPreset("medium", 9, 48.0, (2,) * 8 + (1,) * 8),
    "low": TierPreset("low", 6, 32.0, (2,) * 8 + (1,) * 8),
}


def _validate_input(pcm, sample_rate):
    pcm = np.atleast_2d(np.asarray(pcm, dtype=float))
    if sample_rate != stft.SAMPLE_RATE:
        raise FormatError(f"unsupported sample rate {sample_rate} "
                          f"(need {stft.SAMPLE_RATE})")
    try:
        order = sph.order_of_channels(pcm.shape[0])
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
    return pcm, order


def encode(pcm, sample_rate, num_sectors=12, coder=None, band_table=None,
           kbps_per_channel=None):
    """Encode an HOA clip.

    Parameters
    ----------
    pcm : (L, n) array, ACN/N3D float HOA signals
    sample_rate : int
    num_sectors : int
    coder : transport.CoderSpec, optional (default passthrough)
    band_table : params.BandTable, optional
    kbps_per_channel : float, optional
        Overrides the accounting rate in the coder spec.

    Returns
    -------
    header : bitstream.StreamHeader
    records : list of bitstream.FrameRecord
    """
    pcm, order = _validate_input(pcm, sample_rate)
    n = pcm.shape[1]
    if coder is None:
        coder = transport.CoderSpec(kind=transport.KIND_PASSTHROUGH)
    if kbps_per_channel is not None:
        coder = transport.CoderSpec(kind=coder.kind,
                                    kbps_per_channel=float(kbps_per_channel),
                                    bits=coder.bits, command=coder.command)
    if band_table is None:
        band_table = params.default_band_table()
    design = sectors.design_for_sector_count(order, num_sectors)
    doa_grid = params.DoaGrid()

    # Metadata path: STFT analysis, band grouping, filtering, quantization.
    frames = stft.tf_forward(pcm, sample_rate)
    pressure, velocity = analysis.beamform(frames, design)
    bin_params = analysis.estimate_params(pressure, velocity, design)
    weights = params.c_weight(stft.bin_frequencies(sample_rate))
    band = analysis.group_bands(bin_params, band_table, weights, design)
    psi = analysis.median_filter_diffuseness(band.psi)
    nf = psi.shape[0]

    doa_idx = doa_grid.quantize(band.doa_vec)
    diff_idx = params.quantize_diffuseness(psi)
    qframes = []
    for t in range(nf):
        qf = params.QuantizedParamFrame(doa_index=doa_idx[t].copy(),
                                        diff_index=diff_idx[t].copy())
        params.apply_doa_zeroing(qf, psi[t])
        qframes.append(qf)
    sparse = params.downsample_params(qframes, band_table)

    # Transport path: time-domain beamforming, frame-wise coding.
    tc = design.A @ pcm
    total = nf * stft.FRAME_SAMPLES
    tc_padded = np.zeros((design.num_sectors, total))
    tc_padded[:, :n] = tc
    tc_coder = transport.make_coder(coder, design.num_sectors, "encode")
    records = []
    try:
        for t in range(nf):
            seg = tc_padded[:, t * stft.FRAME_SAMPLES:
                            (t + 1) * stft.FRAME_SAMPLES]
            tc_payload = tc_coder.encode_frame(seg)
            md_payload = entropy.entropy_encode(
                params.serialize_param_frame(sparse[t]))
            records.append(bitstream.FrameRecord(index=t,
                                                 tc_payload=tc_payload,
                                                 md_payload=md_payload))
    finally:
        tc_coder.close()

    header = bitstream.StreamHeader(
        order=order, num_sectors=design.num_sectors,
        n_tilde=design.n_tilde, sector_grid_id=design.grid_id,
        sector_dirs=np.asarray(design.dirs, dtype=float),
        band_edges=band_table.edges, band_downsample=band_table.downsample,
        coder=coder, sample_rate=sample_rate, num_samples=n)
    return header, records


def encode_with_tier(pcm, sample_rate, tier="high", coder_kind=None,
                     coder_bits=16, coder_command=""):
    """Encode using one of the named tier presets."""
    preset = TIER_PRESETS[tier]
    kind = coder_kind or transport.KIND_PASSTHROUGH
    coder = transport.CoderSpec(kind=kind,
                                kbps_per_channel=preset.kbps_per_channel,
                                bits=coder_bits, command=coder_command)
    table = params.default_band_table(downsample=preset.downsample)
    return encode(pcm, sample_rate, num_sectors=preset.num_sectors,
                  coder=coder, band_table=table)


def _dequantize_frames(qframes, header, doa_grid):
    """Expand quantized frames into psi, DoA vectors, and validity masks."""
    nf = len(qframes)
    nb = len(header.band_downsample)
    J = header.num_sectors
    psi = np.empty((nf, nb, J))
    doa = np.empty((nf, nb, J, 3))
    valid = np.empty((nf, nb, J), dtype=bool)
    for t, qf in enumerate(qframes):
        psi_t = params.dequantize_diffuseness(
            qf.diff_index, header.diff_bins, header.diff_exp_factor)
        zero = qf.doa_index == 0
        psi[t] = np.where(zero, 1.0, psi_t)
        doa[t] = doa_grid.dequantize(qf.doa_index)
        valid[t] = ~zero
    return psi, doa, valid


class StreamDecoder:
    """Record-at-a-time decoder; feed records in order, then finish().

    Records are validated and unpacked as they arrive (so corruption stops
    the stream at the right frame); the synthesis itself runs in finish(),
    where the transport channels are re-transformed as one continuous
    signal.
    """

    def __init__(self, header, enable_gains=True):
        self.header = header
        self.design = sectors.design_beamformers(
            header.order, header.sector_dirs, header.sector_grid_id)
        self.table = header.band_table()
        self.doa_grid = params.DoaGrid(header.doa_grid_size,
                                       header.doa_grid_id)
        self.tc_coder = transport.make_coder(header.coder,
                                             header.num_sectors, "decode")
        self.synth = synthesis.FrameSynthesizer(self.design, self.table,
                                                enable_gains=enable_gains)
        self._held = None
        self._tc_frames = []
        self._params = []
        self.frames_decoded = 0

    def push(self, record):
        header = self.header
        tc_frame = self.tc_coder.decode_frame(record.tc_payload)
        raw = entropy.entropy_decode(record.md_payload)
        keep = self.table.bands_present(record.index)
        qf = params.parse_param_frame(raw, len(keep), header.num_sectors)
        if self._held is None:
            if len(keep) != self.table.num_bands:
                raise HoacError("first frame does not carry all bands")
            self._held = qf
        else:
            doa = self._held.doa_index.copy()
            diff = self._held.diff_index.copy()
            doa[keep] = qf.doa_index
            diff[keep] = qf.diff_index
            self._held = params.QuantizedParamFrame(doa, diff)
        psi, doa_vec, valid = _dequantize_frames([self._held], header,
                                                 self.doa_grid)
        self._tc_frames.append(tc_frame)
        self._params.append((psi[0], doa_vec[0], valid[0]))
        self.frames_decoded += 1

    def finish(self):
        """Synthesize and return the decoded HOA clip (L, num_samples)."""
        self.tc_coder.close()
        header = self.header
        nf = self.frames_decoded
        n_out = min(header.num_samples, nf * stft.FRAME_SAMPLES)
        L = header.num_channels
        if nf == 0:
            return np.zeros((L, n_out))
        tc = np.concatenate(self._tc_frames, axis=1)
        lat = self.tc_coder.latency
        if lat:
            tc = np.concatenate(
                [tc[:, lat:], np.zeros((tc.shape[0], lat))], axis=1)
        spec = stft.tf_forward(tc)
        out = np.empty(spec.shape[:3] + (L,), dtype=complex)
        for t in range(spec.shape[0]):
            # The transform covers one trailing window beyond the last
            # transport frame; parameters are held for it.
            psi, doa_vec, valid = self._params[min(t, nf - 1)]
            out[t], _ = self.synth.process(spec[t], psi, doa_vec, valid)
        return stft.tf_inverse(out, n_out)


def decode(fp_or_path, enable_gains=True, on_error="raise"):
    """Decode a stream to an HOA clip.

    on_error: 'raise' propagates corruption errors; 'partial' returns
    whatever decoded cleanly as (pcm, header, error).
    """
    header, frames = bitstream.read_stream(fp_or_path)
    dec = StreamDecoder(header, enable_gains=enable_gains)
    error = None
    try:
        for rec in frames:
            dec.push(rec)
    except HoacError as exc:
        if on_error != "partial":
            dec.tc_coder.close()
            raise
        error = exc
    pcm = dec.finish()
    if on_error == "partial":
        return pcm, header, error
    return pcm, header
