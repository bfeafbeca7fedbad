# -*- coding: utf-8 -*-
"""Parametric higher-order Ambisonics compression codec.

Downmixes an HOA scene into a small set of beamformed transport channels
plus quantized, entropy-coded spatial parameters (direction, diffuseness,
energy per sector and band) and reconstructs the full-order scene by exact
low-order recovery plus parametric high-order synthesis.
"""
from .analysis import SectorParams, beamform, estimate_params, group_bands, \
    median_filter_diffuseness
from .bitstream import FrameRecord, StreamHeader, measure_rates, \
    read_stream, write_stream
from .codec import TIER_PRESETS, TierPreset, StreamDecoder, decode, encode, \
    encode_with_tier
from .entropy import EntropyDecodeError, entropy_decode, entropy_encode
from .errors import CorruptStreamError, FormatError, HoacError, \
    TruncatedStreamError
from .grids import sector_grid
from .metrics import OrderRmseReport, rmse_per_order
from .params import BandTable, DoaGrid, QuantizedParamFrame, \
    apply_doa_zeroing, c_weight, default_band_table, dequantize_diffuseness, \
    downsample_params, parse_param_frame, quantize_diffuseness, quantize_doa, \
    serialize_param_frame, upsample_params
from .scenes import SceneSpec, render_scene
from .sectors import SectorDesign, design_beamformers, \
    design_for_sector_count
from .sph import sh_matrix
from .stft import tf_forward, tf_inverse
from .synthesis import assemble_mixing_matrix, compute_order_gains, \
    smooth_mixing_matrix
from .transport import CoderSpec, TransportCoderError, make_coder
from .wavio import read_wav, write_wav

__version__ = "0.1.0"
