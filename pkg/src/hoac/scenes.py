# -*- coding: utf-8 -*-
"""Synthetic HOA test scenes.

Scenes are described by a small declarative config (YAML or JSON): point
sources with a signal kind and either a static direction or an orbit
trajectory, plus an optional isotropic diffuse field built from uncorrelated
plane waves on a deterministic near-uniform grid.  Rendering is fully
deterministic given the seed.

Example config::

    duration: 2.0
    seed: 7
    sources:
      - kind: sine
        freq: 1000
        gain_db: 0
        azimuth_deg: 30
        elevation_deg: 10
      - kind: noise
        gain_db: -6
        path: {type: orbit, rate_dps: 90, elevation_deg: 0, start_deg: -45}
    diffuse:
      waves: 64
      level_db: -10
"""
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import grids, sph, stft

SOURCE_KINDS = ("sine", "noise", "am_noise")


@dataclass(frozen=True)
class OrbitPath:
    """Constant-elevation azimuth sweep."""
    rate_dps: float
    elevation_deg: float = 0.0
    start_deg: float = 0.0


@dataclass(frozen=True)
class SourceSpec:
    kind: str = "noise"
    gain_db: float = 0.0
    azimuth_deg: float = 0.0
    elevation_deg: float = 0.0
    freq: float = 1000.0
    am_rate_hz: float = 4.0
    path: OrbitPath = None

    def __post_init__(self):
        if self.kind not in SOURCE_KINDS:
            raise ValueError(f"unknown source kind {self.kind!r}")


@dataclass(frozen=True)
class DiffuseSpec:
    waves: int = 64
    level_db: float = -10.0

    def __post_init__(self):
        if self.waves < 1:
            raise ValueError("need at least one diffuse plane wave")


@dataclass(frozen=True)
class SceneSpec:
    duration: float = 1.0
    seed: int = 0
    sources: tuple = field(default_factory=tuple)
    diffuse: DiffuseSpec = None

    @staticmethod
    def from_dict(cfg):
        sources = []
        for s in cfg.get("sources", []) or []:
            s = dict(s)
            path = s.pop("path", None)
            if path is not None:
                path = dict(path)
                if path.pop("type", "orbit") != "orbit":
                    raise ValueError("unknown path type")
                path = OrbitPath(**path)
            sources.append(SourceSpec(path=path, **s))
        diffuse = cfg.get("diffuse")
        if diffuse is not None:
            diffuse = DiffuseSpec(**diffuse)
        return SceneSpec(duration=float(cfg.get("duration", 1.0)),
                         seed=int(cfg.get("seed", 0)),
                         sources=tuple(sources), diffuse=diffuse)

    @staticmethod
    def from_file(path):
        with open(path, "r", encoding="utf-8") as fp:
            cfg = yaml.safe_load(fp)
        if not isinstance(cfg, dict):
            raise ValueError("scene config must be a mapping")
        return SceneSpec.from_dict(cfg)


def _source_signal(src, n, rng, sample_rate):
    t = np.arange(n) / sample_rate
    gain = 10.0 ** (src.gain_db / 20.0)
    if src.kind == "sine":
        return gain * np.sin(2 * np.pi * src.freq * t)
    noise = rng.standard_normal(n)
    if src.kind == "noise":
        return gain * noise
    am = 0.5 + 0.5 * np.sin(2 * np.pi * src.am_rate_hz * t)
    return gain * noise * am


def _source_directions(src, n, sample_rate):
    """Per-anchor directions, one anchor per STFT hop plus the end point."""
    n_anchor = n // stft.HOP + 2
    t = np.arange(n_anchor) * stft.HOP / sample_rate
    if src.path is None:
        az = np.full(n_anchor, np.radians(src.azimuth_deg))
        el = np.full(n_anchor, np.radians(src.elevation_deg))
    else:
        az = np.radians(src.path.start_deg + src.path.rate_dps * t)
        el = np.full(n_anchor, np.radians(src.path.elevation_deg))
    return np.stack((az, el), axis=-1)


def render_scene(spec, order, sample_rate=stft.SAMPLE_RATE):
    """Render a scene spec to an (L, n) HOA clip (ACN/N3D)."""
    n = int(round(spec.duration * sample_rate))
    L = sph.n_channels(order)
    rng = np.random.default_rng(spec.seed)
    out = np.zeros((L, n))
    for src in spec.sources:
        sig = _source_signal(src, n, rng, sample_rate)
        dirs = _source_directions(src, n, sample_rate)
        Y = sph.sh_matrix(dirs, order)  # (anchors, L)
        if src.path is None:
            out += Y[0][:, None] * sig[None, :]
        else:
            # Linear interpolation of the SH coefficients between hop
            # anchors keeps moving sources zipper-free.
            anchor_pos = np.arange(Y.shape[0]) * stft.HOP
            yt = np.empty((L, n))
            for c in range(L):
                yt[c] = np.interp(np.arange(n), anchor_pos, Y[:, c])
            out += yt * sig[None, :]
    if spec.diffuse is not None:
        K = spec.diffuse.waves
        level = 10.0 ** (spec.diffuse.level_db / 20.0)
        wave_dirs = sph.vec2dir(grids.fibonacci(K))
        Yk = sph.sh_matrix(wave_dirs, order)
        sigs = rng.standard_normal((K, n)) * (level / np.sqrt(K))
        out += Yk.T @ sigs
    return out
