# -*- coding: utf-8 -*-
"""Encoder-side directional analysis.

Beamforms the HOA spectra into sector pressure and velocity signals and
estimates per-sector energy, active intensity, direction of arrival, and
diffuseness.  Estimates are formed per STFT bin over one parameter frame
(rectangular mean over its 8 subframes) and can then be grouped into
perceptual bands with C-weighting.

The plain intensity-to-energy ratio of a windowed sector is biased: even a
perfectly isotropic field leaves a net intensity along the sector axis,
because the window itself is directional.  The estimator removes that known
design-dependent component by solving

    || i - psi * mu_s || = 1 - psi,        i = I / E,

for psi, where mu_s is the sector's isotropic intensity signature
(`SectorDesign.intensity_bias`).  A single plane wave still yields psi = 0
with an exact direction estimate from any incidence angle, while an
isotropic field converges to psi = 1.

Per-(band, sector) estimation is independent within a frame; only the
temporal median filter requires ordered frames.
"""
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import median_filter

# Degenerate-energy floor, relative to full-scale power.
EPS_ENERGY = 1e-12


@dataclass
class SectorParams:
    """Per (frame, bin-or-band, sector) analysis results.

    energy : (frames, K, J) linear power
    intensity : (frames, K, J, 3) active intensity with the isotropic
        window signature removed; satisfies ||I|| = (1 - psi) * E
    psi : (frames, K, J) diffuseness in [0, 1]
    doa_vec : (frames, K, J, 3) unit direction vectors, I / ||I||
    raw_intensity : (frames, K, J, 3) windowed mean of Re{p* v} before the
        signature removal; this is what band grouping aggregates
    """
    energy: np.ndarray
    intensity: np.ndarray
    psi: np.ndarray
    doa_vec: np.ndarray
    raw_intensity: np.ndarray


def beamform(frames, design):
    """Extract transport-channel and velocity spectra from HOA spectra.

    Parameters
    ----------
    frames : (nf, 8, bins, L) complex array from :func:`hoac.stft.tf_forward`
    design : SectorDesign

    Returns
    -------
    pressure : (nf, 8, bins, J) complex
    velocity : (nf, 8, bins, J, 3) complex
    """
    frames = np.asarray(frames)
    L = design.num_channels
    if frames.shape[-1] != L:
        raise ValueError(f"frame channel count {frames.shape[-1]} does not "
                         f"match design (L={L})")
    pressure = frames @ design.A.T
    vel = frames @ design.A_xyz.T
    velocity = vel.reshape(frames.shape[:-1] + (design.num_sectors, 3))
    return pressure, velocity


def estimate_params(pressure, velocity, design, eps=EPS_ENERGY):
    """Per-bin sector parameters, averaged over the 8-subframe window."""
    inten = np.mean(np.real(np.conj(pressure)[..., None] * velocity), axis=1)
    energy = np.mean(0.5 * (np.abs(pressure) ** 2
                            + np.sum(np.abs(velocity) ** 2, axis=-1)), axis=1)
    return _finalize_params(inten, energy, design, eps)


def _finalize_params(inten, energy, design, eps=EPS_ENERGY):
    """Debiased diffuseness, corrected intensity, and DoA from raw moments."""
    mu = design.intensity_bias
    e_safe = np.maximum(energy, eps)
    i_norm = inten / e_safe[..., None]
    psi = _solve_diffuseness(i_norm, mu)
    degenerate = energy <= eps
    psi = np.where(degenerate, 1.0, psi)
    i_corr = inten - psi[..., None] * mu * energy[..., None]
    i_corr = np.where(degenerate[..., None], 0.0, i_corr)
    doa = _safe_normalize(i_corr)
    return SectorParams(energy=energy, intensity=i_corr, psi=psi,
                        doa_vec=doa, raw_intensity=inten)


def _solve_diffuseness(i_norm, mu):
    """Smaller root of ||i - psi*mu|| = 1 - psi, clipped to [0, 1]."""
    a = np.sum(mu * mu, axis=-1) - 1.0
    b = 2.0 - 2.0 * np.sum(i_norm * mu, axis=-1)
    c = np.sum(i_norm * i_norm, axis=-1) - 1.0
    disc = b * b - 4.0 * a * c
    root = (-b + np.sqrt(np.maximum(disc, 0.0))) / (2.0 * a)
    return np.clip(root, 0.0, 1.0)


def _safe_normalize(vecs):
    n = np.linalg.norm(vecs, axis=-1, keepdims=True)
    out = np.divide(vecs, n, out=np.zeros_like(vecs), where=n > 0)
    # Degenerate entries get a fixed placeholder direction (+x).
    out[..., 0] = np.where(n[..., 0] > 0, out[..., 0], 1.0)
    return out


def group_bands(bin_params, table, bin_weights, design, eps=EPS_ENERGY):
    """Aggregate per-bin parameters into perceptual bands.

    Intensity and energy are summed with squared C-weights before the
    direction and diffuseness are re-derived, so the band values follow the
    same estimator as the bin values.

    Parameters
    ----------
    bin_params : SectorParams with K = number of STFT bins
    table : BandTable
    bin_weights : (bins,) per-bin weights (C-weighting curve)
    design : SectorDesign
    """
    w2 = np.square(np.asarray(bin_weights, dtype=float))
    slices = table.band_slices()
    nb = table.num_bands
    nf, _, J = bin_params.energy.shape
    inten = np.empty((nf, nb, J, 3))
    energy = np.empty((nf, nb, J))
    for bi, sl in enumerate(slices):
        wb = w2[sl]
        inten[:, bi] = np.einsum('k,fkjc->fjc', wb,
                                 bin_params.raw_intensity[:, sl])
        energy[:, bi] = np.einsum('k,fkj->fj', wb, bin_params.energy[:, sl])
    return _finalize_params(inten, energy, design, eps)


def median_filter_diffuseness(psi):
    """Order-3 temporal median per (band, sector); edges replicate."""
    psi = np.asarray(psi, dtype=float)
    if psi.shape[0] == 0:
        return psi.copy()
    size = (3,) + (1,) * (psi.ndim - 1)
    return median_filter(psi, size=size, mode="nearest")
