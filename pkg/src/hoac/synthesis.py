# -*- coding: utf-8 -*-
"""Decoder-side scene reconstruction.

Orders up to the recoverable order come straight from the truncated
recovery matrix and are never touched by parameters or gains, so whatever
the transport channels carry exactly is reproduced exactly.  Higher orders
are synthesized from the metadata: per band, a mixing matrix blends the
diffuse re-encoding (full pseudo-inverse) with plane-wave re-encoding at
the decoded directions, weighted by diffuseness.  Per-order gains then
match the synthesized energy to the parametric model's target, limited to
+6 dB.

Frames must be processed in order per stream (matrix and direction
smoothing are stateful); bands within a frame are independent.
"""
import numpy as np

from . import sph
from .stft import FRAME_SAMPLES, SAMPLE_RATE

GAIN_LIMIT = 2.0
MIX_SMOOTH_CURRENT = 2.0 / 3.0
DOA_SMOOTH_TIME_CONST_S = 0.020


def assemble_mixing_matrix(psi, doa_vec, design):
    """Per-band mixing matrices from dequantized parameters.

    Parameters
    ----------
    psi : (num_bands, J) diffuseness in [0, 1]
    doa_vec : (num_bands, J, 3) unit direction vectors
    design : SectorDesign

    Returns
    -------
    M : (num_bands, L, J) real mixing matrices; rows for orders <= n_tilde
        equal the truncated recovery matrix.
    """
    psi = np.asarray(psi, dtype=float)
    doa_vec = np.asarray(doa_vec, dtype=float)
    nb, J = psi.shape
    if J != design.num_sectors or doa_vec.shape != (nb, J, 3):
        raise ValueError("parameter set does not match the sector design")
    L = design.num_channels
    dirs = sph.vec2dir(doa_vec.reshape(-1, 3))
    Y = sph.sh_matrix(dirs, design.order).reshape(nb, J, L)
    M = (design.B_hat[None, :, :] * psi[:, None, :]
         + design.beta_a * np.transpose(Y, (0, 2, 1)) * (1.0 - psi[:, None, :]))
    K = sph.n_channels(design.n_tilde)
    M[:, :K, :] = design.B_check[None, :K, :]
    return M


def smooth_mixing_matrix(m_prev, m_cur,
                         current_weight=MIX_SMOOTH_CURRENT):
    """Non-recursive blend of the current and previous solutions."""
    m_cur = np.asarray(m_cur, dtype=float)
    if m_prev is None:
        return m_cur
    m_prev = np.asarray(m_prev, dtype=float)
    if m_prev.shape != m_cur.shape:
        raise ValueError("mixing matrix shape changed between frames")
    return current_weight * m_cur + (1.0 - current_weight) * m_prev


class DoaSmoother:
    """One-pole low-pass on unit direction vectors, renormalized per step.

    Entries flagged invalid (direction index 0, fully diffuse) bypass the
    filter and leave its state untouched.
    """

    def __init__(self, time_const_s=DOA_SMOOTH_TIME_CONST_S,
                 frame_duration_s=FRAME_SAMPLES / SAMPLE_RATE):
        self.alpha = float(np.exp(-frame_duration_s / time_const_s))
        self.state = None

    def step(self, doa_vec, valid):
        doa_vec = np.asarray(doa_vec, dtype=float)
        valid = np.asarray(valid, dtype=bool)
        if self.state is None:
            self.state = doa_vec.copy()
            return doa_vec.copy()
        blended = self.alpha * self.state + (1.0 - self.alpha) * doa_vec
        norm = np.linalg.norm(blended, axis=-1, keepdims=True)
        # An antipodal step can cancel to zero norm; fall back to the input.
        blended = np.where(norm > 1e-12, blended / np.maximum(norm, 1e-12),
                           doa_vec)
        out = np.where(valid[..., None], blended, doa_vec)
        self.state = np.where(valid[..., None], blended, self.state)
        return out


def compute_order_gains(psi, tc_band_energy, actual, design,
                        gain_limit=GAIN_LIMIT):
    """Per-(band, order) energy matching gains.

    The target spreads the directional part of the sector energies over
    orders like a unit plane wave (2n+1 components each) and the diffuse
    part according to the per-order response of the diffuse re-encoding;
    both are normalized by the pattern-set energy trace(A A^T), which makes
    the target commensurate with energies measured from the decoded
    transport channels.

    Parameters
    ----------
    psi : (num_bands, J)
    tc_band_energy : (num_bands, J)
        Sum of |x_s|^2 over the band's bins and subframes.
    actual : (num_bands, order+1)
        Measured per-order energy of the synthesized frame, same units.
    design : SectorDesign

    Returns
    -------
    g : (num_bands, order+1) gains in (0, gain_limit], exactly 1 for
        orders <= n_tilde and for near-silent bands.
    """
    psi = np.asarray(psi, dtype=float)
    e = np.asarray(tc_band_energy, dtype=float)
    actual = np.asarray(actual, dtype=float)
    nb, J = psi.shape
    N = design.order
    orders = np.arange(N + 1)
    e_dir = np.sum((1.0 - psi) * e, axis=1)
    e_dif = np.sum(psi * e, axis=1)
    target = (e_dir[:, None] * (2 * orders[None, :] + 1)
              + e_dif[:, None] * design.diffuse_order_response[None, :]) \
        / design.trace_aat
    eps = 1e-12 * (np.sum(actual) + 1e-300)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.sqrt(target / actual)
    g = np.minimum(np.where(actual > eps, g, 1.0), gain_limit)
    g[:, :design.n_tilde + 1] = 1.0
    return g


class FrameSynthesizer:
    """Stateful per-frame synthesis: mixing, smoothing, energy matching."""

    def __init__(self, design, table, enable_gains=True):
        self.design = design
        self.table = table
        self.enable_gains = enable_gains
        self.doa_smoother = DoaSmoother()
        self._m_prev = None
        self._per_order = sph.channel_orders(design.order)

    def process(self, tc_spectra, psi, doa_vec, valid):
        """Synthesize one parameter frame of HOA spectra.

        Parameters
        ----------
        tc_spectra : (8, bins, J) complex
        psi, valid : (num_bands, J)
        doa_vec : (num_bands, J, 3)

        Returns
        -------
        out : (8, bins, L) complex HOA spectra
        g : (num_bands, order+1) applied gains
        """
        design = self.design
        doa = self.doa_smoother.step(doa_vec, valid)
        m_cur = assemble_mixing_matrix(psi, doa, design)
        m_used = smooth_mixing_matrix(self._m_prev, m_cur)
        self._m_prev = m_cur

        nsub, nbins, J = tc_spectra.shape
        L = design.num_channels
        out = np.zeros((nsub, nbins, L), dtype=complex)
        nb = self.table.num_bands
        N = design.order
        actual = np.zeros((nb, N + 1))
        tc_energy = np.zeros((nb, J))
        slices = self.table.band_slices()
        for b, sl in enumerate(slices):
            xb = tc_spectra[:, sl, :]
            yb = xb @ m_used[b].T
            out[:, sl, :] = yb
            p2 = np.sum(np.abs(yb) ** 2, axis=(0, 1))
            actual[b] = np.bincount(self._per_order, weights=p2,
                                    minlength=N + 1)
            tc_energy[b] = np.sum(np.abs(xb) ** 2, axis=(0, 1))
        if not self.enable_gains:
            return out, np.ones((nb, N + 1))
        g = compute_order_gains(psi, tc_energy, actual, design)
        gains_per_channel = g[:, self._per_order]
        for b, sl in enumerate(slices):
            out[:, sl, :] *= gains_per_channel[b][None, None, :]
        return out, g
