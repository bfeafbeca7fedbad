# -*- coding: utf-8 -*-
"""Sector beamformer and recovery matrix design.

A sector is an axisymmetric, nonnegative beam pattern steered at one
direction of a near-uniform grid.  The pressure beamformers A extract the
transport channels, the matching velocity beamformers A_xyz extract the
sector-weighted dipole signals used for intensity analysis, and the
truncated pseudo-inverse of A recovers all SH orders up to N_tilde exactly.

All matrices here are computed once per configuration and are immutable
afterwards; instances can be shared freely across threads.
"""
from dataclasses import dataclass, field

import numpy as np

from . import grids, sph

# Singular values below this fraction of sigma_max are treated as zero.
PINV_RCOND = 1e-10


@dataclass(frozen=True)
class SectorDesign:
    """Beamformer set for one (order, sector grid) configuration.

    Attributes
    ----------
    order : int
        HOA order N of the signals the design operates on.
    dirs : (J, 2) np.ndarray
        Sector steering directions.
    grid_id : str
        Construction identifier of the sector grid.
    A : (J, L) np.ndarray
        Pressure beamformer rows (sector patterns of order n_tilde).
    A_xyz : (3J, L) np.ndarray
        Velocity beamformer rows, xyz triplet per sector.
    B_check : (L, J) np.ndarray
        Truncated recovery matrix; rows beyond order n_tilde are zero.
    B_hat : (L, J) np.ndarray
        Full (untruncated) pseudo-inverse of A.
    beta_a : float
        Plane-wave reconstruction factor of the pattern set.
    n_tilde : int
        Largest exactly recoverable order, floor(sqrt(J)) - 1.
    intensity_bias : (J, 3) np.ndarray
        Expected sector intensity per unit energy in an isotropic field;
        points along the sector axis, removed again by the diffuseness
        estimator.
    """
    order: int
    dirs: np.ndarray
    grid_id: str
    A: np.ndarray
    A_xyz: np.ndarray
    B_check: np.ndarray
    B_hat: np.ndarray
    beta_a: float
    n_tilde: int
    intensity_bias: np.ndarray
    trace_aat: float = field(default=0.0)
    diffuse_order_response: np.ndarray = field(default=None)

    @property
    def num_sectors(self):
        return self.A.shape[0]

    @property
    def num_channels(self):
        return self.A.shape[1]


def recoverable_order(num_sectors):
    """N_tilde = floor(sqrt(J)) - 1."""
    return int(np.floor(np.sqrt(num_sectors))) - 1


def design_beamformers(order, dirs, grid_id="custom"):
    """Build the full sector design for `dirs` at HOA order `order`.

    Raises
    ------
    ValueError
        If the sector count exceeds the SH channel count.
    """
    dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
    J = dirs.shape[0]
    L = sph.n_channels(order)
    if J > L:
        raise ValueError("sector count exceeds SH channels "
                         f"(J={J} > L={L})")
    n_tilde = recoverable_order(J)
    P = n_tilde
    alpha = sph.axisymmetric_modal_weights(P)
    Lp = sph.n_channels(P)
    Yp = sph.sh_matrix(dirs, P)
    per_n = sph.channel_orders(P)

    A = np.zeros((J, L))
    A[:, :Lp] = Yp * alpha[per_n]

    A_xyz = _velocity_beamformers(A, dirs, P, order)

    # Truncated recovery: pseudo-inverse of the order-limited analysis.
    K = sph.n_channels(n_tilde)
    B_check = np.zeros((L, J))
    B_check[:K, :] = np.linalg.pinv(A[:, :K], rcond=PINV_RCOND)
    B_hat = np.linalg.pinv(A, rcond=PINV_RCOND)

    # beta_a equalizes order-0 amplitude of the plane-wave synthesis branch,
    # averaged over the sector directions.
    Ysec = sph.sh_matrix(dirs, order)
    pattern_sums = np.sum(A @ Ysec.T, axis=0)
    beta_a = float(1.0 / np.mean(pattern_sums))

    # Expected intensity of an isotropic field per unit sector energy.
    norms = np.sum(A * A, axis=1)
    bias = np.stack([A_xyz[3 * s:3 * s + 3] @ A[s] / norms[s]
                     for s in range(J)])

    ba = B_hat @ A
    per_order = sph.channel_orders(order)
    dor = np.array([np.sum(ba[per_order == n] ** 2)
                    for n in range(order + 1)])

    return SectorDesign(order=order, dirs=dirs, grid_id=grid_id,
                        A=A, A_xyz=A_xyz, B_check=B_check, B_hat=B_hat,
                        beta_a=beta_a, n_tilde=n_tilde,
                        intensity_bias=bias,
                        trace_aat=float(np.sum(A * A)),
                        diffuse_order_response=dor)


def design_for_sector_count(order, num_sectors):
    """Convenience wrapper: grid construction plus beamformer design."""
    dirs, grid_id = grids.sector_grid(num_sectors)
    return design_beamformers(order, dirs, grid_id)


def _velocity_beamformers(A, dirs, pattern_order, order):
    """Sector-weighted dipole patterns, projected exactly onto the SH basis.

    The product of an order-P pattern with a cartesian unit-vector component
    is band-limited to order P+1, so a quadrature of sufficient degree
    recovers its coefficients exactly (up to the signal order, where the
    product has to be truncated).
    """
    J, L = A.shape
    Pv = min(pattern_order + 1, order)
    Lv = sph.n_channels(Pv)
    qdirs, qw = sph.quadrature_grid(pattern_order + Pv + 1)
    Yq_pat = sph.sh_matrix(qdirs, pattern_order)
    Yq_v = sph.sh_matrix(qdirs, Pv)
    U = sph.dir2vec(qdirs)
    Lp = sph.n_channels(pattern_order)
    A_xyz = np.zeros((3 * J, L))
    for s in range(J):
        w_vals = Yq_pat @ A[s, :Lp]
        for i in range(3):
            A_xyz[3 * s + i, :Lv] = Yq_v.T @ (qw * w_vals * U[:, i])
    return A_xyz
