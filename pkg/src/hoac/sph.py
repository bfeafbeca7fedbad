# -*- coding: utf-8 -*-
"""Real spherical harmonics and direction math.

Single convention everywhere: real SH, ACN channel ordering, orthonormal
(N3D) scaling, so that integrating Y_nm * Y_n'm' over the sphere gives the
identity.  Directions are (azimuth, elevation) in radians, azimuth in
[-pi, pi), elevation in [-pi/2, pi/2].
"""
import numpy as np
from scipy.special import sph_harm_y


def n_channels(order):
    """Number of SH channels L = (order+1)**2."""
    return (order + 1) ** 2


def order_of_channels(num_channels):
    """Inverse of :func:`n_channels`; raises if not a perfect square."""
    order = int(round(np.sqrt(num_channels))) - 1
    if n_channels(order) != num_channels:
        raise ValueError(f"{num_channels} channels is not (N+1)^2 for any N")
    return order


def channel_orders(order):
    """Array of length L giving the SH order n of each ACN channel."""
    return np.repeat(np.arange(order + 1),
                     [2 * n + 1 for n in range(order + 1)])


def dir2vec(dirs):
    """Unit vectors (..., 3) from (azimuth, elevation) pairs (..., 2)."""
    dirs = np.asarray(dirs, dtype=float)
    az, el = dirs[..., 0], dirs[..., 1]
    return np.stack((np.cos(el) * np.cos(az),
                     np.cos(el) * np.sin(az),
                     np.sin(el)), axis=-1)


def vec2dir(vecs):
    """(azimuth, elevation) pairs (..., 2) from vectors (..., 3)."""
    vecs = np.asarray(vecs, dtype=float)
    r = np.linalg.norm(vecs, axis=-1)
    az = np.arctan2(vecs[..., 1], vecs[..., 0])
    el = np.arcsin(np.clip(vecs[..., 2] / np.where(r > 0, r, 1.), -1., 1.))
    return np.stack((az, el), axis=-1)


def angle_between(v1, v2):
    """Great-circle angle in radians between unit vectors (broadcasting)."""
    return np.arccos(np.clip(np.sum(v1 * v2, axis=-1), -1., 1.))


def sh_matrix(dirs, order):
    """Real SH matrix evaluated at directions.

    Parameters
    ----------
    dirs : (Q, 2) array_like
        Azimuth/elevation pairs.
    order : int
        Maximum SH order N.

    Returns
    -------
    Y : (Q, (N+1)**2) np.ndarray
        Row q holds Y_nm(dir_q) in ACN order, orthonormal scaling.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
    az = dirs[:, 0]
    zen = np.pi / 2 - dirs[:, 1]
    cols = []
    for n in range(order + 1):
        for m in range(-n, n + 1):
            Y = sph_harm_y(n, abs(m), zen, az)
            if m == 0:
                cols.append(np.real(Y))
            elif m < 0:
                cols.append(np.sqrt(2.) * (-1.) ** m * np.imag(Y))
            else:
                cols.append(np.sqrt(2.) * (-1.) ** m * np.real(Y))
    return np.stack(cols, axis=-1)


def quadrature_grid(order):
    """Gauss-Legendre x uniform-azimuth quadrature grid.

    Exact for spherical polynomials up to degree 2*order+1, which makes it
    the reference quadrature for projecting band-limited patterns.

    Returns
    -------
    dirs : (Q, 2) np.ndarray
    weights : (Q,) np.ndarray
        Weights summing to 4*pi.
    """
    n_rings = order + 1
    n_az = 2 * order + 2
    x, wx = np.polynomial.legendre.leggauss(n_rings)
    el = np.arcsin(x)
    az = 2 * np.pi * np.arange(n_az) / n_az
    AZ, EL = np.meshgrid(az, el)
    dirs = np.stack((AZ.ravel(), EL.ravel()), axis=-1)
    weights = np.repeat(wx * 2 * np.pi / n_az, n_az)
    return dirs, weights


def axisymmetric_modal_weights(pattern_order):
    """Steering coefficients of the order-P in-phase (cardioid-family) pattern.

    The pattern w(g) = ((1 + cos g) / 2)**P is nonnegative everywhere, which
    keeps the analysis beams free of sign-flipped sidelobes.  Returned are
    per-order factors alpha_n such that the SH coefficients of the pattern
    steered at direction d are alpha_n * Y_nm(d).
    """
    P = int(pattern_order)
    if P < 0:
        raise ValueError("pattern order must be >= 0")
    x, wq = np.polynomial.legendre.leggauss(2 * P + 2)
    w = ((1. + x) / 2.) ** P
    alpha = np.empty(P + 1)
    for n in range(P + 1):
        Pn = np.polynomial.legendre.Legendre.basis(n)(x)
        bn = (2 * n + 1) / 2. * np.sum(wq * w * Pn)
        alpha[n] = 4 * np.pi * bn / (2 * n + 1)
    return alpha
