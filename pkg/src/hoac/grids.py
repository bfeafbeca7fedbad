# -*- coding: utf-8 -*-
"""Deterministic spherical point sets.

Platonic vertex grids where they exist (J = 4, 6, 12), spherical Fibonacci
sets everywhere else.  All constructions are pure functions of their
arguments, so grids are bit-identical across runs and platforms.
"""
import numpy as np

from . import sph

GRID_TETRAHEDRON = "tetrahedron"
GRID_OCTAHEDRON = "octahedron"
GRID_ICOSAHEDRON = "icosahedron"
GRID_FIBONACCI = "fibonacci"


def tetrahedron():
    v = np.array([[1., 1., 1.],
                  [1., -1., -1.],
                  [-1., 1., -1.],
                  [-1., -1., 1.]])
    return v / np.sqrt(3.)


def octahedron():
    return np.array([[1., 0., 0.], [-1., 0., 0.],
                     [0., 1., 0.], [0., -1., 0.],
                     [0., 0., 1.], [0., 0., -1.]])


def icosahedron():
    phi = (1. + np.sqrt(5.)) / 2.
    v = []
    for s1 in (1., -1.):
        for s2 in (1., -1.):
            v.append((0., s1, s2 * phi))
            v.append((s1, s2 * phi, 0.))
            v.append((s2 * phi, 0., s1))
    v = np.asarray(v)
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def fibonacci(num_points):
    """Spherical Fibonacci point set, midpoint offset variant."""
    if num_points < 1:
        raise ValueError("need at least one point")
    i = np.arange(num_points)
    z = 1. - (2. * i + 1.) / num_points
    phi = i * np.pi * (3. - np.sqrt(5.))
    r = np.sqrt(np.maximum(0., 1. - z * z))
    return np.stack((r * np.cos(phi), r * np.sin(phi), z), axis=1)


def sector_grid(num_sectors):
    """Sector steering directions for a given sector count.

    Returns
    -------
    dirs : (J, 2) np.ndarray
        Azimuth/elevation pairs.
    grid_id : str
        Construction identifier, written into stream headers.
    """
    J = int(num_sectors)
    if J < 4:
        raise ValueError("insufficient sectors (need J >= 4)")
    if J == 4:
        return sph.vec2dir(tetrahedron()), GRID_TETRAHEDRON
    if J == 6:
        return sph.vec2dir(octahedron()), GRID_OCTAHEDRON
    if J == 12:
        return sph.vec2dir(icosahedron()), GRID_ICOSAHEDRON
    return sph.vec2dir(fibonacci(J)), GRID_FIBONACCI


def grid_from_id(grid_id, num_points):
    """Rebuild a named grid; used when parsing stream headers."""
    builders = {
        GRID_TETRAHEDRON: lambda n: sph.vec2dir(tetrahedron()),
        GRID_OCTAHEDRON: lambda n: sph.vec2dir(octahedron()),
        GRID_ICOSAHEDRON: lambda n: sph.vec2dir(icosahedron()),
        GRID_FIBONACCI: lambda n: sph.vec2dir(fibonacci(n)),
    }
    if grid_id not in builders:
        raise ValueError(f"unknown grid id {grid_id!r}")
    dirs = builders[grid_id](num_points)
    if len(dirs) != num_points:
        raise ValueError(f"grid {grid_id!r} has {len(dirs)} points, "
                         f"expected {num_points}")
    return dirs


def min_pairwise_angle(vecs):
    """Smallest great-circle angle between any two points, in radians."""
    g = vecs @ vecs.T
    np.fill_diagonal(g, -1.)
    return float(np.arccos(np.clip(g.max(), -1., 1.)))
