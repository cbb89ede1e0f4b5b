"""Periodic spatial meshes (1-D or 2-D) and spectral helpers.

Fields live on uniform cell layouts over [0, L)^dim with FFT-based
differentiation; velocity fields carry three components regardless of the
spatial dimension (the velocity lattice is always 3-D).
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class SpatialMesh:
    shape: tuple
    lengths: tuple

    def __post_init__(self):
        if len(self.shape) not in (1, 2):
            raise ConfigError("spatial meshes are 1-D or 2-D")
        if len(self.lengths) != len(self.shape):
            raise ConfigError("lengths must match shape")
        if any(l <= 0 for l in self.lengths):
            raise ConfigError("periodic domain lengths must be positive")

    @property
    def dim(self):
        return len(self.shape)

    @property
    def n_cells(self):
        return int(np.prod(self.shape))

    @property
    def cell_volume(self):
        return float(np.prod(self.lengths) / self.n_cells)

    @property
    def volume(self):
        return float(np.prod(self.lengths))

    def axes(self):
        return [np.arange(n) * (l / n) for n, l in zip(self.shape, self.lengths)]

    def coords(self):
        """Meshgrid ('ij') of cell coordinates."""
        return np.meshgrid(*self.axes(), indexing="ij")

    def wavenumbers(self):
        """FFT wavenumber arrays per axis (angular)."""
        return [
            2.0 * np.pi * np.fft.fftfreq(n, d=l / n)
            for n, l in zip(self.shape, self.lengths)
        ]

    def k_vectors(self):
        """Broadcastable wavenumber grids, one per spatial axis."""
        ks = self.wavenumbers()
        if self.dim == 1:
            return [ks[0]]
        return [ks[0][:, None], ks[1][None, :]]


def mesh_1d(n_cells, length=2.0 * np.pi):
    return SpatialMesh(shape=(int(n_cells),), lengths=(float(length),))


def mesh_2d(nx, ny=None, lengths=None):
    ny = nx if ny is None else ny
    lengths = (2.0 * np.pi, 2.0 * np.pi) if lengths is None else lengths
    return SpatialMesh(shape=(int(nx), int(ny)), lengths=tuple(float(l) for l in lengths))


def grad(field, mesh):
    """Spectral gradient; returns a list of arrays, one per spatial axis."""
    fh = np.fft.fftn(field)
    return [np.real(np.fft.ifftn(1j * k * fh)) for k in mesh.k_vectors()]


def divergence(u, mesh):
    """Spectral divergence of the in-plane components of a 3-vector field."""
    out = np.zeros(mesh.shape)
    for ax, k in enumerate(mesh.k_vectors()):
        out += np.real(np.fft.ifftn(1j * k * np.fft.fftn(u[ax])))
    return out


def divergence_norm(u, mesh):
    d = divergence(u, mesh)
    return float(np.sqrt((d**2).mean()))


def solenoidal_project(u, mesh):
    """Leray projection of the in-plane components (out-of-plane untouched)."""
    ks = mesh.k_vectors()
    uh = [np.fft.fftn(u[ax]) for ax in range(mesh.dim)]
    k2 = sum(k**2 for k in ks)
    k2s = np.where(k2 == 0, 1.0, k2)
    dot = sum(k * f for k, f in zip(ks, uh))
    out = u.copy()
    for ax in range(mesh.dim):
        out[ax] = np.real(np.fft.ifftn(uh[ax] - ks[ax] * dot / k2s))
    return out


def spectral_tail_fraction(field, mesh):
    """Energy fraction in the top third of wavenumbers (resolution check)."""
    fh = np.fft.fftn(field)
    power = np.abs(fh) ** 2
    tot = power.sum()
    if tot == 0:
        return 0.0
    ks = mesh.k_vectors()
    kmaxes = [np.abs(k).max() for k in ks]
    tail = sum((np.abs(k) > 2.0 * kmax / 3.0) for k, kmax in zip(ks, kmaxes)) > 0
    return float(power[tail].sum() / tot)


def l2_norm(field, mesh):
    return float(np.sqrt((np.asarray(field) ** 2).mean() * mesh.volume))
