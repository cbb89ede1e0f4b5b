"""Velocity-space discretization: lattice, sphere rules, Maxwellians, moments,
collision invariants, entropy functionals.

The velocity grid is a uniform cube lattice on [-v_max, v_max]^3 with midpoint
weights h^3.  A uniform lattice (rather than Gauss-Hermite nodes) is used so
post-collision velocities, which fall off-node, admit cheap trilinear
interpolation.  Unit-sphere quadrature comes from the classical octahedrally
symmetric rules with 6, 14 or 26 points; all three are symmetric under
omega -> -omega and under coordinate permutations, which the collision
symmetries rely on.

Everything here is value-semantic and reentrant: grids are immutable after
construction, and no operation mutates its input slices.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    ConfigError,
    DegenerateStateError,
    IllConditionedGridError,
    NegativeValueError,
)

SPHERE_ORDERS = (6, 14, 26)

_INV_COUNT = 5  # 1, v1, v2, v3, |v|^2


def sphere_rule(order):
    """Octahedral quadrature on S^2: returns (points, weights), sum w = 4 pi.

    order 6:  octahedron vertices            (exact to degree 3)
    order 14: vertices + cube corners        (exact to degree 5)
    order 26: vertices + edge midpoints + cube corners (exact to degree 7)
    """
    if order not in SPHERE_ORDERS:
        raise ConfigError(f"sphere_order must be one of {SPHERE_ORDERS}, got {order}")
    pts = []
    wts = []

    def vertices(w):
        for ax in range(3):
            for s in (1.0, -1.0):
                e = np.zeros(3)
                e[ax] = s
                pts.append(e)
                wts.append(w)

    def edges(w):
        for a in range(3):
            for b in range(a + 1, 3):
                for sa in (1.0, -1.0):
                    for sb in (1.0, -1.0):
                        e = np.zeros(3)
                        e[a] = sa
                        e[b] = sb
                        pts.append(e / np.sqrt(2.0))
                        wts.append(w)

    def corners(w):
        for sx in (1.0, -1.0):
            for sy in (1.0, -1.0):
                for sz in (1.0, -1.0):
                    pts.append(np.array([sx, sy, sz]) / np.sqrt(3.0))
                    wts.append(w)

    if order == 6:
        vertices(1.0 / 6.0)
    elif order == 14:
        vertices(1.0 / 15.0)
        corners(3.0 / 40.0)
    else:
        vertices(1.0 / 21.0)
        edges(4.0 / 105.0)
        corners(9.0 / 280.0)
    return np.asarray(pts), np.asarray(wts) * 4.0 * np.pi


class Representation(Enum):
    ABSOLUTE = "absolute"
    FLUCTUATION = "fluctuation"


@dataclass(frozen=True)
class VelocityGrid:
    """Truncated uniform velocity lattice with quadrature weights.

    nodes form an n^3 lattice with spacing h = 2 v_max / (n - 1), symmetric
    under v -> -v and coordinate permutations; `weight` is the midpoint cell
    weight h^3 shared by every node.
    """

    n_per_axis: int
    v_max: float
    sphere_order: int
    axis: np.ndarray = field(repr=False)
    nodes: np.ndarray = field(repr=False)       # (N, 3)
    weight: float
    sphere_nodes: np.ndarray = field(repr=False)    # (S, 3)
    sphere_weights: np.ndarray = field(repr=False)  # (S,)

    @property
    def h(self):
        return 2.0 * self.v_max / (self.n_per_axis - 1)

    @property
    def size(self):
        return self.n_per_axis**3

    def signature(self):
        return (self.n_per_axis, float(self.v_max), self.sphere_order)

    # cached derived arrays ------------------------------------------------
    def _cache(self):
        d = self.__dict__.get("_derived")
        if d is None:
            sq = np.einsum("ij,ij->i", self.nodes, self.nodes)
            m = np.exp(-0.5 * sq) / (2.0 * np.pi) ** 1.5
            inv = np.empty((_INV_COUNT, self.size))
            inv[0] = 1.0
            inv[1:4] = self.nodes.T
            inv[4] = sq
            d = {"vsq": sq, "maxwellian": m, "invariants": inv}
            object.__setattr__(self, "_derived", d)
        return d

    @property
    def vsq(self):
        return self._cache()["vsq"]

    @property
    def maxwellian_values(self):
        """Centered unit Maxwellian M = M_(1,0,1) on the nodes."""
        return self._cache()["maxwellian"]

    @property
    def invariants(self):
        """Rows 1, v1, v2, v3, |v|^2 evaluated on nodes, shape (5, N)."""
        return self._cache()["invariants"]

    def reflect_index(self):
        """Permutation mapping each node to its v -> -v partner."""
        n = self.n_per_axis
        idx = np.arange(self.size).reshape(n, n, n)
        return idx[::-1, ::-1, ::-1].reshape(-1)


def build_grid(n_per_axis, v_max, sphere_order=6):
    """Construct the velocity lattice plus sphere rule.

    n_per_axis >= 4; v_max > 0 (>= 4 recommended so the unit Maxwellian's
    tail mass beyond the box is negligible).
    """
    if not isinstance(n_per_axis, (int, np.integer)) or n_per_axis < 4:
        raise ConfigError(f"n_per_axis must be an integer >= 4, got {n_per_axis}")
    if not v_max > 0:
        raise ConfigError(f"v_max must be positive, got {v_max}")
    axis = np.linspace(-v_max, v_max, n_per_axis)
    X, Y, Z = np.meshgrid(axis, axis, axis, indexing="ij")
    nodes = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
    h = 2.0 * v_max / (n_per_axis - 1)
    pts, wts = sphere_rule(sphere_order)
    grid = VelocityGrid(
        n_per_axis=int(n_per_axis),
        v_max=float(v_max),
        sphere_order=int(sphere_order),
        axis=axis,
        nodes=nodes,
        weight=float(h**3),
        sphere_nodes=pts,
        sphere_weights=wts,
    )
    assert abs(wts.sum() / (4 * np.pi) - 1.0) < 1e-12
    return grid


@dataclass
class DistributionSlice:
    """Kinetic state at one spatial point.

    Absolute slices store F itself; fluctuation slices store g where
    F = M (1 + delta g).
    """

    values: np.ndarray
    representation: Representation = Representation.ABSOLUTE
    delta: float | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if not np.all(np.isfinite(self.values)):
            raise NegativeValueError("slice contains non-finite entries")
        if self.representation is Representation.FLUCTUATION and self.delta is None:
            raise ConfigError("fluctuation slices require delta")

    def to_absolute(self, grid):
        if self.representation is Representation.ABSOLUTE:
            return self
        f = grid.maxwellian_values * (1.0 + self.delta * self.values)
        return DistributionSlice(f, Representation.ABSOLUTE)


@dataclass
class MomentSet:
    rho: float
    u: np.ndarray
    theta: float
    energy_flux: np.ndarray
    stress: np.ndarray

    @property
    def sound_speed(self):
        """c = sqrt(5 theta / 3)."""
        return np.sqrt(5.0 * self.theta / 3.0)


@dataclass
class EntropyReport:
    h_rel: float
    production: float
    time: float
    production_within_tol: bool = True


def maxwellian(rho, u, theta, grid):
    """Absolute slice of M_(rho,u,theta) evaluated on the grid nodes."""
    if rho <= 0 or theta <= 0:
        raise ConfigError(f"maxwellian requires rho, theta > 0, got {rho}, {theta}")
    u = np.asarray(u, dtype=np.float64).reshape(3)
    d = grid.nodes - u
    f = rho / (2.0 * np.pi * theta) ** 1.5 * np.exp(-np.einsum("ij,ij->i", d, d) / (2.0 * theta))
    return DistributionSlice(f, Representation.ABSOLUTE)


def infinitesimal_maxwellian(rho, u, theta, grid):
    """Fluctuation slice g = rho + u.v + theta (|v|^2 - 3)/2 (delta-free shape)."""
    u = np.asarray(u, dtype=np.float64).reshape(3)
    g = rho + grid.nodes @ u + theta * 0.5 * (grid.vsq - 3.0)
    return DistributionSlice(g, Representation.FLUCTUATION, delta=0.0)


def moments(slc, grid):
    """Discrete moments of an absolute slice (fluctuations are first mapped
    to F = M(1 + delta g)).

    rho = sum w F, u = sum w v F / rho, theta = sum w |v-u|^2 F / (3 rho),
    stress = sum w v (x) v F, energy_flux = sum w (|v|^2/2) v F.
    """
    f = slc.to_absolute(grid).values
    w = grid.weight
    rho = w * f.sum()
    if rho <= 0:
        raise DegenerateStateError(f"nonpositive discrete mass {rho}")
    u = w * (grid.nodes.T @ f) / rho
    d = grid.nodes - u
    theta = w * np.einsum("ij,ij,i->", d, d, f) / (3.0 * rho)
    stress = w * np.einsum("ia,ib,i->ab", grid.nodes, grid.nodes, f)
    eflux = w * 0.5 * (grid.nodes.T @ (grid.vsq * f))
    return MomentSet(rho=rho, u=u, theta=theta, energy_flux=eflux, stress=stress)


def relative_entropy(f_slice, g_slice, grid, negative_tol=1e-12):
    """H(F|G) = sum w (F ln(F/G) - F + G); integrand taken as G where F = 0.

    G must be positive everywhere.  F entries below -negative_tol * max|F|
    raise NegativeValueError listing the offending nodes.
    """
    f = f_slice.to_absolute(grid).values
    g = g_slice.to_absolute(grid).values
    if np.any(g <= 0):
        raise ConfigError("relative_entropy reference must be positive at all nodes")
    scale = np.abs(f).max()
    bad = np.nonzero(f < -negative_tol * max(scale, 1e-300))[0]
    if bad.size:
        raise NegativeValueError(
            f"{bad.size} negative entries beyond tolerance in F", nodes=bad.tolist()
        )
    fp = np.maximum(f, 0.0)
    integrand = np.where(fp > 0, fp * np.log(np.maximum(fp, 1e-300) / g) - fp + g, g)
    return grid.weight * integrand.sum()


class InvariantProjector:
    """Orthogonal projector onto span{1, v, |v|^2} in the M-weighted inner
    product <phi, psi> = sum w phi psi M."""

    def __init__(self, grid, weight_values=None):
        self.grid = grid
        m = grid.maxwellian_values if weight_values is None else weight_values
        self.measure = grid.weight * m
        basis = grid.invariants
        gram = basis @ (self.measure[None, :] * basis).T
        cond = np.linalg.cond(gram)
        if cond > 1e12:
            raise IllConditionedGridError(
                f"invariant Gram matrix condition number {cond:.3e} > 1e12"
            )
        self.basis = basis
        self.gram_inv = np.linalg.inv(gram)

    def coefficients(self, phi):
        return self.gram_inv @ (self.basis @ (self.measure * phi))

    def __call__(self, phi):
        phi = np.asarray(phi, dtype=np.float64)
        return self.basis.T @ self.coefficients(phi)

    def complement(self, phi):
        return phi - self(phi)


def invariant_projector(grid):
    return InvariantProjector(grid)
