"""Nonlinear hard-sphere collision integral, entropy production, and the
conservative projection fixup.

The collision sum transcribes the dimensionless hard-sphere integral: for
every pair of lattice nodes and every sphere node, post-collision values are
read by trilinear interpolation (zero off-lattice), weighted by
h^3 * w_omega * |(v - v_*) . omega|.  The quadrature works on the ratio
R = F / M: since |v'|^2 + |v'_*|^2 = |v|^2 + |v_*|^2 holds exactly for the
analytic post-collision velocities, the Gaussian prefactors factor out as
exact node values M_i M_j and only the smooth ratio is ever interpolated.
The centered Maxwellian is then a discrete equilibrium to near machine
precision at every sphere order.

Discretization still breaks the invariant moments of generic states, so
outputs pass through conservative_fixup, which projects out the five
invariant components in the unweighted discrete inner product and reports
the correction size.

Workspaces cache the stencil tables and the fixup Gram factors for one grid;
they are single-owner (create one per worker / thread).
"""

import numpy as np

from . import accel
from ._stencils import build_stencil_tables, node_coords
from .errors import ConfigError, InstabilityError, NegativeValueError
from .velocity import (
    DistributionSlice,
    EntropyReport,
    Representation,
    maxwellian,
    moments,
    relative_entropy,
)

if accel.USE_NUMBA:
    from . import _kernels_numba as _kern
else:
    from . import _kernels_numpy as _kern


class CollisionWorkspace:
    """Stencil cache plus conservation-correction factors, bound to one grid."""

    def __init__(self, grid):
        self.grid = grid
        t = build_stencil_tables(grid)
        self.tables = t
        self.coords = node_coords(grid.n_per_axis)
        self._args = (
            self.coords, t["n"], t["S"], t["K"],
            t["kern"], t["lin1"], t["lo1"], t["hi1"], t["w81"],
            t["lin2"], t["lo2"], t["hi2"], t["w82"], t["corner_lin"],
        )
        basis = grid.invariants                      # (5, N)
        self._fixup_basis = basis
        wm = grid.weight * grid.maxwellian_values
        gram_m = basis @ (wm[None, :] * basis).T
        self._fixup_gram_m_cho = np.linalg.cholesky(gram_m)
        self._fixup_measure = wm
        self.last_fixup_norm = 0.0

    def core_values(self, r_values):
        """Ratio-form collision core on one slice of R = F/M values."""
        r = np.ascontiguousarray(r_values, dtype=np.float64)
        return _kern.collide_core(r, self.grid.maxwellian_values, *self._args)

    def core_batch(self, r_matrix):
        """Collision core column-wise on an (N, cells) ratio matrix."""
        r = np.ascontiguousarray(r_matrix, dtype=np.float64)
        return _kern.collide_core_batch(r, self.grid.maxwellian_values, *self._args)

    def raw_collide_values(self, f_values):
        """C(F, F) node values before any conservation correction."""
        m = self.grid.maxwellian_values
        return m * self.core_values(np.asarray(f_values, dtype=np.float64) / m)

    def fixup_values(self, q_values):
        """Zero the five invariant moments of an absolute collision output.

        The correction lives in span{M psi_a} (Maxwellian-shaped invariant
        directions), so it vanishes in the tails where the distribution
        itself vanishes instead of pushing weightless nodes negative; the
        conserved moments sum w psi_a Q are zeroed exactly either way.
        Returns (corrected, correction_norm) with the L2 function norm of
        the removed component.
        """
        q = np.asarray(q_values, dtype=np.float64)
        basis = self._fixup_basis
        m = self.grid.maxwellian_values
        rhs = self.grid.weight * (basis @ q)       # (5,) or (5, cells)
        c = np.linalg.solve(self._fixup_gram_m_cho.T,
                            np.linalg.solve(self._fixup_gram_m_cho, rhs))
        corr = basis.T @ c
        corr = (m[:, None] * corr) if q.ndim > 1 else m * corr
        norm = float(np.sqrt(self.grid.weight) * np.linalg.norm(corr))
        return q - corr, norm

    def fixup_fluctuation(self, q_values):
        """Conservation correction in fluctuation space: remove the invariant
        component in the M-weighted inner product (the <.>-bracket moments),
        which keeps the correction a bounded polynomial instead of the
        1/M-amplified image of the absolute-space projection.

        Returns (corrected, correction_norm) with the norm M-weighted.
        """
        q = np.asarray(q_values, dtype=np.float64)
        basis = self._fixup_basis
        rhs = basis @ (self._fixup_measure[:, None] * q if q.ndim > 1
                       else self._fixup_measure * q)
        c = np.linalg.solve(self._fixup_gram_m_cho.T,
                            np.linalg.solve(self._fixup_gram_m_cho, rhs))
        corr = basis.T @ c
        wnorm = float(np.sqrt((self._fixup_measure * (corr.T**2 if q.ndim > 1 else corr**2)).sum()))
        return q - corr, wnorm


def conservative_fixup(q_slice, ws):
    """Projection fixup on a collision-output slice; correction logged on ws."""
    fixed, norm = ws.fixup_values(np.asarray(q_slice.values if isinstance(q_slice, DistributionSlice) else q_slice))
    ws.last_fixup_norm = norm
    return DistributionSlice(fixed, Representation.ABSOLUTE)


def collide(f_slice, ws, fixup=True):
    """Collision integral C(F) of an absolute slice, conservation-corrected.

    With fixup=False the raw quadrature is returned (exactly bilinear in F,
    so collide(a F) = a^2 collide(F) holds to roundoff).
    """
    if f_slice.representation is not Representation.ABSOLUTE:
        raise ConfigError("collide expects an Absolute slice; convert fluctuations first")
    q = ws.raw_collide_values(f_slice.values)
    if fixup:
        fixed, norm = ws.fixup_values(q)
        ws.last_fixup_norm = norm
        q = fixed
    return DistributionSlice(q, Representation.ABSOLUTE)


def entropy_production(f_slice, ws, q_slice=None):
    """- sum w C(F) ln F; nonnegative in the continuum (H theorem).

    F must be positive at every node.  A precomputed C(F) slice may be passed
    to avoid recomputing the quadrature.
    """
    f = f_slice.to_absolute(ws.grid).values
    if np.any(f <= 0.0):
        raise NegativeValueError("entropy_production requires F > 0 at all nodes")
    q = q_slice.values if q_slice is not None else collide(f_slice, ws).values
    return -ws.grid.weight * float(q @ np.log(f))


def collision_frequency_estimate(f_slice, ws):
    """nu_hat = 4 pi rho <|v - v_*|>, with the mean relative speed evaluated
    from current moments as 4 sqrt(theta/pi).  Heuristic stability scale."""
    mom = moments(f_slice, ws.grid)
    return 4.0 * np.pi * mom.rho * 4.0 * np.sqrt(mom.theta / np.pi)


def relax_homogeneous(f0, dt, t_final, ws, record_every=1):
    """Space-homogeneous relaxation d/dt F = C(F) by explicit RK2 (midpoint).

    Returns a list of (slice, EntropyReport) samples, one per recorded step
    (the initial state is recorded as time 0).  Entropy is measured against
    the Maxwellian with the conserved initial moments.
    """
    if dt <= 0:
        raise ConfigError("dt must be positive")
    nu_hat = collision_frequency_estimate(f0, ws)
    # RK2 real-axis stability reaches |z| = 2; keep a 25% margin
    if dt * nu_hat > 1.5:
        raise ConfigError(
            f"dt {dt} too large for estimated collision frequency {nu_hat:.3g}; "
            f"need dt <= {1.5 / nu_hat:.3g}"
        )
    mom0 = moments(f0, ws.grid)
    m_eq = maxwellian(mom0.rho, mom0.u, mom0.theta, ws.grid)
    n_steps = int(round(t_final / dt))

    f = f0.values.copy()
    out = []

    def record(t, fv):
        slc = DistributionSlice(fv.copy(), Representation.ABSOLUTE)
        q, _ = ws.fixup_values(ws.raw_collide_values(fv))
        prod = -ws.grid.weight * float(q @ np.log(np.maximum(fv, 1e-300)))
        h = relative_entropy(slc, m_eq, ws.grid, negative_tol=1e-8)
        out.append((slc, EntropyReport(h_rel=h, production=prod, time=t,
                                       production_within_tol=prod >= -1e-8)))

    record(0.0, f)
    floor = -1e-8
    for step in range(1, n_steps + 1):
        q1, _ = ws.fixup_values(ws.raw_collide_values(f))
        mid = f + 0.5 * dt * q1
        q2, _ = ws.fixup_values(ws.raw_collide_values(mid))
        f = f + dt * q2
        if f.min() < floor * max(f.max(), 1e-300):
            raise InstabilityError(
                f"negative values beyond tolerance at t={step * dt:.4g}; reduce dt",
                last_stable_time=(step - 1) * dt,
            )
        if step % record_every == 0 or step == n_steps:
            record(step * dt, f)
    return out
