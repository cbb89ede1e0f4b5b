"""Precomputed collision geometry.

For a uniform lattice the collision kernel and the post-collision
interpolation stencils depend on (v - v_*) only through the integer
displacement d = idx(v) - idx(v_*), so everything is tabulated once per
(displacement, sphere-node) pair:

    v' = v - ((v-v_*).omega) omega = v + delta,     v'_* = v_* - delta.

Both off-node points are evaluated by trilinear interpolation with zero
extension outside the lattice.  Because the sphere rules are symmetric under
omega -> -omega and delta is invariant under that flip, only one node per
antipodal pair is kept, with doubled weight.

Index conventions: lattice nodes are flattened C-order, i = (ix*n + iy)*n + iz.
Displacements use d_idx = ((dx+n-1)*K + (dy+n-1))*K + (dz+n-1), K = 2n-1, and
stencil tables are flattened to rows r = d_idx * S + s.
"""

import numpy as np

_SNAP = 1e-9  # snap near-integer lattice offsets so exact hits stay exact


def half_sphere(points, weights):
    """One representative per antipodal pair, weights doubled."""
    keep = []
    for idx, p in enumerate(points):
        # lexicographic positivity picks one of (p, -p)
        if p[0] > 1e-14 or (abs(p[0]) <= 1e-14 and (p[1] > 1e-14 or (abs(p[1]) <= 1e-14 and p[2] > 0))):
            keep.append(idx)
    return points[keep], 2.0 * weights[keep]


def build_stencil_tables(grid):
    """Tabulate kernel weights and trilinear stencils per (d, sphere node).

    Returns a dict of flat arrays indexed by r = d_idx * S + s:
      kern   (D*S,)    quadrature weight  h^3 * w_omega * |d . omega|
      lin1   (D*S,)    linear offset of the v' base corner relative to i
      lo1/hi1 (D*S,3)  admissible node-coordinate range for in-bounds stencils
      w81    (D*S,8)   trilinear corner weights for v'
      lin2/lo2/hi2/w82 same for v'_* relative to j
    plus 'corner_lin' (8,) and scalars n, S, K.
    """
    n = grid.n_per_axis
    h = grid.h
    K = 2 * n - 1
    omega, w_omega = half_sphere(grid.sphere_nodes, grid.sphere_weights)
    S = len(omega)

    r1 = np.arange(K) - (n - 1)
    DX, DY, DZ = np.meshgrid(r1, r1, r1, indexing="ij")
    d_int = np.stack([DX.ravel(), DY.ravel(), DZ.ravel()], axis=1)  # (D, 3)
    D = d_int.shape[0]

    dots = (d_int * h) @ omega.T                       # (D, S)
    kern = grid.weight * w_omega[None, :] * np.abs(dots)

    # delta in lattice units, per (D, S, 3)
    delta = -(dots / h)[:, :, None] * omega[None, :, :]

    def stencil(offsets):
        base = np.floor(offsets).astype(np.int64)
        t = offsets - base
        snap_hi = t > 1.0 - _SNAP
        base += snap_hi
        t = np.where(snap_hi, 0.0, t)
        t = np.where(t < _SNAP, 0.0, t)
        lo = (-base).astype(np.int32)
        hi = (n - 2 - base).astype(np.int32)
        # exact node hits (t == 0) on either outermost row are treated as
        # off-lattice, symmetrically under v -> -v; their Maxwellian weight
        # is ~exp(-v_max^2/2) and the conservative fixup absorbs the defect
        lo += (t == 0.0)
        wx = np.stack([1.0 - t[..., 0], t[..., 0]], axis=-1)
        wy = np.stack([1.0 - t[..., 1], t[..., 1]], axis=-1)
        wz = np.stack([1.0 - t[..., 2], t[..., 2]], axis=-1)
        w8 = (
            wx[..., :, None, None] * wy[..., None, :, None] * wz[..., None, None, :]
        ).reshape(D, S, 8)
        lin = (base[..., 0] * n + base[..., 1]) * n + base[..., 2]
        return lin, lo, hi, w8

    lin1, lo1, hi1, w81 = stencil(delta)
    lin2, lo2, hi2, w82 = stencil(-delta)

    corner_lin = np.array(
        [(px * n + py) * n + pz for px in (0, 1) for py in (0, 1) for pz in (0, 1)],
        dtype=np.int64,
    )

    flat = lambda a: np.ascontiguousarray(a.reshape(D * S, *a.shape[2:]))
    return {
        "n": n,
        "S": S,
        "K": K,
        "kern": flat(kern),
        "lin1": flat(lin1),
        "lo1": flat(lo1),
        "hi1": flat(hi1),
        "w81": flat(w81),
        "lin2": flat(lin2),
        "lo2": flat(lo2),
        "hi2": flat(hi2),
        "w82": flat(w82),
        "corner_lin": corner_lin,
    }


def node_coords(n):
    """Integer (ix, iy, iz) per flattened node, shape (n^3, 3) int32."""
    r = np.arange(n, dtype=np.int32)
    X, Y, Z = np.meshgrid(r, r, r, indexing="ij")
    return np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
