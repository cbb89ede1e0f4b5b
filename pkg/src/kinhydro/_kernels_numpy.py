"""Vectorized numpy fallbacks for the ratio-form collision kernels.

Same contracts as _kernels_numba, selected when KINHYDRO_NO_NUMBA=1 or numba
is unavailable.  The pair sums materialize (N, S)-shaped gathers per source
node, so these are intended for small grids (tests, benchmarks, spot checks);
the numba path is the production one.
"""

import numpy as np


def _gather(R, valid, base, w8, corner):
    """Trilinear values for a block of stencils; zero where invalid."""
    out = np.zeros(base.shape, dtype=np.float64)
    if not np.any(valid):
        return out
    b = base[valid]
    acc = np.zeros(b.shape, dtype=np.float64)
    for p in range(8):
        acc += w8[valid, p] * R[b + corner[p]]
    out[valid] = acc
    return out


def _pair_rows(coords, j, n, S, K):
    """Stencil-table rows for displacements coords[:] - coords[j]."""
    d = coords.astype(np.int64) - coords[j].astype(np.int64)
    d_idx = ((d[:, 0] + n - 1) * K + (d[:, 1] + n - 1)) * K + (d[:, 2] + n - 1)
    return d_idx[:, None] * S + np.arange(S)[None, :]


def _valid_block(coords_block, lo, hi):
    return np.all((coords_block >= lo) & (coords_block <= hi), axis=-1)


def collide_core(R, m, coords, n, S, K, kern, lin1, lo1, hi1, w81, lin2, lo2, hi2, w82, corner):
    N = R.shape[0]
    Q = np.zeros(N)
    idx = np.arange(N)
    for j in range(N):
        rows = _pair_rows(coords, j, n, S, K)             # (N, S), i varies
        k = kern[rows].copy()
        k[j, :] = 0.0
        v1 = _valid_block(coords[:, None, :], lo1[rows], hi1[rows])
        v2 = _valid_block(coords[j][None, None, :], lo2[rows], hi2[rows])
        # conservative truncation: terms with any off-lattice stencil dropped
        k[~(v1 & v2)] = 0.0
        live = k != 0.0
        g1 = _gather(R, live, idx[:, None] + lin1[rows], w81[rows], corner)
        g2 = _gather(R, live, j + lin2[rows], w82[rows], corner)
        core = (k * g1 * g2).sum(axis=1) - k.sum(axis=1) * R * R[j]
        Q += m[j] * core
    return Q


def collide_core_batch(R2, m, coords, n, S, K, kern, lin1, lo1, hi1, w81, lin2, lo2, hi2, w82, corner):
    N, C = R2.shape
    Q = np.empty((N, C))
    for c in range(C):
        Q[:, c] = collide_core(
            np.ascontiguousarray(R2[:, c]), m, coords, n, S, K,
            kern, lin1, lo1, hi1, w81, lin2, lo2, hi2, w82, corner,
        )
    return Q


def assemble_weak(m, s_scale, coords, n, S, K, kern, lin1, lo1, hi1, w81, lin2, lo2, hi2, w82, corner, out):
    """Galerkin Dirichlet matrix (see the numba twin for the formula).

    Collects the retained (i<j, s) terms per source node and scatters the
    18x18 rank-1 blocks with np.add.at, chunked to bound memory.
    """
    N = m.shape[0]
    idx = np.arange(N)
    for j in range(N):
        rows = _pair_rows(coords, j, n, S, K)             # (N, S), i varies
        k = kern[rows].copy()
        k[j, :] = 0.0
        k[:j, :] = 0.0                                    # keep i > j only
        v1 = _valid_block(coords[:, None, :], lo1[rows], hi1[rows])
        v2 = _valid_block(coords[j][None, None, :], lo2[rows], hi2[rows])
        k[~(v1 & v2)] = 0.0
        live = np.nonzero(k)
        if live[0].size == 0:
            continue
        ii, ss = live
        q = 0.5 * k[live] * m[ii] * m[j]
        t_idx = np.empty((ii.size, 18), dtype=np.int64)
        t_coef = np.empty((ii.size, 18))
        rr = rows[live]
        t_idx[:, 0] = ii
        t_coef[:, 0] = 1.0
        t_idx[:, 1] = j
        t_coef[:, 1] = 1.0
        for p in range(8):
            t_idx[:, 2 + p] = ii + lin1[rr] + corner[p]
            t_coef[:, 2 + p] = -w81[rr, p]
            t_idx[:, 10 + p] = j + lin2[rr] + corner[p]
            t_coef[:, 10 + p] = -w82[rr, p]
        t_coef /= s_scale[t_idx]
        for a in range(18):
            qa = q * t_coef[:, a]
            for b in range(18):
                np.add.at(out, (t_idx[:, a], t_idx[:, b]), qa * t_coef[:, b])
    return out
