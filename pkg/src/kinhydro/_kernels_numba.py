"""Loop kernels for collision sums and operator assembly (numba backend).

All kernels take the flat stencil tables from _stencils.build_stencil_tables
and work on the ratio variable R = F / M:

    core(R)[i] = sum_{j,s} k(d,s) m[j] ( I[R](v') I[R](v'_*) - R_i R_j )

with m the centered-Maxwellian node values and I[.] trilinear interpolation
(zero off-lattice).  Because |v'|^2 + |v'_*|^2 = |v|^2 + |v_*|^2 exactly, the
absolute collision integral is M_i * core(F/M)[i]; the fluctuation-form
quadratic term is core(g)[i] directly.  Interpolation therefore only ever
touches the smooth bounded ratio, never the Gaussian itself.

The pair kernels exploit the (i,j) <-> (j,i) symmetry: the kernel weight and
the gain/loss products coincide, only the m-weight differs.  Assembly is
row-based instead (each output row written by exactly one outer iteration),
which keeps writes local and makes row-parallel execution safe.
"""

import numpy as np

from .accel import njit


@njit(cache=True)
def collide_core(R, m, coords, n, S, K, kern, lin1, lo1, hi1, w81, lin2, lo2, hi2, w82, corner):
    """Ratio-form bilinear collision core on one slice."""
    N = R.shape[0]
    Q = np.zeros(N)
    for i in range(N):
        ix = coords[i, 0]
        iy = coords[i, 1]
        iz = coords[i, 2]
        Ri = R[i]
        mi = m[i]
        for j in range(i + 1, N):
            dx = ix - coords[j, 0] + n - 1
            dy = iy - coords[j, 1] + n - 1
            dz = iz - coords[j, 2] + n - 1
            r0 = ((dx * K + dy) * K + dz) * S
            loss = Ri * R[j]
            acc = 0.0
            for s in range(S):
                r = r0 + s
                k = kern[r]
                if k == 0.0:
                    continue
                # a pair contributes only when both post-collision stencils
                # stay on the lattice (conservative kernel truncation)
                if not (
                    ix >= lo1[r, 0] and ix <= hi1[r, 0]
                    and iy >= lo1[r, 1] and iy <= hi1[r, 1]
                    and iz >= lo1[r, 2] and iz <= hi1[r, 2]
                ):
                    continue
                if not (
                    coords[j, 0] >= lo2[r, 0] and coords[j, 0] <= hi2[r, 0]
                    and coords[j, 1] >= lo2[r, 1] and coords[j, 1] <= hi2[r, 1]
                    and coords[j, 2] >= lo2[r, 2] and coords[j, 2] <= hi2[r, 2]
                ):
                    continue
                g1 = 0.0
                b1 = i + lin1[r]
                for p in range(8):
                    g1 += w81[r, p] * R[b1 + corner[p]]
                g2 = 0.0
                b2 = j + lin2[r]
                for p in range(8):
                    g2 += w82[r, p] * R[b2 + corner[p]]
                acc += k * (g1 * g2 - loss)
            Q[i] += acc * m[j]
            Q[j] += acc * mi
    return Q


@njit(cache=True)
def collide_core_batch(R2, m, coords, n, S, K, kern, lin1, lo1, hi1, w81, lin2, lo2, hi2, w82, corner):
    """Ratio-form collision core applied to every column of R2 (N, C).

    Loops run displacement-outermost so all stencil geometry is hoisted out
    of the node loops: for each lexicographically positive displacement d the
    (i, j = i - d) pairs form a box of nodes.  Each (d, s) term sweeps the
    sub-box where both post-collision stencils are in bounds (pairs whose
    stencils leave the lattice are skipped entirely: conservative kernel
    truncation).  The innermost loop is the contiguous cell axis.
    """
    N, C = R2.shape
    Rf = R2.ravel()
    Q = np.zeros((N, C))
    Qf = Q.ravel()
    nm = n - 1
    for dx in range(-nm, nm + 1):
        for dy in range(-nm, nm + 1):
            for dz in range(-nm, nm + 1):
                if dx < 0 or (dx == 0 and (dy < 0 or (dy == 0 and dz <= 0))):
                    continue  # half-space: each unordered pair once
                d_lin = (dx * n + dy) * n + dz
                r0 = (((dx + nm) * K + (dy + nm)) * K + (dz + nm)) * S
                px0 = max(0, dx)
                px1 = nm + min(0, dx)
                py0 = max(0, dy)
                py1 = nm + min(0, dy)
                pz0 = max(0, dz)
                pz1 = nm + min(0, dz)
                if px0 > px1 or py0 > py1 or pz0 > pz1:
                    continue
                for s in range(S):
                    r = r0 + s
                    k = kern[r]
                    if k == 0.0:
                        continue
                    gx0 = max(px0, lo1[r, 0], lo2[r, 0] + dx)
                    gx1 = min(px1, hi1[r, 0], hi2[r, 0] + dx)
                    gy0 = max(py0, lo1[r, 1], lo2[r, 1] + dy)
                    gy1 = min(py1, hi1[r, 1], hi2[r, 1] + dy)
                    gz0 = max(pz0, lo1[r, 2], lo2[r, 2] + dz)
                    gz1 = min(pz1, hi1[r, 2], hi2[r, 2] + dz)
                    if gx0 > gx1 or gy0 > gy1 or gz0 > gz1:
                        continue
                    u0 = w81[r, 0]
                    u1 = w81[r, 1]
                    u2 = w81[r, 2]
                    u3 = w81[r, 3]
                    u4 = w81[r, 4]
                    u5 = w81[r, 5]
                    u6 = w81[r, 6]
                    u7 = w81[r, 7]
                    q0 = w82[r, 0]
                    q1 = w82[r, 1]
                    q2 = w82[r, 2]
                    q3 = w82[r, 3]
                    q4 = w82[r, 4]
                    q5 = w82[r, 5]
                    q6 = w82[r, 6]
                    q7 = w82[r, 7]
                    a1o = lin1[r]
                    a2o = lin2[r] - d_lin
                    c1 = corner[1] * C
                    c2 = corner[2] * C
                    c3 = corner[3] * C
                    c4 = corner[4] * C
                    c5 = corner[5] * C
                    c6 = corner[6] * C
                    c7 = corner[7] * C
    for ix in range(gx0, gx1 + 1):
                        for iy in range(gy0, gy1 + 1):
                            i0 = (ix * n + iy) * n + gz0
                            for iz in range(gz1 - gz0 + 1):
                                ib = (i0 + iz) * C
                                jb = ib - d_lin * C
                                a1 = ib + a1o * C
                                a2 = ib + a2o * C
                                kmj = k * m[i0 + iz - d_lin]
                                kmi = k * m[i0 + iz]
                                for c in range(C):
                                    g1 = (
                                        u0 * Rf[a1 + c] + u1 * Rf[a1 + c1 + c]
                                        + u2 * Rf[a1 + c2 + c] + u3 * Rf[a1 + c3 + c]
                                        + u4 * Rf[a1 + c4 + c] + u5 * Rf[a1 + c5 + c]
                                        + u6 * Rf[a1 + c6 + c] + u7 * Rf[a1 + c7 + c]
                                    )
                                    g2 = (
                                        q0 * Rf[a2 + c] + q1 * Rf[a2 + c1 + c]
                                        + q2 * Rf[a2 + c2 + c] + q3 * Rf[a2 + c3 + c]
                                        + q4 * Rf[a2 + c4 + c] + q5 * Rf[a2 + c5 + c]
                                        + q6 * Rf[a2 + c6 + c] + q7 * Rf[a2 + c7 + c]
                                    )
                                    core = g1 * g2 - Rf[ib + c] * Rf[jb + c]
                                    Qf[ib + c] += kmj * core
                                    Qf[jb + c] += kmi * core
    return Q


@njit(cache=True)
def assemble_weak(m, s_scale, coords, n, S, K, kern, lin1, lo1, hi1, w81, lin2, lo2, hi2, w82, corner, out):
    """Galerkin matrix of the Dirichlet quadrature in s coordinates:

        out[a,b] = (1/2) sum_{i<j,s retained} k m_i m_j d_a d_b / (s_a s_b)

    where d is the 18-entry stencil vector of Delta phi = phi_i + phi_j
    - I[phi](v') - I[phi](v'_*).  Each retained term adds a PSD rank-1
    block, so the assembled matrix is symmetric positive semidefinite by
    construction, with Delta(1) = Delta(v) = 0 exactly.
    """
    N = m.shape[0]
    idx = np.empty(18, dtype=np.int64)
    coef = np.empty(18, dtype=np.float64)
    for i in range(N):
        ix = coords[i, 0]
        iy = coords[i, 1]
        iz = coords[i, 2]
        mi = m[i]
        for j in range(i + 1, N):
            jx = coords[j, 0]
            jy = coords[j, 1]
            jz = coords[j, 2]
            r0 = ((ix - jx + n - 1) * K + (iy - jy + n - 1)) * S * K + (iz - jz + n - 1) * S
            mm = 0.5 * mi * m[j]
            for s in range(S):
                r = r0 + s
                k = kern[r]
                if k == 0.0:
                    continue
                if not (
                    ix >= lo1[r, 0] and ix <= hi1[r, 0]
                    and iy >= lo1[r, 1] and iy <= hi1[r, 1]
                    and iz >= lo1[r, 2] and iz <= hi1[r, 2]
                ):
                    continue
                if not (
                    jx >= lo2[r, 0] and jx <= hi2[r, 0]
                    and jy >= lo2[r, 1] and jy <= hi2[r, 1]
                    and jz >= lo2[r, 2] and jz <= hi2[r, 2]
                ):
                    continue
                q = k * mm
                idx[0] = i
                coef[0] = 1.0 / s_scale[i]
                idx[1] = j
                coef[1] = 1.0 / s_scale[j]
                b1 = i + lin1[r]
                b2 = j + lin2[r]
                for p in range(8):
                    t1 = b1 + corner[p]
                    t2 = b2 + corner[p]
                    idx[2 + p] = t1
                    coef[2 + p] = -w81[r, p] / s_scale[t1]
                    idx[10 + p] = t2
                    coef[10 + p] = -w82[r, p] / s_scale[t2]
                for a in range(18):
                    qa = q * coef[a]
                    ia = idx[a]
                    row = out[ia]
                    for b in range(18):
                        row[idx[b]] += qa * coef[b]
    return out
