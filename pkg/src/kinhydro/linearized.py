"""Linearized collision operator: dense assembly, Dirichlet form, Fredholm
solver, transport coefficients, and the bilinear collision form.

The operator acts on fluctuation slices in the M-weighted inner product
<phi, psi> = sum_i w M_i phi_i psi_i.  Internally it is stored in "s
coordinates" y = s phi with s = sqrt(w M), where it becomes an ordinary
symmetric matrix: assembly runs the same quadrature/interpolation as the
nonlinear kernel, the result is symmetrized, and the five discrete collision
invariants are explicitly deflated out so they span the numerical kernel
exactly.  Both the symmetrization defect and the raw kernel drift are kept
as diagnostics.
"""

import numpy as np
import scipy.linalg

from . import accel
from .errors import CapacityError, IterationLimitError, SolvabilityError
from .velocity import DistributionSlice, Representation

if accel.USE_NUMBA:
    from ._kernels_numba import assemble_weak
else:
    from ._kernels_numpy import assemble_weak

DEFAULT_NODE_CAP = 20**3


class LinearizedOperator:
    """Dense symmetric realization of the collision operator linearized about
    the unit Maxwellian, with its invariant deflation and lazy spectra."""

    def __init__(self, grid, sym, s_scale, diagnostics):
        self.grid = grid
        self.matrix = sym                  # symmetric, deflated, s coordinates
        self.s = s_scale                   # sqrt(w M)
        self.diagnostics = diagnostics
        self._eig = None
        basis = grid.invariants
        q, _ = np.linalg.qr((self.s[:, None] * basis.T))
        self.kernel_basis = q              # orthonormal, s coordinates
        self._norm_est = diagnostics["norm_estimate"]

    @property
    def size(self):
        return self.matrix.shape[0]

    def norm_estimate(self):
        return self._norm_est

    # --- action ------------------------------------------------------------
    def apply_values(self, phi):
        return (self.matrix @ (self.s * phi)) / self.s

    def apply(self, phi_slice):
        vals = phi_slice.values if isinstance(phi_slice, DistributionSlice) else phi_slice
        return DistributionSlice(self.apply_values(np.asarray(vals, float)),
                                 Representation.FLUCTUATION, delta=0.0)

    def inner(self, phi, psi):
        """M-weighted inner product of two node arrays."""
        return float((self.s * np.asarray(phi)) @ (self.s * np.asarray(psi)))

    def project_out_kernel(self, y):
        """Remove the invariant components (s coordinates)."""
        return y - self.kernel_basis @ (self.kernel_basis.T @ y)

    # --- spectrum ----------------------------------------------------------
    def eigendecomposition(self):
        """Full spectrum (ascending) of the deflated symmetric matrix."""
        if self._eig is None:
            lam, vec = np.linalg.eigh(self.matrix)
            self._eig = (lam, vec)
        return self._eig

    def smallest_eigenvalues(self, k=6):
        if self._eig is not None:
            return self._eig[0][:k]
        lam = scipy.linalg.eigh(
            self.matrix, eigvals_only=True, subset_by_index=(0, k - 1), driver="evr"
        )
        return lam

    def spectral_gap(self):
        """Smallest eigenvalue orthogonal to the deflated invariants."""
        return float(self.smallest_eigenvalues(6)[5])

    # --- solver ------------------------------------------------------------
    def quadrature_floor(self):
        """Relative size of lattice quadrature error on smooth moments:
        Gaussian aliasing at spacing h plus tail truncation at v_max (with
        the polynomial amplification of degree <= 4 moment integrands)."""
        h = self.grid.h
        vm = self.grid.v_max
        return 10.0 * (np.exp(-2.0 * np.pi**2 / h**2)
                       + np.exp(-0.5 * vm**2) * (1.0 + vm**4))

    def solve_values(self, source, tol=1e-10, solvability_tol=1e-10, maxiter=400):
        """Conjugate gradients for L f = source on the invariant complement.

        Solvability (Fredholm alternative): the five invariant moments of the
        source must vanish relative to its norm, up to the larger of
        solvability_tol and the grid's own quadrature floor (smooth sources
        carry invariant moments at that floor from the midpoint rule alone);
        genuine violations raise SolvabilityError carrying the moments.  The
        returned node array has zero invariant moments; the relative residual
        is stored in self.last_residual.
        """
        src = np.asarray(source, dtype=np.float64)
        b = self.s * src
        bn = np.linalg.norm(b)
        if bn == 0:
            self.last_residual = 0.0
            return np.zeros_like(b)
        mom = self.kernel_basis.T @ b
        if np.linalg.norm(mom) > max(solvability_tol, self.quadrature_floor()) * bn:
            raise SolvabilityError(
                "source has nonzero invariant moments (Fredholm alternative b)",
                moments=mom,
            )
        b = b - self.kernel_basis @ mom
        x = np.zeros_like(b)
        r = b.copy()
        p = r.copy()
        rs = r @ r
        target = (tol * bn) ** 2
        it = 0
        while rs > target:
            if it >= maxiter:
                raise IterationLimitError(
                    f"CG did not reach {tol:g} in {maxiter} iterations",
                    residual=np.sqrt(rs) / bn,
                )
            ap = self.matrix @ p
            ap = self.project_out_kernel(ap)
            alpha = rs / (p @ ap)
            x += alpha * p
            r -= alpha * ap
            rs_new = r @ r
            p = r + (rs_new / rs) * p
            rs = rs_new
            it += 1
        x = self.project_out_kernel(x)
        self.last_residual = float(np.sqrt(rs) / bn)
        self.last_iterations = it
        return x / self.s

    def solve(self, source_slice, **kw):
        vals = source_slice.values if isinstance(source_slice, DistributionSlice) else source_slice
        return DistributionSlice(self.solve_values(vals, **kw),
                                 Representation.FLUCTUATION, delta=0.0)


def _symmetrize_inplace(a, block=512):
    """a <- (a + a^T)/2 without a full transposed copy."""
    n = a.shape[0]
    for i0 in range(0, n, block):
        i1 = min(i0 + block, n)
        d = a[i0:i1, i0:i1]
        d[:] = 0.5 * (d + d.T)
        for j0 in range(i1, n, block):
            j1 = min(j0 + block, n)
            u = a[i0:i1, j0:j1]
            l = a[j0:j1, i0:i1]
            avg = 0.5 * (u + l.T)
            u[:] = avg
            l[:] = avg.T


def anchor_subspace(grid):
    """The transport-active functions the operator is anchored to: the five
    traceless second moments A_kl and the three heat-flux vectors B_k."""
    comps = [a_component(grid, k, l) for k, l in
             ((0, 1), (0, 2), (1, 2), (0, 0), (1, 1))]
    comps += [b_component(grid, k) for k in range(3)]
    return np.array(comps)


def raw_linearized_action(phi, ws):
    """Exact Frechet-derivative action of the discrete collision core.

    The core is exactly bilinear in the ratio variable, so
    L phi = core(1) + core(phi) - core(1 + phi) with no finite-difference
    truncation or roundoff scaling.
    """
    phi = np.asarray(phi, dtype=np.float64)
    ones = np.ones_like(phi)
    return ws.core_values(ones) + ws.core_values(phi) - ws.core_values(ones + phi)


def assemble(grid, ws, node_cap=DEFAULT_NODE_CAP):
    """Assemble the dense linearized operator on ws.grid.

    The Galerkin (weak-form) Dirichlet quadrature over the retained
    collision terms gives a symmetric positive-semidefinite matrix whose
    quadratic form is exactly the symmetrized quadruple-integral sum.  A
    rank-16 anchored correction then restores the exact linearization of
    the nonlinear collision core on the A/B transport subspace (the
    stress/heat-flux sources), so the operator is self-adjoint while
    matching the kernel's Frechet derivative where the hydrodynamics
    lives.  The five invariants are deflated out of the numerical kernel.

    O(N^2) dense storage; grids above node_cap nodes are refused up front.
    """
    n_nodes = grid.size
    if n_nodes > node_cap:
        raise CapacityError(
            f"dense operator needs {n_nodes}^2 entries; cap is {node_cap} nodes"
        )
    m = grid.maxwellian_values
    s = np.sqrt(grid.weight * m)
    mat = np.zeros((n_nodes, n_nodes))
    t = ws.tables
    # the kernel table carries the cell weight for the j sum; the i-side
    # measure contributes another factor w, split as sqrt(w) m_i sqrt(w) m_j
    assemble_weak(
        np.sqrt(grid.weight) * m, s, ws.coords, t["n"], t["S"], t["K"],
        t["kern"], t["lin1"], t["lo1"], t["hi1"], t["w81"],
        t["lin2"], t["lo2"], t["hi2"], t["w82"], t["corner_lin"], mat,
    )
    _symmetrize_inplace(mat)  # remove roundoff-level triangle mismatch

    # anchored correction: agree with the collision core's linearization on
    # the A/B subspace.  Y = (L_raw - L_weak) anchors in s coordinates;
    # D = Y A^T + A Y^T - A sym(A^T Y) A^T is symmetric and maps
    # A c -> Y c (up to half the antisymmetric anchor block).
    funcs = anchor_subspace(grid)
    anchors, _ = np.linalg.qr((s[:, None] * funcs.T))
    y = np.empty((n_nodes, anchors.shape[1]))
    for kcol in range(anchors.shape[1]):
        phi = anchors[:, kcol] / s
        y[:, kcol] = s * raw_linearized_action(phi, ws) - mat @ anchors[:, kcol]
    blk = anchors.T @ y
    blk_sym = 0.5 * (blk + blk.T)
    anchor_asym = float(np.linalg.norm(blk - blk.T) / max(np.linalg.norm(blk), 1e-300))
    mat += y @ anchors.T
    mat += anchors @ y.T
    mat -= anchors @ (blk_sym @ anchors.T)
    anchor_norm = float(np.linalg.norm(y))

    # deflate the five invariants out of the numerical kernel
    basis = (s[:, None] * grid.invariants.T)
    q, _ = np.linalg.qr(basis)
    sq = mat @ q
    probe = np.random.default_rng(7).normal(size=n_nodes)
    norm_est = float(np.linalg.norm(mat @ probe) / np.linalg.norm(probe))
    kernel_drift = float(np.max(np.linalg.norm(sq, axis=0)))
    mat -= sq @ q.T
    mat -= q @ (q.T @ mat)
    diagnostics = {
        "anchor_correction_norm": anchor_norm,
        "anchor_block_asym_rel": anchor_asym,
        "kernel_drift": kernel_drift,
        "kernel_drift_rel": kernel_drift / max(norm_est, 1e-300),
        "norm_estimate": norm_est,
    }
    return LinearizedOperator(grid, mat, s, diagnostics)


def dirichlet_form(phi, op):
    """D(phi) = <phi, L phi> >= 0."""
    vals = phi.values if isinstance(phi, DistributionSlice) else np.asarray(phi, float)
    y = op.s * vals
    return float(y @ (op.matrix @ y))


def fredholm_solve(source, op, tol=1e-10, solvability_tol=1e-10):
    return op.solve(source, tol=tol, solvability_tol=solvability_tol)


def q_bilinear(g, h, op, ws):
    """Symmetric bilinear collision form on fluctuations, by polarization:
    Q(g, h) = (Q(g+h, g+h) - Q(g-h, g-h)) / 4 with Q(phi, phi) the
    conservation-corrected M^{-1} C(M phi)."""
    gv = g.values if isinstance(g, DistributionSlice) else np.asarray(g, float)
    hv = h.values if isinstance(h, DistributionSlice) else np.asarray(h, float)
    if gv is hv or np.array_equal(gv, hv):
        out = q_quadratic_values(gv, ws)
    else:
        out = 0.25 * (q_quadratic_values(gv + hv, ws) - q_quadratic_values(gv - hv, ws))
    return DistributionSlice(out, Representation.FLUCTUATION, delta=0.0)


def q_quadratic_values(g_values, ws):
    """Q(g, g) = M^{-1} C(M g, M g) with the M-weighted conservation fixup
    (zeroes the five <.>-bracket moments).

    In the ratio form M g has ratio g, so the fluctuation-space quadratic
    term is the bare collision core of g: no Gaussian division anywhere.
    """
    q = ws.core_values(g_values)
    q, norm = ws.fixup_fluctuation(q)
    ws.last_fixup_norm = norm
    return q


def q_quadratic_batch(g_matrix, ws):
    """Column-wise Q(g, g) for an (N, cells) fluctuation matrix."""
    q = ws.core_batch(g_matrix)
    q, norm = ws.fixup_fluctuation(q)
    ws.last_fixup_norm = norm
    return q


# ---------------------------------------------------------------------------
# transport coefficients

def _traceless_tensor_basis(grid):
    """The five independent components of A = v (x) v - |v|^2/3 I."""
    v = grid.nodes
    vsq = grid.vsq
    comps = {
        (0, 1): v[:, 0] * v[:, 1],
        (0, 2): v[:, 0] * v[:, 2],
        (1, 2): v[:, 1] * v[:, 2],
        (0, 0): v[:, 0] * v[:, 0] - vsq / 3.0,
        (1, 1): v[:, 1] * v[:, 1] - vsq / 3.0,
    }
    return comps


def a_component(grid, k, l):
    v = grid.nodes
    a = v[:, k] * v[:, l]
    if k == l:
        a = a - grid.vsq / 3.0
    return a


def b_component(grid, k):
    return 0.5 * (grid.vsq - 5.0) * grid.nodes[:, k]


class TransportCoefficients:
    def __init__(self, nu, kappa, grid_meta, residuals, dual_values, inner_values):
        self.nu = nu
        self.kappa = kappa
        self.grid_meta = grid_meta
        self.residuals = residuals
        self.dual_values = dual_values      # quadratic-form reading, per source
        self.inner_values = inner_values    # <source, L^-1 source> reading

    def cross_check_gap(self):
        """Relative mismatch between the two readings (solver-residual scale)."""
        gaps = [
            abs(d - i) / max(abs(i), 1e-300)
            for d, i in zip(self.dual_values, self.inner_values)
        ]
        return max(gaps)


def transport_coefficients(op, tol=1e-10):
    """Viscosity and heat conductivity from the Fredholm solves.

    nu    = (1/10) sum_kl <Ahat_kl, A_kl>      A = v(x)v - |v|^2/3 I
    kappa = (1/3)  sum_k  <Bhat_k,  B_k >      B = (|v|^2 - 5) v / 2

    For every solve both readings of the constrained-minimizer value are
    recorded: the Dirichlet quadratic form at the solution <f, L f> and the
    pairing <source, f>; they agree up to the CG residual.
    """
    grid = op.grid
    residuals = []
    dual_vals = []
    inner_vals = []

    def dual(source):
        f = op.solve_values(source, tol=tol)
        residuals.append(op.last_residual)
        qform = float((op.s * f) @ (op.matrix @ (op.s * f)))
        pair = op.inner(source, f)
        dual_vals.append(qform)
        inner_vals.append(pair)
        return pair

    # <Ahat : A> = 2*(three off-diagonal pairings) + diagonal pairings
    off = sum(dual(a_component(grid, k, l)) for k, l in ((0, 1), (0, 2), (1, 2)))
    d00 = dual(a_component(grid, 0, 0))
    d11 = dual(a_component(grid, 1, 1))
    # A_22 = -(A_00 + A_11); <Ahat_22, A_22> by linearity of L^-1
    f22 = -(op.solve_values(a_component(grid, 0, 0), tol=tol)
            + op.solve_values(a_component(grid, 1, 1), tol=tol))
    d22 = op.inner(a_component(grid, 2, 2), f22)
    a_colon = 2.0 * off + d00 + d11 + d22
    nu = a_colon / 10.0

    b_dot = sum(dual(b_component(grid, k)) for k in range(3))
    kappa = b_dot / 3.0

    return TransportCoefficients(
        nu=nu,
        kappa=kappa,
        grid_meta=grid.signature(),
        residuals=residuals,
        dual_values=dual_vals,
        inner_values=inner_vals,
    )


def transport_refinement(values, spacings):
    """Observed-order Richardson extrapolation from three grid levels.

    Fits value(h) = v_inf + c h^p through the three (monotone) samples by
    solving for the observed order p, then returns the two successive
    pair-extrapolations at that order plus their relative drift:
    (v_pair_coarse, v_pair_fine, drift, p).  Falls back to p = 2 when the
    differences are not monotone (no order is observable).
    """
    from scipy.optimize import brentq

    v1, v2, v3 = (float(v) for v in values)
    h1, h2, h3 = (float(h) for h in spacings)
    d12, d23 = v1 - v2, v2 - v3
    p = 2.0
    if d12 * d23 > 0:
        ratio = d12 / d23

        def f(p_):
            return (h1**p_ - h2**p_) / (h2**p_ - h3**p_) - ratio

        try:
            if f(0.2) * f(6.0) < 0:
                p = brentq(f, 0.2, 6.0, xtol=1e-10)
        except ValueError:
            p = 2.0
    p = min(max(p, 0.5), 4.0)
    r_coarse = v2 + (v2 - v1) * h2**p / (h1**p - h2**p)
    r_fine = v3 + (v3 - v2) * h3**p / (h2**p - h3**p)
    drift = abs(r_fine - r_coarse) / max(abs(r_fine), 1e-300)
    return r_coarse, r_fine, drift, p


def a_pair_matrix(grid):
    """<A_ij A_kl> Gaussian moments on the grid, as a (3,3,3,3) array."""
    m = grid.weight * grid.maxwellian_values
    out = np.empty((3, 3, 3, 3))
    comps = [[a_component(grid, i, j) for j in range(3)] for i in range(3)]
    for i in range(3):
        for j in range(3):
            for k in range(3):
                for l in range(3):
                    out[i, j, k, l] = float((comps[i][j] * m) @ comps[k][l])
    return out


def a_pair_exact(i, j, k, l):
    d = lambda a, b: 1.0 if a == b else 0.0
    return d(i, k) * d(j, l) + d(i, l) * d(j, k) - (2.0 / 3.0) * d(i, j) * d(k, l)


def isotropy_fit(op, tol=1e-10):
    """Fit <Ahat_ij A_kl> = nu_tilde (d_ik d_jl + d_il d_jk - 2/3 d_ij d_kl)
    and return (nu_tilde, relative residual of the tensor ansatz)."""
    grid = op.grid
    m = grid.weight * grid.maxwellian_values
    hats = {}
    for k in range(3):
        for l in range(k, 3):
            if (k, l) == (2, 2):
                hats[(2, 2)] = -(hats[(0, 0)] + hats[(1, 1)])
            else:
                hats[(k, l)] = op.solve_values(a_component(grid, k, l), tol=tol)
    tensor = np.empty((3, 3, 3, 3))
    shape = np.empty((3, 3, 3, 3))
    for i in range(3):
        for j in range(3):
            hij = hats[(min(i, j), max(i, j))]
            for k in range(3):
                for l in range(3):
                    tensor[i, j, k, l] = float((hij * m) @ a_component(grid, k, l))
                    shape[i, j, k, l] = a_pair_exact(i, j, k, l)
    scale = float((tensor * shape).sum() / (shape * shape).sum())
    resid = np.linalg.norm(tensor - scale * shape) / np.linalg.norm(scale * shape)
    return scale, float(resid)


def nl_flux_identity_check(u, op, ws, tol=1e-10):
    """For g = u . v, compare <Ahat_ij Q(g,g)> with u(x)u - |u|^2/3 I.

    Returns (residual_max, target, measured, pair_residual) where
    pair_residual is the max deviation of <A_ij A_kl> from its closed form.
    """
    grid = op.grid
    u = np.asarray(u, dtype=np.float64).reshape(3)
    g = grid.nodes @ u
    qg = q_quadratic_values(g, ws)
    m = grid.weight * grid.maxwellian_values
    measured = np.empty((3, 3))
    for i in range(3):
        for j in range(i, 3):
            if (i, j) == (2, 2):
                ahat = -(op.solve_values(a_component(grid, 0, 0), tol=tol)
                         + op.solve_values(a_component(grid, 1, 1), tol=tol))
            else:
                ahat = op.solve_values(a_component(grid, i, j), tol=tol)
            measured[i, j] = measured[j, i] = float((ahat * m) @ qg)
    target = np.outer(u, u) - (u @ u) / 3.0 * np.eye(3)
    pair = a_pair_matrix(grid)
    exact = np.array([[[[a_pair_exact(i, j, k, l) for l in range(3)] for k in range(3)]
                       for j in range(3)] for i in range(3)])
    pair_residual = float(np.abs(pair - exact).max())
    return float(np.abs(measured - target).max()), target, measured, pair_residual
