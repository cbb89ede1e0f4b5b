"""Reference solutions of the four limiting fluid systems, plus the Leray
energy functional.

All solvers work in Fourier space on periodic meshes:

* acoustic:        exact per-mode matrix exponential of the 5x5 symbol
* Stokes-Fourier:  exact per-mode decay factors (heat kernels)
* Navier-Stokes:   pseudo-spectral, 2/3-rule dealiasing, SSP-RK3 advection
                   with an integrating factor for the viscous part
* Euler:           the same solver at nu = 0

Temperature diffuses with coefficient (2/5) kappa in both the Stokes and
Navier-Stokes systems; this is the gas coefficient, deliberately not the
incompressible-fluid one (which would carry an extra 5/3 from pressure work).
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConfigError, NumericalError
from .spatial import SpatialMesh, divergence_norm, grad, solenoidal_project

DIV_TOL = 1e-10


@dataclass
class HydroState:
    mesh: SpatialMesh
    rho: np.ndarray
    u: np.ndarray            # (3, *mesh.shape)
    theta: np.ndarray
    time: float = 0.0

    def copy(self):
        return HydroState(self.mesh, self.rho.copy(), self.u.copy(),
                          self.theta.copy(), self.time)


def zero_state(mesh):
    z = np.zeros(mesh.shape)
    return HydroState(mesh, z.copy(), np.zeros((3,) + mesh.shape), z.copy(), 0.0)


def require_solenoidal(u, mesh, tol=DIV_TOL, what="u"):
    d = divergence_norm(u, mesh)
    if d > tol:
        raise ConfigError(f"{what} must be divergence-free; ||div|| = {d:.3e}")
    return d


# ---------------------------------------------------------------------------
# acoustic system

def acoustic_symbol(kvec):
    """5x5 generator for (rho, u1, u2, u3, theta) at one Fourier mode."""
    a = np.zeros((5, 5), dtype=complex)
    for ax, k in enumerate(kvec):
        ik = 1j * k
        a[0, 1 + ax] = -ik          # d rho = -div u
        a[1 + ax, 0] = -ik          # d u = -grad(rho + theta)
        a[1 + ax, 4] = -ik
        a[4, 1 + ax] = -(2.0 / 3.0) * ik
    return a


def acoustic_solve(state, t):
    """Exact acoustic evolution: per-mode matrix exponential.

    The symbol is skew-adjoint in the (rho, u, 3/2 theta-weighted) metric, so
    the weighted energy integral rho^2 + |u|^2 + 3/2 theta^2 is conserved.
    """
    mesh = state.mesh
    rh = np.fft.fftn(state.rho)
    uh = [np.fft.fftn(state.u[ax]) for ax in range(3)]
    th = np.fft.fftn(state.theta)
    ks = mesh.k_vectors()
    kgrids = [np.broadcast_to(k, mesh.shape) for k in ks]
    out_r = np.zeros_like(rh)
    out_u = [np.zeros_like(rh) for _ in range(3)]
    out_t = np.zeros_like(rh)
    it = np.nditer(rh, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        kvec = [kg[idx] for kg in kgrids] + [0.0] * (3 - mesh.dim)
        y = np.array([rh[idx], uh[0][idx], uh[1][idx], uh[2][idx], th[idx]])
        y = scipy.linalg.expm(acoustic_symbol(kvec) * t) @ y
        out_r[idx], out_u[0][idx], out_u[1][idx], out_u[2][idx], out_t[idx] = y
        it.iternext()
    u = np.stack([np.real(np.fft.ifftn(c)) for c in out_u])
    return HydroState(mesh, np.real(np.fft.ifftn(out_r)), u,
                      np.real(np.fft.ifftn(out_t)), state.time + t)


def acoustic_energy(state):
    """Conserved weighted energy integral of the acoustic system."""
    mesh = state.mesh
    dens = state.rho**2 + (state.u**2).sum(axis=0) + 1.5 * state.theta**2
    return float(dens.mean() * mesh.volume)


# ---------------------------------------------------------------------------
# Stokes-Fourier system

def stokes_fourier_solve(state, nu, kappa, t):
    """Exact solution: u modes decay by exp(-nu |k|^2 t) after solenoidal
    projection; theta modes by exp(-(2/5) kappa |k|^2 t).  Motion and
    temperature are decoupled."""
    mesh = state.mesh
    require_solenoidal(state.u, mesh)
    ks = mesh.k_vectors()
    k2 = sum(k**2 for k in ks)
    u = np.stack([
        np.real(np.fft.ifftn(np.exp(-nu * k2 * t) * np.fft.fftn(state.u[ax])))
        for ax in range(3)
    ])
    theta = np.real(np.fft.ifftn(np.exp(-0.4 * kappa * k2 * t) * np.fft.fftn(state.theta)))
    return HydroState(mesh, state.rho.copy(), u, theta, state.time + t)


# ---------------------------------------------------------------------------
# incompressible Navier-Stokes-Fourier (2-D pseudo-spectral)

def _dealias_mask(mesh):
    ks = mesh.k_vectors()
    mask = np.ones(mesh.shape, dtype=bool)
    for k, n, l in zip(ks, mesh.shape, mesh.lengths):
        kmax = np.pi * n / l
        mask = mask & (np.abs(np.broadcast_to(k, mesh.shape)) <= (2.0 / 3.0) * kmax)
    return mask


class _NSWork:
    def __init__(self, mesh, nu, kappa):
        self.mesh = mesh
        self.ks = mesh.k_vectors()
        self.k2 = sum(k**2 for k in self.ks)
        self.k2s = np.where(self.k2 == 0, 1.0, self.k2)
        self.mask = _dealias_mask(mesh)
        self.nu = nu
        self.kappa = kappa

    def project(self, uh):
        dot = sum(k * f for k, f in zip(self.ks, uh))
        return [f - k * dot / self.k2s for k, f in zip(self.ks, uh)]

    def rhs(self, uh, th):
        """Dealiased advection terms in Fourier space (no viscosity)."""
        m = self.mesh
        ud = [np.real(np.fft.ifftn(np.where(self.mask, f, 0))) for f in uh]
        out_u = []
        for ax in range(m.dim):
            adv = np.zeros(m.shape)
            for bx in range(m.dim):
                dved = np.real(np.fft.ifftn(np.where(self.mask, 1j * self.ks[bx] * uh[ax], 0)))
                adv += ud[bx] * dved
            out_u.append(-np.where(self.mask, np.fft.fftn(adv), 0))
        out_u = self.project(out_u)
        td = np.real(np.fft.ifftn(np.where(self.mask, th, 0)))
        divt = np.zeros(m.shape)
        for bx in range(m.dim):
            divt += np.real(np.fft.ifftn(np.where(self.mask, 1j * self.ks[bx] * np.fft.fftn(ud[bx] * td), 0)))
        out_t = -np.where(self.mask, np.fft.fftn(divt), 0)
        return out_u, out_t


def ns_fourier_solve(state, nu, kappa, t, dt, check_cfl=True):
    """Pseudo-spectral Navier-Stokes-Fourier on a 2-D torus.

    Integrating factor exp(-nu |k|^2 dt) for the viscous part, SSP-RK3 for
    the dealiased advection, spectral pressure projection each stage; theta
    is advected and diffuses with coefficient (2/5) kappa.
    """
    mesh = state.mesh
    if mesh.dim != 2:
        raise ConfigError("ns_fourier_solve expects a 2-D mesh")
    require_solenoidal(state.u, mesh)
    umax = float(np.abs(state.u).max())
    dx = min(l / n for l, n in zip(mesh.lengths, mesh.shape))
    if check_cfl and umax > 0 and dt > 0.5 * dx / umax:
        raise NumericalError(
            f"CFL violation: dt {dt} > 0.5 dx/|u| = {0.5 * dx / umax:.3e}"
        )
    w = _NSWork(mesh, nu, kappa)
    uh = [np.fft.fftn(state.u[ax]) for ax in range(2)]
    uh = w.project(uh)
    th = np.fft.fftn(state.theta)
    n_steps = max(1, int(round(t / dt)))
    dt = t / n_steps
    # integrating factors over a full and a half step (exact viscous part)
    fu1 = np.exp(-nu * w.k2 * dt)
    fu12 = np.exp(-0.5 * nu * w.k2 * dt)
    ft1 = np.exp(-0.4 * kappa * w.k2 * dt)
    ft12 = np.exp(-0.2 * kappa * w.k2 * dt)
    for _ in range(n_steps):
        # Shu-Osher SSP-RK3 on the integrating-factor variable
        ru, rt = w.rhs(uh, th)
        u1 = [fu1 * (f + dt * r) for f, r in zip(uh, ru)]
        t1 = ft1 * (th + dt * rt)
        ru, rt = w.rhs(u1, t1)
        u2 = [0.75 * fu12 * f + 0.25 * (g + dt * r) / fu12 for f, g, r in zip(uh, u1, ru)]
        t2 = 0.75 * ft12 * th + 0.25 * (t1 + dt * rt) / ft12
        ru, rt = w.rhs(u2, t2)
        uh = [(1.0 / 3.0) * fu1 * f + (2.0 / 3.0) * fu12 * (g + dt * r)
              for f, g, r in zip(uh, u2, ru)]
        th = (1.0 / 3.0) * ft1 * th + (2.0 / 3.0) * ft12 * (t2 + dt * rt)
        uh = w.project(uh)
        div_hat = sum(1j * k * f for k, f in zip(w.ks, uh))
        d = float(np.linalg.norm(div_hat)) / mesh.n_cells
        if d > 1e-8:
            raise NumericalError(f"spectral divergence drift {d:.3e} > 1e-8")
    u3 = np.zeros((3,) + mesh.shape)
    u3[0] = np.real(np.fft.ifftn(uh[0]))
    u3[1] = np.real(np.fft.ifftn(uh[1]))
    u3[2] = state.u[2]
    return HydroState(mesh, state.rho.copy(), u3, np.real(np.fft.ifftn(th)),
                      state.time + t)


def euler_reference(state, t, dt=None):
    """Incompressible Euler as the nu = 0 limit of the spectral solver.

    For the 2-D Taylor-Green field the advection term is a pure gradient, so
    the projection leaves the data stationary (to solver accuracy).
    """
    if dt is None:
        umax = float(np.abs(state.u).max())
        dx = min(l / n for l, n in zip(state.mesh.lengths, state.mesh.shape))
        dt = 0.25 * dx / max(umax, 1e-12)
        dt = min(dt, t) if t > 0 else dt
    if t == 0:
        return state.copy()
    return ns_fourier_solve(state, 0.0, 0.0, t, dt)


def taylor_green(mesh, amplitude=1.0):
    """2-D Taylor-Green vortex (sin x cos y, -cos x sin y, 0)."""
    if mesh.dim != 2:
        raise ConfigError("Taylor-Green needs a 2-D mesh")
    x, y = mesh.coords()
    u = np.zeros((3,) + mesh.shape)
    u[0] = amplitude * np.sin(x) * np.cos(y)
    u[1] = -amplitude * np.cos(x) * np.sin(y)
    return u


# ---------------------------------------------------------------------------
# Leray functional

def energy_half(state):
    """(1/2) int (|u|^2 + 5/2 theta^2)."""
    dens = (state.u**2).sum(axis=0) + 2.5 * state.theta**2
    return 0.5 * float(dens.mean() * state.mesh.volume)


def dissipation_rate(state, nu, kappa):
    """int (nu |grad u|^2 + kappa |grad theta|^2)."""
    mesh = state.mesh
    acc = 0.0
    for ax in range(3):
        for dg in grad(state.u[ax], mesh):
            acc += nu * float((dg**2).mean() * mesh.volume)
    for dg in grad(state.theta, mesh):
        acc += kappa * float((dg**2).mean() * mesh.volume)
    return acc


def leray_functional(trajectory, nu, kappa, tol=1e-8):
    """Energy-dissipation check over a state trajectory.

    lhs = energy(t_final) + integral of the dissipation rate (trapezoid);
    rhs = energy(t_0); holds when lhs <= rhs + tol.  Equality (up to
    integration error) signals a classical solution.
    """
    if len(trajectory) < 1:
        raise ConfigError("need at least one state")
    times = np.array([s.time for s in trajectory])
    rates = np.array([dissipation_rate(s, nu, kappa) for s in trajectory])
    dissipated = float(np.trapz(rates, times)) if len(trajectory) > 1 else 0.0
    lhs = energy_half(trajectory[-1]) + dissipated
    rhs = energy_half(trajectory[0])
    return lhs, rhs, bool(lhs <= rhs + tol)
