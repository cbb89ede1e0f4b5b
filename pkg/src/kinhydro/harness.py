"""Epsilon-sweep harness: runs one kinetic solve per epsilon for a chosen
fluid-limit regime, compares the extracted hydrodynamic fields against the
matching reference solution, and assembles structural diagnostics (Boussinesq
relation, relative-entropy evolution, entropy inequality, conservation
defects) into a ConvergenceReport persisted as CSV.

Axis conventions for the built-in initial data (1-D domains use spatial
axis x; velocity always has three components):

  acoustic-wave   rho = cos x, u = 0, theta = 0
  shear-mode      u = (0, A sin x, 0): transverse shear, divergence-free
  thermal-spot    shear-mode plus theta = A cos x
  taylor-green    2-D u = (sin x cos y, -cos x sin y, 0), theta = 0
"""

import os
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy import optimize

from .collision import CollisionWorkspace
from .csvio import write_csv
from .errors import ConfigError, KinhydroError
from .fluid import (
    HydroState,
    acoustic_solve,
    energy_half,
    euler_reference,
    leray_functional,
    ns_fourier_solve,
    stokes_fourier_solve,
    taylor_green,
    zero_state,
)
from .kinetic import (
    DistributionField,
    RegimeTag,
    conservation_defect,
    evolve,
    extract_hydro,
    global_entropy,
    init_from_theorem,
    regime_for,
    save_checkpoint,
    spectral_operator,
)
from .linearized import transport_coefficients
from .spatial import divergence_norm, grad, l2_norm, mesh_1d, mesh_2d
from .velocity import build_grid, maxwellian

INITIAL_DATA = ("acoustic-wave", "shear-mode", "thermal-spot", "taylor-green")

_REGIME_MIN_CELLS = {
    RegimeTag.ACOUSTIC: 32,
    RegimeTag.STOKES_FOURIER: 32,
    RegimeTag.INCOMPRESSIBLE_EULER: 16,
    RegimeTag.NAVIER_STOKES_FOURIER: 16,
}


@dataclass
class SweepPlan:
    regime_tag: RegimeTag
    eps_list: tuple
    n_per_axis: int = 12
    v_max: float = 6.0
    sphere_order: int = 6
    cells: tuple = (64,)
    t_final: float = 1.0
    dt: float = 0.01
    initial_data: str = "acoustic-wave"
    amplitude: float = 1.0
    out_dir: str = "runs"
    nonlinear: bool | None = None       # regime default when None
    n_samples: int = 5
    alpha: float = 0.5
    seed: int = 0
    nu_extrapolated: float | None = None

    def __post_init__(self):
        self.regime_tag = RegimeTag(self.regime_tag)
        eps = tuple(float(e) for e in self.eps_list)
        if any(not (0.0 < e < 1.0) for e in eps):
            raise ConfigError("all eps must lie in (0, 1)")
        if any(a <= b for a, b in zip(eps, eps[1:])):
            raise ConfigError("eps_list must be strictly decreasing")
        self.eps_list = eps
        if self.initial_data not in INITIAL_DATA:
            raise ConfigError(f"initial_data must be one of {INITIAL_DATA}")
        cells = tuple(int(c) for c in (self.cells if hasattr(self.cells, "__len__") else (self.cells,)))
        need_2d = self.initial_data == "taylor-green"
        if need_2d and len(cells) != 2:
            raise ConfigError("taylor-green initial data needs a 2-D mesh")
        min_cells = _REGIME_MIN_CELLS.get(self.regime_tag, 16)
        if min(cells) < min_cells:
            raise ConfigError(
                f"{self.regime_tag.value} regime needs >= {min_cells} cells per axis"
            )
        self.cells = cells
        steps = self.t_final / self.dt
        if abs(round(steps) - steps) > 1e-9 or round(steps) < self.n_samples:
            raise ConfigError("t_final must be a multiple of dt with >= n_samples steps")
        if int(round(steps)) % self.n_samples != 0:
            raise ConfigError("n_samples must divide the step count")

    def mesh(self):
        return mesh_1d(self.cells[0]) if len(self.cells) == 1 else mesh_2d(*self.cells)

    def use_nonlinear(self):
        if self.nonlinear is not None:
            return self.nonlinear
        # the Stokes-Fourier limit is linear (Ma = o(eps)); all other regimes
        # keep the quadratic term
        return self.regime_tag is not RegimeTag.STOKES_FOURIER


def builtin_fields(name, mesh, amplitude=1.0):
    """(rho_in, u_in, theta_in) arrays for a named initial datum."""
    z = np.zeros(mesh.shape)
    u = np.zeros((3,) + mesh.shape)
    if name == "acoustic-wave":
        x = mesh.coords()[0]
        return amplitude * np.cos(x), u, z
    if name == "shear-mode":
        x = mesh.coords()[0]
        u[1] = amplitude * np.sin(x)
        return z, u, z
    if name == "thermal-spot":
        x = mesh.coords()[0]
        u[1] = amplitude * np.sin(x)
        return z, u, amplitude * np.cos(x)
    if name == "taylor-green":
        return z, taylor_green(mesh, amplitude), z
    raise ConfigError(f"unknown initial data '{name}'")


def hydro_error(kin, ref):
    """Joint relative L2 error of (rho, u, theta) against a reference state."""
    num = (
        ((kin.rho - ref.rho) ** 2).mean()
        + ((kin.u - ref.u) ** 2).sum(axis=0).mean()
        + ((kin.theta - ref.theta) ** 2).mean()
    )
    den = (ref.rho**2).mean() + (ref.u**2).sum(axis=0).mean() + (ref.theta**2).mean()
    if den == 0:
        return float(np.sqrt(num))
    return float(np.sqrt(num / den))


def estimate_order(eps, errors):
    """Least-squares slope of log(error) vs log(eps) with an approximate 95%
    interval from the fit residuals."""
    eps = np.asarray(eps, float)
    errors = np.asarray(errors, float)
    if len(eps) < 3:
        raise ConfigError("need at least 3 (eps, error) pairs")
    if np.any(errors <= 0) or np.any(eps <= 0):
        raise ConfigError("eps and errors must be positive")
    x, y = np.log(eps), np.log(errors)
    n = len(x)
    xb = x - x.mean()
    slope = float((xb @ (y - y.mean())) / (xb @ xb))
    icept = y.mean() - slope * x.mean()
    resid = y - (icept + slope * x)
    if n > 2:
        se = np.sqrt((resid @ resid) / (n - 2) / (xb @ xb))
    else:
        se = 0.0
    return slope, float(1.96 * se)


def boussinesq_check(states, mesh, regime_tag):
    """||rho + theta||_L2 and ||div u||_L2 per state; incompressible regimes
    only (returns None with a reason otherwise)."""
    tag = RegimeTag(regime_tag)
    if tag not in (RegimeTag.NAVIER_STOKES_FOURIER, RegimeTag.INCOMPRESSIBLE_EULER,
                   RegimeTag.STOKES_FOURIER):
        return None, "not applicable: Boussinesq relation is not part of this regime"
    rows = []
    for s in states:
        rows.append((s.time, l2_norm(s.rho + s.theta, mesh),
                     divergence_norm(s.u, mesh) * np.sqrt(mesh.volume)))
    return np.asarray(rows), None


def relative_entropy_evolution(fields, u_refs, slack=None, nu_grid=None):
    """Z(t) = Ma^-2 H(F | M_(1, Ma u_ref, 1)) per sample, with a Gronwall
    envelope (Z(0) + slack) exp(C t), C = sup_t ||grad u_ref||_inf.

    slack defaults to 2 nu eps^(1-alpha) t ||grad u_ref||_L2^2, the viscous
    forcing scale that drives Z away from zero at finite Knudsen number.
    """
    if not fields:
        raise ConfigError("empty trajectory")
    reg = fields[0].regime
    mesh = fields[0].mesh
    grid = fields[0].grid
    d = reg.ma
    m = grid.maxwellian_values[:, None]
    zs = []
    cmax = 0.0
    gradsq = 0.0
    for f, uref in zip(fields, u_refs):
        u_c = uref.reshape(3, -1) * d
        v = grid.nodes
        dvu = grid.vsq[:, None] - 2.0 * (v @ u_c) + (u_c**2).sum(axis=0)[None, :]
        m_loc = np.exp(-0.5 * dvu) / (2.0 * np.pi) ** 1.5
        F = m * (1.0 + d * f.g)
        Fp = np.maximum(F, 1e-300)
        integ = np.where(F > 0, Fp * np.log(Fp / m_loc) - Fp + m_loc, m_loc)
        z = grid.weight * integ.sum() * mesh.cell_volume / d**2
        zs.append((f.time, float(z)))
        gnorm = max(np.abs(np.stack(grad(uref[ax], mesh))).max() for ax in range(2))
        cmax = max(cmax, gnorm)
        gsq = sum(float((np.stack(grad(uref[ax], mesh)) ** 2).sum(axis=0).mean())
                  for ax in range(2)) * mesh.volume
        gradsq = max(gradsq, gsq)
    zs = np.asarray(zs)
    t_final = zs[-1, 0] - zs[0, 0]
    if slack is None:
        alpha = reg.alpha if reg.alpha is not None else 1.0
        nu_grid = 0.1 if nu_grid is None else nu_grid
        slack = 2.0 * nu_grid * reg.kn ** (1.0 - alpha) * gradsq * max(t_final, 1e-12)
    envelope = (zs[0, 1] + slack) * np.exp(cmax * (zs[:, 0] - zs[0, 0]))
    return zs, envelope, float(cmax), float(slack)


def hilbert_leading_residual(states, grid, incompressible=False):
    """Invariant-projected residual of the leading Hilbert ansatz.

    Builds f0 = M_(rho,u,theta) per cell along a smooth hydro trajectory and
    measures the five invariant moments of (d/dt + v . grad_x) f0; these
    vanish exactly when the trajectory solves the compressible Euler system.
    The collision term drops out (Maxwellians are its zeros).  Time
    derivatives use central differences, space derivatives are spectral.
    Returns (residual_norms, flagged) with a non-solenoidal flag when
    incompressible regimes feed non-divergence-free velocity fields.
    """
    if len(states) < 3:
        raise ConfigError("need >= 3 trajectory samples for time differences")
    mesh = states[0].mesh
    flagged = False
    if incompressible:
        for s in states:
            if divergence_norm(s.u, mesh) > 1e-8:
                flagged = True
    w_inv = grid.weight * grid.invariants           # (5, N)

    def f0_of(s):
        rho = s.rho.reshape(-1) + 1.0
        th = s.theta.reshape(-1) + 1.0
        u_c = s.u.reshape(3, -1)
        dvu = grid.vsq[:, None] - 2.0 * (grid.nodes @ u_c) + (u_c**2).sum(axis=0)[None, :]
        return rho[None, :] / (2 * np.pi * th[None, :]) ** 1.5 * np.exp(-dvu / (2 * th[None, :]))

    norms = []
    for a in range(1, len(states) - 1):
        sm, s0, sp = states[a - 1], states[a], states[a + 1]
        dtau = sp.time - sm.time
        df = (f0_of(sp) - f0_of(sm)) / dtau
        f0 = f0_of(s0)
        vdot = np.zeros_like(f0)
        f0_sp = f0.reshape((grid.size,) + mesh.shape)
        axes = tuple(range(1, 1 + mesh.dim))
        fh = np.fft.fftn(f0_sp, axes=axes)
        for ax, k in enumerate(mesh.k_vectors()):
            dspat = np.real(np.fft.ifftn(1j * k[None, ...] * fh, axes=axes))
            vdot += grid.nodes[:, ax][:, None] * dspat.reshape(grid.size, -1)
        resid = df + vdot
        mom = w_inv @ resid                          # (5, cells)
        norms.append(np.sqrt((mom**2).mean(axis=1) * mesh.volume))
    return np.asarray(norms), flagged


# ---------------------------------------------------------------------------

@dataclass
class RunResult:
    eps: float
    times: np.ndarray
    errors: np.ndarray            # joint relative L2 per sample time
    err_fields: np.ndarray        # per-field errors (rho, u, theta) per sample
    mode_amp: np.ndarray          # regime mode amplitude per sample
    mode_ref: np.ndarray
    theta_amp: np.ndarray         # temperature mode amplitude (1-D runs)
    boussinesq: np.ndarray | None
    entropy: np.ndarray           # (time, H, production) rows
    audit_gap: float
    z_series: np.ndarray | None
    z_envelope: np.ndarray | None
    leray: tuple | None
    defect: object
    failed: str | None = None


@dataclass
class ConvergenceReport:
    plan: SweepPlan
    results: list
    fitted_order: float | None
    fitted_order_ci: float | None
    nu: float
    kappa: float
    spectral_gap: float
    schema_version: str = "1.0"

    def max_errors(self):
        return [(r.eps, float(np.nanmax(r.errors))) for r in self.results if r.failed is None]


def _mode_amplitude(state, plan):
    """Scalar amplitude of the regime's principal mode."""
    mesh = state.mesh
    if plan.initial_data == "acoustic-wave":
        x = mesh.coords()[0]
        return 2.0 * float((state.rho * np.cos(x)).mean())
    if plan.initial_data in ("shear-mode", "thermal-spot"):
        x = mesh.coords()[0]
        return 2.0 * float((state.u[1] * np.sin(x)).mean())
    u_tg = taylor_green(mesh)
    den = float((u_tg**2).sum(axis=0).mean())
    return float((state.u * u_tg).sum(axis=0).mean() / den)


def theta_mode_amplitude(state):
    x = state.mesh.coords()[0]
    return 2.0 * float((state.theta * np.cos(x)).mean())


def reference_solver(plan, regime, init_state, nu, kappa):
    """Callable t -> HydroState for the regime's fluid reference."""
    tag = plan.regime_tag

    if tag is RegimeTag.ACOUSTIC:
        return lambda t: acoustic_solve(init_state, t)
    if tag is RegimeTag.STOKES_FOURIER:
        return lambda t: stokes_fourier_solve(init_state, nu, kappa, t)
    if tag is RegimeTag.INCOMPRESSIBLE_EULER:
        cache = {}

        def ref(t):
            if t not in cache:
                cache[t] = euler_reference(init_state, t, dt=min(plan.dt, 0.01))
            return cache[t]

        return ref
    # Navier-Stokes-Fourier
    cache = {0.0: init_state}

    def ref(t):
        if t not in cache:
            base_t = max(tt for tt in cache if tt <= t)
            cache[t] = ns_fourier_solve(cache[base_t], nu, kappa, t - base_t,
                                        min(plan.dt, 0.005))
        return cache[t]

    return ref


def run_single(plan, eps, grid, op, ws, nu, kappa):
    """One kinetic run at a single epsilon, with all diagnostics."""
    regime = regime_for(plan.regime_tag, eps, plan.alpha)
    mesh = plan.mesh()
    rho_in, u_in, theta_in = builtin_fields(plan.initial_data, mesh, plan.amplitude)
    field = init_from_theorem(regime, mesh, grid, rho_in=rho_in, u_in=u_in,
                              theta_in=theta_in)

    init_state = HydroState(mesh, rho_in.copy(), u_in.copy(), theta_in.copy(), 0.0)
    ref = reference_solver(plan, regime, init_state, nu, kappa)

    samples = []

    def on_sample(f):
        samples.append((f.time, extract_hydro(f), f.copy()))

    n_steps = int(round(plan.t_final / plan.dt))
    sample_every = n_steps // plan.n_samples
    final, ledger = evolve(field, plan.t_final, plan.dt,
                           nonlinear=plan.use_nonlinear(),
                           sample_every=sample_every, on_sample=on_sample)

    times, errors, err_fields, amps, refs_amp = [], [], [], [], []
    ref_states = []
    for t, hs, _ in samples:
        rs = ref(t) if t > 0 else init_state
        ref_states.append(rs)
        times.append(t)
        errors.append(hydro_error(hs, rs))
        err_fields.append((
            l2_norm(hs.rho - rs.rho, mesh),
            float(np.sqrt(((hs.u - rs.u) ** 2).sum(axis=0).mean() * mesh.volume)),
            l2_norm(hs.theta - rs.theta, mesh),
        ))
        amps.append(_mode_amplitude(hs, plan))
        refs_amp.append(_mode_amplitude(rs, plan))

    theta_amps = [theta_mode_amplitude(s[1]) if mesh.dim == 1 else np.nan
                  for s in samples]

    bouss, _why = boussinesq_check([s[1] for s in samples], mesh, plan.regime_tag)

    z_series = z_env = None
    if plan.regime_tag is RegimeTag.INCOMPRESSIBLE_EULER:
        u_refs = [rs.u for rs in ref_states]
        z_series, z_env, _c, _s = relative_entropy_evolution(
            [s[2] for s in samples], u_refs, nu_grid=nu)

    leray = None
    if plan.regime_tag is RegimeTag.NAVIER_STOKES_FOURIER:
        leray = leray_functional([s[1] for s in samples], nu, kappa)

    # entropy-inequality audit: Sh H(t) + int production <= Sh H(0) + 1e-6
    t_arr, _inv, _fix, ent, prod = ledger.as_arrays()
    cumprod = np.concatenate([[0.0], np.cumsum(0.5 * (prod[1:] + prod[:-1]) * np.diff(t_arr))])
    audit_gap = float((regime.sh * ent + cumprod - regime.sh * ent[0]).max())

    defect = conservation_defect(ledger, regime, plan.dt)
    rr = RunResult(
        eps=eps,
        times=np.asarray(times),
        errors=np.asarray(errors),
        err_fields=np.asarray(err_fields),
        mode_amp=np.asarray(amps),
        mode_ref=np.asarray(refs_amp),
        theta_amp=np.asarray(theta_amps),
        boussinesq=bouss,
        entropy=np.stack([t_arr, ent, prod], axis=1),
        audit_gap=audit_gap,
        z_series=z_series,
        z_envelope=z_env,
        leray=leray,
        defect=defect,
    )
    return rr, final, ledger, [(t, hs) for t, hs, _ in samples]


def run_regime(plan):
    """Full epsilon sweep; persists CSVs under plan.out_dir/<regime>/."""
    grid = build_grid(plan.n_per_axis, plan.v_max, plan.sphere_order)
    op, ws = spectral_operator(grid)
    tc = transport_coefficients(op, tol=1e-10)
    nu, kappa = tc.nu, tc.kappa
    gap = op.spectral_gap()

    out_root = os.path.join(plan.out_dir, plan.regime_tag.value)
    os.makedirs(out_root, exist_ok=True)

    results = []
    for eps in plan.eps_list:
        try:
            rr, final, ledger, samples = run_single(plan, eps, grid, op, ws, nu, kappa)
            _persist_run(plan, out_root, rr, final, ledger, samples, nu, kappa)
        except KinhydroError as exc:
            rr = RunResult(
                eps=eps, times=np.array([]), errors=np.array([]),
                err_fields=np.zeros((0, 3)), mode_amp=np.array([]),
                mode_ref=np.array([]), theta_amp=np.array([]), boussinesq=None,
                entropy=np.zeros((0, 3)), audit_gap=np.nan, z_series=None,
                z_envelope=None, leray=None, defect=None,
                failed=f"{type(exc).__name__}: {exc}",
            )
        results.append(rr)

    good = [r for r in results if r.failed is None and len(r.errors)]
    fitted = ci = None
    if len(good) >= 3:
        try:
            fitted, ci = estimate_order([r.eps for r in good],
                                        [float(np.nanmax(r.errors)) for r in good])
        except ConfigError:
            pass

    report = ConvergenceReport(plan=plan, results=results, fitted_order=fitted,
                               fitted_order_ci=ci, nu=nu, kappa=kappa,
                               spectral_gap=gap)
    _persist_report(plan, out_root, report)
    return report


def _persist_run(plan, out_root, rr, final, ledger, samples, nu, kappa):
    d = os.path.join(out_root, f"eps_{rr.eps:g}")
    os.makedirs(d, exist_ok=True)
    save_checkpoint(final, os.path.join(d, "checkpoint.kck"))

    regime = regime_for(plan.regime_tag, rr.eps, plan.alpha)
    t_arr, ent_arr, _prod = (rr.entropy.T if len(rr.entropy) else (np.array([]),) * 3)
    meta = {
        "regime": plan.regime_tag.value, "eps": rr.eps, "nu": nu, "kappa": kappa,
        "k2": 1.0, "sh": regime.sh, "ma": regime.ma,
        "cells": "x".join(str(c) for c in plan.cells),
    }

    # diag.csv: per-sample diagnostics (plot inputs)
    diag_cols = ["time", "err_joint", "mode_amp", "mode_ref", "theta_amp",
                 "h_rel", "bouss_rho_theta", "bouss_div_u", "z_eps", "z_envelope"]
    rows = []
    for i, t in enumerate(rr.times):
        h_here = float(np.interp(t, t_arr, ent_arr)) if len(t_arr) else np.nan
        if rr.boussinesq is not None:
            brt, bdu = rr.boussinesq[i][1], rr.boussinesq[i][2]
        else:
            brt = bdu = np.nan
        if rr.z_series is not None:
            z, ze = rr.z_series[i][1], rr.z_envelope[i]
        else:
            z = ze = np.nan
        rows.append((t, rr.errors[i], rr.mode_amp[i], rr.mode_ref[i],
                     rr.theta_amp[i], h_here, brt, bdu, z, ze))
    write_csv(os.path.join(d, "diag.csv"), "diag", meta, diag_cols, rows)

    # series.csv: sampled moment fields, one column per (field, cell index)
    n_cells = plan.mesh().n_cells
    cols = ["time"]
    for fname in ("rho", "u1", "u2", "u3", "theta"):
        cols += [f"{fname}_{c:04d}" for c in range(n_cells)]
    srows = []
    for t, hs in samples:
        srows.append((t, *hs.rho.reshape(-1), *hs.u[0].reshape(-1),
                      *hs.u[1].reshape(-1), *hs.u[2].reshape(-1),
                      *hs.theta.reshape(-1)))
    write_csv(os.path.join(d, "series.csv"), "series", meta, cols, srows)

    # ledger.csv: per-step conservation/entropy stream
    led_cols = ["time", "h_rel", "production", "fixup_norm", "mass", "mom1",
                "mom2", "mom3", "energy"]
    t2, inv, fix, ent2, prod2 = ledger.as_arrays()
    led_rows = [(t2[i], ent2[i], prod2[i], fix[i], *inv[i]) for i in range(len(t2))]
    write_csv(os.path.join(d, "ledger.csv"), "ledger", meta, led_cols, led_rows)


def _persist_report(plan, out_root, report):
    cols = ["regime", "eps", "time", "err_rho", "err_u", "err_theta",
            "boussinesq", "entropy", "leray_slack"]
    rows = []
    for rr in report.results:
        if rr.failed is not None:
            continue
        t_arr, ent_arr, _ = rr.entropy.T
        leray_slack = (rr.leray[1] - rr.leray[0]) if rr.leray else np.nan
        for i, t in enumerate(rr.times):
            bouss = rr.boussinesq[i][1] + rr.boussinesq[i][2] if rr.boussinesq is not None else np.nan
            rows.append((
                plan.regime_tag.value, rr.eps, t,
                rr.err_fields[i][0], rr.err_fields[i][1], rr.err_fields[i][2],
                bouss, float(np.interp(t, t_arr, ent_arr)), leray_slack,
            ))
    meta = {
        "initial_data": plan.initial_data,
        "fitted_order": np.nan if report.fitted_order is None else report.fitted_order,
        "fitted_order_ci": np.nan if report.fitted_order_ci is None else report.fitted_order_ci,
        "nu": report.nu,
        "kappa": report.kappa,
        "nu_extrapolated": np.nan if plan.nu_extrapolated is None else plan.nu_extrapolated,
        "spectral_gap": report.spectral_gap,
        "n_per_axis": plan.n_per_axis,
        "sphere_order": plan.sphere_order,
        "failed_eps": ";".join(f"{r.eps:g}" for r in report.results if r.failed) or "none",
    }
    write_csv(os.path.join(out_root, "report.csv"), "report", meta, cols, rows)


def fit_decay_rate(times, amplitudes):
    """Exponential decay rate from a log-linear fit (amplitudes > 0)."""
    t = np.asarray(times, float)
    a = np.asarray(amplitudes, float)
    keep = a > 0
    if keep.sum() < 2:
        raise ConfigError("need at least two positive amplitudes")
    x = t[keep]
    y = np.log(a[keep])
    xb = x - x.mean()
    return float(-(xb @ (y - y.mean())) / (xb @ xb))


def fit_wave_frequency(times, amplitudes):
    """Damped-cosine fit a0 + a1 cos(w t) exp(-g t) for the acoustic standing
    wave's principal mode; returns (w, g)."""
    t = np.asarray(times, float)
    a = np.asarray(amplitudes, float)
    a0 = a[0]

    def model(tt, c0, c1, w, gam):
        return c0 + c1 * np.cos(w * tt) * np.exp(-gam * tt)

    p0 = (0.4 * a0, 0.6 * a0, np.sqrt(5.0 / 3.0), 0.05)
    popt, _ = optimize.curve_fit(model, t, a, p0=p0, maxfev=20000)
    return abs(popt[2]), popt[3]
