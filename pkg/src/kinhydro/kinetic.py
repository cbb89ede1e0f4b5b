"""Scaled kinetic evolution on periodic domains in fluctuation form.

The dimensionless equation  Sh dF/dt + v . grad_x F = (1/Kn) C(F)  is evolved
for F = M (1 + delta g) by Strang splitting:

  * half-step transport: exact Fourier phase shift of each velocity node's
    spatial field by v dt / (2 Sh);
  * full collision step per cell: the linear part exp(-tau L), tau =
    dt/(Sh Kn), applied through the spectral factorization of the assembled
    operator (never explicitly time-stepped), with the quadratic term
    (delta/(Sh Kn)) Q(g, g) integrated by midpoint RK2 inside the
    exponential frame;
  * half-step transport.

Per-step parallelism contract: transport is independent per velocity node,
collision per spatial cell; a barrier separates substeps.  Everything here
is single-threaded but organized along those partitions.
"""

import struct
from dataclasses import dataclass, field as dc_field
from enum import Enum

import numpy as np

from .collision import CollisionWorkspace
from .errors import ConfigError, InstabilityError
from .fluid import HydroState
from .linearized import assemble, q_quadratic_batch
from .spatial import SpatialMesh, divergence_norm, spectral_tail_fraction
from .velocity import VelocityGrid, build_grid


class RegimeTag(Enum):
    ACOUSTIC = "acoustic"
    STOKES_FOURIER = "stokes"
    INCOMPRESSIBLE_EULER = "euler"
    NAVIER_STOKES_FOURIER = "navier-stokes"
    CUSTOM = "custom"


@dataclass(frozen=True)
class ScalingRegime:
    """Knudsen/Strouhal/Mach triple with its fluid-limit tag."""

    kn: float
    sh: float
    ma: float
    tag: RegimeTag
    alpha: float | None = None

    def __post_init__(self):
        if min(self.kn, self.sh, self.ma) <= 0:
            raise ConfigError("Kn, Sh, Ma must all be positive")
        t = self.tag
        ok = True
        why = ""
        if t is RegimeTag.ACOUSTIC:
            ok = self.sh == 1.0 and self.ma <= np.sqrt(self.kn) + 1e-15
            why = "acoustic regime requires Sh = 1 and Ma <= sqrt(Kn)"
        elif t is RegimeTag.STOKES_FOURIER:
            ok = self.sh == self.kn and self.ma < self.kn
            why = "Stokes-Fourier regime requires Sh = Kn and Ma < Kn"
        elif t is RegimeTag.INCOMPRESSIBLE_EULER:
            a = self.alpha
            ok = (a is not None and 0.0 < a < 1.0
                  and abs(self.sh - self.kn**a) < 1e-12 and self.sh == self.ma)
            why = "incompressible-Euler regime requires Sh = Ma = Kn^alpha, 0 < alpha < 1"
        elif t is RegimeTag.NAVIER_STOKES_FOURIER:
            ok = self.sh == self.kn and self.ma == self.kn
            why = "Navier-Stokes-Fourier regime requires Sh = Ma = Kn"
        if not ok:
            raise ConfigError(
                f"{why} (got Kn={self.kn}, Sh={self.sh}, Ma={self.ma})"
            )


def regime_for(tag, eps, alpha=0.5):
    """Default parameter concretization per fluid-limit regime.

    Where only asymptotic orders are prescribed, the choices are:
    acoustic Ma = sqrt(eps); Stokes Ma = eps^2; Euler alpha = 1/2.
    """
    tag = RegimeTag(tag) if not isinstance(tag, RegimeTag) else tag
    if tag is RegimeTag.ACOUSTIC:
        return ScalingRegime(eps, 1.0, np.sqrt(eps), tag)
    if tag is RegimeTag.STOKES_FOURIER:
        return ScalingRegime(eps, eps, eps**2, tag)
    if tag is RegimeTag.INCOMPRESSIBLE_EULER:
        d = eps**alpha
        return ScalingRegime(eps, d, d, tag, alpha=alpha)
    if tag is RegimeTag.NAVIER_STOKES_FOURIER:
        return ScalingRegime(eps, eps, eps, tag)
    return ScalingRegime(eps, 1.0, eps, RegimeTag.CUSTOM)


@dataclass
class ConservationLedger:
    """Per-step history of global invariants and collision corrections."""

    times: list = dc_field(default_factory=list)
    invariants: list = dc_field(default_factory=list)      # (5,) fluctuation totals
    fixup_norms: list = dc_field(default_factory=list)     # per-step collision correction
    entropy: list = dc_field(default_factory=list)         # global H(F|M)
    production: list = dc_field(default_factory=list)      # Sh * (-dH_collision)/dt
    flux_records: list = dc_field(default_factory=list)    # mean |momentum flux| rows

    def as_arrays(self):
        return (np.asarray(self.times), np.asarray(self.invariants),
                np.asarray(self.fixup_norms), np.asarray(self.entropy),
                np.asarray(self.production))


@dataclass
class DefectReport:
    """Discrete stand-in for the conservation-defect terms: per-unit-time
    drift of the five invariants plus scaled collision-correction norms."""

    drift_per_time: np.ndarray
    scaled_defect_max: float
    scaled_defect_mean: float

    def max_drift(self):
        return float(np.abs(self.drift_per_time).max())


class DistributionField:
    """Fluctuation-form kinetic state on (cells x velocity nodes)."""

    def __init__(self, grid, mesh, regime, g_matrix, time=0.0):
        self.grid = grid
        self.mesh = mesh
        self.regime = regime
        self.g = np.ascontiguousarray(g_matrix, dtype=np.float64)  # (N, cells)
        if self.g.shape != (grid.size, mesh.n_cells):
            raise ConfigError(
                f"field shape {self.g.shape} != (nodes {grid.size}, cells {mesh.n_cells})"
            )
        self.time = float(time)

    def copy(self):
        return DistributionField(self.grid, self.mesh, self.regime,
                                 self.g.copy(), self.time)


_THEOREM_FAMILIES = {
    RegimeTag.ACOUSTIC: "acoustic",
    RegimeTag.STOKES_FOURIER: "stokes",
    RegimeTag.NAVIER_STOKES_FOURIER: "stokes",
    RegimeTag.INCOMPRESSIBLE_EULER: "euler",
}


def init_from_theorem(regime, mesh, grid, rho_in=None, u_in=None, theta_in=None,
                      div_tol=1e-10, tail_tol=1e-6):
    """Initial field of local Maxwellians per the regime's limit theorem.

    acoustic:       M_(1 + d rho, d u, 1 + d theta)
    euler:          M_(1, d u, 1)
    stokes / NSF:   M_(1 - d theta, d u, 1 + d theta)

    with d = Ma.  The exact fluctuation g = (M_local/M - 1)/d is stored, so
    the initial state is the theorem's Maxwellian family to machine
    precision, not its linearization.  For the incompressible regimes u_in
    must be spectrally divergence-free.
    """
    fam = _THEOREM_FAMILIES.get(regime.tag, "stokes")
    z = np.zeros(mesh.shape)
    rho_in = z if rho_in is None else np.asarray(rho_in, float)
    theta_in = z if theta_in is None else np.asarray(theta_in, float)
    u_in = np.zeros((3,) + mesh.shape) if u_in is None else np.asarray(u_in, float)
    if fam in ("stokes", "euler"):
        d = divergence_norm(u_in, mesh)
        if d > div_tol:
            raise ConfigError(f"u_in must be solenoidal for {fam}: ||div u|| = {d:.3e}")
    for name, f in (("rho", rho_in), ("theta", theta_in),
                    ("u1", u_in[0]), ("u2", u_in[1])):
        tail = spectral_tail_fraction(f, mesh)
        if tail > tail_tol:
            raise ConfigError(f"{name} under-resolved: spectral tail fraction {tail:.2e}")

    d = regime.ma
    if fam == "acoustic":
        rho_l = 1.0 + d * rho_in
        theta_l = 1.0 + d * theta_in
    elif fam == "euler":
        rho_l = np.ones(mesh.shape)
        theta_l = np.ones(mesh.shape)
    else:
        rho_l = 1.0 - d * theta_in
        theta_l = 1.0 + d * theta_in
    if np.any(rho_l <= 0) or np.any(theta_l <= 0):
        raise ConfigError("local Maxwellian family has nonpositive rho or theta")

    rho_c = rho_l.reshape(-1)
    th_c = theta_l.reshape(-1)
    u_c = u_in.reshape(3, -1) * d
    v = grid.nodes                                   # (N, 3)
    # log(M_local / M) per (node, cell)
    dvu = (grid.vsq[:, None] - 2.0 * (v @ u_c) + (u_c**2).sum(axis=0)[None, :])
    logm = (np.log(rho_c) - 1.5 * np.log(th_c))[None, :] - dvu / (2.0 * th_c[None, :]) \
        + 0.5 * grid.vsq[:, None]
    g = np.expm1(logm) / d
    return DistributionField(grid, mesh, regime, g, time=0.0)


def extract_hydro(field):
    """Rescaled hydrodynamic fields (<g>, <v g>, <(|v|^2/3 - 1) g>) per cell."""
    grid = field.grid
    wm = grid.weight * grid.maxwellian_values
    G = field.g
    rho = wm @ G
    u = (grid.nodes.T * wm) @ G
    theta = ((grid.vsq / 3.0 - 1.0) * wm) @ G
    mesh = field.mesh
    return HydroState(
        mesh,
        rho.reshape(mesh.shape),
        u.reshape((3,) + mesh.shape),
        theta.reshape(mesh.shape),
        field.time,
    )


# ---------------------------------------------------------------------------
# spectral collision operator cache (shared across runs on one grid)

_OPERATOR_CACHE = {}


def spectral_operator(grid, ws=None):
    """Assembled operator plus eigendecomposition for this grid, cached."""
    key = grid.signature()
    if key not in _OPERATOR_CACHE:
        ws = ws if ws is not None else CollisionWorkspace(grid)
        op = assemble(grid, ws)
        op.eigendecomposition()
        _OPERATOR_CACHE[key] = (op, ws)
    return _OPERATOR_CACHE[key]


class KineticEvolver:
    """Strang-split integrator bound to one (grid, mesh, regime) triple."""

    def __init__(self, field, dt, nonlinear=True, op=None, ws=None):
        if dt <= 0:
            raise ConfigError("dt must be positive")
        self.grid = field.grid
        self.mesh = field.mesh
        self.regime = field.regime
        self.dt = float(dt)
        self.nonlinear = bool(nonlinear)
        if op is None or ws is None:
            op, ws = spectral_operator(self.grid)
        self.op = op
        self.ws = ws
        lam, vec = op.eigendecomposition()
        tau = self.dt / (self.regime.sh * self.regime.kn)
        if lam.min() < -1e-10 * max(lam.max(), 1.0):
            raise InstabilityError(f"operator not PSD: min eigenvalue {lam.min():.3e}")
        self.mult_half = np.exp(-0.5 * tau * np.maximum(lam, 0.0))
        # collision substep is a contraction on the invariant complement
        assert self.mult_half.max() <= 1.0 + 1e-12
        self.basis = vec
        self.scale = op.s
        self.phase_half = self._transport_phases(0.5 * self.dt / self.regime.sh)
        self.q_coef = self.regime.ma / (self.regime.sh * self.regime.kn)

    def _transport_phases(self, t):
        mesh = self.mesh
        ks = mesh.k_vectors()
        v = self.grid.nodes
        if mesh.dim == 1:
            arg = np.multiply.outer(v[:, 0], ks[0])
        else:
            arg = (np.multiply.outer(v[:, 0], np.broadcast_to(ks[0], mesh.shape))
                   + np.multiply.outer(v[:, 1], np.broadcast_to(ks[1], mesh.shape)))
        return np.exp(-1j * t * arg)

    # -- substeps ------------------------------------------------------------
    def transport_half(self, G, backward=False):
        mesh = self.mesh
        Gs = G.reshape((self.grid.size,) + mesh.shape)
        axes = tuple(range(1, 1 + mesh.dim))
        gh = np.fft.fftn(Gs, axes=axes)
        gh *= np.conj(self.phase_half) if backward else self.phase_half
        out = np.real(np.fft.ifftn(gh, axes=axes))
        return np.ascontiguousarray(out.reshape(self.grid.size, mesh.n_cells))

    def _exp_apply(self, G, mult):
        z = self.basis.T @ (self.scale[:, None] * G)
        z *= mult[:, None]
        return (self.basis @ z) / self.scale[:, None]

    def collision_full(self, G):
        """exp(-tau L) with midpoint-RK2 quadratic term in the exponential frame."""
        dt = self.dt
        if not self.nonlinear or self.q_coef == 0.0:
            out = self._exp_apply(G, self.mult_half**2)
            return out, 0.0
        k1 = q_quadratic_batch(G, self.ws)
        n1 = self.ws.last_fixup_norm
        pair = np.concatenate([G + (0.5 * dt) * self.q_coef * k1, G], axis=1)
        pair = self._exp_apply(pair, self.mult_half)
        c = G.shape[1]
        g_mid, g_half = pair[:, :c], pair[:, c:]
        k2 = q_quadratic_batch(g_mid, self.ws)
        n2 = self.ws.last_fixup_norm
        out = self._exp_apply(g_half + dt * self.q_coef * k2, self.mult_half)
        return out, max(n1, n2)


def global_entropy(field):
    """Sum over cells of H(F|M) * cell_volume, F = M (1 + delta g)."""
    grid = field.grid
    d = field.regime.ma
    m = grid.maxwellian_values[:, None]
    F = m * (1.0 + d * field.g)
    Fp = np.maximum(F, 1e-300)
    integrand = np.where(F > 0, Fp * np.log(Fp / m) - Fp + m, m)
    return float(grid.weight * integrand.sum() * field.mesh.cell_volume)


def evolve(field, t_final, dt, nonlinear=True, sample_every=None,
           on_sample=None, guard=1e3):
    """Advance a fluctuation field to t_final; returns (field, ledger).

    sample_every (steps) plus on_sample(field) hook drives diagnostics
    without storing the full trajectory.  Raises InstabilityError if
    ||g||_inf exceeds `guard`.
    """
    ev = KineticEvolver(field, dt, nonlinear=nonlinear)
    n_steps = int(round(t_final / dt))
    if abs(n_steps * dt - t_final) > 1e-9 * max(1.0, t_final):
        raise ConfigError("t_final must be a multiple of dt")
    led = ConservationLedger()
    grid, mesh = field.grid, field.mesh
    wm = grid.weight * grid.maxwellian_values
    inv_w = grid.invariants * wm[None, :]

    def record(t, G, fix, prod, h_now):
        led.times.append(t)
        led.invariants.append(inv_w @ G.sum(axis=1) * mesh.cell_volume)
        led.fixup_norms.append(fix)
        led.entropy.append(h_now)
        led.production.append(prod)
        led.flux_records.append(float(np.abs((grid.nodes[:, 0] * wm) @ G).mean()))

    h0 = global_entropy(field)
    record(field.time, field.g, 0.0, 0.0, h0)
    out = field
    if on_sample is not None:
        on_sample(out)
    for step in range(1, n_steps + 1):
        G = ev.transport_half(out.g)
        h_pre = global_entropy(DistributionField(grid, mesh, field.regime, G, out.time))
        G, fix = ev.collision_full(G)
        h_post = global_entropy(DistributionField(grid, mesh, field.regime, G, out.time))
        G = ev.transport_half(G)
        t = field.time + step * dt
        out = DistributionField(grid, mesh, field.regime, G, t)
        if not np.isfinite(G).all() or np.abs(G).max() > guard:
            raise InstabilityError(
                f"fluctuation blow-up at t = {t:.4g}", last_stable_time=t - dt
            )
        record(t, G, fix, field.regime.sh * (h_pre - h_post) / dt, global_entropy(out))
        if on_sample is not None and sample_every and step % sample_every == 0:
            on_sample(out)
    return out, led


def conservation_defect(ledger, regime, dt):
    """Drift of the global invariants per unit time plus the collision
    corrections scaled by 1/(Kn Ma Sh), the discrete defect normalization."""
    t, inv, fix, _, _ = ledger.as_arrays()
    if len(t) < 2:
        raise ConfigError("ledger must contain at least two records")
    span = t[-1] - t[0]
    drift = (inv[-1] - inv[0]) / max(span, 1e-300)
    scale = 1.0 / (regime.kn * regime.ma * regime.sh)
    scaled = fix[1:] * scale * dt / max(span, 1e-300)
    return DefectReport(
        drift_per_time=drift,
        scaled_defect_max=float(fix[1:].max() * scale) if len(fix) > 1 else 0.0,
        scaled_defect_mean=float(scaled.sum()),
    )


# ---------------------------------------------------------------------------
# checkpoint container

_MAGIC = b"KHCK"
_VERSION = 1


def save_checkpoint(field, path):
    """Self-describing binary state dump (little-endian, float64 payload).

    Layout: magic 'KHCK', u32 version, then the header
    (i32 n_per_axis, f64 v_max, i32 sphere_order, i32 dim, i32 shape[dim],
    f64 lengths[dim], f64 kn, f64 sh, f64 ma, 16-byte regime tag,
    f64 alpha (nan when absent), f64 time), then g row-major (nodes, cells).
    """
    mesh, grid, reg = field.mesh, field.grid, field.regime
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack("<I", _VERSION))
        f.write(struct.pack("<i", grid.n_per_axis))
        f.write(struct.pack("<d", grid.v_max))
        f.write(struct.pack("<i", grid.sphere_order))
        f.write(struct.pack("<i", mesh.dim))
        f.write(struct.pack(f"<{mesh.dim}i", *mesh.shape))
        f.write(struct.pack(f"<{mesh.dim}d", *mesh.lengths))
        f.write(struct.pack("<3d", reg.kn, reg.sh, reg.ma))
        f.write(struct.pack("16s", reg.tag.value.encode()))
        f.write(struct.pack("<d", np.nan if reg.alpha is None else reg.alpha))
        f.write(struct.pack("<d", field.time))
        f.write(field.g.astype("<f8").tobytes(order="C"))


def load_checkpoint(path):
    with open(path, "rb") as f:
        if f.read(4) != _MAGIC:
            raise ConfigError(f"{path} is not a kinetic checkpoint")
        (version,) = struct.unpack("<I", f.read(4))
        if version != _VERSION:
            raise ConfigError(f"unsupported checkpoint version {version}")
        (n,) = struct.unpack("<i", f.read(4))
        (v_max,) = struct.unpack("<d", f.read(8))
        (order,) = struct.unpack("<i", f.read(4))
        (dim,) = struct.unpack("<i", f.read(4))
        shape = struct.unpack(f"<{dim}i", f.read(4 * dim))
        lengths = struct.unpack(f"<{dim}d", f.read(8 * dim))
        kn, sh, ma = struct.unpack("<3d", f.read(24))
        (tag_raw,) = struct.unpack("16s", f.read(16))
        (alpha,) = struct.unpack("<d", f.read(8))
        (time,) = struct.unpack("<d", f.read(8))
        grid = build_grid(n, v_max, order)
        mesh = SpatialMesh(shape=tuple(shape), lengths=tuple(lengths))
        tag = RegimeTag(tag_raw.rstrip(b"\x00").decode())
        reg = ScalingRegime(kn, sh, ma, tag, alpha=None if np.isnan(alpha) else alpha)
        g = np.frombuffer(f.read(), dtype="<f8").reshape(grid.size, mesh.n_cells)
    return DistributionField(grid, mesh, reg, g.copy(), time=time)
