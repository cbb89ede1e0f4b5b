"""Monte-Carlo oracle for continuum hard-sphere collision brackets.

Evaluates the symmetric quadruple-integral pairing

    b(phi, psi) = (1/4) int int int Dphi Dpsi |(v-v_*).omega| M M* dv dv* dom

with Dphi = phi + phi_* - phi' - phi'_*, by sampling v, v_* from the unit
Gaussian and omega uniformly on S^2.  This equals <phi, L psi> for the
linearized hard-sphere operator and anchors the discrete pairings.

Run as a script for a convergence table of the anchor brackets.
"""

import numpy as np

SQRT_PI = np.sqrt(np.pi)


def bracket_mc(phi, psi, n_samples=4_000_000, seed=12345, batch=500_000):
    rng = np.random.default_rng(seed)
    total = 0.0
    count = 0
    while count < n_samples:
        m = min(batch, n_samples - count)
        v = rng.normal(size=(m, 3))
        vs = rng.normal(size=(m, 3))
        om = rng.normal(size=(m, 3))
        om /= np.linalg.norm(om, axis=1)[:, None]
        dot = np.einsum("ij,ij->i", v - vs, om)
        vp = v - dot[:, None] * om
        vsp = vs + dot[:, None] * om
        dphi = phi(v) + phi(vs) - phi(vp) - phi(vsp)
        dpsi = psi(v) + psi(vs) - psi(vp) - psi(vsp)
        total += float((dphi * dpsi * np.abs(dot)).sum())
        count += m
    # E over omega uniform = (1/4pi) int dom  =>  multiply by 4 pi
    return 0.25 * (total / count) * 4.0 * np.pi


A12 = lambda v: v[:, 0] * v[:, 1]
A12_S = lambda v: v[:, 0] * v[:, 1] * ((v**2).sum(1) - 7.0)
B1 = lambda v: 0.5 * ((v**2).sum(1) - 5.0) * v[:, 0]
B1_S = lambda v: v[:, 0] * ((v**2).sum(1) ** 2 - 14.0 * (v**2).sum(1) + 35.0)

if __name__ == "__main__":
    anchors = [
        ("<A12, L A12>", A12, A12, 6.4 * SQRT_PI),   # 64 sqrt(pi) / 10
        ("<A12s, L A12>", A12_S, A12, None),
        ("<A12s, L A12s>", A12_S, A12_S, None),
        ("<B1, L B1>", B1, B1, 32.0 * SQRT_PI / 3.0),
        ("<B1s, L B1>", B1_S, B1, None),
    ]
    for name, f, h, exact in anchors:
        val = bracket_mc(f, h, n_samples=8_000_000)
        extra = f"   exact {exact:.6f}" if exact is not None else ""
        print(f"{name} = {val:.6f}{extra}")
