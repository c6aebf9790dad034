# %% [markdown]
# # Frequency jumps and energy levels
#
# A sudden change of the oscillator frequency squeezes a coherent state.
# The closed-form tomogram follows from the complex classical trajectory
# `eps(t)`; here it is compared with a brute-force Moyal run.  The second
# half checks the energy-level equation on Fock tomograms.

# %%
import numpy as np

import tomolab as tl

X, theta = tl.x_axis(), tl.theta_axis()

# %% [markdown]
# ## Classical trajectory
#
# `eps'' + Omega(t)^2 eps = 0` with `eps(0) = 1`, `eps'(0) = i`.  The
# Wronskian is conserved along the solution.

# %%
profile = tl.parse_profile("jump:1,2@0")
tr = tl.solve_epsilon(profile, np.linspace(0, 1, 5))
print("eps(t):", np.round(tr.eps, 4))
print(f"Wronskian drift: {tr.wronskian_drift():.1e}")

# %% [markdown]
# ## Moyal reference on a wider phase-space grid
#
# After the jump the state spreads in momentum, so the phase-space grid
# is widened to `[-10, 10)`.

# %%
q = tl.uniform_axis("q", -10, 10, 256)
p = tl.uniform_axis("p", -10, 10, 256)
state = tl.coherent(1.0, profile)
W0 = tl.pacs_wigner(tl.coherent(1.0), 0.0, q, p)
traj = tl.moyal_evolve(W0, tl.parametric_potential(profile), dt=1e-3, steps=500,
                       snapshot_every=250)
for t, W in traj[1:]:
    ref = tl.pacs_optical_tomogram(state, t, X, theta)
    err = tl.compare(tl.radon_optical(W, X, theta), ref)["sup"]
    print(f"t = {t:.2f}: sup error {err:.1e}")

# %% [markdown]
# ## Energy levels
#
# The residual of the energy-level equation vanishes only at `E = m + 1/2`.

# %%
U = tl.harmonic(1)
for m in range(3):
    w = tl.pacs_optical_tomogram(tl.fock(m), 0.0, X, theta)
    row = [tl.energy_residual_optical(tl.EnergyQuery(E, w, U))[1] for E in (m + 0.4, m + 0.5, m + 0.6)]
    print(f"Fock {m}: residual at E = m+0.4, m+0.5, m+0.6 -> " + ", ".join(f"{r:.1e}" for r in row))
