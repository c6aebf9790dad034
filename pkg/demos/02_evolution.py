# %% [markdown]
# # Evolving tomograms
#
# The evolution equation acts on the tomogram directly, with no detour
# through wave functions or Wigner functions.  For the harmonic potential
# the generator reduces to `d/dtheta`, so a coherent state's tomogram just
# slides along the phase axis.  The Moyal equation for the Wigner function
# serves as an independent reference.

# %%
import numpy as np

import tomolab as tl

X, theta = tl.x_axis(), tl.theta_axis()
q, p = tl.q_axis(), tl.p_axis()
U = tl.harmonic(1)

# %% [markdown]
# ## Generator identities

# %%
w0 = tl.pacs_optical_tomogram(tl.coherent(1.0), 0.0, X, theta)
gap = tl.compare(tl.optical_generator(w0, U), tl.spectral_dtheta(w0))["sup"]
print(f"harmonic generator vs d/dtheta: {gap:.1e}")
fock = tl.pacs_optical_tomogram(tl.fock(2), 0.0, X, theta)
print(f"Fock-2 stationarity residual:   {tl.stationarity_residual(fock, tl.GeneratorSpec('optical-quantum', U)):.1e}")

# %% [markdown]
# ## A quarter period
#
# RK4 over `t = pi/2` should reproduce the initial tomogram shifted by a
# quarter turn in `theta`.

# %%
traj = tl.evolve(w0, tl.GeneratorSpec("optical-quantum", U), dt=5e-3, horizon=np.pi / 2,
                 snapshot_every=100)
t, w = traj[-1]
print(f"t = {t:.4f}: sup|w - w0(theta + t)| = {tl.compare(w, tl.rotate_theta(w0, t))['sup']:.1e}")
for t_k, f in traj:
    print(f"  t = {t_k:.3f}  normalization drift {f.metadata['normalization_drift']:.1e}")

# %% [markdown]
# ## Same flow in phase space
#
# The Moyal equation moves the Wigner function; its Radon transform lands
# on the evolved tomogram.

# %%
W0 = tl.pacs_wigner(tl.coherent(1.0), 0.0, q, p)
W = tl.moyal_evolve(W0, U, dt=np.pi / 2 / 400, steps=400)[-1][1]
print(f"Radon(Moyal) vs tomogram evolution: {tl.compare(tl.radon_optical(W, X, theta), w)['sup']:.1e}")

# %% [markdown]
# ## Anharmonic forces
#
# With a quartic term the quantum generator picks up one extra
# `hbar^2` term beyond the classical Liouville flow.

# %%
quartic = tl.parse_potential("0.25*q^4")
diff = tl.optical_generator(w0, quartic).values - tl.classical_optical_generator(w0, quartic).values
print(f"quantum minus classical generator, sup: {np.max(np.abs(diff)):.3e}")
