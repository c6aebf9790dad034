# %% [markdown]
# # Tomograms of oscillator states
#
# A tomogram is a family of ordinary probability densities: for each
# local-oscillator phase `theta`, `w(X, theta)` is the distribution of the
# rotated quadrature `X = q cos(theta) + p sin(theta)`.  This script builds
# tomograms of a few photon-added coherent states two ways (closed form and
# Radon transform of the Wigner function), checks they agree, and inverts
# one of them back to a Wigner function.

# %%
import numpy as np

import tomolab as tl

X, theta = tl.x_axis(), tl.theta_axis()
q, p = tl.q_axis(), tl.p_axis()

# %% [markdown]
# ## Closed form against the Radon transform

# %%
for state in tl.catalog():
    analytic = tl.pacs_optical_tomogram(state, 0.0, X, theta)
    radon = tl.radon_optical(tl.pacs_wigner(state, 0.0, q, p), X, theta)
    print(f"{state.label:<24} sup|analytic - radon| = {tl.compare(analytic, radon)['sup']:.1e}"
          f"   normalization residual = {tl.normalization_residual(analytic):.1e}")

# %% [markdown]
# Every column of a tomogram integrates to one, and the symmetry
# `w(-X, theta + pi) = w(X, theta)` holds to rounding.

# %%
w = tl.pacs_optical_tomogram(tl.coherent(1 + 0.5j), 0.0, X, theta)
print("symmetry residual:", tl.symmetry_residual(w))
print("<X>(theta) at theta = 0, pi/2:", tl.quadrature_moment(w, 1).values[[0, 16]].real)

# %% [markdown]
# ## Symplectic tomogram
#
# The symplectic tomogram `M(X, mu, nu)` drops the constraint
# `mu^2 + nu^2 = 1`.  It is homogeneous of degree -1, so scaling all three
# arguments by 2 halves it.

# %%
s = tl.fock(1)
a = tl.pacs_symplectic_tomogram(s, 0.0, 0.4, 0.6, 0.3)
b = tl.pacs_symplectic_tomogram(s, 0.0, 0.8, 1.2, 0.6)
print(f"M(0.4, 0.6, 0.3) = {a:.6f},  2 M(0.8, 1.2, 0.6) = {2 * b:.6f}")

# %% [markdown]
# ## Back to the Wigner function
#
# Filtered back-projection recovers the Wigner function, including the
# negative dip of the one-photon state at the origin.

# %%
rec = tl.inverse_radon(tl.pacs_optical_tomogram(tl.fock(1), 0.0, X, theta), q, p)
i0 = int(np.argmin(np.abs(q.values)))
print(f"reconstructed W(0, 0) = {rec.values[i0, i0].real:.4f}   (exact value -2)")
