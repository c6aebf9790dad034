"""Radon transforms between phase-space fields and tomograms.

Forward transforms use the projection-slice route: the characteristic
function ``chi(eta, theta)`` is the 2-D Fourier transform of ``W`` on the
line ``(eta cos theta, eta sin theta)``, and the tomogram is its 1-D inverse
in ``eta``.  The slice is evaluated exactly (a separable direct transform,
i.e. band-limited interpolation of the 2-D spectrum) rather than by
interpolating a gridded FFT, which keeps the result spectrally accurate.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractViolation, DomainError
from .fields import Axis, Field, dual_axis, fd_weights, theta_axis, x_axis

__all__ = [
    "characteristic_slice", "radon_optical", "radon_symplectic",
    "inverse_radon", "ramp_filter", "optical_to_symplectic", "rotate_theta", "characteristic_fn",
    "inverse_characteristic_fn", "characteristic_at", "quadrature_moment",
    "moment_from_characteristic", "symmetry_residual", "normalization_residual",
]

TWO_PI = 2.0 * np.pi
MAX_MOMENT = 8


def _phase_space_axes(W: Field):
    if W.rank != 2 or not (W.has_axis("q") and W.has_axis("p")):
        raise DomainError("expected a phase-space field over (q, p)")
    return W.axis("q"), W.axis("p"), W.axis_index("q") == 0


def _wigner_values(W):
    q_ax, p_ax, q_first = _phase_space_axes(W)
    vals = W.values if q_first else W.values.T
    return q_ax, p_ax, vals


def _inverse_in_eta(chi, etas, d_eta, xs):
    """``w(X) = (1/2pi) int chi(eta) exp(-i eta X) d eta`` on the nodes ``xs``."""
    kernel = np.exp(-1j * np.outer(xs, etas)) * (d_eta / TWO_PI)
    return kernel @ chi


def characteristic_slice(W: Field, etas, thetas, scale_p=1.0):
    """``chi(eta, theta) = int W exp(i eta (q cos theta + p sin theta)) dq dp / 2pi``.

    Returns an array of shape ``(len(etas), len(thetas))``.  ``scale_p``
    multiplies ``p`` in the projection (``1 / (m omega)`` for dimensional
    optical tomograms).
    """
    q_ax, p_ax, vals = _wigner_values(W)
    q, p = q_ax.values, p_ax.values
    etas = np.asarray(etas, float)
    real = not np.any(vals.imag)
    # real W: chi(-eta) = conj chi(eta), so only |eta| is evaluated
    nodes, back = np.unique(np.abs(etas), return_inverse=True) if real else (etas, None)
    vals = np.ascontiguousarray(vals.real if real else vals)
    out = np.empty((len(nodes), len(thetas)), complex)
    w = q_ax.step * p_ax.step / TWO_PI
    for j, th in enumerate(thetas):
        eq = np.exp(1j * np.outer(nodes * np.cos(th), q))
        ep = np.exp(1j * np.outer(nodes * np.sin(th) * scale_p, p))
        out[:, j] = np.einsum("kp,kp->k", eq @ vals, ep) * w
    if real:
        out = np.where((etas < 0)[:, None], out[back].conj(), out[back])
    return out


def _padded_dual(x_ax: Axis, pad, label):
    return dual_axis(Axis("X", x_ax.start, x_ax.step, pad * x_ax.count, False, x_ax.mode), label)


def radon_optical(W: Field, x_ax: Axis = None, th_ax: Axis = None,
                  constants=None, pad=2) -> Field:
    """Optical tomogram ``w(X, theta) = int W delta(X - q cos - p sin) dq dp / 2pi``.

    The slice is sampled on the wavenumber grid of a ``pad``-times longer X
    period, so tails of ``w`` beyond the X grid do not wrap around onto it.
    ``constants`` (mass, frequency) scale ``p`` to ``p / (m w)``.
    """
    x_ax = x_ax or x_axis()
    th_ax = th_ax or theta_axis()
    scale = 1.0 if constants is None else 1.0 / (constants.mass * constants.frequency)
    eta_ax = _padded_dual(x_ax, pad, "eta")
    etas = eta_ax.values
    chi = characteristic_slice(W, etas, th_ax.values, scale)
    w = _inverse_in_eta(chi, etas, eta_ax.step, x_ax.values)
    if np.isrealobj(W.values) or not np.any(W.values.imag):
        w = w.real
    meta = dict(W.metadata)
    meta.update(kind="optical", probability=W.metadata.get("kind") in ("wigner", "phase"))
    return Field((x_ax, th_ax), w, meta)


def radon_symplectic(W: Field, x_ax: Axis, mu_ax: Axis, nu_ax: Axis, pad=2) -> Field:
    """Symplectic tomogram ``M(X, mu, nu) = int W delta(X - mu q - nu p) dq dp / 2pi``.

    The 2-D transform of ``W`` is evaluated on the lattice ``(z mu, z nu)``
    separably.  Nodes with ``mu = nu = 0`` are set to NaN and counted in the
    ``undefined_nodes`` metadata entry.  ``pad`` as in :func:`radon_optical`.
    """
    q_ax, p_ax, vals = _wigner_values(W)
    q, p = q_ax.values, p_ax.values
    z_ax = _padded_dual(x_ax, pad, "z")
    z = z_ax.values
    mus, nus = mu_ax.values, nu_ax.values
    w = q_ax.step * p_ax.step / TWO_PI
    real = not np.any(vals.imag)
    # real W: chi(-z) = conj chi(z), so only |z| is evaluated
    nodes, back = np.unique(np.abs(z), return_inverse=True) if real else (z, None)
    vals = np.ascontiguousarray(vals.real if real else vals)
    # half[z, mu, p] = sum_q exp(i z mu q) W[q, p]
    phase = np.multiply.outer(np.outer(nodes, mus), q).reshape(-1, len(q))
    if real:
        half = (np.cos(phase) @ vals) + 1j * (np.sin(phase) @ vals)
    else:
        half = np.exp(1j * phase) @ vals
    half = half.reshape(len(nodes), len(mus), len(p))
    chi = half @ np.exp(1j * np.multiply.outer(nodes, np.outer(p, nus)))
    chi *= w
    if real:
        chi = np.where((z < 0)[:, None, None], chi[back].conj(), chi[back])
    kernel = np.exp(-1j * np.outer(x_ax.values, z)) * (z_ax.step / TWO_PI)
    M = np.tensordot(kernel, chi, axes=(1, 0))
    if not np.any(W.values.imag):
        M = M.real
    singular = (mus[:, None] == 0) & (nus[None, :] == 0)
    if singular.any():
        M = np.where(singular[None], np.nan, M)
    meta = dict(W.metadata)
    meta.update(kind="symplectic", undefined_nodes=int(singular.sum()))
    return Field((x_ax, mu_ax, nu_ax), M, meta)


def symmetry_residual(w: Field, modes=None) -> float:
    """Sup-norm of ``w(-X, theta + pi) - w(X, theta)`` on the grid.

    For several modes the reflection is applied per mode and the worst case
    reported.  Needs X grids symmetric about zero
    (``start = -count/2 * step``) and even theta counts; ``X = +start`` is
    taken as the periodic image of ``X = start``.
    """
    modes = w.modes if modes is None else modes
    worst = 0.0
    for m in modes:
        if not (w.has_axis("X", m) and w.has_axis("theta", m)):
            continue
        ix, it = w.axis_index("X", m), w.axis_index("theta", m)
        xa, ta = w.axes[ix], w.axes[it]
        if ta.count % 2 or abs(xa.start + xa.count // 2 * xa.step) > 1e-12 * xa.step:
            raise ContractViolation(
                "symmetry check needs a symmetric X grid and even theta count")
        flipped = np.roll(np.flip(w.values, axis=ix), 1, axis=ix)
        shifted = np.roll(flipped, -(ta.count // 2), axis=it)
        worst = max(worst, float(np.max(np.abs(shifted - w.values))))
    return worst


def normalization_residual(w: Field) -> float:
    """``max |int w dX_1 ... dX_n - 1|`` over the remaining axes."""
    vals = w.values
    idx = tuple(i for i, a in enumerate(w.axes) if a.label == "X")
    if not idx:
        raise DomainError("field has no X axis")
    tot = vals.sum(axis=idx) * np.prod([w.axes[i].step for i in idx])
    return float(np.max(np.abs(tot - 1.0)))


def _hann_taper(eta, eta_max, start):
    a = np.abs(eta) / eta_max
    if start >= 1.0:
        return np.ones_like(a)
    ramp = np.clip((a - start) / (1.0 - start), 0.0, 1.0)
    return np.where(a <= start, 1.0, np.cos(0.5 * np.pi * ramp) ** 2)


def ramp_filter(eta, dx, count):
    """Band-limited ramp filter built from the sampled spatial kernel.

    The kernel of ``(1/2pi) int |eta| exp(-i eta u) d eta`` band-limited to
    ``pi/dx`` is ``pi/(2 dx^2)`` at ``u=0``, ``-2/(pi n^2 dx^2)`` at odd
    ``u = n dx`` and zero at even ones.  Transforming it over ``count`` taps
    makes the filtering a linear (not circular) convolution, which matters
    because ``|eta|`` gives the filtered projections slow ``1/u^2`` tails.
    """
    n = np.arange(-(count // 2), count // 2)
    k = np.zeros(count)
    odd = n % 2 == 1
    k[odd] = -2.0 / (np.pi * (n[odd] * dx) ** 2)
    k[n == 0] = np.pi / (2.0 * dx ** 2)
    return (np.exp(1j * np.outer(eta, n * dx)) @ k).real * dx


def _upsample_periodic(vals, factor):
    """Band-limited upsampling along axis 1 (periodic, uniform)."""
    n = vals.shape[1]
    c = np.fft.fft(vals, axis=1)
    out = np.zeros((vals.shape[0], n * factor), complex)
    h = n // 2
    out[:, :h] = c[:, :h]
    out[:, -h:] = c[:, -h:] if n % 2 == 0 else c[:, -h:]
    if n % 2 == 0:
        out[:, h] = 0.5 * c[:, h]
        out[:, -h] = 0.5 * c[:, h]
    else:
        out[:, h] = c[:, h]
    return np.fft.ifft(out, axis=1) * factor


def inverse_radon(w: Field, q_ax: Axis = None, p_ax: Axis = None,
                  taper_start=0.8, symmetry_tol=1e-6, cutoff=1e-15,
                  angular_upsample=None) -> Field:
    """Filtered back-projection of an optical tomogram.

    ``W(q,p) = (1/2pi) int_0^pi dtheta int |eta| chi(eta,theta)
    exp(-i eta (q cos theta + p sin theta)) d eta`` with a Hann taper on the
    ramp filter above ``taper_start`` times the Nyquist wavenumber.  The
    projections are zero-padded so that the filter acts as a linear
    convolution out to the largest projected radius of the output grid.
    Wavenumbers whose filtered weight is below ``cutoff`` (relative) are
    skipped.

    The back-projection integrand ``g(rho cos(theta - phi))`` oscillates in
    theta with bandwidth about ``rho * eta``, which outruns the measured
    theta grid at large radii even when the sinogram itself is well
    resolved.  The filtered sinogram is therefore trigonometrically
    interpolated onto ``angular_upsample`` times more angles; by default the
    factor is the smallest power of two covering ``rho_max * eta_sig``, with
    ``eta_sig`` the band where the filtered data exceed 1e-6 of its peak.
    The report (symmetry residual, taper, padding, upsampling) lands in the
    result's metadata.
    """
    res = symmetry_residual(w)
    if res > symmetry_tol:
        raise ContractViolation(
            f"tomogram violates w(-X, theta+pi) = w(X, theta) (residual {res:.2e})")
    q_ax = q_ax or Axis("q", -8.0, 1 / 16, 256)
    p_ax = p_ax or Axis("p", -8.0, 1 / 16, 256)
    ix, it = w.axis_index("X"), w.axis_index("theta")
    x_ax, th_ax = w.axes[ix], w.axes[it]
    vals = np.moveaxis(w.values, (ix, it), (0, 1))
    q, p = q_ax.values, p_ax.values
    r_max = np.hypot(np.abs(q).max(), np.abs(p).max())
    x_max = max(abs(x_ax.start), abs(x_ax.values[-1]))
    pad = 1
    while pad * x_ax.length < 2.0 * (r_max + x_max):
        pad *= 2
    eta_ax = dual_axis(Axis("X", x_ax.start, x_ax.step, pad * x_ax.count))
    eta = eta_ax.values
    chi = np.exp(1j * np.outer(eta, x_ax.values)) @ vals * x_ax.step
    filt = ramp_filter(eta, x_ax.step, eta_ax.count)
    filt *= _hann_taper(eta, np.abs(eta).max(), taper_start)
    g_all = chi * (filt * eta_ax.step)[:, None]
    mag = np.abs(g_all).max(axis=1)
    keep = mag > cutoff * mag.max()
    eta, g_all, mag = eta[keep], g_all[keep], mag[keep]
    n_th = th_ax.count
    if angular_upsample is None:
        eta_sig = np.abs(eta[mag > 1e-6 * mag.max()]).max()
        angular_upsample = 1
        while angular_upsample * n_th / 2 < r_max * eta_sig and angular_upsample < 16:
            angular_upsample *= 2
    if angular_upsample > 1:
        g_all = _upsample_periodic(g_all, angular_upsample)
    n_fine = n_th * angular_upsample
    step = th_ax.step / angular_upsample
    real = not np.any(w.values.imag)
    if real:
        # chi(-eta) = conj chi(eta): keep eta >= 0 with doubled weight
        pos = eta >= 0
        eta, g_all = eta[pos], g_all[pos] * np.where(eta[pos] > 0, 2.0, 1.0)[:, None]
    W = np.zeros((len(q), len(p)), complex)
    angles = th_ax.start + step * np.arange(n_fine // 2)
    for lo in range(0, len(angles), 16):
        th = angles[lo:lo + 16]
        eq = np.exp(-1j * q[:, None, None] * (np.cos(th)[:, None] * eta)[None])
        eq *= g_all[:, lo:lo + 16].T[None]
        ep = np.exp(-1j * (np.sin(th)[:, None] * eta)[:, :, None] * p[None, None, :])
        W += eq.reshape(len(q), -1) @ ep.reshape(-1, len(p))
    W *= step / TWO_PI
    meta = dict(w.metadata)
    meta.update(kind="wigner", symmetry_residual=res, taper_start=taper_start,
                taper="hann", padding=pad, filter="ram-lak",
                angular_upsample=int(angular_upsample))
    if real:
        W = W.real
    return Field((q_ax, p_ax), W, meta)


def _trig_interp_theta(vals, th_ax: Axis, phis):
    """Periodic band-limited interpolation along axis 1 of ``vals``."""
    n = th_ax.count
    c = np.fft.fft(vals, axis=1) / n
    k = np.fft.fftfreq(n, 1.0 / n)
    if n % 2 == 0:
        c[:, n // 2] *= 0.5
        c = np.concatenate([c, c[:, n // 2:n // 2 + 1]], axis=1)
        k = np.concatenate([k, [n // 2]])
    phase = np.exp(1j * np.outer(k, np.asarray(phis) - th_ax.start))
    return c @ phase


def rotate_theta(w: Field, angle: float, mode=0) -> Field:
    """Band-limited shift ``w(X, theta + angle)`` along the periodic theta axis.

    This is the exact harmonic-oscillator flow of an optical tomogram over a
    time ``angle / omega``.
    """
    i = w.axis_index("theta", mode)
    th = w.axes[i]
    vals = np.moveaxis(w.values, i, 1)
    lead = vals.shape
    flat = vals.reshape(lead[0], lead[1], -1)
    out = np.stack([_trig_interp_theta(flat[:, :, j], th, th.values + angle)
                    for j in range(flat.shape[2])], axis=2).reshape(lead)
    out = np.moveaxis(out, 1, i)
    if not np.any(w.values.imag):
        out = out.real
    return w.with_values(out)


def optical_to_symplectic(w: Field, X, mu, nu, method="bilinear", return_mask=False):
    """Symplectic tomogram from an optical one via homogeneity.

    ``M(X, mu, nu) = r^-1 w(X / r, atan2(nu, mu))`` with ``r = hypot(mu, nu)``,
    the angle folded into [0, 2pi).  ``method`` is ``"bilinear"`` (grid
    interpolation) or ``"spectral"`` (band-limited interpolation in both
    variables).  Points with ``X / r`` outside the grid give zero; with
    ``return_mask=True`` their mask is returned as well.
    """
    X, mu, nu = np.broadcast_arrays(*(np.asarray(v, float) for v in (X, mu, nu)))
    r = np.hypot(mu, nu)
    if np.any(r == 0):
        raise DomainError("optical_to_symplectic needs (mu, nu) != (0, 0)")
    phi = np.mod(np.arctan2(nu, mu), 2 * np.pi)
    xs = X / r
    ix, it = w.axis_index("X"), w.axis_index("theta")
    x_ax, th_ax = w.axes[ix], w.axes[it]
    vals = np.moveaxis(w.values, (ix, it), (0, 1))
    outside = (xs < x_ax.start) | (xs > x_ax.values[-1])
    if method == "bilinear":
        fx = (xs - x_ax.start) / x_ax.step
        i0 = np.clip(np.floor(fx).astype(int), 0, x_ax.count - 2)
        tx = np.clip(fx - i0, 0.0, 1.0)
        ft = (phi - th_ax.start) / th_ax.step
        j0 = np.floor(ft).astype(int) % th_ax.count
        tt = ft - np.floor(ft)
        j1 = (j0 + 1) % th_ax.count
        val = ((1 - tx) * (1 - tt) * vals[i0, j0] + tx * (1 - tt) * vals[i0 + 1, j0]
               + (1 - tx) * tt * vals[i0, j1] + tx * tt * vals[i0 + 1, j1])
    elif method == "spectral":
        flat_x, flat_phi = xs.ravel(), phi.ravel()
        eta_ax = dual_axis(x_ax)
        chi = np.exp(1j * np.outer(eta_ax.values, x_ax.values)) @ vals * x_ax.step
        uniq, inv = np.unique(flat_phi, return_inverse=True)
        chi_phi = _trig_interp_theta(chi, th_ax, uniq)
        kern = np.exp(-1j * np.outer(flat_x, eta_ax.values)) * (eta_ax.step / TWO_PI)
        val = np.einsum("ik,ki->i", kern, chi_phi[:, inv]).reshape(xs.shape)
    else:
        raise DomainError(f"unknown interpolation method {method!r}")
    if not np.any(w.values.imag):
        val = np.real(val)
    out = np.where(outside, 0.0, val / r)
    return (out, outside) if return_mask else out


def characteristic_fn(f: Field, axis="X", mode=0) -> Field:
    """Characteristic function ``chi(eta) = int f(X) exp(i eta X) dX`` along ``axis``.

    The X axis is replaced by its Fourier dual (``eta`` for optical fields,
    ``z`` for symplectic ones).
    """
    i = f.axis_index(axis, mode)
    x_ax = f.axes[i]
    dual_label = "z" if f.has_axis("mu", mode) else "eta"
    d_ax = dual_axis(x_ax, dual_label)
    kern = np.exp(1j * np.outer(d_ax.values, x_ax.values)) * x_ax.step
    vals = np.moveaxis(np.tensordot(kern, f.values, axes=(1, i)), 0, i)
    axes = f.axes[:i] + (d_ax,) + f.axes[i + 1:]
    meta = dict(f.metadata)
    meta.update(kind="characteristic", dual_of=x_ax.name, dual_start=x_ax.start,
                dual_step=x_ax.step)
    return Field(axes, vals, meta)


def inverse_characteristic_fn(chi: Field, x_ax: Axis = None, mode=0) -> Field:
    """``f(X) = (1/2pi) int chi(eta) exp(-i eta X) d eta``."""
    label = "z" if chi.has_axis("z", mode) else "eta"
    i = chi.axis_index(label, mode)
    d_ax = chi.axes[i]
    if x_ax is None:
        meta = chi.metadata
        step = meta.get("dual_step", 2 * np.pi / (d_ax.count * d_ax.step))
        start = meta.get("dual_start", -(d_ax.count // 2) * step)
        x_ax = Axis("X", start, step, d_ax.count, False, mode)
    kern = np.exp(-1j * np.outer(x_ax.values, d_ax.values)) * (d_ax.step / TWO_PI)
    vals = np.moveaxis(np.tensordot(kern, chi.values, axes=(1, i)), 0, i)
    axes = chi.axes[:i] + (x_ax,) + chi.axes[i + 1:]
    return Field(axes, vals, dict(chi.metadata, kind="tomogram"))


def characteristic_at(w: Field, etas) -> np.ndarray:
    """``chi_w`` at arbitrary ``etas``: array of shape ``(len(etas), ...)``."""
    i = w.axis_index("X")
    x_ax = w.axes[i]
    kern = np.exp(1j * np.outer(np.asarray(etas, float), x_ax.values)) * x_ax.step
    return np.tensordot(kern, w.values, axes=(1, i))


def quadrature_moment(w: Field, n: int) -> Field:
    """``<X^n>(theta) = int X^n w(X, theta) dX`` by the trapezoidal rule."""
    if not 0 <= n <= MAX_MOMENT:
        raise DomainError(f"moment order must lie in [0, {MAX_MOMENT}]")
    from .fields import integrate_x
    xs = w.coord("X")
    res = integrate_x(w.with_values(w.values * xs ** n))
    return res.with_values(res.values, kind="moment", order=n)


def moment_from_characteristic(w: Field, n: int, h=0.05, points=None) -> np.ndarray:
    """``i^-n d^n chi / d eta^n`` at ``eta = 0`` by a central finite difference."""
    if not 0 <= n <= MAX_MOMENT:
        raise DomainError(f"moment order must lie in [0, {MAX_MOMENT}]")
    if n == 0:
        return characteristic_at(w, [0.0])[0]
    points = points or (n + 8 + (n + 8) % 2 + 1)
    half = points // 2
    offs = np.arange(-half, half + 1)
    wts = fd_weights(offs, n) / h ** n
    chi = characteristic_at(w, offs * h)
    deriv = np.tensordot(wts, chi, axes=(0, 0))
    return deriv / (1j ** n)
