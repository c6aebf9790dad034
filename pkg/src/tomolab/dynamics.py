"""Evolution generators for optical and symplectic tomograms.

Multiplication and differentiation of the Wigner function map to operators
on tomograms (one set per mode ``s``)::

    q   ->  A_s = sin(th) d_th (d_X)^-1 + X cos(th)       (optical)
    p   ->  m w (-cos(th) d_th (d_X)^-1 + X sin(th))
    d_q ->  cos(th) d_X,        d_p -> sin(th) / (m w) d_X

    q   ->  -(d_X)^-1 d_mu,     p -> -(d_X)^-1 d_nu       (symplectic)
    d_q ->  mu d_X,             d_p -> nu d_X

With ``B_s = hbar/2 * (d_p rule)`` the potential part of the Moyal bracket
becomes ``(2/hbar) Im U(A + iB)``, expanded as the Taylor series
``sum_k d^k U(A) (iB)^k / k!`` over multi-indices ``k``.  A and B commute,
so the series is exact and finite for polynomial U.

``(d_X)^-1`` is the antiderivative from the lower X edge
(:func:`tomolab.fields.antiderivative_x`).  Every place it enters acts on
a theta (or mu, nu) derivative, whose X integral vanishes, so the result
decays at both ends.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial, prod

import numpy as np

from .errors import ContractViolation, DomainError, GridMismatchError, InstabilityError
from .fields import (Field, antiderivative_x, fd_derivative, l2_norm, spectral_dtheta,
                     spectral_dx)
from .potentials import PolynomialPotential
from .transforms import normalization_residual, symmetry_residual

__all__ = [
    "q_operator_optical", "p_operator_optical", "dq_operator_optical",
    "dp_operator_optical", "q_operator_symplectic", "p_operator_symplectic",
    "dq_operator_symplectic", "dp_operator_symplectic",
    "optical_generator", "symplectic_generator", "classical_optical_generator",
    "classical_symplectic_generator", "characteristic_generator",
    "potential_series", "EnergyQuery", "energy_residual_optical",
    "energy_residual_symplectic", "stationarity_residual", "GeneratorSpec",
    "GENERATOR_KINDS", "evolve", "stability_bound",
]

GENERATOR_KINDS = (
    "optical-quantum", "symplectic-quantum", "optical-classical",
    "symplectic-classical", "characteristic-optical", "characteristic-symplectic",
)


def _mw(constants):
    return 1.0 if constants is None else constants.mass * constants.frequency


# ---------------------------------------------------------------------------
# correspondence operators
# ---------------------------------------------------------------------------

def _need(f: Field, labels, mode):
    for lab in labels:
        if not f.has_axis(lab, mode):
            raise GridMismatchError(f"field lacks axis {lab!r} for mode {mode}")


def q_operator_optical(f: Field, mode=0) -> Field:
    """Tomogram image of ``q W``: ``sin(th) d_th (d_X)^-1 w + X cos(th) w``."""
    _need(f, ("X", "theta"), mode)
    th, x = f.coord("theta", mode), f.coord("X", mode)
    inner = spectral_dtheta(antiderivative_x(f, "X", mode), mode)
    return f.with_values(np.sin(th) * inner.values + x * np.cos(th) * f.values)


def p_operator_optical(f: Field, mode=0, constants=None) -> Field:
    """Tomogram image of ``p W``: ``m w (-cos(th) d_th (d_X)^-1 + X sin(th)) w``."""
    _need(f, ("X", "theta"), mode)
    th, x = f.coord("theta", mode), f.coord("X", mode)
    inner = spectral_dtheta(antiderivative_x(f, "X", mode), mode)
    vals = -np.cos(th) * inner.values + x * np.sin(th) * f.values
    return f.with_values(_mw(constants) * vals)


def dq_operator_optical(f: Field, mode=0) -> Field:
    """Tomogram image of ``dW/dq``: ``cos(th) dw/dX``."""
    _need(f, ("X", "theta"), mode)
    return f.with_values(np.cos(f.coord("theta", mode)) * spectral_dx(f, "X", mode).values)


def dp_operator_optical(f: Field, mode=0, constants=None) -> Field:
    """Tomogram image of ``dW/dp``: ``sin(th) / (m w) dw/dX``."""
    _need(f, ("X", "theta"), mode)
    coef = np.sin(f.coord("theta", mode)) / _mw(constants)
    return f.with_values(coef * spectral_dx(f, "X", mode).values)


def _d_param(f: Field, label, mode):
    return fd_derivative(f, label, mode, order=1, accuracy=4)


def q_operator_symplectic(f: Field, mode=0) -> Field:
    """Symplectic image of ``q W``: ``-(d_X)^-1 dM/dmu``."""
    _need(f, ("X", "mu", "nu"), mode)
    return -antiderivative_x(_d_param(f, "mu", mode), "X", mode)


def p_operator_symplectic(f: Field, mode=0) -> Field:
    """Symplectic image of ``p W``: ``-(d_X)^-1 dM/dnu``."""
    _need(f, ("X", "mu", "nu"), mode)
    return -antiderivative_x(_d_param(f, "nu", mode), "X", mode)


def dq_operator_symplectic(f: Field, mode=0) -> Field:
    """Symplectic image of ``dW/dq``: ``mu dM/dX``."""
    _need(f, ("X", "mu", "nu"), mode)
    return f.with_values(f.coord("mu", mode) * spectral_dx(f, "X", mode).values)


def dp_operator_symplectic(f: Field, mode=0) -> Field:
    """Symplectic image of ``dW/dp``: ``nu dM/dX``."""
    _need(f, ("X", "mu", "nu"), mode)
    return f.with_values(f.coord("nu", mode) * spectral_dx(f, "X", mode).values)


# ---------------------------------------------------------------------------
# Taylor series of U(A + iB)
# ---------------------------------------------------------------------------

def _apply_polynomial(P: PolynomialPotential, A_ops, g: Field):
    """``P(A_1, ..., A_n) g`` by repeated application, sharing partial products."""
    if P.is_zero():
        return None
    cache = {(0,) * P.modes: g}

    def power(exps):
        if exps not in cache:
            s = next(i for i, e in enumerate(exps) if e)
            lower = exps[:s] + (exps[s] - 1,) + exps[s + 1:]
            cache[exps] = A_ops[s](power(lower))
        return cache[exps]

    total = None
    for exps in sorted(P.terms):
        term = power(exps).values * P.terms[exps]
        total = term if total is None else total + term
    return total


def potential_series(f: Field, U: PolynomialPotential, A_ops, B_ops, parity, max_order=None):
    """``sum`` over ``|k|`` of given parity of ``c_k d^k U(A) B^k f / k!``.

    ``c_k = (-1)^((|k|-1)/2)`` for odd ``|k|`` (the imaginary part of
    ``U(A+iB)``) and ``(-1)^(|k|/2)`` for even ``|k|`` (the real part).
    ``B_ops[s](g, n)`` must return ``B_s^n g``.  ``max_order`` truncates the
    series (1 gives the classical force term).
    """
    out = np.zeros(f.shape, complex)
    for k in U.multi_indices(parity):
        order = sum(k)
        if max_order is not None and order > max_order:
            continue
        dU = U.derivative(k)
        if dU.is_zero():
            continue
        sign = (-1) ** ((order - 1) // 2) if parity else (-1) ** (order // 2)
        g = f
        for s, n in enumerate(k):
            if n:
                g = B_ops[s](g, n)
        res = _apply_polynomial(dU, A_ops, g)
        out += sign * res / prod(factorial(n) for n in k)
    return out


def _optical_B(f, U, mode, hbar_scale):
    c = U.constants[mode]
    coef = hbar_scale * np.sin(f.coord("theta", mode)) / (2.0 * c.mass * c.frequency)

    def apply(g, n):
        return g.with_values(coef ** n * spectral_dx(g, "X", mode, order=n).values)
    return apply


def _symplectic_B(f, U, mode, hbar_scale):
    coef = hbar_scale * f.coord("nu", mode) / 2.0

    def apply(g, n):
        return g.with_values(coef ** n * spectral_dx(g, "X", mode, order=n).values)
    return apply


def _check_modes(f: Field, U: PolynomialPotential, labels):
    for s in range(U.modes):
        _need(f, labels, s)
    extra = [m for m in f.modes if m >= U.modes]
    if extra:
        raise GridMismatchError(
            f"field has modes {extra} not covered by a {U.modes}-mode potential")
    if U.degree > 4:
        raise DomainError("potential degree above 4 is unsupported")


def _optical_free(f: Field, U: PolynomialPotential):
    out = np.zeros(f.shape, complex)
    for s in range(U.modes):
        th, x = f.coord("theta", s), f.coord("X", s)
        dth = spectral_dtheta(f, s).values
        dx = spectral_dx(f, "X", s).values
        out += U.constants[s].frequency * (
            np.cos(th) ** 2 * dth - 0.5 * np.sin(2 * th) * (f.values + x * dx))
    return out


def _optical_generator(f, U, classical):
    _check_modes(f, U, ("X", "theta"))
    out = _optical_free(f, U)
    if not U.is_zero():
        hb = U.hbar
        A = [lambda g, s=s: q_operator_optical(g, s) for s in range(U.modes)]
        B = [_optical_B(f, U, s, hb) for s in range(U.modes)]
        out += (2.0 / hb) * potential_series(f, U, A, B, 1, 1 if classical else None)
    return f.with_values(out)


def optical_generator(f: Field, U: PolynomialPotential) -> Field:
    """Time derivative of an optical tomogram under ``H = sum p^2/2m + U``.

    ``sum_s w_s [cos^2 d_th - sin(2 th)/2 (1 + X d_X)] w + (2/hbar) Im U(A + iB) w``
    with ``B_s = hbar sin(th_s) / (2 m_s w_s) d_X``.
    """
    return _optical_generator(f, U, classical=False)


def classical_optical_generator(f: Field, U: PolynomialPotential) -> Field:
    """Liouville counterpart of :func:`optical_generator`: only the first-order force term."""
    return _optical_generator(f, U, classical=True)


def _symplectic_generator(f, U, classical):
    _check_modes(f, U, ("X", "mu", "nu"))
    out = np.zeros(f.shape, complex)
    for s in range(U.modes):
        out += f.coord("mu", s) / U.constants[s].mass * _d_param(f, "nu", s).values
    if not U.is_zero():
        hb = U.hbar
        A = [lambda g, s=s: q_operator_symplectic(g, s) for s in range(U.modes)]
        B = [_symplectic_B(f, U, s, hb) for s in range(U.modes)]
        out += (2.0 / hb) * potential_series(f, U, A, B, 1, 1 if classical else None)
    return f.with_values(out)


def symplectic_generator(f: Field, U: PolynomialPotential) -> Field:
    """Time derivative of a symplectic tomogram.

    ``sum_s (mu_s / m_s) dM/dnu_s + (2/hbar) Im U(A_M + iB_M) M`` with
    ``A_M = -(d_X)^-1 d_mu`` and ``B_M = (nu hbar / 2) d_X``.  Derivatives in
    ``mu`` and ``nu`` are fourth-order finite differences.
    """
    return _symplectic_generator(f, U, classical=False)


def classical_symplectic_generator(f: Field, U: PolynomialPotential) -> Field:
    """Liouville counterpart of :func:`symplectic_generator`."""
    return _symplectic_generator(f, U, classical=True)


# ---------------------------------------------------------------------------
# characteristic functions
# ---------------------------------------------------------------------------

def _dual_x_matrix(chi: Field, label, mode):
    """Matrix of ``-i d/d eta`` on the dual grid (multiplication by X in X space)."""
    d_ax = chi.axis(label, mode)
    n = d_ax.count
    meta = chi.metadata
    step = meta.get("dual_step", 2 * np.pi / (n * d_ax.step))
    start = meta.get("dual_start", -(n // 2) * step)
    x = start + step * np.arange(n)
    fwd = np.exp(1j * np.outer(d_ax.values, x)) * step
    inv = np.exp(-1j * np.outer(x, d_ax.values)) * (d_ax.step / (2 * np.pi))
    return fwd @ (x[:, None] * inv)


def _along(mat, f: Field, label, mode):
    i = f.axis_index(label, mode)
    return np.moveaxis(np.tensordot(mat, f.values, axes=(1, i)), 0, i)


def _dual_inverse(chi: Field, label, mode, xmat):
    """``(i / eta) chi`` with the finite limit ``i chi'(0)`` on the ``eta = 0`` row.

    The limit assumes ``chi(0) = 0``, which holds for every operand it meets
    (angle or parameter derivatives of normalized tomograms).
    """
    eta = chi.coord(label, mode)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(eta == 0, 0.0, 1j * chi.values / eta)
    zero = np.abs(chi.axis(label, mode).values) == 0
    if zero.any():
        # i d chi/d eta = i (i X-multiplied chi) = -(xmat chi)
        lim = -_along(xmat, chi, label, mode)
        i = chi.axis_index(label, mode)
        sel = [slice(None)] * chi.rank
        sel[i] = np.flatnonzero(zero)
        out[tuple(sel)] = lim[tuple(sel)]
    return out


def characteristic_generator(chi: Field, U: PolynomialPotential) -> Field:
    """Time derivative of a tomographic characteristic function.

    Works on ``chi_w(eta, theta)`` (axes ``eta``, ``theta`` per mode) or
    ``chi_M(z, mu, nu)`` (axes ``z``, ``mu``, ``nu``).  Obtained from the
    tomogram generators by ``d_X -> -i eta``, ``(d_X)^-1 -> i / eta`` and
    ``X -> -i d/d eta`` (convention ``chi = int w exp(i eta X) dX``)::

        optical:     w_s [cos^2 d_th + sin(2 th)/2 eta d_eta] chi
                     + (2/hbar) Im U(A + iB) chi,
                     A = sin(th) d_th (i/eta) + cos(th) (-i d_eta),
                     B = -i eta hbar sin(th) / (2 m w)
        symplectic:  (mu/m) d_nu chi + (2/hbar) Im U(A + iB) chi,
                     A = -(i/z) d_mu,  B = -i z nu hbar / 2

    ``d_eta`` is exact on the dual grid (it is multiplication by ``iX`` on
    the X grid).  Rows at ``eta = 0`` use the finite limit of ``i/eta``.
    """
    symplectic = chi.has_axis("z", 0)
    label = "z" if symplectic else "eta"
    labels = (label, "mu", "nu") if symplectic else (label, "theta")
    _check_modes(chi, U, labels)
    hb = U.hbar
    xmats = [_dual_x_matrix(chi, label, s) for s in range(U.modes)]
    out = np.zeros(chi.shape, complex)

    if symplectic:
        for s in range(U.modes):
            out += chi.coord("mu", s) / U.constants[s].mass * _d_param(chi, "nu", s).values

        def A_op(g, s):
            return g.with_values(-_dual_inverse(_d_param(g, "mu", s), label, s, xmats[s]))

        def B_factory(s):
            coef = -1j * chi.coord(label, s) * chi.coord("nu", s) * hb / 2.0
            return lambda g, n: g.with_values(coef ** n * g.values)
    else:
        for s in range(U.modes):
            th, eta = chi.coord("theta", s), chi.coord(label, s)
            dth = spectral_dtheta(chi, s).values
            eta_deta = eta * 1j * _along(xmats[s], chi, label, s)
            out += U.constants[s].frequency * (
                np.cos(th) ** 2 * dth + 0.5 * np.sin(2 * th) * eta_deta)

        def A_op(g, s):
            th = g.coord("theta", s)
            inner = _dual_inverse(spectral_dtheta(g, s), label, s, xmats[s])
            return g.with_values(np.sin(th) * inner
                                 + np.cos(th) * _along(xmats[s], g, label, s))

        def B_factory(s):
            c = U.constants[s]
            coef = -1j * chi.coord(label, s) * hb * np.sin(chi.coord("theta", s)) / (
                2.0 * c.mass * c.frequency)
            return lambda g, n: g.with_values(coef ** n * g.values)

    if not U.is_zero():
        A = [lambda g, s=s: A_op(g, s) for s in range(U.modes)]
        B = [B_factory(s) for s in range(U.modes)]
        out += (2.0 / hb) * potential_series(chi, U, A, B, 1)
    return chi.with_values(out)


# ---------------------------------------------------------------------------
# energy levels and stationarity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyQuery:
    """Trial energy ``E`` for a candidate stationary tomogram under ``potential``."""

    E: float
    field: Field
    potential: PolynomialPotential


def energy_residual_optical(query: EnergyQuery):
    """Residual of the optical energy-level equation and its grid L2 norm.

    ``H w = sum_s [m w^2 { cos^2/2 (d_X)^-2 (d_th^2 + 1) - X/2 (d_X)^-1 (cos^2 + sin 2th d_th)
    + X^2/2 sin^2 } - hbar^2/(8m) cos^2 d_X^2] w + Re U(A + iB) w``.

    The bracket is the image of ``p^2/2m``; ``U`` enters only through the
    real part of ``U(A + iB)`` and must be the complete potential.
    """
    f, U = query.field, query.potential
    _check_modes(f, U, ("X", "theta"))
    hb = U.hbar
    out = np.zeros(f.shape, complex)
    for s in range(U.modes):
        c = U.constants[s]
        th, x = f.coord("theta", s), f.coord("X", s)
        cos2, sin2 = np.cos(th) ** 2, np.sin(th) ** 2
        first = f.with_values(spectral_dtheta(f, s, order=2).values + f.values)
        g2 = antiderivative_x(first, "X", s, order=2).values
        second = f.with_values(cos2 * f.values
                               + np.sin(2 * th) * spectral_dtheta(f, s).values)
        g1 = antiderivative_x(second, "X", s).values
        bracket = 0.5 * cos2 * g2 - 0.5 * x * g1 + 0.5 * x ** 2 * sin2 * f.values
        dxx = spectral_dx(f, "X", s, order=2).values
        out += c.mass * c.frequency ** 2 * bracket - hb ** 2 / (8 * c.mass) * cos2 * dxx
    if not U.is_zero():
        A = [lambda g, s=s: q_operator_optical(g, s) for s in range(U.modes)]
        B = [_optical_B(f, U, s, hb) for s in range(U.modes)]
        out += potential_series(f, U, A, B, 0)
    res = f.with_values(out - query.E * f.values, kind="energy_residual", E=query.E)
    return res, l2_norm(res)


def energy_residual_symplectic(query: EnergyQuery):
    """Residual of the symplectic energy-level equation and its grid L2 norm.

    ``H M = sum_s [(1/2m) (d_X)^-2 d_nu^2 - mu^2 hbar^2/(8m) d_X^2] M + Re U(A_M + iB_M) M``.
    """
    f, U = query.field, query.potential
    _check_modes(f, U, ("X", "mu", "nu"))
    hb = U.hbar
    out = np.zeros(f.shape, complex)
    for s in range(U.modes):
        m = U.constants[s].mass
        dnn = fd_derivative(f, "nu", s, order=2, accuracy=4)
        g2 = antiderivative_x(dnn, "X", s, order=2).values
        dxx = spectral_dx(f, "X", s, order=2).values
        out += g2 / (2 * m) - f.coord("mu", s) ** 2 * hb ** 2 / (8 * m) * dxx
    if not U.is_zero():
        A = [lambda g, s=s: q_operator_symplectic(g, s) for s in range(U.modes)]
        B = [_symplectic_B(f, U, s, hb) for s in range(U.modes)]
        out += potential_series(f, U, A, B, 0)
    res = f.with_values(out - query.E * f.values, kind="energy_residual", E=query.E)
    return res, l2_norm(res)


@dataclass(frozen=True)
class GeneratorSpec:
    """Which evolution equation to use, and the potential."""

    kind: str
    potential: PolynomialPotential

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise DomainError(f"unknown generator kind {self.kind!r}; "
                              f"expected one of {', '.join(GENERATOR_KINDS)}")

    @property
    def family(self):
        return self.kind.split("-")[0] if not self.kind.startswith("characteristic") \
            else "characteristic"

    def __call__(self, f: Field) -> Field:
        U = self.potential
        if self.kind == "optical-quantum":
            return optical_generator(f, U)
        if self.kind == "optical-classical":
            return classical_optical_generator(f, U)
        if self.kind == "symplectic-quantum":
            return symplectic_generator(f, U)
        if self.kind == "symplectic-classical":
            return classical_symplectic_generator(f, U)
        return characteristic_generator(f, U)


def stationarity_residual(f: Field, spec: GeneratorSpec) -> float:
    """Grid L2 norm of the generator applied to ``f`` (zero for stationary states)."""
    return l2_norm(spec(f))


# ---------------------------------------------------------------------------
# time stepping
# ---------------------------------------------------------------------------

def stability_bound(f: Field, spec: GeneratorSpec) -> float:
    """Largest admissible RK4 step.

    Optical fields: ``0.5 * d_theta / w_max``.  Symplectic (and their
    characteristic functions): ``0.5 * min(d_mu, d_nu) / v`` with ``v`` the
    largest speed of the quadratic flow ``mu/m d_nu - m w^2 nu d_mu``.
    """
    U = spec.potential
    bounds = []
    for s in range(U.modes):
        c = U.constants[s]
        if f.has_axis("theta", s):
            bounds.append(0.5 * f.axis("theta", s).step / c.frequency)
        elif f.has_axis("mu", s):
            mu, nu = f.axis("mu", s), f.axis("nu", s)
            vmax = (np.abs(mu.values).max() / c.mass
                    + c.mass * c.frequency ** 2 * np.abs(nu.values).max())
            bounds.append(0.5 * min(mu.step, nu.step) / vmax)
    if not bounds:
        raise GridMismatchError("field has no theta or (mu, nu) axes")
    return float(min(bounds))


def _diagnostics(f: Field, family):
    if family == "characteristic":
        label = "z" if f.has_axis("z") else "eta"
        i = f.axis_index(label)
        zero = int(np.argmin(np.abs(f.axes[i].values)))
        row = np.take(f.values, zero, axis=i)
        return {"normalization_residual": float(np.max(np.abs(row - 1.0)))}
    diag = {"normalization_residual": normalization_residual(f)}
    if family == "optical":
        diag["symmetry_residual"] = symmetry_residual(f)
    return diag


def evolve(f0: Field, spec: GeneratorSpec, dt: float, steps: int = None,
           snapshot_every: int = None, t0: float = 0.0, horizon: float = None,
           norm_warn=1e-3, growth_limit=1e6):
    """Classical RK4 trajectory of ``df/dt = spec(f)``.

    Give either ``steps`` or ``horizon``; with ``horizon`` the step count is
    ``ceil(horizon / dt)`` and the step is shrunk to land on the horizon
    exactly (recorded as ``dt`` in the snapshot metadata).

    Returns a list of ``(t, Field)`` snapshots (the initial field and every
    ``snapshot_every``-th step, always including the last).  Each snapshot
    carries ``normalization_residual`` (and ``symmetry_residual`` for optical
    fields) plus their drift from the initial values; drifts above
    ``norm_warn`` set ``normalization_warning``.

    Raises
    ------
    InstabilityError
        If ``dt`` exceeds :func:`stability_bound` (step 0) or the state
        becomes non-finite or grows by more than ``growth_limit``.
    """
    if spec.family != "characteristic" and not f0.metadata.get("probability", False):
        raise ContractViolation("evolve expects a field tagged probability")
    if (steps is None) == (horizon is None):
        raise DomainError("give exactly one of steps and horizon")
    if dt <= 0:
        raise DomainError("need dt > 0")
    if horizon is not None:
        if horizon < 0:
            raise DomainError("horizon must be nonnegative")
        steps = int(np.ceil(horizon / dt - 1e-9))
        dt = horizon / steps if steps else dt
    if steps < 0:
        raise DomainError("need steps >= 0")
    bound = stability_bound(f0, spec)
    if dt > bound:
        raise InstabilityError(
            f"dt={dt:g} exceeds the stability bound {bound:.3g}", step=0)
    snapshot_every = snapshot_every or max(steps, 1)
    scale = float(np.max(np.abs(f0.values))) or 1.0
    base = _diagnostics(f0, spec.family)

    def snap(t, f):
        diag = _diagnostics(f, spec.family)
        meta = {"t": t, "dt": dt, **diag}
        for key, val in diag.items():
            meta[key.replace("residual", "drift")] = abs(val - base[key])
        meta["normalization_warning"] = meta["normalization_drift"] > norm_warn
        return (t, f.with_values(f.values, **meta))

    out = [snap(t0, f0)]
    f = f0
    for n in range(1, steps + 1):
        k1 = spec(f)
        k2 = spec(f + k1 * (dt / 2))
        k3 = spec(f + k2 * (dt / 2))
        k4 = spec(f + k3 * dt)
        f = f + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
        peak = np.max(np.abs(f.values))
        if not np.isfinite(peak) or peak > growth_limit * scale:
            raise InstabilityError(f"solution blew up at step {n}", step=n)
        if n % snapshot_every == 0 or n == steps:
            out.append(snap(t0 + n * dt, f))
    return out
