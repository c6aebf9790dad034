"""Phase-space reference dynamics: Moyal and Liouville generators.

Everything here acts directly on Wigner functions ``W(q, p)`` with spectral
derivatives along ``q`` and ``p``.  No antiderivatives or tomographic
operators are involved, so agreement with :mod:`tomolab.dynamics` is an
independent check.
"""

from __future__ import annotations

import json
from math import factorial, prod

import numpy as np

from .errors import ContractViolation, DomainError, GridMismatchError, InstabilityError
from .fields import Axis, Field, spectral_dx
from .potentials import PolynomialPotential, parse_potential

__all__ = [
    "moyal_generator", "liouville_generator", "moyal_evolve", "parametric_potential",
    "density_from_wavefunction", "wigner_density_bridge", "density_from_wigner",
    "correspondence_check", "CORRESPONDENCE_TOL",
]

CORRESPONDENCE_TOL = 1e-5


def _check(W: Field, U: PolynomialPotential):
    for s in range(U.modes):
        if not (W.has_axis("q", s) and W.has_axis("p", s)):
            raise GridMismatchError(f"phase-space field lacks (q, p) axes for mode {s}")
    if U.degree > 4:
        raise DomainError("potential degree above 4 is unsupported")


def _coords(W: Field, U: PolynomialPotential):
    return [W.coord("q", s) for s in range(U.modes)]


def moyal_generator(W: Field, U: PolynomialPotential, hbar=None, max_order=None) -> Field:
    """Right-hand side of the Moyal equation for ``H = sum p^2/2m + U(q)``.

    ``-sum p_s/m_s dW/dq_s + sum_{|k| odd} (-1)^((|k|-1)/2) (hbar/2)^(|k|-1)
    d^k U(q) d_p^k W / k!``.

    ``hbar`` overrides the potential's constant; ``hbar=0`` keeps only the
    first-order (Liouville) terms.  ``max_order`` truncates the series.
    """
    _check(W, U)
    hb = U.hbar if hbar is None else float(hbar)
    out = np.zeros(W.shape, complex)
    for s in range(U.modes):
        out -= W.coord("p", s) / U.constants[s].mass * spectral_dx(W, "q", s).values
    q = _coords(W, U)
    for k in U.multi_indices(1):
        order = sum(k)
        if max_order is not None and order > max_order:
            continue
        weight = (hb / 2) ** (order - 1) if order > 1 else 1.0
        if weight == 0.0:
            continue
        dU = U.derivative(k)
        if dU.is_zero():
            continue
        g = W
        for s, n in enumerate(k):
            if n:
                g = spectral_dx(g, "p", s, order=n)
        sign = (-1) ** ((order - 1) // 2)
        out += sign * weight / prod(factorial(n) for n in k) * dU(*q) * g.values
    return W.with_values(out)


def liouville_generator(f: Field, U: PolynomialPotential) -> Field:
    """Classical Liouville right-hand side ``-sum p/m df/dq + sum dU/dq df/dp``."""
    return moyal_generator(f, U, max_order=1)


def parametric_potential(profile, mass=1.0):
    """Time-dependent ``U_t(q) = m Omega(t)^2 q^2 / 2`` for a frequency profile.

    Returns ``U(t, side)``; ``side="right"`` gives the right limit at a jump.
    """
    def potential(t, side="left"):
        om = profile.omega(t, side=side)
        return PolynomialPotential({(2,): 0.5 * mass * om ** 2})
    return potential


def moyal_evolve(W0: Field, U, dt: float, steps: int, snapshot_every=None, t0=0.0,
                 hbar=None):
    """RK4 integration of the Moyal equation.

    ``U`` is a :class:`PolynomialPotential` or a callable ``U(t, side)``
    (see :func:`parametric_potential`).  The first stage of each step uses
    the right limit at the step start, so a frequency jump at a step
    boundary is integrated without smearing.  Returns ``(t, Field)`` pairs.
    """
    if dt <= 0 or steps < 0:
        raise DomainError("need dt > 0 and steps >= 0")
    pot = U if callable(U) and not isinstance(U, PolynomialPotential) else (lambda t, side="left": U)
    snapshot_every = snapshot_every or max(steps, 1)
    out = [(t0, W0)]
    W = W0
    for n in range(steps):
        t = t0 + n * dt
        k1 = moyal_generator(W, pot(t, side="right"), hbar)
        mid = pot(t + dt / 2)
        k2 = moyal_generator(W + k1 * (dt / 2), mid, hbar)
        k3 = moyal_generator(W + k2 * (dt / 2), mid, hbar)
        k4 = moyal_generator(W + k3 * dt, pot(t + dt), hbar)
        W = W + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
        if not np.all(np.isfinite(W.values)):
            raise InstabilityError(f"Moyal evolution blew up at step {n + 1}", step=n + 1)
        if (n + 1) % snapshot_every == 0 or n + 1 == steps:
            out.append((t + dt, W.with_values(W.values, t=t + dt)))
    return out


# ---------------------------------------------------------------------------
# density matrix bridge
# ---------------------------------------------------------------------------

def density_from_wavefunction(psi: Field) -> Field:
    """Pure-state density matrix ``rho(x, x') = psi(x) psi*(x')``."""
    ax = psi.axes[0]
    x = Axis("x", ax.start, ax.step, ax.count)
    xp = Axis("xp", ax.start, ax.step, ax.count)
    rho = np.outer(psi.values, psi.values.conj())
    return Field((x, xp), rho, dict(psi.metadata, kind="density"))


def _hermiticity(rho: Field, tol):
    dev = float(np.max(np.abs(rho.values - rho.values.conj().T)))
    if dev > tol * max(1.0, float(np.max(np.abs(rho.values)))):
        raise ContractViolation(f"density matrix is not Hermitian (deviation {dev:.2e})")
    return dev


def wigner_density_bridge(rho: Field, p_ax: Axis = None, tol=1e-10) -> Field:
    """Wigner function ``W(q,p) = int rho(q + u/2, q - u/2) exp(-ipu) du``.

    ``q`` runs over the ``x`` grid, so ``u = 2 k dx`` and the sum uses the
    anti-diagonals of ``rho``.  Normalization: ``int W dq dp / 2pi = tr rho``.
    """
    if rho.rank != 2 or not (rho.has_axis("x") and rho.has_axis("xp")):
        raise DomainError("expected a density matrix over (x, xp)")
    xa, xpa = rho.axis("x"), rho.axis("xp")
    if not xa.same_grid(Axis("x", xpa.start, xpa.step, xpa.count)):
        raise GridMismatchError("x and xp axes must share a grid")
    dev = _hermiticity(rho, tol)
    r = rho.values if rho.axis_index("x") == 0 else rho.values.T
    n, dx = xa.count, xa.step
    p_ax = p_ax or Axis("p", -8.0, 1 / 16, 256)
    q_ax = Axis("q", xa.start, dx, n)
    ks = np.arange(-(n - 1), n)
    corr = np.zeros((n, len(ks)), complex)
    i = np.arange(n)
    for j, k in enumerate(ks):
        a, b = i + k, i - k
        ok = (a >= 0) & (a < n) & (b >= 0) & (b < n)
        corr[ok, j] = r[a[ok], b[ok]]
    kern = np.exp(-1j * np.outer(2 * ks * dx, p_ax.values)) * (2 * dx)
    W = corr @ kern
    if np.max(np.abs(W.imag)) < 1e-12 * max(1.0, np.max(np.abs(W))):
        W = W.real
    meta = dict(rho.metadata, kind="wigner", hermiticity_deviation=dev)
    return Field((q_ax, p_ax), W, meta)


def density_from_wigner(W: Field) -> Field:
    """Inverse bridge: ``rho(x,x') = (1/2pi) int W((x+x')/2, p) exp(ip(x-x')) dp``.

    Midpoints falling between ``q`` nodes are reached by a half-step
    spectral shift of ``W`` along ``q``.  The ``x`` grid is the ``q`` grid.
    """
    qa, pa = W.axis("q"), W.axis("p")
    vals = W.values if W.axis_index("q") == 0 else W.values.T
    k = 2 * np.pi * np.fft.fftfreq(qa.count, qa.step)
    shift = np.exp(1j * k * qa.step / 2)[:, None]
    half = np.fft.ifft(np.fft.fft(vals, axis=0) * shift, axis=0)
    if not np.any(np.iscomplex(W.values)):
        half = half.real
    n = qa.count
    xs = qa.values
    # rows indexed by the midpoint index m/2, m = i + j
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    m = i + j
    even = m % 2 == 0
    mid_idx = m // 2
    u = xs[i] - xs[j]
    rho = np.empty((n, n), complex)
    kern_p = pa.values
    for par, src in ((True, vals), (False, half)):
        sel = even if par else ~even
        idx = mid_idx[sel]
        rho[sel] = np.einsum("kp,kp->k", src[idx], np.exp(1j * np.outer(u[sel], kern_p))) \
            * (pa.step / (2 * np.pi))
    x = Axis("x", qa.start, qa.step, n)
    xp = Axis("xp", qa.start, qa.step, n)
    return Field((x, xp), rho, dict(W.metadata, kind="density"))


# ---------------------------------------------------------------------------
# correspondence rules
# ---------------------------------------------------------------------------

def _sup(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def correspondence_check(state, U=None, q_ax=None, p_ax=None, x_ax=None, th_ax=None,
                         mu_ax=None, nu_ax=None, t=0.0, tol=CORRESPONDENCE_TOL, json_path=None):
    """Replay the Wigner <-> tomogram correspondence rules on a catalog state.

    Rows: ``rho`` <-> ``W`` rules (``density``, PACS states only), ``d/dq``
    (``d_dq``), ``d/dp`` (``d_dp``), multiplication by ``q`` and ``p``
    (``q_mul``, ``p_mul``), the symplectic set (``symplectic``) and, when
    ``U`` is given, the full generator (``generator``).
    Each row holds the sup-norm of ``Radon(op W) - op'(Radon W)``.
    """
    from . import dynamics as dyn
    from .fields import mu_axis, nu_axis, p_axis, q_axis, theta_axis, x_axis
    from .states import PACS, ClassicalGaussian, classical_gaussian, pacs_wavefunction, pacs_wigner
    from .transforms import radon_optical, radon_symplectic

    q_ax, p_ax = q_ax or q_axis(), p_ax or p_axis()
    x_ax, th_ax = x_ax or x_axis(), th_ax or theta_axis()
    mu_ax = mu_ax or mu_axis()
    nu_ax = nu_ax or nu_axis()
    if isinstance(U, str):
        U = parse_potential(U)
    rows = []

    if isinstance(state, PACS):
        psi = pacs_wavefunction(state, t, Axis("q", q_ax.start, q_ax.step, q_ax.count))
        rho = density_from_wavefunction(psi)
        W = wigner_density_bridge(rho, p_ax)
        Q, P = W.coord("q"), W.coord("p")
        ops = [
            (spectral_dx(rho, "x"), 0.5 * spectral_dx(W, "q").values + 1j * P * W.values),
            (spectral_dx(rho, "xp"), 0.5 * spectral_dx(W, "q").values - 1j * P * W.values),
            (rho.with_values(rho.coord("x") * rho.values),
             Q * W.values + 0.5j * spectral_dx(W, "p").values),
            (rho.with_values(rho.coord("xp") * rho.values),
             Q * W.values - 0.5j * spectral_dx(W, "p").values),
        ]
        norm = max(_sup(wigner_density_bridge(r, p_ax, tol=np.inf).values, wv) for r, wv in ops)
        rows.append({"rule": "density", "norm": norm})
        W = pacs_wigner(state, t, q_ax, p_ax)
    elif isinstance(state, ClassicalGaussian):
        W = classical_gaussian(state, q_ax, p_ax)
    else:
        raise DomainError("correspondence_check needs a catalog state")

    Q, P = W.coord("q"), W.coord("p")
    w = radon_optical(W, x_ax, th_ax)

    def optical(f):
        return radon_optical(f, x_ax, th_ax).values

    rows.append({"rule": "d_dq", "norm": _sup(optical(spectral_dx(W, "q")),
                                             dyn.dq_operator_optical(w).values)})
    rows.append({"rule": "d_dp", "norm": _sup(optical(spectral_dx(W, "p")),
                                             dyn.dp_operator_optical(w).values)})
    rows.append({"rule": "q_mul", "norm": _sup(optical(W.with_values(Q * W.values)),
                                             dyn.q_operator_optical(w).values)})
    rows.append({"rule": "p_mul", "norm": _sup(optical(W.with_values(P * W.values)),
                                             dyn.p_operator_optical(w).values)})

    M = radon_symplectic(W, x_ax, mu_ax, nu_ax)

    def sympl(f):
        return radon_symplectic(f, x_ax, mu_ax, nu_ax).values

    pairs = [
        (W.with_values(Q * W.values), dyn.q_operator_symplectic(M)),
        (W.with_values(P * W.values), dyn.p_operator_symplectic(M)),
        (spectral_dx(W, "q"), dyn.dq_operator_symplectic(M)),
        (spectral_dx(W, "p"), dyn.dp_operator_symplectic(M)),
    ]
    rows.append({"rule": "symplectic", "norm": max(_sup(sympl(a), b.values) for a, b in pairs)})

    if U is not None:
        rows.append({"rule": "generator", "norm": _sup(optical(moyal_generator(W, U)),
                                                 dyn.optical_generator(w, U).values)})
    for row in rows:
        row["pass"] = bool(row["norm"] <= tol)
    report = {
        "state": getattr(state, "label", str(state)),
        "potential": None if U is None else U.describe(),
        "tolerance": tol,
        "rows": rows,
        "all_pass": all(r["pass"] for r in rows),
    }
    if json_path is not None:
        with open(json_path, "w") as fh:
            json.dump(report, fh, indent=2)
    return report
