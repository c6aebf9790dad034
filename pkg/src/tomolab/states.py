"""Analytic state catalog.

Photon-added coherent states ``|alpha, m, t>`` of the parametric oscillator
``H = p^2/2 + Omega(t)^2 q^2/2`` with ``Omega(0) = 1`` (Fock states are
``alpha = 0``, coherent states ``m = 0``), the classical trajectory
``eps(t)`` they are built from, and classical Gaussian phase-space
distributions.

Units: hbar = m = omega = 1.  Wigner functions are normalised as
``int W dq dp / (2 pi) = 1`` so that the vacuum is ``2 exp(-q^2 - p^2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from math import factorial

import numpy as np

from .errors import ContractViolation, DomainError, SingularRayError
from .fields import Axis, Field, theta_axis, x_axis

__all__ = [
    "MAX_ORDER", "ModeConstants", "ConstantFrequency", "PiecewiseFrequency",
    "SinusoidalFrequency", "EpsilonSample", "EpsilonTrajectory", "PACS",
    "ClassicalGaussian", "fock", "coherent", "vacuum", "hermite", "laguerre",
    "solve_epsilon", "pacs_wavefunction", "pacs_symplectic_tomogram",
    "pacs_optical_tomogram", "pacs_symplectic_field", "pacs_wigner",
    "wigner_of_wavefunction", "classical_gaussian", "parse_state",
    "parse_profile", "state_from_config", "catalog",
]

MAX_ORDER = 30
MAX_ALPHA = 4.0


@dataclass(frozen=True)
class ModeConstants:
    """Mass, frequency and hbar of one mode (all default to 1)."""

    mass: float = 1.0
    frequency: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if min(self.mass, self.frequency, self.hbar) <= 0:
            raise DomainError("mode constants must be strictly positive")


# ---------------------------------------------------------------------------
# special functions
# ---------------------------------------------------------------------------

def hermite(m, z):
    """Physicists' Hermite polynomial H_m(z) by three-term recurrence."""
    if not 0 <= m <= MAX_ORDER:
        raise DomainError(f"Hermite order must lie in [0, {MAX_ORDER}]")
    z = np.asarray(z)
    h_prev, h = np.ones_like(z, dtype=np.result_type(z, float)), 2 * z
    if m == 0:
        return h_prev if h_prev.ndim else h_prev[()]
    for k in range(1, m):
        h_prev, h = h, 2 * z * h - 2 * k * h_prev
    return h


def laguerre(m, x):
    """Laguerre polynomial L_m(x) by three-term recurrence."""
    if not 0 <= m <= MAX_ORDER:
        raise DomainError(f"Laguerre order must lie in [0, {MAX_ORDER}]")
    x = np.asarray(x, dtype=float)
    l_prev, l = np.ones_like(x), 1.0 - x
    if m == 0:
        return l_prev if l_prev.ndim else float(l_prev)
    for k in range(1, m):
        l_prev, l = l, ((2 * k + 1 - x) * l - k * l_prev) / (k + 1)
    return l if l.ndim else float(l)


# ---------------------------------------------------------------------------
# frequency profiles and the classical trajectory eps(t)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantFrequency:
    omega0: float = 1.0

    def omega(self, t, side="left"):
        return self.omega0

    @property
    def initial(self):
        return self.omega0

    def breakpoints(self, t_end):
        return ()


@dataclass(frozen=True)
class PiecewiseFrequency:
    """``values[i]`` holds after ``switch_times[i-1]``; left-continuous.

    ``PiecewiseFrequency((1.0, 2.0), (0.0,))`` prepares the state with
    ``Omega(0) = 1`` and evolves it with ``Omega = 2`` for ``t > 0``.
    """

    values: tuple
    switch_times: tuple

    def __post_init__(self):
        if len(self.values) != len(self.switch_times) + 1:
            raise DomainError("need one more value than switch times")
        if list(self.switch_times) != sorted(self.switch_times):
            raise DomainError("switch times must be increasing")

    def omega(self, t, side="left"):
        times = np.asarray(self.switch_times)
        idx = np.searchsorted(times, t, side="left" if side == "left" else "right")
        return self.values[int(idx)]

    @property
    def initial(self):
        return self.omega(0.0)

    def breakpoints(self, t_end):
        return tuple(s for s in self.switch_times if 0.0 < s < t_end)


@dataclass(frozen=True)
class SinusoidalFrequency:
    """``Omega(t) = omega0 * (1 + depth * sin(drive * t))``."""

    omega0: float = 1.0
    depth: float = 0.0
    drive: float = 2.0

    def omega(self, t, side="left"):
        return self.omega0 * (1.0 + self.depth * np.sin(self.drive * t))

    @property
    def initial(self):
        return self.omega0

    def breakpoints(self, t_end):
        return ()


@dataclass(frozen=True)
class EpsilonSample:
    t: float
    eps: complex
    eps_dot: complex
    phase: float  # continuous arg(eps), used for the square-root branches

    def wronskian(self):
        return self.eps * np.conj(self.eps_dot) - np.conj(self.eps) * self.eps_dot


@dataclass(frozen=True, eq=False)
class EpsilonTrajectory:
    times: np.ndarray
    eps: np.ndarray
    eps_dot: np.ndarray
    phase: np.ndarray
    dt: float = 0.0

    def wronskian(self):
        return self.eps * np.conj(self.eps_dot) - np.conj(self.eps) * self.eps_dot

    def wronskian_drift(self):
        return float(np.max(np.abs(self.wronskian() + 2j)))

    def sample(self, t, atol=1e-12) -> EpsilonSample:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > atol:
            raise DomainError(f"t = {t} is not a node of the trajectory")
        return EpsilonSample(float(self.times[i]), complex(self.eps[i]),
                             complex(self.eps_dot[i]), float(self.phase[i]))

    def __len__(self):
        return len(self.times)


def _rk4_segment(y, t0, t1, h, profile):
    """Integrate (eps, eps_dot) from t0 to t1 with steps of at most h.

    Returns the final state and the accumulated change of arg(eps).
    """
    n = max(1, int(np.ceil((t1 - t0) / h - 1e-12)))
    h = (t1 - t0) / n
    dphase = 0.0
    for j in range(n):
        t = t0 + j * h
        w0 = profile.omega(t, side="right") ** 2
        wm = profile.omega(t + h / 2) ** 2
        w1 = profile.omega(t + h) ** 2
        e, d = y
        k1e, k1d = d, -w0 * e
        k2e, k2d = d + h / 2 * k1d, -wm * (e + h / 2 * k1e)
        k3e, k3d = d + h / 2 * k2d, -wm * (e + h / 2 * k2e)
        k4e, k4d = d + h * k3d, -w1 * (e + h * k3e)
        e_new = e + h / 6 * (k1e + 2 * k2e + 2 * k3e + k4e)
        d_new = d + h / 6 * (k1d + 2 * k2d + 2 * k3d + k4d)
        dphase += np.angle(e_new / e)
        y = (e_new, d_new)
    return y, dphase


def solve_epsilon(profile, times, dt=1e-3, tol=1e-9, require_unit_start=False,
                  max_halvings=8) -> EpsilonTrajectory:
    """Solve ``eps'' + Omega(t)^2 eps = 0`` with ``eps(0) = 1, eps'(0) = i``.

    Classical RK4 with step ``dt``, halved until the Wronskian
    ``eps conj(eps') - conj(eps) eps' = -2i`` drifts by at most ``tol``.
    Switch times of piecewise profiles are hit exactly.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if abs(times[0]) > 0 or np.any(np.diff(times) <= 0):
        raise DomainError("times must start at 0 and increase")
    if require_unit_start and abs(profile.initial - 1.0) > 1e-14:
        raise ContractViolation("photon-added coherent states need Omega(0) = 1")
    h = dt
    for _ in range(max_halvings + 1):
        nodes = sorted(set(times) | set(profile.breakpoints(times[-1])))
        eps = np.empty(len(times), complex)
        eps_dot = np.empty(len(times), complex)
        phase = np.empty(len(times))
        y, ph = (1.0 + 0j, 1j), 0.0
        out = 0
        eps[0], eps_dot[0], phase[0] = y[0], y[1], 0.0
        out = 1
        for t0, t1 in zip(nodes[:-1], nodes[1:]):
            y, dph = _rk4_segment(y, t0, t1, h, profile)
            ph += dph
            if out < len(times) and abs(t1 - times[out]) < 1e-15:
                eps[out], eps_dot[out], phase[out] = y[0], y[1], ph
                out += 1
        traj = EpsilonTrajectory(times, eps, eps_dot, phase, h)
        if traj.wronskian_drift() <= tol:
            return traj
        h /= 2
    return traj


# ---------------------------------------------------------------------------
# state specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PACS:
    """Photon-added coherent state ``~ a^dagger^m |alpha>`` of the parametric oscillator."""

    alpha: complex = 0j
    m: int = 0
    profile: object = dc_field(default_factory=ConstantFrequency)

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        if not (isinstance(self.m, (int, np.integer)) and 0 <= self.m <= MAX_ORDER):
            raise DomainError(f"photon number m must be an integer in [0, {MAX_ORDER}]")
        if abs(self.alpha) > MAX_ALPHA:
            raise DomainError(f"|alpha| must not exceed {MAX_ALPHA}")

    @property
    def norm2(self):
        """``m! L_m(-|alpha|^2)``, the squared norm of ``a^dagger^m |alpha>``."""
        return factorial(self.m) * laguerre(self.m, -abs(self.alpha) ** 2)

    @property
    def label(self):
        a = self.alpha
        return f"pacs(alpha={a.real:g}{a.imag:+g}i, m={self.m})"


@dataclass(frozen=True)
class ClassicalGaussian:
    mean_q: float = 0.0
    mean_p: float = 0.0
    cov: tuple = ((0.5, 0.0), (0.0, 0.5))

    def __post_init__(self):
        c = np.asarray(self.cov, dtype=float)
        if c.shape != (2, 2) or not np.allclose(c, c.T):
            raise DomainError("covariance must be a symmetric 2x2 matrix")
        try:
            np.linalg.cholesky(c)
        except np.linalg.LinAlgError:
            raise DomainError("covariance must be positive definite") from None

    @property
    def label(self):
        return f"gaussian(q={self.mean_q:g}, p={self.mean_p:g})"


def fock(m, profile=None):
    return PACS(0j, m, profile or ConstantFrequency())


def coherent(alpha, profile=None):
    return PACS(alpha, 0, profile or ConstantFrequency())


def vacuum(profile=None):
    return PACS(0j, 0, profile or ConstantFrequency())


def catalog():
    """The photon-added coherent states used throughout the test corpus."""
    return [PACS(a, m) for a, m in
            [(0, 0), (0, 1), (0, 2), (1, 0), (1, 2), (1 + 0.5j, 1)]]


# ---------------------------------------------------------------------------
# wavefunctions and tomograms
# ---------------------------------------------------------------------------

def _check_sample(sample: EpsilonSample, tol=1e-6):
    if abs(sample.wronskian() + 2j) > tol:
        raise ContractViolation("eps sample violates the Wronskian invariant")


def _root_ratio(sample: EpsilonSample):
    """``sqrt(conj(eps) / (2 eps))`` on the branch continuous in t."""
    return np.exp(-1j * sample.phase) / np.sqrt(2.0)


def _sample_for(spec: PACS, t, trajectory=None) -> EpsilonSample:
    if isinstance(t, EpsilonSample):
        return t
    if trajectory is None:
        times = [0.0] if t == 0 else [0.0, float(t)]
        trajectory = solve_epsilon(spec.profile, times, require_unit_start=True)
    elif abs(spec.profile.initial - 1.0) > 1e-14:
        raise ContractViolation("photon-added coherent states need Omega(0) = 1")
    return trajectory.sample(t)


def pacs_wavefunction(spec: PACS, t, q_ax: Axis = None, trajectory=None) -> Field:
    """Coordinate wavefunction <q|alpha, m, t> on ``q_ax``.

    ``t`` is a time (eps is then solved for) or an :class:`EpsilonSample`.
    """
    q_ax = q_ax or Axis("q", -8.0, 1 / 16, 256)
    s = _sample_for(spec, t, trajectory)
    _check_sample(s)
    q = q_ax.values
    a, eps, epsd = spec.alpha, s.eps, s.eps_dot
    root = _root_ratio(s)
    # eps^(-1/2) on the continuous branch
    inv_sqrt_eps = np.exp(-0.5 * (np.log(abs(eps)) + 1j * s.phase))
    coh = (np.pi ** -0.25 * inv_sqrt_eps
           * np.exp(1j * epsd * q ** 2 / (2 * eps) + np.sqrt(2) * a * q / eps
                    - a ** 2 * np.conj(eps) / (2 * eps) - abs(a) ** 2 / 2))
    herm = hermite(spec.m, q / abs(eps) - root * a)
    psi = spec.norm2 ** -0.5 * root ** spec.m * herm * coh
    return Field((q_ax,), psi, {"state": spec.label, "t": s.t})


def pacs_symplectic_tomogram(spec: PACS, t, X, mu, nu, trajectory=None):
    """Closed-form symplectic tomogram M(X, mu, nu, t) of a photon-added coherent state.

    Broadcasts over ``X``, ``mu``, ``nu``.  Raises :class:`SingularRayError`
    where ``mu = nu = 0``.
    """
    X, mu, nu = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (X, mu, nu)))
    if np.any((mu == 0) & (nu == 0)):
        raise SingularRayError("symplectic tomogram is undefined at mu = nu = 0")
    s = _sample_for(spec, t, trajectory)
    _check_sample(s)
    a, eps, epsd, m = spec.alpha, s.eps, s.eps_dot, spec.m
    z = mu * eps + nu * epsd
    root = _root_ratio(s)
    # pure phase; its sign drops out of |H_m|^2 by parity
    rot = np.sqrt(abs(eps) ** 2 * z / (eps ** 2 * np.conj(z)))
    arg = ((X * eps + 1j * np.sqrt(2) * a * nu) / (abs(eps) * z) - root * a) * rot
    gauss = np.exp(-abs(a) ** 2 / 2 - X ** 2 / (2 * np.abs(z) ** 2)
                   + np.sqrt(2) * a * X / z - a ** 2 * np.conj(eps) / (2 * eps)
                   + 1j * nu * a ** 2 / (eps * z))
    pref = 1.0 / (spec.norm2 * np.sqrt(np.pi) * 2 ** m * np.abs(z))
    return pref * np.abs(hermite(m, arg)) ** 2 * np.abs(gauss) ** 2


def pacs_optical_tomogram(spec: PACS, t, x_ax: Axis = None, th_ax: Axis = None,
                          trajectory=None) -> Field:
    """Optical tomogram w(X, theta, t) = M(X, cos theta, sin theta, t)."""
    x_ax = x_ax or x_axis()
    th_ax = th_ax or theta_axis()
    X = x_ax.values[:, None]
    th = th_ax.values[None, :]
    w = pacs_symplectic_tomogram(spec, t, X, np.cos(th), np.sin(th), trajectory)
    tt = t.t if isinstance(t, EpsilonSample) else float(t)
    return Field((x_ax, th_ax), w, {"state": spec.label, "t": tt,
                                    "probability": True, "kind": "optical"})


def pacs_symplectic_field(spec: PACS, t, x_ax: Axis, mu_ax: Axis, nu_ax: Axis,
                          trajectory=None) -> Field:
    X = x_ax.values[:, None, None]
    mu = mu_ax.values[None, :, None]
    nu = nu_ax.values[None, None, :]
    M = pacs_symplectic_tomogram(spec, t, X, mu, nu, trajectory)
    tt = t.t if isinstance(t, EpsilonSample) else float(t)
    return Field((x_ax, mu_ax, nu_ax), M, {"state": spec.label, "t": tt,
                                           "probability": True, "kind": "symplectic"})


def wigner_of_wavefunction(psi: Field, p_ax: Axis = None, decay_tol=1e-10) -> Field:
    """Wigner function ``W(q,p) = int psi(q+u/2) conj(psi(q-u/2)) exp(-ipu) du``.

    ``u`` runs over even multiples of the q step so that both arguments stay
    on the grid; the u-integral is evaluated directly on ``p_ax``.
    """
    q_ax = psi.axes[0]
    p_ax = p_ax or Axis("p", q_ax.start, q_ax.step, q_ax.count)
    v = psi.values
    n = q_ax.count
    ks = np.arange(-(n // 2), n // 2)
    j = np.arange(n)[:, None]
    plus, minus = j + ks[None, :], j - ks[None, :]
    ok = (plus >= 0) & (plus < n) & (minus >= 0) & (minus < n)
    corr = np.where(ok, v[np.clip(plus, 0, n - 1)] * np.conj(v[np.clip(minus, 0, n - 1)]), 0)
    u = 2 * q_ax.step * ks
    kernel = np.exp(-1j * np.outer(u, p_ax.values)) * (2 * q_ax.step)
    W = (corr @ kernel).real
    edge = max(abs(v[0]), abs(v[-1])) / max(np.abs(v).max(), 1e-300)
    meta = dict(psi.metadata)
    meta.update(kind="wigner", decay_warning=bool(edge > decay_tol))
    return Field((q_ax, p_ax), W, meta)


def pacs_wigner(spec: PACS, t=0.0, q_ax: Axis = None, p_ax: Axis = None,
                trajectory=None) -> Field:
    return wigner_of_wavefunction(pacs_wavefunction(spec, t, q_ax, trajectory), p_ax)


def classical_gaussian(spec: ClassicalGaussian, q_ax: Axis = None, p_ax: Axis = None) -> Field:
    """Gaussian phase-space density normalised as ``int f dq dp / (2 pi) = 1``."""
    q_ax = q_ax or Axis("q", -8.0, 1 / 16, 256)
    p_ax = p_ax or Axis("p", -8.0, 1 / 16, 256)
    cov = np.asarray(spec.cov, dtype=float)
    inv = np.linalg.inv(cov)
    dq = q_ax.values[:, None] - spec.mean_q
    dp = p_ax.values[None, :] - spec.mean_p
    quad = inv[0, 0] * dq ** 2 + 2 * inv[0, 1] * dq * dp + inv[1, 1] * dp ** 2
    f = np.exp(-0.5 * quad) / np.sqrt(np.linalg.det(cov))
    return Field((q_ax, p_ax), f, {"state": spec.label, "kind": "phase",
                                   "classical": True})


# ---------------------------------------------------------------------------
# parsing of textual state specifications
# ---------------------------------------------------------------------------

def _parse_complex(text):
    text = text.strip().replace("i", "j").replace(" ", "")
    try:
        return complex(text)
    except ValueError:
        raise DomainError(f"cannot read complex number {text!r}") from None


def parse_profile(text):
    """``constant:W``, ``jump:W0,W1@T`` (Omega switches from W0 to W1 after T),
    ``sin:W0,DEPTH,DRIVE``."""
    if text is None:
        return ConstantFrequency()
    kind, _, rest = str(text).partition(":")
    try:
        if kind == "constant":
            return ConstantFrequency(float(rest or 1.0))
        if kind == "jump":
            vals, _, when = rest.partition("@")
            w0, w1 = (float(v) for v in vals.split(","))
            return PiecewiseFrequency((w0, w1), (float(when or 0.0),))
        if kind in ("sin", "sinusoidal"):
            w0, depth, drive = (float(v) for v in rest.split(","))
            return SinusoidalFrequency(w0, depth, drive)
    except ValueError:
        raise DomainError(f"malformed frequency profile {text!r}") from None
    raise DomainError(f"unknown frequency profile kind {kind!r}")


def parse_state(text, profile=None):
    """Read ``vacuum``, ``fock:M``, ``coherent:ALPHA``, ``pacs:ALPHA:M`` or
    ``gaussian:Q,P[,VAR]``."""
    prof = parse_profile(profile) if isinstance(profile, str) or profile is None else profile
    kind, _, rest = str(text).strip().partition(":")
    if kind == "vacuum":
        return vacuum(prof)
    if kind == "fock":
        try:
            return fock(int(rest), prof)
        except ValueError:
            raise DomainError(f"fock state needs an integer photon number, got {rest!r}") from None
    if kind == "coherent":
        return coherent(_parse_complex(rest), prof)
    if kind == "pacs":
        a, _, m = rest.rpartition(":")
        try:
            return PACS(_parse_complex(a), int(m), prof)
        except ValueError:
            raise DomainError(f"malformed pacs state {text!r}") from None
    if kind == "gaussian":
        parts = [float(v) for v in rest.split(",")]
        var = parts[2] if len(parts) > 2 else 0.5
        return ClassicalGaussian(parts[0], parts[1], ((var, 0.0), (0.0, var)))
    raise DomainError(f"unknown state kind {kind!r}")


def state_from_config(cfg: dict):
    """Build a state from a mapping with keys ``kind``, ``alpha_re``,
    ``alpha_im``, ``m``, ``profile`` (or the classical ``mean_q``, ``mean_p``,
    ``cov``)."""
    allowed = {"kind", "alpha_re", "alpha_im", "m", "profile", "mean_q",
               "mean_p", "cov"}
    unknown = set(cfg) - allowed
    if unknown:
        raise DomainError(f"unknown state keys: {sorted(unknown)}")
    kind = cfg.get("kind")
    prof = parse_profile(cfg.get("profile"))
    alpha = complex(cfg.get("alpha_re", 0.0), cfg.get("alpha_im", 0.0))
    if kind == "vacuum":
        return vacuum(prof)
    if kind == "fock":
        return fock(int(cfg.get("m", 0)), prof)
    if kind == "coherent":
        return coherent(alpha, prof)
    if kind == "pacs":
        return PACS(alpha, int(cfg.get("m", 0)), prof)
    if kind == "gaussian":
        return ClassicalGaussian(float(cfg.get("mean_q", 0.0)), float(cfg.get("mean_p", 0.0)),
                                 tuple(map(tuple, cfg.get("cov", ((0.5, 0), (0, 0.5))))))
    raise DomainError(f"state.kind: unknown state kind {kind!r}")
