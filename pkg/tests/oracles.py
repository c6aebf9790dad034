"""Independent reference values.

Nothing here imports the package's numerical kernels: closed forms come
from scipy.special, and integrals are brute-force quadratures.
"""

import numpy as np
from scipy.special import eval_genlaguerre, eval_hermite, factorial

SQRT2 = np.sqrt(2.0)


def gaussian_tomogram(X, theta, alpha=0.0):
    """Coherent-state optical tomogram: a unit-variance-1/2 Gaussian in X."""
    centre = SQRT2 * (np.real(alpha) * np.cos(theta) + np.imag(alpha) * np.sin(theta))
    return np.exp(-(X - centre) ** 2) / np.sqrt(np.pi)


def fock_tomogram(X, m):
    """``|psi_m(X)|^2`` for the unit oscillator."""
    return (eval_hermite(m, X) ** 2 * np.exp(-X ** 2)
            / (np.sqrt(np.pi) * 2.0 ** m * factorial(m)))


def gaussian_symplectic(X, mu, nu):
    r2 = mu ** 2 + nu ** 2
    return np.exp(-X ** 2 / r2) / np.sqrt(np.pi * r2)


def coherent_wigner(q, p, alpha=0.0):
    q0, p0 = SQRT2 * np.real(alpha), SQRT2 * np.imag(alpha)
    return 2.0 * np.exp(-(q - q0) ** 2 - (p - p0) ** 2)


def fock_wigner(q, p, m):
    r2 = q ** 2 + p ** 2
    return 2.0 * (-1) ** m * eval_genlaguerre(m, 0, 2 * r2) * np.exp(-r2)


def fock_wavefunction(y, m):
    return (eval_hermite(m, y) * np.exp(-y ** 2 / 2)
            / np.sqrt(np.sqrt(np.pi) * 2.0 ** m * factorial(m)))


def tomogram_by_quadrature(psi, y, X, mu, nu):
    """``M(X, mu, nu) = |int psi(y) exp(i mu y^2 / 2nu - i X y / nu) dy|^2 / (2 pi |nu|)``.

    ``psi`` holds samples on the uniform grid ``y``; ``nu = 0`` falls back to
    ``|psi(X / mu)|^2 / |mu|`` by interpolation.
    """
    X = np.asarray(X, float)
    dy = y[1] - y[0]
    if nu == 0:
        re = np.interp(X / mu, y, psi.real, left=0, right=0)
        im = np.interp(X / mu, y, psi.imag, left=0, right=0)
        return (re ** 2 + im ** 2) / abs(mu)
    chirp = psi * np.exp(0.5j * mu * y ** 2 / nu)
    amp = np.exp(-1j * np.outer(X, y) / nu) @ chirp * dy
    return np.abs(amp) ** 2 / (2 * np.pi * abs(nu))


def epsilon_constant(omega, t):
    """``eps(t)`` and ``eps'(t)`` for constant frequency with ``eps(0)=1, eps'(0)=i``."""
    if omega == 0:
        return 1 + 1j * t, 1j
    return (np.cos(omega * t) + 1j / omega * np.sin(omega * t),
            -omega * np.sin(omega * t) + 1j * np.cos(omega * t))


def free_vacuum_generator(X, theta):
    """Free-particle time derivative of the vacuum optical tomogram."""
    return -0.5 * np.sin(2 * theta) * (1 - 2 * X ** 2) * np.exp(-X ** 2) / np.sqrt(np.pi)


def rotating_coherent_dt(X, theta, alpha):
    """``d/dt`` of the harmonic flow ``w(X, theta + t)`` at ``t = 0`` for a coherent state."""
    centre = SQRT2 * (np.real(alpha) * np.cos(theta) + np.imag(alpha) * np.sin(theta))
    dcentre = SQRT2 * (-np.real(alpha) * np.sin(theta) + np.imag(alpha) * np.cos(theta))
    return 2 * (X - centre) * dcentre * gaussian_tomogram(X, theta, alpha)


def hermite_functions(y, nmax):
    """Normalized oscillator eigenfunctions ``psi_0 .. psi_nmax`` by the stable three-term recursion."""
    out = np.empty((nmax + 1, len(y)))
    out[0] = np.pi ** -0.25 * np.exp(-y ** 2 / 2)
    if nmax:
        out[1] = SQRT2 * y * out[0]
    for n in range(2, nmax + 1):
        out[n] = np.sqrt(2.0 / n) * y * out[n - 1] - np.sqrt((n - 1) / n) * out[n - 2]
    return out


def pacs_wavefunction_fock(y, alpha, m, t=0.0, nmax=60):
    """``(a^dagger)^m |alpha>`` under the unit oscillator, summed in the Fock basis.

    ``|alpha> = exp(-|alpha|^2/2) sum alpha^n / sqrt(n!) |n>`` and
    ``a^dagger^m |n> = sqrt((n+m)!/n!) |n+m>``; level ``k`` picks up
    ``exp(-i (k + 1/2) t)``.  Normalized numerically.
    """
    n = np.arange(nmax + 1)
    log_c = n * np.log(abs(alpha) if alpha else 1.0) - 0.5 * _lgamma(n + 1)
    base = np.exp(log_c) * np.exp(1j * n * np.angle(alpha)) if alpha else (n == 0).astype(complex)
    coef = np.zeros(nmax + m + 1, complex)
    coef[m:] = base * np.exp(0.5 * (_lgamma(n + m + 1) - _lgamma(n + 1)))
    k = np.arange(len(coef))
    coef *= np.exp(-1j * (k + 0.5) * t)
    coef /= np.linalg.norm(coef)
    return coef @ hermite_functions(y, len(coef) - 1)


def _lgamma(x):
    from scipy.special import gammaln
    return gammaln(x)


def pacs_tomogram_oracle(alpha, m, t, X, theta, y=None):
    """Optical tomogram ``M(X, cos th, sin th)`` by quadrature of the Fock-sum wavefunction."""
    y = np.linspace(-10, 10, 2048, endpoint=False) if y is None else y
    psi = pacs_wavefunction_fock(y, alpha, m, t)
    out = np.empty((len(X), len(theta)))
    for j, th in enumerate(theta):
        mu, nu = np.cos(th), np.sin(th)
        if abs(nu) < 1e-12:
            out[:, j] = np.abs(pacs_wavefunction_fock(X / mu, alpha, m, t)) ** 2 / abs(mu)
        else:
            out[:, j] = tomogram_by_quadrature(psi, y, X, mu, nu)
    return out
