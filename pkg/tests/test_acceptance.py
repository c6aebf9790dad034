"""Acceptance criteria 1-11, each at its stated tolerance.

Every test logs one PASS/FAIL line through ``conftest.record``; the lines
are repeated in the pytest terminal summary.
"""

import numpy as np
import pytest

import oracles
from conftest import Grids, record, sup
from tomolab import (PACS, ClassicalGaussian, EnergyQuery, Field, GeneratorSpec, PolynomialPotential,
                     catalog, classical_gaussian, classical_optical_generator,
                     classical_symplectic_generator, coherent, correspondence_check,
                     energy_residual_optical, energy_residual_symplectic, evolve, fock, harmonic,
                     inverse_radon, moment_from_characteristic, moyal_evolve, moyal_generator,
                     optical_generator, pacs_optical_tomogram, pacs_symplectic_field,
                     pacs_wigner, parametric_potential, parse_potential, parse_profile,
                     q_operator_optical, q_operator_symplectic, quadrature_moment, radon_optical,
                     solve_epsilon, spectral_dtheta, spectral_dx, symplectic_generator,
                     tensor_product, theta_axis, uniform_axis, vacuum, x_axis)

SQ = harmonic(1)
QUARTIC = parse_potential("0.25*q^4")
CATALOG = catalog()
pytestmark = pytest.mark.slow


def fmt(x):
    return f"{x:.2e}"


def test_criterion_01_closed_form_vs_quadrature():
    cases = [(0, 0), (0, 1), (0, 2), (1, 0), (1, 2), (1 + 0.5j, 1)]
    worst = 0.0
    for alpha, m in cases:
        for t in (0.0, 0.7):
            ref = oracles.pacs_tomogram_oracle(alpha, m, t, Grids.X.values, Grids.theta.values)
            w = pacs_optical_tomogram(PACS(alpha, m), t, Grids.X, Grids.theta)
            worst = max(worst, sup(w, ref))
    ok = worst <= 1e-5
    record(1, ok, f"closed form vs quadrature oracle, sup-err {fmt(worst)} (tol 1e-5)")
    assert ok


def test_criterion_02_parametric_jump():
    profile = parse_profile("jump:1,2@0")
    state = coherent(1.0, profile)
    q, p = uniform_axis("q", -10, 10, 256), uniform_axis("p", -10, 10, 256)
    # before the jump the state is the ordinary alpha = 1 coherent state
    W0 = Field((q, p), oracles.coherent_wigner(*np.meshgrid(q.values, p.values, indexing="ij"), 1.0),
               {"kind": "wigner"})
    traj = moyal_evolve(W0, parametric_potential(profile), dt=1e-3, steps=1000,
                        snapshot_every=250)
    worst = 0.0
    for t, W in traj[1:]:
        if not any(np.isclose(t, s) for s in (0.25, 0.5, 1.0)):
            continue
        w = radon_optical(W, Grids.X, Grids.theta)
        worst = max(worst, sup(w, pacs_optical_tomogram(state, t, Grids.X, Grids.theta)))
    drift = solve_epsilon(profile, np.linspace(0, 1, 5)).wronskian_drift()
    ok = worst <= 1e-4 and drift <= 1e-9
    record(2, ok, f"parametric jump, sup-err {fmt(worst)} (tol 1e-4), "
                  f"Wronskian drift {fmt(drift)} (tol 1e-9)")
    assert ok


def test_criterion_03_quadratic_identity():
    worst = 0.0
    for state in CATALOG:
        for t in (0.0, 0.7):
            w = pacs_optical_tomogram(state, t, Grids.X, Grids.theta)
            worst = max(worst, sup(optical_generator(w, SQ), spectral_dtheta(w)))
    g = classical_gaussian(ClassicalGaussian(0.5, -0.3, ((0.6, 0.1), (0.1, 0.5))))
    wg = radon_optical(g, Grids.X, Grids.theta)
    worst = max(worst, sup(optical_generator(wg, SQ), spectral_dtheta(wg)))
    ok = worst <= 1e-8
    record(3, ok, f"quadratic identity, sup-err {fmt(worst)} (tol 1e-8)")
    assert ok


def test_criterion_04_rotation():
    w0 = pacs_optical_tomogram(coherent(1.0), 0.0, Grids.X, Grids.theta)
    traj = evolve(w0, GeneratorSpec("optical-quantum", SQ), dt=1e-3, horizon=np.pi / 2,
                  snapshot_every=100)
    t, w = traj[-1]
    ref = oracles.gaussian_tomogram(w.coord("X"), w.coord("theta") + t, 1.0)
    err = sup(w, ref)
    norm = max(f.metadata["normalization_drift"] for _, f in traj)
    symm = max(f.metadata["symmetry_drift"] for _, f in traj)
    ok = err <= 1e-4 and norm <= 1e-6 and symm <= 1e-8 and np.isclose(t, np.pi / 2)
    record(4, ok, f"rotation to t=pi/2, sup-err {fmt(err)} (tol 1e-4), normalization drift "
                  f"{fmt(norm)} (tol 1e-6), symmetry drift {fmt(symm)} (tol 1e-8)")
    assert ok


def test_criterion_05_energy_levels():
    on_opt, off_opt, on_sym, off_sym = 0.0, np.inf, 0.0, np.inf
    for m in (0, 1, 2):
        E = m + 0.5
        w = pacs_optical_tomogram(fock(m), 0.0, Grids.X, Grids.theta)
        M = pacs_symplectic_field(fock(m), 0.0, Grids.X, Grids.mu, Grids.nu)
        on_opt = max(on_opt, energy_residual_optical(EnergyQuery(E, w, SQ))[1])
        on_sym = max(on_sym, energy_residual_symplectic(EnergyQuery(E, M, SQ))[1])
        for dE in (-0.1, 0.1):
            off_opt = min(off_opt, energy_residual_optical(EnergyQuery(E + dE, w, SQ))[1])
            off_sym = min(off_sym, energy_residual_symplectic(EnergyQuery(E + dE, M, SQ))[1])
    ok = on_opt <= 1e-6 and off_opt >= 1e-2 and on_sym <= 1e-4 and off_sym >= 1e-2
    record(5, ok, f"energy levels, optical {fmt(on_opt)}/{fmt(off_opt)} (<=1e-6 / >=1e-2), "
                  f"symplectic {fmt(on_sym)}/{fmt(off_sym)} (<=1e-4 / >=1e-2)")
    assert ok


def test_criterion_06_correspondence_rules():
    worst = 0.0
    for state in CATALOG:
        rep = correspondence_check(state, q_ax=Grids.q, p_ax=Grids.p, x_ax=Grids.X,
                                   th_ax=Grids.theta, mu_ax=Grids.mu, nu_ax=Grids.nu)
        worst = max([worst] + [r["norm"] for r in rep["rows"] if r["rule"] != "density"])
    ok = worst <= 1e-5
    record(6, ok, f"correspondence rules over the catalog, sup-err {fmt(worst)} (tol 1e-5)")
    assert ok


def test_criterion_07_moyal_diagram():
    potentials = [PolynomialPotential({}), SQ, parse_potential("0.1*q^3"), QUARTIC]
    worst = 0.0
    for state in CATALOG:
        W = pacs_wigner(state, 0.0, Grids.q, Grids.p)
        w = radon_optical(W, Grids.X, Grids.theta)
        for U in potentials:
            lhs = radon_optical(moyal_generator(W, U), Grids.X, Grids.theta)
            worst = max(worst, sup(lhs, optical_generator(w, U)))
    ok = worst <= 1e-5
    record(7, ok, f"Moyal/tomogram diagram for 4 potentials, sup-err {fmt(worst)} (tol 1e-5)")
    assert ok


def test_criterion_08_classical_limit():
    quadratics = [PolynomialPotential({}), SQ, parse_potential("0.3*q + 0.7*q^2")]
    same = 0.0
    for state in (vacuum(), coherent(1 + 0.5j), fock(2)):
        w = pacs_optical_tomogram(state, 0.0, Grids.X, Grids.theta)
        M = pacs_symplectic_field(state, 0.0, Grids.X, Grids.mu, Grids.nu)
        for U in quadratics:
            same = max(same, sup(classical_optical_generator(w, U), optical_generator(w, U)),
                       sup(classical_symplectic_generator(M, U), symplectic_generator(M, U)))

    w = pacs_optical_tomogram(coherent(1 + 0.5j), 0.0, Grids.X, Grids.theta)
    th = w.coord("theta")
    b3 = w.with_values((np.sin(th) / 2) ** 3 * spectral_dx(w, order=3).values)
    corr = sup(optical_generator(w, QUARTIC).values - classical_optical_generator(w, QUARTIC).values,
               -2 * q_operator_optical(b3).values)
    M = pacs_symplectic_field(coherent(1.0), 0.0, Grids.X, Grids.mu, Grids.nu)
    b3 = M.with_values((M.coord("nu") / 2) ** 3 * spectral_dx(M, order=3).values)
    corr = max(corr, sup(symplectic_generator(M, QUARTIC).values
                         - classical_symplectic_generator(M, QUARTIC).values,
                         -2 * q_operator_symplectic(b3).values))

    g = classical_gaussian(ClassicalGaussian(0.0, 0.0, ((0.5, 0.0), (0.0, 0.5))),
                           Grids.q, Grids.p)
    wc = radon_optical(g, Grids.X, Grids.theta)
    wq = pacs_optical_tomogram(vacuum(), 0.0, Grids.X, Grids.theta)
    a = evolve(wc, GeneratorSpec("optical-classical", SQ), dt=1e-2, horizon=1.0)
    b = evolve(wq, GeneratorSpec("optical-quantum", SQ), dt=1e-2, horizon=1.0)
    traj = max(sup(fa, fb) for (_, fa), (_, fb) in zip(a, b))
    ok = same <= 1e-10 and corr <= 1e-7 and traj <= 1e-9
    record(8, ok, f"classical limit, deg<=2 {fmt(same)} (tol 1e-10), hbar^2 term {fmt(corr)} "
                  f"(tol 1e-7), Gaussian vs vacuum trajectory {fmt(traj)} (tol 1e-9)")
    assert ok


def test_criterion_09_reconstruction():
    worst = 0.0
    for state in CATALOG:
        W = pacs_wigner(state, 0.0, Grids.q, Grids.p)
        rec = inverse_radon(radon_optical(W, Grids.X, Grids.theta), Grids.q, Grids.p)
        worst = max(worst, sup(rec, W))
        if state == fock(1):
            i0 = int(np.argmin(np.abs(Grids.q.values)))
            origin = rec.values[i0, i0].real
    ok = worst <= 1e-3 and abs(origin + 2) <= 0.02
    record(9, ok, f"reconstruction roundtrip sup-err {fmt(worst)} (tol 1e-3), "
                  f"Fock-1 W(0,0) = {origin:.6f} (-2 +- 0.02)")
    assert ok


def test_criterion_10_moments():
    wc = pacs_optical_tomogram(coherent(1.0), 0.0, Grids.X, Grids.theta)
    mean = sup(quadrature_moment(wc, 1), np.sqrt(2) * np.cos(Grids.theta.values))
    wv = pacs_optical_tomogram(vacuum(), 0.0, Grids.X, Grids.theta)
    second = sup(quadrature_moment(wv, 2), 0.5)
    cons = 0.0
    for state in CATALOG:
        w = pacs_optical_tomogram(state, 0.0, Grids.X, Grids.theta)
        for n in range(1, 5):
            cons = max(cons, sup(quadrature_moment(w, n), moment_from_characteristic(w, n)))
    ok = mean <= 1e-7 and second <= 1e-8 and cons <= 1e-5
    record(10, ok, f"moments, <X> {fmt(mean)} (tol 1e-7), vacuum <X^2> {fmt(second)} (tol 1e-8), "
                   f"characteristic consistency {fmt(cons)} (tol 1e-5)")
    assert ok


def test_criterion_11_two_mode_additivity():
    # four-dimensional product grids: 64 X by 32 theta per mode
    def small(state, mode=0):
        return pacs_optical_tomogram(state, 0.0, x_axis(64, mode=mode), theta_axis(32, mode=mode))

    f, g = small(coherent(1 + 0.5j)), small(fock(1))
    fg = tensor_product(f, g)
    worst = 0.0
    for u1, u2 in ((SQ, SQ), (QUARTIC, parse_potential("0.1*q^3 + 0.5*q^2"))):
        U = PolynomialPotential({**{(k[0], 0): c for k, c in u1.terms.items()},
                                 **{(0, k[0]): c for k, c in u2.terms.items()}}, modes=2)
        rhs = (tensor_product(optical_generator(f, u1), g).values
               + tensor_product(f, optical_generator(g, u2)).values)
        worst = max(worst, sup(optical_generator(fg, U), rhs))
    ok = worst <= 1e-8
    record(11, ok, f"two-mode product generator additivity, sup-err {fmt(worst)} (tol 1e-8)")
    assert ok
