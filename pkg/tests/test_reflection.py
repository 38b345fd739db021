import numpy as np
import pytest

from kposim import fockspace as fs
from kposim.errors import SingularDenominatorError
from kposim.lindblad import EvolutionResult
from kposim.model import KpoParams, build_hamiltonian, eigenbasis_elements, top_spectrum
from kposim.reflection import (
    TransitionTables,
    nominal_decay_rates,
    qubit_rhoF,
    reflection_coefficient,
    sensitivity,
    time_averaged_gamma,
    transition_tables,
)


def spectrum_for(p, omega, count=5, dim=None):
    pa = KpoParams(p=p, dim=dim)
    return pa, top_spectrum(build_hamiltonian(pa, omega=omega), count, pa.alpha, labeled=False)


def linear_resonator_tables(omega_r):
    """Two-level stand-in for a linear cavity: |0> at index 0, |1> above it
    by omega_r in transition frequency."""
    x = np.zeros((2, 2), dtype=complex)
    x[0, 1] = 1.0
    y = np.diag([0.0, 1.0]).astype(complex)
    return TransitionTables(X=x, Y=y, Z_diag=np.array([0.0, 1.0]),
                            frequencies=np.array([0.0, -omega_r]))


def test_tables_parity_selection_at_zero_drive():
    pa, spec = spectrum_for(9.0, 0.0)
    tables = transition_tables(spec)
    par = fs.parity(pa.dim)
    signs = [np.vdot(spec.level(i), par @ spec.level(i)).real for i in range(5)]
    for i in range(5):
        for j in range(5):
            if signs[i] * signs[j] > 0:   # same parity
                assert abs(tables.X[i, j]) < 1e-10


def test_tables_cat_matrix_element_closed_form():
    # a|phi0> = alpha (N+/N-)|phi1> and a|phi1> = alpha (N-/N+)|phi0>, so
    # X_10 = alpha N+/N- and X_01 = alpha N-/N+
    alpha = 3.0
    _, spec = spectrum_for(9.0, 0.0, count=2)
    tables = transition_tables(spec)
    np_, nm = (2 + 2 * np.exp(-2 * alpha**2)) ** -0.5, (2 - 2 * np.exp(-2 * alpha**2)) ** -0.5
    assert abs(tables.X[1, 0]) == pytest.approx(alpha * np_ / nm, rel=1e-9)
    assert abs(tables.X[0, 1]) == pytest.approx(alpha * nm / np_, rel=1e-9)
    assert abs(tables.X[0, 0]) < 1e-10


def test_tables_displaced_limit():
    # |X_02| -> |<0|D(-a) a D(a)|1>| = 1; the sign is the per-level phase
    # convention (largest amplitude real positive), which Gamma is blind to
    pa, spec = spectrum_for(9.0, 0.1)
    tables = transition_tables(spec)
    assert abs(abs(tables.X[0, 2]) - 1.0) < 5e-2
    assert np.max(np.abs(tables.Y - tables.Y.conj().T)) < 1e-10
    assert np.all(tables.Z_diag >= 0.0)


def test_displaced_x12_closed_form():
    # <D(-a)0| a |D(+a)1> = exp(-2 a^2)(1 - 2 a^2), checked at alpha = 3
    alpha, dim = 3.0, 100
    psi1 = fs.displacement(-alpha, dim) @ fs.fock_state(0, dim)
    psi2 = fs.displacement(alpha, dim) @ fs.fock_state(1, dim)
    x12 = np.vdot(psi1, fs.annihilation(dim) @ psi2)
    want = np.exp(-2 * alpha**2) * (1 - 2 * alpha**2)
    assert abs(x12 - want) < 1e-6


def test_reflection_sum_structure():
    pa = KpoParams(p=9.0, omega0=0.1, kappa_ex=0.01, kappa_int=0.005)
    _, spec = spectrum_for(9.0, 0.1)
    tables = transition_tables(spec)
    res = reflection_coefficient(tables, qubit_rhoF(0.7), 0.01, 0.005, 0.0,
                                 spec.transition(2, 0))
    assert res.gamma == 1.0 + res.xi.sum()


def test_linear_resonator_reduction():
    # on resonance: Gamma = 1 + kex / (-(kex + kint)/2) = -1/3 for 0.01/0.005
    tables = linear_resonator_tables(5.0)
    rf = np.diag([1.0, 0.0]).astype(complex)
    res = reflection_coefficient(tables, rf, 0.01, 0.005, 0.0, -5.0)
    assert res.gamma == pytest.approx(-1.0 / 3.0, abs=1e-12)
    off = reflection_coefficient(tables, rf, 0.01, 0.005, 0.0, -5.0 + 0.0075)
    # half-linewidth detuning: Gamma = 1 + kex/(i kt/2 - kt/2)
    want = 1 + 0.01 / (1j * 0.0075 - 0.0075)
    assert off.gamma == pytest.approx(want, abs=1e-12)


def test_far_detuned_probe_reflects_fully():
    pa = KpoParams(p=9.0, omega0=0.1, kappa_ex=0.01, kappa_int=0.005)
    _, spec = spectrum_for(9.0, 0.1)
    tables = transition_tables(spec)
    res = reflection_coefficient(tables, qubit_rhoF(1.0), 0.01, 0.005, 0.0, 50.0)
    assert abs(res.gamma - 1.0) < 0.01


def test_singular_denominator_raises():
    tables = linear_resonator_tables(5.0)
    rf = np.diag([1.0, 0.0]).astype(complex)
    with pytest.raises(SingularDenominatorError):
        reflection_coefficient(tables, rf, 0.0, 0.0, 0.0, -5.0)


def test_trace_precondition():
    tables = linear_resonator_tables(5.0)
    rf = np.diag([0.9, 0.0]).astype(complex)
    with pytest.raises(ValueError):
        reflection_coefficient(tables, rf, 0.01, 0.005, 0.0, -5.0)
    # explicit looser tolerance admits projected inputs
    reflection_coefficient(tables, rf, 0.01, 0.005, 0.0, -5.0, trace_tol=0.2)


def test_gamma_affine_in_rhoF(rng):
    _, spec = spectrum_for(9.0, 0.5)
    tables = transition_tables(spec)
    win = spec.transition(2, 0) + 0.004

    def rand_rho(n=5):
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        r = a @ a.conj().T
        return r / np.trace(r).real

    for _ in range(4):
        ra, rb = rand_rho(), rand_rho()
        ga = reflection_coefficient(tables, ra, 0.01, 0.005, 0.0, win).gamma
        gb = reflection_coefficient(tables, rb, 0.01, 0.005, 0.0, win).gamma
        for lam in (0.0, 0.25, 0.5, 0.9, 1.0):
            gmix = reflection_coefficient(
                tables, lam * ra + (1 - lam) * rb, 0.01, 0.005, 0.0, win
            ).gamma
            assert abs(gmix - (lam * ga + (1 - lam) * gb)) < 1e-12


def test_sensitivity_asymptote_and_overlap():
    pa = KpoParams(p=30.0, omega0=0.1, kappa_ex=0.01, kappa_int=0.005)
    s20 = sensitivity(pa, (0, 2))
    s31 = sensitivity(pa, (1, 3))
    assert abs(s20 - 4.0 / 3.0) / (4.0 / 3.0) < 0.05
    assert abs(s20 - s31) / s20 < 0.02


def test_sensitivity_no_internal_loss_approaches_two():
    pa = KpoParams(p=30.0, omega0=0.1, kappa_ex=0.01, kappa_int=0.0)
    assert abs(sensitivity(pa, (0, 2)) - 2.0) / 2.0 < 0.05


def test_sensitivity_transition_hierarchy_small_pump():
    pa = KpoParams(p=4.0, omega0=0.5, kappa_ex=0.01, kappa_int=0.005)
    assert sensitivity(pa, (0, 2)) > sensitivity(pa, (1, 3))


def test_sensitivity_increases_with_pump():
    vals = [
        sensitivity(KpoParams(p=p, omega0=0.1, kappa_ex=0.01, kappa_int=0.005), (0, 2))
        for p in (4.0, 9.0, 16.0, 30.0)
    ]
    assert vals == sorted(vals)


def test_one_to_one_readout_slope():
    pa = KpoParams(p=9.0, omega0=0.5, kappa_ex=0.01, kappa_int=0.005)
    assert sensitivity(pa, (0, 2)) > 0.1


def test_nominal_rates_displaced_limit():
    pa = KpoParams(p=30.0, omega0=0.1, kappa_ex=0.01, kappa_int=0.005)
    _, spec = spectrum_for(30.0, 0.1)
    tables = transition_tables(spec)
    rf = qubit_rhoF(1.0)
    kex_nom, kint_nom, (im_ex, im_int) = nominal_decay_rates(tables, rf, pa, (0, 2))
    assert kex_nom == pytest.approx(0.01 * abs(tables.X[0, 2]) ** 2, abs=1e-12)
    assert abs(im_ex) < 1e-12
    assert kex_nom == pytest.approx(0.01, rel=0.05)
    assert kint_nom == pytest.approx(0.005, rel=0.3)


def test_nominal_rates_undercoupling_with_dephasing():
    pa = KpoParams(p=9.0, omega0=0.1, kappa_ex=0.01, kappa_int=0.005, gamma=1e-3)
    _, spec = spectrum_for(9.0, 0.1)
    tables = transition_tables(spec)
    kex_nom, kint_nom, _ = nominal_decay_rates(tables, qubit_rhoF(1.0), pa, (0, 2))
    assert kint_nom > 3.0 * kex_nom


def test_time_averaged_gamma_stationary():
    pa = KpoParams(p=9.0, omega0=0.1, kappa_ex=0.01, kappa_int=0.005)
    _, spec = spectrum_for(9.0, 0.1)
    tables = transition_tables(spec)
    win = spec.transition(2, 0)
    rho = 0.3 * np.outer(spec.level(0), spec.level(0).conj()) + 0.7 * np.outer(
        spec.level(1), spec.level(1).conj()
    )
    traj = EvolutionResult(
        times=np.array([0.0, 1.0, 2.0, 3.0]),
        states=[rho.copy() for _ in range(4)],
        steps=0, rhs_evals=0, max_trace_drift=0.0, max_hermiticity_drift=0.0,
    )
    gbar = time_averaged_gamma(traj, spec, pa, win, (0.0, 3.0))
    inst = reflection_coefficient(
        tables, eigenbasis_elements(spec, rho), 0.01, 0.005, 0.0, win, trace_tol=5e-2
    ).gamma
    assert gbar == pytest.approx(inst, abs=1e-12)
    single = time_averaged_gamma(traj, spec, pa, win, (0.9, 1.1))
    assert single == pytest.approx(inst, abs=1e-12)
    with pytest.raises(ValueError):
        time_averaged_gamma(traj, spec, pa, win, (10.0, 11.0))
