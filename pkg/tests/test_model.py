import numpy as np
import pytest

from kposim import fockspace as fs
from kposim.errors import AmbiguousLabelError
from kposim.model import (
    KpoParams,
    build_hamiltonian,
    cat_states,
    displaced_fock_overlap,
    effective_potential,
    eigenbasis_elements,
    fock_dim_for,
    top_spectrum,
)


def analytic_cats(p, dim):
    """Oracle: N+-(|alpha> +- |-alpha>) with the closed-form normalization."""
    alpha = np.sqrt(p)
    ca, cma = fs.coherent_state(alpha, dim), fs.coherent_state(-alpha, dim)
    np_, nm = (2 + 2 * np.exp(-2 * alpha**2)) ** -0.5, (2 - 2 * np.exp(-2 * alpha**2)) ** -0.5
    return np_ * (ca + cma), nm * (ca - cma)


def test_params_validation():
    with pytest.raises(ValueError):
        KpoParams(p=-1.0)
    with pytest.raises(ValueError):
        KpoParams(p=1.0, kappa_ex=-0.1)
    pa = KpoParams(p=9.0)
    assert pa.dim == fock_dim_for(9.0) == 54
    assert pa.alpha == 3.0
    assert KpoParams(p=4.0, kappa_ex=0.2, kappa_int=0.1).kappa_tot == pytest.approx(0.3)


def test_kerr_only_spectrum():
    # p = 0, no drive: H is diagonal with eigenvalues -n(n-1)/2
    pa = KpoParams(p=0.0, dim=12)
    h = build_hamiltonian(pa)
    n = np.arange(12)
    assert np.max(np.abs(h - np.diag(-0.5 * n * (n - 1)))) == 0.0


def test_hamiltonian_hermitian():
    for pa, om, de in (
        (KpoParams(p=9.0), 0.3, 0.0),
        (KpoParams(p=4.0), 0.0, -6.9),
        (KpoParams(p=16.0), 0.5, -2.0),
    ):
        h = build_hamiltonian(pa, omega=om, delta=de)
        assert np.max(np.abs(h - h.conj().T)) <= 1e-12 * np.max(np.abs(h))


def test_coherent_expectation_matches_polynomial():
    # <a'|H|a'> = -(1/2)a'^4 + p a'^2 + 2 Omega a' + Delta a'^2 for real a'
    pa = KpoParams(p=6.0, dim=50)
    om, de = 0.37, -1.2
    h = build_hamiltonian(pa, omega=om, delta=de)
    for ap in (-2.2, -1.0, 0.0, 0.8, 2.4):
        v = fs.coherent_state(ap, 50)
        want = -0.5 * ap**4 + pa.p * ap**2 + 2 * om * ap + de * ap**2
        assert np.vdot(v, h @ v).real == pytest.approx(want, abs=1e-8)


def test_parity_commutes_without_drive():
    pa = KpoParams(p=9.0)
    h = build_hamiltonian(pa)
    p_op = fs.parity(pa.dim)
    assert np.max(np.abs(h @ p_op - p_op @ h)) <= 1e-12 * np.max(np.abs(h))


def test_top_spectrum_cats_at_zero_drive():
    for p in (4.0, 9.0):
        pa = KpoParams(p=p)
        spec = top_spectrum(build_hamiltonian(pa), 4, pa.alpha)
        even, odd = analytic_cats(p, pa.dim)
        assert abs(np.vdot(spec.level(0), even)) ** 2 > 1 - 1e-6
        assert abs(np.vdot(spec.level(1), odd)) ** 2 > 1 - 1e-6
    # top doublet degenerate on the e^{-2 alpha^2} scale at p = 9
    assert abs(spec.energies[0] - spec.energies[1]) < 1e-6
    assert [(l.sign, l.m) for l in spec.labels] == [(1, 0), (-1, 0), (1, 1), (-1, 1)]


def test_top_spectrum_eigenpair_quality():
    pa = KpoParams(p=9.0)
    h = build_hamiltonian(pa, omega=0.3)
    spec = top_spectrum(h, 5, pa.alpha, labeled=False)
    hnorm = np.max(np.abs(np.linalg.eigvalsh(h)))
    for i in range(5):
        resid = np.linalg.norm(h @ spec.level(i) - spec.energies[i] * spec.level(i))
        assert resid <= 1e-9 * hnorm
    gram = spec.states.conj().T @ spec.states
    assert np.max(np.abs(gram - np.eye(5))) < 1e-9
    assert np.all(np.diff(spec.energies) <= 0)
    # deterministic phase: largest amplitude real positive
    for i in range(5):
        k = np.argmax(np.abs(spec.level(i)))
        amp = spec.level(i)[k]
        assert amp.real > 0 and abs(amp.imag) < 1e-12 * abs(amp)


def test_top_spectrum_displaced_well_state():
    pa = KpoParams(p=9.0)
    spec = top_spectrum(build_hamiltonian(pa, omega=0.1), 2, pa.alpha)
    d0 = fs.displacement(pa.alpha, pa.dim) @ fs.vacuum(pa.dim)
    assert abs(np.vdot(spec.level(0), d0)) ** 2 > 0.99


def test_top_spectrum_four_labels_moderate_drive():
    pa = KpoParams(p=9.0)
    spec = top_spectrum(build_hamiltonian(pa, omega=0.5), 4, pa.alpha)
    assert [(l.sign, l.m) for l in spec.labels] == [(1, 0), (-1, 0), (1, 1), (-1, 1)]


def test_top_spectrum_ambiguous_when_reordered():
    # strong drive pushes the (-,0) level below (+,1): labelling must refuse
    pa = KpoParams(p=4.0)
    with pytest.raises(AmbiguousLabelError):
        top_spectrum(build_hamiltonian(pa, omega=1.1), 5, pa.alpha)


def test_transition_antisymmetry():
    pa = KpoParams(p=4.0)
    spec = top_spectrum(build_hamiltonian(pa, omega=0.2), 4, pa.alpha, labeled=False)
    for n in range(4):
        for m in range(4):
            assert spec.transition(n, m) == -spec.transition(m, n)


def test_cat_states_orthonormal():
    even, odd = cat_states(KpoParams(p=9.0))
    assert abs(np.vdot(even, odd)) < 1e-12
    assert np.linalg.norm(even) == pytest.approx(1.0, abs=1e-10)
    assert np.linalg.norm(odd) == pytest.approx(1.0, abs=1e-10)
    ora_e, ora_o = analytic_cats(9.0, KpoParams(p=9.0).dim)
    assert np.max(np.abs(even - ora_e)) < 1e-9
    assert np.max(np.abs(odd - ora_o)) < 1e-9


def test_cat_states_fock_limit():
    pa = KpoParams(p=1e-12, dim=30)
    even, odd = cat_states(pa)
    assert abs(np.vdot(even, fs.fock_state(0, 30))) ** 2 > 1 - 1e-8
    assert abs(np.vdot(odd, fs.fock_state(1, 30))) ** 2 > 1 - 1e-8


def test_displaced_overlap_half_at_zero_drive():
    pa = KpoParams(p=4.0)
    spec = top_spectrum(build_hamiltonian(pa), 2, pa.alpha)
    ov = displaced_fock_overlap(spec, 0, pa.alpha, 0, +1)
    assert ov == pytest.approx(0.5, abs=1e-3)


def test_displaced_overlap_improves_with_pump():
    ovs = []
    for p in (4.0, 9.0, 16.0):
        pa = KpoParams(p=p)
        spec = top_spectrum(build_hamiltonian(pa, omega=0.5), 2, pa.alpha, labeled=False)
        ovs.append(displaced_fock_overlap(spec, 0, pa.alpha, 0, +1))
    assert ovs[0] < ovs[1] < ovs[2]
    assert ovs[2] > 0.99


def test_displaced_overlap_psi3_rises_then_drops():
    pa = KpoParams(p=4.0)
    vals = []
    for om in (0.05, 0.40, 0.68):
        spec = top_spectrum(build_hamiltonian(pa, omega=om), 4, pa.alpha, labeled=False)
        vals.append(displaced_fock_overlap(spec, 3, pa.alpha, 1, -1))
    assert vals[1] > vals[0]
    assert vals[2] < vals[1]


def test_effective_potential_shape():
    pa = KpoParams(p=4.0)
    xs = np.linspace(-4, 4, 1601)
    v0 = effective_potential(pa, 0.0, xs)
    assert np.max(np.abs(v0 - v0[::-1])) < 1e-12 * np.max(np.abs(v0))   # symmetric
    tops = xs[np.argsort(v0)[-2:]]
    assert sorted(np.round(np.abs(tops), 2).tolist()) == [2.0, 2.0]
    v1 = effective_potential(pa, 0.3, np.array([2.0, -2.0]))
    assert v1[0] - v1[1] == pytest.approx(4 * 0.3 * 2.0, abs=1e-12)
    flat = effective_potential(KpoParams(p=0.0, dim=30), 0.0, xs)
    assert flat.max() == 0.0 and xs[np.argmax(flat)] == 0.0


def test_effective_potential_matches_matrix_quadratic_form():
    pa = KpoParams(p=4.0, dim=45)
    h = build_hamiltonian(pa, omega=0.25)
    for ap in (-2.0, -0.5, 1.0, 2.2):
        want = effective_potential(pa, 0.25, np.array([ap]))[0]
        v = fs.coherent_state(ap, 45)
        assert np.vdot(v, h @ v).real == pytest.approx(want, abs=1e-8)


def test_eigenbasis_elements_diagonalizes_levels():
    pa = KpoParams(p=4.0)
    spec = top_spectrum(build_hamiltonian(pa, omega=0.2), 3, pa.alpha, labeled=False)
    rho = np.outer(spec.level(1), spec.level(1).conj())
    el = eigenbasis_elements(spec, rho)
    want = np.zeros((3, 3))
    want[1, 1] = 1.0
    assert np.max(np.abs(el - want)) < 1e-10
