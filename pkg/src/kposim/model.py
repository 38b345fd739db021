"""Driven Kerr parametric oscillator: Hamiltonians, spectra, reference states.

The rotating-frame Hamiltonian assembled here is

    H = delta a^dag a - (kerr/2) a^dag^2 a^2 + (p/2)(a^dag^2 + a^2)
        + omega (a^dag + a)

with all rates in units of the Kerr coefficient (kerr = 1 unless a test
switches the nonlinearity off). The two-photon pump creates an inverted
double well in phase space whose top eigenstates encode the qubit; the
highest levels are labelled by the well they live in through their overlap
with displaced Fock states D(+-alpha)|m>, alpha = sqrt(p/kerr).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from . import fockspace
from .errors import AmbiguousLabelError, DimensionMismatchError

__all__ = [
    "KpoParams",
    "Spectrum",
    "SpectrumLabel",
    "fock_dim_for",
    "build_hamiltonian",
    "hamiltonian_parts",
    "top_spectrum",
    "cat_states",
    "displaced_fock_overlap",
    "effective_potential",
    "eigenbasis_elements",
]


def fock_dim_for(p: float, kerr: float = 1.0) -> int:
    """Default truncation for pump amplitude p.

    alpha_max = sqrt(p/kerr) plus one quantum of drive-induced shift margin;
    dim = max(30, ceil(alpha_max^2 + 7 alpha_max + 10)) keeps the coherent
    state norm error below ~1e-10 at the largest pump studied.
    """
    alpha_max = (math.sqrt(p / kerr) if kerr > 0 else 0.0) + 1.0
    return max(30, math.ceil(alpha_max**2 + 7.0 * alpha_max + 10.0))


@dataclass(frozen=True)
class KpoParams:
    """Physical rates of the driven, lossy KPO, all in units of K.

    kerr is fixed at 1 for every study of the oscillator itself; setting it
    to 0 (with p = 0) degrades the model to a linear cavity, which is used
    only as an analytic cross-check of the dissipative integrator.
    """

    p: float
    omega0: float = 0.0
    delta0: float = 0.0
    kappa_ex: float = 0.0
    kappa_int: float = 0.0
    gamma: float = 0.0
    dim: int | None = None
    kerr: float = 1.0

    def __post_init__(self):
        for name in ("p", "kappa_ex", "kappa_int", "gamma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")
        if self.kerr < 0:
            raise ValueError(f"kerr must be non-negative, got {self.kerr}")
        if self.dim is None:
            object.__setattr__(self, "dim", fock_dim_for(self.p, self.kerr))
        elif self.dim < 2:
            raise ValueError(f"dim must be at least 2, got {self.dim}")

    @property
    def kappa_tot(self) -> float:
        return self.kappa_ex + self.kappa_int

    @property
    def alpha(self) -> float:
        """Well amplitude sqrt(p/kerr) of the undriven oscillator."""
        return math.sqrt(self.p / self.kerr) if self.kerr > 0 else 0.0

    def with_dim(self, dim: int) -> "KpoParams":
        return replace(self, dim=dim)


def hamiltonian_parts(params: KpoParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(H_static, H_drive, H_detune): H(t) = H_static + Omega(t) H_drive
    + Delta(t) H_detune. H_drive = a^dag + a, H_detune = a^dag a."""
    dim = params.dim
    a = fockspace.annihilation(dim)
    n = np.arange(dim, dtype=float)
    h_static = np.diag(-0.5 * params.kerr * n * (n - 1)).astype(complex)
    pump = 0.5 * params.p * (a @ a)
    h_static += pump + pump.conj().T
    h_drive = (a + a.conj().T).astype(complex)
    h_detune = np.diag(n).astype(complex)
    return h_static, h_drive, h_detune


def build_hamiltonian(params: KpoParams, omega: float = 0.0, delta: float = 0.0) -> np.ndarray:
    """Dense Hamiltonian at fixed drive omega and detuning delta (units of K)."""
    h_static, h_drive, h_detune = hamiltonian_parts(params)
    return h_static + omega * h_drive + delta * h_detune


class SpectrumLabel(NamedTuple):
    sign: int      # +1 / -1: which well D(sign*alpha)|m> the state lives in
    m: int         # local excitation number inside the well
    overlap: float # squared overlap with that displaced Fock state


@dataclass(frozen=True)
class Spectrum:
    """Top of the spectrum, eigenvalues sorted in descending order.

    states holds the eigenvectors as columns; the global phase of each is
    fixed by making its largest-magnitude amplitude real positive so that
    transition tables are reproducible run to run.
    """

    energies: np.ndarray
    states: np.ndarray
    alpha: float
    labels: tuple[SpectrumLabel, ...] | None = None

    @property
    def count(self) -> int:
        return len(self.energies)

    def level(self, i: int) -> np.ndarray:
        return self.states[:, i]

    def transition(self, n: int, m: int) -> float:
        """Energy difference omega_n - omega_m (antisymmetric by construction)."""
        return float(self.energies[n] - self.energies[m])


def _fix_phases(states: np.ndarray) -> np.ndarray:
    out = states.copy()
    for c in range(out.shape[1]):
        k = int(np.argmax(np.abs(out[:, c])))
        ph = out[k, c] / abs(out[k, c])
        out[:, c] = out[:, c] / ph
    return out


def _split_degenerate_by_parity(
    energies: np.ndarray, states: np.ndarray, dim: int, tol: float
) -> np.ndarray:
    """Rotate each numerically degenerate group into parity eigenstates.

    A parity-preserving Hamiltonian leaves exactly degenerate pairs (the
    high-pump cat doublets), for which the raw eigensolver returns an
    arbitrary mixture; re-diagonalizing the parity operator inside the group
    restores the even/odd states deterministically, even (+1) first.
    """
    pv = (-1.0) ** np.arange(dim)
    out = states.copy()
    scale = max(1.0, float(np.max(np.abs(energies))))
    i = 0
    count = len(energies)
    while i < count:
        j = i
        while j + 1 < count and abs(energies[j + 1] - energies[i]) < tol * scale:
            j += 1
        if j > i:
            blk = out[:, i : j + 1]
            pblk = blk.conj().T @ (pv[:, None] * blk)
            w, rot = np.linalg.eigh(pblk)
            order = np.argsort(w)[::-1]
            out[:, i : j + 1] = blk @ rot[:, order]
        i = j + 1
    return out


def top_spectrum(
    H: np.ndarray,
    count: int,
    alpha: float,
    labeled: bool = True,
    degeneracy_tol: float = 1e-10,
) -> Spectrum:
    """Highest `count` eigenpairs of H with well/excitation labels.

    Each level is labelled by the displaced Fock state D(sign*alpha)|m>,
    m < count, of maximum squared overlap. Ties between the two wells
    (exact cat doublets at zero drive) are broken toward the + well for the
    higher level of the pair. If two levels claim the same label, or the
    energy ordering no longer interleaves the wells canonically (strong
    drive reorders the levels), an AmbiguousLabelError is raised instead of
    silently relabelling.
    """
    dim = H.shape[0]
    if count > dim:
        raise DimensionMismatchError(f"count {count} exceeds dimension {dim}")
    w, v = np.linalg.eigh(H)
    order = np.argsort(w)[::-1][:count]
    energies = w[order].copy()
    states = v[:, order].copy()
    states = _split_degenerate_by_parity(energies, states, dim, degeneracy_tol)
    states = _fix_phases(states)

    labels: tuple[SpectrumLabel, ...] | None = None
    if labeled:
        n_m = count
        cands = []
        for m in range(n_m):
            fk = fockspace.fock_state(m, dim)
            for sign in (+1, -1):
                d = fockspace.displacement(sign * alpha, dim)
                cands.append((sign, m, d @ fk))
        ov = np.empty((count, len(cands)))
        for li in range(count):
            for ci, (_, _, cv) in enumerate(cands):
                ov[li, ci] = abs(np.vdot(states[:, li], cv)) ** 2

        assigned: dict[tuple[int, int], int] = {}
        out_labels: list[SpectrumLabel] = []
        tie_rel = 1e-6
        for li in range(count):
            ranked = list(np.argsort(ov[li])[::-1])
            best = ov[li, ranked[0]]
            # candidates indistinguishable from the best within the tie
            # window, ordered (+) well first then lower excitation
            tied = [ci for ci in ranked if best - ov[li, ci] <= tie_rel * max(best, 1e-12)]
            tied.sort(key=lambda ci: (-cands[ci][0], cands[ci][1]))
            chosen = next(
                (ci for ci in tied if (cands[ci][0], cands[ci][1]) not in assigned), None
            )
            if chosen is None:
                ci = ranked[0]
                key = (cands[ci][0], cands[ci][1])
                other = assigned[key]
                raise AmbiguousLabelError(
                    f"levels {other} and {li} both claim well label {key}",
                    overlaps=(ov[other, ci], ov[li, ci]),
                )
            key = (cands[chosen][0], cands[chosen][1])
            assigned[key] = li
            out_labels.append(SpectrumLabel(key[0], key[1], float(ov[li, chosen])))

        # canonical interleaving: (+,0), (-,0), (+,1), (-,1), ...
        for li, lab in enumerate(out_labels):
            want = (+1 if li % 2 == 0 else -1, li // 2)
            if (lab.sign, lab.m) != want:
                raise AmbiguousLabelError(
                    f"energy ordering departs from the well ladder at level {li}: "
                    f"got {(lab.sign, lab.m)}, expected {want}",
                    overlaps=tuple(out_labels),
                )
        labels = tuple(out_labels)

    return Spectrum(energies=energies, states=states, alpha=alpha, labels=labels)


def cat_states(params: KpoParams) -> tuple[np.ndarray, np.ndarray]:
    """Even/odd coherent superpositions N+-(|alpha> +- |-alpha>).

    These are the two highest eigenstates of the undriven oscillator; they
    reduce to the Fock states |0> and |1> as the pump goes to zero.
    """
    dim = params.dim
    ca = fockspace.coherent_state(params.alpha, dim)
    cma = fockspace.coherent_state(-params.alpha, dim)
    even = ca + cma
    odd = ca - cma
    return even / np.linalg.norm(even), odd / np.linalg.norm(odd)


def displaced_fock_overlap(
    spec: Spectrum, level_index: int, alpha: complex, m: int, sign: int
) -> float:
    """|<psi_level| D(sign*alpha) |m>|^2."""
    if level_index >= spec.count:
        raise DimensionMismatchError(f"level {level_index} outside spectrum of {spec.count}")
    dim = spec.states.shape[0]
    cand = fockspace.displacement(sign * alpha, dim) @ fockspace.fock_state(m, dim)
    return float(abs(np.vdot(spec.level(level_index), cand)) ** 2)


def effective_potential(params: KpoParams, omega: float, alpha_grid) -> np.ndarray:
    """Semiclassical energy <alpha'|H|alpha'> along the real axis:
    -(kerr/2) alpha'^4 + p alpha'^2 + 2 omega alpha' (units of K)."""
    x = np.asarray(alpha_grid, dtype=float)
    return -0.5 * params.kerr * x**4 + params.p * x**2 + 2.0 * omega * x


def eigenbasis_elements(spec: Spectrum, rho: np.ndarray) -> np.ndarray:
    """Project a Fock-space density matrix onto the spectrum's levels:
    out[i, j] = <psi_i| rho |psi_j>."""
    if rho.shape[0] != spec.states.shape[0]:
        raise DimensionMismatchError(
            f"density matrix dim {rho.shape[0]} != spectrum dim {spec.states.shape[0]}"
        )
    return spec.states.conj().T @ rho @ spec.states
