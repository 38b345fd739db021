"""Generate the full set of smoke datasets once per session via the kpo CLI
(the CSV files plus the command line are the only interface consumed)."""

import subprocess
import sys

import pytest

EXPERIMENTS = [
    "ramp_relaxation",
    "gamma_maps",
    "gamma_complex_plane",
    "sensitivity_vs_win",
    "sensitivity_vs_p",
    "sensitivity_vs_omega",
    "tomo_fidelity_vs_kex",
    "wigner_reconstruction",
    "dtheta_robustness",
    "offdiag_effect",
    "displaced_overlaps",
    "dephasing_populations",
    "gammabar_vs_rho00",
    "nominal_rates",
]


@pytest.fixture(scope="session")
def dataset_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("datasets")
    for name in EXPERIMENTS:
        proc = subprocess.run(
            [sys.executable, "-m", "kposim.cli", "run", "--experiment", name,
             "--smoke", "--out", str(out)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, f"{name} failed:\n{proc.stdout}\n{proc.stderr}"
    return out
