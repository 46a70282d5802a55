import sys
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO_ROOT / "scripts"))

WATER_FIXTURE = Path(__file__).parent / "fixtures" / "h2o_sto3g.ints"


@pytest.fixture(scope="session")
def water_hamiltonian():
    from trotterbench.hamiltonian import load_integrals

    return load_integrals(WATER_FIXTURE)


@pytest.fixture(scope="session")
def small_synthetic():
    """One deterministic 8-orbital molecule shared across tests."""
    from trotterbench.synth import SynthConfig, generate_molecule

    return generate_molecule(SynthConfig(8, 2.0, 0.25, 42))
