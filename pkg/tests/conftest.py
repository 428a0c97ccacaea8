import numpy as np
import pytest

from boskraus.channels import ChannelSpec
from boskraus.fock import DensityMatrix, TruncatedOperator, random_mixed_state
from boskraus.kraus import KrausFamily, build_continuous, build_discrete, suggest_ell_max


def family_for(spec: ChannelSpec, n_cut: int, tol: float = 1e-13, nodes: int | None = None) -> KrausFamily:
    """Family at a completeness level adequate for the whole cutoff space."""
    if spec.family in ("A2", "B1"):
        return build_continuous(spec, nodes or 2 * n_cut, n_cut)
    return build_discrete(spec, suggest_ell_max(spec, n_cut, tol), n_cut)


def padded_random_state(seed: int, block: int, n_cut: int, rank: int = 4) -> DensityMatrix:
    """Random mixed state supported on the lowest ``block`` levels."""
    mat = np.zeros((n_cut, n_cut), dtype=complex)
    mat[:block, :block] = random_mixed_state(seed, rank, block).mat
    return DensityMatrix(TruncatedOperator(mat), 0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
