"""
Shared fixtures and instance builders for cspline tests.
"""

from pathlib import Path
from typing import Optional

import numpy as np
import pytest
from hypothesis import strategies as st

from cspline.algebra import AlgebraSpec
from cspline.forms import SesquilinearForm
from cspline.hilbert_module import ModuleSpace, Submodule, submodule_from_generators

PROBLEMS_DIR = Path(__file__).parent.parent / "problems"

seeds = st.integers(min_value=0, max_value=2**32 - 1)
small_specs = st.lists(st.integers(min_value=1, max_value=3), min_size=1, max_size=2).map(
    lambda sizes: AlgebraSpec(tuple(sizes))
)


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    """Keep tests away from the real ~/.config and CSPLINE_* variables."""
    home = tmp_path / "home"
    home.mkdir()
    monkeypatch.setenv("HOME", str(home))
    for key in ("TOL", "SEED", "STATES", "TARGETS", "CANDIDATES", "K_GRID", "RCOND", "VERBOSE"):
        monkeypatch.delenv(f"CSPLINE_{key}", raising=False)
    return home


@pytest.fixture
def rng():
    """Seeded generator for numeric payloads."""
    return np.random.default_rng(20240601)


@pytest.fixture
def problems_dir():
    return PROBLEMS_DIR


@pytest.fixture
def mixed_spec():
    """A = M_2 + C."""
    return AlgebraSpec((2, 1))


@pytest.fixture
def scalar_spec():
    return AlgebraSpec((1,))


@pytest.fixture
def abelian_spec():
    return AlgebraSpec((1, 1))


def random_form(space: ModuleSpace, rng: np.random.Generator) -> SesquilinearForm:
    spec = space.spec
    return SesquilinearForm(space, [
        [spec.random_element(rng) for _ in range(space.rank)] for _ in range(space.rank)
    ])


def random_submodule(space: ModuleSpace, rng: np.random.Generator, count: int = 1) -> Submodule:
    return submodule_from_generators(space, [space.random_vector(rng) for _ in range(count)])


def degenerate_form(space: ModuleSpace, rng: np.random.Generator) -> SesquilinearForm:
    """T = R P_U for a random submodule U; kernel contains U^perp."""
    R = random_form(space, rng).flat_T
    U = random_submodule(space, rng)
    return SesquilinearForm.from_flat(space, R @ U.projector)


def positive_form(
    space: ModuleSpace,
    rng: np.random.Generator,
    degenerate: bool = False,
    normalize: bool = False
) -> SesquilinearForm:
    """T = R* R, optionally cut down to P_U R* R P_U or scaled to norm 1."""
    R = random_form(space, rng).flat_T
    M = R.conj().T @ R
    if degenerate:
        U = random_submodule(space, rng)
        M = U.projector @ M @ U.projector
    if normalize:
        M = M / np.linalg.norm(M, 2)
    return SesquilinearForm.from_flat(space, (M + M.conj().T) / 2)


def flat_form(space: ModuleSpace, matrix, tol: Optional[float] = None) -> SesquilinearForm:
    if tol is None:
        return SesquilinearForm.from_flat(space, np.asarray(matrix, dtype=complex))
    return SesquilinearForm.from_flat(space, np.asarray(matrix, dtype=complex), tol)
