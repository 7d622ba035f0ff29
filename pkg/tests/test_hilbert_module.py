"""
Tests for cspline hilbert_module.
"""

import numpy as np
import pytest
from hypothesis import given, settings

from cspline.algebra import AlgebraElement, AlgebraSpec, adjoint, elements_close, embed, is_positive, mul
from cspline.exceptions import ShapeError, ValidationError
from cspline.hilbert_module import (
    ModuleSpace,
    ModuleVector,
    Submodule,
    add,
    dual_functional,
    flatten,
    functional_representer,
    inner_product,
    module_norm,
    module_vectors_close,
    orthogonal_complement,
    project,
    projector_distance,
    right_action_matrix,
    right_multiply,
    scale,
    sub,
    submodule_from_generators,
    submodule_sum,
    unflatten,
)

from .conftest import random_submodule, seeds, small_specs


@pytest.fixture
def space(mixed_spec):
    return ModuleSpace(mixed_spec, 3)


@pytest.fixture
def c2(scalar_spec):
    return ModuleSpace(scalar_spec, 2)


def _scalars(space, *values):
    return ModuleVector(space, [space.spec.scalar(v) for v in values])


class TestInnerProduct:
    """Test cases for the A-valued inner product."""

    def test_orthogonal_basis(self, c2):
        assert elements_close(inner_product(c2.basis_vector(0), c2.basis_vector(1)), c2.spec.zero(), 0.0)

    def test_identity_has_unit_norm(self):
        space = ModuleSpace(AlgebraSpec((2,)), 1)
        x = space.basis_vector(0)
        assert elements_close(inner_product(x, x), space.spec.identity(), 0.0)
        assert module_norm(x) == pytest.approx(1.0)

    def test_matches_embedded_sum(self, space, rng):
        x, y = space.random_vector(rng), space.random_vector(rng)
        expected = sum(embed(a).conj().T @ embed(b) for a, b in zip(x.entries, y.entries))
        assert np.allclose(embed(inner_product(x, y)), expected)

    def test_module_mismatch(self, space, c2):
        with pytest.raises(ShapeError):
            inner_product(space.zero(), c2.zero())

    @settings(max_examples=50, deadline=None)
    @given(spec=small_specs, seed=seeds)
    def test_axioms(self, spec, seed):
        rng = np.random.default_rng(seed)
        space = ModuleSpace(spec, 2)
        x, y = space.random_vector(rng), space.random_vector(rng)
        a = spec.random_element(rng)
        assert elements_close(inner_product(x, right_multiply(y, a)), mul(inner_product(x, y), a), 1e-10)
        assert elements_close(adjoint(inner_product(x, y)), inner_product(y, x), 1e-10)
        assert is_positive(inner_product(x, x), tol=1e-10)

    def test_trace_pairing(self, space, rng):
        x, y = space.random_vector(rng), space.random_vector(rng)
        assert np.vdot(flatten(x), flatten(y)) == pytest.approx(np.trace(embed(inner_product(x, y))))


class TestVectorArithmetic:
    """Test cases for add, sub and scale on module vectors."""

    def test_match_flat_arithmetic(self, space, rng):
        x, y = space.random_vector(rng), space.random_vector(rng)
        assert np.allclose(flatten(add(x, y)), flatten(x) + flatten(y))
        assert np.allclose(flatten(sub(x, y)), flatten(x) - flatten(y))
        assert np.allclose(flatten(scale(x, 0.5j)), 0.5j * flatten(x))
        assert module_vectors_close(sub(x, x), space.zero(), 0.0)

    def test_inner_product_is_conjugate_linear_in_first_slot(self, space, rng):
        x, y = space.random_vector(rng), space.random_vector(rng)
        c = 1.5 - 2j
        lhs = inner_product(scale(x, c), y)
        assert elements_close(lhs, c.conjugate() * inner_product(x, y), 1e-10)
        assert elements_close(inner_product(add(x, y), y), inner_product(x, y) + inner_product(y, y), 1e-10)

    def test_module_mismatch(self, space, c2):
        with pytest.raises(ShapeError):
            add(space.zero(), c2.zero())
        with pytest.raises(ShapeError):
            sub(space.zero(), c2.zero())


class TestFlatten:
    """Test cases for the flattened coordinates."""

    def test_roundtrip(self, space, rng):
        for _ in range(100):
            x = space.random_vector(rng)
            assert module_vectors_close(unflatten(space, flatten(x)), x, 0.0)

    def test_zero(self, space):
        assert np.array_equal(flatten(space.zero()), np.zeros(space.flat_dim))

    def test_wrong_length(self, space):
        with pytest.raises(ShapeError):
            unflatten(space, np.zeros(space.flat_dim + 1))

    def test_right_action_matrix(self, space, rng):
        x, b = space.random_vector(rng), space.spec.random_element(rng)
        assert np.allclose(right_action_matrix(space, b) @ flatten(x), flatten(right_multiply(x, b)))


class TestSubmodule:
    """Test cases for submodule construction."""

    def test_empty_generators(self, space):
        Y = submodule_from_generators(space, [])
        assert Y.dim == 0
        assert np.array_equal(Y.projector, np.zeros((space.flat_dim, space.flat_dim)))

    def test_identity_generates_everything(self):
        space = ModuleSpace(AlgebraSpec((2,)), 1)
        Y = submodule_from_generators(space, [space.basis_vector(0)])
        assert np.allclose(Y.projector, np.eye(space.flat_dim))

    def test_abelian_corner(self, abelian_spec):
        space = ModuleSpace(abelian_spec, 1)
        corner = AlgebraElement(abelian_spec, [np.ones((1, 1)), np.zeros((1, 1))])
        Y = submodule_from_generators(space, [ModuleVector(space, [corner])])
        assert np.allclose(Y.projector, np.diag([1, 0]))

    def test_random_submodules_are_invariant(self, space, rng):
        for _ in range(20):
            Y = random_submodule(space, rng, count=2)
            assert Y.invariance_defect() <= 1e-10
            assert np.allclose(Y.projector @ Y.projector, Y.projector)
            for g in Y.generators:
                assert Y.contains(g, tol=1e-9)

    def test_non_invariant_basis_rejected(self):
        space = ModuleSpace(AlgebraSpec((2,)), 1)
        column = np.zeros(space.flat_dim)
        column[0] = 1.0
        with pytest.raises(ValidationError):
            Submodule.from_basis(space, column[:, None])

    def test_foreign_generator(self, space, c2):
        with pytest.raises(ShapeError):
            submodule_from_generators(space, [c2.zero()])

    def test_sum_of_orthogonal_pieces(self, space, rng):
        Y = random_submodule(space, rng)
        total = submodule_sum(Y, orthogonal_complement(Y))
        assert total.dim == space.flat_dim
        assert projector_distance(total, Submodule.full(space)) <= 1e-10


class TestProject:
    """Test cases for orthogonal projection."""

    def test_fixes_members(self, c2):
        Y = submodule_from_generators(c2, [c2.basis_vector(0)])
        x = _scalars(c2, 3, 0)
        assert module_vectors_close(project(Y, x), x, 1e-12)

    def test_drops_orthogonal_part(self, c2):
        Y = submodule_from_generators(c2, [c2.basis_vector(0)])
        assert module_vectors_close(project(Y, _scalars(c2, 3, 5)), _scalars(c2, 3, 0), 1e-12)

    def test_remainder_is_a_orthogonal(self, space, rng):
        Y = random_submodule(space, rng, count=2)
        for _ in range(20):
            x = space.random_vector(rng)
            remainder = x - project(Y, x)
            for g in Y.generators:
                assert elements_close(inner_product(remainder, g), space.spec.zero(), 1e-9)


class TestOrthogonalComplement:
    """Test cases for Y^perp."""

    def test_zero_gives_full(self, space):
        complement = orthogonal_complement(Submodule.zero(space))
        assert complement.dim == space.flat_dim

    def test_abelian_corner(self, abelian_spec):
        space = ModuleSpace(abelian_spec, 1)
        corner = AlgebraElement(abelian_spec, [np.ones((1, 1)), np.zeros((1, 1))])
        Y = submodule_from_generators(space, [ModuleVector(space, [corner])])
        assert np.allclose(orthogonal_complement(Y).projector, np.diag([0, 1]))

    def test_dimensions_add_up(self, space, rng):
        for count in (1, 2):
            Y = random_submodule(space, rng, count=count)
            complement = orthogonal_complement(Y)
            assert Y.dim + complement.dim == space.flat_dim
            assert np.allclose(complement.projector @ Y.projector, 0.0, atol=1e-10)


class TestFunctionalRepresenter:
    """Test cases for the Riesz representation of A-linear functionals."""

    def test_recovers_dual_functional(self, space, rng):
        for _ in range(100):
            y = space.random_vector(rng)
            assert module_vectors_close(functional_representer(space, dual_functional(y)), y, 1e-10)

    def test_zero_functional(self, space):
        tau = np.zeros((space.spec.dim, space.flat_dim))
        assert module_vectors_close(functional_representer(space, tau), space.zero(), 0.0)

    def test_dual_functional_evaluates_inner_product(self, space, rng):
        x, y = space.random_vector(rng), space.random_vector(rng)
        assert np.allclose(dual_functional(x) @ flatten(y), inner_product(x, y).flat)

    def test_not_a_linear(self, space, rng):
        tau = rng.standard_normal((space.spec.dim, space.flat_dim))
        with pytest.raises(ValidationError):
            functional_representer(space, tau)

    def test_wrong_shape(self, space):
        with pytest.raises(ShapeError):
            functional_representer(space, np.zeros((space.spec.dim, space.flat_dim - 1)))
