"""
Tests for cspline forms.
"""

import math

import numpy as np
import pytest

from cspline.algebra import AlgebraSpec, adjoint, elements_close, evaluate, mul, pure_state_grid
from cspline.exceptions import DomainError, ShapeError, ValidationError
from cspline.forms import (
    SesquilinearForm,
    adjoint_form,
    apply_form,
    compress,
    ellipticity_constant,
    form_from_operator_rows,
    form_norm,
    form_values,
    inner_product_form,
    is_normal_on,
    is_positive_on,
    left_radical,
    null_membership,
    radicals,
    riesz_from_values,
    right_radical,
)
from cspline.hilbert_module import (
    ModuleSpace,
    Submodule,
    flatten,
    inner_product,
    projector_distance,
    right_multiply,
    submodule_from_generators,
    unflatten,
)

from .conftest import degenerate_form, flat_form, positive_form, random_form, random_submodule


@pytest.fixture
def space(mixed_spec):
    return ModuleSpace(mixed_spec, 3)


@pytest.fixture
def c2(scalar_spec):
    return ModuleSpace(scalar_spec, 2)


def _forms_equal(first, second, tol=1e-10):
    return np.linalg.norm(first.flat_T - second.flat_T, 2) <= tol


class TestSesquilinearForm:
    """Test cases for construction and the flattened operator."""

    def test_wrong_shape(self, space):
        with pytest.raises(ShapeError):
            SesquilinearForm(space, [[space.spec.identity()]])

    def test_from_flat_recovers_operator(self, space, rng):
        B = random_form(space, rng)
        assert _forms_equal(SesquilinearForm.from_flat(space, B.flat_T), B, 0.0)

    def test_from_flat_rejects_non_a_linear(self, space, rng):
        D = space.flat_dim
        with pytest.raises(ValidationError):
            SesquilinearForm.from_flat(space, rng.standard_normal((D, D)))

    def test_form_norm(self, c2):
        B = form_from_operator_rows(c2, [[2, 0], [0, -3]])
        assert form_norm(B) == pytest.approx(3.0)


class TestApplyForm:
    """Test cases for evaluating B(x, y)."""

    def test_identity_operator_is_inner_product(self, space, rng):
        B = inner_product_form(space)
        x, y = space.random_vector(rng), space.random_vector(rng)
        assert elements_close(apply_form(B, x, y), inner_product(x, y), 1e-12)

    def test_zero_operator(self, space, rng):
        B = form_from_operator_rows(space, [[0] * 3] * 3)
        x, y = space.random_vector(rng), space.random_vector(rng)
        assert elements_close(apply_form(B, x, y), space.spec.zero(), 0.0)

    def test_sesquilinearity(self, space, rng):
        B = random_form(space, rng)
        for _ in range(20):
            x, y = space.random_vector(rng), space.random_vector(rng)
            a = space.spec.random_element(rng)
            assert elements_close(apply_form(B, x, right_multiply(y, a)), mul(apply_form(B, x, y), a), 1e-9)
            assert elements_close(
                apply_form(B, right_multiply(x, a), y), mul(adjoint(a), apply_form(B, x, y)), 1e-9
            )

    def test_trace_of_compression(self, space, rng):
        B = random_form(space, rng)
        Y = random_submodule(space, rng, count=2)
        S = compress(B, Y)
        c, d = rng.standard_normal((2, Y.dim)) + 1j * rng.standard_normal((2, Y.dim))
        y, w = unflatten(space, Y.basis @ c), unflatten(space, Y.basis @ d)
        # tr over M_2 + C reads flat slots 0, 3 and 4
        value = apply_form(B, y, w).flat[[0, 3, 4]].sum()
        assert value == pytest.approx(np.vdot(S @ c, d))


class TestRiesz:
    """Test cases for riesz_from_values and form_values."""

    def test_inner_product_values_give_identity(self, space):
        B = riesz_from_values(space, form_values(inner_product_form(space)))
        assert np.allclose(B.flat_T, np.eye(space.flat_dim))

    def test_projection_values_give_projection(self, c2):
        P = form_from_operator_rows(c2, [[1, 0], [0, 0]])
        assert _forms_equal(riesz_from_values(c2, form_values(P)), P)

    def test_roundtrip_on_random_forms(self, space, rng):
        for _ in range(100):
            B = random_form(space, rng)
            assert _forms_equal(riesz_from_values(space, form_values(B)), B)

    def test_missing_value(self, c2):
        values = form_values(inner_product_form(c2))
        del values[(1, 0)]
        with pytest.raises(ValidationError):
            riesz_from_values(c2, values)

    def test_non_finite_value(self, c2):
        values = form_values(inner_product_form(c2))
        values[(0, 1)] = c2.spec.scalar(math.nan)
        with pytest.raises(ValidationError):
            riesz_from_values(c2, values)


class TestRadicals:
    """Test cases for right and left radicals."""

    def test_inner_product_has_none(self, space, rng):
        Y = random_submodule(space, rng, count=2)
        assert radicals(inner_product_form(space), Y).dims == (0, 0)

    def test_projection_with_extra_piece(self, c2):
        P = form_from_operator_rows(c2, [[1, 0], [0, 0]])
        Y = Submodule.full(c2)
        Z = submodule_from_generators(c2, [c2.basis_vector(1)])
        assert projector_distance(right_radical(P, Y), Z) <= 1e-8
        assert projector_distance(left_radical(P, Y), Z) <= 1e-8

    def test_nilpotent_radicals_differ(self, c2):
        N = form_from_operator_rows(c2, [[0, 1], [0, 0]])
        Y = Submodule.full(c2)
        e1 = submodule_from_generators(c2, [c2.basis_vector(0)])
        e2 = submodule_from_generators(c2, [c2.basis_vector(1)])
        # T e1 = 0 and T* e2 = 0
        assert projector_distance(right_radical(N, Y), e1) <= 1e-8
        assert projector_distance(left_radical(N, Y), e2) <= 1e-8
        assert not is_normal_on(N, Y)

    def test_positive_forms_have_equal_radicals(self, space, rng):
        for _ in range(200):
            B = positive_form(space, rng, degenerate=True)
            Y = random_submodule(space, rng, count=2)
            report = radicals(B, Y)
            assert projector_distance(report.right_radical, report.left_radical) <= 1e-8

    def test_null_membership_matches_radical(self, space, rng):
        for trial in range(200):
            B = positive_form(space, rng, degenerate=True)
            Y = random_submodule(space, rng, count=2)
            radical = right_radical(B, Y)
            if trial % 2 and radical.dim:
                coords = rng.standard_normal(radical.dim) + 1j * rng.standard_normal(radical.dim)
                y = unflatten(space, radical.basis @ coords)
            else:
                coords = rng.standard_normal(Y.dim) + 1j * rng.standard_normal(Y.dim)
                y = unflatten(space, Y.basis @ coords)
            tol = 1e-9 * form_norm(B) * max(1.0, np.linalg.norm(flatten(y)) ** 2)
            assert null_membership(B, y, tol) == radical.contains(y, tol=1e-6)

    def test_left_radical_is_right_radical_of_adjoint(self, space, rng):
        full = Submodule.full(space)
        for _ in range(200):
            B = degenerate_form(space, rng)
            left = left_radical(B, full)
            assert left.dim > 0
            assert projector_distance(left, right_radical(adjoint_form(B), full)) <= 1e-8

    def test_radical_members_kill_the_form(self, space, rng):
        B = degenerate_form(space, rng)
        Y = Submodule.full(space)
        radical = right_radical(B, Y)
        y_r = unflatten(space, radical.basis[:, 0])
        for _ in range(10):
            y = space.random_vector(rng)
            assert elements_close(apply_form(B, y_r, y), space.spec.zero(), 1e-9)


class TestAdjointForm:
    """Test cases for the adjoint form."""

    def test_involution(self, space, rng):
        B = random_form(space, rng)
        assert _forms_equal(adjoint_form(adjoint_form(B)), B, 0.0)

    def test_flat_is_conjugate_transpose(self, space, rng):
        B = random_form(space, rng)
        assert np.allclose(adjoint_form(B).flat_T, B.flat_T.conj().T)

    def test_swaps_arguments(self, space, rng):
        B = random_form(space, rng)
        x, y = space.random_vector(rng), space.random_vector(rng)
        assert elements_close(apply_form(adjoint_form(B), x, y), adjoint(apply_form(B, y, x)), 1e-9)


class TestPositivity:
    """Test cases for positivity and ellipticity on a submodule."""

    def test_identity_is_positive(self, space, rng):
        assert is_positive_on(inner_product_form(space), random_submodule(space, rng))

    def test_indefinite(self, c2):
        assert not is_positive_on(form_from_operator_rows(c2, [[1, 0], [0, -1]]), Submodule.full(c2))

    def test_indefinite_form_can_be_positive_on_a_piece(self, c2):
        B = form_from_operator_rows(c2, [[1, 0], [0, -1]])
        assert is_positive_on(B, submodule_from_generators(c2, [c2.basis_vector(0)]))

    def test_star_products_are_positive(self, space, rng):
        for _ in range(20):
            B = positive_form(space, rng)
            Y = random_submodule(space, rng, count=2)
            assert is_positive_on(B, Y)
            for f in pure_state_grid(space.spec, 3, seed=1):
                y = unflatten(space, Y.basis @ rng.standard_normal(Y.dim))
                assert evaluate(f, apply_form(B, y, y)).real >= -1e-9

    def test_cauchy_schwarz_in_every_state(self, space, rng):
        B = positive_form(space, rng)
        for f in pure_state_grid(space.spec, 4, seed=2):
            for _ in range(10):
                x, y = space.random_vector(rng), space.random_vector(rng)
                lhs = abs(evaluate(f, apply_form(B, x, y))) ** 2
                rhs = evaluate(f, apply_form(B, x, x)).real * evaluate(f, apply_form(B, y, y)).real
                assert lhs <= rhs * (1 + 1e-9) + 1e-9

    def test_ellipticity_of_inner_product(self, space, rng):
        assert ellipticity_constant(inner_product_form(space), random_submodule(space, rng)) == pytest.approx(1.0)

    def test_ellipticity_of_diagonal(self, c2):
        B = form_from_operator_rows(c2, [[0.25, 0], [0, 1]])
        assert ellipticity_constant(B, Submodule.full(c2)) == pytest.approx(0.25)

    def test_ellipticity_is_sharp(self, space, rng):
        for _ in range(10):
            B = positive_form(space, rng)
            Y = random_submodule(space, rng, count=2)
            c = ellipticity_constant(B, Y)
            shifted = flat_form(space, B.flat_T - c * np.eye(space.flat_dim))
            too_far = flat_form(space, B.flat_T - (c + 1e-6) * np.eye(space.flat_dim))
            assert is_positive_on(shifted, Y)
            assert not is_positive_on(too_far, Y)

    def test_ellipticity_on_zero_submodule(self, space):
        assert ellipticity_constant(inner_product_form(space), Submodule.zero(space)) == math.inf

    def test_ellipticity_needs_positivity(self, c2):
        with pytest.raises(DomainError):
            ellipticity_constant(form_from_operator_rows(c2, [[1, 0], [0, -1]]), Submodule.full(c2))


class TestNormality:
    """Test cases for is_normal_on."""

    def test_hermitian_forms_are_normal(self, space, rng):
        B = positive_form(space, rng, degenerate=True)
        assert is_normal_on(B, Submodule.full(space))

    def test_normal_with_kernel(self, rng):
        space = ModuleSpace(AlgebraSpec((1,)), 4)
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
        M = q @ np.diag([2j, -1, 0, 0]) @ q.conj().T
        B = flat_form(space, M)
        assert is_normal_on(B, Submodule.full(space))
        assert right_radical(B, Submodule.full(space)).dim == 2

    def test_normal_forms_have_equal_radicals(self, mixed_spec, rng):
        space = ModuleSpace(mixed_spec, 2)
        full = Submodule.full(space)
        for _ in range(50):
            M = positive_form(space, rng, degenerate=True, normalize=True).flat_T
            # a polynomial in a Hermitian operator is normal but not Hermitian
            B = flat_form(space, M + 1j * (M @ M))
            assert is_normal_on(B, full)
            right, left = right_radical(B, full), left_radical(B, full)
            assert right.dim == left.dim > 0
            assert projector_distance(right, left) <= 1e-8
