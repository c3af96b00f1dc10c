import numpy as np
import pytest

from anosovlab.core_linalg import Mat
from anosovlab.errors import ConstructionError, DomainError, InputError
from anosovlab.groups import Word, evaluate
from anosovlab.representations import (
    Representation,
    coxeter_number_B,
    dual_rep,
    fg_flags,
    fg_rep,
    fuchsian_locus,
    in_positive_cone,
    j_block_of,
    punctured_torus_reference,
    rep_from_json,
    rep_to_json,
    sopq_E,
    sopq_ab,
    sopq_form,
    sopq_positive,
    sym_power,
)

RNG = np.random.default_rng(2718)


def random_sl2(rng=RNG, max_cond=10.0):
    # rejection keeps relative-error assertions meaningful downstream
    while True:
        a = rng.normal(size=(2, 2))
        if np.linalg.det(a) > 0.1 and np.linalg.cond(a) < max_cond:
            return a / np.linalg.det(a) ** 0.5


def cone_vector(data, rng=None, first=2.0, last_mag=0.5):
    """A vector in the positive cone of the J form of the model."""
    m = data.q - data.p + 2
    v = np.zeros(m)
    v[0] = first if rng is None else rng.uniform(0.5, 2.5)
    mag = last_mag if rng is None else rng.uniform(0.1, 0.6)
    v[-1] = (-1.0) ** (data.p - 1) * mag
    return v


class TestSymPower:
    def test_diagonal_weights(self):
        t = 1.7
        got = sym_power(np.diag([t, 1 / t]), 3)
        assert np.allclose(got.entries, np.diag([t ** 2, 1.0, t ** -2]))

    def test_unipotent_hand_oracle(self):
        # oracle: expand (x+y)^2, (x+y)y, y^2 in the monomial basis
        got = sym_power(np.array([[1.0, 1.0], [0.0, 1.0]]), 3)
        expected = np.array([[1.0, 2.0, 1.0], [0.0, 1.0, 1.0], [0.0, 0.0, 1.0]])
        assert np.allclose(got.entries, expected)

    def test_dimension_one(self):
        got = sym_power(random_sl2(), 1)
        assert np.allclose(got.entries, [[1.0]])

    def test_multiplicative(self):
        for d in (2, 3, 5):
            for _ in range(20):
                a, b = random_sl2(), random_sl2()
                lhs = sym_power(a @ b, d).entries
                rhs = sym_power(a, d).entries @ sym_power(b, d).entries
                assert np.linalg.norm(lhs - rhs, 2) <= 1e-9 * np.linalg.norm(lhs, 2)

    def test_unit_determinant(self):
        for d in (2, 3, 4, 6):
            for _ in range(10):
                got = sym_power(random_sl2(), d)
                assert np.linalg.det(got.entries) == pytest.approx(1.0, rel=1e-9)


class TestFuchsianLocus:
    def test_partition_2_is_reference(self):
        ref = punctured_torus_reference()
        rep = fuchsian_locus((2,), ref)
        for g, r in zip(rep.generator_images, ref.generator_images):
            assert np.allclose(g.entries, r.entries)

    def test_weights_3_1(self):
        ref = Representation(
            dim=2, generator_images=(Mat(np.diag([2.0, 0.5])),), label="diag")
        rep = fuchsian_locus((3, 1), ref)
        assert np.allclose(rep.generator_images[0].entries,
                           np.diag([4.0, 1.0, 0.25, 1.0]))

    def test_5_1_weight_exponents(self):
        # weight bookkeeping oracle: exponents (4,2,0,-2,-4) plus (0)
        t = 3.0
        ref = Representation(
            dim=2, generator_images=(Mat(np.diag([t, 1 / t])),), label="diag")
        rep = fuchsian_locus((5, 1), ref)
        s = np.linalg.svd(rep.generator_images[0].entries, compute_uv=False)
        expected = np.sort([t ** 4, t ** 2, 1.0, t ** -2, t ** -4, 1.0])[::-1]
        assert np.allclose(s, expected, rtol=1e-10)
        # no singular gap at k = 3 on the diagonal subgroup
        assert s[2] / s[3] == pytest.approx(1.0)

    def test_partition_must_be_sorted(self):
        with pytest.raises(InputError):
            fuchsian_locus((1, 5), punctured_torus_reference())

    def test_reference_attached(self):
        rep = fuchsian_locus((3,), punctured_torus_reference())
        assert rep.reference is not None and rep.reference.dim == 2


class TestFgRep:
    def test_matrix_at_x_equal_1(self):
        rep = fg_rep(1.0)
        assert np.allclose(rep.generator_images[0].entries,
                           [[4, 4, 1], [2, 3, 1], [1, 2, 1]])

    def test_unit_determinant_on_grid(self):
        for x in (0.1, 1.0, 7.0):
            rep = fg_rep(x)
            for g in rep.generator_images:
                assert np.linalg.det(g.entries) == pytest.approx(1.0, rel=1e-10)

    def test_characteristic_polynomial_coefficients(self):
        # trace and second elementary symmetric function of both generators
        for x in (0.3, 1.0, 4.2):
            rep = fg_rep(x)
            c2 = 4 * x ** (-1 / 3) + 4 * x ** (2 / 3)
            c1 = 4 * x ** (1 / 3) + 4 * x ** (-2 / 3)
            for g in rep.generator_images:
                a = g.entries
                tr = np.trace(a)
                e2 = (tr ** 2 - np.trace(a @ a)) / 2
                assert tr == pytest.approx(c2, rel=1e-12)
                assert e2 == pytest.approx(c1, rel=1e-12)

    def test_eigenvalues_at_one(self):
        rep = fg_rep(1.0)
        lam = np.sort(np.linalg.eigvals(rep.generator_images[0].entries).real)[::-1]
        l1 = (7 + 3 * np.sqrt(5)) / 2
        assert np.allclose(lam, [l1, 1.0, 1 / l1], rtol=1e-10)

    def test_generators_share_characteristic_polynomial(self):
        rep = fg_rep(0.37)
        a, b = (g.entries for g in rep.generator_images)
        assert np.trace(a) == pytest.approx(np.trace(b), rel=1e-12)
        assert np.trace(a @ a) == pytest.approx(np.trace(b @ b), rel=1e-12)

    def test_rejects_nonpositive(self):
        with pytest.raises(InputError):
            fg_rep(0.0)
        with pytest.raises(InputError):
            fg_rep(-2.0)

    def test_reference_commutator_trace(self):
        ref = punctured_torus_reference()
        comm = evaluate(ref, Word.from_letters([1, 2, -1, -2]))
        assert np.trace(comm.entries) == pytest.approx(-2.0, rel=1e-12)

    def test_flags_exist(self):
        flags = fg_flags(2.0)
        assert set(flags) == {"infinity", "zero", "t", "s"}


class TestDualRep:
    def test_orthogonal_rep_self_dual(self):
        theta = 0.4
        rot = np.array([[np.cos(theta), -np.sin(theta)],
                        [np.sin(theta), np.cos(theta)]])
        # loxodromic reference check does not apply: no reference attached
        rep = Representation(dim=2, generator_images=(Mat(rot),), label="rot")
        dd = dual_rep(rep)
        assert np.allclose(dd.generator_images[0].entries, rot)

    def test_involution(self):
        rep = fg_rep(1.5)
        back = dual_rep(dual_rep(rep))
        for g, h in zip(back.generator_images, rep.generator_images):
            assert np.allclose(g.entries, h.entries, atol=1e-10)

    def test_singular_values_reversed_reciprocals(self):
        rep = fg_rep(2.0)
        dd = dual_rep(rep)
        for g, gd in zip(rep.generator_images, dd.generator_images):
            s = np.linalg.svd(g.entries, compute_uv=False)
            sd = np.linalg.svd(gd.entries, compute_uv=False)
            assert np.allclose(sd, 1.0 / s[::-1], rtol=1e-10)


class TestSopq:
    def test_form_signature(self):
        for p, q in ((3, 3), (4, 5), (5, 6), (4, 9)):
            data = sopq_form(p, q)
            assert np.allclose(data.Q, data.Q.T)
            eig = np.linalg.eigvalsh(data.Q)
            assert int(np.sum(eig > 0)) == p
            assert int(np.sum(eig < 0)) == q

    def test_E_zero_is_identity_limit(self):
        data = sopq_form(4, 5)
        e = sopq_E(data, 1, 1e-12)
        assert np.allclose(e.entries, np.eye(9), atol=1e-10)

    def test_E1_positions_p4_q5(self):
        data = sopq_form(4, 5)
        v = 0.7
        e = sopq_E(data, 1, v).entries
        expected = np.eye(9)
        expected[0, 1] = v   # position (1,2)
        expected[7, 8] = v   # position (8,9)
        assert np.allclose(e, expected)

    def test_E_invariance_all_indices(self):
        for p, q in ((4, 5), (5, 6), (3, 7)):
            data = sopq_form(p, q)
            for k in range(1, p - 1):
                sopq_E(data, k, 1.3)  # certification inside
            v = cone_vector(data)
            assert in_positive_cone(data, v)
            sopq_E(data, p - 1, v)

    def test_E_last_rejects_cone_violation(self):
        data = sopq_form(4, 5)
        v = np.array([-1.0, 0.0, 0.5])
        with pytest.raises(DomainError):
            sopq_E(data, 4 - 1, v)

    def test_ab_superdiagonal_entries(self):
        # entries of each ab factor at (d-k-1, d-k) and (d-k, d-k+1)
        # equal the scalar parameters; with all scalars 1 both are 1
        for p, q in ((4, 5), (5, 6)):
            data = sopq_form(p, q)
            d = data.d
            vbar = [1.0] * (p - 2) + [cone_vector(data)]
            ab = sopq_ab(data, vbar).entries
            for k in range(1, p - 2):
                assert ab[d - k - 2, d - k - 1] == pytest.approx(1.0)
                assert ab[d - k - 1, d - k] == pytest.approx(1.0)

    def test_positive_element_certified(self):
        data = sopq_form(4, 5)
        rng = np.random.default_rng(5)
        for _ in range(5):
            vbars = []
            for _ in range(coxeter_number_B(data.p - 1) // 2):
                vbars.append([rng.uniform(0.1, 2.0)
                              for _ in range(data.p - 2)] + [cone_vector(data, rng)])
            p_el = sopq_positive(data, vbars)
            resid = np.linalg.norm(
                p_el.entries.T @ data.Q @ p_el.entries - data.Q, 2)
            assert resid <= 1e-10 * np.linalg.norm(data.Q, 2) * 10

    def test_positive_element_needs_half_coxeter_factors(self):
        data = sopq_form(4, 5)
        with pytest.raises(InputError):
            sopq_positive(data, [])

    def test_coxeter_number(self):
        assert coxeter_number_B(3) == 6
        assert coxeter_number_B(4) == 8


class TestSerialization:
    def test_round_trip_bit_stable(self):
        rep = fg_rep(0.7310585786300049)
        text = rep_to_json(rep)
        back = rep_from_json(text)
        assert back.dim == rep.dim
        assert back.label == rep.label
        for g, h in zip(back.generator_images, rep.generator_images):
            assert np.array_equal(g.entries, h.entries)
        assert back.reference is not None
        for g, h in zip(back.reference.generator_images,
                        rep.reference.generator_images):
            assert np.array_equal(g.entries, h.entries)

    def test_rejects_non_unimodular(self):
        doc = '{"dim": 2, "generators": [[[2.0, 0.0], [0.0, 2.0]]], "label": "bad"}'
        with pytest.raises(ConstructionError):
            rep_from_json(doc)
