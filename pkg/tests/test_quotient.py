import numpy as np
import pytest

from liestab.algebra import (derived_algebra, heisenberg, lower_central_series,
                             upper_triangular6)
from liestab.quotient import (AdaptedNorm, ChainProjections, InvarianceViolation,
                              adapted_norm, bracket_word, central_word_residual,
                              collapse_identity_residual, induced_map, is_ideal,
                              layered_word_residual, make_quotient, quotient_algebra)
from liestab.sampling import TRACKING_A

HEIS = heisenberg()
UT = upper_triangular6()


def heis_ctx():
    return make_quotient(HEIS, HEIS.span_labels(["h3"]))


def test_projection_coordinates_and_kernel():
    ctx = heis_ctx()
    x = HEIS.element(h1=3, h2=2, h3=-1)
    np.testing.assert_allclose(ctx.project(x), [3.0, 2.0], atol=1e-14)
    np.testing.assert_allclose(ctx.project(HEIS.element(h3=7.5)), [0.0, 0.0], atol=1e-14)
    ut_ctx = make_quotient(UT, derived_algebra(UT))
    assert ut_ctx.quotient_dim == 3


def test_projection_right_inverse_and_kernel_image():
    rng = np.random.default_rng(0)
    for ctx in (heis_ctx(), make_quotient(UT, derived_algebra(UT)),
                make_quotient(UT, UT.span_labels(["t6"]))):
        q = ctx.quotient_dim
        np.testing.assert_allclose(ctx.P @ ctx.iota, np.eye(q), atol=1e-12)
        for _ in range(50):
            x = rng.standard_normal(ctx.algebra.dim)
            # what iota . P discards lands in the factored ideal
            leftover = x - ctx.embed(ctx.project(x))
            assert np.linalg.norm(ctx.P @ leftover) < 1e-12
            assert ctx.ideal.distance(leftover) < 1e-12


def test_quotient_norm_values_and_monotonicity():
    ctx = heis_ctx()
    x = HEIS.element(h1=3, h2=2, h3=-1)
    assert ctx.quotient_norm(x) == pytest.approx(np.sqrt(13), abs=1e-12)
    assert ctx.quotient_norm(HEIS.element(h3=4)) == 0.0
    trivial = make_quotient(HEIS, HEIS.span([]))
    assert trivial.quotient_norm(x) == pytest.approx(np.linalg.norm(x))
    # norms weakly decrease when the factored ideal grows
    chain = lower_central_series(UT, derived_algebra(UT))
    proj = ChainProjections(UT, chain)
    rng = np.random.default_rng(1)
    for _ in range(1000):
        x = rng.standard_normal(6)
        norms = [ctx_i.quotient_norm(x) for ctx_i in reversed(proj.contexts)]
        # reversed: growing ideal, so norms weakly decrease, ending <= ||x||
        assert all(a >= b - 1e-12 for a, b in zip(norms, norms[1:]))
        assert norms[0] <= np.linalg.norm(x) + 1e-12


def test_projection_has_unit_norm():
    rng = np.random.default_rng(2)
    for ctx in (heis_ctx(), make_quotient(UT, derived_algebra(UT))):
        samples = rng.standard_normal((500, ctx.algebra.dim))
        samples /= np.linalg.norm(samples, axis=1, keepdims=True)
        vals = [ctx.quotient_norm(s) for s in samples]
        assert max(vals) <= 1.0 + 1e-10
        witness = ctx.embed(np.eye(ctx.quotient_dim)[0])
        vals.append(ctx.quotient_norm(witness / np.linalg.norm(witness)))
        assert max(vals) == pytest.approx(1.0, abs=1e-6)


def test_induced_map_examples():
    ctx = heis_ctx()
    bar = induced_map(ctx, TRACKING_A)
    np.testing.assert_allclose(bar, [[0.25, 0.25], [-0.25, 0.25]], atol=1e-12)
    np.testing.assert_allclose(induced_map(ctx, np.eye(3)), np.eye(2), atol=1e-14)
    # commuting square and spectrum containment
    rng = np.random.default_rng(3)
    for _ in range(50):
        V = ctx.ideal
        pi = V.projector()
        co = np.eye(3) - pi
        A = pi @ rng.standard_normal((3, 3)) @ pi + co @ rng.standard_normal((3, 3)) @ co \
            + pi @ rng.standard_normal((3, 3)) @ co
        bar = induced_map(ctx, A)
        assert np.linalg.norm(bar @ ctx.P - ctx.P @ A) < 1e-10
        eig_bar = np.linalg.eigvals(bar)
        eig_A = np.linalg.eigvals(A)
        for lam in eig_bar:
            assert np.min(np.abs(eig_A - lam)) < 1e-8


def test_induced_map_rejects_non_invariant():
    ctx = heis_ctx()
    rot = np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]])  # mixes h3 into h1
    with pytest.raises(InvarianceViolation) as exc:
        induced_map(ctx, rot)
    assert exc.value.residual > 0.1


def test_solvable_pair_induced_block():
    # factoring the derived algebra out of the coupled-pair linear part
    M2 = np.array([[-0.5, 0.5], [0.5, 0.25]])
    A = np.kron(M2, np.eye(6))
    ctx = make_quotient(UT, derived_algebra(UT))
    lift_p = np.kron(np.eye(2), ctx.P)
    lift_i = np.kron(np.eye(2), ctx.iota)
    bar = lift_p @ A @ lift_i
    np.testing.assert_allclose(bar, np.kron(M2, np.eye(3)), atol=1e-12)
    eigs = np.sort(np.linalg.eigvals(bar).real)
    np.testing.assert_allclose(eigs, [-0.75] * 3 + [0.5] * 3, atol=1e-12)


def test_quotient_algebra_structure():
    ctx = make_quotient(UT, derived_algebra(UT))
    assert is_ideal(UT, ctx.ideal)
    qa = quotient_algebra(ctx)
    assert qa.dim == 3
    assert np.max(np.abs(qa.C)) < 1e-14  # the quotient by the derived algebra is abelian
    with pytest.raises(ValueError):
        quotient_algebra(make_quotient(UT, UT.span_labels(["t1"])))  # not an ideal


def test_adapted_norm_examples():
    an = adapted_norm(np.diag([0.5, 0.3]), 0.05)
    assert an.certified_norm < 0.5 + 0.05
    an = adapted_norm(np.array([[0.5, 100.0], [0.0, 0.5]]), 0.1)
    assert an.certified_norm < 0.6
    an = adapted_norm(np.array([[0.0, 1.0], [0.0, 0.0]]), 0.01)
    assert an.certified_norm < 0.01
    with pytest.raises(ValueError):
        adapted_norm(np.eye(2), 0.0)


def test_adapted_norm_random_matrices():
    rng = np.random.default_rng(4)
    for _ in range(20):
        n = rng.integers(2, 8)
        A = rng.standard_normal((n, n))
        an = adapted_norm(A, 0.01)
        assert an.operator_norm(A) < an.spectral_radius + 0.01
        # vector norm consistency: ||A x||_T <= ||A||_T ||x||_T
        for _ in range(20):
            x = rng.standard_normal(n)
            assert an.vector_norm(A @ x) <= an.certified_norm * an.vector_norm(x) * (1 + 1e-10)


def test_word_identity_nilpotent_chain():
    chain = lower_central_series(HEIS)
    proj = ChainProjections(HEIS, chain)
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(100):
        letters = [rng.standard_normal(3) for _ in range(rng.integers(2, 6))]
        worst = max(worst, central_word_residual(proj, letters))
    assert worst < 1e-10
    # letters already inside a chain ideal: both sides vanish at matching depth
    h3 = HEIS.basis_vector("h3")
    letters = [h3, rng.standard_normal(3)]
    lhs = proj[2].project(bracket_word(HEIS, letters))
    assert np.linalg.norm(lhs) < 1e-14
    assert central_word_residual(proj, letters, level=2) < 1e-14


def test_word_identity_solvable_chain():
    chain = lower_central_series(UT, derived_algebra(UT))
    proj = ChainProjections(UT, chain)
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(100):
        letters = [rng.standard_normal(6) for _ in range(rng.integers(2, 6))]
        worst = max(worst, layered_word_residual(proj, letters))
    assert worst < 1e-10
    # letters fixed by the level filter leave no correction terms
    for level in (1, 2):
        filt = proj.embed_project(level - 1)
        letters = [filt @ rng.standard_normal(6) for _ in range(3)]
        plain = proj[level].project(bracket_word(UT, [filt @ y for y in letters]))
        lhs = proj[level].project(bracket_word(UT, letters))
        assert np.linalg.norm(lhs - plain) < 1e-12


def test_collapse_identity():
    chain = lower_central_series(UT, derived_algebra(UT))
    proj = ChainProjections(UT, chain)
    assert collapse_identity_residual(proj) < 1e-12
    rng = np.random.default_rng(7)
    filt0 = proj.embed_project(0)
    for i in range(1, proj.depth + 1):
        filt = proj.embed_project(i - 1)
        for _ in range(100):
            x = rng.standard_normal(6)
            assert np.linalg.norm(filt0 @ (filt @ x) - filt0 @ x) < 1e-12


def test_context_serialization():
    ctx = heis_ctx()
    data = ctx.to_dict()
    assert data["quotient_dim"] == 2
    np.testing.assert_allclose(np.array(data["P"]), ctx.P)
    an = adapted_norm(np.diag([0.5, 0.3]), 0.05)
    dumped = an.to_dict()
    assert dumped["certified_norm"] == an.certified_norm
