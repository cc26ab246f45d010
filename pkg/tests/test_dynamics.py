import numpy as np
import pytest

from liestab.algebra import abelian, derived_algebra, heisenberg, upper_triangular6
from liestab.dynamics import (AdjointFamily, CutoffTooSmall, ExoSignal,
                              SystemSpecError, Term, Word, WordSeriesSystem,
                              parse_letter)
from liestab.quotient import InvarianceViolation
from liestab.sampling import (expm, heisenberg_tracking_system, tracking_signal,
                              tracking_state)
from liestab.scenarios import (EX61_X0, ex61_signal, ex61_system,
                               heisenberg_deadbeat_system, uptri_deadbeat_system)


def tracking_error_step(e, w):
    """Closed-loop error map obtained by composing the hold-interval
    exponentials and substituting u = K e - L w, on the h-basis."""
    e1, e2, e3 = e
    return np.array([
        0.25 * e1 + 0.25 * e2,
        -0.25 * e1 + 0.25 * e2,
        0.01 * e3 - 0.125 * (e1 ** 2 + e2 ** 2) + 1.875 * (e2 - e1) * w,
    ])


def test_letter_parsing():
    assert parse_letter("X1") == ("X", 1)
    assert parse_letter("W12") == ("W", 12)
    for bad in ("Y1", "X0", "X", "", "Xx"):
        with pytest.raises(SystemSpecError):
            parse_letter(bad)
    with pytest.raises(SystemSpecError):
        Word((("X", 1),))  # bracket words need two letters


def test_eval_matches_closed_form():
    sys41 = heisenberg_tracking_system()
    rng = np.random.default_rng(0)
    for _ in range(100):
        e = rng.standard_normal(3) * 3
        w = rng.standard_normal()
        out = sys41.evaluate(tracking_state(e), w * np.array([1.0, 2.0, 3.0]))
        np.testing.assert_allclose(out[:3], tracking_error_step(e, w), atol=1e-12)
        # the image slot stays consistent: slot2 = F slot1 after every step
        np.testing.assert_allclose(out[3:], sys41.A[3:6, :3] @ e, atol=1e-12)


def test_eval_zero_state_and_linear():
    for sys_ in (heisenberg_tracking_system(), ex61_system(),
                 heisenberg_deadbeat_system(), uptri_deadbeat_system()):
        rng = np.random.default_rng(1)
        for _ in range(20):
            w = rng.standard_normal(sys_.r * sys_.d)
            assert np.linalg.norm(sys_.evaluate(np.zeros(sys_.state_dim), w)) == 0.0
    alg = abelian(3)
    lin = WordSeriesSystem(alg, 1, 1, np.diag([0.5, 0.2, 0.1]))
    x = np.array([1.0, 2.0, 3.0])
    np.testing.assert_allclose(lin.evaluate(x, np.zeros(3)), lin.A @ x)


def test_eval_batch_matches_serial():
    rng = np.random.default_rng(2)
    for sys_ in (heisenberg_tracking_system(), ex61_system()):
        X = rng.standard_normal((9, sys_.state_dim))
        W = rng.standard_normal((9, sys_.r * sys_.d))
        batch = sys_.evaluate_batch(X, W)
        for i in range(9):
            np.testing.assert_allclose(batch[i], sys_.evaluate(X[i], W[i]), atol=1e-12)


def test_eval_multilinearity():
    # the linear part scales linearly, each word by the product of its letters
    alg = heisenberg()
    sys_ = WordSeriesSystem(alg, 1, 1, 0.5 * np.eye(3),
                            terms=[Term(Word((("X", 1), ("W", 1))), np.array([2.0]))])
    rng = np.random.default_rng(3)
    x = rng.standard_normal(3)
    w = rng.standard_normal(3)
    base_word = sys_.evaluate(x, w) - sys_.A @ x
    for c in (0.5, 2.0, -3.0):
        np.testing.assert_allclose(sys_.evaluate(c * x, w) - sys_.A @ (c * x),
                                   c * base_word, atol=1e-12)
        np.testing.assert_allclose(sys_.evaluate(x, c * w) - sys_.A @ x,
                                   c * base_word, atol=1e-12)


def test_expand_family_basic():
    sys61 = ex61_system()
    fam = AdjointFamily(1, 0.5, {"W1": 1.0}, "X1")
    terms = sys61.expand_family(fam, cutoff=1)
    assert len(terms) == 1
    assert terms[0].word.letters == (("W", 1), ("X", 1))
    np.testing.assert_allclose(terms[0].coeff, [0.5, 0.0])

    flat = WordSeriesSystem(abelian(3), 1, 1, np.zeros((3, 3)),
                            families=[AdjointFamily(1, 1.0, {"W1": 1.0}, "X1")])
    assert flat.expand_family(flat.families[0]) == []


def test_expand_family_exact_on_nilpotent():
    # expansion at the nilindex agrees with conjugation in the matrix picture
    alg = heisenberg()
    sys_ = WordSeriesSystem(alg, 1, 1, np.zeros((3, 3)),
                            families=[AdjointFamily(1, 1.0, {"W1": 1.0}, "X1")])
    terms = sys_.expand_family(sys_.families[0])
    assert max(t.word.length for t in terms) <= 2  # nilindex 2: length > 2 vanishes
    rng = np.random.default_rng(4)
    for _ in range(50):
        x = rng.standard_normal(3)
        w = rng.standard_normal(3)
        direct = sys_.evaluate(x, w)
        by_terms = sum(t.coeff[0] * _word_value(sys_, t, x, w) for t in terms)
        np.testing.assert_allclose(direct, by_terms, atol=1e-12)
        B = alg.to_matrix(w)
        conj = expm(B) @ alg.to_matrix(x) @ expm(-B)
        flowed = direct + x  # add back the identity part for the comparison
        np.testing.assert_allclose(alg.to_matrix(flowed), conj, atol=1e-10)


def _word_value(sys_, term, x, w):
    from liestab.quotient import bracket_word
    Xs = x.reshape(sys_.n, sys_.d)
    Ws = w.reshape(sys_.r, sys_.d)
    vals = [Xs[j - 1] if kind == "X" else Ws[j - 1] for kind, j in term.word.letters]
    return bracket_word(sys_.algebra, vals)


def test_expand_family_matches_flow_on_solvable():
    sys61 = ex61_system()
    fam = AdjointFamily(2, 0.25, {"X1": 1.0, "W1": 1.0}, "X2", tol=1e-6)
    radius = 0.4
    terms = sys61.expand_family(fam, radius=radius)
    rng = np.random.default_rng(5)
    for _ in range(5):
        x = rng.standard_normal(12)
        x *= radius / max(np.linalg.norm(x.reshape(2, 6), axis=1))
        w = rng.standard_normal(12)
        w *= radius / max(np.linalg.norm(w.reshape(2, 6), axis=1))
        only_fam = WordSeriesSystem(sys61.algebra, 2, 2, np.zeros((12, 12)),
                                    families=[fam], invariance_ideal=sys61.ideal)
        direct = only_fam.evaluate(x, w)
        acc = np.zeros((2, 6))
        for t in terms:
            acc += np.outer(t.coeff, _word_value(sys61, t, x, w))
        assert np.linalg.norm(direct - acc.reshape(-1)) < 1e-6


def test_expand_family_refuses_small_cutoff():
    sys61 = ex61_system()
    fam = AdjointFamily(1, 1.0, {"X1": 1.0}, "X2")
    with pytest.raises(CutoffTooSmall) as exc:
        sys61.expand_family(fam, radius=1.0, cutoff=2, tol=1e-12)
    assert exc.value.required > 2
    # an unreachable tolerance is refused at the hard cap as well
    with pytest.raises(CutoffTooSmall):
        sys61.expand_family(AdjointFamily(1, 1.0, {"X1": 1.0}, "X2", tol=1e-12),
                            radius=8.0)


def test_series_majorant():
    sys41 = heisenberg_tracking_system()
    assert sys41.series_majorant(0.0) == 0.0
    assert np.isfinite(sys41.series_majorant(10.0))
    sys61 = ex61_system()
    mu = sys61.mu()
    r = 2.0
    expected_family = sum(abs(f.scale) * r * np.expm1(mu * f.base_weight_l1() * r)
                          for f in sys61.families)
    assert sys61.series_majorant(r) == pytest.approx(expected_family)
    with pytest.raises(ValueError):
        sys61.series_majorant(-1.0)


def test_simulate_decay_and_zero():
    sc = heisenberg_tracking_system()
    traj = sc.simulate(tracking_state([3.0, 2.0, -1.0]), tracking_signal(1.0), 50)
    e_norm = np.linalg.norm(traj.states[:, :3], axis=1)
    assert e_norm[50] < 1e-6
    zero = sc.simulate(np.zeros(6), tracking_signal(1.0), 20)
    assert np.max(zero.norms) == 0.0


def test_simulate_divergence_flag():
    alg = abelian(2)
    boom = WordSeriesSystem(alg, 1, 1, 2.0 * np.eye(2))
    traj = boom.simulate(np.array([1.0, 0.0]), ExoSignal.zero(1, 2), 500)
    assert traj.diverged
    assert traj.first_bad_index is not None
    assert traj.states.shape[0] == traj.first_bad_index


def test_exo_signal_kinds():
    sig = ExoSignal("samples", 1, 2, samples=np.array([[1.0, 0.0], [0.0, 2.0]]))
    np.testing.assert_allclose(sig.value(0), [1.0, 0.0])
    np.testing.assert_allclose(sig.value(5), [0.0, 2.0])  # wraps around
    beta, s = sig.envelope()
    assert (beta, s) == (2.0, 1.0)
    geo = ExoSignal("geometric", 1, 2, base=[3.0, 4.0], ratio=2.0)
    np.testing.assert_allclose(geo.value(3), [24.0, 32.0])
    assert geo.envelope() == (5.0, 2.0)
    assert ExoSignal.zero(2, 3).envelope() == (0.0, 1.0)
    ut = upper_triangular6()
    h = derived_algebra(ut)
    sig61 = ex61_signal(60)
    assert sig61.max_ideal_residual(h) < 1e-12
    assert sig61.max_ideal_residual(ut.span_labels(["t1"])) > 1.0


def test_invariance_report():
    for sys_ in (heisenberg_tracking_system(), ex61_system()):
        rep = sys_.invariance_report()
        assert rep["ok"], rep
    alg = heisenberg()
    rot = np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]])
    bad = WordSeriesSystem(alg, 1, 1, rot)
    rep = bad.invariance_report()
    assert not rep["ok"]
    assert rep["levels"][1]["linear_residual"] > 0.1


def test_dynamic_invariance_along_chain():
    # states launched inside a chain ideal stay there for 50 steps
    sys_ = ex61_system()
    rng = np.random.default_rng(6)
    for idx, sub in enumerate(sys_.chain.ideals):
        if sub.dim == 0:
            continue
        B = np.kron(np.eye(sys_.n), sub.onb)
        x0 = B @ rng.standard_normal(B.shape[1])
        traj = sys_.simulate(x0, ex61_signal(50), 50)
        for state in traj.states:
            off = state - B @ (B.T @ state)
            assert np.linalg.norm(off) < 1e-8


def test_equilibrium_report():
    rep = heisenberg_tracking_system().equilibrium_report(starts=40, iters=150)
    assert rep["ok"]
    assert rep["structural_ok"]
    assert rep["linear_margin"] > 0.4
    # a term with no state letters is rejected structurally
    alg = heisenberg()
    bad = WordSeriesSystem(alg, 1, 2, 0.5 * np.eye(3),
                           terms=[Term(Word((("W", 1), ("W", 2))), np.array([1.0]))])
    assert not bad.structural_state_letter_ok()
    assert not bad.equilibrium_report(starts=5, iters=10)["ok"]
    # input-targeted family with input letters in the base is rejected too
    fam_bad = WordSeriesSystem(alg, 1, 2, 0.5 * np.eye(3),
                               families=[AdjointFamily(1, 1.0, {"W1": 1.0}, "W2")])
    assert not fam_bad.structural_state_letter_ok()
    # linear map with a fixed-point subspace is caught by the search
    loop = WordSeriesSystem(abelian(2), 1, 1, np.diag([1.0, 0.4]))
    rep = loop.equilibrium_report(starts=30, iters=200)
    assert rep["violations"]
    assert not rep["ok"]


def test_jacobian_report():
    rep = heisenberg_tracking_system().jacobian_report()
    assert rep["ok"] and rep["exact"]
    rep = ex61_system().jacobian_report()
    assert rep["ok"] and rep["observed_order"] >= 1.9
    assert max(rep["input_errors"]) < 1e-12
    lin = WordSeriesSystem(abelian(3), 1, 1, np.diag([0.5, 0.2, 0.1]))
    rep = lin.jacobian_report(h_steps=(1.0, 1e-3))
    assert rep["exact"]


def test_quotient_system_levels():
    sys61 = ex61_system()
    q0 = sys61.quotient_system(0)
    rng = np.random.default_rng(7)
    for _ in range(30):
        x = rng.standard_normal(q0.state_dim)
        w = rng.standard_normal(q0.r * q0.d)
        np.testing.assert_allclose(q0.evaluate(x, w), q0.A @ x, atol=1e-12)
    np.testing.assert_allclose(np.sort(np.linalg.eigvals(q0.A).real),
                               [-0.75] * 3 + [0.5] * 3, atol=1e-12)
    # factoring out the zero ideal reproduces the system exactly
    sys41 = heisenberg_tracking_system()
    top = sys41.quotient_system(len(sys41.chain.ideals) - 1)
    np.testing.assert_allclose(top.A, sys41.A, atol=1e-14)
    x = rng.standard_normal(6)
    w = rng.standard_normal(3)
    np.testing.assert_allclose(top.evaluate(x, w), sys41.evaluate(x, w), atol=1e-12)
    # mid level of the tracking system: brackets vanish, rotation-scaling block
    q1 = sys41.quotient_system(1)
    for _ in range(20):
        x = rng.standard_normal(q1.state_dim)
        w = rng.standard_normal(q1.r * q1.d)
        np.testing.assert_allclose(q1.evaluate(x, w), q1.A @ x, atol=1e-13)
    np.testing.assert_allclose(q1.A[:2, :2], [[0.25, 0.25], [-0.25, 0.25]], atol=1e-12)


def test_commuting_squares_all_levels():
    for sys_ in (heisenberg_tracking_system(), ex61_system()):
        for level in range(len(sys_.projections)):
            assert sys_.commuting_square_residual(level, samples=100, seed=11) < 1e-9


def test_quotient_simulation_matches_projection():
    sys61 = ex61_system()
    sig = ex61_signal(40)
    traj = sys61.simulate(EX61_X0, sig, 40)
    for level in (0, 1, 2):
        ctx = sys61.projections[level]
        qsys = sys61.quotient_system(level)
        qsig = sig.projected(ctx.P)
        lift = np.kron(np.eye(sys61.n), ctx.P)
        qtraj = qsys.simulate(lift @ EX61_X0, qsig, 40)
        np.testing.assert_allclose(qtraj.states, traj.states @ lift.T, atol=1e-8)


def test_invariance_violation_blocks_quotient():
    alg = heisenberg()
    rot = np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]])
    bad = WordSeriesSystem(alg, 1, 1, rot)
    with pytest.raises(InvarianceViolation):
        bad.quotient_system(1)


def test_system_spec_validation():
    alg = heisenberg()
    with pytest.raises(SystemSpecError):
        WordSeriesSystem(alg, 1, 1, np.eye(4))  # wrong A size
    with pytest.raises(SystemSpecError):
        WordSeriesSystem(alg, 1, 1, np.eye(3),
                         terms=[Term(Word((("X", 2), ("W", 1))), np.array([1.0]))])
    with pytest.raises(SystemSpecError):
        WordSeriesSystem(alg, 1, 1, np.eye(3), invariance_ideal=alg.span_labels(["h1"]))
    ut = upper_triangular6()
    with pytest.raises(SystemSpecError):
        # ideal must contain the derived algebra
        WordSeriesSystem(ut, 1, 1, np.eye(6), invariance_ideal=ut.span_labels(["t6"]))
