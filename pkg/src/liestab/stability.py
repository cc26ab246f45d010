"""Stability certificates for word-series systems.

Nilpotent route: a spectral-radius threshold on the linear part yields a
semiglobal exponential envelope, built constructively from a ladder of
quotient-level rates and explicit forcing gains.  Solvable route: a Schur
linear part plus an ideal-convergent input yields a conditional
attractivity/GAS certificate backed by simulation.  Zero spectral radius
yields finite-time (deadbeat) convergence with an explicit horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .algebra import is_nilpotent, is_solvable
from .dynamics import ExoSignal, Trajectory, WordSeriesSystem
from .quotient import adapted_norm, bracket_word


class HypothesisError(ValueError):
    """A structural precondition of a certificate is not met."""


class CertificateRejected(Exception):
    """A quantitative certificate condition failed; carries the margin."""

    def __init__(self, reason: str, margin: float):
        super().__init__(f"{reason} (margin {margin:.6g})")
        self.reason = reason
        self.margin = margin


def spectral_radius(M: np.ndarray) -> float:
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def block_sum_norm(M: np.ndarray, block: int) -> float:
    """Upper bound on the operator norm for the sum-of-slot-Euclidean norm.

    For M partitioned into (block x block) tiles, the induced norm is at most
    max_j sum_i ||M_ij||_2 (unit vectors concentrated on one slot are the
    extreme points of the domain ball).  Exact when there is a single slot.
    """
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    nb = M.shape[0] // block
    worst = 0.0
    for j in range(nb):
        col = 0.0
        for i in range(nb):
            col += float(np.linalg.norm(M[i * block:(i + 1) * block, j * block:(j + 1) * block], 2))
        worst = max(worst, col)
    return worst


def power_envelope_constant(A: np.ndarray, rate: float, block: int,
                            k_cap: int = 500) -> float:
    """Smallest observed sigma with ||A^k|| <= sigma * rate^k, closed soundly.

    The max over k <= k_cap is combined with an adapted-norm tail bound: for
    k beyond the cap, ||A^k|| <= ||A^cap|| kappa sqrt(nb) (rho + eps')^{k-cap}
    with rho + eps' = rate, so the returned constant is valid for every k.
    """
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 1.0
    rho = spectral_radius(A)
    if rate <= rho:
        raise ValueError("rate must exceed the spectral radius")
    sigma = 1.0
    P = np.eye(A.shape[0])
    ratio_last = 1.0
    for k in range(1, k_cap + 1):
        P = P @ A
        ratio_last = block_sum_norm(P, block) / rate ** k
        sigma = max(sigma, ratio_last)
    nb = A.shape[0] // block
    kappa = adapted_norm(A, rate - rho).condition()
    return max(sigma, ratio_last * math.sqrt(nb) * kappa)


# -- nilpotent certificate ----------------------------------------------------


@dataclass
class NilpotentCertificate:
    nilindex: int
    beta: float
    s: float
    rho_A: float
    threshold: float
    epsilon: float
    Lambda: float
    Lambda_levels: list
    lambda_levels: list
    sigma_levels: list
    gamma_levels: list
    alpha_levels: list
    M: float
    alpha: float
    decay: float
    consistent: bool
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"kind": "nilpotent-semiglobal-exponential",
                "nilindex": self.nilindex, "beta": self.beta, "s": self.s,
                "rho_A": self.rho_A, "threshold": self.threshold,
                "epsilon": self.epsilon, "Lambda": self.Lambda,
                "Lambda_levels": self.Lambda_levels,
                "lambda_levels": self.lambda_levels,
                "sigma_levels": self.sigma_levels,
                "gamma_levels": self.gamma_levels,
                "alpha_levels": self.alpha_levels,
                "M": self.M, "alpha": self.alpha, "decay": self.decay,
                "consistent": self.consistent, "warnings": self.warnings}


def forcing_gain(sys: WordSeriesSystem, level: int, M: float, alpha_prev: float,
                 beta: float, s: float, lambda_prev: float,
                 iota_norm: float = 1.0, mu: Optional[float] = None) -> float:
    """Explicit gain gamma_i bounding the level-i forcing by gamma_i lambda_i^k ||Xbar_i[0]||.

    gamma_i sums, over word lengths l = 2..i, the largest coefficient norm at
    that length times mu^{l-1} ||iota||^l times the letter-count combinatorics
    sum_q C(l, q) n^q r^{l-q} alpha_{i-1}^q M^{q-1} beta^{l-q}.  Level 1 has
    no forcing.
    """
    if level < 2:
        return 0.0
    mu = sys.mu() if mu is None else mu
    terms = sys.all_terms()
    max_by_len = {}
    for t in terms:
        l = t.word.length
        max_by_len[l] = max(max_by_len.get(l, 0.0), float(np.linalg.norm(t.coeff)))
    # the rate maximization over (l, q) must be solved by l = level, q = 1
    best = 0.0
    for l in range(2, level + 1):
        for q in range(1, l + 1):
            best = max(best, lambda_prev ** q * s ** (l - q))
    if best > lambda_prev * s ** (level - 1) * (1 + 1e-12):
        raise RuntimeError("forcing-rate maximization not attained at (l, q) = (level, 1)")
    total = 0.0
    n, r = sys.n, sys.r
    for l in range(2, level + 1):
        cmax = max_by_len.get(l, 0.0)
        if cmax == 0.0:
            continue
        inner = 0.0
        for q in range(1, l + 1):
            inner += math.comb(l, q) * n ** q * r ** (l - q) * alpha_prev ** q \
                * M ** (q - 1) * beta ** (l - q)
        total += cmax * mu ** (l - 1) * iota_norm ** l * inner
    return total


def certify_nilpotent(sys: WordSeriesSystem, signal: ExoSignal, M: float,
                      epsilon: Optional[float] = None) -> NilpotentCertificate:
    """Semiglobal exponential stability certificate on a nilpotent algebra.

    Requires the invariance ideal to be the whole algebra and the signal to
    carry a certified geometric envelope (beta, s).  Checks the spectral
    threshold rho(A) < s^{p(1-p)/2}, then assembles the rate ladder, the
    power-envelope constants, and the forcing gains into the end-to-end
    envelope (alpha_p, lambda_p).
    """
    nil, p = is_nilpotent(sys.algebra)
    if not nil:
        raise HypothesisError("algebra is not nilpotent")
    if sys.ideal.dim != sys.algebra.dim:
        raise HypothesisError("nilpotent certificate requires the invariance ideal to be the whole algebra")
    beta, s = signal.envelope()
    s = max(s, 1.0)
    rho_A = spectral_radius(sys.A)
    threshold = s ** (p * (1 - p) / 2.0)
    if rho_A >= threshold:
        raise CertificateRejected(
            f"spectral radius {rho_A:.6g} is not below the threshold {threshold:.6g}",
            margin=rho_A - threshold)
    warnings_list = []
    if epsilon is None:
        epsilon = 0.5 * min(1.0 - rho_A, threshold - rho_A)
    if epsilon <= 0:
        raise HypothesisError("epsilon must be positive")
    Lambda = rho_A + epsilon
    # quotient levels: level i factors the (i+1)-th chain ideal
    Lambda_levels, lambda_levels, sigma_levels = [], [], []
    gamma_levels, alpha_levels = [], []
    rho_levels = []
    lam = Lambda
    for i in range(1, p + 1):
        qsys = sys.quotient_system(i)
        rho_i = spectral_radius(qsys.A)
        rho_levels.append(rho_i)
        Lam_i = rho_i + (i / (p + 1.0)) * epsilon
        Lambda_levels.append(Lam_i)
        lam = Lambda if i == 1 else lam * s ** (i - 1)
        closed = Lambda * s ** (i * (i - 1) / 2.0)
        if abs(lam - closed) > 1e-12 * max(1.0, closed):
            raise RuntimeError("rate ladder recursion disagrees with its closed form")
        lambda_levels.append(lam)
        sigma_i = power_envelope_constant(qsys.A, Lam_i, qsys.d)
        sigma_levels.append(sigma_i)
        if i == 1:
            gamma_levels.append(0.0)
            alpha_levels.append(sigma_i)
        else:
            gamma_i = forcing_gain(sys, i, M, alpha_levels[-1], beta, s,
                                   lambda_levels[i - 2])
            gamma_levels.append(gamma_i)
            if lam <= Lam_i:
                warnings_list.append(f"level {i}: lambda_i <= Lambda_i; envelope constant undefined")
                alpha_levels.append(math.inf)
            else:
                alpha_levels.append(sigma_i * (1.0 + gamma_i / (lam - Lam_i)))
    ladder_ok = all(Lambda_levels[i] < Lambda_levels[i + 1] for i in range(p - 1)) \
        and (not Lambda_levels or Lambda_levels[-1] < Lambda)
    if not ladder_ok:
        warnings_list.append("intermediate rates are not strictly increasing below Lambda")
    consistent = lambda_levels[-1] < 1.0 and Lambda < 1.0 and ladder_ok
    if lambda_levels[-1] >= 1.0:
        warnings_list.append(
            f"final rate lambda_p = {lambda_levels[-1]:.6g} >= 1 for epsilon = {epsilon:.6g}; "
            "shrink epsilon below the threshold margin")
    return NilpotentCertificate(
        nilindex=p, beta=beta, s=s, rho_A=rho_A, threshold=threshold,
        epsilon=float(epsilon), Lambda=Lambda, Lambda_levels=Lambda_levels,
        lambda_levels=lambda_levels, sigma_levels=sigma_levels,
        gamma_levels=gamma_levels, alpha_levels=alpha_levels, M=float(M),
        alpha=alpha_levels[-1], decay=lambda_levels[-1], consistent=consistent,
        warnings=warnings_list)


def forcing_norms(sys: WordSeriesSystem, states: np.ndarray, signal: ExoSignal,
                  level: int) -> np.ndarray:
    """Measured forcing norms ||u_level[k]|| along a simulated trajectory.

    u_level collects every word of length <= level, its letters filtered
    through iota_{level-1} P_{level-1}, projected by P_level, weighted by the
    word coefficients; the per-step norm is the sum of slot norms.
    """
    proj = sys.projections
    ctx = proj[level]
    filt = proj.embed_project(level - 1)
    terms = [t for t in sys.all_terms() if t.word.length <= level]
    out = np.zeros(states.shape[0])
    for k in range(states.shape[0]):
        Xs = states[k].reshape(sys.n, sys.d)
        Ws = signal.value(k).reshape(sys.r, sys.d)
        acc = np.zeros((sys.n, ctx.quotient_dim))
        for t in terms:
            vals = [filt @ sys._letter_value(l, Xs, Ws) for l in t.word.letters]
            acc += np.outer(t.coeff, ctx.project(bracket_word(sys.algebra, vals)))
        out[k] = float(np.linalg.norm(acc, axis=1).sum())
    return out


# -- solvable certificate ------------------------------------------------------


@dataclass
class SolvableReport:
    rho_A: float
    schur_margin: float
    ideal_residual_max: float
    ideal_residual_tail: float
    signal_bound: float
    verdict: str
    notes: list
    evidence: dict

    def to_dict(self) -> dict:
        return {"kind": "solvable-attractivity", "rho_A": self.rho_A,
                "schur_margin": self.schur_margin,
                "ideal_residual_max": self.ideal_residual_max,
                "ideal_residual_tail": self.ideal_residual_tail,
                "signal_bound": self.signal_bound, "verdict": self.verdict,
                "notes": self.notes, "evidence": self.evidence}


def certify_solvable(sys: WordSeriesSystem, signal: ExoSignal, horizon: int = 200,
                     x0: Optional[np.ndarray] = None) -> SolvableReport:
    """Conditional global attractivity / GAS certificate on a solvable algebra.

    Checks that the linear part is Schur and that the signal converges into
    the invariance ideal, then pairs the verdict with simulation evidence.
    The admissible input amplitude has no closed form; the certificate is
    explicitly conditional on the input being small enough, and the evidence
    section reports the observed decay.
    """
    solvable, _ = is_solvable(sys.algebra)
    if not solvable:
        raise HypothesisError("algebra is not solvable")
    rho_A = spectral_radius(sys.A)
    if rho_A >= 1.0:
        raise CertificateRejected(f"linear part is not Schur (rho = {rho_A:.6g})",
                                  margin=rho_A - 1.0)
    notes = ["input-amplitude smallness is assumed, not derived: no formula exists "
             "for the admissible bound; verdict is conditional on it"]
    ctx0 = sys.projections[0]
    resid = np.zeros(horizon + 1)
    for k in range(horizon + 1):
        Ws = signal.value(k).reshape(sys.r, sys.d)
        resid[k] = sum(ctx0.quotient_norm(w) for w in Ws)
    res_max = float(resid.max())
    tail = float(resid[int(0.75 * horizon):].max()) if horizon else res_max
    converging = tail <= max(1e-10, 1e-6 * max(res_max, 1.0))
    if not converging:
        notes.append(f"signal does not appear to converge into the ideal "
                     f"(tail residual {tail:.3e}); hypothesis warning")
    beta, _ = signal.envelope()
    evidence = {}
    if x0 is None:
        rng = np.random.default_rng(7)
        x0 = rng.standard_normal(sys.state_dim)
    traj = sys.simulate(x0, signal, horizon)
    evidence["initial_norm"] = float(traj.norms[0])
    evidence["final_norm"] = float(traj.norms[-1])
    evidence["diverged"] = traj.diverged
    decayed = (not traj.diverged) and traj.norms[-1] <= 1e-4 * max(1.0, traj.norms[0])
    verdict = "conditional-pass" if (converging and decayed) else \
              ("conditional-pass-no-evidence" if converging else "hypothesis-warning")
    return SolvableReport(rho_A=rho_A, schur_margin=1.0 - rho_A,
                          ideal_residual_max=res_max, ideal_residual_tail=tail,
                          signal_bound=beta, verdict=verdict, notes=notes,
                          evidence=evidence)


def probe_amplitude(sys: WordSeriesSystem, signal: ExoSignal, x0, horizon: int = 300,
                    c_max: float = 64.0, iters: int = 20) -> float:
    """Empirical bisection for the largest signal scaling that still converges.

    Purely experimental; reported alongside the conditional certificate to
    give the missing amplitude bound an observed order of magnitude.
    """
    def converges(c: float) -> bool:
        scaled = _scaled_signal(signal, c)
        traj = sys.simulate(x0, scaled, horizon)
        return (not traj.diverged) and traj.norms[-1] <= 1e-6 * max(1.0, traj.norms[0])

    lo, hi = 0.0, c_max
    if converges(hi):
        return hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if converges(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _scaled_signal(signal: ExoSignal, c: float) -> ExoSignal:
    if signal.kind == "zero":
        return signal
    if signal.kind == "samples":
        return ExoSignal("samples", signal.r, signal.d, samples=c * signal.samples,
                         ideal_flag=signal.ideal_flag)
    return ExoSignal("geometric", signal.r, signal.d, base=c * signal.base,
                     ratio=signal.ratio, ideal_flag=signal.ideal_flag)


# -- deadbeat -------------------------------------------------------------------


@dataclass
class DeadbeatCertificate:
    horizon: int
    per_level: list          # step after which quotient level i-1 is exactly zero
    chain_dims: list
    n: int
    algebra_dim: int

    def to_dict(self) -> dict:
        return {"kind": "deadbeat", "horizon": self.horizon,
                "per_level": self.per_level, "chain_dims": self.chain_dims,
                "n": self.n, "algebra_dim": self.algebra_dim}


def deadbeat_horizon(sys: WordSeriesSystem, tol: float = 1e-10) -> DeadbeatCertificate:
    """Finite-time convergence horizon for a nilpotent linear part.

    Requires rho(A) = 0 (to tolerance) and expects ideal-valued inputs.  The
    level-i horizon is n (i dim g - sum_{j<=i} dim h^(j)); with one state slot
    this is the plain dimension count i dim g - sum dim h^(j).
    """
    rho = spectral_radius(sys.A)
    if rho > tol:
        raise HypothesisError(f"deadbeat requires rho(A) = 0; got {rho:.3e}")
    d = sys.algebra.dim
    dims = sys.chain.dims
    p = len(dims) - 1  # chain = h^(1) .. h^(p+1) = 0
    per_level = []
    for i in range(1, p + 2):
        used = sum(dims[j] for j in range(min(i, len(dims))))
        per_level.append(sys.n * (i * d - used))
    if any(b < a for a, b in zip(per_level, per_level[1:])):
        raise RuntimeError("per-level horizons must be nondecreasing")
    return DeadbeatCertificate(horizon=per_level[-1], per_level=per_level,
                               chain_dims=dims, n=sys.n, algebra_dim=d)


def deadbeat_verified(sys: WordSeriesSystem, cert: DeadbeatCertificate,
                      signal_factory: Callable[[np.random.Generator], ExoSignal],
                      runs: int = 100, seed: int = 0, tol: float = 1e-9,
                      scale: float = 1.0) -> dict:
    """Simulation companion: final and per-level states vanish at their horizons."""
    rng = np.random.default_rng(seed)
    worst_final = 0.0
    worst_levels = [0.0] * len(cert.per_level)
    for _ in range(runs):
        x0 = rng.standard_normal(sys.state_dim) * scale
        sig = signal_factory(rng)
        traj = sys.simulate(x0, sig, cert.horizon + 2)
        worst_final = max(worst_final, float(traj.norms[cert.horizon:].max()))
        for i, ki in enumerate(cert.per_level):
            worst_levels[i] = max(worst_levels[i], float(traj.quotient_norms[ki:, i].max()))
    return {"ok": worst_final < tol and all(v < tol for v in worst_levels),
            "worst_final": worst_final, "worst_levels": worst_levels}


# -- exponential envelopes -------------------------------------------------------


@dataclass
class EnvelopeFit:
    alpha: float
    decay: float
    satisfied: bool  # decay < 1, i.e. the fit certifies exponential decay
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "decay": self.decay,
                "satisfied": self.satisfied, "details": self.details}


def fit_envelope(bundle: Sequence[Trajectory], bisect_iters: int = 100) -> EnvelopeFit:
    """Tightest exponential envelope ||X[k]|| <= alpha decay^k ||X[0]|| over a bundle.

    "Smallest rate admitting a finite constant" is operationalized on finite
    data as the smallest decay whose envelope-defining maximum of
    ratio / decay^k sits strictly before the final sample of every
    trajectory: pushing decay below that moves the active constraint to the
    window edge, i.e. the constant would grow without bound on a longer run.
    A pure geometric trajectory lambda^k X[0] reports exactly (1, lambda); a
    constant trajectory reports (1, 1) with the certificate flag off; early
    transients only enlarge alpha, not the rate.
    """
    ratios = []
    for traj in bundle:
        if traj.norms[0] <= 0:
            raise ValueError("every trajectory must start at a nonzero state")
        ratios.append(traj.norms / traj.norms[0])
    if not ratios:
        raise ValueError("empty trajectory bundle")
    overshoot = max(1.0, max(float(r.max()) for r in ratios))
    if all(float(r[1:].max(initial=0.0)) == 0.0 for r in ratios):
        return EnvelopeFit(alpha=1.0, decay=0.0, satisfied=True,
                           details={"overshoot": overshoot, "note": "zero past k = 0"})

    def alpha_of(lam: float) -> float:
        worst = 0.0
        for r in ratios:
            k = np.arange(r.shape[0], dtype=float)
            with np.errstate(divide="ignore", over="ignore"):
                worst = max(worst, float(np.nanmax(r / lam ** k)))
        return worst

    def interior(lam: float) -> bool:
        for r in ratios:
            last = int(np.max(np.flatnonzero(r > 0)))
            if last < 1:
                continue
            k = np.arange(last + 1, dtype=float)
            with np.errstate(divide="ignore", over="ignore"):
                vals = r[:last + 1] / lam ** k
            if int(np.argmax(vals)) == last:
                return False
        return True

    hi = 2.0
    while not interior(hi):
        hi *= 2.0
    lo = 0.0
    for _ in range(bisect_iters):
        mid = 0.5 * (lo + hi)
        if mid <= 0 or not interior(mid):
            lo = mid
        else:
            hi = mid
    decay = hi
    alpha = alpha_of(decay)
    # the bisection lands within float noise of the transition rate, so the
    # decay verdict carries a small guard band
    return EnvelopeFit(alpha=float(alpha), decay=float(decay),
                       satisfied=decay < 1.0 - 1e-9,
                       details={"overshoot": overshoot, "trajectories": len(ratios)})


def deadbeat_envelope(sys: WordSeriesSystem, cert: DeadbeatCertificate,
                      signal_factory: Callable[[np.random.Generator], ExoSignal],
                      M: float, decay: float, runs: int = 50, seed: int = 1,
                      fresh_runs: int = 100) -> EnvelopeFit:
    """Exponential envelope implied by deadbeat convergence on a compact set.

    alpha is the max of ||X[k]|| / (decay^k ||X[0]||) over sampled runs with
    ||X[0]|| <= M and k below the horizon, floored at 1, then re-verified on
    fresh samples (slack 1e-9).
    """
    if not (0.0 <= decay < 1.0):
        raise ValueError("decay must lie in [0, 1)")
    rng = np.random.default_rng(seed)

    def sample_alpha(count: int) -> float:
        worst = 0.0
        for _ in range(count):
            x0 = rng.standard_normal(sys.state_dim)
            nrm = sys.state_norm(x0)
            if nrm == 0:
                continue
            x0 *= rng.uniform(0.1, 1.0) * M / nrm
            traj = sys.simulate(x0, signal_factory(rng), cert.horizon)
            k = np.arange(traj.norms.shape[0], dtype=float)
            with np.errstate(divide="ignore"):
                worst = max(worst, float(np.max(traj.norms / (decay ** k * traj.norms[0]))))
        return worst

    alpha = max(1.0, sample_alpha(runs))
    fresh = sample_alpha(fresh_runs)
    ok = fresh <= alpha * (1 + 1e-9)
    if not ok:
        alpha = max(alpha, fresh)
    return EnvelopeFit(alpha=float(alpha), decay=float(decay), satisfied=True,
                       details={"verified_on_fresh_samples": bool(ok), "M": M})


# -- convergence radius from the root test ---------------------------------------


def roottest_radius(limsup_root: float, mu: float, iota0_norm: float = 1.0,
                    safety: float = 0.99) -> dict:
    """Radius chain from the root test on per-length coefficient masses.

    Given L = limsup_l (sum_{|w| = l} ||c_w||)^{1/l}, the first radius is
    rho1 = min(1, 1/(mu L)), the second rho2 = safety * rho1 / ||iota_0||,
    and the certified ball radius is rho2^2 (the square absorbs the
    exponent shift |w| - 1 -> |w| in the compared series).
    """
    if limsup_root < 0 or mu < 0:
        raise ValueError("limsup and mu must be nonnegative")
    rho1 = 1.0 if mu * limsup_root == 0 else min(1.0, 1.0 / (mu * limsup_root))
    rho2 = safety * rho1 / max(iota0_norm, 1e-300)
    return {"limsup_root": limsup_root, "rho1": rho1, "rho2": rho2,
            "radius": rho2 ** 2}


def limsup_root_of_masses(masses: Sequence[float], exact_tail: bool = True) -> dict:
    """limsup of (mass_l)^{1/l} from per-length masses starting at length 2.

    With ``exact_tail`` the sequence is known to be complete (a finite word
    series), so the limsup is 0.  Otherwise the tail is unknown; fewer than
    three populated lengths make the estimate a guess, flagged conservative,
    and the max of the observed roots is returned as an upper surrogate.
    """
    roots = [m ** (1.0 / (l + 2)) for l, m in enumerate(masses) if m > 0]
    if exact_tail:
        return {"limsup_root": 0.0, "conservative": False}
    if len(roots) < 3:
        return {"limsup_root": max(roots, default=0.0), "conservative": True}
    tail = roots[len(roots) // 2:]
    return {"limsup_root": max(tail), "conservative": False}


def convergence_radius(sys: WordSeriesSystem, mu: Optional[float] = None) -> dict:
    """Root-test convergence radius of the system's word series.

    Stored term lists are finite and family coefficient masses decay
    factorially, so the limsup contribution is exactly zero and the radius is
    limited only by the quadratic chain construction.
    """
    mu = sys.mu() if mu is None else mu
    out = roottest_radius(0.0, mu, iota0_norm=1.0)
    out["warning"] = None
    return out
