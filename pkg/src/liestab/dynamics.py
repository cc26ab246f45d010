"""Discrete-time word-series systems on a Lie algebra.

State X stacks n algebra elements slot-major into R^{n d}; the update is

    X+ = A X + sum_w c_w (x) [Y_w1, [Y_w2, [... Y_w|w|] ...]]

where each word letter Y refers to a state slot X_j or an exogenous slot
W_j, plus optional adjoint-flow families contributing the bracket part of
scale * e^{ad_base}(target).  The linear part of a family (its l = 0 term)
belongs in A, not in the family.

The default norm on stacked states is the sum of per-slot Euclidean norms;
``norm_mode="flat"`` switches to the Euclidean norm of the full stack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from .algebra import (LieAlgebra, Subspace, IdealChain, derived_algebra,
                      is_nilpotent, lower_central_series, bracket_constant)
from .quotient import (ChainProjections, InvarianceViolation, QuotientContext,
                       bracket_word, induced_map, quotient_algebra)

Letter = tuple  # ("X", j) or ("W", j), 1-based slots


class SystemSpecError(ValueError):
    pass


class CutoffTooSmall(ValueError):
    def __init__(self, required: int, requested: int):
        super().__init__(f"family cutoff {requested} too small; need L >= {required} "
                         f"for the requested tail tolerance")
        self.required = required
        self.requested = requested


def parse_letter(s) -> Letter:
    if isinstance(s, tuple) and len(s) == 2:
        kind, j = s
    elif isinstance(s, str) and len(s) >= 2 and s[0] in ("X", "W"):
        kind, j = s[0], s[1:]
    else:
        raise SystemSpecError(f"cannot parse letter {s!r}; expected 'X<j>' or 'W<j>'")
    try:
        j = int(j)
    except ValueError:
        raise SystemSpecError(f"cannot parse letter {s!r}") from None
    if kind not in ("X", "W") or j < 1:
        raise SystemSpecError(f"bad letter {s!r}")
    return (kind, j)


def format_letter(letter: Letter) -> str:
    return f"{letter[0]}{letter[1]}"


@dataclass(frozen=True)
class Word:
    """Right-nested bracket monomial over slot letters."""

    letters: tuple

    def __post_init__(self):
        if len(self.letters) < 2:
            raise SystemSpecError("bracket words have length >= 2; linear terms belong in A")

    @property
    def length(self) -> int:
        return len(self.letters)

    @property
    def state_letter_count(self) -> int:
        return sum(1 for kind, _ in self.letters if kind == "X")

    def __str__(self) -> str:
        return "[" + ",".join(format_letter(l) for l in self.letters) + "]"


@dataclass
class Term:
    word: Word
    coeff: np.ndarray  # length n: which state components receive the word

    def __post_init__(self):
        self.coeff = np.asarray(self.coeff, dtype=float)


@dataclass
class AdjointFamily:
    """Bracket part of scale * e^{ad_base}(target) written into one component.

    ``base`` maps letters to scalar weights: base_value = sum b_l * value(l).
    The l-th series term (1/l!) ad_base^l(target) expands into words of
    length l + 1; the l = 0 identity term is excluded here and must be
    accounted for in the system's linear part.
    """

    out_slot: int
    scale: float
    base: dict
    target: Letter
    cutoff: Optional[int] = None
    tol: float = 1e-12

    def __post_init__(self):
        self.base = {parse_letter(k): float(v) for k, v in self.base.items()}
        self.target = parse_letter(self.target)
        if not self.base:
            raise SystemSpecError("family base must reference at least one slot")

    def base_weight_l1(self) -> float:
        return float(sum(abs(v) for v in self.base.values()))

    def has_state_words_only(self) -> bool:
        """True when every expanded word contains a state letter."""
        if self.target[0] == "X":
            return True
        return all(kind == "X" for kind, _ in self.base)


class ExoSignal:
    """Exogenous input sequence W[k] stacked into R^{r d}.

    kinds: "zero"; "samples" (explicit list, repeated cyclically past the
    end); "geometric" (W[k] = ratio^k * base).  ``ideal_flag`` asserts that
    every sample lies in h^r for the system's invariance ideal; it is
    verified, not trusted, by consumers.
    """

    def __init__(self, kind: str, r: int, d: int, samples=None, base=None,
                 ratio: float = 1.0, ideal_flag: bool = False):
        if kind not in ("zero", "samples", "geometric"):
            raise SystemSpecError(f"unknown signal kind {kind!r}")
        self.kind = kind
        self.r = r
        self.d = d
        self.ideal_flag = ideal_flag
        self.ratio = float(ratio)
        if kind == "samples":
            arr = np.asarray(samples, dtype=float)
            if arr.ndim != 2 or arr.shape[1] != r * d or arr.shape[0] == 0:
                raise SystemSpecError("samples must be a nonempty (K, r*d) array")
            self.samples = arr
        elif kind == "geometric":
            self.base = np.asarray(base, dtype=float).reshape(-1)
            if self.base.shape != (r * d,):
                raise SystemSpecError("geometric base must have length r*d")
            if self.ratio < 0:
                raise SystemSpecError("geometric ratio must be nonnegative")
        else:
            self.samples = None

    @classmethod
    def zero(cls, r: int, d: int) -> "ExoSignal":
        return cls("zero", r, d, ideal_flag=True)

    def value(self, k: int) -> np.ndarray:
        if self.kind == "zero":
            return np.zeros(self.r * self.d)
        if self.kind == "samples":
            return self.samples[k % self.samples.shape[0]]
        return (self.ratio ** k) * self.base

    def slot_norm(self, vec: np.ndarray) -> float:
        return float(np.linalg.norm(vec.reshape(self.r, self.d), axis=1).sum())

    def envelope(self) -> tuple:
        """(beta, s) with ||W[k]|| <= beta * s^k, exact for the stored data."""
        if self.kind == "zero":
            return 0.0, 1.0
        if self.kind == "samples":
            return max(self.slot_norm(s) for s in self.samples), 1.0
        return self.slot_norm(self.base), max(self.ratio, 1.0)

    def max_ideal_residual(self, ideal: Subspace, k_max: int = 0) -> float:
        """Largest distance of any sample slot from the ideal."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "samples":
            vals = self.samples
        else:
            vals = self.base[np.newaxis, :]
        worst = 0.0
        for v in vals:
            for slot in v.reshape(self.r, self.d):
                worst = max(worst, ideal.distance(slot))
        return worst

    def projected(self, P: np.ndarray) -> "ExoSignal":
        lift = np.kron(np.eye(self.r), P)
        if self.kind == "zero":
            return ExoSignal.zero(self.r, P.shape[0])
        if self.kind == "samples":
            return ExoSignal("samples", self.r, P.shape[0],
                             samples=self.samples @ lift.T, ideal_flag=False)
        return ExoSignal("geometric", self.r, P.shape[0], base=lift @ self.base,
                         ratio=self.ratio, ideal_flag=False)


@dataclass
class Trajectory:
    states: np.ndarray           # (K+1, n*d)
    norms: np.ndarray            # (K+1,)
    quotient_norms: np.ndarray   # (K+1, levels)
    diverged: bool = False
    first_bad_index: Optional[int] = None

    @property
    def horizon(self) -> int:
        return self.states.shape[0] - 1


def stack_slots(slots: Sequence[np.ndarray]) -> np.ndarray:
    return np.concatenate([np.asarray(s, dtype=float).reshape(-1) for s in slots])


def _expm_batch(mats: np.ndarray) -> np.ndarray:
    """Exponentials of a (B, d, d) stack via scaling-squaring Taylor.

    Accuracy target ~1e-14 after scaling every matrix below norm 1/2; small d
    only, used for vectorized evaluation over many states at once.
    """
    mats = np.asarray(mats, dtype=float)
    B, d, _ = mats.shape
    norms = np.linalg.norm(mats, axis=(1, 2))
    s = np.maximum(0, np.ceil(np.log2(np.maximum(norms, 1e-300) / 0.5))).astype(int)
    s = np.minimum(s, 60)
    scaled = mats / (2.0 ** s)[:, None, None]
    out = np.broadcast_to(np.eye(d), (B, d, d)).copy()
    term = np.broadcast_to(np.eye(d), (B, d, d)).copy()
    for j in range(1, 18):
        term = np.matmul(term, scaled) / j
        out += term
    smax = int(s.max(initial=0))
    for step in range(smax):
        active = s > step
        out[active] = np.matmul(out[active], out[active])
    return out


class WordSeriesSystem:
    """The full system: algebra, linear part, words, families, invariance chain."""

    def __init__(self, algebra: LieAlgebra, n: int, r: int, A: np.ndarray,
                 terms: Sequence[Term] = (), families: Sequence[AdjointFamily] = (),
                 invariance_ideal: Optional[Subspace] = None, radius: float = 1.0,
                 name: str = ""):
        self.algebra = algebra
        self.n = int(n)
        self.r = int(r)
        if self.n < 1 or self.r < 1:
            raise SystemSpecError("need n >= 1 state slots and r >= 1 input slots")
        d = algebra.dim
        self.A = np.asarray(A, dtype=float)
        if self.A.shape != (self.n * d, self.n * d):
            raise SystemSpecError(f"A must be {self.n * d}x{self.n * d}, got {self.A.shape}")
        self.terms = list(terms)
        self.families = list(families)
        self.radius = float(radius)
        self.name = name
        for t in self.terms:
            if t.coeff.shape != (self.n,):
                raise SystemSpecError("term coefficient vectors must have length n")
            for kind, j in t.word.letters:
                limit = self.n if kind == "X" else self.r
                if j > limit:
                    raise SystemSpecError(f"letter {kind}{j} out of range")
        for f in self.families:
            if not (1 <= f.out_slot <= self.n):
                raise SystemSpecError("family out_slot out of range")
        ideal = invariance_ideal if invariance_ideal is not None else algebra.full_subspace()
        nil, p = is_nilpotent(algebra, ideal)
        if not nil:
            raise SystemSpecError("invariance ideal must be nilpotent")
        if not ideal.contains(derived_algebra(algebra)):
            raise SystemSpecError("invariance ideal must contain the derived algebra [g, g]")
        self.ideal = ideal
        self.nilindex = p
        self.chain = lower_central_series(algebra, ideal)
        self.projections = ChainProjections(algebra, self.chain)
        self._mu = None

    # -- bookkeeping -------------------------------------------------------

    @property
    def d(self) -> int:
        return self.algebra.dim

    @property
    def state_dim(self) -> int:
        return self.n * self.d

    def state_norm(self, X: np.ndarray, mode: str = "sum") -> float:
        X = np.asarray(X, dtype=float).reshape(self.n, self.d)
        slot_norms = np.linalg.norm(X, axis=1)
        return float(slot_norms.sum() if mode == "sum" else np.linalg.norm(X))

    def mu(self) -> float:
        if self._mu is None:
            self._mu = bracket_constant(self.algebra, "numerically-estimated")
        return self._mu

    def coordinate_names(self) -> list:
        return [f"X{s+1}_{lab}" for s in range(self.n) for lab in self.algebra.labels]

    def _letter_value(self, letter: Letter, Xs: np.ndarray, Ws: np.ndarray) -> np.ndarray:
        kind, j = letter
        return Xs[j - 1] if kind == "X" else Ws[j - 1]

    def _family_base_value(self, fam: AdjointFamily, Xs, Ws) -> np.ndarray:
        out = np.zeros(self.d)
        for letter, w in fam.base.items():
            out += w * self._letter_value(letter, Xs, Ws)
        return out

    # -- evaluation and simulation ------------------------------------------

    def evaluate(self, X, W) -> np.ndarray:
        """One step of the update map."""
        X = np.asarray(X, dtype=float).reshape(-1)
        W = np.asarray(W, dtype=float).reshape(-1)
        if X.shape != (self.state_dim,) or W.shape != (self.r * self.d,):
            raise SystemSpecError("state/input stack has wrong length")
        Xs = X.reshape(self.n, self.d)
        Ws = W.reshape(self.r, self.d)
        out = (self.A @ X).reshape(self.n, self.d).copy()
        for t in self.terms:
            vals = [self._letter_value(l, Xs, Ws) for l in t.word.letters]
            out += np.outer(t.coeff, bracket_word(self.algebra, vals))
        for f in self.families:
            base = self._family_base_value(f, Xs, Ws)
            target = self._letter_value(f.target, Xs, Ws)
            flow = scipy.linalg.expm(self.algebra.ad(base))
            out[f.out_slot - 1] += f.scale * (flow @ target - target)
        return out.reshape(-1)

    def evaluate_batch(self, X: np.ndarray, W: np.ndarray) -> np.ndarray:
        """Vectorized update map over a (B, n*d) batch of states.

        W is either one stacked input shared by the batch or a (B, r*d)
        stack.  Matches ``evaluate`` to floating-point accuracy ~1e-13.
        """
        X = np.asarray(X, dtype=float)
        B = X.shape[0]
        W = np.asarray(W, dtype=float)
        if W.ndim == 1:
            W = np.broadcast_to(W, (B, W.shape[0]))
        Xs = X.reshape(B, self.n, self.d)
        Ws = W.reshape(B, self.r, self.d)
        out = (X @ self.A.T).reshape(B, self.n, self.d).copy()

        def letter_vals(letter: Letter) -> np.ndarray:
            kind, j = letter
            return Xs[:, j - 1, :] if kind == "X" else Ws[:, j - 1, :]

        for t in self.terms:
            vals = [letter_vals(l) for l in t.word.letters]
            w = vals[-1]
            for v in vals[-2::-1]:
                w = np.einsum("bi,bj,ijk->bk", v, w, self.algebra.C)
            out += t.coeff[np.newaxis, :, np.newaxis] * w[:, np.newaxis, :]
        for f in self.families:
            base = np.zeros((B, self.d))
            for letter, wgt in f.base.items():
                base += wgt * letter_vals(letter)
            ads = np.einsum("bi,ijk->bkj", base, self.algebra.C)
            flows = _expm_batch(ads)
            target = letter_vals(f.target)
            vals = f.scale * (np.einsum("bkj,bj->bk", flows, target) - target)
            out[:, f.out_slot - 1, :] += vals
        return out.reshape(B, -1)

    def simulate(self, X0, signal: ExoSignal, k_max: int,
                 overflow: float = 1e100) -> Trajectory:
        if k_max < 0:
            raise SystemSpecError("horizon must be nonnegative")
        X0 = np.asarray(X0, dtype=float).reshape(-1)
        states = np.zeros((k_max + 1, self.state_dim))
        states[0] = X0
        diverged = False
        first_bad = None
        for k in range(k_max):
            nxt = self.evaluate(states[k], signal.value(k))
            if not np.all(np.isfinite(nxt)) or np.max(np.abs(nxt)) > overflow:
                diverged = True
                first_bad = k + 1
                states = states[:k + 1]
                break
            states[k + 1] = nxt
        norms = np.array([self.state_norm(x) for x in states])
        qnorms = np.zeros((states.shape[0], len(self.projections)))
        for i, ctx in enumerate(self.projections.contexts):
            lift = np.kron(np.eye(self.n), ctx.P)
            proj = states @ lift.T
            qnorms[:, i] = [float(np.linalg.norm(row.reshape(self.n, -1), axis=1).sum())
                            for row in proj]
        return Trajectory(states, norms, qnorms, diverged=diverged, first_bad_index=first_bad)

    # -- family expansion and the convergence majorant -----------------------

    def family_tail_bound(self, fam: AdjointFamily, L: int, radius: Optional[float] = None) -> float:
        """Bound on the neglected series terms past l = L at the given radius."""
        r = self.radius if radius is None else radius
        b = self.mu() * fam.base_weight_l1() * r
        return abs(fam.scale) * (b ** L) / math.factorial(L) * r * math.exp(b)

    def required_cutoff(self, fam: AdjointFamily, radius: Optional[float] = None,
                        tol: Optional[float] = None) -> int:
        tol = fam.tol if tol is None else tol
        nil, p = is_nilpotent(self.algebra)
        if nil:
            # a word of length l + 1 sits in the (l + 1)-th central ideal, so
            # the expansion is exact once l reaches p - 1 (empty for abelian)
            exact = p - 1
        else:
            exact = None
        L = 1
        while self.family_tail_bound(fam, L, radius) >= tol:
            L += 1
            if exact is not None and L >= exact:
                return exact
            if L > 500:
                raise SystemSpecError("family tail does not meet tolerance at any sane cutoff")
        return L if exact is None else min(L, exact)

    def expand_family(self, fam: AdjointFamily, radius: Optional[float] = None,
                      cutoff: Optional[int] = None, tol: Optional[float] = None,
                      hard_cap: int = 30) -> list:
        """Multilinear expansion of a family into explicit Terms.

        Words of length l + 1 arise from (1/l!) ad_base^l(target) for
        l = 1..L.  On a nilpotent algebra the expansion is exact once l + 1
        exceeds the nilindex.  An explicitly requested cutoff is honored as a
        deliberate truncation; asking for a cutoff and a tail tolerance it
        cannot meet is refused with the required order.
        """
        L = cutoff if cutoff is not None else fam.cutoff
        if L is None:
            needed = self.required_cutoff(fam, radius, tol)
            if needed > hard_cap:
                raise CutoffTooSmall(needed, hard_cap)
            L = needed
        elif tol is not None:
            needed = self.required_cutoff(fam, radius, tol)
            if L < needed:
                raise CutoffTooSmall(needed, L)
        base_letters = list(fam.base.items())
        out = []
        coeff_dirs = np.zeros(self.n)
        coeff_dirs[fam.out_slot - 1] = 1.0
        stack = [((), 1.0)]
        for level in range(1, L + 1):
            stack = [(seq + (letter,), w * weight)
                     for seq, w in stack for letter, weight in base_letters]
            fact = math.factorial(level)
            for seq, w in stack:
                scalar = fam.scale * w / fact
                if scalar == 0.0:
                    continue
                out.append(Term(Word(seq + (fam.target,)), scalar * coeff_dirs))
        return out

    def all_terms(self, radius: Optional[float] = None) -> list:
        """Explicit terms plus every family expanded at its default cutoff."""
        out = list(self.terms)
        for f in self.families:
            out.extend(self.expand_family(f, radius))
        return out

    def series_majorant(self, radius: float, mu: Optional[float] = None) -> float:
        """sum_w mu^{|w|-1} ||c_w|| radius^{|w|}, families summed in closed form.

        A finite value certifies strong absolute convergence of the word
        series on the ball of the given radius.
        """
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        mu = self.mu() if mu is None else mu
        total = 0.0
        for t in self.terms:
            total += mu ** (t.word.length - 1) * float(np.linalg.norm(t.coeff)) * radius ** t.word.length
        for f in self.families:
            x = mu * f.base_weight_l1() * radius
            total += abs(f.scale) * radius * (math.expm1(x))
        return total

    # -- structural and numerical checks -------------------------------------

    def structural_state_letter_ok(self) -> bool:
        """Every stored word and every family word contains a state letter."""
        return (all(t.word.state_letter_count >= 1 for t in self.terms)
                and all(f.has_state_words_only() for f in self.families))

    def invariance_report(self, seed: int = 0, nonlinear_samples: int = 20,
                          tol: float = 1e-10) -> dict:
        """Invariance of every chain level under A and under the full map."""
        rng = np.random.default_rng(seed)
        scale = max(1.0, float(np.linalg.norm(self.A)))
        levels = []
        ok = True
        for idx, sub in enumerate(self.chain.ideals):
            if sub.dim == 0:
                levels.append({"level": idx + 1, "dim": 0, "linear_residual": 0.0,
                               "nonlinear_residual": 0.0})
                continue
            B = np.kron(np.eye(self.n), sub.onb)
            img = self.A @ B
            lin = float(np.linalg.norm(img - B @ (B.T @ img)))
            nl = 0.0
            for _ in range(nonlinear_samples):
                x = B @ rng.standard_normal(B.shape[1])
                w = rng.standard_normal(self.r * self.d)
                y = self.evaluate(x, w)
                nl = max(nl, float(np.linalg.norm(y - B @ (B.T @ y))) / max(1.0, float(np.linalg.norm(y))))
            levels.append({"level": idx + 1, "dim": sub.dim, "linear_residual": lin,
                           "nonlinear_residual": nl})
            ok = ok and lin < tol * scale and nl < max(tol, 1e-9)
        return {"ok": ok, "levels": levels}

    def equilibrium_report(self, seed: int = 0, starts: int = 100,
                           iters: int = 300, damping: float = 0.5,
                           w_samples: Optional[list] = None) -> dict:
        """Falsification search for nonzero fixed points, plus structural facts.

        Cannot prove uniqueness; reports structural state-letter coverage,
        invertibility margins of I - A (full and on the top quotient, where
        the dynamics are linear), and any damped-iteration fixed point with
        small residual and non-small norm.
        """
        rng = np.random.default_rng(seed)
        structural = self.structural_state_letter_ok()
        eye = np.eye(self.state_dim)
        lin_margin = float(np.linalg.svd(eye - self.A, compute_uv=False)[-1])
        ctx0 = self.projections[0]
        P0 = np.kron(np.eye(self.n), ctx0.P)
        iota0 = np.kron(np.eye(self.n), ctx0.iota)
        A0 = P0 @ self.A @ iota0
        if A0.shape[0]:
            q_margin = float(np.linalg.svd(np.eye(A0.shape[0]) - A0, compute_uv=False)[-1])
        else:
            q_margin = float("inf")
        if w_samples is None:
            w_samples = [np.zeros(self.r * self.d),
                         rng.standard_normal(self.r * self.d) * 0.5]
        violations = []
        for w in w_samples:
            w = np.asarray(w, dtype=float).reshape(-1)
            pts = rng.standard_normal((starts, self.state_dim)) * max(self.radius, 1.0)
            alive = np.ones(starts, dtype=bool)
            for _ in range(iters):
                fx = self.evaluate_batch(pts[alive], w)
                good = np.all(np.isfinite(fx), axis=1) & (np.max(np.abs(fx), axis=1) < 1e30)
                idx = np.flatnonzero(alive)
                pts[idx[good]] += damping * (fx[good] - pts[idx[good]])
                alive[idx[~good]] = False
                if not alive.any():
                    break
            for x in pts[alive]:
                resid = float(np.linalg.norm(self.evaluate(x, w) - x))
                nrm = self.state_norm(x)
                if resid < 1e-8 and nrm > 1e-4:
                    violations.append({"norm": nrm, "residual": resid, "point": x.tolist()})
        return {"structural_ok": structural,
                "linear_margin": lin_margin,
                "quotient_linear_margin": q_margin,
                "violations": violations,
                "ok": structural and not violations}

    def jacobian_report(self, h_steps: Sequence[float] = (1e-2, 1e-3, 1e-4),
                        directions: int = 8, seed: int = 0) -> dict:
        """Central finite-difference linearization at the origin versus A.

        Coordinate-axis differences recover the Jacobian itself (for slot
        words they are exact: a bracket word needs two active letters and an
        axis perturbation activates one).  The quadratic convergence rate of
        the remainder is measured along random joint state/input directions,
        where words of length >= 3 contribute; systems whose series stops at
        quadratic words are exact there too and report no order.
        """
        h_steps = sorted(h_steps, reverse=True)
        nd, rd = self.state_dim, self.r * self.d
        x_err, w_err = [], []
        for h in h_steps:
            JX = np.zeros((nd, nd))
            for i in range(nd):
                e = np.zeros(nd)
                e[i] = h
                JX[:, i] = (self.evaluate(e, np.zeros(rd)) - self.evaluate(-e, np.zeros(rd))) / (2 * h)
            x_err.append(float(np.linalg.norm(JX - self.A)))
            JW = np.zeros((nd, rd))
            for i in range(rd):
                e = np.zeros(rd)
                e[i] = h
                JW[:, i] = (self.evaluate(np.zeros(nd), e) - self.evaluate(np.zeros(nd), -e)) / (2 * h)
            w_err.append(float(np.linalg.norm(JW)))
        rng = np.random.default_rng(seed)
        dirs = [(rng.standard_normal(nd), rng.standard_normal(rd)) for _ in range(directions)]
        dir_err = []
        for h in h_steps:
            worst = 0.0
            for v, w in dirs:
                diff = (self.evaluate(h * v, h * w) - self.evaluate(-h * v, -h * w)) / (2 * h)
                worst = max(worst, float(np.linalg.norm(diff - self.A @ v)))
            dir_err.append(worst)
        axes_ok = max(x_err) < 1e-12 and max(w_err) < 1e-12
        exact = all(e < 1e-12 for e in dir_err)
        order = None
        if not exact:
            logs_h = np.log(np.asarray(h_steps))
            logs_e = np.log(np.maximum(np.asarray(dir_err), 1e-300))
            order = float(np.polyfit(logs_h, logs_e, 1)[0])
        ok = axes_ok and (exact or (order is not None and order >= 1.9))
        return {"h_steps": list(h_steps), "state_errors": x_err, "input_errors": w_err,
                "directional_errors": dir_err, "observed_order": order,
                "exact": exact, "ok": ok}

    # -- quotient dynamics ----------------------------------------------------

    def quotient_system(self, level: int, tol: float = 1e-10) -> "WordSeriesSystem":
        """Induced system on the quotient modulo chain ideal ``level`` + 1.

        Words keep their letters and coefficients; only the algebra, the
        linear part, and the invariance chain are pushed through the
        projection.  Raises InvarianceViolation if A does not preserve the
        factored subspace.
        """
        ctx = self.projections[level]
        sub = self.chain.ideals[level]
        if sub.dim:
            B = np.kron(np.eye(self.n), sub.onb)
            img = self.A @ B
            resid = float(np.linalg.norm(img - B @ (B.T @ img)))
            if resid > tol * max(1.0, float(np.linalg.norm(self.A))):
                raise InvarianceViolation(resid)
        qalg = quotient_algebra(ctx, check_ideal=False)
        lift_p = np.kron(np.eye(self.n), ctx.P)
        lift_i = np.kron(np.eye(self.n), ctx.iota)
        Abar = lift_p @ self.A @ lift_i
        proj_ideal = Subspace(ctx.P @ self.ideal.onb) if self.ideal.dim else Subspace.zero(ctx.quotient_dim)
        terms = [Term(t.word, t.coeff.copy()) for t in self.terms]
        fams = [AdjointFamily(f.out_slot, f.scale,
                              {format_letter(k): v for k, v in f.base.items()},
                              format_letter(f.target), f.cutoff, f.tol)
                for f in self.families]
        return WordSeriesSystem(qalg, self.n, self.r, Abar, terms, fams,
                                invariance_ideal=proj_ideal, radius=self.radius,
                                name=f"{self.name}/level{level}" if self.name else "")

    def commuting_square_residual(self, level: int, samples: int = 100,
                                  seed: int = 0, scale: float = 1.0) -> float:
        """Residual of project-then-step versus step-then-project."""
        qsys = self.quotient_system(level)
        ctx = self.projections[level]
        lift_px = np.kron(np.eye(self.n), ctx.P)
        lift_pw = np.kron(np.eye(self.r), ctx.P)
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(samples):
            x = rng.standard_normal(self.state_dim) * scale
            w = rng.standard_normal(self.r * self.d) * scale
            lhs = lift_px @ self.evaluate(x, w)
            rhs = qsys.evaluate(lift_px @ x, lift_pw @ w)
            worst = max(worst, float(np.linalg.norm(lhs - rhs)))
        return worst
