"""Finite-dimensional real Lie algebras given by structure constants.

An algebra of dimension d is stored as a rank-3 tensor C with
[e_i, e_j] = sum_k C[i, j, k] e_k.  Elements are coordinate vectors of
length d.  Subspaces are column spans.  The module provides the bracket,
span-of-brackets machinery, the derived and lower central series, the
solvable/nilpotent predicates, and a bound mu with
||[x, y]|| <= mu ||x|| ||y||.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

JACOBI_TOL = 1e-12
REP_TOL = 1e-10
RANK_TOL = 1e-10  # relative singular-value cutoff for all span/rank decisions


class DimensionMismatch(ValueError):
    pass


class AlgebraLoadError(ValueError):
    pass


class InvalidAlgebra(ValueError):
    pass


def _as_vector(x, dim: int) -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(-1)
    if v.shape != (dim,):
        raise DimensionMismatch(f"expected coordinate vector of length {dim}, got shape {np.shape(x)}")
    if not np.all(np.isfinite(v)):
        raise ValueError("coordinates must be finite")
    return v


def orthonormal_basis(vectors: np.ndarray, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis (d x r) for the span of the given column stack."""
    mat = np.asarray(vectors, dtype=float)
    if mat.ndim != 2 or mat.shape[1] == 0:
        return np.zeros((mat.shape[0], 0))
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((mat.shape[0], 0))
    r = int(np.sum(s > rank_tol * s[0]))
    return u[:, :r]


class Subspace:
    """Subspace of R^d spanned by the columns of ``basis``.

    The stored basis is orthonormalized once on construction; all geometric
    queries (projection, containment) run off the orthonormal copy.
    """

    def __init__(self, basis: np.ndarray, *, already_orthonormal: bool = False):
        basis = np.asarray(basis, dtype=float)
        if basis.ndim != 2:
            raise ValueError("basis must be a 2-d array (columns span the subspace)")
        if already_orthonormal:
            self.onb = basis
        else:
            self.onb = orthonormal_basis(basis)
        self.ambient_dim = basis.shape[0]

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(np.zeros((ambient_dim, 0)), already_orthonormal=True)

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(np.eye(ambient_dim), already_orthonormal=True)

    @property
    def dim(self) -> int:
        return self.onb.shape[1]

    def projector(self) -> np.ndarray:
        """Orthogonal projector onto the subspace."""
        return self.onb @ self.onb.T

    def project(self, x: np.ndarray) -> np.ndarray:
        return self.onb @ (self.onb.T @ x)

    def distance(self, x: np.ndarray) -> float:
        """Euclidean distance from x to the subspace."""
        x = np.asarray(x, dtype=float)
        return float(np.linalg.norm(x - self.project(x)))

    def contains(self, other: "Subspace", tol: float = RANK_TOL) -> bool:
        """Whether ``other`` is contained in this subspace.

        Tested as ||(I - P) B_other|| < tol with P the orthogonal projector,
        which avoids any basis-dependent comparison.
        """
        if other.dim == 0:
            return True
        resid = other.onb - self.project(other.onb)
        return float(np.linalg.norm(resid)) < tol

    def contains_vector(self, x: np.ndarray, tol: float = RANK_TOL) -> bool:
        return self.distance(x) < tol * max(1.0, float(np.linalg.norm(x)))

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"


@dataclass
class IdealChain:
    """Descending chain of subspaces S_1 >= S_2 >= ... produced by a series.

    ``terminated`` is True when the last entry is the zero subspace; otherwise
    the series stabilized at a nonzero subspace and the classification
    predicate tied to ``kind`` fails.
    """

    ideals: list
    kind: str  # "derived-series" | "lower-central-series"
    terminated: bool

    @property
    def dims(self) -> list:
        return [s.dim for s in self.ideals]

    def __len__(self) -> int:
        return len(self.ideals)


class LieAlgebra:
    """Real Lie algebra defined by structure constants.

    Parameters
    ----------
    structure_constants:
        Array of shape (d, d, d) with [e_i, e_j] = sum_k C[i, j, k] e_k.
    labels:
        Basis labels, default e1..ed.
    matrix_rep:
        Optional list/array of d real m x m matrices realizing the basis;
        the bracket must match the matrix commutator.
    """

    def __init__(self, structure_constants, labels: Optional[Sequence[str]] = None,
                 matrix_rep=None, name: str = ""):
        C = np.asarray(structure_constants, dtype=float)
        if C.ndim != 3 or C.shape[0] != C.shape[1] or C.shape[0] != C.shape[2]:
            raise InvalidAlgebra(f"structure constants must have shape (d, d, d), got {C.shape}")
        self.dim = C.shape[0]
        self.C = C
        self.labels = list(labels) if labels is not None else [f"e{i+1}" for i in range(self.dim)]
        if len(self.labels) != self.dim:
            raise InvalidAlgebra("label count does not match dimension")
        self.name = name
        if matrix_rep is not None:
            rep = np.asarray(matrix_rep, dtype=float)
            if rep.ndim != 3 or rep.shape[0] != self.dim or rep.shape[1] != rep.shape[2]:
                raise InvalidAlgebra("matrix_rep must be d square matrices")
            self.matrix_rep = rep
        else:
            self.matrix_rep = None
        self._validate()

    # -- validation ------------------------------------------------------

    def _validate(self) -> None:
        C = self.C
        anti = np.max(np.abs(C + np.transpose(C, (1, 0, 2)))) if self.dim else 0.0
        if anti > JACOBI_TOL:
            raise InvalidAlgebra(f"structure constants not antisymmetric (max violation {anti:.3e})")
        jac = self.jacobi_residual()
        if jac > JACOBI_TOL:
            raise InvalidAlgebra(f"Jacobi identity violated (max residual {jac:.3e})")
        if self.matrix_rep is not None:
            err = self.rep_residual()
            if err > REP_TOL:
                raise InvalidAlgebra(f"matrix_rep commutators disagree with structure constants ({err:.3e})")

    def jacobi_residual(self) -> float:
        """Max-norm residual of [[e_i,e_j],e_k] + [[e_j,e_k],e_i] + [[e_k,e_i],e_j]."""
        C = self.C
        # [[e_i, e_j], e_k]_m = sum_l C[i,j,l] C[l,k,m]
        t1 = np.einsum("ijl,lkm->ijkm", C, C)
        res = t1 + np.transpose(t1, (1, 2, 0, 3)) + np.transpose(t1, (2, 0, 1, 3))
        return float(np.max(np.abs(res))) if res.size else 0.0

    def rep_residual(self) -> float:
        rep = self.matrix_rep
        comm = np.einsum("iab,jbc->ijac", rep, rep) - np.einsum("jab,ibc->ijac", rep, rep)
        target = np.einsum("ijk,kab->ijab", self.C, rep)
        return float(np.max(np.abs(comm - target)))

    # -- basic operations ------------------------------------------------

    def bracket(self, x, y) -> np.ndarray:
        """Lie bracket [x, y] in coordinates."""
        x = _as_vector(x, self.dim)
        y = _as_vector(y, self.dim)
        return np.einsum("i,j,ijk->k", x, y, self.C)

    def ad(self, x) -> np.ndarray:
        """Matrix of ad_x : y -> [x, y]."""
        x = _as_vector(x, self.dim)
        return np.einsum("i,ijk->kj", x, self.C)

    def element(self, **coeffs: float) -> np.ndarray:
        """Element from label coefficients, e.g. alg.element(h1=3, h2=2, h3=-1)."""
        v = np.zeros(self.dim)
        for lab, c in coeffs.items():
            if lab not in self.labels:
                raise KeyError(f"unknown basis label {lab!r}")
            v[self.labels.index(lab)] = float(c)
        return v

    def basis_vector(self, label: str) -> np.ndarray:
        return self.element(**{label: 1.0})

    def to_matrix(self, x) -> np.ndarray:
        if self.matrix_rep is None:
            raise ValueError("algebra has no matrix representation")
        x = _as_vector(x, self.dim)
        return np.einsum("i,iab->ab", x, self.matrix_rep)

    def span(self, vectors: Sequence) -> Subspace:
        cols = np.column_stack([_as_vector(v, self.dim) for v in vectors]) if len(vectors) else np.zeros((self.dim, 0))
        return Subspace(cols)

    def span_labels(self, labels: Sequence[str]) -> Subspace:
        return self.span([self.basis_vector(l) for l in labels])

    def full_subspace(self) -> Subspace:
        return Subspace.full(self.dim)

    def __repr__(self) -> str:
        tag = f" {self.name!r}" if self.name else ""
        return f"LieAlgebra(dim={self.dim}{tag})"


# -- subspace bracket and series ------------------------------------------


def subspace_bracket(alg: LieAlgebra, s1: Subspace, s2: Subspace) -> Subspace:
    """Span of all brackets [u, v] with u in s1, v in s2."""
    if s1.ambient_dim != alg.dim or s2.ambient_dim != alg.dim:
        raise DimensionMismatch("subspace ambient dimension does not match algebra")
    if s1.dim == 0 or s2.dim == 0:
        return Subspace.zero(alg.dim)
    # bracket every pair of orthonormal basis vectors; rank-reveal the stack
    prods = np.einsum("ia,jb,ijk->kab", s1.onb, s2.onb, alg.C).reshape(alg.dim, -1)
    return Subspace(orthonormal_basis(prods), already_orthonormal=True)


def derived_series(alg: LieAlgebra, max_steps: int = 64) -> IdealChain:
    """Chain g_0 = g, g_{i+1} = [g_i, g_i], down to 0 or stabilization."""
    chain = [alg.full_subspace()]
    for _ in range(max_steps):
        nxt = subspace_bracket(alg, chain[-1], chain[-1])
        if nxt.dim == chain[-1].dim:
            return IdealChain(chain, "derived-series", terminated=(nxt.dim == 0))
        chain.append(nxt)
        if nxt.dim == 0:
            return IdealChain(chain, "derived-series", terminated=True)
    return IdealChain(chain, "derived-series", terminated=False)


def lower_central_series(alg: LieAlgebra, start: Optional[Subspace] = None,
                         max_steps: int = 64) -> IdealChain:
    """Chain h^(1) = start, h^(i+1) = [h^(i), start], down to 0 or stabilization.

    ``start`` defaults to the whole algebra.  The series of a proper ideal h
    is taken within h itself, i.e. brackets are with h, not with g.
    """
    h = start if start is not None else alg.full_subspace()
    chain = [h]
    for _ in range(max_steps):
        nxt = subspace_bracket(alg, chain[-1], h)
        if nxt.dim == chain[-1].dim:
            return IdealChain(chain, "lower-central-series", terminated=(nxt.dim == 0))
        chain.append(nxt)
        if nxt.dim == 0:
            return IdealChain(chain, "lower-central-series", terminated=True)
    return IdealChain(chain, "lower-central-series", terminated=False)


def derived_algebra(alg: LieAlgebra) -> Subspace:
    return subspace_bracket(alg, alg.full_subspace(), alg.full_subspace())


def is_solvable(alg: LieAlgebra):
    """(solvable?, derived length).  Derived length is None when not solvable.

    Cross-checked against the equivalent criterion that the derived algebra
    [g, g] is nilpotent.
    """
    chain = derived_series(alg)
    solvable = chain.terminated
    # chain lists g_0 .. g_{v+1} = 0, so the derived length is len - 2
    length = len(chain.ideals) - 2 if solvable else None
    nil, _ = is_nilpotent(alg, derived_algebra(alg))
    if nil != solvable:
        raise RuntimeError("derived-series and derived-algebra-nilpotency checks disagree; "
                           "this indicates a rank-tolerance failure")
    return solvable, length


def is_nilpotent(alg: LieAlgebra, start: Optional[Subspace] = None):
    """(nilpotent?, nilindex).  Nilindex is None when the series stabilizes nonzero.

    A zero-dimensional start is nilpotent with nilindex 0 by convention.
    """
    h = start if start is not None else alg.full_subspace()
    if h.dim == 0:
        return True, 0
    chain = lower_central_series(alg, h)
    if not chain.terminated:
        return False, None
    return True, len(chain.ideals) - 1


# -- bracket norm constant -------------------------------------------------

MU_KINDS = ("frobenius-rep", "generic", "numerically-estimated")


def bracket_constant(alg: LieAlgebra, kind: str = "numerically-estimated",
                     samples: int = 2000, refine_iters: int = 60, seed: int = 0) -> float:
    """Constant mu with ||[x, y]|| <= mu ||x|| ||y||.

    kind:
      * "frobenius-rep": sqrt(2); valid for the Frobenius norm of any matrix
        realization.  Requires matrix_rep.
      * "generic": the a-priori bound 2 from submultiplicativity.
      * "numerically-estimated": supremum of ||[x, y]|| / (||x|| ||y||) in
        coordinate Euclidean norm over random unit pairs, sharpened by
        alternating singular-vector ascent, then inflated by 5%.
    """
    if kind == "frobenius-rep":
        if alg.matrix_rep is None:
            raise ValueError("frobenius-rep bound requires a matrix representation")
        return float(np.sqrt(2.0))
    if kind == "generic":
        return 2.0
    if kind != "numerically-estimated":
        raise ValueError(f"unknown norm kind {kind!r}; expected one of {MU_KINDS}")

    d = alg.dim
    if d == 0 or np.max(np.abs(alg.C)) == 0.0:
        return 0.0
    rng = np.random.default_rng(seed)
    xs = rng.standard_normal((samples, d))
    ys = rng.standard_normal((samples, d))
    xs /= np.linalg.norm(xs, axis=1, keepdims=True)
    ys /= np.linalg.norm(ys, axis=1, keepdims=True)
    vals = np.linalg.norm(np.einsum("si,sj,ijk->sk", xs, ys, alg.C), axis=1)
    best = float(np.max(vals))
    x = xs[int(np.argmax(vals))].copy()
    y = ys[int(np.argmax(vals))].copy()
    # alternating ascent: for fixed x the map y -> [x, y] is linear, so the
    # maximizing y is the top right-singular vector, and symmetrically for x
    for _ in range(refine_iters):
        mx = alg.ad(x)
        _, s, vt = np.linalg.svd(mx)
        y = vt[0]
        ny = np.einsum("j,ijk->ki", y, alg.C)  # columns: [e_i, y]
        _, s2, vt2 = np.linalg.svd(ny)
        x = vt2[0]
        cur = float(np.linalg.norm(alg.bracket(x, y)))
        if cur <= best * (1 + 1e-12):
            best = max(best, cur)
            break
        best = cur
    return 1.05 * best


# -- JSON interchange -------------------------------------------------------


def algebra_from_dict(data: dict, name: str = "") -> LieAlgebra:
    """Build an algebra from its JSON definition.

    Format: {"dim": d, "labels": [...], "brackets": [{"i": li, "j": lj,
    "coeffs": {lk: c}}], "matrix_rep": optional}.  Unlisted pairs default to
    zero and the antisymmetric mirror is filled in automatically; listing a
    pair and its mirror with inconsistent coefficients is a load error.
    """
    try:
        d = int(data["dim"])
    except (KeyError, TypeError, ValueError) as exc:
        raise AlgebraLoadError("algebra definition must contain an integer 'dim'") from exc
    if d <= 0:
        raise AlgebraLoadError("'dim' must be positive")
    labels = data.get("labels", [f"e{i+1}" for i in range(d)])
    if len(labels) != d or len(set(labels)) != d:
        raise AlgebraLoadError("'labels' must be distinct and match 'dim'")
    index = {lab: i for i, lab in enumerate(labels)}

    def resolve(key) -> int:
        if isinstance(key, str):
            if key not in index:
                raise AlgebraLoadError(f"unknown basis label {key!r}")
            return index[key]
        raise AlgebraLoadError(f"basis references must be labels, got {key!r}")

    C = np.zeros((d, d, d))
    seen = set()
    for entry in data.get("brackets", []):
        try:
            i = resolve(entry["i"])
            j = resolve(entry["j"])
            coeffs = entry["coeffs"]
        except (KeyError, TypeError) as exc:
            raise AlgebraLoadError(f"malformed bracket entry {entry!r}") from exc
        if i == j:
            raise AlgebraLoadError(f"bracket of {labels[i]!r} with itself must be omitted (it is zero)")
        vec = np.zeros(d)
        for lk, c in coeffs.items():
            vec[resolve(lk)] = float(c)
        if (j, i) in seen:
            if not np.allclose(C[j, i], -vec, atol=1e-15):
                raise AlgebraLoadError(
                    f"brackets [{labels[i]},{labels[j]}] and [{labels[j]},{labels[i]}] are inconsistent")
            continue
        if (i, j) in seen:
            raise AlgebraLoadError(f"bracket [{labels[i]},{labels[j]}] listed twice")
        seen.add((i, j))
        C[i, j] = vec
        C[j, i] = -vec
    rep = data.get("matrix_rep")
    try:
        return LieAlgebra(C, labels=labels, matrix_rep=rep, name=name or data.get("name", ""))
    except InvalidAlgebra as exc:
        raise AlgebraLoadError(str(exc)) from exc


def algebra_to_dict(alg: LieAlgebra) -> dict:
    brackets = []
    for i in range(alg.dim):
        for j in range(i + 1, alg.dim):
            if np.any(alg.C[i, j] != 0.0):
                coeffs = {alg.labels[k]: float(alg.C[i, j, k])
                          for k in range(alg.dim) if alg.C[i, j, k] != 0.0}
                brackets.append({"i": alg.labels[i], "j": alg.labels[j], "coeffs": coeffs})
    out = {"dim": alg.dim, "labels": list(alg.labels), "brackets": brackets}
    if alg.name:
        out["name"] = alg.name
    if alg.matrix_rep is not None:
        out["matrix_rep"] = alg.matrix_rep.tolist()
    return out


def load_algebra(path) -> LieAlgebra:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise AlgebraLoadError(f"invalid JSON in {path}: {exc}") from exc
    return algebra_from_dict(data)


# -- built-in catalog --------------------------------------------------------


def heisenberg() -> LieAlgebra:
    """3-dimensional Heisenberg algebra with [h1, h2] = -h3."""
    C = np.zeros((3, 3, 3))
    C[0, 1, 2] = -1.0
    C[1, 0, 2] = 1.0
    # realization by strictly upper-triangular 3x3 matrices (h3 = -E13 so
    # that the commutator [h1, h2] equals -h3)
    rep = np.zeros((3, 3, 3))
    rep[0, 0, 1] = 1.0
    rep[1, 1, 2] = 1.0
    rep[2, 0, 2] = -1.0
    return LieAlgebra(C, labels=["h1", "h2", "h3"], matrix_rep=rep, name="heisenberg")


def upper_triangular6() -> LieAlgebra:
    """Upper-triangular 3x3 matrices: 6-dimensional solvable, non-nilpotent.

    Basis t1 = E11, t2 = E22, t3 = E33, t4 = E12, t5 = E23, t6 = E13 with
    nonvanishing brackets [t1,t4] = t4, [t1,t6] = t6, [t2,t4] = -t4,
    [t2,t5] = t5, [t3,t5] = -t5, [t3,t6] = -t6, [t4,t5] = t6.
    """
    labels = ["t1", "t2", "t3", "t4", "t5", "t6"]
    C = np.zeros((6, 6, 6))

    def setb(i, j, k, c):
        C[i, j, k] = c
        C[j, i, k] = -c

    setb(0, 3, 3, 1.0)   # [t1, t4] = t4
    setb(0, 5, 5, 1.0)   # [t1, t6] = t6
    setb(1, 3, 3, -1.0)  # [t2, t4] = -t4
    setb(1, 4, 4, 1.0)   # [t2, t5] = t5
    setb(2, 4, 4, -1.0)  # [t3, t5] = -t5
    setb(2, 5, 5, -1.0)  # [t3, t6] = -t6
    setb(3, 4, 5, 1.0)   # [t4, t5] = t6
    rep = np.zeros((6, 3, 3))
    rep[0, 0, 0] = 1.0
    rep[1, 1, 1] = 1.0
    rep[2, 2, 2] = 1.0
    rep[3, 0, 1] = 1.0
    rep[4, 1, 2] = 1.0
    rep[5, 0, 2] = 1.0
    return LieAlgebra(C, labels=labels, matrix_rep=rep, name="upper-triangular-6")


def abelian(n: int) -> LieAlgebra:
    """Commutative algebra of dimension n (all brackets vanish)."""
    rep = np.zeros((n, n + 1, n + 1))
    for i in range(n):
        rep[i, i, n] = 1.0  # commuting strictly-upper generators
    return LieAlgebra(np.zeros((n, n, n)), labels=[f"a{i+1}" for i in range(n)],
                      matrix_rep=rep, name=f"abelian-{n}")


def sl2() -> LieAlgebra:
    """Non-solvable control case: [e,f] = h, [h,e] = 2e, [h,f] = -2f."""
    labels = ["e", "f", "h"]
    C = np.zeros((3, 3, 3))
    C[0, 1, 2] = 1.0
    C[1, 0, 2] = -1.0
    C[2, 0, 0] = 2.0
    C[0, 2, 0] = -2.0
    C[2, 1, 1] = -2.0
    C[1, 2, 1] = 2.0
    rep = np.zeros((3, 2, 2))
    rep[0, 0, 1] = 1.0
    rep[1, 1, 0] = 1.0
    rep[2] = np.diag([1.0, -1.0])
    return LieAlgebra(C, labels=labels, matrix_rep=rep, name="sl2")


CATALOG = {
    "heisenberg": heisenberg,
    "upper-triangular-6": upper_triangular6,
    "abelian-3": lambda: abelian(3),
    "sl2": sl2,
}


def catalog_algebras() -> dict:
    return {name: make() for name, make in CATALOG.items()}
