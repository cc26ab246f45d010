"""Scenario assembly: bundled demonstration systems, JSON scenario files,
and trajectory export.

A scenario is a system plus a concrete run: exogenous signal, initial
condition, horizon, initial-condition bound M, and the certificate route to
attempt.  Builtins: "example-4.1" (Heisenberg tracking error, nilpotent
route), "example-6.1" (coupled adjoint flows on the upper-triangular
algebra, solvable route), "heisenberg-deadbeat" and "uptri-deadbeat"
(zero-spectral-radius linear parts, finite-time route).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .algebra import (AlgebraLoadError, LieAlgebra, Subspace, algebra_from_dict,
                      algebra_to_dict, catalog_algebras, derived_algebra,
                      heisenberg, upper_triangular6)
from .dynamics import (AdjointFamily, ExoSignal, SystemSpecError, Term, Trajectory,
                       Word, WordSeriesSystem, parse_letter)
from . import sampling


class ScenarioError(ValueError):
    pass


@dataclass
class Scenario:
    name: str
    system: WordSeriesSystem
    signal: ExoSignal
    x0: np.ndarray
    horizon: int
    M: float
    route: str = "auto"  # auto | nilpotent | solvable | deadbeat
    notes: list = field(default_factory=list)

    def with_horizon(self, horizon: Optional[int]) -> "Scenario":
        if horizon is None or horizon == self.horizon:
            return self
        return Scenario(self.name, self.system, self.signal, self.x0, horizon,
                        self.M, self.route, self.notes)


# -- builtins -----------------------------------------------------------------


def _example_41(seed: int = 0, horizon: Optional[int] = None) -> Scenario:
    sys = sampling.heisenberg_tracking_system()
    x0 = sampling.tracking_state(np.array([3.0, 2.0, -1.0]))
    return Scenario("example-4.1", sys, sampling.tracking_signal(1.0), x0,
                    horizon if horizon is not None else 50, M=6.0,
                    route="nilpotent",
                    notes=["slot 1 is the tracking error; slot 2 carries its "
                           "linear image used as a bracket letter"])


EX61_W0 = np.array([0.0, 0.0, 0.0, 1.0, 7.0, 6.0])  # t4 + 7 t5 + 6 t6
EX61_X0 = np.array([1.0, -1.0, 0.5, 2.0, 1.0, -1.0,
                    -0.5, 1.0, 1.0, 0.0, -2.0, 1.0])


def ex61_system() -> WordSeriesSystem:
    """Coupled adjoint-flow pair on the upper-triangular algebra.

    X1+ = (1/2 e^{ad W1} - e^{ad X2}) X1 + 1/2 e^{ad W2} X2,
    X2+ = 1/2 e^{ad X2} X1 + 1/4 e^{ad (X1+W1)} X2.
    The identity parts of the flows form the linear block [[-1/2, 1/2],
    [1/2, 1/4]] (x) I6; the invariance ideal is the derived algebra
    span{t4, t5, t6}.
    """
    alg = upper_triangular6()
    M2 = np.array([[-0.5, 0.5], [0.5, 0.25]])
    A = np.kron(M2, np.eye(6))
    fams = [
        AdjointFamily(1, 0.5, {"W1": 1.0}, "X1"),
        AdjointFamily(1, -1.0, {"X2": 1.0}, "X1"),
        AdjointFamily(1, 0.5, {"W2": 1.0}, "X2"),
        AdjointFamily(2, 0.5, {"X2": 1.0}, "X1"),
        AdjointFamily(2, 0.25, {"X1": 1.0, "W1": 1.0}, "X2"),
    ]
    return WordSeriesSystem(alg, n=2, r=2, A=A, families=fams,
                            invariance_ideal=derived_algebra(alg), radius=1.0,
                            name="uptri-adjoint-pair")


def ex61_signal(horizon: int) -> ExoSignal:
    """The bounded ideal-valued driving pair.

    W1[k+1] = 2 (1 - k 1.1^{-0.5 k}) sin(10 k) W0,
    W2[k+1] = (2 - k^2 1.1^{-2 k}) cos(20 k) W0, both started at W0, with
    W0 = t4 + 7 t5 + 6 t6 in the derived algebra.
    """
    samples = np.zeros((horizon + 1, 12))
    samples[0, 0:6] = EX61_W0
    samples[0, 6:12] = EX61_W0
    for k in range(horizon):
        c1 = 2.0 * (1.0 - k * 1.1 ** (-0.5 * k)) * np.sin(10.0 * k)
        c2 = (2.0 - k ** 2 * 1.1 ** (-2.0 * k)) * np.cos(20.0 * k)
        samples[k + 1, 0:6] = c1 * EX61_W0
        samples[k + 1, 6:12] = c2 * EX61_W0
    return ExoSignal("samples", r=2, d=6, samples=samples, ideal_flag=True)


def _example_61(seed: int = 0, horizon: Optional[int] = None) -> Scenario:
    h = horizon if horizon is not None else 200
    return Scenario("example-6.1", ex61_system(), ex61_signal(h), EX61_X0.copy(),
                    h, M=10.0, route="solvable",
                    notes=["initial condition is a fixed representative choice; "
                           "the source run shows decay qualitatively"])


def heisenberg_deadbeat_system() -> WordSeriesSystem:
    alg = heisenberg()
    A = np.array([[0.0, 0.5, 0.0],
                  [0.0, 0.0, 0.0],
                  [0.25, -0.5, 0.0]])
    terms = [
        Term(Word((("X", 1), ("W", 1))), np.array([0.6])),
        Term(Word((("W", 1), ("X", 1), ("W", 1))), np.array([-0.3])),
    ]
    return WordSeriesSystem(alg, n=1, r=1, A=A, terms=terms,
                            invariance_ideal=alg.full_subspace(), radius=2.0,
                            name="heisenberg-deadbeat")


def uptri_deadbeat_system() -> WordSeriesSystem:
    alg = upper_triangular6()
    A = np.zeros((6, 6))
    A[0, 1] = 1.0   # nilpotent block on the quotient coordinates t1..t3
    A[1, 2] = 1.0
    A[3, 0] = 0.7   # cross feed into the ideal
    A[4, 3] = 0.5   # nilpotent block inside the ideal, respecting span{t6}
    A[5, 4] = 0.3
    terms = [
        Term(Word((("X", 1), ("W", 1))), np.array([1.0])),
        Term(Word((("W", 1), ("W", 1), ("X", 1))), np.array([-0.25])),
        Term(Word((("X", 1), ("W", 1), ("X", 1))), np.array([0.1])),
    ]
    return WordSeriesSystem(alg, n=1, r=1, A=A, terms=terms,
                            invariance_ideal=derived_algebra(alg), radius=2.0,
                            name="uptri-deadbeat")


def ideal_valued_samples(sys: WordSeriesSystem, count: int,
                         rng: np.random.Generator, scale: float = 1.0) -> ExoSignal:
    """Bounded random signal with every slot inside the invariance ideal."""
    B = sys.ideal.onb
    samples = np.zeros((count, sys.r * sys.d))
    for k in range(count):
        for j in range(sys.r):
            samples[k, j * sys.d:(j + 1) * sys.d] = B @ rng.standard_normal(B.shape[1]) * scale
    return ExoSignal("samples", sys.r, sys.d, samples=samples, ideal_flag=True)


def _heisenberg_deadbeat(seed: int = 0, horizon: Optional[int] = None) -> Scenario:
    sys = heisenberg_deadbeat_system()
    rng = np.random.default_rng(seed)
    h = horizon if horizon is not None else 8
    sig = ideal_valued_samples(sys, h + 1, rng)
    x0 = rng.standard_normal(3)
    return Scenario("heisenberg-deadbeat", sys, sig, x0, h, M=5.0, route="deadbeat")


def _uptri_deadbeat(seed: int = 0, horizon: Optional[int] = None) -> Scenario:
    sys = uptri_deadbeat_system()
    rng = np.random.default_rng(seed)
    h = horizon if horizon is not None else 16
    sig = ideal_valued_samples(sys, h + 1, rng)
    x0 = rng.standard_normal(6)
    return Scenario("uptri-deadbeat", sys, sig, x0, h, M=5.0, route="deadbeat")


BUILTINS = {
    "example-4.1": _example_41,
    "example-6.1": _example_61,
    "heisenberg-deadbeat": _heisenberg_deadbeat,
    "uptri-deadbeat": _uptri_deadbeat,
}


def builtin_scenario(name: str, seed: int = 0, horizon: Optional[int] = None) -> Scenario:
    if name not in BUILTINS:
        raise ScenarioError(f"unknown builtin {name!r}; choose from {sorted(BUILTINS)}")
    return BUILTINS[name](seed=seed, horizon=horizon)


# -- scenario files ------------------------------------------------------------


def _require(data: dict, key: str, kind=None):
    if key not in data:
        raise ScenarioError(f"scenario field {key!r} is missing")
    val = data[key]
    if kind is not None and not isinstance(val, kind):
        raise ScenarioError(f"scenario field {key!r} has wrong type "
                            f"({type(val).__name__})")
    return val


def scenario_from_dict(data: dict, seed: int = 0) -> Scenario:
    alg_spec = _require(data, "algebra")
    if isinstance(alg_spec, str):
        cat = catalog_algebras()
        if alg_spec not in cat:
            raise ScenarioError(f"unknown catalog algebra {alg_spec!r}; "
                                f"choose from {sorted(cat)} or inline a definition")
        alg = cat[alg_spec]
    elif isinstance(alg_spec, dict):
        try:
            alg = algebra_from_dict(alg_spec)
        except AlgebraLoadError as exc:
            raise ScenarioError(f"algebra: {exc}") from exc
    else:
        raise ScenarioError("scenario field 'algebra' must be a name or an object")
    n = _require(data, "n", int)
    r = _require(data, "r", int)
    d = alg.dim
    A = np.asarray(_require(data, "A", list), dtype=float)
    if A.shape != (n * d, n * d):
        raise ScenarioError(f"'A' must be {n * d}x{n * d} row-major")
    terms = []
    for idx, t in enumerate(data.get("terms", [])):
        try:
            letters = tuple(parse_letter(l) for l in t["letters"])
            coeff = np.asarray(t["coeff"], dtype=float)
            terms.append(Term(Word(letters), coeff))
        except (KeyError, SystemSpecError, ValueError) as exc:
            raise ScenarioError(f"terms[{idx}]: {exc}") from exc
    fams = []
    for idx, f in enumerate(data.get("families", [])):
        try:
            fams.append(AdjointFamily(int(f["out_slot"]), float(f["scale"]),
                                      f["base"], f["target"],
                                      f.get("cutoff"), f.get("tol", 1e-12)))
        except (KeyError, SystemSpecError, ValueError) as exc:
            raise ScenarioError(f"families[{idx}]: {exc}") from exc
    ideal_spec = data.get("ideal", "full")
    if ideal_spec == "full":
        ideal = alg.full_subspace()
    elif ideal_spec == "derived":
        ideal = derived_algebra(alg)
    elif isinstance(ideal_spec, dict) and "labels" in ideal_spec:
        try:
            ideal = alg.span_labels(ideal_spec["labels"])
        except KeyError as exc:
            raise ScenarioError(f"ideal: {exc}") from exc
    else:
        raise ScenarioError("'ideal' must be 'full', 'derived', or {'labels': [...]}")
    try:
        system = WordSeriesSystem(alg, n, r, A, terms, fams, invariance_ideal=ideal,
                                  radius=float(data.get("radius", 1.0)),
                                  name=data.get("name", ""))
    except SystemSpecError as exc:
        raise ScenarioError(str(exc)) from exc
    sig_spec = data.get("signal", {"kind": "zero"})
    kind = sig_spec.get("kind", "zero")
    try:
        if kind == "zero":
            signal = ExoSignal.zero(r, d)
        elif kind == "geometric":
            signal = ExoSignal("geometric", r, d, base=sig_spec["base"],
                               ratio=float(sig_spec.get("ratio", 1.0)),
                               ideal_flag=bool(sig_spec.get("ideal", False)))
        elif kind == "samples":
            signal = ExoSignal("samples", r, d, samples=np.asarray(sig_spec["samples"], dtype=float),
                               ideal_flag=bool(sig_spec.get("ideal", False)))
        else:
            raise ScenarioError(f"signal: unknown kind {kind!r}")
    except (KeyError, SystemSpecError) as exc:
        raise ScenarioError(f"signal: {exc}") from exc
    x0 = np.asarray(data.get("x0", np.zeros(n * d)), dtype=float)
    if x0.shape != (n * d,):
        raise ScenarioError(f"'x0' must have length {n * d}")
    horizon = int(data.get("horizon", 50))
    if horizon < 0:
        raise ScenarioError("'horizon' must be nonnegative")
    return Scenario(data.get("name", "scenario"), system, signal, x0, horizon,
                    M=float(data.get("M", max(1.0, float(np.linalg.norm(x0))))),
                    route=data.get("route", "auto"))


def load_scenario(path, seed: int = 0) -> Scenario:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ScenarioError("scenario file must contain a JSON object")
    return scenario_from_dict(data, seed=seed)


# -- trajectory export ----------------------------------------------------------


def trajectory_columns(sys: WordSeriesSystem) -> list:
    cols = ["k"] + sys.coordinate_names() + ["norm"]
    cols += [f"qnorm{i}" for i in range(len(sys.projections))]
    return cols


def _fmt(v: float) -> str:
    return repr(float(v))


def write_trajectory_csv(path, scenario: Scenario, traj: Trajectory, seed: int) -> None:
    cols = trajectory_columns(scenario.system)
    lines = [f"# liestab trajectory for scenario {scenario.name}",
             f"# seed={seed} horizon={traj.horizon} diverged={traj.diverged}",
             "# " + ",".join(cols),
             ",".join(cols)]
    for k in range(traj.states.shape[0]):
        row = [str(k)] + [_fmt(v) for v in traj.states[k]] + [_fmt(traj.norms[k])]
        row += [_fmt(v) for v in traj.quotient_norms[k]]
        lines.append(",".join(row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_trajectory_json(path, scenario: Scenario, traj: Trajectory, seed: int) -> None:
    payload = {
        "scenario": scenario.name,
        "seed": seed,
        "horizon": traj.horizon,
        "diverged": traj.diverged,
        "first_bad_index": traj.first_bad_index,
        "columns": trajectory_columns(scenario.system),
        "rows": [[k] + [float(v) for v in traj.states[k]] + [float(traj.norms[k])]
                 + [float(v) for v in traj.quotient_norms[k]]
                 for k in range(traj.states.shape[0])],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")
