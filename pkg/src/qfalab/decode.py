"""Decoding probability bounds for classical data sent in m qubits.

For X encoded into m-qubit states and Y any measurement outcome: the MAP
decoder succeeds with probability at least 2^-H(X|Y), and no decoder beats
the total mass of the 2^m most likely values of X.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .channels import ProjectiveMeasurement, check_projector_family, random_measurement
from .density import (
    DensityMatrix,
    as_matrix,
    dagger,
    derive_seed,
    pure_state,
    random_density,
    random_pure_vector,
    random_unitary,
    validate_density,
)
from .entropy_lab import holevo_chi
from .errors import DimensionMismatch, NotADistribution, NotOrthogonalFamily, NotProjective
from .joint import JointDistribution, mutual_information

BOUND_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class EnsembleItem:
    label: str
    prob: float
    state: DensityMatrix
    # optional pure decomposition: list of (weight, state vector)
    decomposition: tuple | None = None


@dataclass(frozen=True, eq=False)
class Ensemble:
    m: int
    items: tuple

    def __post_init__(self):
        items = tuple(self.items)
        probs = np.array([it.prob for it in items], dtype=float)
        if probs.size == 0 or np.any(probs < -BOUND_TOL) or abs(probs.sum() - 1.0) > BOUND_TOL:
            raise NotADistribution(f"ensemble probabilities must sum to 1 (sum {probs.sum():.12g})")
        dim = 2**self.m
        for it in items:
            if it.state.dim != dim:
                raise DimensionMismatch(f"state for {it.label!r} has dimension {it.state.dim}, expected {dim}")
            if it.decomposition is not None:
                rebuilt = sum(q * np.outer(v, np.conj(v)) for q, v in it.decomposition)
                err = np.max(np.abs(rebuilt - it.state.mat))
                if err > 1e-8:
                    raise ValueError(f"pure decomposition of {it.label!r} is off by {err:.3e}")
        object.__setattr__(self, "items", items)

    @property
    def dim(self) -> int:
        return 2**self.m

    @property
    def labels(self) -> tuple:
        return tuple(it.label for it in self.items)

    @property
    def probs(self) -> np.ndarray:
        return np.array([it.prob for it in self.items])


def build_joint(ens: Ensemble, meas: ProjectiveMeasurement, embedding: np.ndarray | None = None) -> JointDistribution:
    """Pr[x, j] = p_x Tr(P_j rho_x).

    ``embedding`` is an isometry from the 2^m code space into a larger
    decoding space (ancilla); states are mapped through it before measuring.
    """
    dim = ens.dim
    if embedding is not None:
        v = np.asarray(embedding, dtype=np.complex128)
        if v.shape[1] != dim or np.max(np.abs(dagger(v) @ v - np.eye(dim))) > 1e-9:
            raise DimensionMismatch("embedding must be an isometry out of the code space")
        dim = v.shape[0]
    if meas.dim != dim:
        raise DimensionMismatch(f"measurement dimension {meas.dim}, expected {dim}")
    mass = np.empty((len(ens.items), len(meas.projectors)))
    for i, it in enumerate(ens.items):
        rho = it.state.mat if embedding is None else v @ it.state.mat @ dagger(v)
        mass[i] = [it.prob * float(np.real(np.vdot(p, rho))) for p in meas.projectors]
    mass = np.clip(mass, 0.0, None)
    return JointDistribution(ens.labels, tuple(range(len(meas.projectors))), mass / mass.sum())


@dataclass(frozen=True)
class DecoderTable:
    mapping: dict

    def __call__(self, y):
        return self.mapping[y]


def map_decoder(joint: JointDistribution) -> DecoderTable:
    """Most likely x for each y; ties and zero-probability y go to the smallest label."""
    default = min(joint.labels_x)
    mapping = {}
    for j, y in enumerate(joint.labels_y):
        col = joint.mass[:, j]
        best = col.max()
        if best <= 0:
            mapping[y] = default
            continue
        mapping[y] = min(x for x, v in zip(joint.labels_x, col) if v >= best * (1 - 1e-12))
    return DecoderTable(mapping)


def top_mass(dist: Sequence[float], d: int) -> float:
    """P(X, d): total probability of the d most likely outcomes."""
    if d < 0:
        raise ValueError("d must be nonnegative")
    p = np.sort(np.asarray(dist, dtype=float))[::-1]
    return float(min(p[:d].sum(), 1.0))


@dataclass
class DecodeReport:
    success: float
    map_lower: float
    cap_upper: float
    both_hold: bool


def decode_success(joint: JointDistribution, table: DecoderTable) -> float:
    row = {x: i for i, x in enumerate(joint.labels_x)}
    return float(sum(joint.mass[row[table(y)], j] for j, y in enumerate(joint.labels_y)))


def decode_report(joint: JointDistribution, table: DecoderTable, m: int, is_map: bool = True) -> DecodeReport:
    missing = set(joint.labels_y) - set(table.mapping)
    if missing:
        raise ValueError(f"decoder table misses outcomes {sorted(missing)[:5]}")
    success = decode_success(joint, table)
    lower = 2.0 ** (-joint.conditional_entropy_x_given_y())
    upper = top_mass(joint.marginal_x, 2**m)
    ok = success <= upper + BOUND_TOL
    if is_map:
        ok = ok and success >= lower - BOUND_TOL
    return DecodeReport(success, lower, upper, ok)


def qubit_lower_bound(dist: Sequence[float], success: float) -> float:
    """log2 of the fewest outcomes whose mass reaches ``success``.

    Any code achieving ``success`` needs 2^m at least that many.
    """
    p = np.sort(np.asarray(dist, dtype=float))[::-1]
    reach = np.cumsum(p)
    d = int(np.searchsorted(reach, success - 1e-12) + 1)
    return math.log2(min(d, p.size))


def projection_sum_check(codewords: Sequence, projectors: Sequence, m: int) -> tuple[float, bool]:
    """sum_x ||P_x phi_x||^2 for codewords in a 2^m-dimensional subspace.

    ``projectors`` must be mutually orthogonal (not necessarily complete).
    """
    if len(codewords) != len(projectors):
        raise ValueError("need one projector per codeword")
    vecs = [np.asarray(v, dtype=np.complex128).ravel() for v in codewords]
    projs = [as_matrix(p) for p in projectors]
    dim = projs[0].shape[0]
    if any(v.size != dim for v in vecs):
        raise DimensionMismatch("codeword and projector dimensions differ")
    try:
        check_projector_family(projs, complete=False)
    except NotProjective as exc:
        raise NotOrthogonalFamily(str(exc)) from exc
    span = np.linalg.matrix_rank(np.stack(vecs, axis=1), tol=1e-9)
    if span > 2**m:
        raise DimensionMismatch(f"codewords span {span} dimensions, more than 2^{m}")
    vecs = [v / np.linalg.norm(v) for v in vecs]
    total = float(sum(np.linalg.norm(p @ v) ** 2 for p, v in zip(projs, vecs)))
    return total, total <= 2**m + BOUND_TOL


# ---------------------------------------------------------------------------
# worked example and sweeps


@dataclass
class GeometricSummary:
    n: int
    m: int
    success: float
    mutual_information: float
    chi: float
    h_x_given_y: float
    map_lower: float
    cap_upper: float
    prob_qubit_bound: float  # log2 of the fewest strings covering the success probability
    holevo_qubit_bound: float  # chi

    def to_dict(self) -> dict:
        return asdict(self)


def geometric_group(x: str) -> int:
    """Position of the first 1 in x; len(x) for the all-zero string."""
    i = x.find("1")
    return len(x) if i < 0 else i


def geometric_example(n: int) -> tuple[Ensemble, ProjectiveMeasurement, GeometricSummary]:
    """n uniform bits sent as one of n + 1 orthogonal states.

    Half the strings map to |0>, a quarter to |1>, and so on; the all-zero
    string shares the last weight with 0...01.
    """
    if not 1 <= n <= 12:
        raise ValueError("geometric example supports 1 <= n <= 12")
    m = max(1, math.ceil(math.log2(n + 1)))
    dim = 2**m
    basis = np.eye(dim, dtype=np.complex128)
    states = [pure_state(basis[j]) for j in range(n + 1)]
    prob = 2.0**-n
    items = []
    for bits in range(2**n):
        x = format(bits, f"0{n}b")
        g = geometric_group(x)
        items.append(EnsembleItem(x, prob, states[g], ((1.0, basis[g]),)))
    ens = Ensemble(m, tuple(items))
    meas = ProjectiveMeasurement.computational(dim)
    joint = build_joint(ens, meas)
    rep = decode_report(joint, map_decoder(joint), m, is_map=True)
    chi = holevo_chi([(it.prob, it.state) for it in items], meas).chi
    summary = GeometricSummary(
        n=n,
        m=m,
        success=rep.success,
        mutual_information=mutual_information(joint),
        chi=chi,
        h_x_given_y=joint.conditional_entropy_x_given_y(),
        map_lower=rep.map_lower,
        cap_upper=rep.cap_upper,
        prob_qubit_bound=qubit_lower_bound(joint.marginal_x, rep.success),
        holevo_qubit_bound=chi,
    )
    return ens, meas, summary


def geometric_table(n_max: int) -> list[dict]:
    return [geometric_example(n)[2].to_dict() for n in range(1, n_max + 1)]


def saturating_code(labels: Sequence[str], probs: Sequence[float], m: int) -> tuple[Ensemble, ProjectiveMeasurement]:
    """Send the 2^m most likely labels to distinct basis states, the rest to |0>."""
    dim = 2**m
    order = sorted(range(len(labels)), key=lambda i: (-probs[i], labels[i]))
    slot = {i: 0 for i in range(len(labels))}
    for rank, i in enumerate(order[:dim]):
        slot[i] = rank
    basis = np.eye(dim, dtype=np.complex128)
    items = tuple(EnsembleItem(labels[i], float(probs[i]), pure_state(basis[slot[i]])) for i in range(len(labels)))
    return Ensemble(m, items), ProjectiveMeasurement.computational(dim)


@dataclass
class DecodeSweepReport:
    trials: int
    violations: int
    worst_lower_margin: float  # min success - 2^-H(X|Y)
    worst_upper_margin: float  # min P(X, 2^m) - success
    rows: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["holds"] = self.holds
        return d


def random_ensemble(rng: np.random.Generator, n_bits: int, m: int) -> Ensemble:
    labels = [format(b, f"0{n_bits}b") for b in range(2**n_bits)]
    shape = rng.choice([0.2, 1.0, 5.0])
    probs = rng.dirichlet(np.full(len(labels), shape))
    probs = probs / probs.sum()
    dim = 2**m
    items = []
    for x, p in zip(labels, probs):
        if rng.random() < 0.5:
            vec = random_pure_vector(dim, rng)
            items.append(EnsembleItem(x, float(p), pure_state(vec), ((1.0, vec / np.linalg.norm(vec)),)))
        else:
            rank = int(rng.integers(1, dim + 1))
            items.append(EnsembleItem(x, float(p), random_density(dim, int(rng.integers(2**63)), rank=rank)))
    return Ensemble(m, tuple(items))


def theorem_sweep(trials: int, seed: int) -> DecodeSweepReport:
    """Random ensembles (up to 16 labels, m <= 3) measured by random projective
    measurements, a third of them on the code space extended by a qubit ancilla."""
    violations = 0
    lo = hi = math.inf
    rows = []
    for t in range(trials):
        rng = np.random.default_rng(derive_seed(seed, t))
        n_bits = int(rng.integers(1, 5))
        m = int(rng.integers(1, 4))
        ens = random_ensemble(rng, n_bits, m)
        embedding = None
        dim = ens.dim
        if rng.random() < 1 / 3:
            dim = 2 * ens.dim
            embedding = random_unitary(dim, int(rng.integers(2**63)))[:, : ens.dim]
        meas = random_measurement(dim, int(rng.integers(2**63)))
        joint = build_joint(ens, meas, embedding)
        rep = decode_report(joint, map_decoder(joint), m, is_map=True)
        violations += not rep.both_hold
        lo = min(lo, rep.success - rep.map_lower)
        hi = min(hi, rep.cap_upper - rep.success)
        rows.append({"trial": t, "n_bits": n_bits, "m": m, "ancilla": embedding is not None,
                     "success": rep.success, "map_lower": rep.map_lower, "cap_upper": rep.cap_upper})
    return DecodeSweepReport(trials, violations, lo, hi, rows)
