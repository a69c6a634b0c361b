"""Executable entropy checks: the basic facts about von Neumann entropy, the
mixing inequality, Holevo's chi, and entropy growth of automata fed random bits."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .automata import ALPHABET, LEFT_MARKER, RIGHT_MARKER, QfaSpec
from .channels import (
    BinaryObservable,
    Measure,
    ProjectiveMeasurement,
    Unitary,
    apply_steps,
    discrimination_success,
    helstrom_observable,
    random_measurement,
)
from .density import (
    DensityMatrix,
    binary_entropy,
    block_entropy,
    dagger,
    derive_seed,
    random_density,
    random_unitary,
    validate_density,
    von_neumann_entropy,
)
from .errors import DimensionMismatch, NotADistribution
from .joint import JointDistribution, fano_floor, mutual_information

INEQ_TOL = 1e-9
GROWTH_TOL = 1e-6

__all__ = [
    "EntropyTrajectory",
    "LemmaMixReport",
    "HolevoReport",
    "FactSuiteReport",
    "average_state_trajectory",
    "check_entropy_growth",
    "lemma_mix_check",
    "lemma_mix_sweep",
    "holevo_chi",
    "holevo_sweep",
    "mutual_information",
    "fano_floor",
    "fact_suite",
]


@dataclass
class EntropyTrajectory:
    points: list  # (k, entropy in bits)
    p_claimed: float | None = None
    # success of "apply rm, then accept vs rest" at telling U_0 from U_1 at step k
    discrimination: list = field(default_factory=list)
    halted_mass: list = field(default_factory=list)

    @property
    def entropies(self) -> list[float]:
        return [s for _, s in self.points]


def _mix(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    return validate_density(0.5 * (a.mat + b.mat))


def _halting_blocks(qfa: QfaSpec, mat: np.ndarray):
    blocks = []
    for idx in qfa.index_arrays():
        blocks.append(mat[np.ix_(idx, idx)] if idx.size else np.zeros((0, 0)))
    return blocks


def _accept_observable(qfa: QfaSpec) -> BinaryObservable:
    p0 = np.zeros((qfa.dim, qfa.dim), dtype=np.complex128)
    acc = sorted(qfa.accepting)
    p0[acc, acc] = 1.0
    return BinaryObservable.from_projector(p0, qfa.superops[RIGHT_MARKER].steps)


def average_state_trajectory(qfa: QfaSpec, n: int) -> EntropyTrajectory:
    """Entropy of the expected state after k uniformly random letters, k = 0..n.

    The state is kept as a direct sum of the running non-halting block and,
    for every step and outcome, the accept and reject blocks produced there.
    Halted blocks are frozen, so their entropy is accumulated once.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    dim = qfa.dim
    non = np.array(sorted(qfa.non_halting), dtype=int)
    obs = _accept_observable(qfa)

    def advance(state_full, symbols):
        out = sum(apply_steps(state_full, qfa.superops[s].steps) for s in symbols) / len(symbols)
        acc, rej, cont = _halting_blocks(qfa, out)
        nxt = np.zeros_like(out)
        if non.size:
            nxt[np.ix_(non, non)] = cont
        return block_entropy(acc) + block_entropy(rej), float(np.trace(acc).real + np.trace(rej).real), nxt

    frozen, halted, state = advance(qfa.start_state(), [LEFT_MARKER])
    traj = EntropyTrajectory(points=[(0, frozen + block_entropy(state))], halted_mass=[halted])
    for k in range(1, n + 1):
        mass = float(np.trace(state).real)
        if mass > INEQ_TOL:
            norm = state / mass
            branches = [validate_density(_herm(apply_steps(norm, qfa.superops[a].steps))) for a in ALPHABET]
            traj.discrimination.append((k, discrimination_success(branches[0], branches[1], obs)))
        else:
            traj.discrimination.append((k, None))
        d_entropy, d_halted, state = advance(state, ALPHABET)
        frozen += d_entropy
        halted += d_halted
        traj.points.append((k, frozen + block_entropy(state)))
        traj.halted_mass.append(halted)
    return traj


def _herm(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + dagger(a))


def check_entropy_growth(qfa: QfaSpec, p: float, n: int) -> tuple[bool, list[float]]:
    """Compare S(rho_k) with (1 - H(p)) k for k = 0..n; returns (holds, margins)."""
    if not 0.5 < p <= 1.0:
        raise ValueError("p must lie in (1/2, 1]")
    rate = 1.0 - binary_entropy(p)
    traj = average_state_trajectory(qfa, n)
    margins = [s - rate * k for k, s in traj.points]
    return all(m >= -GROWTH_TOL for m in margins), margins


# ---------------------------------------------------------------------------
# mixing inequality


@dataclass
class LemmaMixReport:
    lhs: float
    rhs: float
    p: float
    holds: bool


def _lemma_report(lhs: float, avg_parts: float, p: float) -> LemmaMixReport:
    rhs = avg_parts + fano_floor(p)
    return LemmaMixReport(lhs, rhs, p, lhs >= rhs - INEQ_TOL)


def lemma_mix_check(sigma0: DensityMatrix, sigma1: DensityMatrix, obs: BinaryObservable) -> LemmaMixReport:
    """S(mix) against the average entropy plus 1 - H(p), p the success of ``obs``.

    If ``obs`` does worse than a coin its outcome labels are swapped first.
    """
    if sigma0.dim != sigma1.dim or obs.dim != sigma0.dim:
        raise DimensionMismatch("states and observable must share a dimension")
    p = discrimination_success(sigma0, sigma1, obs)
    p = max(p, 1.0 - p)
    lhs = von_neumann_entropy(_mix(sigma0, sigma1))
    avg = 0.5 * (von_neumann_entropy(sigma0) + von_neumann_entropy(sigma1))
    return _lemma_report(lhs, avg, min(p, 1.0))


@dataclass
class SweepReport:
    trials: int
    checks: int
    worst_margin: float
    violations: int
    rows: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["holds"] = self.holds
        return d


@dataclass
class ObservableBatch:
    """``count`` random binary observables stored as stacked arrays.

    Observable j applies unitary ``pre[j]``, then (if ``pinched[j]``) a
    non-selective measurement whose projectors group the columns of
    ``basis[j]`` by ``groups[j]``, then tests outcome 0 = ``outcome0[j]``.
    """

    pre: np.ndarray
    basis: np.ndarray
    groups: np.ndarray
    pinched: np.ndarray
    outcome0: np.ndarray

    def observable(self, j: int) -> BinaryObservable:
        steps = []
        if self.pinched[j]:
            g = self.groups[j]
            blocks = [list(np.flatnonzero(g == v)) for v in np.unique(g)]
            steps = [Unitary(self.pre[j]), Measure(ProjectiveMeasurement.from_basis(self.basis[j], blocks))]
        return BinaryObservable.from_projector(self.outcome0[j], steps)

    def successes(self, sigma0: DensityMatrix, sigma1: DensityMatrix) -> np.ndarray:
        return 0.5 * self._prob(sigma0.mat, self.outcome0) + 0.5 * self._prob(sigma1.mat, np.eye(sigma0.dim) - self.outcome0)

    def _prob(self, rho: np.ndarray, outcome: np.ndarray) -> np.ndarray:
        v, w = self.pre, self.basis
        moved = v @ rho @ np.conj(np.swapaxes(v, 1, 2))
        in_basis = np.conj(np.swapaxes(w, 1, 2)) @ moved @ w
        same = self.groups[:, :, None] == self.groups[:, None, :]
        pinched = w @ np.where(same, in_basis, 0.0) @ np.conj(np.swapaxes(w, 1, 2))
        state = np.where(self.pinched[:, None, None], pinched, rho[None])
        return np.real(np.einsum("kij,kji->k", outcome, state))


def _haar_batch(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((count, dim, dim)) + 1j * rng.standard_normal((count, dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    return q * (d / np.abs(d))[:, None, :]


def random_observable_batch(dim: int, count: int, rng: np.random.Generator) -> ObservableBatch:
    """Random projective binary observables; odd-indexed ones get a random
    unitary and a random non-selective measurement prepended."""
    u = _haar_batch(dim, count, rng)
    ranks = rng.integers(0, dim + 1, size=count)
    keep = (np.arange(dim)[None, :] < ranks[:, None]).astype(float)
    outcome0 = (u * keep[:, None, :]) @ np.conj(np.swapaxes(u, 1, 2))
    groups = np.sort(rng.integers(0, dim, size=(count, dim)), axis=1)
    pinched = np.arange(count) % 2 == 1
    return ObservableBatch(_haar_batch(dim, count, rng), _haar_batch(dim, count, rng), groups, pinched, outcome0)


def lemma_mix_sweep(dim: int, trials: int, seed: int, random_observables: int = 100) -> SweepReport:
    """Random pairs of states, each checked with the Helstrom observable and
    ``random_observables`` random ones (half of them with prepended steps)."""
    checks = violations = 0
    worst = math.inf
    rows = []
    for t in range(trials):
        rng = np.random.default_rng(derive_seed(seed, t))
        ranks = rng.integers(1, dim + 1, size=2)
        s0 = random_density(dim, int(rng.integers(2**63)), rank=int(ranks[0]))
        s1 = random_density(dim, int(rng.integers(2**63)), rank=int(ranks[1]))
        lhs = von_neumann_entropy(_mix(s0, s1))
        avg = 0.5 * (von_neumann_entropy(s0) + von_neumann_entropy(s1))
        helstrom, _ = helstrom_observable(s0, s1)
        ps = [discrimination_success(s0, s1, helstrom)]
        if random_observables:
            ps.extend(random_observable_batch(dim, random_observables, rng).successes(s0, s1))
        trial_worst = math.inf
        for p in ps:
            rep = _lemma_report(lhs, avg, min(max(p, 1.0 - p), 1.0))
            trial_worst = min(trial_worst, rep.lhs - rep.rhs)
            checks += 1
            violations += not rep.holds
        worst = min(worst, trial_worst)
        rows.append({"trial": t, "lhs": lhs, "avg_entropy": avg, "helstrom_p": ps[0], "worst_margin": trial_worst})
    return SweepReport(trials, checks, worst, violations, rows)


# ---------------------------------------------------------------------------
# Holevo


@dataclass
class HolevoReport:
    chi: float
    mutual_information: float
    holds: bool


def holevo_chi(ensemble: Sequence[tuple[float, DensityMatrix]], measurement: ProjectiveMeasurement) -> HolevoReport:
    """chi = S(sum p_x sigma_x) - sum p_x S(sigma_x), against I(X:Y) for ``measurement``."""
    probs = np.array([p for p, _ in ensemble], dtype=float)
    if probs.size == 0 or np.any(probs < -INEQ_TOL) or abs(probs.sum() - 1.0) > INEQ_TOL:
        raise NotADistribution("ensemble weights must form a distribution")
    dims = {s.dim for _, s in ensemble} | {measurement.dim}
    if len(dims) != 1:
        raise DimensionMismatch(f"ensemble and measurement dimensions differ: {sorted(dims)}")
    avg = validate_density(sum(p * s.mat for p, s in ensemble))
    chi = von_neumann_entropy(avg) - sum(p * von_neumann_entropy(s) for p, s in ensemble)
    mass = np.array([[p * float(np.real(np.vdot(P, s.mat))) for P in measurement.projectors] for p, s in ensemble])
    joint = JointDistribution(tuple(range(len(ensemble))), tuple(range(len(measurement.projectors))), mass / mass.sum())
    info = mutual_information(joint)
    return HolevoReport(chi, info, info <= chi + INEQ_TOL)


def holevo_sweep(trials: int, seed: int) -> SweepReport:
    """Random ensembles (2-8 states, dimension 2-8) against random measurements."""
    worst = math.inf
    violations = 0
    rows = []
    for t in range(trials):
        rng = np.random.default_rng(derive_seed(seed, t))
        dim = int(rng.integers(2, 9))
        size = int(rng.integers(2, 9))
        probs = rng.dirichlet(np.ones(size))
        ens = [(float(p), random_density(dim, int(rng.integers(2**63)), rank=int(rng.integers(1, dim + 1)))) for p in probs]
        total = sum(p for p, _ in ens)
        ens = [(p / total, s) for p, s in ens]
        rep = holevo_chi(ens, random_measurement(dim, int(rng.integers(2**63))))
        margin = rep.chi - rep.mutual_information
        worst = min(worst, margin)
        violations += not rep.holds
        rows.append({"trial": t, "dim": dim, "size": size, "chi": rep.chi, "mutual_information": rep.mutual_information})
    return SweepReport(trials, trials, worst, violations, rows)


# ---------------------------------------------------------------------------
# facts


@dataclass
class FactSuiteReport:
    dim: int
    trials: int
    max_entropy_excess: float  # max S(rho) - log2 dim
    max_unitary_gap: float  # max |S(U rho U^dagger) - S(rho)|
    min_measurement_gain: float  # min S(sum P rho P) - S(rho)
    bound_holds: bool
    unitary_holds: bool
    monotone_holds: bool
    rows: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.bound_holds and self.unitary_holds and self.monotone_holds

    def to_dict(self) -> dict:
        d = asdict(self)
        d["holds"] = self.holds
        return d


def fact_suite(dim: int, trials: int, seed: int) -> FactSuiteReport:
    """Entropy bound log2(dim), unitary invariance and measurement monotonicity
    on ``trials`` random (state, unitary, measurement) triples."""
    if not 1 <= dim <= 16:
        raise ValueError("fact_suite supports 1 <= dim <= 16")
    excess = gap = -math.inf
    gain = math.inf
    rows = []
    for t in range(trials):
        rng = np.random.default_rng(derive_seed(seed, t))
        rho = random_density(dim, int(rng.integers(2**63)), rank=int(rng.integers(1, dim + 1)))
        u = Unitary(random_unitary(dim, int(rng.integers(2**63))))
        meas = random_measurement(dim, int(rng.integers(2**63)))
        s = von_neumann_entropy(rho)
        s_u = von_neumann_entropy(validate_density(_herm(u.conjugate(rho.mat))))
        s_m = von_neumann_entropy(validate_density(_herm(meas.pinch(rho.mat))))
        excess = max(excess, s - math.log2(dim))
        gap = max(gap, abs(s_u - s))
        gain = min(gain, s_m - s)
        rows.append({"trial": t, "entropy": s, "entropy_unitary": s_u, "entropy_measured": s_m})
    return FactSuiteReport(
        dim, trials, excess, gap, gain,
        excess <= INEQ_TOL, gap <= INEQ_TOL, gain >= -INEQ_TOL, rows,
    )
