"""Superoperators built from unitaries and projective measurements, and
binary state discrimination."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .density import (
    DensityMatrix,
    as_matrix,
    dagger,
    eigendecompose,
    matrix_from_json,
    matrix_to_json,
    random_unitary,
    validate_density,
)
from .errors import DimensionMismatch, NotProjective, NotUnitary

STRUCT_TOL = 1e-9


def diagonal_projector(dim: int, indices) -> np.ndarray:
    p = np.zeros((dim, dim), dtype=np.complex128)
    idx = list(indices)
    p[idx, idx] = 1.0
    return p


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


def check_projector_family(projectors: Sequence[np.ndarray], complete: bool, tol: float = STRUCT_TOL) -> None:
    """Raise :class:`NotProjective` unless the family is Hermitian, idempotent,
    mutually orthogonal and (if ``complete``) sums to the identity."""
    if not projectors:
        raise NotProjective("empty projector family")
    dim = projectors[0].shape[0]
    for j, p in enumerate(projectors):
        if p.shape != (dim, dim):
            raise DimensionMismatch(f"projector {j} has shape {p.shape}, expected {(dim, dim)}")
        err = np.max(np.abs(p - dagger(p)))
        if err > tol:
            raise NotProjective(f"projector {j} not Hermitian (error {err:.3e})")
        err = np.max(np.abs(p @ p - p))
        if err > tol:
            raise NotProjective(f"projector {j} not idempotent (error {err:.3e})")
    total = sum(projectors)
    if len(projectors) <= 16:
        for j in range(len(projectors)):
            for k in range(j + 1, len(projectors)):
                err = np.max(np.abs(projectors[j] @ projectors[k]))
                if err > tol:
                    raise NotProjective(f"projectors {j} and {k} not orthogonal (error {err:.3e})")
    else:
        # a sum of projectors is idempotent iff they are mutually orthogonal
        err = np.max(np.abs(total @ total - total))
        if err > tol:
            raise NotProjective(f"projectors not mutually orthogonal (error {err:.3e})")
    if complete:
        err = np.max(np.abs(total - np.eye(dim)))
        if err > tol:
            raise NotProjective(f"projectors do not sum to the identity (error {err:.3e})")


@dataclass(frozen=True, eq=False)
class ProjectiveMeasurement:
    """Complete family of orthogonal projectors.

    ``blocks`` is set when every projector is diagonal in the computational
    basis; it lets :meth:`pinch` use an elementwise mask.
    """

    projectors: tuple
    blocks: tuple | None = None

    def __post_init__(self):
        projs = tuple(_readonly(as_matrix(p)) for p in self.projectors)
        check_projector_family(list(projs), complete=True)
        object.__setattr__(self, "projectors", projs)

    def pinch(self, mat: np.ndarray) -> np.ndarray:
        """Non-selective measurement: sum_j P_j mat P_j."""
        if self.blocks is None:
            return sum(p @ mat @ p for p in self.projectors)
        label = np.empty(self.dim, dtype=int)
        for j, b in enumerate(self.blocks):
            label[list(b)] = j
        return np.where(label[:, None] == label[None, :], mat, 0.0)

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    @classmethod
    def trusted(cls, projectors, blocks=None) -> "ProjectiveMeasurement":
        """Build without validation; for families that are projective by construction."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "projectors", tuple(_readonly(p) for p in projectors))
        object.__setattr__(obj, "blocks", None if blocks is None else tuple(tuple(b) for b in blocks))
        return obj

    @classmethod
    def computational(cls, dim: int) -> "ProjectiveMeasurement":
        blocks = [[j] for j in range(dim)]
        return cls.trusted([diagonal_projector(dim, b) for b in blocks], blocks)

    @classmethod
    def from_partition(cls, dim: int, blocks: Sequence[Sequence[int]]) -> "ProjectiveMeasurement":
        """Projectors onto spans of disjoint sets of basis vectors covering range(dim)."""
        seen = sorted(i for b in blocks for i in b)
        if seen != list(range(dim)):
            raise NotProjective("blocks must partition the basis indices")
        return cls.trusted([diagonal_projector(dim, b) for b in blocks], blocks)

    @classmethod
    def from_basis(cls, basis: np.ndarray, groups: Sequence[Sequence[int]] | None = None) -> "ProjectiveMeasurement":
        """Projectors onto groups of columns of the unitary ``basis``."""
        dim = basis.shape[0]
        if groups is None:
            groups = [[j] for j in range(dim)]
        projs = []
        for g in groups:
            cols = basis[:, list(g)]
            projs.append(cols @ dagger(cols))
        return cls(tuple(projs))


def _as_permutation(u: np.ndarray) -> np.ndarray | None:
    """Index map ``pi`` with ``u e_i = e_pi(i)`` if ``u`` is a permutation matrix."""
    if np.any(u.imag != 0) or not np.all((u.real == 0) | (u.real == 1)):
        return None
    cols = np.count_nonzero(u.real, axis=0)
    rows = np.count_nonzero(u.real, axis=1)
    if np.any(cols != 1) or np.any(rows != 1):
        return None
    return np.argmax(u.real, axis=0)


@dataclass(frozen=True, eq=False)
class Unitary:
    matrix: np.ndarray

    def __post_init__(self):
        u = _readonly(as_matrix(self.matrix))
        perm = _as_permutation(u)
        if perm is None:
            err = np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0])))
            if err > STRUCT_TOL:
                raise NotUnitary(f"max |U^dagger U - I| = {err:.3e}")
        object.__setattr__(self, "matrix", u)
        object.__setattr__(self, "_inverse_perm", None if perm is None else np.argsort(perm))

    @classmethod
    def from_permutation(cls, perm) -> "Unitary":
        """Permutation unitary sending basis vector i to ``perm[i]``."""
        perm = np.asarray(perm)
        u = np.zeros((perm.size, perm.size), dtype=np.complex128)
        u[perm, np.arange(perm.size)] = 1.0
        return cls(u)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def conjugate(self, mat: np.ndarray) -> np.ndarray:
        """U mat U^dagger."""
        inv = self._inverse_perm
        if inv is not None:
            return mat[np.ix_(inv, inv)]
        return self.matrix @ mat @ dagger(self.matrix)


@dataclass(frozen=True, eq=False)
class Measure:
    measurement: ProjectiveMeasurement

    @property
    def dim(self) -> int:
        return self.measurement.dim


SuperoperatorStep = Union[Unitary, Measure]


@dataclass(frozen=True, eq=False)
class Superoperator:
    dim: int
    steps: tuple = ()

    def __post_init__(self):
        steps = tuple(self.steps)
        for k, step in enumerate(steps):
            if step.dim != self.dim:
                raise DimensionMismatch(f"step {k} has dimension {step.dim}, superoperator has {self.dim}")
        object.__setattr__(self, "steps", steps)

    @classmethod
    def identity(cls, dim: int) -> "Superoperator":
        return cls(dim, ())

    @classmethod
    def of_unitary(cls, u) -> "Superoperator":
        step = Unitary(u)
        return cls(step.dim, (step,))


def apply_steps(mat: np.ndarray, steps: Sequence[SuperoperatorStep]) -> np.ndarray:
    """Apply steps to a raw (possibly unnormalised) matrix, no validation."""
    for step in steps:
        if isinstance(step, Unitary):
            mat = step.conjugate(mat)
        else:
            mat = step.measurement.pinch(mat)
    return mat


def apply_superoperator(rho: DensityMatrix, sop: Superoperator) -> DensityMatrix:
    if rho.dim != sop.dim:
        raise DimensionMismatch(f"state dimension {rho.dim} vs superoperator dimension {sop.dim}")
    if not sop.steps:
        return rho
    out = apply_steps(rho.mat, sop.steps)
    return validate_density(0.5 * (out + dagger(out)), rho.trace_tol, rho.psd_tol)


def measure_distribution(rho: DensityMatrix, m: ProjectiveMeasurement) -> tuple[list[float], list[np.ndarray]]:
    """Outcome probabilities Tr(P_j rho) and unnormalised post-states P_j rho P_j."""
    if rho.dim != m.dim:
        raise DimensionMismatch(f"state dimension {rho.dim} vs measurement dimension {m.dim}")
    posts = [p @ rho.mat @ p for p in m.projectors]
    probs = [float(np.trace(s).real) for s in posts]
    return probs, posts


@dataclass(frozen=True, eq=False)
class BinaryObservable:
    """Two-outcome measurement, optionally preceded by superoperator steps."""

    outcome0: np.ndarray
    outcome1: np.ndarray
    prepend: tuple = ()

    def __post_init__(self):
        p0 = _readonly(as_matrix(self.outcome0))
        p1 = _readonly(as_matrix(self.outcome1))
        if p0.shape != p1.shape:
            raise DimensionMismatch("outcome projectors differ in shape")
        check_projector_family([p0, p1], complete=True)
        prepend = tuple(self.prepend)
        for step in prepend:
            if step.dim != p0.shape[0]:
                raise DimensionMismatch("prepended step dimension differs from the observable")
        object.__setattr__(self, "outcome0", p0)
        object.__setattr__(self, "outcome1", p1)
        object.__setattr__(self, "prepend", prepend)

    @classmethod
    def from_projector(cls, p0, prepend: Sequence[SuperoperatorStep] = ()) -> "BinaryObservable":
        p0 = as_matrix(p0)
        return cls(p0, np.eye(p0.shape[0]) - p0, tuple(prepend))

    @property
    def dim(self) -> int:
        return self.outcome0.shape[0]

    def swapped(self) -> "BinaryObservable":
        return BinaryObservable(self.outcome1, self.outcome0, self.prepend)

    def outcome(self, bit: int) -> np.ndarray:
        return self.outcome1 if bit else self.outcome0

    def prob(self, rho, bit: int) -> float:
        """Probability that measuring ``rho`` yields ``bit``."""
        mat = rho.mat if isinstance(rho, DensityMatrix) else rho
        mat = apply_steps(mat, self.prepend)
        return float(np.real(np.vdot(self.outcome(bit).conj().T, mat)))


def _same_dim(*items) -> None:
    dims = {x.dim for x in items}
    if len(dims) != 1:
        raise DimensionMismatch(f"dimensions differ: {sorted(dims)}")


def discrimination_success(sigma0: DensityMatrix, sigma1: DensityMatrix, obs: BinaryObservable) -> float:
    """Average probability that ``obs`` returns b on sigma_b for an unbiased b."""
    _same_dim(sigma0, sigma1, obs)
    return 0.5 * obs.prob(sigma0, 0) + 0.5 * obs.prob(sigma1, 1)


def helstrom_observable(sigma0: DensityMatrix, sigma1: DensityMatrix, tie_tol: float = 1e-12) -> tuple[BinaryObservable, float]:
    """Optimal observable for telling sigma0 from sigma1, and its success.

    Outcome 0 projects onto the nonnegative eigenspace of sigma0 - sigma1;
    eigenvalues within ``tie_tol`` of zero are assigned to outcome 0.
    """
    _same_dim(sigma0, sigma1)
    diff = sigma0.mat - sigma1.mat
    success = 0.5 + 0.25 * float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + dagger(diff))))))
    return helstrom_from_difference(diff, tie_tol), success


def helstrom_from_difference(diff: np.ndarray, tie_tol: float = 1e-12) -> BinaryObservable:
    """Observable whose outcome 0 projects onto the nonnegative eigenspace of ``diff``.

    For weighted sums ``A0 - A1`` this maximises Tr(P0 A0) + Tr(P1 A1).
    """
    eig = eigendecompose(diff)
    v = eig.eigenvectors[:, eig.eigenvalues >= -tie_tol]
    p0 = v @ dagger(v)
    return BinaryObservable.from_projector(0.5 * (p0 + dagger(p0)))


def random_measurement(dim: int, seed: int, n_outcomes: int | None = None) -> ProjectiveMeasurement:
    """Random basis split into ``n_outcomes`` nonempty groups of consecutive columns."""
    rng = np.random.default_rng(seed)
    u = random_unitary(dim, int(rng.integers(2**63)))
    if n_outcomes is None:
        n_outcomes = int(rng.integers(1, dim + 1))
    cuts = sorted(rng.choice(np.arange(1, dim), size=n_outcomes - 1, replace=False)) if n_outcomes > 1 else []
    bounds = [0, *cuts, dim]
    groups = [list(range(bounds[k], bounds[k + 1])) for k in range(n_outcomes)]
    return ProjectiveMeasurement.from_basis(u, groups)


def random_binary_observable(dim: int, seed: int, with_prepend: bool = False) -> BinaryObservable:
    rng = np.random.default_rng(seed)
    u = random_unitary(dim, int(rng.integers(2**63)))
    rank = int(rng.integers(0, dim + 1))
    cols = u[:, :rank]
    prepend: tuple = ()
    if with_prepend:
        prepend = (Unitary(random_unitary(dim, int(rng.integers(2**63)))), Measure(random_measurement(dim, int(rng.integers(2**63)))))
    return BinaryObservable.from_projector(cols @ dagger(cols), prepend)


# ---------------------------------------------------------------------------
# JSON


def step_to_json(step: SuperoperatorStep) -> dict:
    if isinstance(step, Unitary):
        return {"type": "unitary", "matrix": matrix_to_json(step.matrix)}
    return {"type": "measure", "projectors": [matrix_to_json(p) for p in step.measurement.projectors]}


def step_from_json(obj: dict) -> SuperoperatorStep:
    kind = obj["type"]
    if kind == "unitary":
        return Unitary(matrix_from_json(obj["matrix"]))
    if kind == "measure":
        return Measure(ProjectiveMeasurement(tuple(matrix_from_json(p) for p in obj["projectors"])))
    raise ValueError(f"unknown step type {kind!r}")


def superoperator_to_json(sop: Superoperator) -> list:
    return [step_to_json(s) for s in sop.steps]


def superoperator_from_json(steps: list, dim: int | None = None) -> Superoperator:
    parsed = tuple(step_from_json(s) for s in steps)
    if dim is None:
        if not parsed:
            raise ValueError("dimension needed for an empty step list")
        dim = parsed[0].dim
    return Superoperator(dim, parsed)


def observable_to_json(obs: BinaryObservable) -> dict:
    return {
        "prepend": [step_to_json(s) for s in obs.prepend],
        "outcome0": matrix_to_json(obs.outcome0),
        "outcome1": matrix_to_json(obs.outcome1),
    }


def observable_from_json(obj: dict) -> BinaryObservable:
    return BinaryObservable(
        matrix_from_json(obj["outcome0"]),
        matrix_from_json(obj["outcome1"]),
        tuple(step_from_json(s) for s in obj.get("prepend", [])),
    )
