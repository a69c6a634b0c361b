"""Random access codes: verification, the (1 - H(p)) n qubit bound, suffix
mixtures, and a see-saw search for good codes."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .channels import BinaryObservable, helstrom_from_difference, observable_from_json, observable_to_json
from .density import (
    DensityMatrix,
    binary_entropy,
    derive_seed,
    eigendecompose,
    matrix_from_json,
    matrix_to_json,
    pure_state,
    random_pure_vector,
    validate_density,
    von_neumann_entropy,
)
from .errors import DimensionMismatch, IncompleteObservableTable

RAC = "rac"
SERIAL = "serial"
WORST = "worst"
AVERAGE = "avg"
MW_RATE = 2.0


def bitstrings(n: int) -> list[str]:
    return ["".join(b) for b in itertools.product("01", repeat=n)]


@dataclass(frozen=True, eq=False)
class RandomAccessCode:
    """Encodings x -> rho_x on m qubits and a binary observable per bit index.

    Indices are 0-based. In ``serial`` mode the observable for bit i may also
    depend on the later bits, and the table is keyed by ``(i, x[i+1:])``.
    """

    n: int
    m: int
    encodings: dict
    observables: dict
    mode: str = RAC

    def __post_init__(self):
        dim = 2**self.m
        if set(self.encodings) != set(bitstrings(self.n)):
            raise ValueError(f"encodings must cover all {2**self.n} strings of length {self.n}")
        for x, rho in self.encodings.items():
            if rho.dim != dim:
                raise DimensionMismatch(f"encoding of {x!r} has dimension {rho.dim}, expected {dim}")
        for key, obs in self.observables.items():
            if obs.dim != dim:
                raise DimensionMismatch(f"observable {key!r} has dimension {obs.dim}, expected {dim}")
        if self.mode not in (RAC, SERIAL):
            raise ValueError(f"unknown mode {self.mode!r}")
        needed = set(self.observable_keys())
        missing = needed - set(self.observables)
        if missing:
            raise IncompleteObservableTable(f"no observable for {sorted(missing, key=str)[:4]}")

    @property
    def dim(self) -> int:
        return 2**self.m

    def observable_keys(self) -> list:
        if self.mode == RAC:
            return list(range(self.n))
        return [(i, s) for i in range(self.n) for s in bitstrings(self.n - i - 1)]

    def observable_for(self, i: int, x: str) -> BinaryObservable:
        key = i if self.mode == RAC else (i, x[i + 1:])
        return self.observables[key]


@dataclass
class RacVerification:
    p_min: float
    p_avg: float
    per_pair: np.ndarray  # [x index in bitstrings(n) order, i]


def verify_rac(code: RandomAccessCode) -> RacVerification:
    """Pr[O_i(rho_x) = x_i] for every string x and index i."""
    if code.n > 10 or code.m > 6:
        raise ValueError("verify_rac is exhaustive and capped at n <= 10, m <= 6")
    xs = bitstrings(code.n)
    per = np.empty((len(xs), code.n))
    for a, x in enumerate(xs):
        rho = code.encodings[x]
        for i in range(code.n):
            per[a, i] = code.observable_for(i, x).prob(rho, int(x[i]))
    per = np.clip(per, 0.0, 1.0)
    p_min = float(per.min())
    # the mean of equal entries can round one ulp below their minimum
    return RacVerification(p_min, max(float(per.mean()), p_min), per)


def rac_bound_check(n: int, m: float, p: float) -> tuple[bool, float]:
    """Whether m qubits can hold an (n, m, p) code: m >= (1 - H(p)) n."""
    if not 0.5 <= p <= 1.0:
        raise ValueError("p must lie in [1/2, 1]")
    required = (1.0 - binary_entropy(p)) * n
    return m >= required, required


def suffix_mixture(code: RandomAccessCode, suffix: str) -> DensityMatrix:
    """Uniform mixture of rho_{zy} over all prefixes z, for the given suffix y."""
    k = len(suffix)
    if k > code.n:
        raise ValueError("suffix longer than the code")
    zs = bitstrings(code.n - k)
    return validate_density(sum(code.encodings[z + suffix].mat for z in zs) / len(zs))


def suffix_mixture_entropy(code: RandomAccessCode, suffix: str, p: float | None = None) -> tuple[float, float, bool]:
    """S(rho_y) against (1 - H(p)) (n - |y|); p defaults to the verified p_min."""
    if p is None:
        p = verify_rac(code).p_min
    s = von_neumann_entropy(suffix_mixture(code, suffix))
    bound = (1.0 - binary_entropy(min(max(p, 0.0), 1.0))) * (code.n - len(suffix))
    return s, bound, s >= bound - 1e-6


PAULIS = (
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)


def pauli_code(n: int) -> RandomAccessCode:
    """The qubit code for n <= 3 bits: x goes to the Bloch vector ((-1)^x_i)/sqrt(n)
    and bit i is read along Pauli axis i. Every pair succeeds with (1 + 1/sqrt n)/2."""
    if not 1 <= n <= 3:
        raise ValueError("pauli_code needs 1 <= n <= 3")
    eye = np.eye(2, dtype=np.complex128)
    encodings = {}
    for x in bitstrings(n):
        bloch = sum((1 - 2 * int(b)) * PAULIS[i] for i, b in enumerate(x)) / math.sqrt(n)
        encodings[x] = validate_density(0.5 * (eye + bloch))
    observables = {i: BinaryObservable.from_projector(0.5 * (eye + PAULIS[i])) for i in range(n)}
    return RandomAccessCode(n, 1, encodings, observables, RAC)


# ---------------------------------------------------------------------------
# see-saw


@dataclass
class SeesawResult:
    code: RandomAccessCode
    p_min: float
    p_avg: float
    restart: int
    history: list = field(default_factory=list)  # (p_min, p_avg) per iteration of the chosen restart


def _pair_probs(vecs: np.ndarray, proj: np.ndarray, xs: list[str]) -> np.ndarray:
    """P[a, i] = <psi_a| Pi_{i, x_a[i]} |psi_a>."""
    n = proj.shape[0]
    out = np.empty((len(xs), n))
    for a, x in enumerate(xs):
        v = vecs[a]
        for i in range(n):
            out[a, i] = float(np.real(np.vdot(v, proj[i, int(x[i])] @ v)))
    return out


def _one_run(n: int, m: int, objective: str, rng: np.random.Generator, max_iters: int, tol: float):
    dim = 2**m
    xs = bitstrings(n)
    bits = np.array([[int(c) for c in x] for x in xs])
    vecs = np.array([random_pure_vector(dim, rng) for _ in xs])
    weights = np.full((len(xs), n), 1.0 / (len(xs) * n))
    proj = np.empty((n, 2, dim, dim), dtype=np.complex128)
    history = []
    best = None
    stall = 0
    prev = -math.inf
    for _ in range(max_iters):
        rhos = np.einsum("ai,aj->aij", vecs, vecs.conj())
        for i in range(n):
            signs = np.where(bits[:, i] == 0, 1.0, -1.0) * weights[:, i]
            obs = helstrom_from_difference(np.einsum("a,aij->ij", signs, rhos))
            proj[i, 0], proj[i, 1] = obs.outcome0, obs.outcome1
        for a in range(len(xs)):
            op = sum(weights[a, i] * proj[i, bits[a, i]] for i in range(n))
            vecs[a] = eigendecompose(op).eigenvectors[:, 0]
        probs = _pair_probs(vecs, proj, xs)
        p_min, p_avg = float(probs.min()), float(probs.mean())
        history.append((p_min, p_avg))
        score = p_min if objective == WORST else p_avg
        if best is None or score > best[0] + 1e-15:
            best = (score, vecs.copy(), proj.copy(), p_min, p_avg)
        if objective == WORST:
            weights = weights * np.exp(-MW_RATE * probs)
            weights /= weights.sum()
            stall = stall + 1 if score <= prev + tol else 0
            prev = max(prev, score)
            if stall >= 50:
                break
        else:
            if score - prev < tol:
                break
            prev = score
    return best, history


def seesaw_search(n: int, m: int, objective: str = WORST, seed: int = 0, max_iters: int = 500,
                  tol: float = 1e-7, restarts: int = 8) -> SeesawResult:
    """Alternate exact Helstrom measurements and top-eigenvector encodings.

    The average objective uses uniform pair weights, so each half-step is an
    exact maximisation and p_avg never decreases. The worst-case objective
    reweights (x, i) pairs multiplicatively toward the weakest ones and keeps
    the best iterate. The best of ``restarts`` independent starts is returned,
    ties going to the lowest restart index.
    """
    if n > 6 or m > 3:
        raise ValueError("seesaw_optimize is capped at n <= 6, m <= 3")
    if objective not in (WORST, AVERAGE):
        raise ValueError(f"objective must be {WORST!r} or {AVERAGE!r}")
    chosen = None
    for r in range(restarts):
        rng = np.random.default_rng(derive_seed(seed, r))
        best, history = _one_run(n, m, objective, rng, max_iters, tol)
        if chosen is None or best[0] > chosen[0][0]:
            chosen = (best, history, r)
    (score, vecs, proj, p_min, p_avg), history, r = chosen
    xs = bitstrings(n)
    encodings = {x: pure_state(vecs[a]) for a, x in enumerate(xs)}
    observables = {i: BinaryObservable(proj[i, 0], proj[i, 1]) for i in range(n)}
    code = RandomAccessCode(n, m, encodings, observables, RAC)
    check = verify_rac(code)
    return SeesawResult(code, check.p_min, check.p_avg, r, history)


def seesaw_optimize(n: int, m: int, objective: str = WORST, seed: int = 0, max_iters: int = 500,
                    tol: float = 1e-7, restarts: int = 8) -> RandomAccessCode:
    return seesaw_search(n, m, objective, seed, max_iters, tol, restarts).code


def to_serial(code: RandomAccessCode, refine: bool = True) -> RandomAccessCode:
    """Serial version of a code: each (i, suffix) starts from the code's observable
    for i; with ``refine`` it is replaced by the Helstrom observable for that
    suffix whenever that does not lower the worst pair it governs."""
    if code.mode == SERIAL:
        return code
    table = {}
    xs = bitstrings(code.n)
    for i in range(code.n):
        for s in bitstrings(code.n - i - 1):
            base = code.observables[i]
            table[(i, s)] = base
            if not refine:
                continue
            group = [x for x in xs if x[i + 1:] == s]
            diff = sum((1.0 if x[i] == "0" else -1.0) * code.encodings[x].mat for x in group)
            cand = helstrom_from_difference(diff)

            def worst(obs):
                return min(obs.prob(code.encodings[x], int(x[i])) for x in group)

            if worst(cand) >= worst(base):
                table[(i, s)] = cand
    return RandomAccessCode(code.n, code.m, dict(code.encodings), table, SERIAL)


# ---------------------------------------------------------------------------
# JSON


def _key_str(key) -> str:
    return str(key) if isinstance(key, int) else f"{key[0]}:{key[1]}"


def _key_parse(s: str, mode: str):
    if mode == RAC:
        return int(s)
    i, _, suffix = s.partition(":")
    return int(i), suffix


def code_to_json(code: RandomAccessCode) -> dict:
    return {
        "n": code.n,
        "m": code.m,
        "mode": code.mode,
        "encodings": {x: matrix_to_json(code.encodings[x]) for x in bitstrings(code.n)},
        "observables": {_key_str(k): observable_to_json(code.observables[k]) for k in code.observable_keys()},
    }


def code_from_json(obj: dict) -> RandomAccessCode:
    mode = obj.get("mode", RAC)
    encodings = {x: validate_density(matrix_from_json(v)) for x, v in obj["encodings"].items()}
    observables = {_key_parse(k, mode): observable_from_json(v) for k, v in obj["observables"].items()}
    return RandomAccessCode(int(obj["n"]), int(obj["m"]), encodings, observables, mode)
