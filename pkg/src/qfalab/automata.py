"""DFAs and enhanced one-way QFAs over end-marked binary words.

A QFA reads the left marker ``lm``, the letters of the word, then the right
marker ``rm``. After each superoperator the state is measured against the
accept / reject / non-halting split of the basis; halting mass is banked and
the computation continues with the unnormalised non-halting block.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Mapping

import numpy as np

from .channels import Superoperator, Unitary, apply_steps, superoperator_from_json, superoperator_to_json
from .density import block_entropy, check_dim
from .errors import DimensionMismatch, NotReversible, TooLarge

ALPHABET = ("0", "1")
LEFT_MARKER = "lm"
RIGHT_MARKER = "rm"
SYMBOLS = (LEFT_MARKER, "0", "1", RIGHT_MARKER)
HALT_TOL = 1e-9


def ln_member(word: str, n: int) -> bool:
    """Membership in L_n = {w0 : |w| <= n}."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return 0 < len(word) <= n + 1 and word.endswith("0")


def words_up_to(length: int) -> Iterator[str]:
    """All binary words of length <= ``length`` in shortlex order."""
    for k in range(length + 1):
        for bits in itertools.product(ALPHABET, repeat=k):
            yield "".join(bits)


# ---------------------------------------------------------------------------
# DFA


@dataclass(frozen=True)
class Dfa:
    states: tuple
    start: str
    accepting: frozenset
    transition: Mapping
    alphabet: tuple = ALPHABET

    def __post_init__(self):
        missing = [(q, a) for q in self.states for a in self.alphabet if (q, a) not in self.transition]
        if missing:
            raise ValueError(f"transition function is not total, missing {missing[:3]}")
        if self.start not in self.states:
            raise ValueError(f"start state {self.start!r} is not a state")

    def accepts(self, word: str) -> bool:
        q = self.start
        for a in word:
            q = self.transition[(q, a)]
        return q in self.accepting

    def to_json(self) -> dict:
        return {
            "states": list(self.states),
            "start": self.start,
            "accepting": sorted(self.accepting),
            "alphabet": list(self.alphabet),
            "transitions": {q: {a: self.transition[(q, a)] for a in self.alphabet} for q in self.states},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Dfa":
        table = {(q, a): t for q, row in obj["transitions"].items() for a, t in row.items()}
        return cls(tuple(obj["states"]), obj["start"], frozenset(obj["accepting"]), table, tuple(obj["alphabet"]))


def dfa_for_ln(n: int) -> Dfa:
    """Length counter times last-symbol flag, plus start and dead states: 2n + 4 states."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    states = ["start"] + [f"{k}:{b}" for k in range(1, n + 2) for b in ALPHABET] + ["dead"]
    delta = {}
    for a in ALPHABET:
        delta[("start", a)] = f"1:{a}"
        delta[("dead", a)] = "dead"
        for k in range(1, n + 2):
            for b in ALPHABET:
                delta[(f"{k}:{b}", a)] = f"{k + 1}:{a}" if k + 1 <= n + 1 else "dead"
    accepting = frozenset(f"{k}:0" for k in range(1, n + 2))
    return Dfa(tuple(states), "start", accepting, delta)


# ---------------------------------------------------------------------------
# QFA


@dataclass(frozen=True, eq=False)
class QfaSpec:
    """Enhanced QFA: labelled basis, accept/reject index sets, start index and
    one superoperator per symbol of ``SYMBOLS``. Non-halting states are the rest."""

    labels: tuple
    accepting: frozenset
    rejecting: frozenset
    start: int
    superops: Mapping

    def __post_init__(self):
        dim = len(self.labels)
        acc, rej = frozenset(self.accepting), frozenset(self.rejecting)
        if acc & rej:
            raise ValueError("accepting and rejecting states overlap")
        if any(not 0 <= i < dim for i in acc | rej):
            raise ValueError("state index out of range")
        if self.start in acc or self.start in rej:
            raise ValueError("start state must be non-halting")
        missing = set(SYMBOLS) - set(self.superops)
        if missing:
            raise ValueError(f"missing superoperators for {sorted(missing)}")
        for sym, sop in self.superops.items():
            if sop.dim != dim:
                raise DimensionMismatch(f"superoperator for {sym!r} has dimension {sop.dim}, expected {dim}")
        object.__setattr__(self, "accepting", acc)
        object.__setattr__(self, "rejecting", rej)
        object.__setattr__(self, "superops", dict(self.superops))

    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def non_halting(self) -> frozenset:
        return frozenset(range(self.dim)) - self.accepting - self.rejecting

    def index_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (np.array(sorted(self.accepting), dtype=int),
                np.array(sorted(self.rejecting), dtype=int),
                np.array(sorted(self.non_halting), dtype=int))

    def start_state(self) -> np.ndarray:
        rho = np.zeros((self.dim, self.dim), dtype=np.complex128)
        rho[self.start, self.start] = 1.0
        return rho

    def to_json(self) -> dict:
        return {
            "labels": list(self.labels),
            "accepting": sorted(self.accepting),
            "rejecting": sorted(self.rejecting),
            "start": self.start,
            "superoperators": {s: superoperator_to_json(self.superops[s]) for s in SYMBOLS},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "QfaSpec":
        dim = len(obj["labels"])
        sops = {s: superoperator_from_json(steps, dim) for s, steps in obj["superoperators"].items()}
        return cls(tuple(obj["labels"]), frozenset(obj["accepting"]), frozenset(obj["rejecting"]), int(obj["start"]), sops)


def split_halting(qfa: QfaSpec, mat: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Blocks P_acc M P_acc, P_rej M P_rej, P_non M P_non (full-size, zero elsewhere)."""
    out = []
    for idx in qfa.index_arrays():
        block = np.zeros_like(mat)
        if idx.size:
            block[np.ix_(idx, idx)] = mat[np.ix_(idx, idx)]
        out.append(block)
    return out[0], out[1], out[2]


def read_symbol(qfa: QfaSpec, mat: np.ndarray, symbol: str) -> tuple[float, float, np.ndarray]:
    """Apply the superoperator for ``symbol`` then the halting measurement.

    Returns (accept mass, reject mass, unnormalised non-halting block).
    """
    out = apply_steps(mat, qfa.superops[symbol].steps)
    acc, rej, non = qfa.index_arrays()
    diag = np.real(np.diag(out))
    cont = np.zeros_like(out)
    if non.size:
        cont[np.ix_(non, non)] = out[np.ix_(non, non)]
    return float(diag[acc].sum()), float(diag[rej].sum()), cont


@dataclass
class RunResult:
    p_accept: float
    p_reject: float
    p_continue: float
    final_state: np.ndarray
    per_symbol_trace: list = field(default_factory=list)


def _normalized_entropy(mat: np.ndarray) -> float | None:
    mass = float(np.trace(mat).real)
    if mass <= HALT_TOL:
        return None
    return block_entropy(mat / mass)


def run_qfa(qfa: QfaSpec, word: str) -> RunResult:
    """Run on ``word`` from |q0><q0|.

    ``per_symbol_trace`` rows are (symbol, cumulative accept, cumulative
    reject, entropy of the renormalised non-halting state or None when its
    mass vanished).
    """
    if any(a not in ALPHABET for a in word):
        raise ValueError(f"word {word!r} is not over {ALPHABET}")
    mat = qfa.start_state()
    p_acc = p_rej = 0.0
    trace = []
    for sym in (LEFT_MARKER, *word, RIGHT_MARKER):
        da, dr, mat = read_symbol(qfa, mat, sym)
        p_acc += da
        p_rej += dr
        trace.append((sym, p_acc, p_rej, _normalized_entropy(mat)))
    return RunResult(p_acc, p_rej, float(np.trace(mat).real), mat, trace)


def _walk(qfa: QfaSpec, max_len: int, visit) -> None:
    """Depth-first over all words of length <= max_len, sharing prefix work.

    ``visit(word, p_acc, p_rej, mat)`` sees the state after ``lm`` and the
    letters of ``word``; returning False prunes the subtree.
    """
    da, dr, mat = read_symbol(qfa, qfa.start_state(), LEFT_MARKER)

    def rec(word, p_acc, p_rej, mat):
        if visit(word, p_acc, p_rej, mat) is False or len(word) == max_len:
            return
        for a in ALPHABET:
            a_acc, a_rej, nxt = read_symbol(qfa, mat, a)
            rec(word + a, p_acc + a_acc, p_rej + a_rej, nxt)

    rec("", da, dr, mat)


def final_decisions(qfa: QfaSpec, max_len: int) -> dict[str, tuple[float, float]]:
    """(accept, reject) probabilities for every word of length <= max_len."""
    out = {}

    def visit(word, p_acc, p_rej, mat):
        da, dr, _ = read_symbol(qfa, mat, RIGHT_MARKER)
        out[word] = (p_acc + da, p_rej + dr)

    _walk(qfa, max_len, visit)
    return out


def recognizes(qfa: QfaSpec, n: int, p: float, unhalted_rejects: bool = False) -> tuple[bool, str | None]:
    """Check that ``qfa`` decides L_n with probability >= p on all words of length <= n + 2.

    Returns (True, None) or (False, lexicographically first failing word). By
    default a word outside L_n must be rejected explicitly; with
    ``unhalted_rejects`` mass that never halts also counts as rejection.
    """
    if not 0.5 < p <= 1.0:
        raise ValueError("p must lie in (1/2, 1]")
    failures = []
    for word, (p_acc, p_rej) in final_decisions(qfa, n + 2).items():
        if ln_member(word, n):
            ok = p_acc >= p - HALT_TOL
        else:
            ok = (1.0 - p_acc if unhalted_rejects else p_rej) >= p - HALT_TOL
        if not ok:
            failures.append(word)
    if failures:
        return False, min(failures)
    return True, None


def is_r_restricted(qfa: QfaSpec, r: int, n: int) -> bool:
    """No halting mass after ``lm`` and the first min(r, |w|) letters, for all |w| <= n."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    ok = [True]

    def visit(word, p_acc, p_rej, mat):
        if p_acc + p_rej > HALT_TOL:
            ok[0] = False
        return ok[0]

    _walk(qfa, min(r, n), visit)
    return ok[0]


# ---------------------------------------------------------------------------
# constructions


def _run_halt_qfa(names: list, accept_names: set, letter_perms: dict) -> QfaSpec:
    """Basis = ("run", name) for every name, then ("halt", name).

    Letters permute the whole basis; ``rm`` swaps run and halt copies; ``lm``
    is the identity. A halt copy accepts iff its name is in ``accept_names``.
    """
    m = len(names)
    dim = 2 * m
    check_dim(dim)
    labels = tuple([f"run:{w}" for w in names] + [f"halt:{w}" for w in names])
    acc = frozenset(m + i for i, w in enumerate(names) if w in accept_names)
    rej = frozenset(range(m, dim)) - acc
    swap = np.concatenate([np.arange(m, dim), np.arange(m)])
    sops = {
        LEFT_MARKER: Superoperator.identity(dim),
        RIGHT_MARKER: Superoperator(dim, (Unitary.from_permutation(swap),)),
    }
    for a, perm in letter_perms.items():
        sops[a] = Superoperator(dim, (Unitary.from_permutation(perm),))
    return QfaSpec(labels, acc, rej, 0, sops)


PREFIX_QFA_MAX_N = 10


def prefix_qfa_state_count(n: int) -> int:
    return 2 * (2 ** (n + 2) - 1)


def prefix_qfa_for_ln(n: int) -> QfaSpec:
    """Reversible QFA for L_n that remembers the whole prefix read so far.

    Non-halting states hold every string of length <= n + 1; each has a halting
    twin that accepts iff the string is in L_n. Letter ``a`` appends ``a`` to
    strings of length <= n and sends the 2^(n+1) strings of length n + 1 to the
    2^(n+1) rejecting twins, so words longer than n + 1 are rejected on their
    (n + 2)-th letter. The remaining halting twins fill the leftover targets,
    which keeps every letter a permutation. ``rm`` moves each string to its twin.
    """
    if not 0 <= n <= PREFIX_QFA_MAX_N:
        raise TooLarge(f"prefix QFA supports 0 <= n <= {PREFIX_QFA_MAX_N}, got {n}")
    names = list(words_up_to(n + 1))
    m = len(names)
    index = {w: i for i, w in enumerate(names)}
    accept_names = {w for w in names if ln_member(w, n)}
    reject_twins = [m + index[w] for w in names if w not in accept_names]
    accept_twins = [m + index[w] for w in names if w in accept_names]
    perms = {}
    for a in ALPHABET:
        other = "1" if a == "0" else "0"
        perm = np.full(2 * m, -1)
        full = []
        for w in names:
            if len(w) <= n:
                perm[index[w]] = index[w + a]
            else:
                full.append(index[w])
        perm[full] = reject_twins
        free = [index[""]] + [index[w] for w in names if w.endswith(other)] + accept_twins
        perm[m:] = sorted(free)
        perms[a] = perm
    return _run_halt_qfa(names, accept_names, perms)


def prefix_memory_dfa(n: int) -> Dfa:
    """Reversible DFA remembering the prefix read so far (strings of length <= n + 1).

    Strings of length n + 1 wrap around onto the empty string and the strings
    ending in the other letter, so each letter is a permutation. Agrees with
    L_n on words of length <= n + 1 only.
    """
    names = list(words_up_to(n + 1))
    delta = {}
    for a in ALPHABET:
        other = "1" if a == "0" else "0"
        full = [w for w in names if len(w) == n + 1]
        free = [""] + [w for w in names if w.endswith(other)]
        for w in names:
            if len(w) <= n:
                delta[(w, a)] = w + a
        for w, t in zip(full, free):
            delta[(w, a)] = t
    accepting = frozenset(w for w in names if ln_member(w, n))
    return Dfa(tuple(names), "", accepting, delta)


def lift_dfa(dfa: Dfa) -> QfaSpec:
    """QFA with a run and a halt copy of each DFA state; letters permute run
    states along the transitions, ``rm`` moves to the halting copy."""
    names = list(dfa.states)
    index = {q: i for i, q in enumerate(names)}
    m = len(names)
    perms = {}
    for a in dfa.alphabet:
        seen: dict = {}
        for q in names:
            t = dfa.transition[(q, a)]
            if t in seen:
                raise NotReversible(f"symbol {a!r} maps both {seen[t]!r} and {q!r} to {t!r}")
            seen[t] = q
        perm = np.concatenate([[index[dfa.transition[(q, a)]] for q in names], np.arange(m, 2 * m)])
        perms[a] = perm
    qfa = _run_halt_qfa(names, set(dfa.accepting), perms)
    return QfaSpec(qfa.labels, qfa.accepting, qfa.rejecting, index[dfa.start], qfa.superops)
