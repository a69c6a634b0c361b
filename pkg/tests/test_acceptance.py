"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are collected in ``RESULTS`` and echoed in the pytest terminal
summary; running this file directly prints them as well.
"""
import hashlib
import json
import math
import time

import numpy as np
import pytest

from qfalab.automata import dfa_for_ln, ln_member, prefix_qfa_for_ln, recognizes, words_up_to
from qfalab.cli import ExperimentConfig, run_experiment
from qfalab.decode import geometric_example, projection_sum_check
from qfalab.density import binary_entropy
from qfalab.entropy_lab import average_state_trajectory
from qfalab.rac import bitstrings, code_from_json, rac_bound_check, suffix_mixture_entropy
from bloch_oracle import three_bit_oracle, two_bit_oracle
from factories import random_projection_family

SEED = 20240601
RESULTS: list[str] = []
_payloads: dict[str, str] = {}

CONFIGS = {
    "decode": [ExperimentConfig("decode-bounds", trials=500, seed=SEED)],
    "lemma": [ExperimentConfig("lemma-mix", dim=d, trials=1000, seed=SEED) for d in (2, 4, 8)],
    "facts": [ExperimentConfig("facts", dim=d, trials=500, seed=SEED) for d in (2, 4, 8, 16)],
    "rac": [ExperimentConfig("rac-optimize", n=n, m=m, seed=SEED) for n, m in [(1, 1), (2, 1), (3, 1), (4, 1), (4, 2)]],
}


def record(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def _key(cfg: ExperimentConfig) -> str:
    return json.dumps(cfg.to_dict(), sort_keys=True)


def run_cached(cfg: ExperimentConfig):
    rep = run_experiment(cfg)
    _payloads.setdefault(_key(cfg), rep.payload())
    return rep


def _projection_families():
    rows = []
    for m in (1, 2, 3):
        rng = np.random.default_rng([SEED, m])
        for _ in range(100):
            codewords, projectors = random_projection_family(m, rng)
            rows.append((m, *projection_sum_check(codewords, projectors, m)))
    return rows


def test_criterion_01_geometric_exact():
    start = time.perf_counter()
    errs = []
    for n in range(1, 9):
        s = geometric_example(n)[2]
        errs.append(abs(s.success - (n + 1) * 2.0**-n))
        errs.append(abs(s.mutual_information - (2 - 2.0 ** -(n - 1))))
    n4 = geometric_example(4)[2]
    elapsed = time.perf_counter() - start
    ok = max(errs) <= 1e-9 and elapsed < 1.0 and abs(n4.success - 0.3125) <= 1e-9 and abs(n4.mutual_information - 1.875) <= 1e-9
    record(1, "geometric example n=1..8", ok, f"max error {max(errs):.2e}, n=4 success {n4.success} I {n4.mutual_information}, {elapsed:.2f}s")


def test_criterion_02_decoding_sandwich():
    start = time.perf_counter()
    rep = run_cached(CONFIGS["decode"][0])
    elapsed = time.perf_counter() - start
    r = rep.result
    ok = r["violations"] == 0 and r["worst_lower_margin"] >= -1e-9 and r["worst_upper_margin"] >= -1e-9 and elapsed < 30
    record(2, "MAP success between 2^-H(X|Y) and P(X,2^m)", ok,
           f"500 trials, margins {r['worst_lower_margin']:.3e} / {r['worst_upper_margin']:.3e}, {elapsed:.1f}s")


def test_criterion_03_projection_sum():
    rows = _projection_families()
    worst = max(total - 2**m for m, total, _ in rows)
    saturated = []
    for m in (1, 2, 3):
        basis = np.eye(2**m)
        total, _ = projection_sum_check(list(basis), [np.outer(v, v) for v in basis], m)
        saturated.append(abs(total - 2**m))
    ok = all(flag for _, _, flag in rows) and worst <= 1e-9 and max(saturated) <= 1e-12
    record(3, "projection sum at most 2^m", ok, f"300 families, max excess {worst:.3e}, saturating error {max(saturated):.1e}")


def test_criterion_04_mixing_inequality():
    start = time.perf_counter()
    reps = [run_cached(cfg) for cfg in CONFIGS["lemma"]]
    elapsed = time.perf_counter() - start
    worst = min(r.result["worst_margin"] for r in reps)
    ok = all(r.result["violations"] == 0 for r in reps) and worst >= -1e-9 and elapsed < 60
    checks = sum(r.result["checks"] for r in reps)
    record(4, "mixing inequality, dims 2/4/8", ok, f"{checks} checks, worst margin {worst:.3e}, {elapsed:.1f}s")


def test_criterion_05_entropy_facts():
    reps = [run_cached(cfg) for cfg in CONFIGS["facts"]]
    r = [x.result for x in reps]
    ok = (
        all(x.verdict == "pass" for x in reps)
        and max(v["max_entropy_excess"] for v in r) <= 1e-9
        and max(v["max_unitary_gap"] for v in r) <= 1e-9
        and min(v["min_measurement_gain"] for v in r) >= -1e-9
    )
    record(5, "entropy bound, unitary invariance, measurement monotonicity", ok,
           f"dims 2/4/8/16, unitary gap {max(v['max_unitary_gap'] for v in r):.1e}, "
           f"measurement gain {min(v['min_measurement_gain'] for v in r):.1e}")


def test_criterion_06_entropy_growth():
    details = []
    ok = True
    rates = [1 - binary_entropy(p) for p in (0.51, 0.6, 0.75, 0.9, 0.99, 1.0)]
    for n in range(7):
        start = time.perf_counter()
        qfa = prefix_qfa_for_ln(n)
        traj = average_state_trajectory(qfa, n + 1)
        exact = max(abs(s - k) for k, s in traj.points)
        grows = all(s >= rate * k - 1e-6 for k, s in traj.points for rate in rates)
        recognized, _ = recognizes(qfa, n, 1.0)
        elapsed = time.perf_counter() - start
        ok = ok and exact <= 1e-6 and grows and recognized and elapsed < 60
        details.append(f"n={n} err {exact:.0e} {elapsed:.1f}s")
    record(6, "prefix automaton S(rho_k)=k and recognition with p=1", ok, ", ".join(details[-2:]))


def test_criterion_07_dfa():
    ok = True
    for n in range(9):
        dfa = dfa_for_ln(n)
        ok = ok and len(dfa.states) <= 2 * n + 4
        ok = ok and all(dfa.accepts(w) == ln_member(w, n) for w in words_up_to(n + 2))
    record(7, "DFA with at most 2n+4 states decides L_n", ok, "n=0..8 exhaustive over words of length <= n+2")


def test_criterion_08_random_access_codes():
    reps = {(c.n, c.m): run_cached(c) for c in CONFIGS["rac"]}
    p21, p31 = reps[2, 1].result["p_min"], reps[3, 1].result["p_min"]
    g21, g31 = two_bit_oracle(), three_bit_oracle()
    holds, required = rac_bound_check(2, 1, p21)
    suffix_ok = True
    for rep in reps.values():
        code = code_from_json(rep.result["code"])
        p = rep.result["p_min"]
        for k in range(code.n + 1):
            for y in bitstrings(k):
                suffix_ok = suffix_ok and suffix_mixture_entropy(code, y, p)[2]
    ok = (
        abs(p21 - 0.85355) <= 1e-3
        and abs(p21 - g21) <= 1e-3
        and abs(p31 - 0.78868) <= 1e-3
        and abs(p31 - g31) <= 1e-3
        and holds
        and abs(required - 0.79825) <= 1e-3
        and suffix_ok
    )
    record(8, "see-saw codes, grid oracle, qubit bound, suffix mixtures", ok,
           f"(2,1) {p21:.6f} vs grid {g21:.6f}, required_m {required:.5f}; (3,1) {p31:.6f} vs grid {g31:.6f}; "
           f"suffix claim {'holds' if suffix_ok else 'fails'} for n<=4")


def test_criterion_09_holevo_comparison():
    rows = []
    ok = True
    for n in range(2, 9):
        s = geometric_example(n)[2]
        rows.append(f"n={n}: log2(n+1)={s.prob_qubit_bound:.3f} chi={s.chi:.4f}")
        ok = ok and abs(s.prob_qubit_bound - math.log2(n + 1)) <= 1e-12 and s.chi <= 2 - 2.0 ** -(n - 1) + 1e-9 and s.chi < 2
    for row in rows:
        print("   ", row)
    record(9, "probability bound grows while chi stays below 2", ok, f"{rows[0]}; {rows[-1]}")


def test_criterion_10_determinism():
    configs = [cfg for group in CONFIGS.values() for cfg in group]
    mismatched = []
    for cfg in configs:
        key = _key(cfg)
        first = _payloads.get(key) or run_experiment(cfg).payload()
        if run_experiment(cfg).payload() != first:
            mismatched.append(cfg.subcommand)
    digest = lambda rows: hashlib.sha256(repr(rows).encode()).hexdigest()  # noqa: E731
    same_families = digest(_projection_families()) == digest(_projection_families())
    ok = not mismatched and same_families
    record(10, "same seed gives byte-identical payloads", ok,
           f"{len(configs)} experiment configs and the projection families rerun; mismatches: {mismatched or 'none'}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
