import numpy as np
import pytest

from qfalab.automata import (
    Dfa,
    QfaSpec,
    dfa_for_ln,
    is_r_restricted,
    lift_dfa,
    ln_member,
    prefix_memory_dfa,
    prefix_qfa_for_ln,
    prefix_qfa_state_count,
    recognizes,
    run_qfa,
    words_up_to,
)
from qfalab.errors import NotReversible, TooLarge
from factories import eager_qfa, idle_qfa, random_qfa


class TestLanguage:
    def test_examples(self):
        assert ln_member("0", 0)
        assert not ln_member("", 3)
        assert not ln_member("110", 1)
        assert ln_member("110", 2)

    def test_words_in_shortlex_order(self):
        assert list(words_up_to(2)) == ["", "0", "1", "00", "01", "10", "11"]


class TestDfa:
    def test_state_bound(self):
        assert len(dfa_for_ln(3).states) <= 10
        for n in range(9):
            assert len(dfa_for_ln(n).states) <= 2 * n + 4

    def test_rejects_trailing_one(self):
        assert not dfa_for_ln(2).accepts("01")

    @pytest.mark.parametrize("n", range(9))
    def test_exhaustive_agreement(self, n):
        dfa = dfa_for_ln(n)
        for w in words_up_to(n + 2):
            assert dfa.accepts(w) == ln_member(w, n), w

    def test_json_round_trip(self):
        dfa = dfa_for_ln(2)
        back = Dfa.from_json(dfa.to_json())
        assert all(back.accepts(w) == dfa.accepts(w) for w in words_up_to(5))


class TestLift:
    def test_counter_dfa_is_not_reversible(self):
        with pytest.raises(NotReversible, match="maps both"):
            lift_dfa(dfa_for_ln(2))

    def test_identity_dfa(self):
        dfa = Dfa(("a", "b"), "a", frozenset({"a"}), {(q, s): q for q in "ab" for s in "01"})
        qfa = lift_dfa(dfa)
        for s in "01":
            (step,) = qfa.superops[s].steps
            np.testing.assert_array_equal(step.matrix, np.eye(qfa.dim))

    @pytest.mark.parametrize("n", range(5))
    def test_prefix_memory_dfa_lifts(self, n):
        qfa = lift_dfa(prefix_memory_dfa(n))
        for w in words_up_to(n + 1):
            result = run_qfa(qfa, w)
            expected = result.p_accept if ln_member(w, n) else result.p_reject
            assert expected == pytest.approx(1.0), w

    def test_lifted_run_accepts_10(self):
        result = run_qfa(lift_dfa(prefix_memory_dfa(2)), "10")
        assert result.p_accept == pytest.approx(1.0)


class TestRun:
    def test_prefix_rejects_111(self):
        result = run_qfa(prefix_qfa_for_ln(3), "111")
        assert result.p_reject == pytest.approx(1.0)

    def test_long_words_halt(self):
        # the letter after the remembered window rejects outright
        result = run_qfa(prefix_qfa_for_ln(1), "0000")
        assert result.p_reject == pytest.approx(1.0)

    @pytest.mark.parametrize("seed", range(20))
    def test_conservation_and_monotone_halting(self, seed):
        qfa = random_qfa(3 + seed % 6, seed)
        rng = np.random.default_rng(seed)
        word = "".join(rng.choice(["0", "1"], size=int(rng.integers(0, 7))))
        result = run_qfa(qfa, word)
        assert result.p_accept + result.p_reject + result.p_continue == pytest.approx(1.0, abs=1e-9)
        acc = [row[1] for row in result.per_symbol_trace]
        rej = [row[2] for row in result.per_symbol_trace]
        assert all(b >= a - 1e-12 for a, b in zip(acc, acc[1:]))
        assert all(b >= a - 1e-12 for a, b in zip(rej, rej[1:]))

    def test_bad_word(self):
        with pytest.raises(ValueError):
            run_qfa(idle_qfa(), "012")


class TestRecognizes:
    @pytest.mark.parametrize("n", range(5))
    def test_prefix_qfa(self, n):
        assert recognizes(prefix_qfa_for_ln(n), n, 1.0) == (True, None)

    def test_idle_qfa_strict(self):
        # the empty word is outside L_n and is never rejected
        assert recognizes(idle_qfa(), 2, 1.0) == (False, "")

    def test_idle_qfa_unhalted_counts_as_reject(self):
        assert recognizes(idle_qfa(), 2, 1.0, unhalted_rejects=True) == (False, "0")


class TestRestricted:
    @pytest.mark.parametrize("n", range(5))
    def test_prefix_qfa(self, n):
        qfa = prefix_qfa_for_ln(n)
        assert is_r_restricted(qfa, n, n + 2)
        assert is_r_restricted(qfa, 0, n + 2)

    def test_prefix_two(self):
        assert is_r_restricted(prefix_qfa_for_ln(2), 2, 4)

    def test_eager_qfa(self):
        for r in range(4):
            assert not is_r_restricted(eager_qfa(), r, 3)

    def test_idle_qfa(self):
        assert is_r_restricted(idle_qfa(), 5, 5)


class TestPrefixConstruction:
    @pytest.mark.parametrize("n", range(7))
    def test_state_count(self, n):
        qfa = prefix_qfa_for_ln(n)
        assert qfa.dim == prefix_qfa_state_count(n) == 2 * (2 ** (n + 2) - 1)
        assert qfa.dim <= 2 * (2 ** (n + 2) - 1) + 2

    def test_left_marker_is_identity(self):
        assert prefix_qfa_for_ln(2).superops["lm"].steps == ()

    def test_too_large(self):
        with pytest.raises(TooLarge):
            prefix_qfa_for_ln(11)

    def test_json_round_trip(self):
        qfa = prefix_qfa_for_ln(2)
        back = QfaSpec.from_json(qfa.to_json())
        for w in words_up_to(4):
            assert run_qfa(back, w).p_accept == pytest.approx(run_qfa(qfa, w).p_accept)
