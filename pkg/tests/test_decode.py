import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qfalab.channels import ProjectiveMeasurement, random_measurement
from qfalab.decode import (
    DecoderTable,
    Ensemble,
    EnsembleItem,
    build_joint,
    decode_report,
    decode_success,
    geometric_example,
    geometric_group,
    map_decoder,
    projection_sum_check,
    random_ensemble,
    saturating_code,
    theorem_sweep,
    top_mass,
)
from qfalab.density import basis_state, random_density
from qfalab.errors import DimensionMismatch, NotOrthogonalFamily
from qfalab.joint import JointDistribution, mutual_information
from factories import random_projection_family

# 2^-2.125
MAP_LOWER_N4 = 0.2292510


def uniform_basis_code(m):
    labels = [format(i, f"0{m}b") for i in range(2**m)]
    items = tuple(EnsembleItem(x, 2.0**-m, basis_state(2**m, i)) for i, x in enumerate(labels))
    return Ensemble(m, items)


class TestJoint:
    def test_orthogonal_code(self):
        joint = build_joint(uniform_basis_code(2), ProjectiveMeasurement.computational(4))
        assert joint.conditional_entropy_x_given_y() == pytest.approx(0.0, abs=1e-12)

    def test_identical_states(self):
        rho = random_density(2, 3)
        ens = Ensemble(1, tuple(EnsembleItem(x, p, rho) for x, p in [("a", 0.2), ("b", 0.8)]))
        joint = build_joint(ens, random_measurement(2, 1))
        assert mutual_information(joint) == pytest.approx(0.0, abs=1e-12)

    def test_geometric(self):
        ens, meas, _ = geometric_example(4)
        assert build_joint(ens, meas).conditional_entropy_x_given_y() == pytest.approx(2.125, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            build_joint(uniform_basis_code(1), ProjectiveMeasurement.computational(3))


class TestMapDecoder:
    def test_diagonal(self):
        joint = JointDistribution(("a", "b", "c"), ("a", "b", "c"), np.diag([0.2, 0.3, 0.5]))
        assert map_decoder(joint).mapping == {"a": "a", "b": "b", "c": "c"}

    def test_uniform_tie(self):
        joint = JointDistribution(("x1", "x0"), (0, 1), np.full((2, 2), 0.25))
        assert map_decoder(joint).mapping == {0: "x0", 1: "x0"}

    def test_geometric(self):
        ens, meas, _ = geometric_example(4)
        table = map_decoder(build_joint(ens, meas))
        for i in range(4):
            assert table(i) == "0" * i + "1" + "0" * (3 - i)
        assert table(4) == "0000"

    def test_zero_probability_outcome_gets_default(self):
        joint = JointDistribution(("b", "a"), (0, 1), [[0.5, 0.0], [0.5, 0.0]])
        assert map_decoder(joint)(1) == "a"

    @given(st.integers(2, 3), st.integers(2, 3), st.integers(0, 2**32))
    def test_optimal_among_all_tables(self, nx, ny, seed):
        rng = np.random.default_rng(seed)
        mass = rng.dirichlet(np.ones(nx * ny)).reshape(nx, ny)
        joint = JointDistribution(tuple(range(nx)), tuple(range(ny)), mass)
        best = decode_success(joint, map_decoder(joint))
        for choice in itertools.product(range(nx), repeat=ny):
            table = DecoderTable(dict(zip(range(ny), choice)))
            assert decode_success(joint, table) <= best + 1e-12


class TestReport:
    def test_geometric_n4(self):
        ens, meas, _ = geometric_example(4)
        joint = build_joint(ens, meas)
        rep = decode_report(joint, map_decoder(joint), 3)
        assert rep.success == pytest.approx(0.3125, abs=1e-12)
        assert rep.map_lower == pytest.approx(MAP_LOWER_N4, abs=1e-6)
        assert rep.cap_upper == pytest.approx(0.5)
        assert rep.both_hold

    def test_perfect_code(self):
        joint = build_joint(uniform_basis_code(2), ProjectiveMeasurement.computational(4))
        rep = decode_report(joint, map_decoder(joint), 2)
        assert rep.success == pytest.approx(1.0)
        assert rep.cap_upper == pytest.approx(1.0)
        assert rep.map_lower == pytest.approx(1.0)

    @pytest.mark.parametrize("seed", range(10))
    def test_uniform_source_capped(self, seed):
        rng = np.random.default_rng(seed)
        n, m = 3, 1
        labels = [format(i, "03b") for i in range(8)]
        ens = Ensemble(m, tuple(EnsembleItem(x, 1 / 8, random_density(2, int(rng.integers(2**31)))) for x in labels))
        joint = build_joint(ens, random_measurement(2, seed))
        assert decode_report(joint, map_decoder(joint), m).success <= 2.0 ** (m - n) + 1e-9

    def test_top_mass(self):
        assert top_mass([1 / 8] * 8, 2) == pytest.approx(0.25)
        assert top_mass([0.3, 0.7], 5) == 1.0
        assert top_mass([1 / 2, 1 / 4, 1 / 8, 1 / 16, 1 / 16], 2) == pytest.approx(0.75)

    def test_incomplete_table(self):
        joint = JointDistribution(("a",), (0, 1), [[0.5, 0.5]])
        with pytest.raises(ValueError):
            decode_report(joint, DecoderTable({0: "a"}), 1)


class TestProjectionSum:
    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_saturating(self, m):
        basis = np.eye(2**m)
        total, ok = projection_sum_check(list(basis), [np.outer(v, v) for v in basis], m)
        assert total == pytest.approx(2**m) and ok

    def test_single_codeword(self):
        total, ok = projection_sum_check([np.array([0.6, 0.8])], [np.eye(2)], 1)
        assert total == pytest.approx(1.0) and ok

    def test_overlapping_projectors(self):
        with pytest.raises(NotOrthogonalFamily):
            projection_sum_check([np.array([1, 0]), np.array([0, 1])], [np.eye(2), np.diag([1, 0])], 1)

    def test_codewords_too_spread(self):
        with pytest.raises(DimensionMismatch):
            projection_sum_check(list(np.eye(3)), [np.diag(r) for r in np.eye(3)], 1)

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_random_families(self, m):
        rng = np.random.default_rng(m)
        for _ in range(100):
            codewords, projectors = random_projection_family(m, rng)
            total, ok = projection_sum_check(codewords, projectors, m)
            assert ok and total <= 2**m + 1e-9


class TestGeometric:
    @pytest.mark.parametrize("n,success,info", [(1, 1.0, 1.0), (2, 0.75, 1.5), (4, 0.3125, 1.875)])
    def test_values(self, n, success, info):
        summary = geometric_example(n)[2]
        assert summary.success == pytest.approx(success, abs=1e-12)
        assert summary.mutual_information == pytest.approx(info, abs=1e-12)

    def test_group(self):
        assert geometric_group("1000") == 0
        assert geometric_group("0010") == 2
        assert geometric_group("0000") == 4

    @pytest.mark.parametrize("n", range(2, 9))
    def test_probability_route_beats_holevo(self, n):
        s = geometric_example(n)[2]
        assert s.prob_qubit_bound == pytest.approx(math.log2(n + 1))
        assert s.chi < 2.0
        assert s.chi == pytest.approx(2 - 2.0 ** -(n - 1), abs=1e-12)


class TestTightness:
    @given(st.integers(1, 4), st.integers(1, 3), st.integers(0, 2**32))
    def test_saturating_code_hits_cap(self, n_bits, m, seed):
        rng = np.random.default_rng(seed)
        labels = [format(i, f"0{n_bits}b") for i in range(2**n_bits)]
        probs = rng.dirichlet(np.ones(len(labels)))
        ens, meas = saturating_code(labels, list(probs / probs.sum()), m)
        joint = build_joint(ens, meas)
        rep = decode_report(joint, map_decoder(joint), m)
        assert rep.success == pytest.approx(rep.cap_upper, abs=1e-9)


def test_small_theorem_sweep():
    rep = theorem_sweep(60, seed=2)
    assert rep.holds
    assert any(row["ancilla"] for row in rep.rows)


def test_random_ensemble_is_valid():
    ens = random_ensemble(np.random.default_rng(0), 3, 2)
    assert len(ens.items) == 8 and ens.dim == 4
