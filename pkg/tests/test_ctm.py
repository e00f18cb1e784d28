"""Machine enumeration, distributions, and table round-trips."""

import math
from fractions import Fraction

import numpy as np
import pytest

from bdmreg import (
    ConstantCtmTable,
    CtmTable,
    DimensionMismatch,
    EmptyTable,
    MissingBlock,
    ParseError,
    RunStatus,
    TuringMachine,
    ZeroHaltingMachines,
    average_ctm,
    build_ctm_table,
    enumerate_distribution,
    iter_machines,
    load_ctm_table,
    lookup,
    machine_count,
    run_tm,
    save_ctm_table,
)
from oracles import simulate_machine


class TestRunTm:
    def test_immediate_halt_produces_two_cells(self):
        # (state 1, read 0) -> write 1, move right, halt: the origin holds 1
        # and the halt move lands on a fresh blank cell, so the output is
        # the two visited cells.
        machine = TuringMachine(1, ((1, 1, 0), (0, 1, 0)))
        outcome = run_tm(machine, 10)
        assert outcome.status is RunStatus.HALTED
        assert outcome.output == "10"
        assert outcome.steps == 1

    def test_runaway_machine_exceeds_step_limit(self):
        machine = TuringMachine(1, ((0, 1, 1), (0, 1, 1)))
        outcome = run_tm(machine, 1)
        assert outcome.status is RunStatus.STEP_LIMIT_EXCEEDED
        assert outcome.output == ""
        assert outcome.steps == 1

    def test_two_state_max_halting_steps(self):
        # Known maximal halting step count for the 2-state class, recovered
        # here by exhaustive enumeration rather than assumed.
        best = 0
        for machine in iter_machines(2):
            outcome = run_tm(machine, 10)
            if outcome.halted:
                best = max(best, outcome.steps)
        assert best == 6

    def test_matches_independent_interpreter(self):
        rng = np.random.default_rng(42)
        machines = list(iter_machines(2))
        for k in rng.integers(0, len(machines), size=300):
            machine = machines[k]
            outcome = run_tm(machine, 10)
            out, steps = simulate_machine(machine.transitions, 2, 10)
            if out is None:
                assert outcome.status is RunStatus.STEP_LIMIT_EXCEEDED
            else:
                assert outcome.output == out
                assert outcome.steps == steps

    def test_step_limit_must_be_positive(self):
        machine = TuringMachine(1, ((1, 1, 0), (0, 1, 0)))
        with pytest.raises(ValueError):
            run_tm(machine, 0)


class TestMachineClass:
    def test_machine_count_formula(self):
        assert machine_count(1) == 36
        assert machine_count(2) == 10000
        assert machine_count(3) == 14**6
        assert machine_count(1, dimension=2) == 100
        assert machine_count(2, dimension=2) == 18**4

    def test_enumerator_visits_every_machine(self):
        assert sum(1 for _ in iter_machines(1)) == 36
        assert sum(1 for _ in iter_machines(2)) == 10000
        assert sum(1 for _ in iter_machines(1, dimension=2)) == 100

    def test_transition_table_must_be_total(self):
        with pytest.raises(ValueError):
            TuringMachine(2, ((1, 1, 0),))

    def test_next_state_range_checked(self):
        with pytest.raises(ValueError):
            TuringMachine(1, ((1, 1, 2), (0, 1, 0)))


class TestEnumerateDistribution:
    def test_one_state_distribution(self):
        # A 1-state machine halts on its first step or never: only the two
        # halt entries for (state 1, read 0) terminate, each writing one
        # symbol and stopping on a blank cell.
        dist = enumerate_distribution(1, 10)
        assert dist == {"00": Fraction(1, 2), "10": Fraction(1, 2)}

    def test_one_state_distribution_2d(self):
        dist = enumerate_distribution(1, 10, dimension=2)
        assert dist == {
            ("00",): Fraction(1, 2),
            ("10",): Fraction(1, 2),
        }

    def test_ratios_sum_to_one_exactly(self):
        for n, dimension in ((1, 1), (2, 1), (1, 2), (2, 2)):
            dist = enumerate_distribution(n, 10, dimension)
            assert sum(dist.values()) == Fraction(1)

    def test_zero_halting_machines_impossible_at_limit_one(self):
        # Step limit 1 still lets the immediate-halt machines finish, so the
        # error path needs an artificial trigger: no machine halts in the
        # 2-D class either, so check the error type on a crafted call.
        dist = enumerate_distribution(1, 1)
        assert sum(dist.values()) == Fraction(1)
        with pytest.raises(ValueError):
            enumerate_distribution(1, 0)

    def test_monotone_step_limits(self):
        # Raising the limit never removes support and never lowers the
        # halting count (frequencies can only be re-normalized downward).
        small = enumerate_distribution(2, 3)
        large = enumerate_distribution(2, 10)
        assert set(small) <= set(large)

    def test_most_frequent_output_has_min_complexity(self):
        dist = enumerate_distribution(2, 6)
        table = build_ctm_table(2, 6)
        top = max(dist, key=dist.get)
        assert table.lookup(top) == min(table.entries.values())

    def test_2d_enumeration_capped(self):
        with pytest.raises(ValueError):
            enumerate_distribution(3, 10, dimension=2)


class TestBuildCtmTable:
    def test_values_are_neg_log2_of_ratios(self, table_1d_22):
        dist = enumerate_distribution(2, 10)
        for out, ratio in dist.items():
            np.testing.assert_allclose(
                table_1d_22.lookup(out), -math.log2(ratio), rtol=0, atol=1e-12
            )

    def test_stored_mass_sums_to_one(self, table_1d_22):
        mass = sum(2.0 ** -v for v in table_1d_22.entries.values())
        np.testing.assert_allclose(mass, 1.0, rtol=0, atol=1e-12)

    def test_equal_ratio_means_equal_value(self):
        dist = enumerate_distribution(2, 10)
        table = build_ctm_table(2, 10)
        by_ratio = {}
        for out, ratio in dist.items():
            by_ratio.setdefault(ratio, set()).add(table.lookup(out))
        for values in by_ratio.values():
            assert len(values) == 1

    def test_min_value_is_neg_log2_max_ratio(self):
        dist = enumerate_distribution(2, 10)
        table = build_ctm_table(2, 10)
        np.testing.assert_allclose(
            min(table.entries.values()), -math.log2(max(dist.values()))
        )

    def test_all_values_positive(self, table_1d_22):
        assert all(v > 0 for v in table_1d_22.entries.values())


class TestCtmTableLookup:
    def test_present_key(self, full_2x2_table):
        assert full_2x2_table.lookup("2x2:0000") == 3.0
        assert lookup(full_2x2_table, np.zeros((2, 2), dtype=int)) == 3.0

    def test_missing_key_max_plus_one(self):
        table = CtmTable(2, {"2x2:0000": 22.0, "2x2:1111": 36.0})
        assert table.lookup("2x2:0110") == 37.0

    def test_missing_key_fail_policy(self):
        table = CtmTable(
            2, {"2x2:0000": 22.0}, missing_policy="fail"
        )
        with pytest.raises(MissingBlock):
            table.lookup("2x2:0110")

    def test_width_mismatch_rejected(self, full_2x2_table):
        with pytest.raises(DimensionMismatch):
            full_2x2_table.lookup(np.zeros((4, 4), dtype=int))

    def test_values_must_be_non_negative(self):
        with pytest.raises(ValueError):
            CtmTable(2, {"2x2:0000": -1.0})


class TestAverage:
    def test_two_entry_mean(self):
        table = CtmTable(2, {"2x2:0000": 22.0, "2x2:1111": 36.0})
        assert average_ctm(table) == 29.0

    def test_singleton(self):
        table = CtmTable(1, {"01": 7.5})
        assert average_ctm(table) == 7.5

    def test_empty_table(self):
        table = CtmTable(2, {})
        with pytest.raises(EmptyTable):
            average_ctm(table)

    def test_built_table_cross_sum(self, table_1d_22):
        # Mean rechecked by an independent fold over the entries.
        total = 0.0
        count = 0
        for value in table_1d_22.entries.values():
            total += value
            count += 1
        np.testing.assert_allclose(average_ctm(table_1d_22), total / count)


class TestTableFiles:
    def test_round_trip_built_table(self, table_1d_22, tmp_path):
        path = tmp_path / "t.ctm"
        save_ctm_table(table_1d_22, path)
        assert load_ctm_table(path) == table_1d_22

    def test_round_trip_uniform_2d(self, full_2x2_table, tmp_path):
        path = tmp_path / "t.ctm"
        save_ctm_table(full_2x2_table, path)
        loaded = load_ctm_table(path)
        assert loaded == full_2x2_table
        assert loaded.uniform

    def test_fixture_file_zero_block(self, tmp_path):
        path = tmp_path / "t.ctm"
        path.write_text("ctm r=4 dim=2\n0000 22.0\n")
        table = load_ctm_table(path)
        assert table.lookup(np.zeros((4, 4), dtype=int)) == 22.0

    def test_duplicate_key_rejected(self, tmp_path):
        path = tmp_path / "t.ctm"
        path.write_text("ctm r=4 dim=2\n0000 22.0\n0000 23.0\n")
        with pytest.raises(ParseError) as err:
            load_ctm_table(path)
        assert err.value.line == 3

    def test_malformed_line_reports_number(self, tmp_path):
        path = tmp_path / "t.ctm"
        path.write_text("ctm r=4 dim=2\n0000 22.0\nnot a line at all\n")
        with pytest.raises(ParseError) as err:
            load_ctm_table(path)
        assert err.value.line == 3

    def test_key_width_mismatch(self, tmp_path):
        path = tmp_path / "t.ctm"
        path.write_text("ctm r=4 dim=2\n00 22.0\n")
        with pytest.raises(DimensionMismatch):
            load_ctm_table(path)

    def test_key_out_of_range_for_width(self, tmp_path):
        # r=2 dim=1 keys occupy 2 bits in one hex digit; 0xc does not fit.
        path = tmp_path / "t.ctm"
        path.write_text("ctm r=2 dim=1\nc 5.0\n")
        with pytest.raises(DimensionMismatch):
            load_ctm_table(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "t.ctm"
        path.write_text("not a table\n")
        with pytest.raises(ParseError) as err:
            load_ctm_table(path)
        assert err.value.line == 1

    def test_values_round_trip_bit_exactly(self, tmp_path):
        values = [1.0 / 3.0, math.pi, 4.527358524145092, 2.0**-40]
        table = CtmTable(
            1, {f"{k:04b}": v for k, v in enumerate(values)}
        )
        path = tmp_path / "t.ctm"
        save_ctm_table(table, path)
        loaded = load_ctm_table(path)
        for key, value in table.entries.items():
            assert loaded.entries[key] == value


class TestConstantTable:
    def test_every_block_same_price(self):
        table = ConstantCtmTable(2, 29.0)
        assert table.lookup("4x4:" + "0" * 16) == 29.0
        assert table.lookup(np.ones((2, 2), dtype=int)) == 29.0
        assert table.average() == 29.0
        assert table.max_value == 29.0

    def test_dense_values_constant(self):
        table = ConstantCtmTable(2, 5.0)
        np.testing.assert_array_equal(
            table.dense_values(2), np.full(16, 5.0)
        )

    def test_constant_must_be_positive(self):
        with pytest.raises(ValueError):
            ConstantCtmTable(2, 0.0)


class TestDenseValues:
    def test_matches_lookup_everywhere(self, full_2x2_table):
        dense = full_2x2_table.dense_values(2)
        for key in range(16):
            assert dense[key] == full_2x2_table.lookup(f"2x2:{key:04b}")

    def test_missing_filled_with_policy_value(self):
        table = CtmTable(2, {"2x2:0000": 22.0, "2x2:1111": 36.0})
        dense = table.dense_values(2)
        assert dense[0] == 22.0
        assert dense[15] == 36.0
        assert dense[3] == 37.0

    def test_fail_policy_marks_missing_as_nan(self):
        table = CtmTable(2, {"2x2:0000": 22.0}, missing_policy="fail")
        dense = table.dense_values(2)
        assert np.isnan(dense[1])
