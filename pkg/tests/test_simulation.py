"""Tests for Monte Carlo comparative statics."""

import json

import pytest

from jubilee.core.simulation import COLUMNS, simulate, write_table


class TestSimulate:
    def test_debtor_profit_without_revision(self, plain_params):
        table = simulate(plain_params, [0.0], draws=200_000, seed=1)
        row = table.iloc[0]
        assert abs(row["debtor_profit"] - 1 / 24) <= 3 * row["debtor_profit_se"]
        assert row["debtor_profit"] == row["debtor_profit_without_revision"]

    def test_settlement_probability(self, plain_params):
        row = simulate(plain_params, [0.0], draws=200_000, seed=2).iloc[0]
        # P(theta_1 + theta_2 <= 0.5)
        assert abs(row["settlement_probability"] - 0.125) <= 3 * row["settlement_probability_se"]

    def test_revision_raises_debtor_profit(self, example_params):
        row = simulate(example_params, [1.0], draws=200_000, seed=3).iloc[0]
        gap = row["debtor_profit"] - row["debtor_profit_without_revision"]
        assert gap == pytest.approx(1 / 6, abs=0.01)

    def test_columns_and_rows(self, example_params):
        table = simulate(example_params, [0.0, 0.5, 1.0], draws=1000, seed=0)
        assert list(table.columns) == COLUMNS
        assert list(table["alpha"]) == [0.0, 0.5, 1.0]

    def test_same_seed_same_table(self, example_params):
        first = simulate(example_params, [0.0, 1.0], draws=5000, seed=9)
        second = simulate(example_params, [0.0, 1.0], draws=5000, seed=9)
        assert first.equals(second)

    def test_needs_draws(self, example_params):
        with pytest.raises(ValueError):
            simulate(example_params, [0.0], draws=0, seed=0)


class TestWriteTable:
    def test_writes_csv_and_json(self, example_params, tmp_path):
        table = simulate(example_params, [0.0, 1.0], draws=1000, seed=0)
        csv_path, json_path = write_table(table, tmp_path / "sim", config_hash="abc123", seed=0, draws=1000)

        lines = csv_path.read_text().splitlines()
        assert lines[0] == "# config_hash=abc123"
        assert lines[1] == "# seed=0"
        assert lines[3].startswith("alpha,")

        document = json.loads(json_path.read_text())
        assert document["config_hash"] == "abc123"
        assert len(document["rows"]) == 2
