import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from congruence import io
from congruence.distributions import DoublePoisson, Gaussian, NegativeBinomial, Poisson


def write(path, lines):
    path.write_text("\n".join(lines) + "\n")
    return path


class TestFloatFormat:
    @given(v=st.floats(allow_nan=False, allow_infinity=False))
    def test_round_trip(self, v):
        assert float(io.format_float(v)) == v
        assert json.loads(io.dumps(v)) == v

    @pytest.mark.parametrize("v, text", [(math.inf, '"inf"'), (-math.inf, '"-inf"'), (math.nan, '"nan"'),
                                         (1.0, "1.0"), (0.1, "0.10000000000000001"), (1e300, "1.0000000000000001e+300")])
    def test_literals(self, v, text):
        assert io.dumps(v) == text

    def test_integers_stay_integers(self):
        assert io.dumps({"n": 3, "flag": True, "none": None}) == '{"n": 3, "flag": true, "none": null}'

    def test_indented_output_sorted_and_parseable(self):
        text = io.dumps({"b": [1.5, np.float64(2.0)], "a": {"z": np.arange(2)}}, indent=2)
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"a": {"z": [0, 1]}, "b": [1.5, 2.0]}

    def test_unknown_type(self):
        with pytest.raises(TypeError):
            io.dumps({"x": object()})


class TestDataset:
    def test_round_trip(self, tmp_path, rng):
        xs, ys = rng.normal(size=(7, 3)), rng.normal(size=7)
        path = tmp_path / "d.ndjson"
        io.write_ndjson(path, io.dataset_rows(xs, ys))
        s = io.read_dataset(path)
        np.testing.assert_array_equal(s.conditioning, xs)
        np.testing.assert_array_equal(s.outputs, ys)

    def test_blank_lines_skipped(self, tmp_path):
        p = write(tmp_path / "d.ndjson", ['{"x": [1], "y": 2}', "", '{"x": [2], "y": 3}'])
        assert len(io.read_dataset(p)) == 2

    @pytest.mark.parametrize("lines, line, fragment", [
        (['{"x": [1], "y": 2}', "{not json"], 2, "invalid JSON"),
        (['{"x": [1], "y": 2}', '{"x": [1]}'], 2, "missing"),
        (['{"x": [], "y": 2}'], 1, "nonempty"),
        (['{"x": ["a"], "y": 2}'], 1, "number"),
        (['{"x": [1], "y": 2}', '{"x": [1, 2], "y": 2}'], 2, "dimension"),
        (['[1, 2]'], 1, "object"),
    ])
    def test_errors_carry_line_numbers(self, tmp_path, lines, line, fragment):
        p = write(tmp_path / "bad.ndjson", lines)
        with pytest.raises(io.DataError, match=fragment) as info:
            io.read_dataset(p)
        assert info.value.line == line
        assert f"bad.ndjson:{line}:" in str(info.value)

    def test_empty_file(self, tmp_path):
        p = tmp_path / "e.ndjson"
        p.write_text("\n")
        with pytest.raises(io.DataError, match="no rows"):
            io.read_dataset(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(io.DataError, match="cannot read"):
            io.read_dataset(tmp_path / "absent.ndjson")


class TestPredictions:
    def test_round_trip(self, tmp_path):
        dists = [Gaussian(0.5, 2.0), Poisson(3.0), NegativeBinomial(2.0, 0.25), DoublePoisson(4.0, 0.7)]
        xs = np.arange(8.0).reshape(4, 2)
        p = tmp_path / "p.ndjson"
        io.write_ndjson(p, io.prediction_rows(xs, dists))
        got_xs, got = io.read_predictions(p)
        np.testing.assert_array_equal(got_xs, xs)
        assert got == dists

    @pytest.mark.parametrize("row, fragment", [
        ('{"x": [1], "family": "poisson", "params": [-1]}', "positive"),
        ('{"x": [1], "family": "cauchy", "params": [1]}', "unknown"),
        ('{"x": [1], "family": "poisson", "params": 3}', "params"),
    ])
    def test_bad_rows(self, tmp_path, row, fragment):
        p = write(tmp_path / "p.ndjson", ['{"x": [0], "family": "poisson", "params": [1]}', row])
        with pytest.raises(io.DataError, match=fragment) as info:
            io.read_predictions(p)
        assert info.value.line == 2

    def test_queries_ignore_other_fields(self, tmp_path):
        p = write(tmp_path / "q.ndjson", ['{"x": [1, 2], "id": 5}', '{"x": [3, 4]}'])
        np.testing.assert_array_equal(io.read_queries(p), [[1, 2], [3, 4]])


class TestCsv:
    def test_floats_full_precision(self, tmp_path):
        p = tmp_path / "t.csv"
        io.write_csv(p, ["level", "empirical"], [(0.1, 1 / 3), ("a", 2)])
        lines = p.read_text().splitlines()
        assert lines[0] == "level,empirical"
        assert float(lines[1].split(",")[1]) == 1 / 3
        assert lines[2] == "a,2"
