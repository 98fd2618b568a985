from __future__ import annotations

import json

import numpy as np
import pytest

from riforest.builder import build_forest
from riforest.exceptions import DataError, ModelFormatError
from riforest.io import (
    format_table,
    load_csv,
    load_model,
    model_to_dict,
    parse_table,
    save_csv,
    save_model,
)
from riforest.model import Dataset, RiForestParams
from riforest.scoring import score_dataset


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadCsv:
    def test_features_and_labels(self, tmp_path):
        ds = load_csv(write(tmp_path, "a,b,label\n1,2,0\n3.5,-4,1\n"))
        assert (ds.n, ds.d) == (2, 2)
        assert ds.column_names == ("a", "b")
        assert ds.labels.tolist() == [0, 1]
        assert ds.values.tolist() == [[1.0, 2.0], [3.5, -4.0]]

    def test_label_column_anywhere(self, tmp_path):
        ds = load_csv(write(tmp_path, "y,a\n1,5\n0,6\n"), label_column="y")
        assert ds.labels.tolist() == [1, 0] and ds.values[:, 0].tolist() == [5.0, 6.0]

    def test_unlabeled(self, tmp_path):
        assert load_csv(write(tmp_path, "a\n1\n2\n")).labels is None

    def test_labels_required(self, tmp_path):
        with pytest.raises(DataError, match="label column 'label' required"):
            load_csv(write(tmp_path, "a\n1\n"), require_labels=True)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="no such file"):
            load_csv(tmp_path / "absent.csv")

    def test_nan_cell(self, tmp_path):
        with pytest.raises(DataError, match=r"line 3, column 'b'.*NaN"):
            load_csv(write(tmp_path, "a,b\n1,2\n3,NaN\n"))

    def test_text_cell(self, tmp_path):
        with pytest.raises(DataError, match=r"line 2, column 'a'.*'x'"):
            load_csv(write(tmp_path, "a,b\nx,2\n"))

    def test_bad_label(self, tmp_path):
        with pytest.raises(DataError, match="0 or 1"):
            load_csv(write(tmp_path, "a,label\n1,2\n"))

    def test_empty_body(self, tmp_path):
        with pytest.raises(DataError, match="no data rows"):
            load_csv(write(tmp_path, "a,b\n"))

    def test_ragged(self, tmp_path):
        with pytest.raises(DataError, match="expected 2 fields"):
            load_csv(write(tmp_path, "a,b\n1\n"))

    def test_round_trip(self, tmp_path, annulus):
        path = tmp_path / "out.csv"
        save_csv(annulus, path)
        back = load_csv(path)
        assert np.array_equal(back.values, annulus.values)
        assert np.array_equal(back.labels, annulus.labels)


class TestModelFiles:
    @pytest.fixture
    def model_path(self, tmp_path, small_forest):
        path = tmp_path / "model.json"
        save_model(small_forest, path)
        return path

    def test_round_trip_scores_bitwise(self, model_path, small_forest):
        x = np.random.default_rng(0).normal(size=(1000, 2)) * 3
        loaded = load_model(model_path)
        assert np.array_equal(score_dataset(x, loaded).scores, score_dataset(x, small_forest).scores)
        assert model_to_dict(loaded) == model_to_dict(small_forest)

    def test_document_fields(self, model_path):
        doc = json.loads(model_path.read_text())
        assert doc["format_version"] == 1
        assert set(doc) == {"format_version", "params", "standardization", "c_psi", "trees"}
        node = doc["trees"][0]["nodes"][0]
        assert {"type", "coeffs", "q", "pl", "left", "right", "size"} <= set(node)
        assert "lambda" in doc["trees"][0]

    def _edit(self, path, change):
        doc = json.loads(path.read_text())
        change(doc)
        path.write_text(json.dumps(doc))

    def test_version_mismatch(self, model_path):
        self._edit(model_path, lambda d: d.update(format_version=999))
        with pytest.raises(ModelFormatError, match="format_version"):
            load_model(model_path)

    def test_truncated(self, model_path):
        text = model_path.read_text()
        model_path.write_text(text[: len(text) // 2])
        with pytest.raises(ModelFormatError):
            load_model(model_path)

    def test_dangling_child(self, model_path):
        self._edit(model_path, lambda d: d["trees"][0]["nodes"][0].update(left=10**6))
        with pytest.raises(ModelFormatError, match="dangling"):
            load_model(model_path)

    def test_pl_out_of_range(self, model_path):
        self._edit(model_path, lambda d: d["trees"][0]["nodes"][0].update(pl=1.5))
        with pytest.raises(ModelFormatError, match="pl"):
            load_model(model_path)

    def test_bad_coefficient_index(self, model_path):
        self._edit(model_path, lambda d: d["trees"][0]["nodes"][0].update(coeffs=[[7, 1.0]]))
        with pytest.raises(ModelFormatError, match="coefficient index"):
            load_model(model_path)

    def test_invalid_params(self, model_path):
        self._edit(model_path, lambda d: d["params"].update(num_bins=1))
        with pytest.raises(ModelFormatError, match="num_bins"):
            load_model(model_path)

    def test_unreachable_node(self, model_path):
        self._edit(model_path, lambda d: d["trees"][0]["nodes"].append({"type": "external", "size": 1}))
        with pytest.raises(ModelFormatError, match="unreachable"):
            load_model(model_path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_model(tmp_path / "nope.json")

    def test_external_only_tree(self, tmp_path):
        forest = build_forest(Dataset(np.ones((5, 1))), RiForestParams(num_trees=2))
        save_model(forest, tmp_path / "m.json")
        assert load_model(tmp_path / "m.json").trees[0].root.is_external


class TestTables:
    ROWS = [{"run": 0, "auroc": 0.1 + 0.2}, {"run": 1, "auroc": 1.0}]

    def test_csv_round_trip(self):
        text = format_table(self.ROWS, "csv")
        assert parse_table(text) == self.ROWS

    def test_csv_summary_lines(self):
        text = format_table(self.ROWS, "csv", {"mean_auroc": 0.65, "cv": None})
        rows = parse_table(text)
        assert rows[2] == {"run": "mean_auroc", "auroc": 0.65}
        assert rows[3] == {"run": "cv", "auroc": None}

    def test_json_round_trip(self):
        text = format_table(self.ROWS, "json", {"mean_auroc": 0.65})
        assert parse_table(text, "json") == self.ROWS
        assert json.loads(text)["summary"] == {"mean_auroc": 0.65}

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            format_table(self.ROWS, "xml")
