import json

import numpy as np
import pytest

from quantavg.cli import main
from quantavg.data import Dataset, random_split
from quantavg.errors import ConfigError, DataError
from quantavg.io import ColumnSchema, load_csv, schema_from_json, write_dataset_csv
from quantavg.reports import ReportTable, emit_report


@pytest.fixture
def small_csv(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text("y,a,b\n1.5,2.0,3.0\n-0.5,4.0,5.0\n2.25,6.0,7.0\n")
    return path


class TestLoadCsv:
    def test_by_name_and_index(self, small_csv):
        by_name = load_csv(small_csv, ColumnSchema("y", ("a", "b")))
        by_index = load_csv(small_csv, ColumnSchema(0, (1, 2)))
        assert np.array_equal(by_name.X, by_index.X)
        assert by_name.columns == ("a", "b")
        assert by_name.n == 3 and by_name.p == 2

    def test_log_transform(self, small_csv):
        data = load_csv(small_csv, ColumnSchema("y", ("a", "b"), transform="log"))
        assert data.X[0, 0] == pytest.approx(np.log(2.0))

    def test_single_predictor(self, small_csv):
        data = load_csv(small_csv, ColumnSchema("y", ("b",)))
        assert data.p == 1

    def test_missing_cell_named(self, tmp_path):
        path = tmp_path / "holes.csv"
        path.write_text("y,a\n1.0,2.0\n3.0,\n")
        with pytest.raises(DataError, match=r"row 3, column a"):
            load_csv(path, ColumnSchema("y", ("a",)))

    def test_unparseable_cell_named(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("y,a\n1.0,二\n")
        with pytest.raises(DataError, match="row 2, column a"):
            load_csv(path, ColumnSchema("y", ("a",)))

    def test_negative_under_log_names_cell(self, tmp_path):
        path = tmp_path / "neg.csv"
        path.write_text("y,Height\n1.0,2.0\n1.5,-3.25\n")
        with pytest.raises(DataError, match="row 3, column Height"):
            load_csv(path, ColumnSchema("y", ("Height",), transform="log"))

    def test_unknown_column(self, small_csv):
        with pytest.raises(DataError, match="no column named"):
            load_csv(small_csv, ColumnSchema("y", ("zz",)))

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="not found"):
            load_csv(tmp_path / "nope.csv", ColumnSchema("y", ("a",)))

    def test_round_trip_exact(self, tmp_path, rng):
        data = Dataset(rng.normal(0, 1, (25, 3)), rng.normal(0, 1, 25),
                       columns=("u", "v", "w"))
        path = tmp_path / "round.csv"
        write_dataset_csv(path, data)
        back = load_csv(path, ColumnSchema("y", ("u", "v", "w")))
        assert np.max(np.abs(back.X - data.X)) < 1e-12
        assert np.max(np.abs(back.y - data.y)) < 1e-12

    def test_schema_from_json(self, tmp_path):
        path = tmp_path / "schema.json"
        path.write_text(json.dumps({"response": "y", "predictors": ["a"],
                                    "transform": "log"}))
        schema = schema_from_json(path)
        assert schema.response == "y" and schema.transform == "log"
        path.write_text(json.dumps({"predictors": ["a"]}))
        with pytest.raises(ConfigError):
            schema_from_json(path)

    def test_schema_validation(self):
        with pytest.raises(ConfigError):
            ColumnSchema("y", ("a",), transform="sqrt")
        with pytest.raises(ConfigError):
            ColumnSchema("y", ())


class TestRandomSplit:
    def test_partition_property(self, rng):
        data = Dataset(rng.normal(0, 1, (252, 3)), rng.normal(0, 1, 252))
        train, test = random_split(data, 150, seed=4)
        assert train.n == 150 and test.n == 102
        joined = np.vstack([train.X, test.X])
        assert joined.shape[0] == 252
        # disjoint and exhaustive: every original row appears exactly once
        original = {tuple(row) for row in data.X}
        assert {tuple(row) for row in joined} == original

    def test_deterministic(self, rng):
        data = Dataset(rng.normal(0, 1, (60, 2)), rng.normal(0, 1, 60))
        a1, b1 = random_split(data, 40, seed=9)
        a2, b2 = random_split(data, 40, seed=9)
        assert np.array_equal(a1.X, a2.X) and np.array_equal(b1.y, b2.y)

    def test_bounds(self, rng):
        data = Dataset(rng.normal(0, 1, (20, 2)), rng.normal(0, 1, 20))
        for bad in (0, 20, 25, -3):
            with pytest.raises(ValueError):
                random_split(data, bad, seed=0)


class TestEmitReport:
    def _table(self):
        return ReportTable(title="T", columns=("a", "b"),
                           rows=(("1", "2"), ("3", "4")), note="n")

    def test_byte_identical_reemission(self, tmp_path):
        paths1 = emit_report([self._table()], tmp_path, "rep")
        blobs = [p.read_bytes() for p in paths1]
        paths2 = emit_report([self._table()], tmp_path, "rep")
        assert paths1 == paths2
        assert [p.read_bytes() for p in paths2] == blobs

    def test_writes_text_and_csv(self, tmp_path):
        paths = emit_report([self._table()], tmp_path, "rep")
        names = {p.name for p in paths}
        assert names == {"rep.txt", "rep.csv"}
        text = (tmp_path / "rep.txt").read_text()
        assert "T" in text and "1" in text
        assert (tmp_path / "rep.csv").read_bytes() == b"a,b\r\n1,2\r\n3,4\r\n"

    def test_empty_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            emit_report([], tmp_path, "rep")


class TestCli:
    def test_usage_error_exit_1(self, capsys):
        assert main(["simulate", "--example", "7", "--ntr", "100"]) == 1
        assert main(["frobnicate"]) == 1
        assert main(["simulate", "--example", "1", "--ntr", "100",
                     "--error", "zz", "--reps", "2"]) == 1

    def test_missing_file_exit_2(self, tmp_path):
        schema = tmp_path / "s.json"
        schema.write_text(json.dumps({"response": "y", "predictors": ["a"]}))
        code = main(["fit", "--input", str(tmp_path / "nope.csv"),
                     "--schema", str(schema)])
        assert code == 2

    def test_numerical_failure_exit_3(self, tmp_path):
        path = tmp_path / "flat.csv"
        rows = "\n".join(f"{v},1.0" for v in np.linspace(0, 1, 60))
        path.write_text("y,a\n" + rows + "\n")
        schema = tmp_path / "s.json"
        schema.write_text(json.dumps({"response": "y", "predictors": ["a"]}))
        code = main(["fit", "--input", str(path), "--schema", str(schema),
                     "--method", "SMAQP"])
        assert code == 3  # constant covariate: no bandwidth exists

    def test_simulate_emits_reports(self, tmp_path):
        out = tmp_path / "rep"
        code = main(["simulate", "--example", "1", "--ntr", "100", "--nte",
                     "30", "--reps", "2", "--seed", "3", "--methods",
                     "PSMAQP", "--out", str(out)])
        assert code == 0
        names = sorted(p.name for p in out.iterdir())
        assert names == ["simulate_ex1_sn_tau0.5_ntr100_seed3.csv",
                         "simulate_ex1_sn_tau0.5_ntr100_seed3.txt"]

    def test_fit_predict_round_trip(self, tmp_path, rng):
        train = tmp_path / "train.csv"
        x = rng.uniform(0, 1, 80)
        y = 1.0 + 2.0 * x + 0.1 * rng.standard_normal(80)
        train.write_text("y,a\n" + "\n".join(f"{float(yi)!r},{float(xi)!r}"
                                             for yi, xi in zip(y, x)) + "\n")
        schema = tmp_path / "s.json"
        schema.write_text(json.dumps({"response": "y", "predictors": ["a"]}))
        model = tmp_path / "m.json"
        assert main(["fit", "--input", str(train), "--schema", str(schema),
                     "--method", "SMAQP", "--model", str(model)]) == 0
        newx = tmp_path / "new.csv"
        newx.write_text("a\n0.25\n0.5\n0.75\n")
        preds = tmp_path / "p.csv"
        assert main(["predict", "--model", str(model), "--input", str(newx),
                     "--out", str(preds)]) == 0
        lines = preds.read_text().strip().splitlines()
        assert lines[0] == "prediction"
        got = np.array([float(v) for v in lines[1:]])
        assert np.allclose(got, 1.0 + 2.0 * np.array([0.25, 0.5, 0.75]),
                           atol=0.15)

    def test_config_file_defaults_with_flag_override(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"reps": 2, "ntr": 100, "nte": 25}))
        out = tmp_path / "r"
        code = main(["--config", str(cfg), "simulate", "--example", "1",
                     "--ntr", "120", "--seed", "1", "--out", str(out)])
        assert code == 0
        assert any("ntr120" in p.name for p in out.iterdir())

    def test_config_file_rejects_unknown_keys(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"no_such_option": 1}))
        assert main(["--config", str(cfg), "simulate", "--example", "1",
                     "--ntr", "100", "--reps", "2"]) == 1

    def test_bodyfat_bootstrap_bounds(self, tmp_path):
        path = tmp_path / "bf.csv"
        path.write_text("BodyFat," + ",".join(
            ["Age", "Weight", "Height", "Neck", "Chest", "Abdomen", "Hip",
             "Thigh", "Knee", "Ankle", "Biceps", "Forearm", "Wrist"]) + "\n")
        code = main(["bodyfat", "--input", str(path), "--bootstrap", "7"])
        assert code == 1
