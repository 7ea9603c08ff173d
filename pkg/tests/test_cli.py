import json

import numpy as np
import pytest

from wfr_split_lab.cli import main
from wfr_split_lab.config import (
    apply_overrides,
    format_value,
    load_config,
    parse_value,
)
from wfr_split_lab.errors import ConfigError


def run(tmp_path, *args) -> tuple[int, str]:
    out = tmp_path / "out.txt"
    code = main([*args, "--out", str(out)])
    return code, out.read_text() if out.exists() else ""


class TestConfigParsing:
    def test_scalar_types(self):
        assert parse_value("3") == 3
        assert parse_value("3.5") == 3.5
        assert parse_value("true") is True
        assert parse_value("hello") == "hello"

    def test_list_syntax(self):
        assert parse_value("[1, 2.5, 3]") == [1, 2.5, 3]
        assert parse_value("[]") == []

    def test_round_trip(self):
        for v in (3, 3.5, True, [1.0, 2.0, 3.0]):
            assert parse_value(format_value(v)) == v

    def test_file_with_comments(self, tmp_path):
        p = tmp_path / "cfg.txt"
        p.write_text("# comment\nc_pi = 4.0\nm_pi = [1, 2]\n\n")
        cfg = load_config(str(p))
        assert cfg == {"c_pi": 4.0, "m_pi": [1, 2]}

    def test_malformed_line(self, tmp_path):
        p = tmp_path / "cfg.txt"
        p.write_text("report pass\n")
        with pytest.raises(ConfigError) as err:
            load_config(str(p))
        assert "cfg.txt:1" in str(err.value)

    def test_override_syntax(self):
        cfg = apply_overrides({"a": 1}, ["a=2", "b=[1, 2]"])
        assert cfg == {"a": 2, "b": [1, 2]}
        with pytest.raises(ConfigError):
            apply_overrides({}, ["no-equals"])


class TestExitCodes:
    def test_unknown_key_is_config_error(self, tmp_path):
        code, _ = run(tmp_path, "figure1", "bogus_key=1")
        assert code == 2

    def test_unknown_experiment_is_usage_error(self, capsys):
        assert main(["figure99"]) == 2
        capsys.readouterr()

    def test_unknown_suite_is_config_error(self, tmp_path):
        code, _ = run(tmp_path, "validate", "--suite", "nope")
        assert code == 2

    def test_bad_value_type(self, tmp_path):
        code, _ = run(tmp_path, "figure1", "n_gamma=hello")
        assert code == 2

    def test_nonpositive_step_is_config_error(self, tmp_path):
        assert run(tmp_path, "figure2", "gamma=-1")[0] == 2
        assert run(tmp_path, "grid-demo", "dt_ref=0.01")[0] == 2

    def test_non_spd_covariance_is_config_error(self, tmp_path):
        assert run(tmp_path, "figure1", "c_pi=-4")[0] == 2
        assert run(tmp_path, "figure3", "delta=1.5")[0] == 2

    def test_passing_suite_exits_zero(self, tmp_path):
        code, text = run(tmp_path, "validate", "--suite", "series-check")
        assert code == 0
        assert "PASS" in text and "FAIL" not in text

    def test_known_red_suite_exits_one(self, tmp_path):
        code, text = run(tmp_path, "validate", "--suite", "logconcavity-bounds")
        assert code == 1
        assert "FAIL logconcavity-bounds: uniform certificate lower-bounds" in text


class TestCsvOutput:
    def test_metadata_header_and_columns(self, tmp_path):
        code, text = run(tmp_path, "figure1", "n_gamma=5")
        assert code == 0
        lines = text.splitlines()
        meta = [ln for ln in lines if ln.startswith("# ")]
        assert any(ln.startswith("# seed = 42") for ln in meta)
        assert any(ln.startswith("# n_gamma = 5") for ln in meta)
        header = lines[len(meta)]
        assert header == "gamma,kl_exact,kl_wfr_split,kl_frw_split,diff_wfr,diff_frw"
        assert len(lines) == len(meta) + 1 + 5

    def test_byte_identical_reruns(self, tmp_path):
        _, first = run(tmp_path, "figure1", "n_gamma=25")
        _, second = run(tmp_path, "figure1", "n_gamma=25")
        assert first == second

    def test_threads_do_not_change_bytes(self, tmp_path):
        _, serial = run(tmp_path, "figure1", "n_gamma=40")
        _, threaded = run(tmp_path, "figure1", "n_gamma=40", "--threads", "4")
        assert serial == threaded

    def test_threads_deterministic_on_multi_case_experiment(self, tmp_path):
        _, serial = run(tmp_path, "figure3", "n_t=20")
        _, threaded = run(tmp_path, "figure3", "n_t=20", "--threads", "3")
        assert serial == threaded

    def test_seventeen_digit_floats(self, tmp_path):
        _, text = run(tmp_path, "ratio", "n=10")
        rows = [ln for ln in text.splitlines() if ln.startswith(("w-fr", "fr-w"))]
        assert rows
        val = rows[0].split(",")[3]
        assert float(val) == float(format(float(val), ".17g"))
        assert len(val.replace(".", "").replace("-", "").lstrip("0")) >= 15

    def test_json_mirror(self, tmp_path):
        out = tmp_path / "r.json"
        code = main(["ratio", "n=10", "--json", "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["columns"][0] == "kind"
        assert len(payload["rows"]) == 2

    def test_config_file_plus_override(self, tmp_path):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("n_gamma = 7\ngamma_max = 2.0\n")
        _, text = run(tmp_path, "figure1", "--config", str(cfg), "n_gamma=3")
        lines = text.splitlines()
        assert "# n_gamma = 3" in lines
        assert "# gamma_max = 2" in lines


class TestFigureSemantics:
    def test_figure1_left_signs(self, tmp_path):
        _, text = run(tmp_path, "figure1", "n_gamma=50")
        rows = [ln.split(",") for ln in text.splitlines() if not ln.startswith(("#", "gamma"))]
        diffs = np.array([float(r[4]) for r in rows])
        assert np.all(diffs < 0.0)

    def test_figure1_right_signs(self, tmp_path):
        _, text = run(tmp_path, "figure1", "n_gamma=50", "c_pi=1", "c_0=100")
        rows = [ln.split(",") for ln in text.splitlines() if not ln.startswith(("#", "gamma"))]
        diffs = np.array([float(r[5]) for r in rows])
        assert np.all(diffs < 0.0)

    def test_figure2_ratio_columns(self, tmp_path):
        _, text = run(tmp_path, "figure2", "n_max=30")
        rows = [ln.split(",") for ln in text.splitlines() if not ln.startswith(("#", "t,"))]
        assert len(rows) == 30
        first = [float(x) for x in rows[0]]
        assert first[1] > 0.0 and first[2] > 0.0

    def test_figure2_last_row_meets_limit(self, tmp_path):
        _, text = run(tmp_path, "figure2")
        rows = [ln.split(",") for ln in text.splitlines() if not ln.startswith(("#", "t,"))]
        assert len(rows) == 400
        last = [float(x) for x in rows[-1]]
        assert abs(last[1] - last[3]) < 1e-4  # ratio_wfr vs asymptotic_wfr
        assert abs(last[2] - last[4]) < 1e-4  # ratio_frw vs asymptotic_frw
        kl_exact = np.array([float(r[5]) for r in rows])
        assert np.all(np.diff(kl_exact) <= 0.0)
        assert kl_exact[-1] < 1e-8

    def test_figure3_inadmissible_case_reported(self, tmp_path):
        _, text = run(tmp_path, "figure3", "c_pi_list=[100, 2]", "n_t=10")
        assert "# case_c_pi_2 = inadmissible" in text
        rows = [ln for ln in text.splitlines() if ln.startswith("2,")]
        assert not rows  # no curve for the inadmissible case

    def test_figure3_time_zero_rows_are_exact(self, tmp_path):
        _, text = run(tmp_path, "figure3", "n_t=5")
        rows = [ln.split(",") for ln in text.splitlines() if not ln.startswith(("#", "c_pi,"))]
        zero_rows = [r for r in rows if float(r[1]) == 0.0]
        assert zero_rows
        for r in zero_rows:
            assert float(r[3]) == 1.0  # true constant equals 1/c_0 exactly

    def test_figure4_bound_columns(self, tmp_path):
        _, text = run(tmp_path, "figure4", "n_t=41")
        lines = text.splitlines()
        assert any(ln.startswith("# sharp_t0 = 6.8977") for ln in lines)
        rows = [ln.split(",") for ln in lines if not ln.startswith(("#", "t,"))]
        for r in rows:
            t, kl, minrule, sharp = (float(r[i]) for i in range(4))
            jeff, jbound = float(r[4]), float(r[5])
            assert minrule >= kl - 1e-12
            assert jbound >= jeff - 1e-12
            if t < 6.8977:
                assert np.isnan(sharp)
            else:
                assert sharp >= kl

    def test_grid_demo_runs_small(self, tmp_path):
        code, text = run(
            tmp_path, "grid-demo", "t_max=0.2", "n_points=501", "dt_ref=0.001"
        )
        assert code == 0
        rows = [ln for ln in text.splitlines() if not ln.startswith(("#", "step"))]
        assert len(rows) == 3


class TestValidateJson:
    def test_json_report_structure(self, tmp_path):
        out = tmp_path / "v.json"
        code = main(["validate", "--suite", "riccati", "--json", "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["passed"] is True
        assert all("value" in c and "threshold" in c for c in payload["checks"])
