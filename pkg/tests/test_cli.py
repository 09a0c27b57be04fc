import json

import numpy as np
import pytest

from baresim import cli


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


BASE_CONFIG = {
    "generator": {"family": "power", "gamma": 1.0, "scale": 1.0},
    "reference_vector": [0.2, 0.3, 0.5],
    "mode": "simplex",
    "target": "divergence",
    "constraint": {"type": "coordinate", "index": 0, "bound": 0.5, "op": ">="},
    "estimator": {"n": 400, "L": 4000, "seed": 7},
}


class TestEstimateCommand:
    def test_result_schema(self, tmp_path, capsys):
        cfg = write_config(tmp_path, BASE_CONFIG)
        out = tmp_path / "result.json"
        code = cli.main(["estimate", "--config", cfg, "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        for key in ("value", "log_pi_hat", "hits", "stderr", "seed", "n", "L"):
            assert key in payload
        assert payload["seed"] == 7
        assert payload["hits"] >= 1
        assert payload["value"] == pytest.approx(0.223, abs=0.05)

    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_config(tmp_path, BASE_CONFIG)
        out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
        assert cli.main(["estimate", "--config", cfg, "--out", str(out1)]) == 0
        assert cli.main(["estimate", "--config", cfg, "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_flag_overrides_seed(self, tmp_path):
        cfg = write_config(tmp_path, BASE_CONFIG)
        out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
        cli.main(["estimate", "--config", cfg, "--out", str(out1), "--seed", "1"])
        cli.main(["estimate", "--config", cfg, "--out", str(out2), "--seed", "2"])
        a = json.loads(out1.read_text())
        b = json.loads(out2.read_text())
        assert a["seed"] == 1 and b["seed"] == 2
        assert a["log_pi_hat"] != b["log_pi_hat"]

    def test_trace_csv(self, tmp_path):
        config = dict(BASE_CONFIG)
        config["output"] = {"trace": str(tmp_path / "trace.csv")}
        cfg = write_config(tmp_path, config)
        cli.main(["estimate", "--config", cfg, "--out", str(tmp_path / "r.json")])
        lines = (tmp_path / "trace.csv").read_text().strip().splitlines()
        assert lines[0] == "batch,log_mean"
        assert len(lines) == 33  # header + 32 batches

    def test_config_error_exit_code(self, tmp_path):
        cfg = write_config(tmp_path, {"generator": {"family": "power", "gamma": 1.0}})
        assert cli.main(["estimate", "--config", cfg]) == cli.EXIT_CONFIG

    def test_bad_generator_family(self, tmp_path):
        config = dict(BASE_CONFIG)
        config["generator"] = {"family": "nope"}
        cfg = write_config(tmp_path, config)
        assert cli.main(["estimate", "--config", cfg]) == cli.EXIT_CONFIG

    def test_zero_hit_exit_code(self, tmp_path):
        config = dict(BASE_CONFIG)
        # empty set via contradictory box
        config["constraint"] = {
            "type": "box", "lower": [2.0, 2.0, 2.0], "upper": [3.0, 3.0, 3.0],
        }
        cfg = write_config(tmp_path, config)
        assert cli.main(["estimate", "--config", cfg]) == cli.EXIT_ZERO_HITS

    def test_data_file_mode(self, tmp_path):
        data = tmp_path / "obs.txt"
        rng = np.random.default_rng(3)
        labels = rng.choice(["a", "b", "c"], p=[0.2, 0.3, 0.5], size=600)
        data.write_text("\n".join(labels))
        config = {
            "generator": {"family": "power", "gamma": 1.0},
            "data_file": str(data),
            "target": "divergence",
            "constraint": {"type": "coordinate", "index": 0, "bound": 0.5, "op": ">="},
            "estimator": {"n": 600, "L": 3000, "seed": 1},
        }
        cfg = write_config(tmp_path, config)
        out = tmp_path / "res.json"
        assert cli.main(["estimate", "--config", cfg, "--out", str(out)]) == 0
        assert json.loads(out.read_text())["value"] > 0


class TestOtherCommands:
    def test_entropy_max(self, tmp_path):
        config = {
            "entropy": {"preset": "shannon"},
            "K": 3,
            "constraint": {"type": "coordinate", "index": 0, "bound": 0.5, "op": ">="},
            "estimator": {"n": 600, "L": 8000, "seed": 2},
        }
        cfg = write_config(tmp_path, config)
        out = tmp_path / "res.json"
        assert cli.main(["entropy-max", "--config", cfg, "--out", str(out)]) == 0
        assert json.loads(out.read_text())["value"] == pytest.approx(1.0397, abs=0.05)

    def test_bounds(self, tmp_path):
        config = {
            "generator": {"family": "generalized_kl", "alpha": 1.0},
            "reference_vector": [0.2, 0.3, 0.5],
            "mode": "simplex",
            "constraint": {"type": "coordinate", "index": 0, "bound": 0.6, "op": ">="},
            "estimator": {"n": 800, "L": 5000, "seed": 3},
        }
        cfg = write_config(tmp_path, config)
        out = tmp_path / "res.json"
        assert cli.main(["bounds", "--config", cfg, "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert payload["lower"] <= payload["upper"]
        assert payload["q_hat"] is not None

    def test_quadratic(self, tmp_path):
        config = {
            "c1": [0.64, 1.96], "c2": [-1.6, -2.8], "c3": [1.0, 1.0],
            "constraint": {"type": "box", "lower": [0.0, 0.0], "upper": [2.0, 2.0]},
            "estimator": {"n": 400, "L": 4000, "seed": 4},
        }
        cfg = write_config(tmp_path, config)
        out = tmp_path / "res.json"
        assert cli.main(["quadratic", "--config", cfg, "--out", str(out)]) == 0
        assert abs(json.loads(out.read_text())["value"]) < 0.05

    def test_transport(self, tmp_path):
        config = {
            "mu": [0.5, 0.5], "nu": [0.5, 0.5],
            "estimator": {"n": 400, "L": 4000, "seed": 5},
        }
        cfg = write_config(tmp_path, config)
        out = tmp_path / "res.json"
        assert cli.main(["transport", "--config", cfg, "--out", str(out)]) == 0
        assert abs(json.loads(out.read_text())["value"]) < 0.05

    def test_assignment_constructs(self, tmp_path):
        config = {
            "costs": [[1.0, 10.0], [10.0, 1.0]],
            "eps1": 0.15, "eps2": 0.15,
            "estimator": {"n": 200, "L": 2000, "seed": 6,
                          "proxy": {"method": "given",
                                    "q_star": [0.99, 0.01, 0.01, 0.99]}},
        }
        cfg = write_config(tmp_path, config)
        out = tmp_path / "res.json"
        code = cli.main(["assignment", "--config", cfg, "--out", str(out)])
        assert code in (0, cli.EXIT_ZERO_HITS)

    def test_sample_law(self, tmp_path):
        out = tmp_path / "draws.json"
        code = cli.main(["sample-law", "--gamma", "1.0", "--count", "50",
                         "--seed", "3", "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["law"] == "ScaledPoisson"
        assert len(payload["draws"]) == 20
