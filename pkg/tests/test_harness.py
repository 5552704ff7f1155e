import json

import numpy as np
import pytest

from qcs.harness import ConfigError, ExperimentConfig, run_experiment
from qcs.priors import GaussianPrior, GMMPrior
from qcs.qmx import save_qmx


def tiny_config(**overrides):
    cfg = {
        "ensemble": {"kind": "ill_conditioned", "m": 6, "n": 6, "kappa": 10.0, "seed": 0},
        "noise_std": 0.1,
        "quantizer": {"bits": 3, "saturation": None, "auto_saturation_sigma_mult": 3.0},
        "schedule": {"beta_max": 1.0, "beta_min": 0.1, "t_levels": 4},
        "sampler": {"epsilon": 0.001, "k_inner": 2, "seed": 5},
        "prior": {"kind": "gaussian", "gaussian": {"dim": 6, "mean": 0.0, "variance": 1.0}},
        "trials": 2,
        "metrics": ["mse", "psnr"],
    }
    cfg.update(overrides)
    return cfg


class TestConfigValidation:
    def test_accepts_tiny(self):
        ExperimentConfig.from_dict(tiny_config())

    @pytest.mark.parametrize(
        "mutation",
        [
            {"trials": 0},
            {"ensemble": {"kind": "nope", "m": 4, "n": 4}},
            {"quantizer": {"bits": 0}},
            {"schedule": {"beta_max": 0.1, "beta_min": 1.0, "t_levels": 4}},
            {"sampler": {"epsilon": -1.0}},
            {"prior": {"kind": "gaussian"}},
            {"unknown_key": 1},
            {"metrics": ["vibes"]},
        ],
    )
    def test_rejects(self, mutation):
        cfg = tiny_config(**mutation)
        with pytest.raises((ConfigError, Exception)) as exc_info:
            ExperimentConfig.from_dict(cfg)
        assert isinstance(exc_info.value, (ConfigError, ValueError))

    def test_schedule_order_rejected_at_build(self):
        cfg = ExperimentConfig.from_dict(tiny_config())
        assert cfg.schedule().t_levels == 4

    def test_missing_fixture_rejected(self):
        with pytest.raises(ConfigError, match="signal_fixture"):
            ExperimentConfig.from_dict(tiny_config(signal_fixture="/nonexistent/x.qmx"))

    def test_prior_builders(self):
        g = ExperimentConfig.from_dict(tiny_config()).build_prior()
        assert isinstance(g, GaussianPrior) and g.dimension == 6
        gmm_cfg = tiny_config(
            prior={"kind": "gmm", "gmm": {"dim": 4, "k": 3, "seed": 1, "spread": 2.0, "component_std": 0.2}}
        )
        gmm = ExperimentConfig.from_dict(gmm_cfg).build_prior()
        assert isinstance(gmm, GMMPrior) and gmm.n_components == 3 and gmm.dimension == 4
        explicit = tiny_config(
            prior={
                "kind": "gmm",
                "gmm": {"weights": [0.5, 0.5], "means": [[0.0, 0.0], [1.0, 1.0]], "variances": [0.1, 0.1]},
            }
        )
        gmm2 = ExperimentConfig.from_dict(explicit).build_prior()
        assert gmm2.dimension == 2


class TestRunExperiment:
    def test_report_contains_metrics_and_is_reproducible(self, tmp_path):
        cfg_dict = tiny_config(output_dir=str(tmp_path / "o1"))
        rep1 = run_experiment(ExperimentConfig.from_dict(cfg_dict))
        cfg_dict2 = tiny_config(output_dir=str(tmp_path / "o2"))
        rep2 = run_experiment(ExperimentConfig.from_dict(cfg_dict2))

        d1, d2 = rep1.to_dict(), rep2.to_dict()
        d1.pop("meta"), d2.pop("meta")
        d1["config"].pop("output_dir"), d2["config"].pop("output_dir")
        assert json.dumps(d1, sort_keys=True) == json.dumps(d2, sort_keys=True)

        assert set(rep1.per_trial) == {"plus", "baseline"}
        assert len(rep1.per_trial["plus"]["mse"]) == 2
        assert np.isfinite(rep1.summary["plus"]["psnr"]["mean"])

        out = tmp_path / "o1"
        assert (out / "report.json").exists() and (out / "report.txt").exists()
        assert (out / "trial_000" / "x_true.qmx").exists()
        assert (out / "trial_000" / "x_hat_plus.qmx").exists()
        loaded = json.loads((out / "report.json").read_text())
        assert loaded["schema_version"] == 1
        assert "runtime_seconds" in loaded["meta"]

    def test_empty_metric_list_runs(self):
        rep = run_experiment(ExperimentConfig.from_dict(tiny_config(metrics=[])))
        assert rep.summary["plus"] == {}
        assert rep.meta["runtime_seconds"] >= 0

    def test_fixture_signals(self, tmp_path):
        fx = tmp_path / "signals.qmx"
        rng = np.random.default_rng(0)
        save_qmx(fx, rng.standard_normal((3, 6)))
        rep = run_experiment(
            ExperimentConfig.from_dict(tiny_config(signal_fixture=str(fx), trials=3, algos=["baseline"]))
        )
        assert len(rep.per_trial["baseline"]["mse"]) == 3

    def test_table_renders(self):
        rep = run_experiment(ExperimentConfig.from_dict(tiny_config(trials=1)))
        table = rep.table()
        assert "mse" in table and "plus" in table and "baseline" in table
