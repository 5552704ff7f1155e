"""End to end: the reconstruction sampler consuming a bridged score model."""

import numpy as np
from qcs.harness import ExperimentConfig
from qcs.quantizer import make_sign, quantize
from qcs.sampler import ChainResult, SamplerConfig, make_geometric_schedule, run_batch
from qcs.sensing import EnsembleSpec, generate

from scorebridge.models import EchoModel
from scorebridge.server import BridgeServer


def test_sampler_runs_against_bridged_prior():
    # -x is the score of a standard normal prior: the chain must stay finite
    # and deterministic given the seed
    server = BridgeServer("127.0.0.1", 0, EchoModel()).start()
    try:
        cfg = ExperimentConfig.from_dict(
            {
                "ensemble": {"kind": "ill_conditioned", "m": 6, "n": 8, "kappa": 10.0, "seed": 0},
                "noise_std": 0.1,
                "quantizer": {"bits": 1},
                "schedule": {"beta_max": 1.0, "beta_min": 0.1, "t_levels": 4},
                "sampler": {"epsilon": 0.001, "k_inner": 2, "seed": 9},
                "prior": {"kind": "bridge", "bridge": {"endpoint": server.endpoint, "dim": 8}},
                "trials": 1,
            }
        )
        model = generate(cfg.ensemble_spec(), noise_std=cfg.noise_std)
        prior = cfg.build_prior()
        rng = np.random.default_rng(1)
        x_true = rng.standard_normal(8)
        quant = make_sign()
        y = quantize(quant, model.A @ x_true)
        sched = cfg.schedule()
        res = run_batch(model, quant, y, prior, sched, cfg.sampler_config("plus"), n_chains=2)
        assert all(isinstance(r, ChainResult) for r in res)
        for r in res:
            assert np.all(np.isfinite(r.x_hat))
        # determinism through the wire
        res2 = run_batch(model, quant, y, prior, sched, cfg.sampler_config("plus"), n_chains=2)
        np.testing.assert_array_equal(res[0].x_hat, res2[0].x_hat)
    finally:
        server.stop()


def test_spawned_bridge_prior_runs():
    model = generate(EnsembleSpec("row_orthogonal", 4, 6, seed=3), noise_std=0.1)
    from qcs.bridge_client import BridgeClient, RemotePrior

    with BridgeClient("python3 -m scorebridge --echo", timeout=30) as client:
        prior = RemotePrior(client, dimension=6)
        rng = np.random.default_rng(2)
        quant = make_sign()
        y = quantize(quant, model.A @ rng.standard_normal(6))
        sched = make_geometric_schedule(1.0, 0.2, 3)
        res = run_batch(model, quant, y, prior, sched, SamplerConfig(seed=4, k_inner=2), n_chains=1)
        assert isinstance(res[0], ChainResult)
        assert np.all(np.isfinite(res[0].x_hat))
