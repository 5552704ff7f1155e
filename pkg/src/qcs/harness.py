"""Experiment orchestration: config schema, trial loop, metric reports.

A config describes one ensemble + quantizer + prior + sampler setup; the
runner simulates measurements per trial, reconstructs with the requested
algorithms, and writes a JSON report (deterministic given config + seeds;
wall-clock data lives in the separate "meta" field) plus a plain-text table.
"""

import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from jsonschema import ValidationError, validate

from . import qmx
from .metrics import mse, psnr, ssim
from .priors import GaussianPrior, GMMPrior
from .quantizer import make_uniform, quantize
from .sampler import ChainResult, SamplerConfig, make_geometric_schedule, run_batch
from .sensing import EnsembleSpec, generate

__all__ = ["ConfigError", "ExperimentConfig", "MetricReport", "run_experiment", "CONFIG_SCHEMA"]

REPORT_SCHEMA_VERSION = 1

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["ensemble", "quantizer", "schedule", "sampler", "prior", "trials"],
    "additionalProperties": False,
    "properties": {
        "ensemble": {
            "type": "object",
            "required": ["kind", "m", "n"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["row_orthogonal", "ill_conditioned", "correlated"]},
                "m": {"type": "integer", "minimum": 1},
                "n": {"type": "integer", "minimum": 1},
                "kappa": {"type": "number", "minimum": 1},
                "rho": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "seed": {"type": "integer"},
            },
        },
        "noise_std": {"type": "number", "minimum": 0},
        "quantizer": {
            "type": "object",
            "required": ["bits"],
            "additionalProperties": False,
            "properties": {
                "bits": {"type": "integer", "minimum": 1},
                "saturation": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "auto_saturation_sigma_mult": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "schedule": {
            "type": "object",
            "required": ["beta_max", "beta_min", "t_levels"],
            "additionalProperties": False,
            "properties": {
                "beta_max": {"type": "number", "exclusiveMinimum": 0},
                "beta_min": {"type": "number", "exclusiveMinimum": 0},
                "t_levels": {"type": "integer", "minimum": 2},
            },
        },
        "sampler": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "epsilon": {"type": "number", "exclusiveMinimum": 0},
                "k_inner": {"type": "integer", "minimum": 1},
                "gamma_mode": {"enum": ["fixed_one", "scaled"]},
                "xi": {"type": "number", "exclusiveMinimum": 0},
                "iter_ep": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer"},
                "warm_start": {"type": "boolean"},
                "ep_damping": {"type": "number", "minimum": 0, "maximum": 1},
                "init_low": {"type": "number"},
                "init_high": {"type": "number"},
            },
        },
        "prior": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["gaussian", "gmm", "bridge"]},
                "gaussian": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "dim": {"type": "integer", "minimum": 1},
                        "mean": {"type": ["number", "array"]},
                        "variance": {"type": ["number", "array"], "exclusiveMinimum": 0},
                    },
                },
                "gmm": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "dim": {"type": "integer", "minimum": 1},
                        "weights": {"type": "array"},
                        "means": {"type": "array"},
                        "variances": {"type": "array"},
                        "k": {"type": "integer", "minimum": 1},
                        "seed": {"type": "integer"},
                        "spread": {"type": "number", "exclusiveMinimum": 0},
                        "component_std": {"type": "number", "exclusiveMinimum": 0},
                        "center": {"type": "number"},
                    },
                },
                "bridge": {
                    "type": "object",
                    "required": ["endpoint", "dim"],
                    "additionalProperties": False,
                    "properties": {
                        "endpoint": {"type": "string"},
                        "dim": {"type": "integer", "minimum": 1},
                        "timeout": {"type": "number", "exclusiveMinimum": 0},
                    },
                },
            },
        },
        "trials": {"type": "integer", "minimum": 1},
        "chains": {"type": "integer", "minimum": 1},
        "algos": {"type": "array", "items": {"enum": ["plus", "baseline"]}, "minItems": 1},
        "metrics": {"type": "array", "items": {"enum": ["mse", "psnr", "ssim"]}},
        "image_dims": {"type": ["array", "null"], "items": {"type": "integer", "minimum": 1}},
        "data_range": {"type": "number", "exclusiveMinimum": 0},
        "signal_fixture": {"type": ["string", "null"]},
        "output_dir": {"type": ["string", "null"]},
        "seed": {"type": "integer"},
    },
}


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""


@dataclass(frozen=True)
class ExperimentConfig:
    raw: dict

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        try:
            validate(raw, CONFIG_SCHEMA)
        except ValidationError as exc:
            raise ConfigError(f"config rejected: {exc.message} (at {'/'.join(map(str, exc.path))})") from exc
        cfg = cls(raw=raw)
        try:
            if raw["prior"]["kind"] != "bridge":
                cfg.build_prior()  # fail fast on inconsistent prior blocks
            elif raw["prior"].get("bridge") is None:
                raise ConfigError("prior.kind = 'bridge' needs a prior.bridge block")
            cfg.schedule()
            cfg.ensemble_spec()
            cfg.sampler_config(cfg.algos[0])
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        if cfg.fixture_path and not Path(cfg.fixture_path).exists():
            raise ConfigError(f"signal_fixture not found: {cfg.fixture_path}")
        return cfg

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(raw)

    # -- typed accessors -------------------------------------------------
    @property
    def trials(self) -> int:
        return self.raw["trials"]

    @property
    def chains(self) -> int:
        return self.raw.get("chains", 1)

    @property
    def algos(self):
        return tuple(self.raw.get("algos", ["plus", "baseline"]))

    @property
    def metric_names(self):
        return tuple(self.raw.get("metrics", ["mse"]))

    @property
    def seed(self) -> int:
        return self.raw.get("seed", 0)

    @property
    def noise_std(self) -> float:
        return self.raw.get("noise_std", 0.0)

    @property
    def image_dims(self):
        dims = self.raw.get("image_dims")
        return tuple(dims) if dims else None

    @property
    def data_range(self) -> float:
        return self.raw.get("data_range", 1.0)

    @property
    def fixture_path(self):
        return self.raw.get("signal_fixture")

    @property
    def output_dir(self):
        return self.raw.get("output_dir")

    def ensemble_spec(self) -> EnsembleSpec:
        e = self.raw["ensemble"]
        return EnsembleSpec(
            kind=e["kind"],
            m=e["m"],
            n=e["n"],
            condition_number=e.get("kappa", 1.0),
            correlation=e.get("rho", 0.0),
            seed=e.get("seed", 0),
        )

    def schedule(self):
        s = self.raw["schedule"]
        return make_geometric_schedule(s["beta_max"], s["beta_min"], s["t_levels"])

    def sampler_config(self, algo: str) -> SamplerConfig:
        s = dict(self.raw.get("sampler", {}))
        init = (s.pop("init_low", 0.0), s.pop("init_high", 1.0))
        return SamplerConfig(algo=algo, init_range=init, **s)

    def quantizer_for(self, z_clean: np.ndarray):
        q = self.raw["quantizer"]
        bits = q["bits"]
        sat = q.get("saturation")
        if sat is None:
            mult = q.get("auto_saturation_sigma_mult", 3.0)
            scale = float(np.std(z_clean))
            sat = mult * scale if scale > 0 else 1.0
        return make_uniform(bits, sat)

    def build_prior(self):
        p = self.raw["prior"]
        kind = p["kind"]
        block = p.get(kind)
        if block is None:
            raise ConfigError(f"prior.kind = {kind!r} needs a prior.{kind} block")
        if kind == "gaussian":
            dim = block.get("dim")
            mean = np.asarray(block.get("mean", 0.0), dtype=float)
            var = np.asarray(block.get("variance", 1.0), dtype=float)
            if dim is None and mean.ndim == 0 and var.ndim == 0:
                raise ConfigError("prior.gaussian needs dim or vector mean/variance")
            n = dim or max(mean.size, var.size)
            mean = np.broadcast_to(mean, (n,)).astype(float)
            var = np.broadcast_to(var, (n,)).astype(float)
            return GaussianPrior(mean=mean, cov=np.diag(var))
        if kind == "gmm":
            if "means" in block:
                return GMMPrior(
                    weights=np.asarray(block["weights"], dtype=float),
                    means=np.asarray(block["means"], dtype=float),
                    variances=np.asarray(block["variances"], dtype=float),
                )
            needed = {"dim", "k"}
            if not needed <= set(block):
                raise ConfigError("prior.gmm needs either explicit means or {dim, k}")
            rng = np.random.default_rng(block.get("seed", 0))
            k, dim = block["k"], block["dim"]
            spread = block.get("spread", 1.0)
            comp_std = block.get("component_std", 0.1)
            means = block.get("center", 0.0) + spread * rng.standard_normal((k, dim))
            return GMMPrior(weights=np.full(k, 1.0 / k), means=means, variances=np.full(k, comp_std**2))
        # bridge
        from .bridge_client import BridgeClient, RemotePrior

        client = BridgeClient(block["endpoint"], timeout=block.get("timeout", 60.0))
        return RemotePrior(client, dimension=block["dim"])


@dataclass
class MetricReport:
    per_trial: dict           # algo -> metric -> list of floats
    summary: dict             # algo -> metric -> {mean, se}
    ep_diagnostics: dict      # algo -> {clamp_total, gamma_fallbacks, failures}
    config: dict
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "config": self.config,
            "per_trial": self.per_trial,
            "summary": self.summary,
            "ep_diagnostics": self.ep_diagnostics,
            "meta": self.meta,
        }

    def table(self) -> str:
        lines = []
        algos = sorted(self.summary)
        metrics = sorted({m for a in algos for m in self.summary[a]})
        head = f"{'metric':<10}" + "".join(f"{a:>24}" for a in algos)
        lines.append(head)
        lines.append("-" * len(head))
        for metric in metrics:
            row = f"{metric:<10}"
            for a in algos:
                cell = self.summary[a].get(metric)
                row += f"{cell['mean']:>14.6g} ± {cell['se']:<8.2g}" if cell else f"{'-':>24}"
            lines.append(row)
        return "\n".join(lines)


def _draw_signal(cfg: ExperimentConfig, prior, trial: int, rng):
    if cfg.fixture_path:
        data = qmx.load_qmx(cfg.fixture_path)
        if data.ndim == 1:
            return data
        return data[trial % data.shape[0]]
    if not hasattr(prior, "sample"):
        raise ConfigError("bridge priors cannot be sampled; provide signal_fixture")
    return prior.sample(rng)


def _metric_values(cfg: ExperimentConfig, x_hat, x_true):
    out = {}
    for name in cfg.metric_names:
        if name == "mse":
            out[name] = mse(x_hat, x_true)
        elif name == "psnr":
            out[name] = psnr(x_hat, x_true, data_range=cfg.data_range)
        elif name == "ssim":
            if cfg.image_dims is None:
                raise ConfigError("ssim requires image_dims")
            out[name] = ssim(x_hat, x_true, cfg.image_dims, data_range=cfg.data_range)
    return out


def run_experiment(cfg: ExperimentConfig, verbose: bool = False) -> MetricReport:
    """Simulate, reconstruct with every requested algorithm, score, persist."""
    t_start = time.time()
    model = generate(cfg.ensemble_spec(), noise_std=cfg.noise_std)
    prior = cfg.build_prior()
    schedule = cfg.schedule()
    out_dir = Path(cfg.output_dir) if cfg.output_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)

    per_trial = {a: {m: [] for m in cfg.metric_names} for a in cfg.algos}
    diags = {a: {"clamp_total": 0, "gamma_fallbacks": 0, "failures": []} for a in cfg.algos}

    for trial in range(cfg.trials):
        rng = np.random.default_rng([cfg.seed, trial])
        x_true = _draw_signal(cfg, prior, trial, rng)
        z_clean = model.A @ x_true
        quant = cfg.quantizer_for(z_clean)
        v = z_clean + cfg.noise_std * rng.standard_normal(model.m) if cfg.noise_std > 0 else z_clean
        y = quantize(quant, v)

        trial_dir = out_dir / f"trial_{trial:03d}" if out_dir else None
        if trial_dir:
            trial_dir.mkdir(exist_ok=True)
            qmx.save_qmx(trial_dir / "x_true.qmx", x_true)
            qmx.save_qmx(trial_dir / "y.qmx", y)

        for algo in cfg.algos:
            s_cfg = replace(cfg.sampler_config(algo), seed=cfg.sampler_config(algo).seed + trial)
            results = run_batch(model, quant, y, prior, schedule, s_cfg, n_chains=cfg.chains)
            good = [r for r in results if isinstance(r, ChainResult)]
            bad = [r for r in results if not isinstance(r, ChainResult)]
            diags[algo]["failures"].extend(f"trial {trial} chain {b.chain_index}: {b.error}" for b in bad)
            if not good:
                continue
            x_hat = np.mean([r.x_hat for r in good], axis=0)
            diags[algo]["clamp_total"] += int(sum(r.ep_clamps.sum() for r in good))
            diags[algo]["gamma_fallbacks"] += sum(r.gamma_fallbacks for r in good)
            for name, val in _metric_values(cfg, x_hat, x_true).items():
                per_trial[algo][name].append(val)
            if trial_dir:
                qmx.save_qmx(trial_dir / f"x_hat_{algo}.qmx", x_hat)
        if verbose:
            print(f"trial {trial + 1}/{cfg.trials} done", flush=True)

    summary = {}
    for algo in cfg.algos:
        summary[algo] = {}
        for name, vals in per_trial[algo].items():
            arr = np.asarray(vals, dtype=float)
            finite = arr[np.isfinite(arr)]
            if len(finite) == 0:
                continue
            se = float(np.std(finite, ddof=1) / np.sqrt(len(finite))) if len(finite) > 1 else 0.0
            summary[algo][name] = {"mean": float(np.mean(finite)), "se": se, "n": int(len(finite))}

    report = MetricReport(
        per_trial=per_trial,
        summary=summary,
        ep_diagnostics=diags,
        config=cfg.raw,
        meta={"runtime_seconds": time.time() - t_start, "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S")},
    )
    if out_dir:
        (out_dir / "report.json").write_text(json.dumps(report.to_dict(), indent=2))
        (out_dir / "report.txt").write_text(report.table() + "\n")
    return report
