"""Score models the bridge can serve.

EchoModel returns -x (testing without a checkpoint).  CheckpointModel wraps
a TorchScript module exporting a `sigmas` buffer (the trained noise ladder)
and forward(x: Tensor[1, N], level: Tensor[] int64) -> Tensor[1, N]; the
requested beta is matched to the nearest trained level, which is reported
back to the client.
"""

import numpy as np


class EchoModel:
    name = "echo"

    def score(self, x: np.ndarray, beta: float):
        """Returns (-x, beta): the identity-prior stand-in."""
        return -x, beta


class CheckpointModel:
    name = "checkpoint"

    def __init__(self, path):
        import torch  # deferred: echo mode must work without torch

        self._torch = torch
        self.module = torch.jit.load(str(path), map_location="cpu")
        self.module.eval()
        sigmas = dict(self.module.named_buffers()).get("sigmas")
        if sigmas is None:
            raise ValueError(f"{path}: checkpoint exposes no 'sigmas' buffer")
        self.sigmas = sigmas.detach().cpu().numpy().astype(float).ravel()
        if self.sigmas.size == 0:
            raise ValueError(f"{path}: empty noise ladder")

    def score(self, x: np.ndarray, beta: float):
        torch = self._torch
        level = int(np.argmin(np.abs(self.sigmas - beta)))
        with torch.no_grad():
            xt = torch.from_numpy(np.ascontiguousarray(x, dtype=np.float64)).reshape(1, -1)
            out = self.module(xt, torch.tensor(level, dtype=torch.int64))
        return out.detach().cpu().numpy().astype(float).ravel(), float(self.sigmas[level])


def load_model(checkpoint=None, echo=False):
    if echo or checkpoint is None:
        return EchoModel()
    return CheckpointModel(checkpoint)
