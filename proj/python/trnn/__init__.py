"""Tensor-on-tensor regression networks.

Arrays are float64 numpy arrays whose leading axis is the sample axis where a
batch is expected. Specs, training configs, plans and reports are plain dicts
with the same keys as the JSON files read and written by the ``trnn`` CLI.
"""

import json

import numpy as np

from . import _core
from ._core import (
    DivergenceError,
    FormatError,
    ShapeError,
    contraction,
    mode_n_product,
    rmse,
    tucker_reconstruct,
)

__all__ = [
    "DivergenceError",
    "FormatError",
    "Model",
    "ShapeError",
    "contraction",
    "default_network_spec",
    "fit_predict",
    "generate",
    "gradcheck",
    "mode_n_product",
    "rmse",
    "run_benchmark",
    "tucker_reconstruct",
]


def _dump(d):
    return "" if d is None else json.dumps(d)


def generate(generator, n, sigma=0.0, grid=20, seed=0, grid_j=None, noise_on_x=False):
    """Synthetic dataset: returns (X, Y, meta)."""
    x, y, meta = _core.generate(
        generator, n, sigma, grid, grid if grid_j is None else grid_j, seed, noise_on_x
    )
    return x, y, json.loads(meta)


def default_network_spec(input_shape, output_shape, encoder_layers=2, decoder_layers=2,
                         activation="relu"):
    return json.loads(
        _core.default_network_spec(
            list(input_shape), list(output_shape), encoder_layers, decoder_layers, activation
        )
    )


def gradcheck(spec, seed, tolerance=None, batch=4):
    """Backprop against central differences; tolerance defaults by activation."""
    if tolerance is None:
        tolerance = 1e-6 if spec.get("activation") == "identity" else 1e-4
    return json.loads(_core.gradcheck(_dump(spec), seed, tolerance, batch))


class Model:
    """A TRNN with raw-scale train/predict and bundle save/load."""

    def __init__(self, spec, seed=0, _core_model=None):
        self._m = _core_model if _core_model is not None else _core.Model(_dump(spec), seed)

    @classmethod
    def load(cls, path):
        return cls(None, _core_model=_core.Model.load(str(path)))

    def save(self, path):
        self._m.save(str(path))

    def train(self, x, y, **config):
        """Keyword arguments are training-config keys; returns the report."""
        return json.loads(self._m.train(np.asarray(x), np.asarray(y), _dump(config)))

    def predict(self, x):
        return self._m.predict(np.asarray(x))

    @property
    def spec(self):
        return json.loads(self._m.spec)

    @property
    def parameter_count(self):
        return self._m.parameter_count

    def __eq__(self, other):
        return isinstance(other, Model) and self._m == other._m


def fit_predict(method, x, y, x_new, seed=0):
    """Fits a benchmark method (name or config dict) and predicts x_new.

    Returns (prediction, parameter_count).
    """
    config = {"method": method} if isinstance(method, str) else method
    return _core.fit_predict(_dump(config), np.asarray(x), np.asarray(y), np.asarray(x_new), seed)


def run_benchmark(plan, jobs=1):
    """Returns {"records": [...], "summary": {...}}."""
    return json.loads(_core.run_benchmark(_dump(plan), jobs))
