"""Pool training, the forecast matrix, and on-disk model persistence."""

import csv
import json
import logging
import os
import time
from dataclasses import dataclass, field

import numpy as np

from ..dataio import Standardizer
from ..errors import DataError, TrainingError
from .forest import ForestModel, train_forest
from .gbm import GbmModel, train_gbm
from .mlp import MlpModel, MlpNet, train_mlp
from .spec import ModelSpec, default_pool_specs
from .svr import SvrModel, train_svr
from .tree import FlatTree

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
FORMAT_VERSION = 1


def train_model(spec, Xs_train, y_train, Xs_val, y_val, seed):
    """Train the model described by ``spec`` on pre-scaled features."""
    kw = dict(spec.params)
    if spec.family == "mlp":
        return train_mlp(Xs_train, y_train, Xs_val, y_val, spec.variant,
                         seed, **kw)
    if spec.family == "svr":
        return train_svr(Xs_train, y_train, Xs_val, y_val, spec.variant,
                         seed, **kw)
    if spec.family == "gbm":
        return train_gbm(Xs_train, y_train, Xs_val, y_val, spec.variant,
                         seed, **kw)
    if spec.family == "forest":
        return train_forest(Xs_train, y_train, Xs_val, y_val, seed, **kw)
    raise TrainingError("no trainer for family %r" % (spec.family,),
                        model_id=spec.model_id)


@dataclass
class ModelPool:
    specs: list
    models: dict
    scaler: Standardizer
    feature_names: list
    lags: int
    base_seed: int

    @property
    def model_ids(self):
        return [s.model_id for s in self.specs]

    def predict_matrix(self, X):
        """Forecasts from every pool member; columns follow spec order."""
        Xs = self.scaler.transform(np.asarray(X, dtype=float))
        cols = [self.models[s.model_id].predict(Xs) for s in self.specs]
        return np.column_stack(cols)


def train_pool(Xs_or_fm, y_train=None, Xs_val=None, y_val=None, specs=None,
               base_seed=0, scaler=None, feature_names=None, lags=0):
    """Train every pool member with an independent child seed.

    Accepts either pre-scaled arrays plus metadata, or two FeatureMatrix
    objects (train, validation) in the first two positions.
    """
    if y_train is not None and hasattr(y_train, "scaled"):
        fm_train, fm_val = Xs_or_fm, y_train
        scaler = fm_train.scaler
        feature_names = list(fm_train.feature_names)
        lags = sum(1 for n in feature_names if n.startswith("lag_"))
        Xs_train, y_tr = fm_train.scaled(), fm_train.y
        Xs_val, y_val = fm_val.scaled(), fm_val.y
    else:
        Xs_train, y_tr = Xs_or_fm, y_train
        if scaler is None:
            scaler = Standardizer.identity(Xs_train.shape[1])
        feature_names = feature_names or []

    specs = list(specs) if specs is not None else default_pool_specs()
    children = np.random.SeedSequence(base_seed).spawn(len(specs))
    models = {}
    for spec, child in zip(specs, children):
        t0 = time.perf_counter()
        try:
            models[spec.model_id] = train_model(spec, Xs_train, y_tr, Xs_val,
                                                y_val, child)
        except TrainingError as exc:
            raise TrainingError(str(exc), model_id=spec.model_id) from exc
        log.info("trained %s (%s) in %.1fs", spec.model_id, spec.label,
                 time.perf_counter() - t0)
    return ModelPool(specs=specs, models=models, scaler=scaler,
                     feature_names=list(feature_names), lags=lags,
                     base_seed=base_seed)


@dataclass
class ForecastMatrix:
    """Per-step forecasts from every pool member over a common index."""

    preds: np.ndarray
    y: np.ndarray
    timestamps: np.ndarray
    model_ids: list = field(default_factory=list)

    def __post_init__(self):
        if self.preds.ndim != 2 or len(self.preds) != len(self.y):
            raise DataError("forecast matrix shape mismatch")
        if self.model_ids and len(self.model_ids) != self.preds.shape[1]:
            raise DataError("model id count does not match forecast columns")

    def __len__(self):
        return len(self.y)

    @property
    def n_models(self):
        return self.preds.shape[1]

    def ape(self):
        """Absolute percentage error of every model at every step."""
        return 100.0 * np.abs(self.preds - self.y[:, None]) / self.y[:, None]


def forecast_matrix(pool, fm):
    return ForecastMatrix(preds=pool.predict_matrix(fm.X), y=fm.y,
                          timestamps=fm.timestamps,
                          model_ids=pool.model_ids)


def forecasts_csv(path, fmat, stamp=None):
    """Write per-model forecasts as one column per pool member."""
    with open(path, "w", newline="") as fh:
        if stamp:
            fh.write("# generated: %s\n" % stamp)
        w = csv.writer(fh)
        w.writerow(["timestamp", "actual"] + list(fmat.model_ids))
        ts = np.datetime_as_string(fmat.timestamps, unit="s")
        for i in range(len(fmat)):
            w.writerow([ts[i], repr(float(fmat.y[i]))]
                       + [repr(float(v)) for v in fmat.preds[i]])
    log.info("wrote %d forecast rows to %s", len(fmat), path)


# ---------------------------------------------------------------------------
# Persistence: one npz file per model plus a JSON manifest.

def _trees_to_arrays(trees):
    off = np.cumsum([0] + [t.n_nodes for t in trees]).astype(np.int64)
    return {
        "offsets": off,
        "feature": np.concatenate([t.feature for t in trees]),
        "threshold": np.concatenate([t.threshold for t in trees]),
        "left": np.concatenate([t.left for t in trees]),
        "right": np.concatenate([t.right for t in trees]),
        "value": np.concatenate([t.value for t in trees]),
    }


def _trees_from_arrays(z):
    off = z["offsets"]
    trees = []
    for i in range(len(off) - 1):
        s, e = off[i], off[i + 1]
        trees.append(FlatTree(z["feature"][s:e], z["threshold"][s:e],
                              z["left"][s:e], z["right"][s:e],
                              z["value"][s:e]))
    return trees


def _model_arrays(model):
    if isinstance(model, MlpModel):
        return {"W1": model.net.W1, "b1": model.net.b1, "w2": model.net.w2,
                "b2": np.float64(model.net.b2),
                "y_mean": np.float64(model.y_mean),
                "y_std": np.float64(model.y_std),
                "width": np.int64(model.width)}
    if isinstance(model, SvrModel):
        return {"X_sv": model.X_sv, "beta": model.beta,
                "b": np.float64(model.b), "sigma": np.float64(model.sigma),
                "y_mean": np.float64(model.y_mean),
                "y_std": np.float64(model.y_std),
                "kkt_gap": np.float64(model.kkt_gap),
                "n_iter": np.int64(model.n_iter)}
    if isinstance(model, GbmModel):
        d = _trees_to_arrays(model.trees)
        d.update({"f0": np.float64(model.f0),
                  "shrinkage": np.float64(model.shrinkage),
                  "y_mean": np.float64(model.y_mean),
                  "y_std": np.float64(model.y_std)})
        return d
    if isinstance(model, ForestModel):
        return _trees_to_arrays(model.trees)
    raise TrainingError("cannot serialize model of type %r" % type(model))


def _model_from_arrays(spec, z):
    if spec.family == "mlp":
        net = MlpNet(z["W1"], z["b1"], z["w2"], float(z["b2"]))
        return MlpModel(net=net, variant=spec.variant,
                        width=int(z["width"]), y_mean=float(z["y_mean"]),
                        y_std=float(z["y_std"]))
    if spec.family == "svr":
        return SvrModel(X_sv=z["X_sv"], beta=z["beta"], b=float(z["b"]),
                        kernel=spec.variant, sigma=float(z["sigma"]),
                        y_mean=float(z["y_mean"]), y_std=float(z["y_std"]),
                        kkt_gap=float(z["kkt_gap"]), n_iter=int(z["n_iter"]))
    if spec.family == "gbm":
        return GbmModel(loss=spec.variant, f0=float(z["f0"]),
                        shrinkage=float(z["shrinkage"]),
                        trees=_trees_from_arrays(z),
                        y_mean=float(z["y_mean"]), y_std=float(z["y_std"]))
    if spec.family == "forest":
        return ForestModel(trees=_trees_from_arrays(z))
    raise DataError("cannot deserialize model family %r" % (spec.family,))


def save_pool(pool, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    manifest = {
        "format_version": FORMAT_VERSION,
        "base_seed": pool.base_seed,
        "lags": pool.lags,
        "feature_names": pool.feature_names,
        "scaler_mean": pool.scaler.mean.tolist(),
        "scaler_std": pool.scaler.std.tolist(),
        "models": [],
    }
    for spec in pool.specs:
        fname = "%s.npz" % spec.model_id
        np.savez_compressed(os.path.join(out_dir, fname),
                            **_model_arrays(pool.models[spec.model_id]))
        manifest["models"].append({"model_id": spec.model_id,
                                   "family": spec.family,
                                   "variant": spec.variant, "file": fname})
    with open(os.path.join(out_dir, MANIFEST_NAME), "w") as fh:
        json.dump(manifest, fh, indent=2)
    log.info("saved %d models to %s", len(pool.specs), out_dir)


def load_pool(in_dir):
    path = os.path.join(in_dir, MANIFEST_NAME)
    if not os.path.exists(path):
        raise DataError("no model manifest at %s" % path)
    with open(path) as fh:
        manifest = json.load(fh)
    if manifest.get("format_version") != FORMAT_VERSION:
        raise DataError("unsupported model format version %r"
                        % manifest.get("format_version"))
    scaler = Standardizer(np.asarray(manifest["scaler_mean"], dtype=float),
                          np.asarray(manifest["scaler_std"], dtype=float))
    specs, models = [], {}
    for entry in manifest["models"]:
        spec = ModelSpec(entry["model_id"], entry["family"], entry["variant"])
        with np.load(os.path.join(in_dir, entry["file"])) as z:
            data = {k: z[k] for k in z.files}
        models[spec.model_id] = _model_from_arrays(spec, data)
        specs.append(spec)
    log.info("loaded %d models from %s", len(specs), in_dir)
    return ModelPool(specs=specs, models=models, scaler=scaler,
                     feature_names=list(manifest["feature_names"]),
                     lags=int(manifest["lags"]),
                     base_seed=int(manifest["base_seed"]))
