"""Graph autoencoders for link prediction, with manual backpropagation.

Two models over a dense adjacency matrix: a two-layer GCN encoder (32 then
16 units) feeding an inner-product decoder.  The plain autoencoder maps the
hidden layer straight to a latent Z; the variational one learns a Gaussian
per node (mean and log-variance heads) with the reparameterization trick and
a KL penalty against the unit-variance isotropic Gaussian.  Reconstruction
uses a class-weighted cross-entropy over all N^2 entries of the self-looped
training adjacency.  Everything is plain numpy; gradients are hand-derived
and checked against finite differences in the test suite.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from . import validation
from .ctm import CtmTable, load_ctm_table
from .errors import DegenerateLabels, TrainingDiverged
from .metrics import auc, average_precision
from .regularizer import RegConfig, grad_sample, reg_backward, reg_term

HIDDEN1 = 32
HIDDEN2 = 16
PROB_EPS = 1e-7


@dataclass
class TrainConfig:
    """Training settings for one or more trials of a single model."""

    model: str = "gae"
    epochs: int = 1000
    trials: int = 10
    learning_rate: float = 0.01
    reg: RegConfig = field(default_factory=lambda: RegConfig(mode="none"))
    block_size: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.model not in ("gae", "vgae"):
            raise ValueError("model must be 'gae' or 'vgae'")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass
class TrialResult:
    """Outcome of one training trial.

    Test scores come from the weight snapshots with the best validation AUC
    and best validation AP respectively; ``losses`` is the per-epoch total
    loss trace.
    """

    val_auc: float
    val_ap: float
    test_auc: float
    test_ap: float
    best_auc_epoch: int
    best_ap_epoch: int
    losses: list
    best_auc_params: dict
    best_ap_params: dict


def gcn_normalize(a_train) -> np.ndarray:
    """Symmetrically normalized, self-looped adjacency.

    Returns D^(-1/2) (A + I) D^(-1/2) with D the degree matrix of A + I;
    self-loops guarantee every degree is at least 1.
    """
    a = validation.symmetric_adjacency(a_train)
    a_tilde = a.astype(np.float64) + np.eye(a.shape[0])
    d_inv_sqrt = 1.0 / np.sqrt(a_tilde.sum(axis=1))
    return d_inv_sqrt[:, None] * a_tilde * d_inv_sqrt[None, :]


def glorot_init(shape, rng) -> np.ndarray:
    """Uniform weights in +-sqrt(6 / (fan_in + fan_out))."""
    bound = np.sqrt(6.0 / (shape[0] + shape[1]))
    return rng.uniform(-bound, bound, size=shape)


def init_params(n_features, model, rng, hidden1=HIDDEN1, hidden2=HIDDEN2):
    params = {"w1": glorot_init((n_features, hidden1), rng)}
    if model == "gae":
        params["w2"] = glorot_init((hidden1, hidden2), rng)
    else:
        params["w_mu"] = glorot_init((hidden1, hidden2), rng)
        params["w_logvar"] = glorot_init((hidden1, hidden2), rng)
    return params


def _sigmoid(s: np.ndarray) -> np.ndarray:
    out = np.empty_like(s)
    pos = s >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-s[pos]))
    es = np.exp(s[~pos])
    out[~pos] = es / (1.0 + es)
    return out


def forward(a_hat, x, params, model, noise=None):
    """Full forward pass; returns a cache of every intermediate tensor.

    ``noise`` is the standard-normal reparameterization draw for the
    variational model during training; pass None to decode from the mean
    (evaluation mode).  The plain model ignores it.
    """
    m1 = a_hat @ x
    pre1 = m1 @ params["w1"]
    h = np.maximum(pre1, 0.0)
    m2 = a_hat @ h
    cache = {"m1": m1, "pre1": pre1, "h": h, "m2": m2, "noise": noise}
    if model == "gae":
        z = m2 @ params["w2"]
        cache.update(mu=None, logvar=None)
    else:
        mu = m2 @ params["w_mu"]
        logvar = m2 @ params["w_logvar"]
        z = mu if noise is None else mu + np.exp(0.5 * logvar) * noise
        cache.update(mu=mu, logvar=logvar)
    s = z @ z.T
    p_raw = _sigmoid(s)
    cache.update(z=z, p_raw=p_raw, p=np.clip(p_raw, PROB_EPS, 1.0 - PROB_EPS))
    return cache


def encode(a_hat, x, params, model, noise=None):
    """Latent embedding; the variational model also returns (mu, logvar)."""
    cache = forward(a_hat, x, params, model, noise)
    if model == "gae":
        return cache["z"]
    return cache["z"], cache["mu"], cache["logvar"]


def decode(z) -> np.ndarray:
    """Edge probabilities: sigmoid of the latent inner products, clamped
    into the open interval required of a Bernoulli matrix."""
    return np.clip(_sigmoid(z @ z.T), PROB_EPS, 1.0 - PROB_EPS)


def _label_weight(label: np.ndarray) -> float:
    n2 = label.size
    ones = float(label.sum())
    if ones == 0 or ones == n2:
        raise DegenerateLabels("label matrix is constant")
    return (n2 - ones) / ones


def loss(p, label, model="gae", mu=None, logvar=None, reg_scalar=0.0) -> float:
    """Weighted cross-entropy (+ KL for the variational model) + regularizer.

    The positive class is weighted by the label's zero/one ratio; the total
    is averaged over all N^2 entries.  KL is averaged per node.
    """
    y = label.astype(np.float64)
    w = _label_weight(y)
    n2 = y.size
    bce = -float(np.sum(w * y * np.log(p) + (1.0 - y) * np.log(1.0 - p))) / n2
    kl = 0.0
    if model == "vgae":
        n = y.shape[0]
        kl = float(np.sum(np.exp(logvar) + mu**2 - 1.0 - logvar)) / (2.0 * n)
    return bce + kl + float(reg_scalar)


def backward(a_hat, x, params, model, cache, label, reg_grad=None):
    """Hand-derived gradients of :func:`loss` for every weight matrix.

    ``reg_grad`` is the regularizer's contribution to d loss / d p (already
    scaled by lambda); it enters at the decoded-probability layer exactly
    where the cross-entropy gradient does.
    """
    y = label.astype(np.float64)
    w = _label_weight(y)
    n = y.shape[0]
    n2 = y.size
    p = cache["p"]
    p_raw = cache["p_raw"]
    z = cache["z"]

    d_p = -(w * y / p - (1.0 - y) / (1.0 - p)) / n2
    if reg_grad is not None:
        d_p = d_p + reg_grad
    # The clamp saturates outside (eps, 1-eps); no gradient flows there.
    active = (p_raw > PROB_EPS) & (p_raw < 1.0 - PROB_EPS)
    d_s = d_p * np.where(active, p_raw * (1.0 - p_raw), 0.0)
    d_z = (d_s + d_s.T) @ z

    grads = {}
    if model == "gae":
        grads["w2"] = cache["m2"].T @ d_z
        d_m2 = d_z @ params["w2"].T
    else:
        mu, logvar, noise = cache["mu"], cache["logvar"], cache["noise"]
        d_mu = d_z + mu / n
        d_logvar = (np.exp(logvar) - 1.0) / (2.0 * n)
        if noise is not None:
            d_logvar = d_logvar + d_z * noise * 0.5 * np.exp(0.5 * logvar)
        grads["w_mu"] = cache["m2"].T @ d_mu
        grads["w_logvar"] = cache["m2"].T @ d_logvar
        d_m2 = d_mu @ params["w_mu"].T + d_logvar @ params["w_logvar"].T
    d_h = a_hat.T @ d_m2
    d_pre1 = d_h * (cache["pre1"] > 0.0)
    grads["w1"] = cache["m1"].T @ d_pre1
    return grads


@dataclass
class AdamState:
    """First/second moment buffers and the shared step counter."""

    m: dict
    v: dict
    t: int = 0


def adam_init(params) -> AdamState:
    return AdamState(
        m={k: np.zeros_like(w) for k, w in params.items()},
        v={k: np.zeros_like(w) for k, w in params.items()},
    )


def adam_step(params, grads, state, learning_rate,
              beta1=0.9, beta2=0.999, eps=1e-8):
    """One in-place optimizer update."""
    state.t += 1
    correction1 = 1.0 - beta1**state.t
    correction2 = 1.0 - beta2**state.t
    for key, grad in grads.items():
        state.m[key] = beta1 * state.m[key] + (1.0 - beta1) * grad
        state.v[key] = beta2 * state.v[key] + (1.0 - beta2) * grad**2
        m_hat = state.m[key] / correction1
        v_hat = state.v[key] / correction2
        params[key] -= learning_rate * m_hat / (np.sqrt(v_hat) + eps)


def score_edges(p: np.ndarray, edges) -> np.ndarray:
    """Decoded probability of each (u, v) edge."""
    if len(edges) == 0:
        return np.empty(0)
    idx = np.asarray(list(edges))
    return p[idx[:, 0], idx[:, 1]]


def _edge_scores_and_labels(p, pos_edges, neg_edges):
    scores = np.concatenate([score_edges(p, pos_edges),
                             score_edges(p, neg_edges)])
    labels = np.concatenate([np.ones(len(pos_edges), dtype=np.int64),
                             np.zeros(len(neg_edges), dtype=np.int64)])
    return scores, labels


def _snapshot(params) -> dict:
    return {k: w.copy() for k, w in params.items()}


def train(data, cfg: TrainConfig, splits, table=None) -> TrialResult:
    """One training trial: forward, regularize, backprop, Adam, validate.

    Keeps the weight snapshots with the best validation AUC and best
    validation AP seen across epochs, then scores both on the test edges.
    A fresh gradient sample is drawn each epoch with a seed derived from the
    trial seed.  Raises TrainingDiverged on a non-finite loss.
    """
    a_hat = gcn_normalize(data.a_train)
    x = data.features.astype(np.float64)
    label = data.label
    n = x.shape[0]

    root = np.random.SeedSequence(cfg.seed)
    init_ss, noise_ss, reg_ss = root.spawn(3)
    init_rng = np.random.default_rng(init_ss)
    noise_rng = np.random.default_rng(noise_ss)
    reg_seeds = np.random.default_rng(reg_ss).integers(
        0, 2**63 - 1, size=cfg.epochs
    )

    params = init_params(x.shape[1], cfg.model, init_rng)
    opt = adam_init(params)
    regularize = cfg.reg.mode != "none" and cfg.reg.lam > 0

    has_val = len(splits.val_pos) > 0 and len(splits.val_neg) > 0
    best = {
        "auc": (-np.inf, 0, _snapshot(params)),
        "ap": (-np.inf, 0, _snapshot(params)),
    }
    losses = []
    for epoch in range(cfg.epochs):
        noise = None
        if cfg.model == "vgae":
            noise = noise_rng.standard_normal((n, HIDDEN2))
        cache = forward(a_hat, x, params, cfg.model, noise)

        reg_grad = None
        reg_scalar = 0.0
        if regularize:
            epoch_cfg = RegConfig(
                lam=cfg.reg.lam, m=cfg.reg.m, mode=cfg.reg.mode,
                cw_constant=cfg.reg.cw_constant, seed=int(reg_seeds[epoch]),
            )
            g = grad_sample(cache["p"], table, epoch_cfg, cfg.block_size)
            reg_scalar = reg_term(cache["p"], g, cfg.reg.lam)
            reg_grad = reg_backward(g, cfg.reg.lam)

        total = loss(cache["p"], label, cfg.model, cache["mu"],
                     cache["logvar"], reg_scalar)
        if not np.isfinite(total):
            raise TrainingDiverged(f"non-finite loss at epoch {epoch}")
        losses.append(total)

        grads = backward(a_hat, x, params, cfg.model, cache, label, reg_grad)
        adam_step(params, grads, opt, cfg.learning_rate)

        if has_val:
            eval_cache = forward(a_hat, x, params, cfg.model, noise=None)
            scores, labels = _edge_scores_and_labels(
                eval_cache["p"], splits.val_pos, splits.val_neg
            )
            epoch_auc = auc(scores, labels)
            epoch_ap = average_precision(scores, labels)
            if epoch_auc > best["auc"][0]:
                best["auc"] = (epoch_auc, epoch, _snapshot(params))
            if epoch_ap > best["ap"][0]:
                best["ap"] = (epoch_ap, epoch, _snapshot(params))

    if not has_val:
        final = _snapshot(params)
        best = {"auc": (np.nan, cfg.epochs - 1, final),
                "ap": (np.nan, cfg.epochs - 1, final)}

    test_auc = test_ap = np.nan
    if len(splits.test_pos) > 0 and len(splits.test_neg) > 0:
        p_auc = forward(a_hat, x, best["auc"][2], cfg.model, noise=None)["p"]
        scores, labels = _edge_scores_and_labels(
            p_auc, splits.test_pos, splits.test_neg
        )
        test_auc = auc(scores, labels)
        p_ap = forward(a_hat, x, best["ap"][2], cfg.model, noise=None)["p"]
        scores, labels = _edge_scores_and_labels(
            p_ap, splits.test_pos, splits.test_neg
        )
        test_ap = average_precision(scores, labels)

    return TrialResult(
        val_auc=best["auc"][0], val_ap=best["ap"][0],
        test_auc=test_auc, test_ap=test_ap,
        best_auc_epoch=best["auc"][1], best_ap_epoch=best["ap"][1],
        losses=losses,
        best_auc_params=best["auc"][2], best_ap_params=best["ap"][2],
    )


# ---------------------------------------------------------------------------
# Weight snapshot files: one JSON header line (model kind, seed, array names
# and shapes in order), then the arrays' float64 little-endian bytes
# concatenated in that order.


def save_weights(path, params, model, seed=0):
    header = {
        "model": model,
        "seed": int(seed),
        "arrays": [
            {"name": k, "shape": list(params[k].shape)}
            for k in sorted(params)
        ],
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("utf-8") + b"\n")
        for spec in header["arrays"]:
            fh.write(
                np.ascontiguousarray(
                    params[spec["name"]], dtype="<f8"
                ).tobytes()
            )


def load_weights(path):
    """Returns (params, header dict)."""
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        params = {}
        for spec in header["arrays"]:
            shape = tuple(spec["shape"])
            count = int(np.prod(shape))
            buf = fh.read(count * 8)
            params[spec["name"]] = np.frombuffer(buf, dtype="<f8").reshape(
                shape
            ).copy()
    return params, header


class GraphAutoencoder(BaseEstimator):
    """Estimator wrapper around :func:`train` for a single model.

    ``fit`` takes the training adjacency (binary, symmetric, zero diagonal)
    plus optional validation/test edge sets; features are the identity, as
    in the underlying protocol.  ``ctm_table`` may be a loaded table or a
    path.  After fitting, ``result_`` holds the trial outcome and
    ``predict_proba`` decodes edge probabilities from the best-AUC weights.
    """

    def __init__(self, model="gae", epochs=1000, learning_rate=0.01,
                 reg_mode="none", reg_lambda=0.0, samples=1, block_size=4,
                 ctm_table=None, cw_constant=None, seed=0):
        self.model = model
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.reg_mode = reg_mode
        self.reg_lambda = reg_lambda
        self.samples = samples
        self.block_size = block_size
        self.ctm_table = ctm_table
        self.cw_constant = cw_constant
        self.seed = seed

    def _resolve_table(self):
        if self.ctm_table is None or isinstance(self.ctm_table, CtmTable):
            return self.ctm_table
        return load_ctm_table(self.ctm_table)

    def fit(self, a_train, val_edges=None, test_edges=None):
        from .data import SplitData, to_graph_data

        a = validation.symmetric_adjacency(a_train)
        val_pos, val_neg = val_edges if val_edges is not None else ([], [])
        test_pos, test_neg = test_edges if test_edges is not None else ([], [])
        split = SplitData(
            a_train=a, train=[], val_pos=list(val_pos),
            val_neg=list(val_neg), test_pos=list(test_pos),
            test_neg=list(test_neg),
        )
        data = to_graph_data(split)

        table = self._resolve_table()
        cw = self.cw_constant
        if self.reg_mode == "cw" and cw is None:
            if table is None:
                raise ValueError(
                    "cw mode needs a table (its average is the constant) "
                    "or an explicit cw_constant"
                )
            cw = table.average()
        reg = RegConfig(lam=self.reg_lambda, m=self.samples,
                        mode=self.reg_mode, cw_constant=cw)
        cfg = TrainConfig(
            model=self.model, epochs=self.epochs, trials=1,
            learning_rate=self.learning_rate, reg=reg,
            block_size=self.block_size, seed=self.seed,
        )
        self.result_ = train(data, cfg, split, table)
        self.n_ = a.shape[0]
        self.a_hat_ = gcn_normalize(a)
        self.features_ = data.features.astype(np.float64)
        return self

    def predict_proba(self) -> np.ndarray:
        """Decoded edge-probability matrix from the best-AUC weights."""
        cache = forward(self.a_hat_, self.features_,
                        self.result_.best_auc_params, self.model, noise=None)
        return cache["p"]

    def score_edges(self, edges) -> np.ndarray:
        return score_edges(self.predict_proba(), edges)
