"""Character-level GRU encoder-decoder with additive attention, in float64 numpy.

Row-vector convention throughout: activations are ``[batch, features]`` and a
layer computes ``x @ W``. One training step processes a padded batch; padded
encoder positions carry the previous hidden state forward and are masked out of
attention, padded target positions contribute nothing to the loss.

Per example the loss is the mean cross-entropy over its target positions
(lemma characters plus EOS). A batch loss is the *sum* of example losses, so
callers divide by the batch size themselves.

Decoder step ``t`` with previous state ``s`` (the last encoder state at t=0)::

    e_j   = v_a . tanh(s W_a + h_j U_a)        attention over encoder states
    c     = sum_j softmax(e)_j h_j
    s'    = GRU([embed(y_{t-1}); c], s)
    logit = [s'; c] W_out + b_out
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Sequence

import numpy as np

from ..encoding import BOS, PAD


class NonFiniteError(FloatingPointError):
    pass


@dataclass
class ModelParams:
    embed: np.ndarray     # [V, d]
    enc_Wz: np.ndarray    # [d, h]
    enc_Wr: np.ndarray
    enc_Wn: np.ndarray
    enc_Uz: np.ndarray    # [h, h]
    enc_Ur: np.ndarray
    enc_Un: np.ndarray
    enc_bz: np.ndarray    # [h]
    enc_br: np.ndarray
    enc_bn: np.ndarray
    dec_Wz: np.ndarray    # [d + h, h]
    dec_Wr: np.ndarray
    dec_Wn: np.ndarray
    dec_Uz: np.ndarray    # [h, h]
    dec_Ur: np.ndarray
    dec_Un: np.ndarray
    dec_bz: np.ndarray    # [h]
    dec_br: np.ndarray
    dec_bn: np.ndarray
    att_W: np.ndarray     # [h, h] applied to the decoder state
    att_U: np.ndarray     # [h, h] applied to encoder states
    att_v: np.ndarray     # [h]
    out_W: np.ndarray     # [2h, V]
    out_b: np.ndarray     # [V]

    @staticmethod
    def names() -> list[str]:
        return [f.name for f in fields(ModelParams)]

    def arrays(self) -> list[np.ndarray]:
        return [getattr(self, n) for n in self.names()]

    def items(self):
        return [(n, getattr(self, n)) for n in self.names()]

    @property
    def vocab_size(self) -> int:
        return self.embed.shape[0]

    @property
    def d(self) -> int:
        return self.embed.shape[1]

    @property
    def h(self) -> int:
        return self.enc_Uz.shape[0]

    def copy(self) -> "ModelParams":
        return ModelParams(*(a.copy() for a in self.arrays()))

    def zeros_like(self) -> "ModelParams":
        return ModelParams(*(np.zeros_like(a) for a in self.arrays()))


def param_shapes(vocab_size: int, d: int, h: int) -> dict[str, tuple[int, ...]]:
    V = vocab_size
    shapes = {"embed": (V, d)}
    for g in "zrn":
        shapes[f"enc_W{g}"] = (d, h)
    for g in "zrn":
        shapes[f"enc_U{g}"] = (h, h)
    for g in "zrn":
        shapes[f"enc_b{g}"] = (h,)
    for g in "zrn":
        shapes[f"dec_W{g}"] = (d + h, h)
    for g in "zrn":
        shapes[f"dec_U{g}"] = (h, h)
    for g in "zrn":
        shapes[f"dec_b{g}"] = (h,)
    shapes.update(att_W=(h, h), att_U=(h, h), att_v=(h,), out_W=(2 * h, V), out_b=(V,))
    assert list(shapes) == ModelParams.names()
    return shapes


def _is_bias(name: str) -> bool:
    return name.startswith(("enc_b", "dec_b")) or name == "out_b"


def init_params(vocab_size: int, d: int, h: int, seed: int) -> ModelParams:
    """Uniform(-s, s) with s = sqrt(6 / (fan_in + fan_out)); biases zero.

    ``att_v`` is treated as an ``[h, 1]`` matrix for its bound.
    """
    if min(vocab_size, d, h) <= 0:
        raise ValueError("vocab_size, d and h must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    arrays = {}
    for name, shape in param_shapes(vocab_size, d, h).items():
        if _is_bias(name):
            arrays[name] = np.zeros(shape)
            continue
        fan_in, fan_out = (shape[0], 1) if len(shape) == 1 else shape
        s = init_bound(fan_in, fan_out)
        arrays[name] = rng.uniform(-s, s, size=shape)
    return ModelParams(**arrays)


def init_bound(fan_in: int, fan_out: int) -> float:
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def pad_batch(seqs: Sequence[Sequence[int]]) -> tuple[np.ndarray, np.ndarray]:
    """Right-pad with PAD; mask is 1.0 where a real id sits (PAD ids inside a sequence are masked too)."""
    T = max(len(s) for s in seqs)
    ids = np.full((len(seqs), T), PAD, dtype=np.int64)
    for b, s in enumerate(seqs):
        ids[b, :len(s)] = s
    return ids, (ids != PAD).astype(np.float64)


def _check_finite(arr, layer: str, step: int):
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"non-finite activation in {layer} at step {step}")


@dataclass
class Cache:
    src: np.ndarray          # [B, S] ids
    src_mask: np.ndarray     # [B, S]
    tgt: np.ndarray          # [B, L] ids
    tgt_in: np.ndarray       # [B, L] ids fed to the decoder (BOS + shifted target)
    tgt_weight: np.ndarray   # [B, L] 1/len for real positions, 0 for padding
    enc: list                # per step (x, h_prev, z, r, n, h)
    H: np.ndarray            # [B, S, h] encoder states
    P: np.ndarray            # [B, S, h] H @ att_U
    dec: list                # per step dict of activations
    probs: list              # per step [B, V]


def encode(params: ModelParams, src: np.ndarray, src_mask: np.ndarray, cache_steps: list | None = None):
    B, S = src.shape
    h = params.h
    dt = params.embed.dtype
    hs = np.zeros((B, h), dtype=dt)
    H = np.empty((B, S, h), dtype=dt)
    for t in range(S):
        x = params.embed[src[:, t]]
        m = src_mask[:, t:t + 1]
        z = _sigmoid(x @ params.enc_Wz + hs @ params.enc_Uz + params.enc_bz)
        r = _sigmoid(x @ params.enc_Wr + hs @ params.enc_Ur + params.enc_br)
        n = np.tanh(x @ params.enc_Wn + (r * hs) @ params.enc_Un + params.enc_bn)
        h_new = (1.0 - z) * n + z * hs
        h_next = m * h_new + (1.0 - m) * hs
        if cache_steps is not None:
            cache_steps.append((x, hs, z, r, n))
        hs = h_next
        H[:, t] = hs
    _check_finite(H, "encoder", S)
    return H, hs


def _attend(params: ModelParams, s_prev, H, P, neg_mask):
    A = np.tanh(P + (s_prev @ params.att_W)[:, None, :])     # [B, S, h]
    e = A @ params.att_v + neg_mask                            # [B, S]
    e = e - e.max(axis=1, keepdims=True)
    w = np.exp(e)
    alpha = w / w.sum(axis=1, keepdims=True)
    ctx = np.einsum("bs,bsh->bh", alpha, H)
    return A, alpha, ctx


def _decoder_step(params: ModelParams, y_prev, s_prev, H, P, neg_mask):
    A, alpha, ctx = _attend(params, s_prev, H, P, neg_mask)
    x = np.concatenate([params.embed[y_prev], ctx], axis=1)
    z = _sigmoid(x @ params.dec_Wz + s_prev @ params.dec_Uz + params.dec_bz)
    r = _sigmoid(x @ params.dec_Wr + s_prev @ params.dec_Ur + params.dec_br)
    n = np.tanh(x @ params.dec_Wn + (r * s_prev) @ params.dec_Un + params.dec_bn)
    s = (1.0 - z) * n + z * s_prev
    logits = np.concatenate([s, ctx], axis=1) @ params.out_W + params.out_b
    return dict(A=A, alpha=alpha, ctx=ctx, x=x, s_prev=s_prev, z=z, r=r, n=n, s=s), logits


def _softmax(logits):
    e = logits - logits.max(axis=1, keepdims=True)
    np.exp(e, out=e)
    return e / e.sum(axis=1, keepdims=True)


def _neg_mask(src_mask):
    return np.where(src_mask > 0, 0.0, -np.inf)


def forward_batch(params: ModelParams, inputs: Sequence[Sequence[int]], targets: Sequence[Sequence[int]]):
    """Teacher-forced forward pass. Returns ``(summed loss, cache)``."""
    if len(inputs) != len(targets) or not inputs:
        raise ValueError("need equally many non-empty input and target sequences")
    for s, t in zip(inputs, targets):
        if not len(s) or not len(t):
            raise ValueError("input and target sequences must be non-empty")
    src, src_mask = pad_batch(inputs)
    if not np.all(src_mask.sum(axis=1) > 0):
        raise ValueError("an input sequence consists only of PAD ids")
    B = len(inputs)
    L = max(len(t) for t in targets)
    tgt = np.full((B, L), PAD, dtype=np.int64)
    weight = np.zeros((B, L))
    for b, t in enumerate(targets):
        tgt[b, :len(t)] = t
        weight[b, :len(t)] = 1.0 / len(t)
    tgt_in = np.concatenate([np.full((B, 1), BOS, dtype=np.int64), tgt[:, :-1]], axis=1)

    enc_steps: list = []
    H, s = encode(params, src, src_mask, enc_steps)
    P = H @ params.att_U
    neg = _neg_mask(src_mask)
    dec_steps, probs = [], []
    loss = np.zeros((), dtype=params.embed.dtype)
    rows = np.arange(B)
    for t in range(L):
        act, logits = _decoder_step(params, tgt_in[:, t], s, H, P, neg)
        p = _softmax(logits)
        _check_finite(p, "decoder", t)
        loss = loss - np.sum(weight[:, t] * np.log(p[rows, tgt[:, t]]))
        dec_steps.append(act)
        probs.append(p)
        s = act["s"]
    if not np.isfinite(loss):
        raise NonFiniteError(f"non-finite loss at decoder step {L - 1}")
    cache = Cache(src, src_mask, tgt, tgt_in, weight, enc_steps, H, P, dec_steps, probs)
    return (float(loss) if loss.dtype == np.float64 else loss[()]), cache


def forward(params: ModelParams, input_ids: Sequence[int], target_ids: Sequence[int]):
    return forward_batch(params, [input_ids], [target_ids])


def _gru_backward(ds, x, s_prev, z, r, n, g: dict, prefix: str, Wz, Wr, Wn, Uz, Ur, Un):
    """Backprop one GRU step; accumulates weight grads into ``g`` and returns (dx, ds_prev)."""
    dn = ds * (1.0 - z)
    dz = ds * (s_prev - n)
    ds_prev = ds * z
    dan = dn * (1.0 - n * n)
    daz = dz * z * (1.0 - z)
    rs = r * s_prev
    d_rs = dan @ Un.T
    dr = d_rs * s_prev
    ds_prev += d_rs * r
    dar = dr * r * (1.0 - r)
    g[prefix + "Wz"] += x.T @ daz
    g[prefix + "Wr"] += x.T @ dar
    g[prefix + "Wn"] += x.T @ dan
    g[prefix + "Uz"] += s_prev.T @ daz
    g[prefix + "Ur"] += s_prev.T @ dar
    g[prefix + "Un"] += rs.T @ dan
    g[prefix + "bz"] += daz.sum(axis=0)
    g[prefix + "br"] += dar.sum(axis=0)
    g[prefix + "bn"] += dan.sum(axis=0)
    dx = daz @ Wz.T + dar @ Wr.T + dan @ Wn.T
    ds_prev += daz @ Uz.T + dar @ Ur.T
    return dx, ds_prev


def backward(params: ModelParams, cache: Cache) -> ModelParams:
    """Exact gradients of the summed batch loss from :func:`forward_batch`."""
    p = params
    g = {name: np.zeros_like(a) for name, a in p.items()}
    B, S = cache.src.shape
    L = cache.tgt.shape[1]
    d = p.d
    if len(cache.dec) != L or cache.H.shape[2] != p.h:
        raise ValueError("cache does not match these parameters")
    H, P = cache.H, cache.P
    dH = np.zeros_like(H)
    dP = np.zeros_like(P)
    ds = np.zeros((B, p.h))
    rows = np.arange(B)
    for t in reversed(range(L)):
        act = cache.dec[t]
        do = cache.probs[t].copy()
        do[rows, cache.tgt[:, t]] -= 1.0
        do *= cache.tgt_weight[:, t:t + 1]
        sc = np.concatenate([act["s"], act["ctx"]], axis=1)
        g["out_W"] += sc.T @ do
        g["out_b"] += do.sum(axis=0)
        dsc = do @ p.out_W.T
        ds = ds + dsc[:, :p.h]
        dctx = dsc[:, p.h:].copy()
        dx, ds_prev = _gru_backward(
            ds, act["x"], act["s_prev"], act["z"], act["r"], act["n"], g, "dec_",
            p.dec_Wz, p.dec_Wr, p.dec_Wn, p.dec_Uz, p.dec_Ur, p.dec_Un,
        )
        np.add.at(g["embed"], cache.tgt_in[:, t], dx[:, :d])
        dctx += dx[:, d:]
        # attention
        alpha, A = act["alpha"], act["A"]
        dH += alpha[:, :, None] * dctx[:, None, :]
        dalpha = np.einsum("bh,bsh->bs", dctx, H)
        de = alpha * (dalpha - np.sum(alpha * dalpha, axis=1, keepdims=True))
        g["att_v"] += np.einsum("bs,bsh->h", de, A)
        dpre = de[:, :, None] * p.att_v[None, None, :] * (1.0 - A * A)
        dP += dpre
        dWs = dpre.sum(axis=1)
        g["att_W"] += act["s_prev"].T @ dWs
        ds = ds_prev + dWs @ p.att_W.T
    g["att_U"] += np.einsum("bsh,bsk->hk", H, dP)
    dH += dP @ p.att_U.T
    # the decoder's initial state is the last encoder state
    dh = ds
    m_all = cache.src_mask
    for t in reversed(range(S)):
        dh = dh + dH[:, t]
        x, h_prev, z, r, n = cache.enc[t]
        m = m_all[:, t:t + 1]
        dh_new = m * dh
        dx, dh_prev = _gru_backward(
            dh_new, x, h_prev, z, r, n, g, "enc_",
            p.enc_Wz, p.enc_Wr, p.enc_Wn, p.enc_Uz, p.enc_Ur, p.enc_Un,
        )
        np.add.at(g["embed"], cache.src[:, t], dx)
        dh = dh_prev + (1.0 - m) * dh
    return ModelParams(**g)


def loss_and_grads(params: ModelParams, inputs, targets):
    loss, cache = forward_batch(params, inputs, targets)
    return loss, backward(params, cache)


def greedy_decode(params: ModelParams, inputs: Sequence[Sequence[int]], max_lens: Sequence[int]):
    """Batched greedy decoding. Returns (list of id lists without EOS, list of hit-cap flags)."""
    from ..encoding import EOS

    B = len(inputs)
    src, src_mask = pad_batch(inputs)
    H, s = encode(params, src, src_mask)
    P = H @ params.att_U
    neg = _neg_mask(src_mask)
    y = np.full(B, BOS, dtype=np.int64)
    out: list[list[int]] = [[] for _ in range(B)]
    done = np.zeros(B, dtype=bool)
    cap = np.asarray(max_lens)
    for t in range(int(cap.max()) if B else 0):
        act, logits = _decoder_step(params, y, s, H, P, neg)
        y = logits.argmax(axis=1)
        s = act["s"]
        for b in np.flatnonzero(~done):
            if y[b] == EOS:
                done[b] = True
            elif len(out[b]) < cap[b]:
                out[b].append(int(y[b]))
                if len(out[b]) >= cap[b]:
                    done[b] = True
        if done.all():
            break
    hit_cap = [len(o) >= c for o, c in zip(out, cap)]
    return out, hit_cap


def attention_weights(params: ModelParams, input_ids: Sequence[int], target_ids: Sequence[int]) -> np.ndarray:
    """Teacher-forced attention distributions, ``[target_len, input_len]``."""
    _, cache = forward(params, input_ids, target_ids)
    return np.stack([act["alpha"][0] for act in cache.dec])
