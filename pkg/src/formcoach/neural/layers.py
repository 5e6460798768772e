"""Differentiable sequence layers on plain numpy arrays.

Every layer works in double precision on batched inputs (batch, time,
features) and implements forward/backward explicitly; there is no
autograd. A layer owns its parameters and accumulates gradients of the
same shapes in `grads`. The recurrence and attention arithmetic is spelled
out step by step in docs/NEURAL.md.
"""

from __future__ import annotations

import numpy as np


def sigmoid(x):
    # numerically safe piecewise form
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def xavier_uniform(rng: np.random.Generator, fan_in: int, fan_out: int,
                   shape: tuple) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Layer:
    """Common parameter bookkeeping; subclasses fill params in __init__."""

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}

    def _register(self, name: str, value: np.ndarray):
        self.params[name] = value
        self.grads[name] = np.zeros_like(value)

    def zero_grads(self):
        for g in self.grads.values():
            g[...] = 0.0

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dout: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def spec(self) -> dict:
        raise NotImplementedError


class Dense(Layer):
    """Affine map on the last axis; accepts (B, D) or (B, T, D)."""

    def __init__(self, input_size: int, output_size: int,
                 rng: np.random.Generator | None = None):
        super().__init__()
        self.input_size = input_size
        self.output_size = output_size
        rng = rng or np.random.default_rng(0)
        self._register("W", xavier_uniform(rng, input_size, output_size,
                                           (input_size, output_size)))
        self._register("b", np.zeros(output_size))
        self._x = None

    def forward(self, x):
        self._x = x
        return x @ self.params["W"] + self.params["b"]

    def backward(self, dout):
        x = self._x
        x2 = x.reshape(-1, self.input_size)
        d2 = dout.reshape(-1, self.output_size)
        self.grads["W"] += x2.T @ d2
        self.grads["b"] += d2.sum(axis=0)
        return dout @ self.params["W"].T

    def spec(self):
        return {"type": "dense", "input_size": self.input_size,
                "output_size": self.output_size}


GATE_ORDER = ("i", "f", "g", "o")  # input, forget, candidate, output


class LSTM(Layer):
    """Single-direction LSTM over (B, T, D) -> (B, T, H).

    Gate order in the fused weight matrices is input, forget, candidate,
    output. Initialization: Xavier-uniform per gate block, zero biases,
    forget-gate bias raised to +1 so early training does not forget.
    """

    def __init__(self, input_size: int, hidden_size: int,
                 rng: np.random.Generator | None = None):
        super().__init__()
        self.input_size = input_size
        self.hidden_size = hidden_size
        rng = rng or np.random.default_rng(0)
        H, D = hidden_size, input_size
        Wx = np.concatenate(
            [xavier_uniform(rng, D, H, (D, H)) for _ in GATE_ORDER], axis=1)
        Wh = np.concatenate(
            [xavier_uniform(rng, H, H, (H, H)) for _ in GATE_ORDER], axis=1)
        b = np.zeros(4 * H)
        b[H:2 * H] = 1.0
        self._register("Wx", Wx)
        self._register("Wh", Wh)
        self._register("b", b)
        self._cache = None

    def forward(self, x):
        B, T, D = x.shape
        H = self.hidden_size
        Wx, Wh, b = self.params["Wx"], self.params["Wh"], self.params["b"]
        pre_x = x @ Wx  # (B, T, 4H), input part hoisted out of the loop
        h = np.zeros((B, H))
        c = np.zeros((B, H))
        hs = np.empty((T, B, H))
        cs = np.empty((T, B, H))
        gates = np.empty((T, B, 4 * H))
        tanh_c = np.empty((T, B, H))
        h_prev = np.empty((T, B, H))
        c_prev = np.empty((T, B, H))
        for t in range(T):
            h_prev[t] = h
            c_prev[t] = c
            a = pre_x[:, t, :] + h @ Wh + b
            i = sigmoid(a[:, :H])
            f = sigmoid(a[:, H:2 * H])
            g = np.tanh(a[:, 2 * H:3 * H])
            o = sigmoid(a[:, 3 * H:])
            c = f * c + i * g
            tc = np.tanh(c)
            h = o * tc
            gates[t] = np.concatenate([i, f, g, o], axis=1)
            cs[t] = c
            tanh_c[t] = tc
            hs[t] = h
        self._cache = (x, h_prev, c_prev, gates, cs, tanh_c)
        return hs.transpose(1, 0, 2)

    def backward(self, dout):
        x, h_prev, c_prev, gates, cs, tanh_c = self._cache
        B, T, D = x.shape
        H = self.hidden_size
        Wx, Wh = self.params["Wx"], self.params["Wh"]
        dWx, dWh, db = self.grads["Wx"], self.grads["Wh"], self.grads["b"]
        dx = np.empty_like(x)
        dh_next = np.zeros((B, H))
        dc_next = np.zeros((B, H))
        dout_t = dout.transpose(1, 0, 2)  # (T, B, H)
        for t in range(T - 1, -1, -1):
            i = gates[t][:, :H]
            f = gates[t][:, H:2 * H]
            g = gates[t][:, 2 * H:3 * H]
            o = gates[t][:, 3 * H:]
            tc = tanh_c[t]
            dh = dout_t[t] + dh_next
            dc = dc_next + dh * o * (1.0 - tc * tc)
            da_i = (dc * g) * i * (1.0 - i)
            da_f = (dc * c_prev[t]) * f * (1.0 - f)
            da_g = (dc * i) * (1.0 - g * g)
            da_o = (dh * tc) * o * (1.0 - o)
            da = np.concatenate([da_i, da_f, da_g, da_o], axis=1)
            dWx += x[:, t, :].T @ da
            dWh += h_prev[t].T @ da
            db += da.sum(axis=0)
            dx[:, t, :] = da @ Wx.T
            dh_next = da @ Wh.T
            dc_next = dc * f
        return dx

    def spec(self):
        return {"type": "lstm", "input_size": self.input_size,
                "hidden_size": self.hidden_size}


class BiLSTM(Layer):
    """Forward and reversed LSTM passes, concatenated per timestep.

    Output (B, T, 2H): columns [:H] from the forward pass, [H:] from the
    backward pass aligned back to input order.
    """

    def __init__(self, input_size: int, hidden_size: int,
                 rng: np.random.Generator | None = None):
        super().__init__()
        self.input_size = input_size
        self.hidden_size = hidden_size
        rng = rng or np.random.default_rng(0)
        self.fwd = LSTM(input_size, hidden_size, rng)
        self.bwd = LSTM(input_size, hidden_size, rng)
        for name, sub in (("fwd", self.fwd), ("bwd", self.bwd)):
            for pname, arr in sub.params.items():
                self.params[f"{name}.{pname}"] = arr
                self.grads[f"{name}.{pname}"] = sub.grads[pname]

    def forward(self, x):
        hf = self.fwd.forward(x)
        hb = self.bwd.forward(x[:, ::-1, :])
        return np.concatenate([hf, hb[:, ::-1, :]], axis=2)

    def backward(self, dout):
        H = self.hidden_size
        dxf = self.fwd.backward(dout[:, :, :H])
        dxb = self.bwd.backward(dout[:, ::-1, H:])
        return dxf + dxb[:, ::-1, :]

    def zero_grads(self):
        self.fwd.zero_grads()
        self.bwd.zero_grads()

    def spec(self):
        return {"type": "bilstm", "input_size": self.input_size,
                "hidden_size": self.hidden_size}


class MultiHeadAttention(Layer):
    """Scaled dot-product self-attention with per-head projections.

    Softmax runs over the time axis; heads are concatenated and passed
    through an output projection. Shape-preserving: (B, T, D) -> (B, T, D).
    """

    def __init__(self, model_dim: int, num_heads: int,
                 rng: np.random.Generator | None = None):
        super().__init__()
        if model_dim % num_heads != 0:
            raise ValueError(f"model_dim {model_dim} not divisible by "
                             f"num_heads {num_heads}")
        self.model_dim = model_dim
        self.num_heads = num_heads
        self.head_dim = model_dim // num_heads
        rng = rng or np.random.default_rng(0)
        for name in ("Wq", "Wk", "Wv", "Wo"):
            self._register(name, xavier_uniform(
                rng, model_dim, model_dim, (model_dim, model_dim)))
            self._register(name.replace("W", "b"), np.zeros(model_dim))
        self._cache = None

    def _split(self, x):
        B, T, _ = x.shape
        return x.reshape(B, T, self.num_heads, self.head_dim).transpose(0, 2, 1, 3)

    def _merge(self, x):
        B, nh, T, hd = x.shape
        return x.transpose(0, 2, 1, 3).reshape(B, T, nh * hd)

    def forward(self, x):
        p = self.params
        q = self._split(x @ p["Wq"] + p["bq"])
        k = self._split(x @ p["Wk"] + p["bk"])
        v = self._split(x @ p["Wv"] + p["bv"])
        scores = q @ k.transpose(0, 1, 3, 2) / np.sqrt(self.head_dim)
        scores -= scores.max(axis=-1, keepdims=True)
        expo = np.exp(scores)
        attn = expo / expo.sum(axis=-1, keepdims=True)  # (B, nh, T, T)
        ctx = attn @ v
        merged = self._merge(ctx)
        out = merged @ p["Wo"] + p["bo"]
        self._cache = (x, q, k, v, attn, merged)
        return out

    def backward(self, dout):
        x, q, k, v, attn, merged = self._cache
        p, g = self.params, self.grads
        B, T, D = x.shape

        m2 = merged.reshape(-1, D)
        d2 = dout.reshape(-1, D)
        g["Wo"] += m2.T @ d2
        g["bo"] += d2.sum(axis=0)
        dctx = self._split(dout @ p["Wo"].T)

        dattn = dctx @ v.transpose(0, 1, 3, 2)
        dv = attn.transpose(0, 1, 3, 2) @ dctx
        # softmax jacobian applied row-wise
        dscores = attn * (dattn - (dattn * attn).sum(axis=-1, keepdims=True))
        dscores /= np.sqrt(self.head_dim)
        dq = dscores @ k
        dk = dscores.transpose(0, 1, 3, 2) @ q

        x2 = x.reshape(-1, D)
        dx = np.zeros_like(x)
        for name, dproj in (("Wq", dq), ("Wk", dk), ("Wv", dv)):
            dp = self._merge(dproj)
            dp2 = dp.reshape(-1, D)
            g[name] += x2.T @ dp2
            g[name.replace("W", "b")] += dp2.sum(axis=0)
            dx += dp @ p[name].T
        return dx

    def spec(self):
        return {"type": "attention", "model_dim": self.model_dim,
                "num_heads": self.num_heads}


class MeanPool(Layer):
    """Average over the time axis: (B, T, D) -> (B, D)."""

    def __init__(self):
        super().__init__()
        self._T = None

    def forward(self, x):
        self._T = x.shape[1]
        return x.mean(axis=1)

    def backward(self, dout):
        return np.repeat(dout[:, None, :], self._T, axis=1) / self._T

    def spec(self):
        return {"type": "mean_pool"}


class BiFinalPool(Layer):
    """Summary vector from a BiLSTM output sequence: (B, T, 2H) -> (B, 2H).

    Takes the forward direction's last timestep and the backward
    direction's first output row, i.e. each direction's state after it has
    read the whole sequence.
    """

    def __init__(self, hidden_size: int):
        super().__init__()
        self.hidden_size = hidden_size
        self._shape = None

    def forward(self, x):
        H = self.hidden_size
        if x.shape[2] != 2 * H:
            raise ValueError(f"expected feature dim {2 * H}, got {x.shape[2]}")
        self._shape = x.shape
        return np.concatenate([x[:, -1, :H], x[:, 0, H:]], axis=1)

    def backward(self, dout):
        H = self.hidden_size
        dx = np.zeros(self._shape)
        dx[:, -1, :H] = dout[:, :H]
        dx[:, 0, H:] = dout[:, H:]
        return dx

    def spec(self):
        return {"type": "bifinal_pool", "hidden_size": self.hidden_size}


def build_layer(spec: dict, rng: np.random.Generator | None = None) -> Layer:
    """Reconstruct a layer from its spec() dict; weights are left at init."""
    kind = spec["type"]
    if kind == "dense":
        return Dense(spec["input_size"], spec["output_size"], rng)
    if kind == "lstm":
        return LSTM(spec["input_size"], spec["hidden_size"], rng)
    if kind == "bilstm":
        return BiLSTM(spec["input_size"], spec["hidden_size"], rng)
    if kind == "attention":
        return MultiHeadAttention(spec["model_dim"], spec["num_heads"], rng)
    if kind == "mean_pool":
        return MeanPool()
    if kind == "bifinal_pool":
        return BiFinalPool(spec["hidden_size"])
    raise ValueError(f"unknown layer type {kind!r}")
