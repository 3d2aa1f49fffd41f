#!/usr/bin/env python3
"""Independent golden model for the fixture networks.

Shares no code with the C++ library: weights come from a fresh SplitMix64,
rounding uses exact rationals. Prints the terminal output of each network
given on the command line as a comma-separated int8 list.

    python3 tests/oracle/reference_oracle.py fixtures/networks/tiny_cnn.json
"""
import json
import sys
from fractions import Fraction

MASK = (1 << 64) - 1


def splitmix64(seed):
    state = seed & MASK
    while True:
        state = (state + 0x9E3779B97F4A7C15) & MASK
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        yield z ^ (z >> 31)


def int8_stream(seed, n):
    gen = splitmix64(seed)
    out = []
    for _ in range(n):
        b = next(gen) >> 56
        out.append(b - 256 if b >= 128 else b)
    return out


def clamp8(v):
    return max(-128, min(127, v))


def round_half_away(q):
    q = Fraction(q)
    mag = abs(q)
    r = int(mag)
    if mag - r >= Fraction(1, 2):
        r += 1
    return r if q >= 0 else -r


def requant(acc, mult, shift):
    return clamp8(round_half_away(Fraction(acc * mult, 2 ** shift)))


def shape_of(shape):
    return (shape[0], 1, 1) if len(shape) == 1 else tuple(shape)


def kernel_hw(k):
    return (k, k) if isinstance(k, int) else tuple(k)


def run(net):
    c, h, w = shape_of(net["input_shape"])
    x = int8_stream(net.get("input_seed", 0), c * h * w)
    inp = {"t": x, "s": (c, h, w)}
    outs = []
    consumed = set()
    for i, layer in enumerate(net["layers"]):
        prods = layer.get("producers", [i - 1])
        consumed.update(prods)
        srcs = [inp if p < 0 else outs[p] for p in prods]
        t, (c, h, w) = srcs[0]["t"], srcs[0]["s"]
        kind = layer["type"]
        if kind in ("conv", "fc"):
            if kind == "conv":
                kh, kw = kernel_hw(layer["kernel"])
                s, p = layer.get("stride", 1), layer.get("padding", 0)
                k = layer["out_channels"]
            else:
                kh, kw, s, p, k = h, w, 1, 0, layer["out_features"]
            rows = c * kh * kw
            wt = int8_stream(layer["weight_seed"], rows * k)
            ho, wo = (h + 2 * p - kh) // s + 1, (w + 2 * p - kw) // s + 1
            q = layer["quant"]
            out = [0] * (k * ho * wo)
            for o in range(k):
                for oy in range(ho):
                    for ox in range(wo):
                        acc = 0
                        for ci in range(c):
                            for ky in range(kh):
                                for kx in range(kw):
                                    iy, ix = oy * s - p + ky, ox * s - p + kx
                                    if 0 <= iy < h and 0 <= ix < w:
                                        r = (ci * kh + ky) * kw + kx
                                        acc += t[(ci * h + iy) * w + ix] * wt[r * k + o]
                        out[(o * ho + oy) * wo + ox] = requant(acc, q["multiplier"], q["shift"])
            res = {"t": out, "s": (k, ho, wo)}
        elif kind == "pool":
            kh, kw = kernel_hw(layer["kernel"])
            s = layer.get("stride", kh)
            ho, wo = (h - kh) // s + 1, (w - kw) // s + 1
            out = []
            for ci in range(c):
                for oy in range(ho):
                    for ox in range(wo):
                        win = [t[(ci * h + oy * s + ky) * w + ox * s + kx] for ky in range(kh) for kx in range(kw)]
                        if layer.get("kind", "max") == "max":
                            out.append(max(win))
                        else:
                            out.append(clamp8(round_half_away(Fraction(sum(win), len(win)))))
            res = {"t": out, "s": (c, ho, wo)}
        elif kind == "relu":
            res = {"t": [max(v, 0) for v in t], "s": (c, h, w)}
        elif kind == "add":
            other = srcs[1]["t"]
            res = {"t": [clamp8(a + b) for a, b in zip(t, other)], "s": (c, h, w)}
        elif kind == "concat":
            out = []
            ch = 0
            for src in srcs:
                out += src["t"]
                ch += src["s"][0]
            res = {"t": out, "s": (ch, h, w)}
        else:
            raise ValueError(kind)
        outs.append(res)
    terminal = [i for i in range(len(outs)) if i not in consumed]
    assert len(terminal) == 1
    return outs[terminal[0]]["t"]


if __name__ == "__main__":
    for path in sys.argv[1:]:
        with open(path) as f:
            net = json.load(f)
        print(net["name"] + ": " + ",".join(str(v) for v in run(net)))
