#!/usr/bin/env python3
# Copyright 2026 The bpdm Authors
# SPDX-License-Identifier: Apache-2.0
"""Writes a small random BPDM network plus a .vec file of reference outputs.

The reference forward pass is numpy in float64 over the float32 weights, so
the C++ loader is checked against an implementation it shares no code with.
"""
import struct
import sys
from pathlib import Path

import numpy as np


def silu(a):
    return a / (1.0 + np.exp(-a))


def forward(layers, u, sigma, act):
    h = np.concatenate([u.astype(np.float64), [np.log(sigma) / 4.0]])
    for i, (w, b) in enumerate(layers):
        h = w.astype(np.float64) @ h + b.astype(np.float64)
        if i + 1 < len(layers):
            h = silu(h) if act == 0 else np.maximum(h, 0.0)
    return h


def write_net(path, dim, act, layers):
    with open(path, "wb") as f:
        f.write(b"BPDM")
        f.write(struct.pack("<IIII", 1, dim, len(layers), act))
        for w, b in layers:
            f.write(struct.pack("<II", *w.shape))
            f.write(w.astype("<f4").tobytes())
            f.write(b.astype("<f4").tobytes())


def write_vec(path, vectors):
    with open(path, "wb") as f:
        f.write(struct.pack("<I", len(vectors)))
        for u, s, out in vectors:
            f.write(u.astype("<f4").tobytes())
            f.write(struct.pack("<f", s))
            f.write(out.astype("<f4").tobytes())


def make(stem, dim, hidden, act, seed):
    rng = np.random.default_rng(seed)
    widths = [dim + 1] + hidden + [dim]
    layers = []
    for a, b in zip(widths[:-1], widths[1:]):
        w = (rng.standard_normal((b, a)) / np.sqrt(a)).astype(np.float32)
        bias = (0.1 * rng.standard_normal(b)).astype(np.float32)
        layers.append((w, bias))
    write_net(stem.with_suffix(".bpdm"), dim, act, layers)
    vectors = []
    for _ in range(10):
        u = rng.standard_normal(dim).astype(np.float32)
        s = np.float32(np.exp(rng.uniform(np.log(0.01), np.log(1.0))))
        out = forward(layers, u, float(s), act)
        vectors.append((u, float(s), out))
    write_vec(stem.with_suffix(".vec"), vectors)


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent
    make(out / "toy_silu", 6, [16, 16], 0, 20260114)
    make(out / "toy_relu", 4, [8], 1, 20260115)


if __name__ == "__main__":
    main()
