#!/usr/bin/env python3
# Copyright 2026   snrd authors
# Licensed under the Apache License, Version 2.0.
#
# Regenerates tests/fixtures/stoi/*. Requires numpy, scipy and pystoi.
# Signals are quantized to 16-bit PCM before scoring so that the C++ side
# reads back exactly the samples the reference scored.

import json
import os
import wave

import numpy as np
from pystoi import stoi
from pystoi import utils

FS = 16000
HERE = os.path.join(os.path.dirname(os.path.abspath(__file__)), "stoi")


def quantize(x):
    pcm = np.clip(np.round(x * 32768.0), -32768, 32767).astype(np.int16)
    return pcm, pcm.astype(np.float64) / 32768.0


def write(name, pcm):
    with wave.open(os.path.join(HERE, name), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(FS)
        w.writeframes(pcm.tobytes())


def voiced(rng, seconds):
    # Harmonic bursts with gaps, loosely speech-like.
    n = int(seconds * FS)
    t = np.arange(n) / FS
    out = np.zeros(n)
    pos = 0
    while pos < n:
        dur = int(rng.uniform(0.15, 0.4) * FS)
        gap = int(rng.uniform(0.03, 0.2) * FS)
        f0 = rng.uniform(100, 220)
        seg = slice(pos, min(n, pos + dur))
        tt = t[seg] - t[pos]
        env = np.sin(np.pi * tt / (dur / FS)) ** 2
        tone = sum(rng.uniform(0.2, 1.0) / k * np.sin(2 * np.pi * k * f0 * tt + rng.uniform(0, 6.3))
                   for k in range(1, 12))
        out[seg] += env * tone
        pos += dur + gap
    return 0.3 * out / np.max(np.abs(out))


def main():
    os.makedirs(HERE, exist_ok=True)
    rng = np.random.default_rng(20260101)
    cases = []
    specs = [("white_0db", 1.5, 0.0, "white"), ("white_m5db", 2.0, -5.0, "white"),
             ("lowpass_5db", 1.2, 5.0, "lowpass"), ("white_15db", 3.0, 15.0, "white"),
             ("scaled_clean", 1.0, None, "gain")]
    for name, secs, snr, kind in specs:
        clean = voiced(rng, secs)
        if kind == "gain":
            proc = 0.5 * clean
        else:
            noise = rng.standard_normal(clean.size)
            if kind == "lowpass":
                noise = np.convolve(noise, np.ones(8) / 8, mode="same")
            g = np.sqrt(np.mean(clean ** 2) / (np.mean(noise ** 2) * 10 ** (snr / 10)))
            proc = clean + g * noise
        cpcm, cq = quantize(clean)
        ppcm, pq = quantize(proc)
        write(name + "_clean.wav", cpcm)
        write(name + "_proc.wav", ppcm)
        cases.append({"name": name, "clean": name + "_clean.wav", "processed": name + "_proc.wav",
                      "stoi": float(stoi(cq, pq, FS, extended=False))})

    probe = np.sin(np.arange(400) * 0.05) + 0.1 * np.cos(np.arange(400) * 1.3)
    resampled = utils.resample_oct(probe, 10000, 16000)
    obm, _ = utils.thirdoct(10000, 512, 15, 150)
    edges = [[int(np.argmax(r)), int(len(r) - np.argmax(r[::-1]))] for r in obm]
    doc = {"generator": "pystoi", "cases": cases,
           "resample_probe": {"input": probe.tolist(), "output": resampled.tolist()},
           "band_edges": edges}
    with open(os.path.join(HERE, "expected.json"), "w") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
