#!/usr/bin/env python3
"""Benchmark the envelope kernel backends on the metric's hot path.

Runs the full per-band chain (gammatone cascade, rectification, low-pass,
frame RMS) over a stereo clip with both the compiled extension and the
scipy fallback, then times a complete predictor search through each.

Usage: python benchmarks/bench_excitation.py [--duration 10] [--repeats 3]
"""

import argparse
import time

import numpy as np

from dbl.glimpse import BACKEND
from dbl.glimpse.excitation import reference_band_frame_rms
from dbl.glimpse.filterbank import design_envelope_lowpass, design_filterbank

FS = 48000


def timed(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--duration", type=float, default=10.0, help="clip length in seconds")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    x = np.ascontiguousarray(rng.standard_normal(int(FS * args.duration)) * 0.1)
    _, poles, norms = design_filterbank(34, 100.0, 7500.0, FS)
    lp_b, lp_a = design_envelope_lowpass(FS)

    backends = {"numpy/scipy": reference_band_frame_rms}
    if BACKEND == "compiled":
        from dbl.glimpse import _envelope_fast

        backends["compiled"] = _envelope_fast.band_frame_rms
    else:
        print("note: compiled extension not importable; timing the fallback only")

    print(f"clip: {args.duration:.1f} s mono at {FS} Hz, 34 bands, best of {args.repeats}")
    results = {}
    outputs = {}
    for name, fn in backends.items():
        outputs[name] = fn(x, poles, norms, lp_b, lp_a, 480)
        results[name] = timed(lambda f=fn: f(x, poles, norms, lp_b, lp_a, 480), args.repeats)
    for name, seconds in sorted(results.items(), key=lambda kv: kv[1]):
        rate = args.duration / seconds
        print(f"  {name:12s} {seconds * 1000:8.1f} ms  ({rate:5.1f}x realtime)")
    if len(results) == 2:
        ratio = results["numpy/scipy"] / results["compiled"]
        print(f"  speedup: {ratio:.2f}x")
        a, b = outputs["compiled"], outputs["numpy/scipy"]
        print(f"  max rel difference: {np.max(np.abs(a - b) / np.maximum(b, 1e-30)):.2e}")

    bench_search(args, backends)


def bench_search(args, backends) -> None:
    """End-to-end predictor search with each backend swapped in."""
    import importlib

    from dbl.audio import AudioClip, StemPair
    from dbl.loudness import normalize_to
    from dbl.predict import ItemSearcher

    exc_mod = importlib.import_module("dbl.glimpse.excitation")

    rng = np.random.default_rng(1)
    n = int(FS * args.duration)
    fg, _ = normalize_to(AudioClip(rng.standard_normal((2, n)) * 0.1, FS), -23.0)
    bg, _ = normalize_to(AudioClip(rng.standard_normal((2, n)) * 0.1, FS), -23.0)
    stems = StemPair(fg, bg)

    print("predictor search (excitations + pre-scan + bisection):")
    original = exc_mod._backend
    try:
        for name, fn in backends.items():
            holder = type("Backend", (), {"band_frame_rms": staticmethod(fn)})
            exc_mod._backend = holder
            seconds = timed(lambda: ItemSearcher(stems).search(0.5), args.repeats)
            print(f"  {name:12s} {seconds * 1000:8.1f} ms")
    finally:
        exc_mod._backend = original


if __name__ == "__main__":
    main()
