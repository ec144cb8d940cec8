#!/usr/bin/env python3
"""Benchmark the ray-casting backends (compiled kernel vs NumPy fallback).

Usage: python benchmarks/bench_raycast.py [--resolution N] [--repeats K]
"""

import argparse
import time

import numpy as np

from artmanip import _kernels, render, scene


def bench(fn, args, repeats):
    fn(*args)  # warm up
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--resolution", type=int, default=336)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--category", default="drawer")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    obj = scene.build_object(args.category, args.seed)
    cam = render.sample_camera(3)
    intr = render.make_intrinsics(args.resolution, args.resolution)
    tris, _ = scene.forward_kinematics(obj, obj.joint_values())
    call_args = (
        cam.camera_center,
        np.ascontiguousarray(render._pixel_dirs_world(intr, cam)),
        np.ascontiguousarray(tris[:, 0]),
        np.ascontiguousarray(tris[:, 1] - tris[:, 0]),
        np.ascontiguousarray(tris[:, 2] - tris[:, 0]),
    )
    n_rays = args.resolution * args.resolution
    n_tris = len(tris)
    print(f"{args.category} seed {args.seed}: {n_rays} rays x {n_tris} triangles "
          f"(default backend: {_kernels.BACKEND})")

    results = {}
    for name, fn in _kernels.available_backends().items():
        seconds = bench(fn, call_args, args.repeats)
        results[name] = seconds
        mrays = n_rays / seconds / 1e6
        print(f"  {name:7s} {seconds * 1e3:9.2f} ms   {mrays:7.2f} Mrays/s")

    if "cython" in results and "numpy" in results:
        print(f"  speedup {results['numpy'] / results['cython']:.1f}x (cython over numpy)")
        t_np, i_np = _kernels.available_backends()["numpy"](*call_args)
        t_cy, i_cy = _kernels.available_backends()["cython"](*call_args)
        hit = i_np >= 0
        match = np.array_equal(i_np, i_cy) and np.array_equal(t_np[hit], t_cy[hit])
        print(f"  outputs identical: {match}")


if __name__ == "__main__":
    main()
