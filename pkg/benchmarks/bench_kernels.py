"""Benchmark the compiled assembly kernels against the numpy fallback.

Run:  python3 benchmarks/bench_kernels.py [repeats]

Assembly is the hot inner loop of the whole pipeline: every Newton step of
every error sample reassembles weighted operators, so study-scale runs hit
these kernels ~1e5 times.
"""

import sys
import time

import numpy as np

from baecv.fem import build_rect_mesh
from baecv.fem.backend import get_backend


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(repeats=20):
    meshes = {
        "strip 50x15": build_rect_mesh(50, 15, 1.0, 0.25),
        "square 40x40": build_rect_mesh(40, 40, 1.0, 1.0),
        "square 120x120": build_rect_mesh(120, 120, 1.0, 1.0),
    }
    backends = {}
    for name in ("numpy", "cython"):
        try:
            backends[name] = get_backend(name)
        except (ImportError, ValueError) as exc:
            print(f"backend {name} unavailable: {exc}")
    theta = np.eye(2)
    rows = []
    for mesh_name, mesh in meshes.items():
        w = np.linspace(1.0, 2.0, mesh.num_vertices)
        u = np.sin(np.arange(mesh.num_vertices) * 0.37)
        cases = {
            "weighted mass": lambda k: k.tri_weighted_mass(mesh.vertices, mesh.triangles, w),
            "stiffness": lambda k: k.tri_stiffness(mesh.vertices, mesh.triangles, 1.0, w, theta),
            "stiffness grad": lambda k: k.tri_stiffness_bilinear_gradient(
                mesh.vertices, mesh.triangles, theta, u, w),
        }
        for case_name, fn in cases.items():
            timing = {}
            for bk_name, bk in backends.items():
                timing[bk_name] = _time(lambda: fn(bk), repeats)
            rows.append((mesh_name, case_name, timing))
    print(f"{'mesh':<16} {'kernel':<16} " + " ".join(f"{b:>12}" for b in backends))
    for mesh_name, case_name, timing in rows:
        cells = " ".join(f"{timing[b] * 1e6:>10.1f}us" for b in backends)
        speedup = ""
        if "numpy" in timing and "cython" in timing:
            speedup = f"  ({timing['numpy'] / timing['cython']:.1f}x)"
        print(f"{mesh_name:<16} {case_name:<16} {cells}{speedup}")
    # consistency across backends
    if len(backends) == 2:
        mesh = meshes["strip 50x15"]
        w = np.linspace(1.0, 2.0, mesh.num_vertices)
        a = backends["numpy"].tri_weighted_mass(mesh.vertices, mesh.triangles, w)
        b = backends["cython"].tri_weighted_mass(mesh.vertices, mesh.triangles, w)
        err = max(abs(a[2] - b[2]).max(), float((a[0] != b[0]).sum() + (a[1] != b[1]).sum()))
        print(f"\nbackend agreement (weighted mass triplets): max dev {err:.3e}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 20)
