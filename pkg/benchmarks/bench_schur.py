"""Compare the compiled and numpy Schur-complement kernels.

Times the PSD-block accumulation on the default N_T=8 relaxation, then a
full solve with each backend. Run from the repository root:

    python3 benchmarks/bench_schur.py [--seeds 5] [--repeat 50]
"""
import argparse
import statistics
import time

import numpy as np

from secure_swipt import ProblemInstance, ScenarioConfig, generate_scenario, solve_instance
from secure_swipt.conic import BACKEND, SolverOptions
from secure_swipt.conic import kernels
from secure_swipt.conic.cones import compute_scaling
from secure_swipt.conic.ipm import _block_rinv
from secure_swipt.sdp import build_program


def _interior_scaling(prog, rng):
    """A scaling at a random strictly interior (s, z), like a mid-run iterate."""
    dims = prog.dims
    e = dims.identity()
    pert = lambda: e + 0.1 * rng.standard_normal(e.size) * (np.abs(e) > 0)  # noqa: E731
    return compute_scaling(dims, pert(), pert())


def time_kernel(prog, scaling, backend, repeat):
    n = prog.G.shape[1]
    rinv = _block_rinv(scaling, prog.dims)
    out, samples = None, []
    for _ in range(repeat):
        H = np.zeros((n, n))
        t = time.perf_counter()
        kernels.schur_psd_accumulate(H, prog.psd_data, rinv, backend)
        samples.append(time.perf_counter() - t)
        out = H
    return statistics.median(samples), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--repeat", type=int, default=50)
    args = ap.parse_args()
    if BACKEND != "compiled":
        raise SystemExit("compiled kernel not available; build with `pip install -e . --no-build-isolation`")

    cfg = ScenarioConfig()
    rng = np.random.default_rng(0)
    prog = build_program(ProblemInstance(generate_scenario(cfg, 0), cfg)).cone
    scaling = _interior_scaling(prog, rng)
    tp, Hp = time_kernel(prog, scaling, "python", args.repeat)
    tc, Hc = time_kernel(prog, scaling, "compiled", args.repeat)
    err = np.abs(Hp - Hc).max() / np.abs(Hp).max()
    print(f"kernel   ({prog.G.shape[1]} vars, PSD blocks {sorted(set(prog.dims.s))})")
    print(f"  python   {tp * 1e3:8.3f} ms")
    print(f"  compiled {tc * 1e3:8.3f} ms   speedup {tp / tc:5.1f}x   max rel diff {err:.1e}")

    print(f"full solve, {args.seeds} seeds, N_T={cfg.n_tx}")
    for backend in ("python", "compiled"):
        opts = SolverOptions(backend=backend)
        times, objs = [], []
        for seed in range(args.seeds):
            inst = ProblemInstance(generate_scenario(cfg, seed), cfg)
            t = time.perf_counter()
            sol, _ = solve_instance(inst, opts)
            times.append(time.perf_counter() - t)
            objs.append(sol.objective_w)
        print(f"  {backend:8s} median {statistics.median(times):6.3f} s   total {sum(times):6.2f} s   "
              f"objective seed 0 {objs[0]:.10g} W")


if __name__ == "__main__":
    main()
