"""Compare the compiled penalty kernel against the numpy fallback.

Times both backends on the benchmark scenario's quadrature workload and
verifies they agree.  Run from the repository root:

    python benchmarks/bench_kernels.py --repeats 200
"""

import argparse
import time
from pathlib import Path

import numpy as np

from perchplan import kernels, optimizer
from perchplan.cli import load_scenario
from perchplan.spline import PerchSpline
from perchplan.optimizer import unpack
from perchplan.terminal import terminal_state

SCENARIO = Path(__file__).resolve().parent.parent / "scenarios" / "benchmark-rest2rest.yaml"


def kernel_args(scenario):
    """Representative mid-solve spline plus the static kernel arguments."""
    x = optimizer.initial_guess(scenario)
    T_prime, q, v_t, tau_f = unpack(x, scenario.solver.pieces)
    T = float(np.exp(T_prime))
    term = terminal_state(v_t, tau_f, scenario.platform, scenario.geometry, scenario.limits, T)
    spline = PerchSpline.build(scenario.initial, term.boundary, q, T)
    return (
        spline.coeffs,
        spline.T_piece,
        scenario.quadrature.kappa,
        scenario.platform.rho0,
        scenario.platform.vel,
        scenario.perch.z_d,
        scenario.perch.d_bar,
        scenario.limits,
        scenario.weights,
        scenario.smoothing,
        scenario.geometry,
    )


def time_backend(fn, args, repeats):
    fn(*args)  # warm up caches
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - t0) / repeats


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=500)
    parser.add_argument("--scenario", default=str(SCENARIO))
    opts = parser.parse_args()

    scenario = load_scenario(opts.scenario)
    args = kernel_args(scenario)

    c_np, g_np, t_np = kernels.accumulate_penalties_np(*args)
    numpy_time = time_backend(kernels.accumulate_penalties_np, args, opts.repeats)
    print(f"numpy kernel:    {numpy_time * 1e6:9.1f} us/call")

    if kernels.HAVE_COMPILED:
        c_c, g_c, t_c = kernels.accumulate_penalties(*args)
        compiled_time = time_backend(kernels.accumulate_penalties, args, opts.repeats)
        print(f"compiled kernel: {compiled_time * 1e6:9.1f} us/call")
        print(f"speedup:         {numpy_time / compiled_time:9.2f}x")
        err = max(
            float(np.max(np.abs(c_c - c_np)) / max(1.0, np.max(np.abs(c_np)))),
            float(np.max(np.abs(g_c - g_np)) / max(1.0, np.max(np.abs(g_np)))),
            float(np.max(np.abs(t_c - t_np)) / max(1.0, np.max(np.abs(t_np)))),
        )
        print(f"max rel diff:    {err:.3e}")
    else:
        print("compiled kernel: unavailable (extension not built)")


if __name__ == "__main__":
    main()
