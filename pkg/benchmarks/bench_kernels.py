"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each kernel is called once before timing so compilation is excluded.
"""
import argparse
import time

import numpy as np

from monogamy_lab import _kernels as K
from monogamy_lab.audit import default_alpha_grid, kappa_grid
from monogamy_lab.model import InitialPairState, evolved_two_pair_state, two_pair_amplitudes
from monogamy_lab.roof import PureTangle, eigen_ensemble, random_tableau
from monogamy_lab.tensor import reduced_from_amplitudes


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    tol, sweeps = K.JACOBI_TOL, K.JACOBI_MAX_SWEEPS

    g = rng.standard_normal((64, 16, 16)) + 1j * rng.standard_normal((64, 16, 16))
    herm = g @ np.conj(np.swapaxes(g, 1, 2))
    yield ("jacobi 64 x (16x16)",
           lambda: K._jacobi_batch_nb(herm, True, tol, sweeps),
           lambda: K._jacobi_np(herm, True, tol, sweeps))

    a = default_alpha_grid()
    aa, kk = np.meshgrid(a, kappa_grid(), indexing="ij")
    amps = two_pair_amplitudes(aa.ravel(), np.sqrt(1 - aa.ravel() ** 2), kk.ravel())
    rhos = np.ascontiguousarray(reduced_from_amplitudes(amps, 4, [0, 2]))
    yield (f"wootters {rhos.shape[0]} states",
           lambda: K._wootters_batch_nb(rhos, tol, sweeps, K.PSD_CLAMP),
           lambda: K._wootters_batch_np(rhos, tol, sweeps, K.PSD_CLAMP))

    init = InitialPairState.from_alpha(0.6)
    basis = eigen_ensemble(evolved_two_pair_state(init, 0.8).reduced(["c1", "c2", "r2"]))
    tf = PureTangle.three_tangle()
    v0 = random_tableau(np.random.default_rng(1), 4, basis.shape[0])
    args = (basis, tf.kind, tf.perm, tf.d_sub, 0.25, 1e-10, 300, 50, 1e-10)
    yield ("compass search m=4, 300 iterations",
           lambda: K._compass_nb(v0, *args),
           lambda: K._compass_np(v0, *args))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ns = ap.parse_args()
    print(f"{'kernel':<38}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for name, nb_fn, np_fn in cases():
        t_nb, t_np = best_of(nb_fn, ns.repeat), best_of(np_fn, ns.repeat)
        print(f"{name:<38}{t_nb:>12.4f}{t_np:>12.4f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
