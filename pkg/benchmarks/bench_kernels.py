"""Time the batch kernels on both backends.

    python3 benchmarks/bench_kernels.py [--traces N] [--len L] [--repeat R]

Workload: the acceptance AFA and DFA of the U gap monitor (l=1) over seeded
random traces on {0,1,#,$}.  The first numba call is reported separately
because it includes compilation (cached on disk afterwards).
"""

import argparse
import time

import numpy as np

from monitorkit import _kernels
from monitorkit.automata import ACCEPT, monitor_to_afa
from monitorkit.gapbench import GapParams, build_gap_monitor, random_traces
from monitorkit.transform import verdict_dfa


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--traces", type=int, default=20000)
    ap.add_argument("--len", type=int, default=40)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    m = build_gap_monitor("U", GapParams(1))
    afa = monitor_to_afa(m, ACCEPT)
    dfa = verdict_dfa(m, ACCEPT)
    traces = random_traces(args.traces, args.len, args.seed)
    index = {a: i for i, a in enumerate(m.alphabet)}
    arr, lens = _kernels.encode_traces(traces, index)
    tables = afa.compile()
    print(f"monitorkit kernels  backend={_kernels.BACKEND}  traces={args.traces}  max_len={args.len}  "
          f"afa_states={afa.n_states}  dfa_states={dfa.n_states}")

    backends = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])
    results = {}
    for b in backends:
        if b == "numba":
            t = time.perf_counter()
            _kernels.afa_eval(tables, arr[:2], lens[:2], b)
            _kernels.dfa_first_accept(dfa.trans, dfa.accepting, dfa.initial, arr[:2], lens[:2], b)
            print(f"  numba warm-up (compile or cache load): {time.perf_counter() - t:.3f}s")
        ta, ra = best_of(lambda: _kernels.afa_eval(tables, arr, lens, b), args.repeat)
        td, rd = best_of(lambda: _kernels.dfa_first_accept(dfa.trans, dfa.accepting, dfa.initial, arr, lens, b),
                         args.repeat)
        results[b] = (ra, rd)
        print(f"  {b:6s} afa_eval {ta * 1e3:9.2f} ms   dfa_first_accept {td * 1e3:9.2f} ms")
    if len(results) == 2:
        (a1, d1), (a2, d2) = results.values()
        same = np.array_equal(a1, a2) and np.array_equal(d1, d2)
        print(f"  backends agree: {same}")
        # the DFA is extension-closed: first accept >= 0 iff the AFA accepts the whole trace
        print(f"  afa/dfa agree:  {np.array_equal(a1, d1 >= 0)}")


if __name__ == "__main__":
    main()
