"""Batch trace-evaluation kernels.

Two hot loops dominate the cross-validation suites: running many encoded traces
through a DFA table, and backward evaluation of an alternating automaton over
many traces.  Both have a numba ``@njit`` implementation and a vectorised numpy
fallback.  Set ``MONITORKIT_BACKEND=numpy`` to force the fallback (numba is used
by default when importable).
"""

from __future__ import annotations

import os

import numpy as np

_requested = os.environ.get("MONITORKIT_BACKEND", "numba").strip().lower()

try:  # pragma: no cover - exercised implicitly
    if _requested == "numpy":
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"


def encode_traces(traces, index) -> tuple[np.ndarray, np.ndarray]:
    """Pack traces into a (m, L) int32 array padded with -1, plus lengths."""
    lengths = np.fromiter((len(t) for t in traces), dtype=np.int64, count=len(traces))
    width = int(lengths.max()) if len(traces) else 0
    out = np.full((len(traces), max(width, 1)), -1, dtype=np.int32)
    for i, t in enumerate(traces):
        if t:
            out[i, : len(t)] = [index[a] for a in t]
    return out, lengths


# ---------------------------------------------------------------------------
# DFA: first accepting prefix length per trace (-1 if none)


def _dfa_first_accept_numpy(trans, accepting, init, traces, lengths):
    m = traces.shape[0]
    state = np.full(m, init, dtype=np.int64)
    first = np.where(accepting[state], 0, -1).astype(np.int64)
    for p in range(traces.shape[1]):
        live = p < lengths
        if not live.any():
            break
        state[live] = trans[state[live], traces[live, p]]
        hit = live & (first < 0) & accepting[state]
        first[hit] = p + 1
    return first


# ---------------------------------------------------------------------------
# AFA: backward evaluation with DNF transition formulas in CSR form
#
# cube_atoms[cube_ptr[c]:cube_ptr[c+1]] are the atoms of cube c; the cubes of
# atom q under action a are atom_cubes[a, q]:atom_cubes[a, q+1].  Empty cubes are
# TRUE, atoms with no cubes are FALSE.


def _afa_eval_numpy(cube_atoms, cube_ptr, atom_cubes, accepting, init_atoms, init_ptr, traces, lengths):
    m, width = traces.shape
    n = accepting.shape[0]
    k = atom_cubes.shape[0]
    vals = np.tile(accepting, (m, 1))
    # Extended columns: n is constant TRUE, n+1 constant FALSE.
    true_col, false_col = n, n + 1
    flat, starts = [], []
    owner_starts = []
    for a in range(k):
        a_flat, a_starts, a_owner = [], [], []
        for q in range(n):
            a_owner.append(len(a_starts))
            lo, hi = atom_cubes[a, q], atom_cubes[a, q + 1]
            if lo == hi:
                a_starts.append(len(a_flat))
                a_flat.append(false_col)
            for c in range(lo, hi):
                a_starts.append(len(a_flat))
                atoms = cube_atoms[cube_ptr[c] : cube_ptr[c + 1]]
                a_flat.extend(atoms.tolist() if len(atoms) else [true_col])
        flat.append(np.asarray(a_flat, dtype=np.int64))
        starts.append(np.asarray(a_starts, dtype=np.int64))
        owner_starts.append(np.asarray(a_owner, dtype=np.int64))
    # Right-align: column p of trace i is real iff p >= width - len_i.
    aligned = np.full_like(traces, -1)
    for i in range(m):
        L = lengths[i]
        if L:
            aligned[i, width - L :] = traces[i, :L]
    ext = np.empty((m, n + 2), dtype=bool)
    for p in range(width - 1, -1, -1):
        col = aligned[:, p]
        for a in range(k):
            rows = np.nonzero(col == a)[0]
            if rows.size == 0:
                continue
            ext[: rows.size, :n] = vals[rows]
            ext[: rows.size, n] = True
            ext[: rows.size, n + 1] = False
            sub = ext[: rows.size]
            cubes = np.logical_and.reduceat(sub[:, flat[a]], starts[a], axis=1)
            vals[rows] = np.logical_or.reduceat(cubes, owner_starts[a], axis=1)
    out = np.zeros(m, dtype=bool)
    for c in range(len(init_ptr) - 1):
        atoms = init_atoms[init_ptr[c] : init_ptr[c + 1]]
        out |= vals[:, atoms].all(axis=1) if len(atoms) else True
    return out


if HAVE_NUMBA:

    @njit(cache=True)
    def _dfa_first_accept_numba(trans, accepting, init, traces, lengths):  # pragma: no cover
        m = traces.shape[0]
        first = np.full(m, -1, dtype=np.int64)
        for i in range(m):
            s = init
            if accepting[s]:
                first[i] = 0
                continue
            for p in range(lengths[i]):
                s = trans[s, traces[i, p]]
                if accepting[s]:
                    first[i] = p + 1
                    break
        return first

    @njit(cache=True)
    def _afa_eval_numba(cube_atoms, cube_ptr, atom_cubes, accepting, init_atoms, init_ptr, traces, lengths):  # pragma: no cover
        m = traces.shape[0]
        n = accepting.shape[0]
        out = np.zeros(m, dtype=np.bool_)
        cur = np.empty(n, dtype=np.bool_)
        nxt = np.empty(n, dtype=np.bool_)
        for i in range(m):
            for q in range(n):
                cur[q] = accepting[q]
            for p in range(lengths[i] - 1, -1, -1):
                a = traces[i, p]
                for q in range(n):
                    v = False
                    for c in range(atom_cubes[a, q], atom_cubes[a, q + 1]):
                        ok = True
                        for j in range(cube_ptr[c], cube_ptr[c + 1]):
                            if not cur[cube_atoms[j]]:
                                ok = False
                                break
                        if ok:
                            v = True
                            break
                    nxt[q] = v
                for q in range(n):
                    cur[q] = nxt[q]
            res = False
            for c in range(init_ptr.shape[0] - 1):
                ok = True
                for j in range(init_ptr[c], init_ptr[c + 1]):
                    if not cur[init_atoms[j]]:
                        ok = False
                        break
                if ok:
                    res = True
                    break
            out[i] = res
        return out


def dfa_first_accept(trans, accepting, init, traces, lengths, backend: str | None = None):
    backend = backend or BACKEND
    args = (
        np.ascontiguousarray(trans, dtype=np.int64),
        np.ascontiguousarray(accepting, dtype=np.bool_),
        int(init),
        np.ascontiguousarray(traces, dtype=np.int64),
        np.ascontiguousarray(lengths, dtype=np.int64),
    )
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is unavailable")
        return _dfa_first_accept_numba(*args)
    return _dfa_first_accept_numpy(*args)


def afa_eval(tables, traces, lengths, backend: str | None = None):
    """Evaluate a compiled AFA (see ``AFA.compile``) on encoded traces."""
    backend = backend or BACKEND
    cube_atoms, cube_ptr, atom_cubes, accepting, init_atoms, init_ptr = tables
    args = (
        cube_atoms,
        cube_ptr,
        atom_cubes,
        accepting,
        init_atoms,
        init_ptr,
        np.ascontiguousarray(traces, dtype=np.int64),
        np.ascontiguousarray(lengths, dtype=np.int64),
    )
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is unavailable")
        return _afa_eval_numba(*args)
    return _afa_eval_numpy(*args)
