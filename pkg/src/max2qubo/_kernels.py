"""Numba kernels for single-flip moves on an upper-triangular QUBO.

All kernels work on the local field ``h[i] = Q[i,i] + sum_j W[i,j] x_j`` where
``W`` is the symmetrised off-diagonal part held in CSR form. Flipping bit i
changes the objective by ``h[i]`` if ``x[i] == 0`` and ``-h[i]`` otherwise.
"""
import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def local_fields(indptr, indices, data, diag, x):
    n = diag.shape[0]
    h = diag.copy()
    for i in range(n):
        if x[i]:
            for p in range(indptr[i], indptr[i + 1]):
                h[indices[p]] += data[p]
    return h


@njit(cache=True, nogil=True)
def _flip(indptr, indices, data, x, h, i):
    if x[i]:
        x[i] = 0
        for p in range(indptr[i], indptr[i + 1]):
            h[indices[p]] -= data[p]
    else:
        x[i] = 1
        for p in range(indptr[i], indptr[i + 1]):
            h[indices[p]] += data[p]


@njit(cache=True, nogil=True)
def flip_delta(indptr, indices, data, diag, x, i):
    f = diag[i]
    for p in range(indptr[i], indptr[i + 1]):
        if x[indices[p]]:
            f += data[p]
    return -f if x[i] else f


@njit(cache=True, nogil=True)
def anneal_sweeps(indptr, indices, data, x, h, energy, best_energy, best_x,
                  temps, perms, uniforms, stop_at, imp_sweep, imp_energy):
    """Run ``len(temps)`` Metropolis sweeps in place.

    Improvements of ``best_energy`` are logged to ``imp_sweep``/``imp_energy``,
    which must hold ``len(temps) * n`` entries.
    Returns (energy, best_energy, n_improvements, sweeps_done).
    """
    n = x.shape[0]
    n_imp = 0
    for s in range(temps.shape[0]):
        t = temps[s]
        for k in range(n):
            i = perms[s, k]
            d = -h[i] if x[i] else h[i]
            if d <= 0.0 or uniforms[s, k] < math.exp(-d / t):
                _flip(indptr, indices, data, x, h, i)
                energy += d
                if energy < best_energy:
                    best_energy = energy
                    best_x[:] = x
                    imp_sweep[n_imp] = s
                    imp_energy[n_imp] = energy
                    n_imp += 1
        if best_energy <= stop_at:
            return energy, best_energy, n_imp, s + 1
    return energy, best_energy, n_imp, temps.shape[0]


@njit(cache=True, nogil=True)
def descend(indptr, indices, data, x, h, energy, max_steps, traj):
    """Steepest single-flip descent, lowest index wins ties.

    Stops at a local minimum or after ``max_steps`` flips. Returns
    (energy, steps, at_local_min); ``traj[:steps]`` holds the energies.
    """
    n = x.shape[0]
    steps = 0
    while steps < max_steps:
        best_i = -1
        best_d = 0.0
        for i in range(n):
            d = -h[i] if x[i] else h[i]
            if d < best_d:
                best_d = d
                best_i = i
        if best_i < 0:
            return energy, steps, True
        _flip(indptr, indices, data, x, h, best_i)
        energy += best_d
        traj[steps] = energy
        steps += 1
    return energy, steps, False


@njit(cache=True, nogil=True)
def gray_search(indptr, indices, data, diag, offset):
    """Exhaustive minimum by Gray-code enumeration.

    Variable i is bit ``n-1-i`` of the code, so the smallest code among tied
    minima is the lexicographically smallest assignment.
    Returns (best_energy, best_code).
    """
    n = diag.shape[0]
    sign = np.ones(n)  # +1 while x_i == 0, -1 once set
    h = diag.copy()
    energy = offset
    best = energy
    best_code = 0
    code = 0
    total = 1 << n
    for k in range(1, total):
        b = 0
        kk = k
        while (kk & 1) == 0:
            kk >>= 1
            b += 1
        i = n - 1 - b
        s = sign[i]
        energy += s * h[i]
        sign[i] = -s
        for p in range(indptr[i], indptr[i + 1]):
            h[indices[p]] += s * data[p]
        code ^= 1 << b
        if energy <= best:
            if energy < best or code < best_code:
                best = energy
                best_code = code
    return best, best_code
