"""Numba-compiled inner loops for the fixed-step Euler-Maruyama engines.

Both kernels consume pre-generated per-path noise chunks (path-major layout)
so that the RNG stream discipline lives entirely in Python; the compiled code
is pure arithmetic and bit-reproducible.
"""
from __future__ import annotations

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def planar_chunk(
    x, y, sgn_int, noise_x, noise_y,
    a_L, a_R, b_L, b_R, c_L, c_R, d_L, d_R,
    dt, sx, sy, use_y_noise, acc_sgn,
):
    """Advance each path by noise_x.shape[1] EM steps; drift uses the pre-step
    state with phi(0) = psi(0) = 0 and sgn(0) = 0."""
    P, k = noise_x.shape
    for i in range(P):
        xi = x[i]
        yi = y[i]
        si = sgn_int[i]
        for j in range(k):
            if xi < 0.0:
                phi = a_L + c_L * xi
                psi = b_L + d_L * xi
                sg = -1.0
            elif xi > 0.0:
                phi = -a_R + c_R * xi
                psi = b_R + d_R * xi
                sg = 1.0
            else:
                phi = 0.0
                psi = 0.0
                sg = 0.0
            yi += psi * dt
            if use_y_noise:
                yi += sy * noise_y[i, j]
            if acc_sgn:
                si += sg * dt
            xi += phi * dt + sx * noise_x[i, j]
        x[i] = xi
        y[i] = yi
        sgn_int[i] = si


@numba.njit(cache=True, nogil=True)
def relay_chunk(
    X, noise, A, B, dt, seps, t0,
    cur, cand, cand_run, cand_start, n_acc, times, max_events, debounce,
):
    """EM steps of dx = (A x - B sgn(x_1)) dt + sqrt(eps) B dW per path (X is
    (P, 3), noise (P, k)), with the debounced sign-change detector for the
    third component running online.  times[i, :n_acc[i]] are accepted change
    times (candidate starts)."""
    P, k = noise.shape
    for i in range(P):
        x0 = X[i, 0]
        x1 = X[i, 1]
        x2 = X[i, 2]
        cu = cur[i]
        ca = cand[i]
        run = cand_run[i]
        start = cand_start[i]
        acc = n_acc[i]
        for j in range(k):
            t = t0 + (j + 1) * dt
            sg = 0.0
            if x0 > 0.0:
                sg = 1.0
            elif x0 < 0.0:
                sg = -1.0
            w = noise[i, j]
            n0 = x0 + (A[0, 0] * x0 + A[0, 1] * x1 + A[0, 2] * x2 - B[0] * sg) * dt + seps * B[0] * w
            n1 = x1 + (A[1, 0] * x0 + A[1, 1] * x1 + A[1, 2] * x2 - B[1] * sg) * dt + seps * B[1] * w
            n2 = x2 + (A[2, 0] * x0 + A[2, 1] * x1 + A[2, 2] * x2 - B[2] * sg) * dt + seps * B[2] * w
            x0, x1, x2 = n0, n1, n2
            s = 0
            if x2 > 0.0:
                s = 1
            elif x2 < 0.0:
                s = -1
            if cu == 0:
                if s != 0:
                    cu = s
                run = 0
            elif s == cu or s == 0:
                run = 0
            else:
                if run == 0 or ca != s:
                    ca = s
                    start = t
                    run = 1
                else:
                    run += 1
                if run >= debounce:
                    cu = s
                    run = 0
                    if acc < max_events:
                        times[i, acc] = start
                    acc += 1
        X[i, 0] = x0
        X[i, 1] = x1
        X[i, 2] = x2
        cur[i] = cu
        cand[i] = ca
        cand_run[i] = run
        cand_start[i] = start
        n_acc[i] = acc


@numba.njit(cache=True, nogil=True)
def debounce_series(values, dt, debounce, times, t0=0.0):
    """Offline debouncer over a single recorded series; values[0] is at t0.

    Returns the number of accepted sign changes written into times.  Semantics
    match relay_chunk: a change is accepted once the new sign has persisted for
    debounce consecutive samples, and is stamped with the candidate start time.
    """
    n = values.shape[0]
    cur = 0
    if values[0] > 0.0:
        cur = 1
    elif values[0] < 0.0:
        cur = -1
    cand = 0
    cand_run = 0
    cand_start = 0.0
    n_acc = 0
    for j in range(1, n):
        t = t0 + j * dt
        s = 0
        if values[j] > 0.0:
            s = 1
        elif values[j] < 0.0:
            s = -1
        if cur == 0:
            if s != 0:
                cur = s
            cand_run = 0
        elif s == cur or s == 0:
            cand_run = 0
        else:
            if cand_run == 0 or cand != s:
                cand = s
                cand_start = t
                cand_run = 1
            else:
                cand_run += 1
            if cand_run >= debounce:
                cur = s
                cand_run = 0
                if n_acc < times.shape[0]:
                    times[n_acc] = cand_start
                n_acc += 1
    return n_acc
