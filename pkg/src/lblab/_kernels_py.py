"""Pure-Python stepping kernels.

These loops are the fallback twin of the compiled extension
``lblab._kernels_cy``.  Both implementations perform the same floating-point
operations in the same order, so their outputs are bit-identical; tests
assert that.  Keep every arithmetic statement in sync with the .pyx file.

All kernels take the tabulated model: ``mu[t]`` (balanced per-PE load),
``iota[x]`` (imbalance increment at offset ``x`` since the last rebalance,
index 0 unused), the clamp bound ``imax = P - 1``, and the rebalance cost
``C``.
"""
from __future__ import annotations

import numpy as np

# criterion codes shared with the compiled kernel
KIND_PERIODIC = 0
KIND_MARQUEZ = 1
KIND_PROCASSINI = 2
KIND_MENON = 3
KIND_ZHAI = 4
KIND_PROPOSED = 5

_MAX_SUBSET_GAMMA = 30


def scenario_total(mu, iota, imax, C, mask):
    """Total parallel time of one rebalancing scenario (no trace)."""
    mu_l = mu.tolist()
    iota_l = iota.tolist()
    gamma = len(mu_l)
    T = 0.0
    iraw = 0.0
    last_lb = 0
    for t in range(gamma):
        if mask[t]:
            T += C
            last_lb = t
            iraw = 0.0
        elif t > 0:
            iraw += iota_l[t - last_lb]
        iobs = iraw
        if iobs < 0.0:
            iobs = 0.0
        elif iobs > imax:
            iobs = imax
        T += (1.0 + iobs) * mu_l[t]
    return T


def scenario_trace(mu, iota, imax, C, mask):
    """Simulate one scenario, returning the total and the full per-iteration trace.

    Returns ``(total, m, u, i_obs, u_cum, t_acc)`` where the arrays have one
    row per iteration.  ``u_cum`` resets to zero on rebalance rows; ``t_acc``
    is the running total including rebalance costs.
    """
    mu_l = mu.tolist()
    iota_l = iota.tolist()
    gamma = len(mu_l)
    m_out = [0.0] * gamma
    u_out = [0.0] * gamma
    i_out = [0.0] * gamma
    ucum_out = [0.0] * gamma
    tacc_out = [0.0] * gamma
    T = 0.0
    U = 0.0
    iraw = 0.0
    last_lb = 0
    for t in range(gamma):
        if mask[t]:
            T += C
            last_lb = t
            iraw = 0.0
            U = 0.0
        elif t > 0:
            iraw += iota_l[t - last_lb]
        iobs = iraw
        if iobs < 0.0:
            iobs = 0.0
        elif iobs > imax:
            iobs = imax
        mval = (1.0 + iobs) * mu_l[t]
        uval = mval - mu_l[t]
        U += uval
        T += mval
        m_out[t] = mval
        u_out[t] = uval
        i_out[t] = iobs
        ucum_out[t] = U
        tacc_out[t] = T
    return (
        T,
        np.asarray(m_out),
        np.asarray(u_out),
        np.asarray(i_out),
        np.asarray(ucum_out),
        np.asarray(tacc_out),
    )


def _median3(a, b, c):
    lo = a if a < b else b
    hi = b if a < b else a
    if c < lo:
        return lo
    if c < hi:
        return c
    return hi


def criterion_run(mu, iota, imax, C, kind, fparam, iparam):
    """Closed-loop run: evaluate one decision rule before every iteration.

    The rule sees only completed rows (no lookahead); when it fires at
    iteration ``t`` the rebalance cost is paid at ``t`` and the imbalance
    restarts.  Returns ``(lb_iterations, total, m, u, i_obs, u_cum, t_acc)``.

    ``kind`` is one of the ``KIND_*`` codes; ``fparam`` carries xi/rho and
    ``iparam`` carries T/phase_len for the rules that need them.
    """
    mu_l = mu.tolist()
    iota_l = iota.tolist()
    gamma = len(mu_l)
    m_out = [0.0] * gamma
    u_out = [0.0] * gamma
    i_out = [0.0] * gamma
    ucum_out = [0.0] * gamma
    tacc_out = [0.0] * gamma
    lb_iters: list[int] = []

    T = 0.0
    U = 0.0
    iraw = 0.0
    last_lb = 0
    prev_mu = 0.0
    prev_m = 0.0
    prev_u = 0.0
    prev_iobs = 0.0
    # Zhai running state: rows since last rebalance, ring of the last three
    # m values, the first-phase mean, and the running deviation sum D.
    # Median terms that complete before the phase mean is known are buffered
    # and drained in order once it is.
    zn = 0
    r0 = r1 = r2 = 0.0
    psum = 0.0
    tavg = 0.0
    tavg_ready = False
    pending: list[float] = []
    D = 0.0

    for t in range(gamma):
        fire = False
        if t >= 1:
            if kind == KIND_PERIODIC:
                fire = t % iparam == 0
            elif kind == KIND_MARQUEZ:
                fire = prev_iobs > fparam
            elif kind == KIND_PROCASSINI:
                fire = prev_mu + C < fparam * prev_m
            elif kind == KIND_MENON:
                fire = U >= C
            elif kind == KIND_ZHAI:
                fire = zn >= 3 and zn >= iparam and D >= C
            else:  # KIND_PROPOSED
                fire = float(t - 1 - last_lb) * prev_u - U >= C

        if fire:
            T += C
            last_lb = t
            iraw = 0.0
            U = 0.0
            lb_iters.append(t)
            if kind == KIND_ZHAI:
                zn = 0
                psum = 0.0
                tavg_ready = False
                pending.clear()
                D = 0.0
        elif t > 0:
            iraw += iota_l[t - last_lb]
        iobs = iraw
        if iobs < 0.0:
            iobs = 0.0
        elif iobs > imax:
            iobs = imax
        mval = (1.0 + iobs) * mu_l[t]
        uval = mval - mu_l[t]
        U += uval
        T += mval
        m_out[t] = mval
        u_out[t] = uval
        i_out[t] = iobs
        ucum_out[t] = U
        tacc_out[t] = T

        if kind == KIND_ZHAI:
            zn += 1
            r0 = r1
            r1 = r2
            r2 = mval
            if zn <= iparam:
                psum += mval
                if zn == iparam:
                    tavg = psum / float(iparam)
                    tavg_ready = True
                    for med in pending:
                        D += med - tavg
                    pending.clear()
            if zn >= 3:
                med = _median3(r0, r1, r2)
                if tavg_ready:
                    D += med - tavg
                else:
                    pending.append(med)
        prev_mu = mu_l[t]
        prev_m = mval
        prev_u = uval
        prev_iobs = iobs

    return (
        lb_iters,
        T,
        np.asarray(m_out),
        np.asarray(u_out),
        np.asarray(i_out),
        np.asarray(ucum_out),
        np.asarray(tacc_out),
    )


def subset_totals(mu, iota, imax, C):
    """Totals of every rebalancing scenario, exhaustively.

    Entry ``bits`` is the total of the scenario that rebalances at iteration
    ``i + 1`` for every set bit ``i``.  Only usable for small iteration
    counts; the caller enforces the cap.
    """
    mu_l = mu.tolist()
    iota_l = iota.tolist()
    gamma = len(mu_l)
    if gamma > _MAX_SUBSET_GAMMA:
        raise ValueError(f"subset enumeration needs gamma <= {_MAX_SUBSET_GAMMA}, got {gamma}")
    n = 1 << (gamma - 1)
    out = np.empty(n, dtype=np.float64)
    for bits in range(n):
        T = 0.0
        iraw = 0.0
        last_lb = 0
        for t in range(gamma):
            if t >= 1 and (bits >> (t - 1)) & 1:
                T += C
                last_lb = t
                iraw = 0.0
            elif t > 0:
                iraw += iota_l[t - last_lb]
            iobs = iraw
            if iobs < 0.0:
                iobs = 0.0
            elif iobs > imax:
                iobs = imax
            T += (1.0 + iobs) * mu_l[t]
        out[bits] = T
    return out
