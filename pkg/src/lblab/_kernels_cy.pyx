# cython: language_level=3, boundscheck=False, wraparound=False
# cython: initializedcheck=False, cdivision=True
"""Compiled stepping kernels.

Statement-for-statement transliteration of ``lblab._kernels_py``; both
implementations perform the same floating-point operations in the same
order, so their outputs are bit-identical (the build disables FP
contraction to keep it that way).  Keep every arithmetic statement in sync
with the pure module.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

KIND_PERIODIC = 0
KIND_MARQUEZ = 1
KIND_PROCASSINI = 2
KIND_MENON = 3
KIND_ZHAI = 4
KIND_PROPOSED = 5

_MAX_SUBSET_GAMMA = 30


def scenario_total(const double[:] mu, const double[:] iota, double imax,
                   double C, const unsigned char[:] mask):
    """Total parallel time of one rebalancing scenario (no trace)."""
    cdef Py_ssize_t gamma = mu.shape[0]
    cdef double T = 0.0
    cdef double iraw = 0.0
    cdef Py_ssize_t last_lb = 0
    cdef Py_ssize_t t
    cdef double iobs
    for t in range(gamma):
        if mask[t]:
            T += C
            last_lb = t
            iraw = 0.0
        elif t > 0:
            iraw += iota[t - last_lb]
        iobs = iraw
        if iobs < 0.0:
            iobs = 0.0
        elif iobs > imax:
            iobs = imax
        T += (1.0 + iobs) * mu[t]
    return T


def scenario_trace(const double[:] mu, const double[:] iota, double imax,
                   double C, const unsigned char[:] mask):
    """Simulate one scenario, returning the total and the full per-iteration trace.

    Returns ``(total, m, u, i_obs, u_cum, t_acc)`` where the arrays have one
    row per iteration.  ``u_cum`` resets to zero on rebalance rows; ``t_acc``
    is the running total including rebalance costs.
    """
    cdef Py_ssize_t gamma = mu.shape[0]
    m_arr = np.empty(gamma, dtype=np.float64)
    u_arr = np.empty(gamma, dtype=np.float64)
    i_arr = np.empty(gamma, dtype=np.float64)
    ucum_arr = np.empty(gamma, dtype=np.float64)
    tacc_arr = np.empty(gamma, dtype=np.float64)
    cdef double[:] m_out = m_arr
    cdef double[:] u_out = u_arr
    cdef double[:] i_out = i_arr
    cdef double[:] ucum_out = ucum_arr
    cdef double[:] tacc_out = tacc_arr
    cdef double T = 0.0
    cdef double U = 0.0
    cdef double iraw = 0.0
    cdef Py_ssize_t last_lb = 0
    cdef Py_ssize_t t
    cdef double iobs, mval, uval
    for t in range(gamma):
        if mask[t]:
            T += C
            last_lb = t
            iraw = 0.0
            U = 0.0
        elif t > 0:
            iraw += iota[t - last_lb]
        iobs = iraw
        if iobs < 0.0:
            iobs = 0.0
        elif iobs > imax:
            iobs = imax
        mval = (1.0 + iobs) * mu[t]
        uval = mval - mu[t]
        U += uval
        T += mval
        m_out[t] = mval
        u_out[t] = uval
        i_out[t] = iobs
        ucum_out[t] = U
        tacc_out[t] = T
    return T, m_arr, u_arr, i_arr, ucum_arr, tacc_arr


cdef inline double _median3(double a, double b, double c) noexcept:
    cdef double lo = a if a < b else b
    cdef double hi = b if a < b else a
    if c < lo:
        return lo
    if c < hi:
        return c
    return hi


def criterion_run(const double[:] mu, const double[:] iota, double imax,
                  double C, int kind, double fparam, long iparam):
    """Closed-loop run: evaluate one decision rule before every iteration.

    The rule sees only completed rows (no lookahead); when it fires at
    iteration ``t`` the rebalance cost is paid at ``t`` and the imbalance
    restarts.  Returns ``(lb_iterations, total, m, u, i_obs, u_cum, t_acc)``.

    ``kind`` is one of the ``KIND_*`` codes; ``fparam`` carries xi/rho and
    ``iparam`` carries T/phase_len for the rules that need them.
    """
    cdef Py_ssize_t gamma = mu.shape[0]
    m_arr = np.empty(gamma, dtype=np.float64)
    u_arr = np.empty(gamma, dtype=np.float64)
    i_arr = np.empty(gamma, dtype=np.float64)
    ucum_arr = np.empty(gamma, dtype=np.float64)
    tacc_arr = np.empty(gamma, dtype=np.float64)
    pend_arr = np.empty(gamma, dtype=np.float64)
    cdef double[:] m_out = m_arr
    cdef double[:] u_out = u_arr
    cdef double[:] i_out = i_arr
    cdef double[:] ucum_out = ucum_arr
    cdef double[:] tacc_out = tacc_arr
    cdef double[:] pending = pend_arr
    lb_iters = []

    cdef double T = 0.0
    cdef double U = 0.0
    cdef double iraw = 0.0
    cdef Py_ssize_t last_lb = 0
    cdef double prev_mu = 0.0
    cdef double prev_m = 0.0
    cdef double prev_u = 0.0
    cdef double prev_iobs = 0.0
    # Zhai running state; see the pure twin for the layout description
    cdef long zn = 0
    cdef double r0 = 0.0, r1 = 0.0, r2 = 0.0
    cdef double psum = 0.0
    cdef double tavg = 0.0
    cdef bint tavg_ready = False
    cdef Py_ssize_t n_pending = 0
    cdef double D = 0.0

    cdef Py_ssize_t t, k
    cdef bint fire
    cdef double iobs, mval, uval, med
    for t in range(gamma):
        fire = False
        if t >= 1:
            if kind == 0:  # periodic
                fire = t % iparam == 0
            elif kind == 1:  # marquez
                fire = prev_iobs > fparam
            elif kind == 2:  # procassini
                fire = prev_mu + C < fparam * prev_m
            elif kind == 3:  # menon
                fire = U >= C
            elif kind == 4:  # zhai
                fire = zn >= 3 and zn >= iparam and D >= C
            else:  # proposed
                fire = <double>(t - 1 - last_lb) * prev_u - U >= C

        if fire:
            T += C
            last_lb = t
            iraw = 0.0
            U = 0.0
            lb_iters.append(t)
            if kind == 4:
                zn = 0
                psum = 0.0
                tavg_ready = False
                n_pending = 0
                D = 0.0
        elif t > 0:
            iraw += iota[t - last_lb]
        iobs = iraw
        if iobs < 0.0:
            iobs = 0.0
        elif iobs > imax:
            iobs = imax
        mval = (1.0 + iobs) * mu[t]
        uval = mval - mu[t]
        U += uval
        T += mval
        m_out[t] = mval
        u_out[t] = uval
        i_out[t] = iobs
        ucum_out[t] = U
        tacc_out[t] = T

        if kind == 4:
            zn += 1
            r0 = r1
            r1 = r2
            r2 = mval
            if zn <= iparam:
                psum += mval
                if zn == iparam:
                    tavg = psum / <double>iparam
                    tavg_ready = True
                    for k in range(n_pending):
                        D += pending[k] - tavg
                    n_pending = 0
            if zn >= 3:
                med = _median3(r0, r1, r2)
                if tavg_ready:
                    D += med - tavg
                else:
                    pending[n_pending] = med
                    n_pending += 1
        prev_mu = mu[t]
        prev_m = mval
        prev_u = uval
        prev_iobs = iobs

    return lb_iters, T, m_arr, u_arr, i_arr, ucum_arr, tacc_arr


def subset_totals(const double[:] mu, const double[:] iota, double imax, double C):
    """Totals of every rebalancing scenario, exhaustively.

    Entry ``bits`` is the total of the scenario that rebalances at iteration
    ``i + 1`` for every set bit ``i``.  Only usable for small iteration
    counts; the caller enforces the cap.
    """
    cdef Py_ssize_t gamma = mu.shape[0]
    if gamma > _MAX_SUBSET_GAMMA:
        raise ValueError(
            f"subset enumeration needs gamma <= {_MAX_SUBSET_GAMMA}, got {gamma}"
        )
    cdef unsigned long long n = 1ULL << (gamma - 1)
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[:] out = out_arr
    cdef unsigned long long bits
    cdef Py_ssize_t t, last_lb
    cdef double T, iraw, iobs
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
                iraw += iota[t - last_lb]
            iobs = iraw
            if iobs < 0.0:
                iobs = 0.0
            elif iobs > imax:
                iobs = imax
            T += (1.0 + iobs) * mu[t]
        out[bits] = T
    return out_arr
