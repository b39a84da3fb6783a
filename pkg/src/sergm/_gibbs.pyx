# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled random-scan Gibbs toggles for signed networks.

Mirrors ``sergm._fallback.run`` exactly; see that module for the meaning of
each argument.
"""

from libc.math cimport exp


cdef inline void _apply(signed char[:, ::1] Y, long long[::1] deg, long long[:, ::1] sh,
                        Py_ssize_t i, Py_ssize_t j, signed char sign, long long inc,
                        Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t h
    deg[i] += inc
    deg[j] += inc
    for h in range(n):
        if h == i or h == j:
            continue
        if Y[j, h] == sign:
            sh[i, h] += inc
            sh[h, i] += inc
        if Y[i, h] == sign:
            sh[j, h] += inc
            sh[h, j] += inc


def run(signed char[:, ::1] Y,
        long long[::1] deg_pos, long long[::1] deg_neg,
        long long[:, ::1] sf, long long[:, ::1] se,
        double[:, ::1] base_pos, double[:, ::1] base_neg,
        double iso_pos, double iso_neg,
        double[::1] gwd_pos, double[::1] gwd_neg,
        double[::1] t_pp, double[::1] t_pn, double[::1] t_np, double[::1] t_nn,
        bint has_gwd, bint has_es,
        long long[::1] ii, long long[::1] jj, double[::1] u,
        Py_ssize_t record_every, signed char[:, ::1] out):
    cdef Py_ssize_t n = Y.shape[0]
    cdef Py_ssize_t steps = ii.shape[0]
    cdef Py_ssize_t t, i, j, h, a, b, k, r
    cdef signed char old, new, yi, yj
    cdef double lp, ln, mx, ep, en, e0, x
    cdef long long di, dj
    cdef Py_ssize_t flips = 0
    with nogil:
        for t in range(steps):
            i = ii[t]
            j = jj[t]
            old = Y[i, j]
            if old != 0:
                Y[i, j] = 0
                Y[j, i] = 0
                if old == 1:
                    _apply(Y, deg_pos, sf, i, j, 1, -1, n)
                else:
                    _apply(Y, deg_neg, se, i, j, -1, -1, n)

            lp = base_pos[i, j]
            ln = base_neg[i, j]
            if iso_pos != 0.0:
                lp -= iso_pos * ((deg_pos[i] == 0) + (deg_pos[j] == 0))
            if iso_neg != 0.0:
                ln -= iso_neg * ((deg_neg[i] == 0) + (deg_neg[j] == 0))
            if has_gwd:
                di = deg_pos[i]
                dj = deg_pos[j]
                lp += (gwd_pos[di + 1] - gwd_pos[di]) + (gwd_pos[dj + 1] - gwd_pos[dj])
                di = deg_neg[i]
                dj = deg_neg[j]
                ln += (gwd_neg[di + 1] - gwd_neg[di]) + (gwd_neg[dj + 1] - gwd_neg[dj])
            if has_es:
                lp += t_pp[sf[i, j]] + t_pn[se[i, j]]
                ln += t_np[sf[i, j]] + t_nn[se[i, j]]
                for h in range(n):
                    if h == i or h == j:
                        continue
                    yi = Y[i, h]
                    yj = Y[j, h]
                    if yi == 0 or yj == 0:
                        continue
                    if yj == 1:
                        if yi == 1:
                            lp += t_pp[sf[i, h] + 1] - t_pp[sf[i, h]]
                        else:
                            lp += t_np[sf[i, h] + 1] - t_np[sf[i, h]]
                    else:
                        if yi == 1:
                            ln += t_pn[se[i, h] + 1] - t_pn[se[i, h]]
                        else:
                            ln += t_nn[se[i, h] + 1] - t_nn[se[i, h]]
                    if yi == 1:
                        if yj == 1:
                            lp += t_pp[sf[j, h] + 1] - t_pp[sf[j, h]]
                        else:
                            lp += t_np[sf[j, h] + 1] - t_np[sf[j, h]]
                    else:
                        if yj == 1:
                            ln += t_pn[se[j, h] + 1] - t_pn[se[j, h]]
                        else:
                            ln += t_nn[se[j, h] + 1] - t_nn[se[j, h]]

            mx = 0.0
            if lp > mx:
                mx = lp
            if ln > mx:
                mx = ln
            ep = exp(lp - mx)
            en = exp(ln - mx)
            e0 = exp(-mx)
            x = u[t] * (ep + en + e0)
            if x < ep:
                new = 1
            elif x < ep + en:
                new = -1
            else:
                new = 0

            if new != old:
                flips += 1
            if new != 0:
                Y[i, j] = new
                Y[j, i] = new
                if new == 1:
                    _apply(Y, deg_pos, sf, i, j, 1, 1, n)
                else:
                    _apply(Y, deg_neg, se, i, j, -1, 1, n)

            if record_every > 0 and (t + 1) % record_every == 0:
                r = (t + 1) // record_every - 1
                k = 0
                for a in range(n):
                    for b in range(a + 1, n):
                        out[r, k] = Y[a, b]
                        k += 1
    return flips
