"""Pure-Python random-scan Gibbs toggles (used when the extension is absent).

``run`` performs ``len(ii)`` single-dyad Gibbs updates on the dense signed
adjacency matrix ``Y`` in place. Before dyad ``(i, j)`` is resampled it is set
to 0, so every quantity below is evaluated on ``y_(-ij)``:

* ``base_pos[i, j]`` / ``base_neg[i, j]`` hold theta-weighted change
  statistics of all dyadic terms;
* ``iso_pos`` / ``iso_neg`` are the isolate coefficients;
* ``gwd_pos`` / ``gwd_neg`` are theta-weighted degree weight tables;
* ``t_pp``, ``t_pn``, ``t_np``, ``t_nn`` are theta-weighted edgewise
  shared-partner weight tables indexed by (focal sign, partner sign):
  ``t_pp`` = shared friends of positive edges, ``t_pn`` = shared enemies of
  positive edges, and so on.

``deg_*``, ``sf`` (shared friends) and ``se`` (shared enemies) are kept in
sync with ``Y``. The new state is ``+`` when ``u * total < e+``, ``-`` when
it falls in the next ``e-`` mass, and 0 otherwise. When ``record_every > 0``
the flat upper triangle of ``Y`` is copied into ``out`` after every
``record_every``-th toggle. Returns the number of toggles that changed
the dyad's state.
"""

import math

import numpy as np


def _apply(Y, deg, sh, i, j, sign, inc):
    deg[i] += inc
    deg[j] += inc
    hj = np.flatnonzero(Y[j] == sign)
    hj = hj[(hj != i) & (hj != j)]
    sh[i, hj] += inc
    sh[hj, i] += inc
    hi = np.flatnonzero(Y[i] == sign)
    hi = hi[(hi != i) & (hi != j)]
    sh[j, hi] += inc
    sh[hi, j] += inc


def _gain(table, counts):
    return float((table[counts + 1] - table[counts]).sum())


def run(Y, deg_pos, deg_neg, sf, se, base_pos, base_neg, iso_pos, iso_neg,
        gwd_pos, gwd_neg, t_pp, t_pn, t_np, t_nn, has_gwd, has_es,
        ii, jj, u, record_every, out):
    n = Y.shape[0]
    iu = np.triu_indices(n, 1)
    flips = 0
    for t in range(ii.shape[0]):
        i = int(ii[t])
        j = int(jj[t])
        old = int(Y[i, j])
        if old != 0:
            Y[i, j] = Y[j, i] = 0
            if old == 1:
                _apply(Y, deg_pos, sf, i, j, 1, -1)
            else:
                _apply(Y, deg_neg, se, i, j, -1, -1)

        lp = base_pos[i, j]
        ln = base_neg[i, j]
        if iso_pos != 0.0:
            lp -= iso_pos * (int(deg_pos[i] == 0) + int(deg_pos[j] == 0))
        if iso_neg != 0.0:
            ln -= iso_neg * (int(deg_neg[i] == 0) + int(deg_neg[j] == 0))
        if has_gwd:
            di, dj = deg_pos[i], deg_pos[j]
            lp += (gwd_pos[di + 1] - gwd_pos[di]) + (gwd_pos[dj + 1] - gwd_pos[dj])
            di, dj = deg_neg[i], deg_neg[j]
            ln += (gwd_neg[di + 1] - gwd_neg[di]) + (gwd_neg[dj + 1] - gwd_neg[dj])
        if has_es:
            lp += t_pp[sf[i, j]] + t_pn[se[i, j]]
            ln += t_np[sf[i, j]] + t_nn[se[i, j]]
            yi = Y[i]
            yj = Y[j]
            ipos, ineg = yi == 1, yi == -1
            jpos, jneg = yj == 1, yj == -1
            # i and j have zero self-entries and y_ij = 0, so they never match
            lp += _gain(t_pp, sf[i][ipos & jpos]) + _gain(t_np, sf[i][ineg & jpos])
            ln += _gain(t_pn, se[i][ipos & jneg]) + _gain(t_nn, se[i][ineg & jneg])
            lp += _gain(t_pp, sf[j][jpos & ipos]) + _gain(t_np, sf[j][jneg & ipos])
            ln += _gain(t_pn, se[j][jpos & ineg]) + _gain(t_nn, se[j][jneg & ineg])

        mx = max(lp, ln, 0.0)
        ep = math.exp(lp - mx)
        en = math.exp(ln - mx)
        e0 = math.exp(-mx)
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
            Y[i, j] = Y[j, i] = new
            if new == 1:
                _apply(Y, deg_pos, sf, i, j, 1, 1)
            else:
                _apply(Y, deg_neg, se, i, j, -1, 1)

        if record_every > 0 and (t + 1) % record_every == 0:
            out[(t + 1) // record_every - 1] = Y[iu]
    return flips
