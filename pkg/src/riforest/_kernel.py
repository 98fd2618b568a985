"""Compiled tree growth.

``grow_tree`` mirrors the reference builder in ``riforest.builder`` step by
step: it consumes the same generator in the same order and performs the same
floating-point operations, so both produce identical trees. The tree comes back
as flat arrays in pre-order; ``riforest.builder`` turns them into nodes.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

# split-kind codes shared with riforest.builder
KIND_EXTERNAL = -1
KIND_VALLEY = 0
KIND_RANDOM = 1
KIND_BLANK = 2
KIND_MIDPOINT = 3


@njit(cache=True)
def _block_size(need, d, keep):
    if keep < 1.0:
        p_accept = -math.expm1(d * math.log1p(-keep))
    else:
        p_accept = 1.0
    return int(math.ceil((need + 2.0 * math.sqrt(need)) / p_accept))


@njit(cache=True)
def _conditional_row(d, keep, scale, rng, out):
    log_pmf = np.empty(d)
    for i in range(1, d + 1):
        log_pmf[i - 1] = (
            math.lgamma(d + 1) - math.lgamma(i + 1) - math.lgamma(d - i + 1)
            + i * math.log(keep)
            + (d - i) * math.log1p(-keep)
        )
    top = log_pmf.max()
    cdf = np.empty(d)
    acc = 0.0
    for i in range(d):
        acc += math.exp(log_pmf[i] - top)
        cdf[i] = acc
    for i in range(d):
        cdf[i] = cdf[i] / acc
    u = rng.random()
    k = 0
    while k < d and cdf[k] <= u:
        k += 1
    k = min(k + 1, d)
    perm = np.arange(d)
    for i in range(k):
        j = rng.integers(i, d)
        tmp = perm[i]
        perm[i] = perm[j]
        perm[j] = tmp
    for j in range(d):
        out[j] = 0.0
    for i in range(k):
        sign = 1.0 if rng.random() < 0.5 else -1.0
        out[perm[i]] = sign * scale * (1.0 - rng.random())


@njit(cache=True)
def _random_coefficients(d, count, keep, scale, max_redraws, rng, out):
    filled = 0
    budget = max_redraws * count
    while filled < count and budget > 0:
        need = count - filled
        b = min(budget, _block_size(need, d, keep))
        budget -= b
        u = np.empty((b, d))
        for i in range(b):
            for j in range(d):
                u[i, j] = rng.random()
        mag = np.empty((b, d))
        for i in range(b):
            for j in range(d):
                mag[i, j] = 1.0 - rng.random()
        for i in range(b):
            if filled == count:
                break
            hit = False
            for j in range(d):
                if u[i, j] < keep:
                    hit = True
                    break
            if not hit:
                continue
            for j in range(d):
                if u[i, j] < keep:
                    v = scale * mag[i, j]
                    if u[i, j] < 0.5 * keep:
                        v = v * -1.0
                    out[filled, j] = v
                else:
                    out[filled, j] = 0.0
            filled += 1
    while filled < count:
        _conditional_row(d, keep, scale, rng, out[filled])
        filled += 1


@njit(cache=True)
def _fill_counts(proj, cnt, col, lo, hi, L, counts_row):
    for b in range(L):
        counts_row[b] = 0
    width = hi - lo
    for r in range(cnt):
        b = int((proj[r, col] - lo) * L / width)
        if b > L - 1:
            b = L - 1
        counts_row[b] += 1


@njit(cache=True)
def _entropy(counts_row, n, L):
    acc = 0.0
    for b in range(L):
        c = counts_row[b]
        if c > 0:
            acc += c * math.log(c)
    return (math.log(n) - acc / n) / math.log(L)


@njit(cache=True)
def _ratio_greater(num1, den1, num2, den2):
    """num1/den1 > num2/den2 exactly, without forming num * den products."""
    q1 = num1 // den1
    q2 = num2 // den2
    if q1 != q2:
        return q1 > q2
    return (num1 - q1 * den1) * den2 > (num2 - q2 * den2) * den1


@njit(cache=True)
def _valley(counts_row, L):
    """Returns (t_star, n_left) of the valley-emphasis threshold."""
    n = 0
    s_total = 0
    for j in range(L):
        n += counts_row[j]
        s_total += (j + 1) * counts_row[j]
    best_t = -1
    best_num = 0
    best_den = 1
    best_left = 0
    n_left = 0
    s_left = 0
    for t in range(1, L):
        n_left += counts_row[t - 1]
        s_left += t * counts_row[t - 1]
        if t == 1:
            continue
        n_right = n - n_left
        if n_left == 0 or n_right == 0:
            continue
        s_right = s_total - s_left
        num = (n - counts_row[t - 1]) * (s_left * s_left * n_right + s_right * s_right * n_left)
        den = n_left * n_right
        if best_t < 0 or _ratio_greater(num, den, best_num, best_den):
            best_t = t
            best_num = num
            best_den = den
            best_left = n_left
    return best_t, best_left


@njit(cache=True)
def grow_tree(
    x, rng, limit, L, alpha, tau, use_gate, use_pl, strategy, keep, scale, max_redraws
):
    """Grow one tree on the standardized subsample ``x``.

    Returns ``(n_nodes, kind, left, right, q, pl, size, cand, coefs)``. Node i
    is internal when ``kind[i] >= 0``; its direction is unit vector
    ``cand[i]`` when ``cand[i] < d`` and row ``cand[i] - d`` of ``coefs``
    otherwise.
    """
    m, d = x.shape
    ncand = d + tau
    cap = 2 * m + 1

    kind = np.full(cap, KIND_EXTERNAL, np.int8)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    q = np.zeros(cap)
    pl = np.ones(cap)
    size = np.zeros(cap, np.int64)
    cand = np.full(cap, -1, np.int64)
    coefs = np.zeros((m, d))
    n_coefs = 0

    perm = np.arange(m)
    buf = np.empty(m, np.int64)
    proj = np.empty((m, ncand))
    coef = np.zeros((max(tau, 1), d))
    counts = np.zeros((ncand, L), np.int64)
    lo = np.empty(ncand)
    hi = np.empty(ncand)
    ent = np.empty(ncand)
    usable = np.empty(ncand, np.int64)
    passing = np.empty(ncand, np.int64)
    hist = np.zeros(L, np.int64)

    st_start = np.empty(cap, np.int64)
    st_end = np.empty(cap, np.int64)
    st_depth = np.empty(cap, np.int64)
    st_parent = np.empty(cap, np.int64)
    st_side = np.empty(cap, np.int64)
    sp = 0
    st_start[0] = 0
    st_end[0] = m
    st_depth[0] = 0
    st_parent[0] = -1
    st_side[0] = 0
    sp = 1
    nn = 0

    while sp > 0:
        sp -= 1
        s = st_start[sp]
        e = st_end[sp]
        depth = st_depth[sp]
        parent = st_parent[sp]
        node = nn
        nn += 1
        if parent >= 0:
            if st_side[sp] == 0:
                left[parent] = node
            else:
                right[parent] = node
        cnt = e - s
        size[node] = cnt
        if depth >= limit or cnt <= 1:
            continue

        if tau > 0:
            _random_coefficients(d, tau, keep, scale, max_redraws, rng, coef)
        for r in range(cnt):
            row = perm[s + r]
            for c in range(d):
                proj[r, c] = x[row, c]
            for t in range(tau):
                acc = x[row, 0] * coef[t, 0]
                for j in range(1, d):
                    acc += x[row, j] * coef[t, j]
                proj[r, d + t] = acc
        n_usable = 0
        for c in range(ncand):
            a = proj[0, c]
            b = proj[0, c]
            for r in range(1, cnt):
                v = proj[r, c]
                if v < a:
                    a = v
                if v > b:
                    b = v
            lo[c] = a
            hi[c] = b
            if b > a:
                usable[n_usable] = c
                n_usable += 1
        if n_usable == 0:
            continue

        split = strategy
        have_hist = False
        if use_gate:
            n_pass = 0
            for j in range(n_usable):
                c = usable[j]
                _fill_counts(proj, cnt, c, lo[c], hi[c], L, counts[j])
                ent[j] = _entropy(counts[j], cnt, L)
                if ent[j] < alpha:
                    passing[n_pass] = j
                    n_pass += 1
            if n_pass > 0:
                j = passing[rng.integers(0, n_pass)]
                k = usable[j]
                hist[:] = counts[j]
                have_hist = True
            else:
                k = usable[rng.integers(0, n_usable)]
                split = KIND_MIDPOINT
        else:
            k = usable[rng.integers(0, n_usable)]

        p_inc = 1.0
        if split == KIND_MIDPOINT:
            qk = (lo[k] + hi[k]) / 2.0
        elif split == KIND_VALLEY:
            if not have_hist:
                _fill_counts(proj, cnt, k, lo[k], hi[k], L, hist)
            t_star, n_l = _valley(hist, L)
            qk = lo[k] + t_star * (hi[k] - lo[k]) / L
            p_inc = 1.0 - abs(n_l - (cnt - n_l)) / cnt
        elif split == KIND_RANDOM:
            qk = rng.uniform(lo[k], hi[k])
        else:
            vals = np.sort(proj[:cnt, k])
            best_gap = -1.0
            bi = 1
            for i in range(1, cnt):
                g = vals[i] - vals[i - 1]
                if g > best_gap:
                    best_gap = g
                    bi = i
            qk = (vals[bi - 1] + vals[bi]) / 2.0
        if not use_pl:
            p_inc = 1.0

        n_left = 0
        for r in range(cnt):
            if proj[r, k] <= qk:
                n_left += 1
        if n_left == 0 or n_left == cnt:
            continue

        # stable partition: left rows first, both sides keep their order
        a = 0
        b = n_left
        for r in range(cnt):
            row = perm[s + r]
            if proj[r, k] <= qk:
                buf[a] = row
                a += 1
            else:
                buf[b] = row
                b += 1
        for r in range(cnt):
            perm[s + r] = buf[r]

        kind[node] = split
        q[node] = qk
        pl[node] = p_inc
        if k < d:
            cand[node] = k
        else:
            coefs[n_coefs] = coef[k - d]
            cand[node] = d + n_coefs
            n_coefs += 1

        # pre-order: push right first so the left subtree is grown next
        st_start[sp] = s + n_left
        st_end[sp] = e
        st_depth[sp] = depth + 1
        st_parent[sp] = node
        st_side[sp] = 1
        sp += 1
        st_start[sp] = s
        st_end[sp] = s + n_left
        st_depth[sp] = depth + 1
        st_parent[sp] = node
        st_side[sp] = 0
        sp += 1

    return nn, kind, left, right, q, pl, size, cand, coefs[:n_coefs]
