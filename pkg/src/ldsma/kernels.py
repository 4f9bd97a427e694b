"""Hot numeric kernels.

Everything here is written as explicit numpy loops so it compiles under
numba's nopython mode. With ``LDSMA_NUMBA=0`` the same functions run
interpreted (see :mod:`ldsma._jit`). Callers pass primitive arrays only:
``h`` is the (K, N) linear channel power gain matrix, ``noise`` the noise
power per subcarrier in watts, ``weights``/``group_id`` the per-user
priority weights and group labels, ``power`` the per-user budget in watts.
"""

import numpy as np

from ._jit import njit

UTILITY_TOL = 1e-12


@njit(cache=True)
def waterfill_flat(gains, total):
    """Exact ledge water-filling over parallel channels.

    Returns (powers, level) with sum(powers) == total whenever total > 0.
    Inactive channels (1/gain above the water level) get zero power.
    """
    m = gains.shape[0]
    powers = np.zeros(m)
    if m == 0 or total <= 0.0:
        return powers, 0.0
    inv = 1.0 / gains
    order = np.argsort(inv)
    csum = 0.0
    level = 0.0
    t_best = 0
    for t in range(1, m + 1):
        csum += inv[order[t - 1]]
        cand = (total + csum) / t
        if cand > inv[order[t - 1]]:
            t_best = t
            level = cand
    for i in range(t_best):
        powers[order[i]] = level - inv[order[i]]
    return powers, level


@njit(cache=True)
def row_waterfill(e_row, sel, total, p_out):
    """Water-fill over the entries of one user's row where sel != 0.

    Writes per-subcarrier powers into p_out (zero elsewhere) and returns
    the achieved rate sum(log2(1 + p*e)) over the selected set.
    """
    n_sub = e_row.shape[0]
    m = 0
    for n in range(n_sub):
        p_out[n] = 0.0
        if sel[n] != 0:
            m += 1
    if m == 0 or total <= 0.0:
        return 0.0
    idx = np.empty(m, np.int64)
    inv = np.empty(m, np.float64)
    i = 0
    for n in range(n_sub):
        if sel[n] != 0:
            idx[i] = n
            inv[i] = 1.0 / e_row[n]
            i += 1
    order = np.argsort(inv)
    csum = 0.0
    level = 0.0
    t_best = 0
    for t in range(1, m + 1):
        csum += inv[order[t - 1]]
        cand = (total + csum) / t
        if cand > inv[order[t - 1]]:
            t_best = t
            level = cand
    rate = 0.0
    for i in range(t_best):
        n = idx[order[i]]
        p = level - inv[order[i]]
        p_out[n] = p
        rate += np.log2(1.0 + p * e_row[n])
    return rate


@njit(cache=True)
def sort_desc_by_value(idx, values, m):
    """In-place insertion sort of idx[0:m] by (values[idx] desc, idx asc)."""
    for i in range(1, m):
        cur = idx[i]
        v = values[cur]
        j = i - 1
        while j >= 0 and (values[idx[j]] < v or (values[idx[j]] == v and idx[j] > cur)):
            idx[j + 1] = idx[j]
            j -= 1
        idx[j + 1] = cur


@njit(cache=True)
def mumrt_loop(h, noise, weights, group_id, power, n_groups, d_v, use_sa2, util_tol):
    """Iterative subcarrier-set and power allocation (spreading-aware).

    Per iteration every user greedily partitions its allocated and still
    available subcarriers into groups of d_v by effective gain, water-fills
    the per-group symbol powers against the current interference view, and
    the winning (user, group) by the selected criterion takes the group.
    Group mates lose the subcarriers; strictly-lower-weight users book the
    interference. Returns the assignment, the at-assignment power and
    interference snapshots, the iteration count and the SA2 traces.
    """
    n_users, n_sub = h.shape
    max_iter = (n_sub * n_groups) // d_v
    x = np.zeros((n_users, n_sub), np.uint8)
    avail = np.ones((n_users, n_sub), np.uint8)
    jmat = np.zeros((n_users, n_sub))
    p_snap = np.zeros((n_users, n_sub))
    obj_trace = np.zeros(max_iter)
    gain_trace = np.zeros(max_iter)

    alloc_idx = np.zeros(n_sub, np.int64)
    avail_idx = np.zeros(n_sub, np.int64)
    e = np.zeros(n_sub)
    sgain = np.zeros(n_sub)
    spow = np.zeros(n_sub)
    best_u = np.zeros(n_users)
    best_m = np.zeros(n_users, np.int64)
    delta = np.zeros(n_users)

    it = 0
    while it < max_iter:
        global_u = 0.0
        global_k = -1
        obj_a = 0.0
        for k in range(n_users):
            best_u[k] = 0.0
            best_m[k] = -1
            delta[k] = 0.0
            na = 0
            nu = 0
            for n in range(n_sub):
                if x[k, n] == 1:
                    alloc_idx[na] = n
                    na += 1
                elif avail[k, n] == 1:
                    avail_idx[nu] = n
                    nu += 1
                e[n] = h[k, n] / (noise + jmat[k, n])
            ga = na // d_v
            gu = nu // d_v
            m_tot = ga + gu
            if m_tot == 0:
                continue
            sort_desc_by_value(alloc_idx, e, na)
            sort_desc_by_value(avail_idx, e, nu)
            for m in range(ga):
                s = 0.0
                for t in range(d_v):
                    s += e[alloc_idx[m * d_v + t]]
                sgain[m] = s
            for m in range(gu):
                s = 0.0
                for t in range(d_v):
                    s += e[avail_idx[m * d_v + t]]
                sgain[ga + m] = s
            sp, level = waterfill_flat(sgain[:m_tot], power)
            rate_full = 0.0
            for m in range(m_tot):
                spow[m] = sp[m]
                rate_full += np.log2(1.0 + sp[m] * sgain[m])
            for m in range(gu):
                u = weights[k] * np.log2(1.0 + sp[ga + m] * sgain[ga + m])
                if u > best_u[k]:
                    best_u[k] = u
                    best_m[k] = m
            if best_u[k] > global_u:
                global_u = best_u[k]
                global_k = k
            if use_sa2:
                rate_alloc = 0.0
                if ga > 0:
                    spa, _ = waterfill_flat(sgain[:ga], power)
                    for m in range(ga):
                        rate_alloc += np.log2(1.0 + spa[m] * sgain[m])
                delta[k] = weights[k] * (rate_full - rate_alloc)
                obj_a += weights[k] * rate_alloc
        if global_k < 0 or global_u <= util_tol:
            break
        if use_sa2:
            kstar = -1
            dbest = -1.0
            for k in range(n_users):
                if best_m[k] >= 0 and best_u[k] > util_tol and delta[k] > dbest:
                    kstar = k
                    dbest = delta[k]
            obj_trace[it] = obj_a
            gain_trace[it] = dbest
        else:
            kstar = global_k

        # the scratch buffers were overwritten by later users; rebuild k*'s view
        na = 0
        nu = 0
        for n in range(n_sub):
            if x[kstar, n] == 1:
                alloc_idx[na] = n
                na += 1
            elif avail[kstar, n] == 1:
                avail_idx[nu] = n
                nu += 1
            e[n] = h[kstar, n] / (noise + jmat[kstar, n])
        ga = na // d_v
        gu = nu // d_v
        m_tot = ga + gu
        sort_desc_by_value(alloc_idx, e, na)
        sort_desc_by_value(avail_idx, e, nu)
        for m in range(ga):
            s = 0.0
            for t in range(d_v):
                s += e[alloc_idx[m * d_v + t]]
            sgain[m] = s
        for m in range(gu):
            s = 0.0
            for t in range(d_v):
                s += e[avail_idx[m * d_v + t]]
            sgain[ga + m] = s
        sp, level = waterfill_flat(sgain[:m_tot], power)
        mstar = best_m[kstar]
        gbar = sgain[ga + mstar]
        pbar = sp[ga + mstar]
        for t in range(d_v):
            n = avail_idx[mstar * d_v + t]
            pn = 0.0
            if gbar > 0.0:
                pn = pbar * e[n] / gbar
            x[kstar, n] = 1
            p_snap[kstar, n] = pn
            for kk in range(n_users):
                if group_id[kk] == group_id[kstar]:
                    avail[kk, n] = 0
                if weights[kk] < weights[kstar]:
                    jmat[kk, n] += h[kstar, n] * pn
        it += 1
    return x, p_snap, jmat, it, obj_trace[:it].copy(), gain_trace[:it].copy()


@njit(cache=True)
def muwf_loop(h, noise, weights, group_id, power, n_groups, use_sa2, orthogonal, util_tol):
    """Iterative per-subcarrier allocation with water-filling power updates.

    Same skeleton as mumrt_loop but one subcarrier moves per iteration and
    the per-user power allocation is plain water-filling over allocated
    plus available subcarriers. With orthogonal=True an assigned subcarrier
    is removed from every user (single occupancy).
    """
    n_users, n_sub = h.shape
    max_iter = n_sub if orthogonal else n_sub * n_groups
    x = np.zeros((n_users, n_sub), np.uint8)
    avail = np.ones((n_users, n_sub), np.uint8)
    jmat = np.zeros((n_users, n_sub))
    p_snap = np.zeros((n_users, n_sub))
    obj_trace = np.zeros(max_iter)
    gain_trace = np.zeros(max_iter)

    e = np.zeros((n_users, n_sub))
    p_cur = np.zeros((n_users, n_sub))
    p_scratch = np.zeros(n_sub)
    sel = np.zeros(n_sub, np.uint8)
    rate_full = np.zeros(n_users)
    best_u = np.zeros(n_users)
    best_n = np.zeros(n_users, np.int64)
    delta = np.zeros(n_users)

    it = 0
    while it < max_iter:
        global_u = 0.0
        global_k = -1
        obj_a = 0.0
        for k in range(n_users):
            for n in range(n_sub):
                e[k, n] = h[k, n] / (noise + jmat[k, n])
                sel[n] = 1 if (x[k, n] == 1 or avail[k, n] == 1) else 0
            rate_full[k] = row_waterfill(e[k], sel, power, p_cur[k])
            bu = 0.0
            bn = -1
            for n in range(n_sub):
                if avail[k, n] == 1:
                    u = weights[k] * np.log2(1.0 + p_cur[k, n] * e[k, n])
                    if u > bu:
                        bu = u
                        bn = n
            best_u[k] = bu
            best_n[k] = bn
            if bu > global_u:
                global_u = bu
                global_k = k
            if use_sa2:
                rate_alloc = row_waterfill(e[k], x[k], power, p_scratch)
                delta[k] = weights[k] * (rate_full[k] - rate_alloc)
                obj_a += weights[k] * rate_alloc
        if global_k < 0 or global_u <= util_tol:
            break
        if use_sa2:
            kstar = -1
            dbest = -1.0
            for k in range(n_users):
                if best_n[k] >= 0 and best_u[k] > util_tol and delta[k] > dbest:
                    kstar = k
                    dbest = delta[k]
            obj_trace[it] = obj_a
            gain_trace[it] = dbest
        else:
            kstar = global_k
        nstar = best_n[kstar]
        pn = p_cur[kstar, nstar]
        x[kstar, nstar] = 1
        p_snap[kstar, nstar] = pn
        for kk in range(n_users):
            if orthogonal or group_id[kk] == group_id[kstar]:
                avail[kk, nstar] = 0
            if weights[kk] < weights[kstar]:
                jmat[kk, nstar] += h[kstar, nstar] * pn
        it += 1
    return x, p_snap, jmat, it, obj_trace[:it].copy(), gain_trace[:it].copy()


@njit(cache=True)
def mac_envelope(a, b, s_top, recv, s_hi, s_lo):
    """Positive upper envelope of the per-user utility curves on one channel.

    In the variable s = 1/(noise + q) the utilities are lines a[k]*s - b[k]
    on (0, s_top]. The walk follows the envelope from s_top downward and
    accumulates each user's received-power measure in q; s_hi/s_lo record
    the winning s-interval (zeros when the user never wins).
    """
    n_users = a.shape[0]
    for k in range(n_users):
        recv[k] = 0.0
        s_hi[k] = 0.0
        s_lo[k] = 0.0
    w = -1
    fbest = 0.0
    for k in range(n_users):
        f = a[k] * s_top - b[k]
        if f > fbest:
            fbest = f
            w = k
    if w < 0:
        return
    s_cur = s_top
    while True:
        s_zero = b[w] / a[w]
        if s_zero < 1e-300:
            s_zero = 1e-300
        s_next = s_zero
        nxt = -1
        for j in range(n_users):
            if a[j] < a[w]:
                s_x = (b[w] - b[j]) / (a[w] - a[j])
                if s_x < s_cur:
                    if s_x > s_next or (s_x == s_next and nxt >= 0 and a[j] < a[nxt]):
                        s_next = s_x
                        nxt = j
        recv[w] += 1.0 / s_next - 1.0 / s_cur
        s_hi[w] = s_cur
        s_lo[w] = s_next
        if nxt < 0:
            return
        s_cur = s_next
        w = nxt


@njit(cache=True)
def mac_consumed(k, a, lambdas, h, noise):
    """Total transmit power user k draws under the current multipliers."""
    n_users, n_sub = h.shape
    s_top = 1.0 / noise
    b = np.empty(n_users)
    recv = np.empty(n_users)
    shi = np.empty(n_users)
    slo = np.empty(n_users)
    total = 0.0
    for n in range(n_sub):
        for i in range(n_users):
            b[i] = lambdas[i] / h[i, n]
        mac_envelope(a, b, s_top, recv, shi, slo)
        total += recv[k] / h[k, n]
    return total


@njit(cache=True)
def mac_bisect(k, a, lambdas, h, noise, p_max, lam_floor, iters):
    """Geometric bisection of user k's multiplier against its power budget.

    Mutates lambdas[k]; ends on the feasible side (consumed <= p_max) and
    returns the consumed power there. Consumed power is monotone
    non-increasing in the multiplier, so the bracket is valid whenever the
    floor over-consumes.
    """
    n_users, n_sub = h.shape
    hmax = 0.0
    for n in range(n_sub):
        if h[k, n] > hmax:
            hmax = h[k, n]
    lam_hi = a[k] * hmax / noise * 1.0001
    lam_lo = lam_floor
    lambdas[k] = lam_lo
    c_lo = mac_consumed(k, a, lambdas, h, noise)
    if c_lo <= p_max:
        return c_lo
    for _ in range(iters):
        mid = np.sqrt(lam_lo * lam_hi)
        lambdas[k] = mid
        c = mac_consumed(k, a, lambdas, h, noise)
        if c > p_max:
            lam_lo = mid
        else:
            lam_hi = mid
    lambdas[k] = lam_hi
    return mac_consumed(k, a, lambdas, h, noise)


@njit(cache=True)
def mac_measures(a, lambdas, h, noise):
    """Received-power measures and winning s-intervals for all users/subcarriers."""
    n_users, n_sub = h.shape
    s_top = 1.0 / noise
    recv = np.zeros((n_users, n_sub))
    shi = np.zeros((n_users, n_sub))
    slo = np.zeros((n_users, n_sub))
    b = np.empty(n_users)
    r = np.empty(n_users)
    sh = np.empty(n_users)
    sl = np.empty(n_users)
    for n in range(n_sub):
        for i in range(n_users):
            b[i] = lambdas[i] / h[i, n]
        mac_envelope(a, b, s_top, r, sh, sl)
        for i in range(n_users):
            recv[i, n] = r[i]
            shi[i, n] = sh[i]
            slo[i, n] = sl[i]
    return recv, shi, slo
