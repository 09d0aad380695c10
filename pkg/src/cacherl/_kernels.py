"""Hot loops, compiled with numba when available.

Set CACHERL_NO_NUMBA=1 to skip compilation; the same functions then run as
plain Python. Both paths execute identical bytecode-level logic on
identical pre-drawn uniforms, so results are bitwise equal either way.

Kernels take no RNG objects. Callers pre-draw every uniform the loop will
consume and pass them in as arrays; chain trajectories likewise arrive as
precomputed state paths. All tie-breaks resolve toward the lowest index.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("CACHERL_NO_NUMBA", "").strip() not in ("", "0")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit

    NUMBA_ACTIVE = True
except ImportError:
    NUMBA_ACTIVE = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


@njit(cache=True, nogil=True)
def chain_path(cum_rows, start, uniforms, out):
    """Walk a Markov chain by inverse CDF; out[t] is the state after step t.

    cum_rows holds cumulative sums of the transition rows.
    """
    n = cum_rows.shape[0]
    s = start
    for t in range(uniforms.shape[0]):
        u = uniforms[t]
        row = cum_rows[s]
        k = np.searchsorted(row, u, side="right")
        if k >= n:
            k = n - 1
        s = k
        out[t] = s


@njit(cache=True, nogil=True)
def draw_categorical(cum_profile, u):
    """Index sampled from a cumulative profile with one uniform."""
    k = np.searchsorted(cum_profile, u, side="right")
    last = cum_profile.shape[0] - 1
    if k > last:
        k = last
    return k


@njit(cache=True, nogil=True)
def top_m_mask(values, m, out):
    """Binary mask of the m largest values; ties keep the lower index."""
    order = np.argsort(-values, kind="mergesort")
    out[:] = 0
    for k in range(m):
        out[order[k]] = 1


@njit(cache=True, nogil=True)
def random_subset_mask(n, m, uniforms, scratch, out):
    """Uniform m-of-n mask via partial Fisher-Yates on pre-drawn uniforms."""
    for i in range(n):
        scratch[i] = i
    out[:] = 0
    for k in range(m):
        j = k + int(uniforms[k] * (n - k))
        if j > n - 1:
            j = n - 1
        tmp = scratch[k]
        scratch[k] = scratch[j]
        scratch[j] = tmp
        out[scratch[k]] = 1


@njit(cache=True, nogil=True)
def tabular_q_run(
    n_local,
    n_actions,
    refresh,
    miss_l,
    miss_g,
    gamma,
    beta,
    beta_visit,
    eps,
    gpath,
    lpath_true,
    lpath_obs,
    g0,
    l0,
    a0_idx,
    u_explore,
    u_pick,
    q,
    visits,
    costs,
):
    """Tabular Q-learning over the joint (global, local, previous-action) state.

    State index: (g * n_local + l) * n_actions + a_prev, built from the
    *observed* local path; realized cost reads the *true* local path. Cost
    tables fold the lambda weights in already: refresh[a_prev, a],
    miss_l[l, a], miss_g[g, a]. If beta_visit is nonzero the step size is
    1/visit-count instead of beta. Writes per-slot realized cost into costs
    and updates q in place.
    """
    horizon = costs.shape[0]
    g_prev = g0
    l_prev = l0
    a_prev = a0_idx
    for t in range(horizon):
        s_prev = (g_prev * n_local + l_prev) * n_actions + a_prev
        if u_explore[t] < eps[t]:
            a = int(u_pick[t] * n_actions)
            if a > n_actions - 1:
                a = n_actions - 1
        else:
            a = 0
            best = q[s_prev, 0]
            for k in range(1, n_actions):
                if q[s_prev, k] < best:
                    best = q[s_prev, k]
                    a = k
        g = gpath[t]
        l = lpath_obs[t]
        cost = (refresh[a_prev, a] + miss_l[lpath_true[t], a]) + miss_g[g, a]
        s_new = (g * n_local + l) * n_actions + a
        qmin = q[s_new, 0]
        for k in range(1, n_actions):
            if q[s_new, k] < qmin:
                qmin = q[s_new, k]
        if beta_visit != 0:
            visits[s_prev, a] += 1
            b = 1.0 / visits[s_prev, a]
        else:
            b = beta
        q[s_prev, a] = (1.0 - b) * q[s_prev, a] + b * (cost + gamma * qmin)
        costs[t] = cost
        g_prev = g
        l_prev = l
        a_prev = a


@njit(cache=True, nogil=True)
def policy_rollout(
    n_local,
    n_actions,
    policy,
    refresh,
    miss_l,
    miss_g,
    gpath,
    lpath_true,
    lpath_obs,
    g0,
    l0,
    a0_idx,
    costs,
):
    """Realized per-slot costs of a fixed deterministic policy on a chain path."""
    horizon = costs.shape[0]
    g_prev = g0
    l_prev = l0
    a_prev = a0_idx
    for t in range(horizon):
        s_prev = (g_prev * n_local + l_prev) * n_actions + a_prev
        a = policy[s_prev]
        g = gpath[t]
        costs[t] = (refresh[a_prev, a] + miss_l[lpath_true[t], a]) + miss_g[g, a]
        g_prev = g
        l_prev = lpath_obs[t]
        a_prev = a


@njit(cache=True, nogil=True)
def linear_q_run(
    p_global,
    p_local,
    m,
    lam1,
    lam2,
    lam3,
    gamma,
    alpha_g,
    alpha_l,
    alpha_r,
    eps,
    gpath,
    lpath_true,
    lpath_obs,
    g0,
    l0,
    a0,
    u_explore,
    u_rand,
    theta_g,
    theta_l,
    theta_r,
    costs,
):
    """Q-learning with the factored linear value model.

    Per-file scores psi(s) = theta_g[g] + theta_l[l] + theta_r * a_prev rate
    how costly it is to leave each file uncached; the approximate value of
    action a' is psi(s)' (1 - a'), so the greedy action caches the m largest
    scores. Semi-gradient updates touch only the rows of the observed state.
    theta_r is a length-1 array so the scalar survives in-place updates.
    """
    horizon = costs.shape[0]
    n_files = p_global.shape[1]
    psi = np.empty(n_files, dtype=np.float64)
    a = np.zeros(n_files, dtype=np.int8)
    a_prev = a0.copy()
    scratch = np.empty(n_files, dtype=np.int64)
    g_prev = g0
    l_prev = l0
    for t in range(horizon):
        for f in range(n_files):
            psi[f] = theta_g[g_prev, f] + theta_l[l_prev, f] + theta_r[0] * a_prev[f]
        if u_explore[t] < eps[t]:
            random_subset_mask(n_files, m, u_rand[t], scratch, a)
        else:
            top_m_mask(psi, m, a)
        q_prev = 0.0
        for f in range(n_files):
            if a[f] == 0:
                q_prev += psi[f]
        g = gpath[t]
        l = lpath_obs[t]
        l_true = lpath_true[t]
        c1 = 0.0
        c2 = 0.0
        c3 = 0.0
        for f in range(n_files):
            if a[f] == 1 and a_prev[f] == 0:
                c1 += 1.0
            if a[f] == 0:
                c2 += p_local[l_true, f]
                c3 += p_global[g, f]
        cost = (lam1 * c1 + lam2 * c2) + lam3 * c3
        for f in range(n_files):
            psi[f] = theta_g[g, f] + theta_l[l, f] + theta_r[0] * a[f]
        order = np.argsort(-psi, kind="mergesort")
        qmin = 0.0
        for k in range(m, n_files):
            qmin += psi[order[k]]
        err = cost + gamma * qmin - q_prev
        overlap = 0.0
        for f in range(n_files):
            if a[f] == 0:
                theta_g[g_prev, f] += alpha_g * err
                theta_l[l_prev, f] += alpha_l * err
                if a_prev[f] == 1:
                    overlap += 1.0
        theta_r[0] += alpha_r * err * overlap
        costs[t] = cost
        g_prev = g
        l_prev = l
        a_prev[:] = a


@njit(cache=True, nogil=True)
def leaf_phase(
    cum_profiles,
    lpaths,
    u_req,
    weights,
    leaf_cache,
    rho,
    n_intervals,
    slots_per_interval,
    m_state,
    w1,
    s0_agg,
    ev_leaf,
    ev_file,
    ev_count,
):
    """Simulate every leaf cache for a whole run; arm-independent.

    Per slot each leaf serves u_req.shape[2] requests drawn from its current
    profile, caching the top leaf_cache entries of an exponentially smoothed
    demand estimate (updated after the slot, so the action never peeks).

    Outputs, per interval: weighted missed-demand counts w1, the aggregated
    upstream state s0_agg = sum_n w_n * sbar_n * (1 - top(sbar_n)), and the
    forwarded miss events in slot-major, leaf-order, draw-order sequence.
    """
    n_leaves = cum_profiles.shape[0]
    n_files = cum_profiles.shape[2]
    per_slot = u_req.shape[2]
    r_vec = np.empty(n_files, dtype=np.float64)
    a_n = np.zeros(n_files, dtype=np.int8)
    acc = np.zeros((n_leaves, n_files), dtype=np.float64)
    pi_mask = np.zeros(n_files, dtype=np.int8)
    n_events = 0
    for tau in range(n_intervals):
        acc[:, :] = 0.0
        base = tau * slots_per_interval
        for t in range(slots_per_interval):
            slot = base + t
            for n in range(n_leaves):
                top_m_mask(m_state[n], leaf_cache, a_n)
                state = lpaths[n, slot]
                r_vec[:] = 0.0
                for k in range(per_slot):
                    f = draw_categorical(cum_profiles[n, state], u_req[n, slot, k])
                    r_vec[f] += 1.0
                    if a_n[f] == 0:
                        w1[tau, f] += weights[n]
                        ev_leaf[n_events] = n
                        ev_file[n_events] = f
                        n_events += 1
                for f in range(n_files):
                    acc[n, f] += r_vec[f]
                    m_state[n, f] = (1.0 - rho) * m_state[n, f] + rho * r_vec[f]
        ev_count[tau] = n_events
        for n in range(n_leaves):
            inv_t = 1.0 / slots_per_interval
            for f in range(n_files):
                acc[n, f] *= inv_t
            top_m_mask(acc[n], leaf_cache, pi_mask)
            for f in range(n_files):
                if pi_mask[f] == 0:
                    s0_agg[tau, f] += weights[n] * acc[n, f]
    return n_events


@njit(cache=True, nogil=True)
def event_arm_run(
    ev_leaf,
    ev_file,
    ev_count,
    weights,
    policy_code,
    parent_cache,
    n_files,
    slots_per_interval,
    costs,
):
    """Replay forwarded misses through an evicting parent cache.

    policy_code: 0 = LRU, 1 = FIFO, 2 = LFU (perfect, stream-wide counts).
    Hit/miss and the cost term use the contents before the update. The
    cache persists across interval boundaries. costs[tau] is the weighted
    per-slot cost of the interval.
    """
    resident = np.zeros(n_files, dtype=np.int8)
    stamp = np.full(n_files, -1, dtype=np.int64)
    freq = np.zeros(n_files, dtype=np.int64)
    size = 0
    clock = 0
    start = 0
    for tau in range(costs.shape[0]):
        stop = ev_count[tau]
        acc = 0.0
        for e in range(start, stop):
            f = ev_file[e]
            w = weights[ev_leaf[e]]
            hit = resident[f] == 1
            acc += w * (2.0 - resident[f])
            clock += 1
            if policy_code == 2:
                freq[f] += 1
            if hit:
                if policy_code == 0:
                    stamp[f] = clock
            else:
                if size < parent_cache:
                    size += 1
                else:
                    victim = -1
                    if policy_code == 2:
                        best_freq = np.int64(0)
                        for g in range(n_files):
                            if resident[g] == 1 and (victim == -1 or freq[g] < best_freq):
                                victim = g
                                best_freq = freq[g]
                    else:
                        best_stamp = np.int64(0)
                        for g in range(n_files):
                            if resident[g] == 1 and (victim == -1 or stamp[g] < best_stamp):
                                victim = g
                                best_stamp = stamp[g]
                    resident[victim] = 0
                resident[f] = 1
                stamp[f] = clock
        costs[tau] = acc / slots_per_interval
        start = stop
