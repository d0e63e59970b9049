"""Hot numeric kernels, each in a numba @njit and a pure-numpy variant.

The `*_nb` functions are compiled when numba is active; the `*_np` functions
are vectorized numpy fallbacks.  The public names (``tree_build``,
``tree_predict``, ``smo_solve``, ``q_train``) dispatch on
:data:`loaddms.accel.USE_NUMBA`.

Both variants of a kernel perform the same floating-point operations in the
same order (sequential prefix sums, first-max argmax semantics, stable
mergesort ordering), so they return bit-identical results; tests/test_accel.py
asserts this and benchmarks/bench_accel.py compares their speed.
"""

import numpy as np

from .accel import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# CART regression tree builder
#
# Trees are flat arrays indexed by node id: feature < 0 marks a leaf holding
# `value`; internal nodes route rows with x[feature] <= threshold to `left`.
# Split quality is the SSE reduction, written as
#   left_sum^2/n_l + right_sum^2/n_r - total^2/n
# over candidate boundaries of the (stably) sorted feature column.  Ties are
# broken toward the lower feature index, then the lower threshold.

_GAIN_EPS = 1e-10


@njit(cache=True)
def tree_build_nb(X, y, rows0, max_depth, min_leaf, feat_subsets,
                  node_feature, node_threshold, node_left, node_right,
                  node_value, leaf_of_sample):
    n_rows = rows0.shape[0]
    capacity = node_feature.shape[0]
    k = feat_subsets.shape[1]
    rows = rows0.copy()

    stack_node = np.empty(capacity, np.int64)
    stack_start = np.empty(capacity, np.int64)
    stack_end = np.empty(capacity, np.int64)
    stack_depth = np.empty(capacity, np.int64)
    top = 0
    stack_node[0] = 0
    stack_start[0] = 0
    stack_end[0] = n_rows
    stack_depth[0] = 0
    top = 1
    node_count = 1

    while top > 0:
        top -= 1
        nid = stack_node[top]
        s = stack_start[top]
        e = stack_end[top]
        depth = stack_depth[top]
        count = e - s

        yv = np.empty(count, np.float64)
        for i in range(count):
            yv[i] = y[rows[s + i]]

        best_gain = 0.0
        best_feat = -1
        best_thr = 0.0
        can_split = (depth < max_depth and count >= 2 * min_leaf
                     and node_count + 2 <= capacity)
        if can_split:
            xv = np.empty(count, np.float64)
            for fi in range(k):
                f = feat_subsets[nid, fi]
                for i in range(count):
                    xv[i] = X[rows[s + i], f]
                order = np.argsort(xv, kind='mergesort')
                prefix = np.empty(count, np.float64)
                acc = 0.0
                for i in range(count):
                    acc += yv[order[i]]
                    prefix[i] = acc
                total = prefix[count - 1]
                tot2n = total * total / count
                gain_floor = _GAIN_EPS * (1.0 + abs(tot2n))
                for i in range(1, count):
                    if xv[order[i - 1]] >= xv[order[i]]:
                        continue
                    if i < min_leaf or count - i < min_leaf:
                        continue
                    lp = prefix[i - 1]
                    rp = total - lp
                    g = lp * lp / i + rp * rp / (count - i) - tot2n
                    if g > gain_floor and g > best_gain:
                        best_gain = g
                        best_feat = f
                        lo = xv[order[i - 1]]
                        hi = xv[order[i]]
                        thr = 0.5 * (lo + hi)
                        if thr == hi:
                            thr = lo
                        best_thr = thr

        if best_feat < 0:
            acc = 0.0
            for i in range(count):
                acc += yv[i]
            node_feature[nid] = -1
            node_threshold[nid] = 0.0
            node_left[nid] = -1
            node_right[nid] = -1
            node_value[nid] = acc / count
            for i in range(s, e):
                leaf_of_sample[rows[i]] = nid
            continue

        tmp = np.empty(count, np.int64)
        nl = 0
        for i in range(s, e):
            if X[rows[i], best_feat] <= best_thr:
                tmp[nl] = rows[i]
                nl += 1
        nr = nl
        for i in range(s, e):
            if X[rows[i], best_feat] > best_thr:
                tmp[nr] = rows[i]
                nr += 1
        for i in range(count):
            rows[s + i] = tmp[i]

        left_id = node_count
        right_id = node_count + 1
        node_count += 2
        node_feature[nid] = best_feat
        node_threshold[nid] = best_thr
        node_left[nid] = left_id
        node_right[nid] = right_id
        node_value[nid] = 0.0

        stack_node[top] = right_id
        stack_start[top] = s + nl
        stack_end[top] = e
        stack_depth[top] = depth + 1
        top += 1
        stack_node[top] = left_id
        stack_start[top] = s
        stack_end[top] = s + nl
        stack_depth[top] = depth + 1
        top += 1

    return node_count


def tree_build_np(X, y, rows0, max_depth, min_leaf, feat_subsets,
                  node_feature, node_threshold, node_left, node_right,
                  node_value, leaf_of_sample):
    capacity = node_feature.shape[0]
    rows = rows0.copy()
    stack = [(0, 0, len(rows), 0)]
    node_count = 1

    while stack:
        nid, s, e, depth = stack.pop()
        seg = rows[s:e]
        count = e - s
        yv = y[seg]

        best_gain = 0.0
        best_feat = -1
        best_thr = 0.0
        best_i = -1
        can_split = (depth < max_depth and count >= 2 * min_leaf
                     and node_count + 2 <= capacity)
        if can_split:
            idx = np.arange(1, count)
            for f in feat_subsets[nid]:
                xv = X[seg, f]
                order = np.argsort(xv, kind='mergesort')
                xs = xv[order]
                prefix = np.cumsum(yv[order])
                total = prefix[-1]
                tot2n = total * total / count
                gain_floor = _GAIN_EPS * (1.0 + abs(tot2n))
                lp = prefix[:-1]
                rp = total - lp
                gains = lp * lp / idx + rp * rp / (count - idx) - tot2n
                valid = ((xs[:-1] < xs[1:])
                         & (idx >= min_leaf) & (count - idx >= min_leaf))
                cand = np.where(valid, gains, -np.inf)
                j = int(np.argmax(cand))
                g = cand[j]
                if g > gain_floor and g > best_gain:
                    best_gain = g
                    best_feat = int(f)
                    lo = xs[j]
                    hi = xs[j + 1]
                    thr = 0.5 * (lo + hi)
                    if thr == hi:
                        thr = lo
                    best_thr = float(thr)
                    best_i = j + 1

        if best_feat < 0:
            node_feature[nid] = -1
            node_threshold[nid] = 0.0
            node_left[nid] = -1
            node_right[nid] = -1
            node_value[nid] = float(np.cumsum(yv)[-1]) / count if count else 0.0
            leaf_of_sample[seg] = nid
            continue

        mask = X[seg, best_feat] <= best_thr
        rows[s:e] = np.concatenate((seg[mask], seg[~mask]))
        nl = best_i

        left_id = node_count
        right_id = node_count + 1
        node_count += 2
        node_feature[nid] = best_feat
        node_threshold[nid] = best_thr
        node_left[nid] = left_id
        node_right[nid] = right_id
        node_value[nid] = 0.0
        stack.append((right_id, s + nl, e, depth + 1))
        stack.append((left_id, s, s + nl, depth + 1))

    return node_count


@njit(cache=True)
def tree_predict_nb(X, node_feature, node_threshold, node_left, node_right,
                    node_value, out):
    n = X.shape[0]
    for i in range(n):
        nid = 0
        while node_feature[nid] >= 0:
            if X[i, node_feature[nid]] <= node_threshold[nid]:
                nid = node_left[nid]
            else:
                nid = node_right[nid]
        out[i] = node_value[nid]


def tree_predict_np(X, node_feature, node_threshold, node_left, node_right,
                    node_value, out):
    n = X.shape[0]
    nid = np.zeros(n, np.int64)
    alive = node_feature[nid] >= 0
    rows = np.arange(n)
    while np.any(alive):
        act = rows[alive]
        cur = nid[act]
        f = node_feature[cur]
        go_left = X[act, f] <= node_threshold[cur]
        nid[act] = np.where(go_left, node_left[cur], node_right[cur])
        alive[act] = node_feature[nid[act]] >= 0
    out[:] = node_value[nid]


# ---------------------------------------------------------------------------
# SMO solver for epsilon-tube support vector regression
#
# Solves the box-constrained dual in 2m variables lam = [alpha+, alpha-]
# (z = +1 / -1); beta = alpha+ - alpha- are the dual coefficients of
# f(x) = sum beta K(x_i, x) + b.  The first working index maximizes the KKT
# violation over I_up; the second minimizes the second-order decrease
# -b^2/eta over violating members of I_low (libsvm's selection).  The
# violation gap max(I_up) - min(I_low) is the KKT residual reported back.

_SMO_ETA_FLOOR = 1e-12


@njit(cache=True)
def smo_solve_nb(K, y, C, eps_tube, tol, max_iter):
    m = y.shape[0]
    lam = np.zeros(2 * m, np.float64)
    beta = np.zeros(m, np.float64)
    u = np.zeros(m, np.float64)
    it = 0
    gap = np.inf

    while it < max_iter:
        best_up = -np.inf
        best_low = np.inf
        i_sel = -1
        for t in range(2 * m):
            i = t if t < m else t - m
            if t < m:
                val = (y[i] - u[i]) - eps_tube
                in_up = lam[t] < C
                in_low = lam[t] > 0.0
            else:
                val = (y[i] - u[i]) + eps_tube
                in_up = lam[t] > 0.0
                in_low = lam[t] < C
            if in_up and val > best_up:
                best_up = val
                i_sel = t
            if in_low and val < best_low:
                best_low = val
        gap = best_up - best_low
        if i_sel < 0 or best_low == np.inf or gap <= tol:
            break

        ii = i_sel if i_sel < m else i_sel - m
        j_sel = -1
        best_obj = np.inf
        for t in range(2 * m):
            i = t if t < m else t - m
            if t < m:
                val = (y[i] - u[i]) - eps_tube
                in_low = lam[t] > 0.0
            else:
                val = (y[i] - u[i]) + eps_tube
                in_low = lam[t] < C
            if not in_low or val >= best_up:
                continue
            bdiff = best_up - val
            eta = K[ii, ii] + K[i, i] - 2.0 * K[ii, i]
            if eta < _SMO_ETA_FLOOR:
                eta = _SMO_ETA_FLOOR
            obj = -(bdiff * bdiff) / eta
            if obj < best_obj:
                best_obj = obj
                j_sel = t
        if j_sel < 0:
            break

        jj = j_sel if j_sel < m else j_sel - m
        if j_sel < m:
            val_j = (y[jj] - u[jj]) - eps_tube
        else:
            val_j = (y[jj] - u[jj]) + eps_tube
        eta = K[ii, ii] + K[jj, jj] - 2.0 * K[ii, jj]
        if eta < _SMO_ETA_FLOOR:
            eta = _SMO_ETA_FLOOR
        step = (best_up - val_j) / eta
        cap_i = (C - lam[i_sel]) if i_sel < m else lam[i_sel]
        cap_j = lam[j_sel] if j_sel < m else (C - lam[j_sel])
        if cap_i < step:
            step = cap_i
        if cap_j < step:
            step = cap_j

        if i_sel < m:
            lam[i_sel] += step
        else:
            lam[i_sel] -= step
        if j_sel < m:
            lam[j_sel] -= step
        else:
            lam[j_sel] += step
        beta[ii] += step
        beta[jj] -= step
        for t in range(m):
            u[t] = u[t] + (step * K[ii, t] - step * K[jj, t])
        it += 1

    b = 0.5 * (best_up + best_low) if gap < np.inf else 0.0
    return beta, b, it, gap


def smo_solve_np(K, y, C, eps_tube, tol, max_iter):
    m = y.shape[0]
    lam = np.zeros(2 * m)
    beta = np.zeros(m)
    u = np.zeros(m)
    diag2 = np.concatenate((np.diag(K), np.diag(K)))
    it = 0
    gap = np.inf
    best_up = -np.inf
    best_low = np.inf

    while it < max_iter:
        base = y - u
        vals = np.concatenate((base - eps_tube, base + eps_tube))
        up_ok = np.concatenate((lam[:m] < C, lam[m:] > 0.0))
        low_ok = np.concatenate((lam[:m] > 0.0, lam[m:] < C))
        up_vals = np.where(up_ok, vals, -np.inf)
        i_sel = int(np.argmax(up_vals))
        best_up = up_vals[i_sel]
        best_low = float(np.min(np.where(low_ok, vals, np.inf)))
        gap = best_up - best_low
        if not np.isfinite(best_up) or best_low == np.inf or gap <= tol:
            break

        ii = i_sel if i_sel < m else i_sel - m
        krow2 = np.concatenate((K[ii], K[ii]))
        eta_vec = K[ii, ii] + diag2 - 2.0 * krow2
        eta_vec = np.maximum(eta_vec, _SMO_ETA_FLOOR)
        bdiff = best_up - vals
        cand = low_ok & (vals < best_up)
        obj = np.where(cand, -(bdiff * bdiff) / eta_vec, np.inf)
        j_sel = int(np.argmin(obj))
        if not np.isfinite(obj[j_sel]):
            break

        jj = j_sel if j_sel < m else j_sel - m
        val_j = vals[j_sel]
        eta = K[ii, ii] + K[jj, jj] - 2.0 * K[ii, jj]
        if eta < _SMO_ETA_FLOOR:
            eta = _SMO_ETA_FLOOR
        step = (best_up - val_j) / eta
        cap_i = (C - lam[i_sel]) if i_sel < m else lam[i_sel]
        cap_j = lam[j_sel] if j_sel < m else (C - lam[j_sel])
        step = min(step, cap_i, cap_j)

        if i_sel < m:
            lam[i_sel] += step
        else:
            lam[i_sel] -= step
        if j_sel < m:
            lam[j_sel] -= step
        else:
            lam[j_sel] += step
        beta[ii] += step
        beta[jj] -= step
        u = u + (step * K[ii] - step * K[jj])
        it += 1

    b = 0.5 * (best_up + best_low) if gap < np.inf else 0.0
    return beta, float(b), it, float(gap)


# ---------------------------------------------------------------------------
# Q-learning episode loop
#
# One agent: E episodes over an R-step window of per-candidate ranks/APEs.
# Exploration randomness (uniforms and random actions) is pre-drawn by the
# caller so both variants consume the identical stream.  qhist[e] snapshots
# the table after episode e; the returned scalar is the largest |Q| seen
# after any single update.

REWARD_RANK = 0
REWARD_ERROR = 1
REWARD_ERROR_REDUCTION = 2


@njit(cache=True)
def q_train_nb(ranks, apes, strategy, alpha, gamma, s0, uniforms,
               rand_actions, qhist):
    n_episodes = uniforms.shape[0]
    n_steps = uniforms.shape[1]
    n_cand = ranks.shape[1]
    q = np.zeros((n_cand, n_cand), np.float64)
    max_abs = 0.0

    for e in range(n_episodes):
        eps = 1.0 - e / n_episodes
        s = s0
        for t in range(n_steps):
            if uniforms[e, t] < eps:
                a = rand_actions[e, t]
            else:
                a = 0
                best = q[s, 0]
                for j in range(1, n_cand):
                    if q[s, j] > best:
                        best = q[s, j]
                        a = j
            if strategy == REWARD_RANK:
                r = float(ranks[t, s] - ranks[t + 1, a])
            elif strategy == REWARD_ERROR:
                r = -apes[t + 1, a]
            else:
                r = apes[t, s] - apes[t + 1, a]
            mx = q[a, 0]
            for j in range(1, n_cand):
                if q[a, j] > mx:
                    mx = q[a, j]
            nv = (1.0 - alpha) * q[s, a] + alpha * (r + gamma * mx)
            q[s, a] = nv
            if abs(nv) > max_abs:
                max_abs = abs(nv)
            s = a
        for si in range(n_cand):
            for aj in range(n_cand):
                qhist[e, si, aj] = q[si, aj]
    return max_abs


def q_train_np(ranks, apes, strategy, alpha, gamma, s0, uniforms,
               rand_actions, qhist):
    n_episodes, n_steps = uniforms.shape
    n_cand = ranks.shape[1]
    q = [[0.0] * n_cand for _ in range(n_cand)]
    ranks_l = ranks.tolist()
    apes_l = apes.tolist()
    uni_l = uniforms.tolist()
    act_l = rand_actions.tolist()
    max_abs = 0.0

    for e in range(n_episodes):
        eps = 1.0 - e / n_episodes
        s = s0
        uni_e = uni_l[e]
        act_e = act_l[e]
        for t in range(n_steps):
            row = q[s]
            if uni_e[t] < eps:
                a = act_e[t]
            else:
                a = 0
                best = row[0]
                for j in range(1, n_cand):
                    if row[j] > best:
                        best = row[j]
                        a = j
            if strategy == REWARD_RANK:
                r = float(ranks_l[t][s] - ranks_l[t + 1][a])
            elif strategy == REWARD_ERROR:
                r = -apes_l[t + 1][a]
            else:
                r = apes_l[t][s] - apes_l[t + 1][a]
            mx = max(q[a])
            nv = (1.0 - alpha) * row[a] + alpha * (r + gamma * mx)
            row[a] = nv
            if abs(nv) > max_abs:
                max_abs = abs(nv)
            s = a
        qhist[e] = q
    return max_abs


# ---------------------------------------------------------------------------

if USE_NUMBA:
    tree_build = tree_build_nb
    tree_predict = tree_predict_nb
    smo_solve = smo_solve_nb
    q_train = q_train_nb
else:
    tree_build = tree_build_np
    tree_predict = tree_predict_np
    smo_solve = smo_solve_np
    q_train = q_train_np
