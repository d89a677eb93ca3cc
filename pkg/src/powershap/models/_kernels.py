"""Numba kernels for tree growing, prediction, and path-dependent SHAP.

All kernels are single-threaded and allocation-light so that results are
bit-identical across runs and thread counts.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_EPS = 1e-12


@njit(cache=True)
def grow_tree(
    X, g, h, w, sort_idx_t, min_samples_leaf, max_depth, leaf_l2, split_noise, tree_seed
):
    """Grow one regression tree on gradients g with hessians h.

    Exact greedy splits over sorted unique values, gain = GL^2/(HL+l2) +
    GR^2/(HR+l2) - G^2/(H+l2), candidate thresholds at midpoints of
    consecutive distinct values. Within a feature the best threshold is
    exact (ties resolve to the lowest threshold); across features the
    winner maximizes gain * exp(split_noise * z) with z a seeded standard
    normal per (node, feature), which dithers near-tied chance splits
    while leaving dominant gains in place. With split_noise = 0 the choice
    is fully greedy and ties resolve to the lowest feature index.

    Returns (feature, threshold, left, right, value, cover); feature[i] ==
    -1 marks a leaf, value[i] is its Newton step -G/(H+l2), and cover[i]
    is the sum of sample weights routed through node i.
    """
    np.random.seed(tree_seed)
    n, m = X.shape
    cap = 2 * (n // min_samples_leaf) + 1
    max_nodes = 2 ** (max_depth + 1) - 1
    if cap < max_nodes:
        max_nodes = cap
    if max_nodes < 1:
        max_nodes = 1

    feature = np.full(max_nodes, -1, np.int64)
    threshold = np.zeros(max_nodes, np.float64)
    left = np.full(max_nodes, -1, np.int64)
    right = np.full(max_nodes, -1, np.int64)
    value = np.zeros(max_nodes, np.float64)
    cover = np.zeros(max_nodes, np.float64)

    node_g = np.zeros(max_nodes, np.float64)
    node_h = np.zeros(max_nodes, np.float64)
    node_n = np.zeros(max_nodes, np.int64)

    node_of = np.zeros(n, np.int64)
    for r in range(n):
        node_g[0] += g[r]
        node_h[0] += h[r]
        cover[0] += w[r]
    node_n[0] = n
    n_nodes = 1
    level_lo = 0
    level_hi = 1

    best_gain = np.zeros(max_nodes, np.float64)
    best_score = np.zeros(max_nodes, np.float64)
    best_feat = np.full(max_nodes, -1, np.int64)
    best_thr = np.zeros(max_nodes, np.float64)
    feat_gain = np.zeros(max_nodes, np.float64)
    feat_thr = np.zeros(max_nodes, np.float64)
    run_g = np.zeros(max_nodes, np.float64)
    run_h = np.zeros(max_nodes, np.float64)
    run_n = np.zeros(max_nodes, np.int64)
    last_val = np.zeros(max_nodes, np.float64)

    for _depth in range(max_depth):
        for node in range(level_lo, level_hi):
            best_gain[node] = 0.0
            best_score[node] = 0.0
            best_feat[node] = -1
            best_thr[node] = 0.0
        for j in range(m):
            for node in range(level_lo, level_hi):
                run_g[node] = 0.0
                run_h[node] = 0.0
                run_n[node] = 0
                feat_gain[node] = 0.0
            for k in range(n):
                r = sort_idx_t[j, k]
                node = node_of[r]
                if node < level_lo:
                    continue
                if node_n[node] < 2 * min_samples_leaf:
                    continue
                v = X[r, j]
                cnt = run_n[node]
                if cnt > 0 and v != last_val[node]:
                    nl = cnt
                    nr = node_n[node] - nl
                    if nl >= min_samples_leaf and nr >= min_samples_leaf:
                        gl = run_g[node]
                        hl = run_h[node]
                        gr = node_g[node] - gl
                        hr = node_h[node] - hl
                        gain = (
                            gl * gl / (hl + leaf_l2 + _EPS)
                            + gr * gr / (hr + leaf_l2 + _EPS)
                            - node_g[node] * node_g[node] / (node_h[node] + leaf_l2 + _EPS)
                        )
                        if gain > feat_gain[node]:
                            feat_gain[node] = gain
                            feat_thr[node] = 0.5 * (last_val[node] + v)
                run_g[node] += g[r]
                run_h[node] += h[r]
                run_n[node] = cnt + 1
                last_val[node] = v
            for node in range(level_lo, level_hi):
                if feat_gain[node] > 0.0:
                    score = feat_gain[node]
                    if split_noise > 0.0:
                        score = score * np.exp(split_noise * np.random.normal())
                    if score > best_score[node]:
                        best_score[node] = score
                        best_gain[node] = feat_gain[node]
                        best_feat[node] = j
                        best_thr[node] = feat_thr[node]
        grew = False
        for node in range(level_lo, level_hi):
            if best_feat[node] >= 0 and best_gain[node] > 0.0 and n_nodes + 2 <= max_nodes:
                feature[node] = best_feat[node]
                threshold[node] = best_thr[node]
                left[node] = n_nodes
                right[node] = n_nodes + 1
                n_nodes += 2
                grew = True
        if not grew:
            break
        for r in range(n):
            node = node_of[r]
            if node < level_lo or node >= level_hi or feature[node] < 0:
                continue
            if X[r, feature[node]] <= threshold[node]:
                child = left[node]
            else:
                child = right[node]
            node_of[r] = child
            node_g[child] += g[r]
            node_h[child] += h[r]
            node_n[child] += 1
            cover[child] += w[r]
        level_lo = level_hi
        level_hi = n_nodes

    for node in range(n_nodes):
        if feature[node] < 0:
            value[node] = -node_g[node] / (node_h[node] + leaf_l2 + _EPS)

    return (
        feature[:n_nodes],
        threshold[:n_nodes],
        left[:n_nodes],
        right[:n_nodes],
        value[:n_nodes],
        cover[:n_nodes],
    )


@njit(cache=True)
def predict_tree_into(feature, threshold, left, right, value, X, scale, out):
    """Add scale * leaf value of one tree to out, row by row."""
    for r in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[r, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[r] += scale * value[node]


@njit(cache=True)
def tree_expected_value(feature, left, right, value, cover):
    """Cover-weighted expectation of one tree's output (empty coalition)."""
    n_nodes = feature.shape[0]
    ev = np.zeros(n_nodes, np.float64)
    for node in range(n_nodes - 1, -1, -1):
        if feature[node] < 0:
            ev[node] = value[node]
        else:
            ev[node] = (
                cover[left[node]] * ev[left[node]]
                + cover[right[node]] * ev[right[node]]
            ) / cover[node]
    return ev[0]


@njit(cache=True)
def _extend_path(pd_, pz, po, pw, off, length, pzf, pof, pif):
    pd_[off + length] = pif
    pz[off + length] = pzf
    po[off + length] = pof
    pw[off + length] = 1.0 if length == 0 else 0.0
    for i in range(length - 1, -1, -1):
        pw[off + i + 1] += pof * pw[off + i] * (i + 1.0) / (length + 1.0)
        pw[off + i] = pzf * pw[off + i] * (length - i) / (length + 1.0)


@njit(cache=True)
def _unwind_path(pd_, pz, po, pw, off, length, k):
    l = length - 1
    of_k = po[off + k]
    zf_k = pz[off + k]
    n_ = pw[off + l]
    for j in range(l - 1, -1, -1):
        if of_k != 0.0:
            t = pw[off + j]
            pw[off + j] = n_ * (l + 1.0) / ((j + 1.0) * of_k)
            n_ = t - pw[off + j] * zf_k * (l - j) / (l + 1.0)
        else:
            pw[off + j] = pw[off + j] * (l + 1.0) / (zf_k * (l - j))
    for j in range(k, l):
        pd_[off + j] = pd_[off + j + 1]
        pz[off + j] = pz[off + j + 1]
        po[off + j] = po[off + j + 1]


@njit(cache=True)
def _unwound_sum(pz, po, pw, off, length, k):
    # Sum of the path weights after removing element k, without
    # materializing the shorter path.
    l = length - 1
    of_k = po[off + k]
    zf_k = pz[off + k]
    n_ = pw[off + l]
    total = 0.0
    if of_k != 0.0:
        for j in range(l - 1, -1, -1):
            t = n_ * (l + 1.0) / ((j + 1.0) * of_k)
            total += t
            n_ = pw[off + j] - t * zf_k * (l - j) / (l + 1.0)
    else:
        for j in range(l - 1, -1, -1):
            total += pw[off + j] * (l + 1.0) / (zf_k * (l - j))
    return total


@njit(cache=True)
def _shap_one_tree(
    x,
    base,
    feature,
    threshold,
    left,
    right,
    value,
    cover,
    pd_,
    pz,
    po,
    pw,
    st_node,
    st_poff,
    st_plen,
    st_pz,
    st_po,
    st_pi,
    phi,
):
    # Iterative DFS over root-to-leaf paths carrying the subset-permutation
    # weights; equivalent to the recursive extend/unwind formulation. Path
    # segments live at offset parent_off + parent_len, which DFS order keeps
    # collision-free.
    sp = 0
    st_node[sp] = 0
    st_poff[sp] = 0
    st_plen[sp] = 0
    st_pz[sp] = 1.0
    st_po[sp] = 1.0
    st_pi[sp] = -1
    sp += 1
    while sp > 0:
        sp -= 1
        node = st_node[sp]
        poff = st_poff[sp]
        plen = st_plen[sp]
        pzf = st_pz[sp]
        pof = st_po[sp]
        pif = st_pi[sp]

        off = poff + plen
        for i in range(plen):
            pd_[off + i] = pd_[poff + i]
            pz[off + i] = pz[poff + i]
            po[off + i] = po[poff + i]
            pw[off + i] = pw[poff + i]
        _extend_path(pd_, pz, po, pw, off, plen, pzf, pof, pif)
        length = plen + 1

        gnode = base + node
        if feature[gnode] < 0:
            leaf_v = value[gnode]
            for i in range(1, length):
                w_sum = _unwound_sum(pz, po, pw, off, length, i)
                phi[pd_[off + i]] += w_sum * (po[off + i] - pz[off + i]) * leaf_v
        else:
            split_f = feature[gnode]
            lc = left[gnode]
            rc = right[gnode]
            if x[split_f] <= threshold[gnode]:
                hot, cold = lc, rc
            else:
                hot, cold = rc, lc
            iz = 1.0
            io = 1.0
            k = -1
            for i in range(1, length):
                if pd_[off + i] == split_f:
                    k = i
                    break
            if k >= 0:
                iz = pz[off + k]
                io = po[off + k]
                _unwind_path(pd_, pz, po, pw, off, length, k)
                length -= 1
            r_hot = cover[base + hot] / cover[gnode]
            r_cold = cover[base + cold] / cover[gnode]
            st_node[sp] = cold
            st_poff[sp] = off
            st_plen[sp] = length
            st_pz[sp] = iz * r_cold
            st_po[sp] = 0.0
            st_pi[sp] = split_f
            sp += 1
            st_node[sp] = hot
            st_poff[sp] = off
            st_plen[sp] = length
            st_pz[sp] = iz * r_hot
            st_po[sp] = io
            st_pi[sp] = split_f
            sp += 1


@njit(cache=True)
def shap_ensemble(
    X, feature, threshold, left, right, value, cover, offsets, max_depth, scale, out
):
    """Path-dependent SHAP of a tree ensemble, summed over trees.

    out has shape (rows, n_features) and receives scale * phi. Tree t's
    nodes occupy the packed arrays at [offsets[t], offsets[t+1]).
    """
    max_elems = (max_depth + 3) * (max_depth + 4) // 2
    pd_ = np.empty(max_elems, np.int64)
    pz = np.empty(max_elems, np.float64)
    po = np.empty(max_elems, np.float64)
    pw = np.empty(max_elems, np.float64)
    stack_cap = 2 * (max_depth + 3)
    st_node = np.empty(stack_cap, np.int64)
    st_poff = np.empty(stack_cap, np.int64)
    st_plen = np.empty(stack_cap, np.int64)
    st_pz = np.empty(stack_cap, np.float64)
    st_po = np.empty(stack_cap, np.float64)
    st_pi = np.empty(stack_cap, np.int64)

    n_trees = offsets.shape[0] - 1
    m = out.shape[1]
    phi = np.empty(m, np.float64)
    for row in range(X.shape[0]):
        x = X[row]
        for i in range(m):
            phi[i] = 0.0
        for t in range(n_trees):
            _shap_one_tree(
                x,
                offsets[t],
                feature,
                threshold,
                left,
                right,
                value,
                cover,
                pd_,
                pz,
                po,
                pw,
                st_node,
                st_poff,
                st_plen,
                st_pz,
                st_po,
                st_pi,
                phi,
            )
        for i in range(m):
            out[row, i] += scale * phi[i]
