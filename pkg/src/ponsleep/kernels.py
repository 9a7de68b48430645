"""Hot numeric kernels: min-cost assignment and exhaustive enumeration.

Each kernel exists twice, as a numba ``@njit`` function and as a pure
numpy/Python fallback with identical results.  ``PONSLEEP_BACKEND=numpy``
(read at import) forces the fallback; otherwise numba is used when it can
be imported.
"""

from __future__ import annotations

import os

import numpy as np

INF = np.int64(1) << np.int64(62)

_requested = os.environ.get("PONSLEEP_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"PONSLEEP_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

BACKEND = "numba" if (_requested == "numba" and HAVE_NUMBA) else "numpy"


# ---------------------------------------------------------------------------
# successive shortest paths


def _ssp_python(cost, allowed, caps):
    n, m = cost.shape
    src, sink = n + m + 1, n + m
    v = n + m + 2
    assign = np.full(n, -1, dtype=np.int64)
    load = np.zeros(m, dtype=np.int64)
    pot = np.zeros(v, dtype=np.int64)
    masked = np.where(allowed, cost, INF)
    col_min = masked.min(axis=0) if n else np.zeros(m, dtype=np.int64)
    pot[n:n + m] = np.where(col_min < INF, col_min, 0)
    pot[sink] = pot[n:n + m].min() if m else 0

    for _ in range(n):
        dist = np.full(v, INF, dtype=np.int64)
        prev = np.full(v, -1, dtype=np.int64)
        done = np.zeros(v, dtype=np.bool_)
        dist[src] = 0
        while True:
            cand = np.where(done, INF, dist)
            u = int(np.argmin(cand))
            if cand[u] >= INF:
                break
            done[u] = True
            if u == sink:
                break
            du = dist[u]
            if u == src:
                free = assign < 0
                nd = du + pot[src] - pot[:n]
                better = free & (nd < dist[:n])
                dist[:n] = np.where(better, nd, dist[:n])
                prev[:n] = np.where(better, u, prev[:n])
            elif u < n:
                row = allowed[u].copy()
                if assign[u] >= 0:
                    row[assign[u]] = False
                nd = du + cost[u] + pot[u] - pot[n:n + m]
                better = row & (nd < dist[n:n + m])
                dist[n:n + m] = np.where(better, nd, dist[n:n + m])
                prev[n:n + m] = np.where(better, u, prev[n:n + m])
            else:
                j = u - n
                here = assign == j
                nd = du - cost[:, j] + pot[u] - pot[:n]
                better = here & (nd < dist[:n])
                dist[:n] = np.where(better, nd, dist[:n])
                prev[:n] = np.where(better, u, prev[:n])
                if load[j] < caps[j]:
                    nd = du + pot[u] - pot[sink]
                    if nd < dist[sink]:
                        dist[sink] = nd
                        prev[sink] = u
        if dist[sink] >= INF:
            return assign, False
        dt = dist[sink]
        pot += np.minimum(dist, dt)
        node = prev[sink]
        load[node - n] += 1
        while node != src:
            p = prev[node]
            if n <= node < n + m and p < n:
                assign[p] = node - n
            node = p
    return assign, True


def _ssp_numba_impl(cost, allowed, caps):
    n, m = cost.shape
    src = n + m + 1
    sink = n + m
    v = n + m + 2
    inf = np.int64(1) << np.int64(62)
    assign = np.full(n, -1, dtype=np.int64)
    load = np.zeros(m, dtype=np.int64)
    pot = np.zeros(v, dtype=np.int64)
    lowest = inf
    for j in range(m):
        best = inf
        for i in range(n):
            if allowed[i, j] and cost[i, j] < best:
                best = cost[i, j]
        pot[n + j] = best if best < inf else 0
        if pot[n + j] < lowest:
            lowest = pot[n + j]
    pot[sink] = lowest if m > 0 else 0

    dist = np.empty(v, dtype=np.int64)
    prev = np.empty(v, dtype=np.int64)
    done = np.empty(v, dtype=np.bool_)
    for _ in range(n):
        for k in range(v):
            dist[k] = inf
            prev[k] = -1
            done[k] = False
        dist[src] = 0
        while True:
            u = -1
            best = inf
            for k in range(v):
                if not done[k] and dist[k] < best:
                    best = dist[k]
                    u = k
            if u < 0:
                break
            done[u] = True
            if u == sink:
                break
            du = dist[u]
            if u == src:
                for i in range(n):
                    if assign[i] < 0:
                        nd = du + pot[src] - pot[i]
                        if nd < dist[i]:
                            dist[i] = nd
                            prev[i] = u
            elif u < n:
                for j in range(m):
                    if allowed[u, j] and assign[u] != j:
                        nd = du + cost[u, j] + pot[u] - pot[n + j]
                        if nd < dist[n + j]:
                            dist[n + j] = nd
                            prev[n + j] = u
            else:
                j = u - n
                for i in range(n):
                    if assign[i] == j:
                        nd = du - cost[i, j] + pot[u] - pot[i]
                        if nd < dist[i]:
                            dist[i] = nd
                            prev[i] = u
                if load[j] < caps[j]:
                    nd = du + pot[u] - pot[sink]
                    if nd < dist[sink]:
                        dist[sink] = nd
                        prev[sink] = u
        if dist[sink] >= inf:
            return assign, False
        dt = dist[sink]
        for k in range(v):
            pot[k] += dist[k] if dist[k] < dt else dt
        node = prev[sink]
        load[node - n] += 1
        while node != src:
            p = prev[node]
            if node >= n and node < n + m and p < n:
                assign[p] = node - n
            node = p
    return assign, True


# ---------------------------------------------------------------------------
# exhaustive enumeration of the fairness objective


def _enumerate_numpy(choice_slot, choice_w, n_choices, num_slots, big_w, prune, chunk=1 << 16):
    # ``prune`` is accepted for signature parity; the vectorised path always
    # evaluates every leaf.
    n = choice_slot.shape[0]
    radix = n_choices.astype(np.int64)
    total = int(np.prod(radix)) if n else 1
    place = np.ones(n, dtype=np.int64)
    for k in range(n - 2, -1, -1):
        place[k] = place[k + 1] * radix[k + 1]
    best = (INF, INF, 0)
    best_idx = -1
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        digits = (idx[:, None] // place[None, :]) % radix[None, :]
        rows = np.arange(n)[None, :]
        slots = choice_slot[rows, digits]
        f2v = choice_w[rows, digits].sum(axis=1)
        f1v = np.zeros(len(idx), dtype=np.int64)
        for j in range(num_slots):
            c = (slots == j).sum(axis=1)
            f1v += c * c
        fv = big_w * f1v - f2v
        fmin = fv.min()
        cand = np.flatnonzero(fv == fmin)
        k = cand[np.argmin(f1v[cand])]
        key = (int(fv[k]), int(f1v[k]))
        if key < best[:2]:
            best = (key[0], key[1], int(f2v[k]))
            best_idx = int(idx[k])
    choice = ((best_idx // place) % radix).astype(np.int64) if best_idx >= 0 else np.zeros(n, np.int64)
    return choice, best[0], best[1], best[2], total


def _enumerate_numba_impl(choice_slot, choice_w, n_choices, num_slots, big_w, prune):
    n = choice_slot.shape[0]
    inf = np.int64(1) << np.int64(62)
    max_w = np.zeros(n + 1, dtype=np.int64)
    for k in range(n - 1, -1, -1):
        mw = np.int64(0)
        for c in range(n_choices[k]):
            if choice_w[k, c] > mw:
                mw = choice_w[k, c]
        max_w[k] = max_w[k + 1] + mw
    counts = np.zeros(num_slots, dtype=np.int64)
    idx = np.full(n, -1, dtype=np.int64)
    best_choice = np.zeros(n, dtype=np.int64)
    best_f = inf
    best_f1 = inf
    best_f2 = np.int64(0)
    explored = np.int64(0)
    f1p = np.int64(0)
    f2p = np.int64(0)
    level = 0
    while level >= 0:
        # undo previous choice at this level
        if idx[level] >= 0:
            j = choice_slot[level, idx[level]]
            counts[j] -= 1
            f1p -= 2 * counts[j] + 1
            f2p -= choice_w[level, idx[level]]
        idx[level] += 1
        if idx[level] >= n_choices[level]:
            idx[level] = -1
            level -= 1
            continue
        j = choice_slot[level, idx[level]]
        f1p += 2 * counts[j] + 1
        counts[j] += 1
        f2p += choice_w[level, idx[level]]
        if level == n - 1:
            explored += 1
            fv = big_w * f1p - f2p
            if fv < best_f or (fv == best_f and f1p < best_f1):
                best_f = fv
                best_f1 = f1p
                best_f2 = f2p
                for k in range(n):
                    best_choice[k] = idx[k]
            continue
        if prune and best_f < inf:
            lb = np.int64(0)
            for k in range(level + 1, n):
                low = inf
                for c in range(n_choices[k]):
                    cj = counts[choice_slot[k, c]]
                    if cj < low:
                        low = cj
                lb += 2 * low + 1
            if big_w * (f1p + lb) - (f2p + max_w[level + 1]) > best_f:
                continue
        level += 1
    return best_choice, best_f, best_f1, best_f2, explored


if HAVE_NUMBA:
    _ssp_numba = njit(cache=True)(_ssp_numba_impl)
    _enumerate_numba = njit(cache=True)(_enumerate_numba_impl)
else:  # pragma: no cover
    _ssp_numba = _ssp_numba_impl
    _enumerate_numba = _enumerate_numba_impl

IMPLEMENTATIONS = {
    "numpy": {"ssp": _ssp_python, "enumerate": _enumerate_numpy},
    "numba": {"ssp": _ssp_numba, "enumerate": _enumerate_numba},
}


def _impl(backend, name):
    key = backend or BACKEND
    if key not in IMPLEMENTATIONS:
        raise ValueError(f"unknown backend {key!r}; expected one of {sorted(IMPLEMENTATIONS)}")
    return IMPLEMENTATIONS[key][name]


def ssp_assign(cost, allowed, caps, backend=None):
    """Min-cost assignment of every row to an allowed column under column caps.

    Returns ``(assign, ok)``; ``ok`` is False when no cap-respecting total
    assignment exists.
    """
    impl = _impl(backend, "ssp")
    return impl(np.ascontiguousarray(cost, dtype=np.int64),
                np.ascontiguousarray(allowed, dtype=np.bool_),
                np.ascontiguousarray(caps, dtype=np.int64))


def enumerate_best(choice_slot, choice_w, n_choices, num_slots, big_w, prune=True, backend=None):
    """Minimise ``W*sum(n_j^2) - sum(w)`` over the product of per-row choices."""
    impl = _impl(backend, "enumerate")
    choice, bf, bf1, bf2, explored = impl(
        np.ascontiguousarray(choice_slot, dtype=np.int64),
        np.ascontiguousarray(choice_w, dtype=np.int64),
        np.ascontiguousarray(n_choices, dtype=np.int64),
        int(num_slots), np.int64(big_w), bool(prune))
    return np.asarray(choice), int(bf), int(bf1), int(bf2), int(explored)
