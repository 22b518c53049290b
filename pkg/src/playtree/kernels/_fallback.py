"""Pure-Python assignment kernels.

Same contract as the compiled extension in ``_assignment.pyx``; used when
the extension is unavailable or when ``PLAYTREE_PURE_PYTHON=1``.
"""

import numpy as np

_INF = float("inf")


def hungarian(cost):
    """Solve a square min-cost assignment problem exactly.

    Returns ``(mapping, total, ambiguous)`` where ``mapping[m]`` is the
    column assigned to row ``m``, ``total`` the minimal assignment cost and
    ``ambiguous`` whether more than one optimal assignment may exist
    (detected via extra zero reduced-cost edges).
    """
    a = np.asarray(cost, dtype=np.float64)
    m_size = a.shape[0]
    if a.shape != (m_size, m_size):
        raise ValueError(f"cost matrix must be square, got {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("cost matrix contains non-finite entries")

    # Shortest augmenting path formulation with potentials (O(M^3)).
    # Column 0 is a sentinel; real columns are 1..M.
    u = [0.0] * (m_size + 1)
    v = [0.0] * (m_size + 1)
    p = [0] * (m_size + 1)
    way = [0] * (m_size + 1)
    rows = a.tolist()
    for i in range(1, m_size + 1):
        p[0] = i
        j0 = 0
        minv = [_INF] * (m_size + 1)
        used = [False] * (m_size + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = _INF
            j1 = 0
            row = rows[i0 - 1]
            ui0 = u[i0]
            for j in range(1, m_size + 1):
                if not used[j]:
                    cur = row[j - 1] - ui0 - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(m_size + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1

    mapping = np.empty(m_size, dtype=np.int64)
    for j in range(1, m_size + 1):
        mapping[p[j] - 1] = j - 1
    total = float(a[np.arange(m_size), mapping].sum())

    return mapping, total, _has_alternate_optimum(rows, u, v, mapping)


def _has_alternate_optimum(rows, u, v, mapping) -> bool:
    """Alternate optima exist iff the zero reduced-cost graph admits an
    alternating cycle: row i 'steals' row i2's matched column along a zero
    edge.  Checked by eliminating rows with no outgoing steal edges."""
    m_size = len(mapping)
    adj = [[] for _ in range(m_size)]
    col_row = [0] * m_size
    for i in range(m_size):
        col_row[mapping[i]] = i
    for i in range(m_size):
        row = rows[i]
        ui = u[i + 1]
        for j in range(m_size):
            if j != mapping[i] and row[j] - ui - v[j + 1] == 0.0:
                adj[i].append(col_row[j])
    alive = [True] * m_size
    out_deg = [len(a) for a in adj]
    changed = True
    while changed:
        changed = False
        for i in range(m_size):
            if alive[i] and out_deg[i] == 0:
                alive[i] = False
                changed = True
                for k in range(m_size):
                    if alive[k]:
                        out_deg[k] = sum(1 for t in adj[k] if alive[t])
    return any(alive)


def cost_matrices(template, plays, squared):
    """Per-play assignment cost matrices between template and play agents.

    template: (M, F, 2); plays: (N, M, F, 2).  Entry (m, n) accumulates the
    per-frame distance (or squared distance) between template slot m and
    play agent n over all frames.  Returns (N, M, M).
    """
    template = np.asarray(template, dtype=np.float64)
    plays = np.asarray(plays, dtype=np.float64)
    n_plays, m_size, n_frames = plays.shape[0], plays.shape[1], plays.shape[2]
    out = np.empty((n_plays, m_size, m_size), dtype=np.float64)
    # Chunked to bound the (chunk, M, M, F, 2) intermediate.
    chunk = max(1, int(4_000_000 / max(1, m_size * m_size * n_frames)))
    for lo in range(0, n_plays, chunk):
        hi = min(n_plays, lo + chunk)
        diff = template[None, :, None, :, :] - plays[lo:hi, None, :, :, :]
        sq = np.einsum("pmnfc,pmnfc->pmnf", diff, diff)
        if squared:
            out[lo:hi] = sq.sum(axis=3)
        else:
            out[lo:hi] = np.sqrt(sq).sum(axis=3)
    return out


def batch_align(template, plays, squared):
    """Align every play in a batch against one template.

    Returns ``(perms, costs, ambiguous)`` arrays of shape (N, M), (N,), (N,).
    ``perms[i][m]`` is the play agent assigned to template slot m.
    """
    mats = cost_matrices(template, plays, squared)
    n_plays, m_size = mats.shape[0], mats.shape[1]
    perms = np.empty((n_plays, m_size), dtype=np.int64)
    costs = np.empty(n_plays, dtype=np.float64)
    flags = np.zeros(n_plays, dtype=np.uint8)
    for i in range(n_plays):
        mapping, total, amb = hungarian(mats[i])
        perms[i] = mapping
        costs[i] = total
        flags[i] = 1 if amb else 0
    return perms, costs, flags
