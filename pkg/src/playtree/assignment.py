"""Agent-correspondence cost matrices and exact linear assignment."""

from __future__ import annotations

import math

import numpy as np

from playtree import kernels
from playtree.model import Play, PermutationMap, Template

MAX_TEAM_SIZE = 32  # sanity cap; real rosters are <= 11


def build_cost_matrix(template: Template, play: Play, team: str,
                      metric: str = "euclidean") -> np.ndarray:
    """Whole-window assignment costs between template slots and play agents.

    Entry (m, n) accumulates per-frame distances (``euclidean``) or squared
    distances (``squared``) between slot m's trajectory and agent n's.
    """
    if metric not in ("euclidean", "squared"):
        raise ValueError(f"unknown metric {metric!r}")
    agents = play.team(team)
    if template.n_slots != agents.shape[0]:
        raise ValueError(
            f"template has {template.n_slots} slots but team has {agents.shape[0]} agents")
    if template.positions.shape[1] != agents.shape[1]:
        raise ValueError("template and play frame counts differ")
    diff = template.positions[:, None, :, :] - agents[None, :, :, :]
    sq = np.einsum("mnfc,mnfc->mnf", diff, diff)
    if metric == "squared":
        return sq.sum(axis=2)
    return np.sqrt(sq).sum(axis=2)


def per_frame_cost_matrices(template: Template, play: Play, team: str,
                            metric: str = "euclidean") -> np.ndarray:
    """Per-frame (F, M, M) cost matrices, for frame-level re-permutation."""
    agents = play.team(team)
    diff = template.positions[:, None, :, :] - agents[None, :, :, :]
    sq = np.einsum("mnfc,mnfc->mnf", diff, diff)
    per = sq if metric == "squared" else np.sqrt(sq)
    return per.transpose(2, 0, 1)


def _assignment_total(cost: np.ndarray, mapping) -> float:
    # fsum so equal true sums compare exactly equal during tie resolution
    return math.fsum(cost[m, n] for m, n in enumerate(mapping))


def _lexicographic_min(cost: np.ndarray, optimal_total: float) -> list[int]:
    """Among all minimum-cost assignments, pick the lexicographically
    smallest mapping by fixing slots left to right."""
    m_size = cost.shape[0]
    mapping: list[int] = []
    free_cols = list(range(m_size))
    for m in range(m_size):
        for n in free_cols:
            rest_rows = list(range(m + 1, m_size))
            rest_cols = [c for c in free_cols if c != n]
            candidate = mapping + [n]
            if rest_rows:
                sub = cost[np.ix_(rest_rows, rest_cols)]
                sub_map, _, _ = kernels.hungarian(np.ascontiguousarray(sub))
                candidate = candidate + [rest_cols[j] for j in sub_map]
            if _assignment_total(cost, candidate) == optimal_total:
                mapping.append(n)
                free_cols.remove(n)
                break
        else:
            raise AssertionError("tie resolution failed to extend the prefix")
    return mapping


def solve_assignment(cost: np.ndarray) -> tuple[PermutationMap, float]:
    """Exact minimum-cost assignment; ties broken by lexicographically
    smallest mapping.  Returns the permutation and its total cost."""
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ValueError(f"cost matrix must be square, got {cost.shape}")
    if cost.shape[0] > MAX_TEAM_SIZE:
        raise ValueError(f"team size {cost.shape[0]} exceeds cap {MAX_TEAM_SIZE}")
    mapping, total, ambiguous = kernels.hungarian(cost)
    mapping = list(int(i) for i in mapping)
    if ambiguous:
        exact = _assignment_total(cost, mapping)
        mapping = _lexicographic_min(cost, exact)
        total = exact
    return PermutationMap(tuple(mapping)), float(total)


def apply_permutation(play: Play, perm: PermutationMap, team: str) -> Play:
    """Reorder one team's agents identically in every frame."""
    agents = play.agents.copy()
    if team == "offense":
        block = slice(0, play.n_offense)
    elif team == "defense":
        block = slice(play.n_offense, play.n_agents)
    else:
        raise ValueError(f"unknown team scope {team!r}")
    sub = agents[block]
    if len(perm) != sub.shape[0]:
        raise ValueError(f"permutation size {len(perm)} != team size {sub.shape[0]}")
    agents[block] = sub[perm.as_array()]
    return play.with_agents(agents)


def align_team_batch(template_positions: np.ndarray, team_stack: np.ndarray,
                     metric: str = "squared") -> tuple[np.ndarray, np.ndarray]:
    """Batch-align (N, M, F, 2) team trajectories against one template.

    Returns (perms, costs).  Ambiguous solves (alternate optima) are
    re-resolved to the lexicographically smallest mapping so batch results
    match ``solve_assignment`` exactly.
    """
    squared = metric == "squared"
    perms, costs, flags = kernels.batch_align(template_positions, team_stack, squared)
    if flags.any():
        for i in np.flatnonzero(flags):
            diff = template_positions[:, None, :, :] - team_stack[i][None, :, :, :]
            sq = np.einsum("mnfc,mnfc->mnf", diff, diff)
            cost = sq.sum(axis=2) if squared else np.sqrt(sq).sum(axis=2)
            pm, total = solve_assignment(cost)
            perms[i] = pm.as_array()
            costs[i] = total
    return perms, costs
