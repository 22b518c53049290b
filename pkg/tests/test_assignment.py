"""Assignment solving: cost matrices, exact optima, tie-breaking."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from playtree.assignment import (align_team_batch, apply_permutation,
                                 build_cost_matrix, per_frame_cost_matrices,
                                 solve_assignment)
from playtree.model import PermutationMap, Template

from conftest import random_play


def brute_force_lex_min(cost):
    """Minimum-cost assignment; among exact ties, the lexicographically
    smallest mapping (permutations enumerate in lex order, strict < keeps
    the first optimum)."""
    m = cost.shape[0]
    best_total, best_perm = None, None
    for perm in itertools.permutations(range(m)):
        total = math.fsum(cost[i, perm[i]] for i in range(m))
        if best_total is None or total < best_total:
            best_total, best_perm = total, perm
    return best_perm, best_total


def test_cost_matrix_hand_example():
    # two agents swapped relative to the template: diagonal costs are large,
    # off-diagonal zero
    template = Template(np.stack([np.zeros((4, 2)), np.ones((4, 2))]),
                        "offense")
    rng = np.random.default_rng(0)
    play = random_play(rng, players_per_team=1)
    play.agents = np.stack([np.ones((4, 2)), np.zeros((4, 2)),
                            np.zeros((4, 2)), np.zeros((4, 2))])
    play.n_offense = 2
    cost = build_cost_matrix(template, play, "offense", metric="squared")
    assert cost[0, 1] == 0.0 and cost[1, 0] == 0.0
    assert cost[0, 0] == pytest.approx(4 * 2.0)  # 4 frames x ||(1,1)||^2
    perm, total = solve_assignment(cost)
    assert perm.mapping == (1, 0)
    assert total == 0.0


def test_cost_matrix_metrics_relate():
    rng = np.random.default_rng(1)
    play = random_play(rng)
    template = Template(rng.uniform(0, 94, size=(5, play.n_frames, 2)))
    sq = build_cost_matrix(template, play, "offense", metric="squared")
    eu = build_cost_matrix(template, play, "offense", metric="euclidean")
    per = per_frame_cost_matrices(template, play, "offense", metric="euclidean")
    assert np.allclose(per.sum(axis=0), eu)
    assert (sq >= 0).all() and (eu >= 0).all()
    with pytest.raises(ValueError):
        build_cost_matrix(template, play, "offense", metric="manhattan")


def test_solve_matches_brute_force_with_ties():
    rng = np.random.default_rng(2)
    for trial in range(400):
        m = int(rng.integers(2, 6))
        # small integers make ties frequent
        cost = rng.integers(0, 4, size=(m, m)).astype(float)
        perm, total = solve_assignment(cost)
        oracle_perm, oracle_total = brute_force_lex_min(cost)
        assert total == pytest.approx(oracle_total, abs=1e-9)
        assert perm.mapping == oracle_perm, f"trial {trial}: {cost}"


@given(st.integers(min_value=2, max_value=6), st.integers(0, 2**32 - 1),
       st.floats(-50, 50, allow_nan=False), st.floats(-50, 50, allow_nan=False))
@settings(max_examples=60, deadline=None)
def test_row_column_shift_invariance(m, seed, row_shift, col_shift):
    """Adding a constant to any row or column never changes the optimum."""
    rng = np.random.default_rng(seed)
    cost = rng.uniform(0, 100, size=(m, m))
    perm, _ = solve_assignment(cost)
    shifted = cost.copy()
    shifted[int(rng.integers(m)), :] += row_shift
    shifted[:, int(rng.integers(m))] += col_shift
    perm2, _ = solve_assignment(shifted)
    assert perm.mapping == perm2.mapping


@given(st.integers(min_value=1, max_value=7), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_solve_is_optimal_property(m, seed):
    rng = np.random.default_rng(seed)
    cost = rng.uniform(0, 100, size=(m, m))
    perm, total = solve_assignment(cost)
    _, oracle = brute_force_lex_min(cost)
    assert total == pytest.approx(oracle, abs=1e-9)


def test_solve_rejects_bad_shapes():
    with pytest.raises(ValueError):
        solve_assignment(np.zeros((3, 4)))
    with pytest.raises(ValueError):
        solve_assignment(np.zeros((40, 40)))


def test_apply_permutation_both_teams():
    rng = np.random.default_rng(3)
    play = random_play(rng)
    perm = PermutationMap((4, 3, 2, 1, 0))
    flipped = apply_permutation(play, perm, "offense")
    assert np.array_equal(flipped.offense, play.offense[::-1])
    assert np.array_equal(flipped.defense, play.defense)
    flipped_d = apply_permutation(play, perm, "defense")
    assert np.array_equal(flipped_d.defense, play.defense[::-1])
    assert np.array_equal(flipped_d.offense, play.offense)
    with pytest.raises(ValueError):
        apply_permutation(play, PermutationMap((1, 0)), "offense")


def test_alignment_recovers_applied_permutation():
    """Aligning a permuted play against the original recovers the shuffle."""
    rng = np.random.default_rng(4)
    play = random_play(rng)
    template = Template(play.offense.copy())
    perm = PermutationMap(tuple(rng.permutation(5)))
    shuffled = apply_permutation(play, perm, "offense")
    cost = build_cost_matrix(template, shuffled, "offense", metric="squared")
    recovered, total = solve_assignment(cost)
    assert total == pytest.approx(0.0, abs=1e-9)
    assert np.array_equal(shuffled.offense[recovered.as_array()], play.offense)


def test_align_team_batch_matches_solve_assignment():
    rng = np.random.default_rng(5)
    template = rng.uniform(0, 94, size=(5, 50, 2))
    # mix random plays with exact duplicates of the template (tied costs)
    stack = rng.uniform(0, 94, size=(20, 5, 50, 2))
    dup = np.tile(template[0], (5, 1, 1))  # five identical agents: all ties
    stack[7] = dup
    for metric in ("squared", "euclidean"):
        perms, costs = align_team_batch(template, stack, metric)
        for i in range(20):
            diff = template[:, None] - stack[i][None]
            sq = np.einsum("mnfc,mnfc->mnf", diff, diff)
            cost = sq.sum(axis=2) if metric == "squared" else np.sqrt(sq).sum(axis=2)
            pm, _ = solve_assignment(cost)
            assert tuple(perms[i]) == pm.mapping
    # the all-identical play must take the identity mapping (lex smallest)
    perms, _ = align_team_batch(template, stack, "squared")
    assert tuple(perms[7]) == (0, 1, 2, 3, 4)
