"""Alignment tree growth, routing, costs, persistence."""

import json

import numpy as np
import pytest

from playtree.model import PermutationMap
from playtree.assignment import apply_permutation
from playtree.tree import AlignmentTree, TreeConfig, grow_tree

from conftest import random_play


def _config(**kw):
    base = dict(rng_seed=5, max_leaf_size=25, max_depth=6, k_range=(2, 8))
    base.update(kw)
    return TreeConfig(**base)


def test_recovers_generator_formations(small_corpus):
    plays, labels = small_corpus
    tree, alignment = grow_tree(plays, _config(max_leaf_size=40),
                                return_alignment=True)
    root = tree.nodes[tree.root_id]
    assert len(root.children) == 4  # one child per generator formation
    # leaf purity: every leaf holds plays of a single formation
    leaf_formations = {}
    for pid, leaf in zip(alignment.ids, alignment.leaf_ids):
        leaf_formations.setdefault(int(leaf), set()).add(labels[pid].formation)
    assert all(len(s) == 1 for s in leaf_formations.values())


def test_layer_costs_non_increasing(small_corpus):
    plays, _ = small_corpus
    tree = grow_tree(plays, _config(max_leaf_size=10))
    costs = tree.layer_costs
    assert len(costs) == tree.depth
    for prev, cur in zip(costs, costs[1:]):
        assert cur <= prev + 1e-6


def test_align_routes_to_build_leaf(small_corpus):
    plays, _ = small_corpus
    tree, alignment = grow_tree(plays, _config(max_leaf_size=15),
                                return_alignment=True)
    by_id = dict(zip(alignment.ids, alignment.leaf_ids))
    rng = np.random.default_rng(0)
    for i in rng.integers(0, len(plays), 20):
        play = plays[int(i)]
        aligned, leaf_id, p_off, p_def = tree.align(play)
        assert leaf_id == int(by_id[play.play_id])
        assert np.array_equal(aligned.offense, play.offense[p_off.as_array()])
        assert np.array_equal(aligned.defense, play.defense[p_def.as_array()])


def test_alignment_absorbs_agent_scrambling(small_corpus):
    plays, _ = small_corpus
    tree = grow_tree(plays, _config(max_leaf_size=15))
    rng = np.random.default_rng(1)
    play = plays[42]
    scrambled = apply_permutation(play, PermutationMap(tuple(rng.permutation(5))),
                                  "offense")
    scrambled = apply_permutation(scrambled,
                                  PermutationMap(tuple(rng.permutation(5))),
                                  "defense")
    a1, leaf1, _, _ = tree.align(play)
    a2, leaf2, _, _ = tree.align(scrambled)
    assert leaf1 == leaf2
    assert np.allclose(a1.agents, a2.agents)


def test_max_depth_one_is_single_template(small_corpus):
    plays, _ = small_corpus
    tree = grow_tree(plays, _config(max_depth=1, max_leaf_size=1))
    assert tree.depth == 1
    assert len(tree.nodes) == 1
    assert tree.nodes[tree.root_id].is_leaf


def test_leaf_size_respected(small_corpus):
    plays, _ = small_corpus
    tree = grow_tree(plays, _config(max_leaf_size=20))
    for leaf in tree.leaf_nodes():
        assert leaf.size <= 20 or leaf.layer + 1 == tree.config.max_depth


def test_small_node_becomes_leaf():
    rng = np.random.default_rng(2)
    plays = [random_play(rng, play_id=f"p{i}") for i in range(8)]
    tree = grow_tree(plays, _config(max_leaf_size=10))
    assert tree.depth == 1
    assert tree.nodes[tree.root_id].size == 8


def test_grow_rejects_bad_corpora():
    rng = np.random.default_rng(3)
    with pytest.raises(ValueError):
        grow_tree([], _config())
    mixed = [random_play(rng, play_id="a", window_seconds=1),
             random_play(rng, play_id="b", window_seconds=2)]
    with pytest.raises(ValueError):
        grow_tree(mixed, _config())
    dup = [random_play(rng, play_id="same"), random_play(rng, play_id="same")]
    with pytest.raises(ValueError):
        grow_tree(dup, _config())


def test_build_deterministic(small_corpus):
    plays, _ = small_corpus
    t1 = grow_tree(plays, _config(max_leaf_size=15))
    t2 = grow_tree(plays, _config(max_leaf_size=15))
    assert json.dumps(t1.to_dict(), sort_keys=True) == \
        json.dumps(t2.to_dict(), sort_keys=True)


def test_save_load_round_trip(tmp_path, small_corpus):
    plays, _ = small_corpus
    tree = grow_tree(plays, _config(max_leaf_size=15))
    path = tmp_path / "tree.json"
    tree.save(path)
    loaded = AlignmentTree.load(path)
    assert json.dumps(loaded.to_dict(), sort_keys=True) == \
        json.dumps(tree.to_dict(), sort_keys=True)
    play = plays[5]
    a1, l1, o1, d1 = tree.align(play)
    a2, l2, o2, d2 = loaded.align(play)
    assert l1 == l2 and o1 == o2 and d1 == d2
    assert np.array_equal(a1.agents, a2.agents)
    with pytest.raises(ValueError):
        AlignmentTree.from_dict({"format": "something-else"})


def test_align_validates_play_shape(small_corpus):
    plays, _ = small_corpus
    tree = grow_tree(plays, _config())
    bad = random_play(np.random.default_rng(4), window_seconds=1)
    with pytest.raises(ValueError):
        tree.align(bad)


def test_config_round_trip_and_validation():
    cfg = _config()
    assert TreeConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ValueError):
        TreeConfig(rng_seed=0, max_depth=0)
    with pytest.raises(ValueError):
        TreeConfig(rng_seed=0, k_range=(1, 5))
    with pytest.raises(ValueError):
        TreeConfig(rng_seed=0, max_leaf_size=0)
