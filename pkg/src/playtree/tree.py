"""Coarse-to-fine alignment tree: per-node templates, partitioning, routing."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from playtree import clustering
from playtree.assignment import align_team_batch, solve_assignment
from playtree.model import Play, PermutationMap, Template
from playtree.template import TemplateLearnConfig, learn_template_stack

TREE_FORMAT = "playtree-tree-v1"


@dataclass(frozen=True)
class TreeConfig:
    rng_seed: int
    max_leaf_size: int = 2000
    max_depth: int = 6  # layers including the root; 1 = single template
    k_range: tuple = (2, 10)
    template_max_iterations: int = 50
    template_threshold: float = 0.1
    cost_metric: str = "squared"

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.k_range[0] < 2:
            raise ValueError("k_range must start at >= 2")
        if self.max_leaf_size < 1:
            raise ValueError("max_leaf_size must be >= 1")

    def template_config(self) -> TemplateLearnConfig:
        return TemplateLearnConfig(rng_seed=self.rng_seed,
                                   max_iterations=self.template_max_iterations,
                                   convergence_threshold=self.template_threshold,
                                   cost_metric=self.cost_metric)

    def to_dict(self) -> dict:
        return {"rng_seed": self.rng_seed, "max_leaf_size": self.max_leaf_size,
                "max_depth": self.max_depth, "k_range": list(self.k_range),
                "template_max_iterations": self.template_max_iterations,
                "template_threshold": self.template_threshold,
                "cost_metric": self.cost_metric}

    @classmethod
    def from_dict(cls, d: dict) -> "TreeConfig":
        d = dict(d)
        d["k_range"] = tuple(d["k_range"])
        return cls(**d)


@dataclass
class TreeNode:
    node_id: int
    layer: int
    parent_id: int | None
    template_offense: np.ndarray  # (M, F, 2)
    template_defense: np.ndarray
    size: int
    children: list = field(default_factory=list)  # child node ids
    centroids: np.ndarray | None = None  # (k, d) routing centers, row i -> children[i]
    play_ids: list = field(default_factory=list)  # leaf only

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass
class BuildAlignment:
    """Per-play outcome of a tree build: leaf routing and composed maps."""

    ids: list
    leaf_ids: np.ndarray      # (N,)
    comp_offense: np.ndarray  # (N, M)
    comp_defense: np.ndarray  # (N, M)
    offense: np.ndarray       # aligned (N, M, F, 2)
    defense: np.ndarray
    ball: np.ndarray          # (N, F, 3)


def _flatten_stack(off, deff, ball):
    """Frame-major flattening of aligned stacks -> (N, F*(2*M_total+3))."""
    n, _, f, _ = off.shape
    agents = np.concatenate([off, deff], axis=1)  # (N, M_total, F, 2)
    per_frame = agents.transpose(0, 2, 1, 3).reshape(n, f, -1)
    return np.concatenate([per_frame, ball], axis=2).reshape(n, -1)


class AlignmentTree:
    """Hierarchy of formation templates; doubles as the retrieval hash."""

    def __init__(self, config: TreeConfig, nodes: dict, root_id: int,
                 layer_costs: list, n_offense: int, n_defense: int,
                 n_frames: int, window_seconds: int, sample_rate: int):
        self.config = config
        self.nodes = nodes
        self.root_id = root_id
        self.layer_costs = layer_costs
        self.n_offense = n_offense
        self.n_defense = n_defense
        self.n_frames = n_frames
        self.window_seconds = window_seconds
        self.sample_rate = sample_rate

    def leaf_nodes(self) -> list[TreeNode]:
        return [n for n in self.nodes.values() if n.is_leaf]

    @property
    def depth(self) -> int:
        return max(n.layer for n in self.nodes.values()) + 1

    def align(self, play: Play) -> tuple[Play, int, PermutationMap, PermutationMap]:
        """Root-to-leaf alignment: returns the aligned play, the leaf id
        and the composed per-team permutation maps."""
        if play.n_frames != self.n_frames:
            raise ValueError(
                f"play has {play.n_frames} frames, tree expects {self.n_frames}")
        if play.n_offense != self.n_offense or play.n_agents != self.n_offense + self.n_defense:
            raise ValueError("play roster does not match the tree corpus")
        off = np.ascontiguousarray(play.offense)[None]
        deff = np.ascontiguousarray(play.defense)[None]
        ball = np.ascontiguousarray(play.ball)[None]
        comp_off = np.arange(self.n_offense, dtype=np.int64)[None]
        comp_def = np.arange(self.n_defense, dtype=np.int64)[None]
        metric = self.config.cost_metric
        node = self.nodes[self.root_id]
        while True:
            p_off, _ = align_team_batch(node.template_offense, off, metric)
            p_def, _ = align_team_batch(node.template_defense, deff, metric)
            off = np.take_along_axis(off, p_off[:, :, None, None], axis=1)
            deff = np.take_along_axis(deff, p_def[:, :, None, None], axis=1)
            comp_off = np.take_along_axis(comp_off, p_off, axis=1)
            comp_def = np.take_along_axis(comp_def, p_def, axis=1)
            if node.is_leaf:
                break
            flat = _flatten_stack(off, deff, ball)
            child_idx = int(clustering._assign(flat, node.centroids)[0])
            node = self.nodes[node.children[child_idx]]
        aligned = play.with_agents(np.concatenate([off[0], deff[0]], axis=0))
        return (aligned, node.node_id,
                PermutationMap(tuple(int(i) for i in comp_off[0])),
                PermutationMap(tuple(int(i) for i in comp_def[0])))

    def stats(self) -> dict:
        leaves = self.leaf_nodes()
        sizes = sorted(n.size for n in leaves)
        return {"depth": self.depth,
                "node_count": len(self.nodes),
                "leaf_count": len(leaves),
                "leaf_sizes": sizes,
                "layer_costs": self.layer_costs,
                "window_seconds": self.window_seconds}

    def to_dict(self) -> dict:
        nodes = {}
        for nid, n in sorted(self.nodes.items()):
            nodes[str(nid)] = {
                "layer": n.layer,
                "parent_id": n.parent_id,
                "template_offense": n.template_offense.tolist(),
                "template_defense": n.template_defense.tolist(),
                "size": n.size,
                "children": list(n.children),
                "centroids": None if n.centroids is None else n.centroids.tolist(),
                "play_ids": list(n.play_ids),
            }
        return {"format": TREE_FORMAT,
                "config": self.config.to_dict(),
                "root_id": self.root_id,
                "layer_costs": self.layer_costs,
                "n_offense": self.n_offense,
                "n_defense": self.n_defense,
                "n_frames": self.n_frames,
                "window_seconds": self.window_seconds,
                "sample_rate": self.sample_rate,
                "nodes": nodes}

    @classmethod
    def from_dict(cls, d: dict) -> "AlignmentTree":
        if d.get("format") != TREE_FORMAT:
            raise ValueError(f"unsupported tree format {d.get('format')!r}")
        nodes = {}
        for nid_s, nd in d["nodes"].items():
            nid = int(nid_s)
            nodes[nid] = TreeNode(
                node_id=nid, layer=nd["layer"], parent_id=nd["parent_id"],
                template_offense=np.asarray(nd["template_offense"], dtype=np.float64),
                template_defense=np.asarray(nd["template_defense"], dtype=np.float64),
                size=nd["size"], children=list(nd["children"]),
                centroids=None if nd["centroids"] is None
                else np.asarray(nd["centroids"], dtype=np.float64),
                play_ids=list(nd["play_ids"]))
        return cls(config=TreeConfig.from_dict(d["config"]), nodes=nodes,
                   root_id=d["root_id"], layer_costs=list(d["layer_costs"]),
                   n_offense=d["n_offense"], n_defense=d["n_defense"],
                   n_frames=d["n_frames"], window_seconds=d["window_seconds"],
                   sample_rate=d["sample_rate"])

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True, separators=(",", ":"))

    @classmethod
    def load(cls, path) -> "AlignmentTree":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def partition_score(x, labels, centers) -> float:
    """Separation score of a candidate partition (see clustering module)."""
    return clustering.partition_score(np.asarray(x), np.asarray(labels),
                                      np.asarray(centers))


def choose_partition(x, k_range, rng):
    """K selection by maximal separation score; None signals no-split."""
    return clustering.choose_partition(np.asarray(x), tuple(k_range), rng)


def _node_rng(seed: int, node_id: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(node_id,)))


def _relabel_to_parent(child_template, parent_template, metric):
    """Reorder child template slots to match the parent's slot semantics."""
    diff = parent_template[:, None, :, :] - child_template[None, :, :, :]
    sq = np.einsum("mnfc,mnfc->mnf", diff, diff)
    cost = sq.sum(axis=2) if metric == "squared" else np.sqrt(sq).sum(axis=2)
    perm, _ = solve_assignment(cost)
    return child_template[perm.as_array()]


def grow_tree(plays, config: TreeConfig, return_alignment: bool = False):
    """Grow the alignment tree over a uniform-window corpus (BFS, layer by
    layer).  With ``return_alignment`` also returns the per-play build
    outcome (leaf routing, composed permutations, aligned stacks)."""
    plays = list(plays)
    if not plays:
        raise ValueError("cannot grow a tree from an empty corpus")
    windows = {p.window_seconds for p in plays}
    frames = {p.n_frames for p in plays}
    if len(windows) != 1 or len(frames) != 1:
        raise ValueError("corpus must have a uniform window length")
    ids = [p.play_id for p in plays]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate play ids in corpus")
    n_off = plays[0].n_offense
    n_def = plays[0].n_agents - n_off
    n = len(plays)

    off = np.ascontiguousarray(np.stack([p.offense for p in plays]))
    deff = np.ascontiguousarray(np.stack([p.defense for p in plays]))
    ball = np.ascontiguousarray(np.stack([p.ball for p in plays]))
    comp_off = np.tile(np.arange(n_off, dtype=np.int64), (n, 1))
    comp_def = np.tile(np.arange(n_def, dtype=np.int64), (n, 1))
    leaf_of = np.full(n, -1, dtype=np.int64)

    t_cfg = config.template_config()
    metric = config.cost_metric
    nodes: dict[int, TreeNode] = {}
    layer_node_cost: dict[int, float] = {}
    leaf_cost_at: dict[int, float] = {}
    next_id = 0

    # queue entries: (node_id, layer, corpus indices, parent node id)
    queue = [(0, 0, np.arange(n), None)]
    next_id = 1
    while queue:
        node_id, layer, idx, parent_id = queue.pop(0)
        rng = _node_rng(config.rng_seed, node_id)
        m = idx.size

        templates = {}
        for team, stack, comp in (("offense", off, comp_off),
                                  ("defense", deff, comp_def)):
            tmpl, _, _, _, _, _ = learn_template_stack(stack[idx], t_cfg, rng)
            if parent_id is not None:
                parent_tmpl = (nodes[parent_id].template_offense if team == "offense"
                               else nodes[parent_id].template_defense)
                tmpl = _relabel_to_parent(tmpl, parent_tmpl, metric)
            # one final alignment pass of the node data against this template
            perms, _ = align_team_batch(tmpl, stack[idx], metric)
            stack[idx] = np.take_along_axis(stack[idx], perms[:, :, None, None], axis=1)
            comp[idx] = np.take_along_axis(comp[idx], perms, axis=1)
            templates[team] = tmpl

        flat = _flatten_stack(off[idx], deff[idx], ball[idx])
        node_mean = flat.mean(axis=0)
        node_cost = float(np.linalg.norm(flat - node_mean, axis=1).sum())
        layer_node_cost[layer] = layer_node_cost.get(layer, 0.0) + node_cost

        node = TreeNode(node_id=node_id, layer=layer, parent_id=parent_id,
                        template_offense=templates["offense"],
                        template_defense=templates["defense"], size=m)
        nodes[node_id] = node

        partition = None
        if m > config.max_leaf_size and layer + 1 < config.max_depth:
            partition = choose_partition(flat, config.k_range, rng)
        if partition is None:
            node.play_ids = [ids[i] for i in idx]
            leaf_of[idx] = node_id
            leaf_cost_at[layer] = leaf_cost_at.get(layer, 0.0) + node_cost
        else:
            node.centroids = partition.centers
            for j in range(partition.k):
                child_id = next_id
                next_id += 1
                node.children.append(child_id)
                queue.append((child_id, layer + 1, idx[partition.labels == j], node_id))

    depth = max(layer_node_cost) + 1
    layer_costs = []
    settled = 0.0
    for layer in range(depth):
        layer_costs.append(settled + layer_node_cost.get(layer, 0.0))
        settled += leaf_cost_at.get(layer, 0.0)

    tree = AlignmentTree(config=config, nodes=nodes, root_id=0,
                         layer_costs=layer_costs, n_offense=n_off,
                         n_defense=n_def, n_frames=plays[0].n_frames,
                         window_seconds=plays[0].window_seconds,
                         sample_rate=plays[0].sample_rate)
    if not return_alignment:
        return tree
    alignment = BuildAlignment(ids=ids, leaf_ids=leaf_of,
                               comp_offense=comp_off, comp_defense=comp_def,
                               offense=off, defense=deff, ball=ball)
    return tree, alignment


def align_with_tree(play: Play, tree: AlignmentTree):
    """Align a play through the tree; returns (aligned play, leaf id,
    (offense map, defense map))."""
    aligned, leaf_id, p_off, p_def = tree.align(play)
    return aligned, leaf_id, (p_off, p_def)
