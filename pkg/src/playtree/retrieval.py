"""Hash-based candidate retrieval and subset-conditioned ranking."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from playtree import clustering
from playtree.model import (Play, PermutationMap, flatten, flatten_columns,
                            parse_selection)
from playtree.template import TemplateLearnConfig, learn_template_stack
from playtree.assignment import align_team_batch
from playtree.tree import AlignmentTree, TreeConfig, _flatten_stack, grow_tree

INDEX_FORMAT = "playtree-index-v1"


class UnknownWindowError(KeyError):
    """Query window length has no index."""


@dataclass
class Query:
    play: Play
    selected: list
    k: int = 10
    boosts: dict = field(default_factory=dict)  # play_id -> factor >= 1

    def __post_init__(self):
        if not self.selected:
            raise ValueError("selection must be non-empty")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        for pid, b in self.boosts.items():
            if b < 1.0:
                raise ValueError(f"boost for {pid} must be >= 1, got {b}")


@dataclass
class RankedResult:
    play_id: str
    distance: float
    correspondence: tuple  # (offense map, defense map) of the candidate
    rank: int


@dataclass
class IndexEntry:
    play_id: str
    off_map: tuple
    def_map: tuple


def _apply_maps(play: Play, off_map, def_map) -> Play:
    agents = play.agents.copy()
    agents[: play.n_offense] = play.offense[list(off_map)]
    agents[play.n_offense:] = play.defense[list(def_map)]
    return play.with_agents(agents)


def _slots_for_selection(play, off_perm: PermutationMap, def_perm: PermutationMap,
                         selected) -> tuple[list[int], bool]:
    """Map selected original agent indices to aligned template slots."""
    agent_idx, ball = parse_selection(play, selected)
    inv_off = off_perm.inverse().mapping
    inv_def = def_perm.inverse().mapping
    slots = []
    for a in agent_idx:
        if a < play.n_offense:
            slots.append(inv_off[a])
        else:
            slots.append(play.n_offense + inv_def[a - play.n_offense])
    return sorted(slots), ball


def _rank(ids, dists, boosts, k, correspondences) -> list[RankedResult]:
    order = np.lexsort((np.asarray(ids, dtype=object), dists))
    ranked = [(ids[i], float(dists[i])) for i in order]
    if boosts:
        scores = [d / boosts.get(pid, 1.0) for pid, d in ranked]
        # stable re-sort: equal-boost items keep their relative order
        reorder = np.argsort(scores, kind="stable")
        ranked = [ranked[i] for i in reorder]
    out = []
    for rank, (pid, d) in enumerate(ranked[:k], start=1):
        out.append(RankedResult(play_id=pid, distance=d,
                                correspondence=correspondences[pid], rank=rank))
    return out


class BaselineIndex:
    """Ball-trajectory cluster hashing with single-template role alignment."""

    def __init__(self, ball_centers, role_off, role_def, entries, metric):
        self.ball_centers = ball_centers  # (C, 3F)
        self.role_off = role_off          # (M, F, 2)
        self.role_def = role_def
        self.entries = entries            # cluster -> [IndexEntry]
        self.metric = metric

    def to_dict(self):
        return {"ball_centers": self.ball_centers.tolist(),
                "role_off": self.role_off.tolist(),
                "role_def": self.role_def.tolist(),
                "metric": self.metric,
                "entries": {str(c): [[e.play_id, list(e.off_map), list(e.def_map)]
                                     for e in es]
                            for c, es in sorted(self.entries.items())}}

    @classmethod
    def from_dict(cls, d):
        entries = {int(c): [IndexEntry(pid, tuple(o), tuple(dd)) for pid, o, dd in es]
                   for c, es in d["entries"].items()}
        return cls(np.asarray(d["ball_centers"], dtype=np.float64),
                   np.asarray(d["role_off"], dtype=np.float64),
                   np.asarray(d["role_def"], dtype=np.float64),
                   entries, d["metric"])


class PlayIndex:
    """Immutable retrieval index: one alignment tree per window length plus
    leaf-keyed hash entries, the play payloads and the baseline index."""

    def __init__(self, trees: dict, entries: dict, plays: dict,
                 baselines: dict | None = None):
        self.trees = trees        # window -> AlignmentTree
        self.entries = entries    # window -> {leaf_id: [IndexEntry]}
        self.plays = plays        # play_id -> Play
        self.baselines = baselines or {}
        self._leaf_cache: dict = {}

    # -- candidate matrices ------------------------------------------------

    def aligned_play(self, window: int, play_id: str) -> Play:
        entry = self._entry_of(window, play_id)
        return _apply_maps(self.plays[play_id], entry.off_map, entry.def_map)

    def _entry_of(self, window, play_id) -> IndexEntry:
        for es in self.entries[window].values():
            for e in es:
                if e.play_id == play_id:
                    return e
        raise KeyError(play_id)

    def _leaf_matrix(self, window, leaf_id):
        key = (window, leaf_id)
        cached = self._leaf_cache.get(key)
        if cached is not None:
            return cached
        entries = self.entries[window][leaf_id]
        if not entries:
            raise AssertionError(f"empty leaf {leaf_id} in window {window}s index")
        ids = [e.play_id for e in entries]
        offs, defs, balls = [], [], []
        for e in entries:
            p = self.plays[e.play_id]
            offs.append(p.offense[list(e.off_map)])
            defs.append(p.defense[list(e.def_map)])
            balls.append(p.ball)
        mat = _flatten_stack(np.stack(offs), np.stack(defs), np.stack(balls))
        self._leaf_cache[key] = (ids, mat)
        return ids, mat

    def _baseline_matrix(self, window, cluster):
        key = (window, "baseline", cluster)
        cached = self._leaf_cache.get(key)
        if cached is not None:
            return cached
        entries = self.baselines[window].entries[cluster]
        ids = [e.play_id for e in entries]
        offs = np.stack([self.plays[e.play_id].offense[list(e.off_map)] for e in entries])
        defs = np.stack([self.plays[e.play_id].defense[list(e.def_map)] for e in entries])
        balls = np.stack([self.plays[e.play_id].ball for e in entries])
        mat = _flatten_stack(offs, defs, balls)
        self._leaf_cache[key] = (ids, mat)
        return ids, mat

    # -- persistence ---------------------------------------------------------

    def to_dict(self) -> dict:
        windows = {}
        for w, tree in sorted(self.trees.items()):
            windows[str(w)] = {
                "tree": tree.to_dict(),
                "entries": {str(leaf): [[e.play_id, list(e.off_map), list(e.def_map)]
                                        for e in es]
                            for leaf, es in sorted(self.entries[w].items())},
                "baseline": (self.baselines[w].to_dict()
                             if w in self.baselines else None),
            }
        return {"format": INDEX_FORMAT, "windows": windows}

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True, separators=(",", ":"))

    @classmethod
    def load(cls, path, plays) -> "PlayIndex":
        """Load an index file; ``plays`` is the play database (iterable of
        Play or a play_id -> Play mapping)."""
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
        if d.get("format") != INDEX_FORMAT:
            raise ValueError(f"unsupported index format {d.get('format')!r}")
        if not isinstance(plays, dict):
            plays = {p.play_id: p for p in plays}
        trees, entries, baselines = {}, {}, {}
        for w_s, wd in d["windows"].items():
            w = int(w_s)
            trees[w] = AlignmentTree.from_dict(wd["tree"])
            entries[w] = {int(leaf): [IndexEntry(pid, tuple(o), tuple(dd))
                                      for pid, o, dd in es]
                          for leaf, es in wd["entries"].items()}
            if wd.get("baseline"):
                baselines[w] = BaselineIndex.from_dict(wd["baseline"])
        return cls(trees=trees, entries=entries, plays=plays, baselines=baselines)

    def stats(self) -> dict:
        return {str(w): t.stats() for w, t in sorted(self.trees.items())}


def build_index(corpus, config: TreeConfig, with_baseline: bool = True) -> PlayIndex:
    """Grow per-window trees, align every play, and store hash entries."""
    corpus = list(corpus)
    if not corpus:
        raise ValueError("cannot index an empty corpus")
    by_window: dict[int, list[Play]] = {}
    for p in corpus:
        by_window.setdefault(p.window_seconds, []).append(p)
    trees, entries, baselines = {}, {}, {}
    plays = {p.play_id: p for p in corpus}
    for w, group in sorted(by_window.items()):
        tree, alignment = grow_tree(group, config, return_alignment=True)
        trees[w] = tree
        leaf_entries: dict[int, list[IndexEntry]] = {}
        for i, pid in enumerate(alignment.ids):
            e = IndexEntry(pid,
                           tuple(int(v) for v in alignment.comp_offense[i]),
                           tuple(int(v) for v in alignment.comp_defense[i]))
            leaf_entries.setdefault(int(alignment.leaf_ids[i]), []).append(e)
        entries[w] = leaf_entries
        if with_baseline:
            n_clusters = len(tree.leaf_nodes())
            baselines[w] = _build_baseline(group, config, n_clusters)
    return PlayIndex(trees=trees, entries=entries, plays=plays, baselines=baselines)


def _build_baseline(group, config: TreeConfig, n_clusters: int) -> BaselineIndex:
    t_cfg = config.template_config()
    rng = np.random.default_rng(np.random.SeedSequence(config.rng_seed,
                                                       spawn_key=(987654321,)))
    off_stack = np.ascontiguousarray(np.stack([p.offense for p in group]))
    def_stack = np.ascontiguousarray(np.stack([p.defense for p in group]))
    role_off, _, perms_off, _, _, _ = learn_template_stack(off_stack, t_cfg, rng)
    role_def, _, perms_def, _, _, _ = learn_template_stack(def_stack, t_cfg, rng)
    balls = np.stack([p.ball.ravel() for p in group])
    n_clusters = max(1, min(n_clusters, len(group)))
    km = clustering.kmeans(balls, n_clusters, rng)
    entries: dict[int, list[IndexEntry]] = {}
    for i, p in enumerate(group):
        e = IndexEntry(p.play_id,
                       tuple(int(v) for v in perms_off[i]),
                       tuple(int(v) for v in perms_def[i]))
        entries.setdefault(int(km.labels[i]), []).append(e)
    return BaselineIndex(ball_centers=km.centers, role_off=role_off,
                         role_def=role_def, entries=entries,
                         metric=config.cost_metric)


def _impute_missing(play: Play, tree: AlignmentTree) -> Play:
    """Fill all-NaN agent trajectories with root template positions so a
    sketch-style partial query can still route through the tree."""
    if not np.isnan(play.agents).any():
        return play
    root = tree.nodes[tree.root_id]
    agents = play.agents.copy()
    for a in range(play.n_agents):
        if np.isnan(agents[a]).all():
            if a < play.n_offense:
                agents[a] = root.template_offense[a]
            else:
                agents[a] = root.template_defense[a - play.n_offense]
    if np.isnan(agents).any():
        raise ValueError("play contains partially missing trajectories")
    return play.with_agents(agents)


def query(index: PlayIndex, q: Query) -> list[RankedResult]:
    """Tree-hash retrieval: route the query to a leaf, rank its candidates
    by L2 distance over the selected trajectories."""
    w = q.play.window_seconds
    if w not in index.trees:
        raise UnknownWindowError(f"no index for {w}s plays")
    tree = index.trees[w]
    play = _impute_missing(q.play, tree)
    aligned, leaf_id, p_off, p_def = tree.align(play)
    ids, mat = index._leaf_matrix(w, leaf_id)
    slots, ball = _slots_for_selection(play, p_off, p_def, q.selected)
    cols = flatten_columns(play.n_offense, play.n_agents - play.n_offense,
                           play.n_frames, slots, ball)
    qvec = flatten(aligned)
    dists = np.linalg.norm(mat[:, cols] - qvec[cols], axis=1)
    corr = {e.play_id: (PermutationMap(e.off_map), PermutationMap(e.def_map))
            for e in index.entries[w][leaf_id]}
    return _rank(ids, dists, q.boosts, q.k, corr)


def baseline_query(index: PlayIndex, q: Query) -> list[RankedResult]:
    """Ball-only hashing baseline with single-template role alignment."""
    w = q.play.window_seconds
    if w not in index.baselines:
        raise UnknownWindowError(f"no baseline index for {w}s plays")
    b = index.baselines[w]
    play = q.play
    p_off_arr, _ = align_team_batch(b.role_off, play.offense[None], b.metric)
    p_def_arr, _ = align_team_batch(b.role_def, play.defense[None], b.metric)
    p_off = PermutationMap(tuple(int(i) for i in p_off_arr[0]))
    p_def = PermutationMap(tuple(int(i) for i in p_def_arr[0]))
    aligned = _apply_maps(play, p_off.mapping, p_def.mapping)
    cluster = int(clustering._assign(play.ball.ravel()[None], b.ball_centers)[0])
    ids, mat = index._baseline_matrix(w, cluster)
    slots, ball = _slots_for_selection(play, p_off, p_def, q.selected)
    cols = flatten_columns(play.n_offense, play.n_agents - play.n_offense,
                           play.n_frames, slots, ball)
    qvec = flatten(aligned)
    dists = np.linalg.norm(mat[:, cols] - qvec[cols], axis=1)
    corr = {e.play_id: (PermutationMap(e.off_map), PermutationMap(e.def_map))
            for e in b.entries[cluster]}
    return _rank(ids, dists, q.boosts, q.k, corr)
