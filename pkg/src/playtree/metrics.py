"""Alignment-quality and retrieval evaluation metrics."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace

import numpy as np

from playtree import clustering
from playtree.model import flatten
from playtree.tree import TreeConfig, grow_tree, _flatten_stack


@dataclass(frozen=True)
class RelevanceJudgment:
    query_id: str
    play_id: str
    relevant: bool


def _relevant_set(judgments) -> set:
    if isinstance(judgments, (set, frozenset)):
        return set(judgments)
    if isinstance(judgments, dict):
        return {pid for pid, rel in judgments.items() if rel}
    return {j.play_id for j in judgments if j.relevant}


def wce(points: np.ndarray, clusters) -> float:
    """Mean Euclidean distance of points to their cluster mean.

    ``clusters`` is a KMeansResult or a (labels, centers) pair.
    """
    x = np.asarray(points, dtype=np.float64)
    if x.shape[0] == 0:
        raise ValueError("wce of empty input is undefined")
    if isinstance(clusters, clustering.KMeansResult):
        labels, centers = clusters.labels, clusters.centers
    else:
        labels, centers = clusters
    labels = np.asarray(labels)
    centers = np.asarray(centers, dtype=np.float64)
    return float(np.linalg.norm(x - centers[labels], axis=1).mean())


def variance_explained(data: np.ndarray) -> list[float]:
    """Descending covariance eigenvalue shares of the total variance."""
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    if not np.isfinite(x).all():
        raise ValueError("data contains non-finite values")
    centered = x - x.mean(axis=0)
    # covariance eigenvalues via SVD: lambda_i = s_i^2 / (n - 1)
    s = np.linalg.svd(centered, compute_uv=False)
    lam = s * s
    total = lam.sum()
    if total == 0.0:
        return []
    ratios = lam / total
    return [float(r) for r in ratios if r > 1e-12]


def average_precision(ranking, judgments) -> float:
    """Mean of precision-at-rank over the relevant ranks; 0 if the ranking
    contains no relevant item."""
    if not ranking:
        raise ValueError("ranking must be non-empty")
    relevant = _relevant_set(judgments)
    hits = 0
    prec_sum = 0.0
    for rank, pid in enumerate(ranking, start=1):
        if pid in relevant:
            hits += 1
            prec_sum += hits / rank
    if hits == 0:
        return 0.0
    return prec_sum / hits


def expected_reciprocal_rank(ranking, judgments) -> float:
    """Inverse rank of the first relevant result; 0 if none is relevant."""
    if not ranking:
        raise ValueError("ranking must be non-empty")
    relevant = _relevant_set(judgments)
    for rank, pid in enumerate(ranking, start=1):
        if pid in relevant:
            return 1.0 / rank
    return 0.0


@dataclass
class InterleavedRanking:
    items: list     # (play_id, credit) with credit in {"A", "B", "both"}
    drafters: list  # per item, the side ("A"/"B") whose turn drafted it
    coin_seed: int

    def ranking(self) -> list:
        return [pid for pid, _ in self.items]

    def credited(self, team: str) -> set:
        return {pid for pid, src in self.items if src in (team, "both")}


def team_draft_interleave(a, b, seed: int) -> InterleavedRanking:
    """Team-draft interleaving of two duplicate-free rankings.

    Each round a seeded fair coin picks which side drafts first; each side
    appends its highest-ranked item not yet shown.  An item present in both
    inputs is displayed once and credited to both.
    """
    if len(set(a)) != len(a) or len(set(b)) != len(b):
        raise ValueError("rankings must be duplicate-free")
    rng = np.random.default_rng(seed)
    a_set, b_set = set(a), set(b)
    taken: set = set()
    items = []
    drafters = []

    def draft(source_list, label):
        for pid in source_list:
            if pid not in taken:
                taken.add(pid)
                src = "both" if pid in a_set and pid in b_set else label
                items.append((pid, src))
                drafters.append(label)
                return True
        return False

    while any(pid not in taken for pid in a) and any(pid not in taken for pid in b):
        first_a = bool(rng.integers(2))
        order = [(a, "A"), (b, "B")] if first_a else [(b, "B"), (a, "A")]
        for source_list, label in order:
            draft(source_list, label)
    return InterleavedRanking(items=items, drafters=drafters, coin_seed=seed)


# -- compressibility -------------------------------------------------------


def alignment_variants(corpus, config: TreeConfig) -> dict:
    """Flattened corpus under identity, single-template and tree alignment."""
    plays = list(corpus)
    identity = np.stack([flatten(p) for p in plays])
    role_cfg = replace(config, max_depth=1)
    _, role_aln = grow_tree(plays, role_cfg, return_alignment=True)
    role = _flatten_stack(role_aln.offense, role_aln.defense, role_aln.ball)
    _, tree_aln = grow_tree(plays, config, return_alignment=True)
    tree = _flatten_stack(tree_aln.offense, tree_aln.defense, tree_aln.ball)
    return {"identity": identity, "role": role, "tree": tree}


@dataclass
class CompressibilityReport:
    wce_by_k: dict           # alignment -> {k: wce}
    variance_curves: dict    # alignment -> [descending ratios]
    ks: list
    seed: int = 0
    kmeans_restarts: int = 3

    def cumulative_variance(self, alignment: str, n_components: int) -> float:
        curve = self.variance_curves[alignment]
        return float(sum(curve[:n_components]))

    def rows(self) -> list[dict]:
        out = []
        for name, table in sorted(self.wce_by_k.items()):
            for k, value in sorted(table.items()):
                out.append({"alignment": name, "k": k, "wce": value})
        return out

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=["alignment", "k", "wce"])
            writer.writeheader()
            writer.writerows(self.rows())

    def write_json(self, path):
        payload = {"wce_by_k": {n: {str(k): v for k, v in t.items()}
                                for n, t in self.wce_by_k.items()},
                   "variance_curves": self.variance_curves,
                   "ks": self.ks, "seed": self.seed}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True, indent=1)


def compressibility_report(alignments: dict, ks, seed: int,
                           kmeans_restarts: int = 3) -> CompressibilityReport:
    """K-means WCE per alignment per K, plus PCA variance-explained curves."""
    ks = list(ks)
    wce_by_k: dict = {}
    curves: dict = {}
    for name, x in alignments.items():
        x = np.asarray(x, dtype=np.float64)
        table = {}
        for k in ks:
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k,)))
            km = clustering.kmeans(x, k, rng, n_init=kmeans_restarts)
            table[k] = km.wce
        wce_by_k[name] = table
        curves[name] = variance_explained(x)
    return CompressibilityReport(wce_by_k=wce_by_k, variance_curves=curves,
                                 ks=ks, seed=seed, kmeans_restarts=kmeans_restarts)


# -- judgment files ---------------------------------------------------------


def read_judgments(path) -> list[RelevanceJudgment]:
    """One record per (query_id, play_id, relevant) CSV row."""
    out = []
    seen = set()
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            key = (row["query_id"], row["play_id"])
            if key in seen:
                raise ValueError(f"duplicate judgment for {key}")
            seen.add(key)
            out.append(RelevanceJudgment(
                query_id=row["query_id"], play_id=row["play_id"],
                relevant=row["relevant"].strip().lower() in ("1", "true", "yes")))
    return out


def write_judgments(path, judgments):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["query_id", "play_id", "relevant"])
        writer.writeheader()
        for j in judgments:
            writer.writerow({"query_id": j.query_id, "play_id": j.play_id,
                             "relevant": int(j.relevant)})
