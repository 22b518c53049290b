"""Unsupervised EM learning of a formation template for one team."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from playtree.assignment import align_team_batch, apply_permutation
from playtree.model import Play, PermutationMap, Template


@dataclass(frozen=True)
class TemplateLearnConfig:
    rng_seed: int
    max_iterations: int = 50
    convergence_threshold: float = 0.1  # feet
    cost_metric: str = "squared"

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.convergence_threshold <= 0:
            raise ValueError("convergence_threshold must be > 0")
        if self.cost_metric not in ("euclidean", "squared"):
            raise ValueError(f"unknown cost metric {self.cost_metric!r}")


@dataclass
class TemplateLearnResult:
    template: Template
    aligned: list
    permutations: list
    objective_history: list = field(default_factory=list)
    iterations: int = 0


def template_delta(old: Template | np.ndarray, new: Template | np.ndarray) -> float:
    """Mean per-slot Euclidean displacement between two templates (feet).

    Per-slot displacement is averaged over frames first, then over slots.
    """
    a = old.positions if isinstance(old, Template) else np.asarray(old)
    b = new.positions if isinstance(new, Template) else np.asarray(new)
    if a.shape != b.shape:
        raise ValueError(f"template shapes differ: {a.shape} vs {b.shape}")
    per_frame = np.linalg.norm(a - b, axis=-1)  # (M, F)
    return float(per_frame.mean(axis=1).mean())


def learn_template_stack(stack: np.ndarray, config: TemplateLearnConfig,
                         rng: np.random.Generator | None = None):
    """EM template learning over a stacked (N, M, F, 2) team batch.

    Alternates batch alignment against the current template with a mean
    update of the template, until the template moves less than the
    threshold or the iteration cap is hit.  Returns
    ``(template_positions, aligned_stack, perms, costs, history, iters)``
    where perms re-derive from the returned template (a further alignment
    pass is a fixed point).
    """
    stack = np.ascontiguousarray(stack, dtype=np.float64)
    if stack.ndim != 4 or stack.shape[0] == 0:
        raise ValueError("expected a non-empty (N, M, F, 2) stack")
    n_plays = stack.shape[0]
    rng = rng if rng is not None else np.random.default_rng(config.rng_seed)

    if n_plays == 1:
        perms = np.arange(stack.shape[1], dtype=np.int64)[None, :]
        return stack[0].copy(), stack.copy(), perms, np.zeros(1), [0.0], 1

    template = stack[int(rng.integers(n_plays))].copy()
    history = []
    iters = 0
    for _ in range(config.max_iterations):
        iters += 1
        perms, costs = align_team_batch(template, stack, config.cost_metric)
        history.append(float(costs.sum()))
        aligned = np.take_along_axis(stack, perms[:, :, None, None], axis=1)
        new_template = aligned.mean(axis=0)
        delta = template_delta(template, new_template)
        template = new_template
        if delta < config.convergence_threshold:
            break
    # Final pass so returned permutations match the returned template.
    perms, costs = align_team_batch(template, stack, config.cost_metric)
    history.append(float(costs.sum()))
    aligned = np.take_along_axis(stack, perms[:, :, None, None], axis=1)
    return template, aligned, perms, costs, history, iters


def learn_template(plays, team: str, config: TemplateLearnConfig) -> TemplateLearnResult:
    """Learn a formation template for one team over a set of plays."""
    plays = list(plays)
    if not plays:
        raise ValueError("cannot learn a template from an empty play set")
    shapes = {p.team(team).shape for p in plays}
    if len(shapes) != 1:
        raise ValueError(f"inconsistent team dimensions: {sorted(shapes)}")
    stack = np.stack([p.team(team) for p in plays])
    positions, _, perms, _, history, iters = learn_template_stack(stack, config)
    template = Template(positions, team)
    perm_maps = [PermutationMap(tuple(int(i) for i in row)) for row in perms]
    aligned_plays = [apply_permutation(p, pm, team) for p, pm in zip(plays, perm_maps)]
    return TemplateLearnResult(template=template, aligned=aligned_plays,
                               permutations=perm_maps,
                               objective_history=history, iterations=iters)
