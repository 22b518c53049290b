"""Synthetic multi-formation corpus generator with ground-truth labels."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from playtree.model import COURT_LENGTH, COURT_WIDTH, Play

# offense attacks the x >= 47 half; keep anchors comfortably inside it
_X_LO, _X_HI = 52.0, 90.0
_Y_LO, _Y_HI = 6.0, 44.0


@dataclass(frozen=True)
class SyntheticSpec:
    formations: int
    plays_per_formation: int
    noise_ft: float = 1.0
    seed: int = 0
    window_seconds: int = 4
    sample_rate: int = 25
    players_per_team: int = 5
    knots: int = 4               # spline control points per trajectory
    travel_ft: float = 8.0       # formation trajectory movement scale
    ball_motifs: int = 0         # >0: ball paths drawn from a shared pool
    min_separation_ft: float = 12.0  # mean per-agent anchor gap between formations

    def __post_init__(self):
        if self.formations < 1:
            raise ValueError("formations must be >= 1")
        if self.noise_ft < 0:
            raise ValueError("noise must be >= 0")


@dataclass(frozen=True)
class PlayLabel:
    play_id: str
    formation: int
    # scrambled agent i holds the formation-order agent order[i]
    offense_order: tuple
    defense_order: tuple


def _spline(anchor, knots, scale, n_frames, rng):
    """Smooth trajectory around an anchor point: linear interpolation of a
    few Gaussian control points."""
    pts = anchor + rng.normal(0.0, scale, size=(knots, 2))
    t_knots = np.linspace(0.0, 1.0, knots)
    t = np.linspace(0.0, 1.0, n_frames)
    return np.stack([np.interp(t, t_knots, pts[:, c]) for c in (0, 1)], axis=1)


def _clip_court(xy):
    out = xy.copy()
    out[..., 0] = np.clip(out[..., 0], 0.5, COURT_LENGTH - 0.5)
    out[..., 1] = np.clip(out[..., 1], 0.5, COURT_WIDTH - 0.5)
    return out


def generate_synthetic(spec: SyntheticSpec):
    """Draw a labeled corpus of plays around latent formations.

    Each formation owns anchor positions and a base trajectory per agent.
    Each play perturbs the base trajectories with a smooth wander plus
    white noise (both scaled by ``noise_ft``), then scrambles the agent
    order per team.  Returns ``(plays, labels)`` with ``labels`` keyed by
    play id.
    """
    rng = np.random.default_rng(spec.seed)
    m = spec.players_per_team
    n_frames = spec.window_seconds * spec.sample_rate

    anchors = []  # (formation, 2m, 2)
    for _ in range(spec.formations):
        for _attempt in range(1000):
            cand = np.column_stack([
                rng.uniform(_X_LO, _X_HI, size=2 * m),
                rng.uniform(_Y_LO, _Y_HI, size=2 * m)])
            if all(np.linalg.norm(cand - a, axis=1).mean() >= spec.min_separation_ft
                   for a in anchors):
                anchors.append(cand)
                break
        else:
            raise RuntimeError("could not place formations far enough apart; "
                               "lower min_separation_ft or formations")

    base = np.stack([
        np.stack([_spline(a[i], spec.knots, spec.travel_ft, n_frames, rng)
                  for i in range(2 * m)])
        for a in anchors])  # (G, 2m, F, 2)

    if spec.ball_motifs > 0:
        motif_anchor = np.array([(_X_LO + _X_HI) / 2, (_Y_LO + _Y_HI) / 2])
        ball_pool = np.stack([
            _spline(motif_anchor, spec.knots, spec.travel_ft * 1.5, n_frames, rng)
            for _ in range(spec.ball_motifs)])
    else:
        ball_pool = np.stack([
            _spline(anchors[g][:m].mean(axis=0), spec.knots, spec.travel_ft,
                    n_frames, rng)
            for g in range(spec.formations)])

    plays: list[Play] = []
    labels: dict[str, PlayLabel] = {}
    wander = 2.0 * spec.noise_ft
    for g in range(spec.formations):
        for j in range(spec.plays_per_formation):
            traj = base[g].copy()
            if spec.noise_ft > 0:
                for i in range(2 * m):
                    traj[i] += _spline(np.zeros(2), spec.knots, wander,
                                       n_frames, rng)
                traj += rng.normal(0.0, spec.noise_ft, size=traj.shape)
            traj = _clip_court(traj)

            off_order = rng.permutation(m)
            def_order = rng.permutation(m)
            agents = np.concatenate([traj[:m][off_order],
                                     traj[m:][def_order]])

            if spec.ball_motifs > 0:
                motif = int(rng.integers(spec.ball_motifs))
            else:
                motif = g
            ball_xy = ball_pool[motif].copy()
            if spec.noise_ft > 0:
                ball_xy += rng.normal(0.0, spec.noise_ft, size=ball_xy.shape)
            ball_xy = _clip_court(ball_xy)
            ball_z = np.clip(4.0 + rng.normal(0.0, 0.5, size=n_frames), 0.0, None) \
                if spec.noise_ft > 0 else np.full(n_frames, 4.0)
            ball = np.column_stack([ball_xy, ball_z])

            pid = f"syn{g:03d}_{j:05d}"
            plays.append(Play(play_id=pid, game_id=f"synth{spec.seed}",
                              start_time=0.0,
                              window_seconds=spec.window_seconds,
                              agents=agents, ball=ball, n_offense=m,
                              sample_rate=spec.sample_rate))
            labels[pid] = PlayLabel(play_id=pid, formation=g,
                                    offense_order=tuple(int(i) for i in off_order),
                                    defense_order=tuple(int(i) for i in def_order))
    return plays, labels


def write_labels(path, labels) -> None:
    """Sidecar label file: play_id, formation_label, true_permutation."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["play_id", "formation_label", "true_permutation"])
        for lbl in labels.values():
            perm = "-".join(map(str, lbl.offense_order)) + "|" + \
                   "-".join(map(str, lbl.defense_order))
            writer.writerow([lbl.play_id, lbl.formation, perm])


def read_labels(path) -> dict:
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            off_s, def_s = row["true_permutation"].split("|")
            out[row["play_id"]] = PlayLabel(
                play_id=row["play_id"],
                formation=int(row["formation_label"]),
                offense_order=tuple(int(i) for i in off_s.split("-")),
                defense_order=tuple(int(i) for i in def_s.split("-")))
    return out
