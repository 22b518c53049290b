"""Shared domain types: frames, plays, permutations, templates."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

COURT_LENGTH = 94.0
COURT_WIDTH = 50.0
DEFAULT_SAMPLE_RATE = 25
WINDOW_SECONDS = (1, 2, 3, 4, 5)


@dataclass(frozen=True)
class RosterConfig:
    players_per_team: int = 5
    teams: int = 2
    sample_rate: int = DEFAULT_SAMPLE_RATE

    @property
    def total_players(self) -> int:
        return self.players_per_team * self.teams


@dataclass(frozen=True)
class Frame:
    """One sampled instant: per-agent 2-D positions plus the 3-D ball."""

    timestamp: float
    agents: tuple  # ((x, y), ...) in play agent order, offense first
    ball: tuple  # (x, y, z)


@dataclass
class Play:
    """Fixed-length window of agent trajectories.

    ``agents`` has shape (M_total, F, 2) with offense agents first;
    ``ball`` has shape (F, 3).  Instances are treated as immutable.
    """

    play_id: str
    game_id: str
    start_time: float
    window_seconds: int
    agents: np.ndarray
    ball: np.ndarray
    n_offense: int = 5
    sample_rate: int = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        self.agents = np.asarray(self.agents, dtype=np.float64)
        self.ball = np.asarray(self.ball, dtype=np.float64)

    @property
    def n_frames(self) -> int:
        return self.agents.shape[1]

    @property
    def n_agents(self) -> int:
        return self.agents.shape[0]

    @property
    def offense(self) -> np.ndarray:
        return self.agents[: self.n_offense]

    @property
    def defense(self) -> np.ndarray:
        return self.agents[self.n_offense:]

    def team(self, scope: str) -> np.ndarray:
        if scope == "offense":
            return self.offense
        if scope == "defense":
            return self.defense
        raise ValueError(f"unknown team scope {scope!r}")

    @property
    def frames(self) -> list[Frame]:
        out = []
        for f in range(self.n_frames):
            ts = self.start_time + f / self.sample_rate
            out.append(Frame(
                timestamp=ts,
                agents=tuple(tuple(p) for p in self.agents[:, f, :]),
                ball=tuple(self.ball[f]),
            ))
        return out

    @classmethod
    def from_frames(cls, play_id, game_id, window_seconds, frames,
                    n_offense=5, sample_rate=DEFAULT_SAMPLE_RATE) -> "Play":
        agents = np.stack([[fr.agents[a] for fr in frames]
                           for a in range(len(frames[0].agents))])
        ball = np.array([fr.ball for fr in frames], dtype=np.float64)
        return cls(play_id=play_id, game_id=game_id,
                   start_time=frames[0].timestamp,
                   window_seconds=window_seconds, agents=agents, ball=ball,
                   n_offense=n_offense, sample_rate=sample_rate)

    def with_agents(self, agents: np.ndarray) -> "Play":
        return replace(self, agents=np.asarray(agents, dtype=np.float64))

    def to_dict(self) -> dict:
        # Frame-major trajectories for wire/UI consumption.
        return {
            "play_id": self.play_id,
            "game_id": self.game_id,
            "start_time": self.start_time,
            "window_seconds": self.window_seconds,
            "sample_rate": self.sample_rate,
            "n_offense": self.n_offense,
            "agents_xy": self.agents.transpose(1, 0, 2).tolist(),
            "ball_xyz": self.ball.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Play":
        agents = np.asarray(d["agents_xy"], dtype=np.float64).transpose(1, 0, 2)
        return cls(play_id=d["play_id"], game_id=d.get("game_id", ""),
                   start_time=float(d.get("start_time", 0.0)),
                   window_seconds=int(d["window_seconds"]),
                   agents=agents,
                   ball=np.asarray(d["ball_xyz"], dtype=np.float64),
                   n_offense=int(d.get("n_offense", 5)),
                   sample_rate=int(d.get("sample_rate", DEFAULT_SAMPLE_RATE)))


@dataclass(frozen=True)
class PermutationMap:
    """Agent reordering for one team: ``mapping[slot] = source agent index``."""

    mapping: tuple

    def __post_init__(self):
        m = tuple(int(i) for i in self.mapping)
        object.__setattr__(self, "mapping", m)
        if sorted(m) != list(range(len(m))):
            raise ValueError(f"mapping {m} is not a bijection")

    def __len__(self) -> int:
        return len(self.mapping)

    @classmethod
    def identity(cls, n: int) -> "PermutationMap":
        return cls(tuple(range(n)))

    @property
    def is_identity(self) -> bool:
        return self.mapping == tuple(range(len(self.mapping)))

    def inverse(self) -> "PermutationMap":
        inv = [0] * len(self.mapping)
        for slot, src in enumerate(self.mapping):
            inv[src] = slot
        return PermutationMap(tuple(inv))

    def then(self, nxt: "PermutationMap") -> "PermutationMap":
        """Composition: apply ``self`` first, then ``nxt``."""
        return PermutationMap(tuple(self.mapping[j] for j in nxt.mapping))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.mapping, dtype=np.int64)


@dataclass
class Template:
    """Canonical per-slot trajectories for one team at a tree node."""

    positions: np.ndarray  # (M_team, F, 2)
    team_scope: str = "offense"

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64)
        if self.team_scope not in ("offense", "defense"):
            raise ValueError(f"unknown team scope {self.team_scope!r}")
        if not np.isfinite(self.positions).all():
            raise ValueError("template contains non-finite coordinates")

    @property
    def n_slots(self) -> int:
        return self.positions.shape[0]


def validate_play(play: Play, config: RosterConfig | None = None) -> list[str]:
    """Return every invariant violation; an empty list means the play is ok."""
    config = config or RosterConfig()
    violations = []
    expected_frames = play.window_seconds * play.sample_rate
    if play.n_frames != expected_frames:
        violations.append(
            f"frame count {play.n_frames} != {expected_frames} "
            f"({play.window_seconds}s at {play.sample_rate} Hz)")
    if play.window_seconds not in WINDOW_SECONDS:
        violations.append(f"window length {play.window_seconds}s not in {WINDOW_SECONDS}")
    if play.n_agents != config.total_players:
        violations.append(f"agent count {play.n_agents} != {config.total_players}")
    if play.n_offense != config.players_per_team:
        violations.append(
            f"offense size {play.n_offense} != {config.players_per_team}")
    if play.ball.shape != (play.n_frames, 3):
        violations.append(f"ball shape {play.ball.shape} != ({play.n_frames}, 3)")
    if not np.isfinite(play.agents).all() or not np.isfinite(play.ball).all():
        violations.append("non-finite coordinates")
    else:
        x, y = play.agents[..., 0], play.agents[..., 1]
        if (x < 0).any() or (x > COURT_LENGTH).any() or (y < 0).any() or (y > COURT_WIDTH).any():
            violations.append("agent position out of court bounds")
        bx, by, bz = play.ball[:, 0], play.ball[:, 1], play.ball[:, 2]
        if (bx < 0).any() or (bx > COURT_LENGTH).any() or (by < 0).any() or (by > COURT_WIDTH).any():
            violations.append("ball position out of court bounds")
        if (bz < 0).any():
            violations.append("ball z below floor")
    return violations


def agent_tokens(play: Play) -> list[str]:
    """All selectable trajectory tokens for a play: o0..o4, d0..d4, ball."""
    off = [f"o{i}" for i in range(play.n_offense)]
    def_ = [f"d{i}" for i in range(play.n_agents - play.n_offense)]
    return off + def_ + ["ball"]


def parse_selection(play: Play, selected: Sequence[str]) -> tuple[list[int], bool]:
    """Resolve selection tokens to global agent indices and a ball flag."""
    if not selected:
        raise ValueError("selection must be non-empty")
    indices = []
    ball = False
    n_def = play.n_agents - play.n_offense
    for tok in selected:
        if tok == "ball":
            ball = True
        elif tok.startswith("o"):
            i = int(tok[1:])
            if not 0 <= i < play.n_offense:
                raise ValueError(f"unknown offense agent {tok!r}")
            indices.append(i)
        elif tok.startswith("d"):
            i = int(tok[1:])
            if not 0 <= i < n_def:
                raise ValueError(f"unknown defense agent {tok!r}")
            indices.append(play.n_offense + i)
        else:
            raise ValueError(f"unknown selection token {tok!r}")
    return sorted(set(indices)), ball


def flatten(play: Play, selected: Sequence[str] | None = None) -> np.ndarray:
    """Flatten selected trajectories to a frame-major vector.

    Layout: frame 0's selected agents (x, y each, in play order) then the
    ball (x, y, z) if selected; then frame 1, and so on.  Length is
    F * (2 * n_selected_agents + 3 * ball_selected).
    """
    if selected is None:
        indices = list(range(play.n_agents))
        ball = True
    else:
        indices, ball = parse_selection(play, selected)
    if not indices and not ball:
        raise ValueError("selection must include at least one trajectory")
    parts = []
    if indices:
        # (F, n_sel, 2)
        parts.append(play.agents[indices].transpose(1, 0, 2).reshape(play.n_frames, -1))
    if ball:
        parts.append(play.ball)
    return np.concatenate(parts, axis=1).ravel()


def flatten_columns(n_offense: int, n_defense: int, n_frames: int,
                    agent_indices: Sequence[int], ball: bool) -> np.ndarray:
    """Column indices of the given agents/ball within a full ``flatten``.

    Lets subset distances be computed by slicing full flattened vectors.
    """
    per_frame = 2 * (n_offense + n_defense) + 3
    cols = []
    base = np.arange(n_frames) * per_frame
    for a in agent_indices:
        cols.append(base + 2 * a)
        cols.append(base + 2 * a + 1)
    if ball:
        off = 2 * (n_offense + n_defense)
        for k in range(3):
            cols.append(base + off + k)
    return np.sort(np.concatenate(cols))
