"""Tracking-data file format, play extraction and the play store."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from playtree.model import (COURT_LENGTH, COURT_WIDTH, DEFAULT_SAMPLE_RATE,
                            Play, RosterConfig)

HEADER = "time_s,team_id,player_id,action_id,x_ft,y_ft,z_ft"
BALL_TEAM = -1
BALL_PLAYER = -1
GAP_FACTOR = 1.5  # cadence break beyond 1.5 frame intervals ends a chunk


class TrackingFormatError(ValueError):
    """Malformed tracking file; message carries the offending line number."""


@dataclass
class RawFrame:
    timestamp: float
    players: dict          # (team_id, player_id) -> (x, y, z)
    ball: tuple | None = None
    actions: dict = field(default_factory=dict)  # (team_id, player_id) -> action_id


@dataclass
class GameStream:
    game_id: str
    frames: list
    sample_rate: int = DEFAULT_SAMPLE_RATE

    @property
    def duration(self) -> float:
        if not self.frames:
            return 0.0
        return self.frames[-1].timestamp - self.frames[0].timestamp


def _fmt(x: float) -> str:
    return repr(float(x))


def serialize_tracking(stream: GameStream, path) -> None:
    """Write a game stream in the row-per-agent tracking format."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(HEADER + "\n")
        for fr in stream.frames:
            for (team, player), (x, y, z) in fr.players.items():
                action = fr.actions.get((team, player), 0)
                fh.write(f"{_fmt(fr.timestamp)},{team},{player},{action},"
                         f"{_fmt(x)},{_fmt(y)},{_fmt(z)}\n")
            bx, by, bz = fr.ball
            fh.write(f"{_fmt(fr.timestamp)},{BALL_TEAM},{BALL_PLAYER},0,"
                     f"{_fmt(bx)},{_fmt(by)},{_fmt(bz)}\n")


def parse_tracking(path, game_id: str | None = None,
                   sample_rate: int = DEFAULT_SAMPLE_RATE) -> GameStream:
    """Parse a tracking file into timestamp-grouped frames.

    Validates row shape, timestamp monotonicity, duplicate samples, the
    presence of a ball row per frame and a roughly regular cadence.
    """
    if game_id is None:
        game_id = os.path.splitext(os.path.basename(str(path)))[0]
    frames: list[RawFrame] = []
    current: RawFrame | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if lineno == 1 and line == HEADER:
                continue
            parts = line.split(",")
            if len(parts) != 7:
                raise TrackingFormatError(
                    f"line {lineno}: expected 7 fields, got {len(parts)}")
            try:
                t = float(parts[0])
                team = int(parts[1])
                player = int(parts[2])
                action = int(parts[3])
                x, y, z = float(parts[4]), float(parts[5]), float(parts[6])
            except ValueError as exc:
                raise TrackingFormatError(f"line {lineno}: {exc}") from exc
            if current is None or t != current.timestamp:
                if current is not None and t < current.timestamp:
                    raise TrackingFormatError(
                        f"line {lineno}: non-monotone timestamp {t}")
                if current is not None:
                    _close_frame(current, frames)
                current = RawFrame(timestamp=t, players={})
            key = (team, player)
            if team == BALL_TEAM:
                if current.ball is not None:
                    raise TrackingFormatError(
                        f"line {lineno}: duplicate ball sample at t={t}")
                current.ball = (x, y, z)
            else:
                if key in current.players:
                    raise TrackingFormatError(
                        f"line {lineno}: duplicate agent sample {key} at t={t}")
                current.players[key] = (x, y, z)
                current.actions[key] = action
    if current is not None:
        _close_frame(current, frames)
    _validate_frames(frames, sample_rate)
    return GameStream(game_id=game_id, frames=frames, sample_rate=sample_rate)


def _close_frame(frame: RawFrame, frames: list) -> None:
    if frame.ball is None:
        raise TrackingFormatError(
            f"frame at t={frame.timestamp} is missing the ball row")
    frames.append(frame)


def _validate_frames(frames, sample_rate) -> None:
    if not frames:
        return
    roster = set(frames[0].players)
    dt_nominal = 1.0 / sample_rate
    for i, fr in enumerate(frames):
        missing = roster - set(fr.players)
        extra = set(fr.players) - roster
        if missing or extra:
            raise TrackingFormatError(
                f"frame at t={fr.timestamp}: roster mismatch "
                f"(missing {sorted(missing)}, unexpected {sorted(extra)})")
        if i > 0:
            dt = fr.timestamp - frames[i - 1].timestamp
            if dt < 0.8 * dt_nominal:
                raise TrackingFormatError(
                    f"frame at t={fr.timestamp}: cadence {dt:.4f}s too fast "
                    f"for {sample_rate} Hz")
            if 1.2 * dt_nominal < dt <= GAP_FACTOR * dt_nominal:
                raise TrackingFormatError(
                    f"frame at t={fr.timestamp}: irregular cadence {dt:.4f}s")


def _chunks(frames, sample_rate):
    """Split frames into continuous runs at cadence gaps."""
    if not frames:
        return []
    limit = GAP_FACTOR / sample_rate
    runs = [[frames[0]]]
    for prev, fr in zip(frames, frames[1:]):
        if fr.timestamp - prev.timestamp > limit:
            runs.append([])
        runs[-1].append(fr)
    return runs


def _normalize_side(agents: np.ndarray, ball: np.ndarray, n_offense: int):
    """Rotate the court 180 degrees when the offense sits in the x < 47
    half, so all plays attack the same side."""
    if agents[:n_offense, :, 0].mean() >= COURT_LENGTH / 2:
        return agents, ball
    agents = agents.copy()
    ball = ball.copy()
    agents[..., 0] = COURT_LENGTH - agents[..., 0]
    agents[..., 1] = COURT_WIDTH - agents[..., 1]
    ball[:, 0] = COURT_LENGTH - ball[:, 0]
    ball[:, 1] = COURT_WIDTH - ball[:, 1]
    return agents, ball


def extract_windows(stream: GameStream, lengths, stride: float = 1.0,
                    config: RosterConfig | None = None,
                    offense_team: int | None = None) -> list[Play]:
    """Slide fixed-length windows over the continuous chunks of a game.

    Offense is the team whose nearest player to the ball at the window
    midpoint is closest (override with ``offense_team``); plays are
    court-side normalized.  Windows crossing cadence gaps are dropped.
    """
    config = config or RosterConfig(sample_rate=stream.sample_rate)
    rate = stream.sample_rate
    stride_frames = max(1, round(stride * rate))
    plays: list[Play] = []
    chunk_offset = 0  # global frame index of the chunk start, for unique ids
    for chunk in _chunks(stream.frames, rate):
        roster = sorted(chunk[0].players)
        teams = sorted({team for team, _ in roster})
        if len(teams) != 2:
            raise TrackingFormatError(f"expected 2 teams, found {teams}")
        by_team = {t: [k for k in roster if k[0] == t] for t in teams}
        for t in teams:
            if len(by_team[t]) != config.players_per_team:
                raise TrackingFormatError(
                    f"team {t} has {len(by_team[t])} players, "
                    f"expected {config.players_per_team}")
        # (n_frames, M, 3) in roster order
        coords = np.array([[fr.players[k] for k in roster] for fr in chunk])
        balls = np.array([fr.ball for fr in chunk])
        for length in sorted(lengths):
            f_count = length * rate
            if f_count > len(chunk):
                continue
            for start in range(0, len(chunk) - f_count + 1, stride_frames):
                window = coords[start:start + f_count]
                ball = balls[start:start + f_count]
                mid = f_count // 2
                if offense_team is not None:
                    off_team = offense_team
                else:
                    d = np.linalg.norm(window[mid, :, :2] - ball[mid, :2], axis=1)
                    off_team = roster[int(np.argmin(d))][0]
                def_team = teams[0] if off_team == teams[1] else teams[1]
                order = by_team[off_team] + by_team[def_team]
                cols = [roster.index(k) for k in order]
                agents = window[:, cols, :2].transpose(1, 0, 2)
                agents, ball_n = _normalize_side(agents, ball, config.players_per_team)
                t0 = chunk[start].timestamp
                plays.append(Play(
                    play_id=f"{stream.game_id}_{length}s_f{chunk_offset + start:06d}",
                    game_id=stream.game_id, start_time=t0,
                    window_seconds=length, agents=agents, ball=ball_n,
                    n_offense=config.players_per_team, sample_rate=rate))
        chunk_offset += len(chunk)
    return plays


# -- play store --------------------------------------------------------------


class PlayStore:
    """Append-only file-backed play database in the tracking row format.

    Layout: ``plays.trk`` holds the rows (offense as team 0, defense as
    team 1, players numbered by slot) and ``manifest.jsonl`` holds one
    metadata record per play with its row range.
    """

    ROWS = "plays.trk"
    MANIFEST = "manifest.jsonl"

    def __init__(self, root, create: bool = False):
        self.root = str(root)
        self._rows_path = os.path.join(self.root, self.ROWS)
        self._manifest_path = os.path.join(self.root, self.MANIFEST)
        self._meta: dict[str, dict] = {}
        self._lines: list[str] | None = None
        if create:
            os.makedirs(self.root, exist_ok=True)
            if not os.path.exists(self._rows_path):
                with open(self._rows_path, "w", encoding="utf-8") as fh:
                    fh.write(HEADER + "\n")
                open(self._manifest_path, "w", encoding="utf-8").close()
        if not os.path.exists(self._manifest_path):
            raise FileNotFoundError(f"no play store at {self.root}")
        with open(self._manifest_path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rec = json.loads(line)
                    self._meta[rec["play_id"]] = rec

    def __len__(self) -> int:
        return len(self._meta)

    def __contains__(self, play_id) -> bool:
        return play_id in self._meta

    def ids(self) -> list[str]:
        return list(self._meta)

    def _row_count(self) -> int:
        total = 0
        for rec in self._meta.values():
            total = max(total, rec["row_start"] + rec["row_count"])
        return total

    def append(self, play: Play) -> None:
        if play.play_id in self._meta:
            raise ValueError(f"play {play.play_id!r} already stored")
        row_start = self._row_count()
        rows = []
        rate = play.sample_rate
        for f in range(play.n_frames):
            t = play.start_time + f / rate
            for a in range(play.n_agents):
                team = 0 if a < play.n_offense else 1
                slot = a if a < play.n_offense else a - play.n_offense
                x, y = play.agents[a, f]
                rows.append(f"{_fmt(t)},{team},{slot},0,{_fmt(x)},{_fmt(y)},{_fmt(0.0)}")
            bx, by, bz = play.ball[f]
            rows.append(f"{_fmt(t)},{BALL_TEAM},{BALL_PLAYER},0,"
                        f"{_fmt(bx)},{_fmt(by)},{_fmt(bz)}")
        with open(self._rows_path, "a", encoding="utf-8") as fh:
            fh.write("\n".join(rows) + "\n")
        rec = {"play_id": play.play_id, "game_id": play.game_id,
               "start_time": play.start_time,
               "window_seconds": play.window_seconds,
               "sample_rate": play.sample_rate, "n_offense": play.n_offense,
               "row_start": row_start, "row_count": len(rows)}
        with open(self._manifest_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
        self._meta[play.play_id] = rec
        if self._lines is not None:
            self._lines.extend(rows)

    def extend(self, plays) -> None:
        for p in plays:
            self.append(p)

    def _load_lines(self) -> list[str]:
        if self._lines is None:
            with open(self._rows_path, encoding="utf-8") as fh:
                lines = fh.read().splitlines()
            self._lines = lines[1:] if lines and lines[0] == HEADER else lines
        return self._lines

    def get(self, play_id: str) -> Play:
        rec = self._meta.get(play_id)
        if rec is None:
            raise KeyError(play_id)
        lines = self._load_lines()
        rows = lines[rec["row_start"]: rec["row_start"] + rec["row_count"]]
        n_frames = rec["window_seconds"] * rec["sample_rate"]
        per_frame = rec["row_count"] // n_frames
        n_agents = per_frame - 1
        agents = np.empty((n_agents, n_frames, 2))
        ball = np.empty((n_frames, 3))
        for f in range(n_frames):
            block = rows[f * per_frame:(f + 1) * per_frame]
            for row in block:
                parts = row.split(",")
                team, slot = int(parts[1]), int(parts[2])
                x, y, z = float(parts[4]), float(parts[5]), float(parts[6])
                if team == BALL_TEAM:
                    ball[f] = (x, y, z)
                else:
                    a = slot if team == 0 else rec["n_offense"] + slot
                    agents[a, f] = (x, y)
        return Play(play_id=rec["play_id"], game_id=rec["game_id"],
                    start_time=rec["start_time"],
                    window_seconds=rec["window_seconds"], agents=agents,
                    ball=ball, n_offense=rec["n_offense"],
                    sample_rate=rec["sample_rate"])

    def __iter__(self):
        for pid in self._meta:
            yield self.get(pid)
