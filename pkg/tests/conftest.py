import numpy as np
import pytest

from playtree.model import Play
from playtree.synthetic import SyntheticSpec, generate_synthetic


def random_play(rng, play_id="p0", window_seconds=2, sample_rate=25,
                players_per_team=5):
    n_frames = window_seconds * sample_rate
    agents = np.stack([
        rng.uniform(1, 93, size=(2 * players_per_team, n_frames)),
        rng.uniform(1, 49, size=(2 * players_per_team, n_frames)),
    ], axis=-1)
    ball = np.column_stack([
        rng.uniform(1, 93, size=n_frames),
        rng.uniform(1, 49, size=n_frames),
        rng.uniform(0, 10, size=n_frames),
    ])
    return Play(play_id=play_id, game_id="g0", start_time=0.0,
                window_seconds=window_seconds, agents=agents, ball=ball,
                n_offense=players_per_team, sample_rate=sample_rate)


@pytest.fixture(scope="session")
def small_corpus():
    """4 formations x 30 plays, 2 s windows; cached for the whole run."""
    spec = SyntheticSpec(formations=4, plays_per_formation=30, noise_ft=1.0,
                         seed=7, window_seconds=2)
    return generate_synthetic(spec)
