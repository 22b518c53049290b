"""Domain types: plays, permutations, selection tokens, flattening."""

import numpy as np
import pytest

from playtree.model import (COURT_LENGTH, Play, PermutationMap, RosterConfig,
                            Template, agent_tokens, flatten, flatten_columns,
                            parse_selection, validate_play)

from conftest import random_play


def test_play_round_trip():
    play = random_play(np.random.default_rng(0))
    clone = Play.from_dict(play.to_dict())
    assert clone.play_id == play.play_id
    assert np.array_equal(clone.agents, play.agents)
    assert np.array_equal(clone.ball, play.ball)
    assert clone.window_seconds == play.window_seconds


def test_play_frames_round_trip():
    play = random_play(np.random.default_rng(1))
    rebuilt = Play.from_frames(play.play_id, play.game_id, play.window_seconds,
                               play.frames, n_offense=play.n_offense,
                               sample_rate=play.sample_rate)
    assert np.allclose(rebuilt.agents, play.agents)
    assert np.allclose(rebuilt.ball, play.ball)


def test_team_views():
    play = random_play(np.random.default_rng(2))
    assert play.offense.shape == (5, play.n_frames, 2)
    assert play.defense.shape == (5, play.n_frames, 2)
    assert np.array_equal(play.team("offense"), play.offense)
    with pytest.raises(ValueError):
        play.team("referees")


def test_permutation_map_basics():
    p = PermutationMap((2, 0, 1))
    assert p.inverse().mapping == (1, 2, 0)
    assert p.then(p.inverse()).is_identity
    assert p.inverse().then(p).is_identity
    assert PermutationMap.identity(3).is_identity
    with pytest.raises(ValueError):
        PermutationMap((0, 0, 1))


def test_permutation_composition_matches_sequential_apply():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(5, 4))
    p1 = PermutationMap(tuple(rng.permutation(5)))
    p2 = PermutationMap(tuple(rng.permutation(5)))
    step = x[p1.as_array()][p2.as_array()]
    composed = x[p1.then(p2).as_array()]
    assert np.array_equal(step, composed)


def test_validate_play_clean():
    play = random_play(np.random.default_rng(4))
    assert validate_play(play) == []


def test_validate_play_violations():
    play = random_play(np.random.default_rng(5))
    play.agents[0, 0, 0] = COURT_LENGTH + 10
    play.ball[3, 2] = -1.0
    bad_window = Play(play_id="x", game_id="g", start_time=0.0,
                      window_seconds=9, agents=play.agents, ball=play.ball)
    problems = validate_play(play)
    assert any("out of court" in p for p in problems)
    assert any("below floor" in p for p in problems)
    assert any("window length" in p for p in validate_play(bad_window))
    assert any("agent count" in p for p in
               validate_play(play, RosterConfig(players_per_team=4)))


def test_selection_tokens():
    play = random_play(np.random.default_rng(6))
    assert agent_tokens(play) == ["o0", "o1", "o2", "o3", "o4",
                                  "d0", "d1", "d2", "d3", "d4", "ball"]
    indices, ball = parse_selection(play, ["o1", "d0", "ball", "o1"])
    assert indices == [1, 5]
    assert ball
    with pytest.raises(ValueError):
        parse_selection(play, ["o9"])
    with pytest.raises(ValueError):
        parse_selection(play, ["referee"])
    with pytest.raises(ValueError):
        parse_selection(play, [])


def test_flatten_full_layout():
    play = random_play(np.random.default_rng(7))
    vec = flatten(play)
    per_frame = 2 * play.n_agents + 3
    assert vec.shape == (play.n_frames * per_frame,)
    # frame 0: agent 0 x/y first, ball xyz last
    assert vec[0] == play.agents[0, 0, 0]
    assert vec[1] == play.agents[0, 0, 1]
    assert np.array_equal(vec[per_frame - 3: per_frame], play.ball[0])


def test_flatten_columns_match_subset_flatten():
    play = random_play(np.random.default_rng(8))
    full = flatten(play)
    for selected in (["o0", "o3", "ball"], ["d1"], ["ball"],
                     agent_tokens(play)):
        indices, ball = parse_selection(play, selected)
        cols = flatten_columns(play.n_offense, play.n_agents - play.n_offense,
                               play.n_frames, indices, ball)
        assert np.array_equal(full[cols], flatten(play, selected))


def test_template_validation():
    t = Template(np.zeros((5, 10, 2)), "offense")
    assert t.n_slots == 5
    with pytest.raises(ValueError):
        Template(np.zeros((5, 10, 2)), "crowd")
    with pytest.raises(ValueError):
        Template(np.full((5, 10, 2), np.nan))
