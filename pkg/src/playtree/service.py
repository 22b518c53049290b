"""HTTP query service exposing the retrieval pipeline.

Endpoints: POST /query, GET /plays/{id}, GET /index/stats, POST /index/load.
The index is immutable once loaded; reloads build the new index fully and
then swap the handle atomically, so in-flight queries finish on the old one.
"""

from __future__ import annotations

import os

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from playtree.ingest import PlayStore
from playtree.model import Play, validate_play
from playtree.retrieval import (PlayIndex, Query, UnknownWindowError,
                                _apply_maps, baseline_query, query)

METHODS = ("tree", "baseline")


class QueryBody(BaseModel):
    play: dict | None = None       # wire-format Play payload
    play_id: str | None = None     # or an indexed play to use as exemplar
    selected: list[str]
    k: int | None = None
    method: str | None = None
    boosts: dict[str, float] = Field(default_factory=dict)


class LoadBody(BaseModel):
    index_path: str
    store_path: str


def _load_index(index_path: str, store_path: str) -> PlayIndex:
    return PlayIndex.load(index_path, PlayStore(store_path))


def create_app(index_path: str | None = None, store_path: str | None = None,
               default_k: int = 10, default_method: str = "tree") -> FastAPI:
    """Build the service app; paths default to PLAYTREE_INDEX_PATH and
    PLAYTREE_STORE_PATH environment variables when unset."""
    index_path = index_path or os.environ.get("PLAYTREE_INDEX_PATH")
    store_path = store_path or os.environ.get("PLAYTREE_STORE_PATH")
    default_k = int(os.environ.get("PLAYTREE_DEFAULT_K", default_k))
    default_method = os.environ.get("PLAYTREE_METHOD", default_method)
    if default_method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")

    app = FastAPI(title="playtree query service")
    app.state.index = None
    app.state.default_k = default_k
    app.state.default_method = default_method
    if index_path and store_path:
        app.state.index = _load_index(index_path, store_path)

    def current_index() -> PlayIndex:
        index = app.state.index
        if index is None:
            raise HTTPException(status_code=503, detail="index not loaded")
        return index

    @app.post("/query")
    def submit_query(body: QueryBody):
        index = current_index()
        method = body.method or app.state.default_method
        if method not in METHODS:
            raise HTTPException(status_code=400,
                                detail=f"method must be one of {METHODS}")
        if (body.play is None) == (body.play_id is None):
            raise HTTPException(status_code=400,
                                detail="provide exactly one of play, play_id")
        if body.play_id is not None:
            play = index.plays.get(body.play_id)
            if play is None:
                raise HTTPException(status_code=404,
                                    detail=f"unknown play {body.play_id!r}")
        else:
            try:
                play = Play.from_dict(body.play)
            except (KeyError, ValueError, TypeError) as exc:
                raise HTTPException(status_code=400,
                                    detail=f"malformed play: {exc}")
            problems = validate_play(play)
            if problems:
                raise HTTPException(status_code=400,
                                    detail="invalid play: " + "; ".join(problems))
        try:
            q = Query(play=play, selected=body.selected,
                      k=body.k or app.state.default_k, boosts=body.boosts)
            if method == "tree":
                results = query(index, q)
                aligned, _, _, _ = index.trees[play.window_seconds].align(play)
            else:
                results = baseline_query(index, q)
                aligned = _baseline_aligned(index, play)
        except UnknownWindowError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

        payload = []
        for r in results:
            off_map, def_map = r.correspondence
            cand = _apply_maps(index.plays[r.play_id], off_map.mapping,
                               def_map.mapping)
            payload.append({"play_id": r.play_id, "rank": r.rank,
                            "distance": r.distance,
                            "play": cand.to_dict()})
        return {"method": method, "selected": list(body.selected),
                "query_aligned": aligned.to_dict(), "results": payload}

    @app.get("/plays/{play_id}")
    def get_play(play_id: str):
        index = current_index()
        play = index.plays.get(play_id)
        if play is None:
            raise HTTPException(status_code=404,
                                detail=f"unknown play {play_id!r}")
        return play.to_dict()

    @app.get("/index/stats")
    def index_stats():
        index = current_index()
        out = {}
        for w, tree in sorted(index.trees.items()):
            s = tree.stats()
            hist: dict[str, int] = {}
            for size in s["leaf_sizes"]:
                hist[str(size)] = hist.get(str(size), 0) + 1
            out[str(w)] = {"depth": s["depth"], "node_count": s["node_count"],
                           "leaf_count": s["leaf_count"],
                           "leaf_size_histogram": hist,
                           "layer_costs": s["layer_costs"]}
        return {"windows": sorted(index.trees), "play_count": len(index.plays),
                "trees": out}

    @app.post("/index/load")
    def index_load(body: LoadBody):
        try:
            new_index = _load_index(body.index_path, body.store_path)
        except (OSError, ValueError) as exc:
            raise HTTPException(status_code=400,
                                detail=f"could not load index: {exc}")
        app.state.index = new_index  # atomic handle swap
        return {"windows": sorted(new_index.trees),
                "play_count": len(new_index.plays)}

    return app


def _baseline_aligned(index: PlayIndex, play: Play) -> Play:
    """Query play aligned against the baseline's role templates."""
    from playtree.assignment import align_team_batch

    w = play.window_seconds
    if w not in index.baselines:
        raise UnknownWindowError(f"no baseline index for {w}s plays")
    b = index.baselines[w]
    p_off, _ = align_team_batch(b.role_off, play.offense[None], b.metric)
    p_def, _ = align_team_batch(b.role_def, play.defense[None], b.metric)
    return _apply_maps(play, tuple(int(i) for i in p_off[0]),
                       tuple(int(i) for i in p_def[0]))
