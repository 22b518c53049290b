/** Test fixtures: synthetic play payloads and a stub query service. */

import type { FetchLike } from "../src/api";
import type { PlayPayload, QueryRequest, RankedItem } from "../src/types";

export function makePlay(id: string, frames = 4, nOffense = 5, total = 10): PlayPayload {
  const agents_xy: number[][][] = [];
  const ball_xyz: number[][] = [];
  for (let f = 0; f < frames; f++) {
    const frame: number[][] = [];
    for (let a = 0; a < total; a++) {
      frame.push([10 + a * 5 + f, 5 + a * 4]);
    }
    agents_xy.push(frame);
    ball_xyz.push([47 + f, 25, 4]);
  }
  return {
    play_id: id,
    game_id: "g",
    start_time: 0,
    window_seconds: 2,
    sample_rate: 2,
    n_offense: nOffense,
    agents_xy,
    ball_xyz,
  };
}

export interface StubRecord {
  url: string;
  init?: RequestInit;
  body?: QueryRequest;
}

/** In-memory service double; records every request it answers. */
export class StubService {
  requests: StubRecord[] = [];
  plays = new Map<string, PlayPayload>();
  resultsByMethod: Record<string, RankedItem[]> = {};

  addPlay(play: PlayPayload): void {
    this.plays.set(play.play_id, play);
  }

  setResults(method: string, ids: string[]): void {
    this.resultsByMethod[method] = ids.map((pid, i) => ({
      play_id: pid,
      rank: i + 1,
      distance: (i + 1) * 1.5,
      play: this.plays.get(pid) ?? makePlay(pid),
    }));
  }

  fetch: FetchLike = async (url, init) => {
    const record: StubRecord = { url, init };
    if (init?.body) record.body = JSON.parse(init.body as string);
    this.requests.push(record);

    if (url.endsWith("/query") && init?.method === "POST") {
      const req = record.body as QueryRequest;
      const method = req.method ?? "tree";
      const exemplar =
        (req.play_id && this.plays.get(req.play_id)) || req.play;
      if (!exemplar) return jsonResponse(404, { detail: "unknown play" });
      return jsonResponse(200, {
        method,
        selected: req.selected,
        query_aligned: exemplar,
        results: this.resultsByMethod[method] ?? [],
      });
    }
    const playMatch = url.match(/\/plays\/([^/]+)$/);
    if (playMatch) {
      const play = this.plays.get(decodeURIComponent(playMatch[1]));
      if (!play) return jsonResponse(404, { detail: "unknown play" });
      return jsonResponse(200, play);
    }
    if (url.endsWith("/index/stats")) {
      return jsonResponse(200, {
        windows: [2],
        play_count: this.plays.size,
        trees: {},
      });
    }
    return jsonResponse(404, { detail: `no route for ${url}` });
  };
}

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
