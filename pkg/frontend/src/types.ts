/** Wire types mirroring the query service's JSON payloads. */

/** Frame-major play payload: agents_xy is (frames, agents, 2), offense
 *  agents first; ball_xyz is (frames, 3). */
export interface PlayPayload {
  play_id: string;
  game_id: string;
  start_time: number;
  window_seconds: number;
  sample_rate: number;
  n_offense: number;
  agents_xy: number[][][];
  ball_xyz: number[][];
}

export interface RankedItem {
  play_id: string;
  rank: number;
  distance: number;
  play: PlayPayload;
}

export interface QueryRequest {
  play?: PlayPayload;
  play_id?: string;
  selected: string[];
  k?: number;
  method?: "tree" | "baseline";
  boosts?: Record<string, number>;
}

export interface QueryResponse {
  method: string;
  selected: string[];
  query_aligned: PlayPayload;
  results: RankedItem[];
}

export interface IndexStats {
  windows: number[];
  play_count: number;
  trees: Record<
    string,
    {
      depth: number;
      node_count: number;
      leaf_count: number;
      leaf_size_histogram: Record<string, number>;
      layer_costs: number[];
    }
  >;
}

/** All selectable trajectory tokens for a play: o0..o4, d0..d4, ball. */
export function agentTokens(play: PlayPayload): string[] {
  const total = play.agents_xy[0]?.length ?? 0;
  const tokens: string[] = [];
  for (let i = 0; i < play.n_offense; i++) tokens.push(`o${i}`);
  for (let i = 0; i < total - play.n_offense; i++) tokens.push(`d${i}`);
  tokens.push("ball");
  return tokens;
}
