import { describe, expect, it } from "vitest";

import { ApiClient, ServiceError } from "../src/api";
import { StubService, makePlay } from "./helpers";

describe("ApiClient", () => {
  it("round-trips a query through the stub service", async () => {
    const stub = new StubService();
    stub.addPlay(makePlay("p1"));
    stub.setResults("tree", ["p1"]);
    const client = new ApiClient("", stub.fetch);
    const resp = await client.query({ play_id: "p1", selected: ["ball"] });
    expect(resp.method).toBe("tree");
    expect(resp.results.map((r) => r.play_id)).toEqual(["p1"]);
    expect(resp.selected).toEqual(["ball"]);
  });

  it("fetches play payloads and index stats", async () => {
    const stub = new StubService();
    stub.addPlay(makePlay("p2"));
    const client = new ApiClient("", stub.fetch);
    const play = await client.getPlay("p2");
    expect(play.play_id).toBe("p2");
    expect(play.agents_xy.length).toBe(4);
    const stats = await client.stats();
    expect(stats.play_count).toBe(1);
  });

  it("surfaces service errors with status and detail", async () => {
    const stub = new StubService();
    const client = new ApiClient("", stub.fetch);
    await expect(client.getPlay("nope")).rejects.toThrowError(ServiceError);
    try {
      await client.getPlay("nope");
    } catch (err) {
      expect((err as ServiceError).status).toBe(404);
      expect((err as ServiceError).message).toMatch(/unknown play/);
    }
  });
});
