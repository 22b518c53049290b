import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { mount } from "../src/app";
import { highlightedTokens } from "../src/court";
import { galleryOrder } from "../src/gallery";
import type { QueryRequest } from "../src/types";
import { StubService, makePlay } from "./helpers";

function setup() {
  const stub = new StubService();
  stub.addPlay(makePlay("exemplar"));
  for (const pid of ["r1", "r2", "r3", "r4"]) stub.addPlay(makePlay(pid));
  stub.setResults("tree", ["r2", "r1", "r3"]);
  stub.setResults("baseline", ["r4", "r3"]);
  const root = document.createElement("div");
  document.body.replaceChildren(root);
  const app = mount(root, new ApiClient("", stub.fetch));
  return { stub, root, app };
}

function queryRequests(stub: StubService): QueryRequest[] {
  return stub.requests
    .filter((r) => r.url.endsWith("/query"))
    .map((r) => r.body as QueryRequest);
}

describe("app round-trip", () => {
  beforeEach(() => {
    document.body.replaceChildren();
  });

  it("submitted selected set equals the highlighted trajectories", async () => {
    const { stub, root, app } = setup();
    await app.loadExemplar("exemplar");
    // select {two players, ball} only
    app.selection.clear();
    app.selection.toggle("o1");
    app.selection.toggle("d4");
    app.selection.toggle("ball");
    const svg = root.querySelector(".court-host svg") as SVGSVGElement;
    expect(highlightedTokens(svg).sort()).toEqual(["ball", "d4", "o1"]);
    await app.submit();
    const sent = queryRequests(stub);
    expect(sent.length).toBe(2); // tree and baseline comparison
    for (const req of sent) {
      expect([...req.selected].sort()).toEqual(highlightedTokens(svg).sort());
    }
    expect(app.lastRequestSelected).toEqual(["o1", "d4", "ball"]);
  });

  it("gallery order equals the service response order", async () => {
    const { root, app } = setup();
    await app.loadExemplar("exemplar");
    await app.submit();
    expect(galleryOrder(root.querySelector(".tree-panel") as HTMLElement))
      .toEqual(["r2", "r1", "r3"]);
    expect(galleryOrder(root.querySelector(".baseline-panel") as HTMLElement))
      .toEqual(["r4", "r3"]);
  });

  it("clicking a result promotes it to the new exemplar", async () => {
    const { root, app } = setup();
    await app.loadExemplar("exemplar");
    await app.submit();
    const second = root.querySelector(
      '.tree-panel li.gallery-item[data-play-id="r1"]',
    ) as HTMLElement;
    second.dispatchEvent(new MouseEvent("click"));
    expect(app.exemplar?.play_id).toBe("r1");
    // new exemplar starts fully selected again
    expect(app.selection.selected().length).toBe(11);
  });

  it("skips the baseline panel when comparison is off", async () => {
    const { stub, root, app } = setup();
    await app.loadExemplar("exemplar");
    (root.querySelector(".compare") as HTMLInputElement).checked = false;
    await app.submit();
    expect(queryRequests(stub).length).toBe(1);
    expect((root.querySelector(".baseline-panel") as HTMLElement).children.length).toBe(0);
  });

  it("reports unknown exemplars without crashing", async () => {
    const { root, app } = setup();
    await app.loadExemplar("missing");
    expect(app.exemplar).toBeNull();
    expect((root.querySelector(".status") as HTMLElement).textContent)
      .toMatch(/404|unknown/);
  });

  it("refuses to submit an empty selection", async () => {
    const { stub, root, app } = setup();
    await app.loadExemplar("exemplar");
    app.selection.clear();
    await app.submit();
    expect(queryRequests(stub).length).toBe(0);
    expect((root.querySelector(".status") as HTMLElement).textContent)
      .toMatch(/select at least one/);
  });

  it("offers a retry when the service is unreachable", async () => {
    const stub = new StubService();
    stub.addPlay(makePlay("exemplar"));
    const root = document.createElement("div");
    document.body.replaceChildren(root);
    let fail = true;
    const flaky: typeof stub.fetch = async (url, init) => {
      if (fail && url.endsWith("/query")) throw new Error("connection refused");
      return stub.fetch(url, init);
    };
    const app = mount(root, new ApiClient("", flaky));
    await app.loadExemplar("exemplar");
    await app.submit();
    const status = root.querySelector(".status") as HTMLElement;
    expect(status.textContent).toMatch(/unreachable/);
    const retry = status.querySelector("button.retry") as HTMLButtonElement;
    expect(retry).not.toBeNull();
    fail = false;
    stub.setResults("tree", []);
    stub.setResults("baseline", []);
    retry.dispatchEvent(new MouseEvent("click"));
    await new Promise((r) => setTimeout(r, 0));
    expect(status.textContent).toMatch(/0 results/);
  });
});
