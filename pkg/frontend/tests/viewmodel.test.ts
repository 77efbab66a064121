import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import {
  InfeasibleError, ServiceClient, StaleRevisionError,
} from "../src/client.js";
import { ViewerModel } from "../src/viewmodel.js";
import type {
  DocumentBundle, InteractionBody, SessionPayload, SolutionDto, Viewport,
} from "../src/types.js";

const bundle: DocumentBundle = {
  schema_version: 1,
  templates: [{ id: "stack", rank: 1 }],
  elements: [
    {
      id: "story",
      alternatives: [
        { id: "story-brief", modality: "text", rank: 1, text: "Short." },
      ],
    },
  ],
};

function solutionAt(marker: number): SolutionDto {
  return {
    template_id: "stack",
    placements: [{ element_id: "story", alternative_id: "story-brief",
                   x: 0, y: marker, w: 10, h: 10, font_size: 12 }],
    tabstops: { x: {}, y: {} },
    total_loss: -marker,
    loss_breakdown: { size: 0 },
    flags: [],
  };
}

function payload(revision: number): SessionPayload {
  return {
    session_id: "sess-1",
    revision,
    solution: solutionAt(revision),
    assets: {},
  };
}

interface Deferred<T> {
  promise: Promise<T>;
  resolve(value: T): void;
  reject(err: unknown): void;
}

function deferred<T>(): Deferred<T> {
  let resolve!: (value: T) => void;
  let reject!: (err: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

/** Enough microtask turns to let the drain loop settle. */
async function flush(): Promise<void> {
  for (let i = 0; i < 12; i += 1) await Promise.resolve();
}

function makeFake() {
  let nextRevision = 2;
  const fake = {
    registerDocument: vi.fn(async (_bundle: unknown) =>
      ({ document_id: "doc-1" })),
    openSession: vi.fn(async (_doc: string, _vp: Viewport) => payload(1)),
    putViewport: vi.fn(async (_sid: string, _vp: Viewport, _rev: number) =>
      payload(nextRevision++)),
    putPreferences: vi.fn(async (_sid: string, _prefs: unknown, _rev: number) =>
      payload(nextRevision++)),
    postInteraction: vi.fn(
      async (_sid: string, _body: InteractionBody, _rev: number) =>
        payload(nextRevision++)),
    getSolution: vi.fn(async (_sid: string) => payload(nextRevision - 1)),
    assetUrl: (hash: string) => `http://svc.test/assets/${hash}`,
  };
  return fake;
}

type Fake = ReturnType<typeof makeFake>;

function makeModel(fake: Fake): ViewerModel {
  return new ViewerModel(fake as unknown as ServiceClient, bundle,
                         { width: 400, height: 300 },
                         { onChange: vi.fn() });
}

async function openModel(fake: Fake): Promise<ViewerModel> {
  const model = makeModel(fake);
  await model.open();
  return model;
}

beforeEach(() => {
  vi.useFakeTimers();
});

afterEach(() => {
  vi.useRealTimers();
});

describe("session lifecycle", () => {
  it("registers the bundle and adopts the opening payload", async () => {
    const fake = makeFake();
    const model = await openModel(fake);
    expect(fake.registerDocument).toHaveBeenCalledWith(bundle);
    expect(fake.openSession).toHaveBeenCalledWith(
      "doc-1", { width: 400, height: 300 });
    expect(model.sessionId).toBe("sess-1");
    expect(model.revision).toBe(1);
    expect(model.solution?.template_id).toBe("stack");
  });
});

describe("gesture to endpoint mapping", () => {
  it("sends zoom, template, and alternative gestures as interactions", async () => {
    const fake = makeFake();
    const model = await openModel(fake);
    model.zoomIn("story");
    await flush();
    model.zoomOut("story");
    await flush();
    model.switchTemplate("stack");
    await flush();
    model.switchAlternative("story", "story-brief");
    await flush();
    const kinds = fake.postInteraction.mock.calls.map((c: any[]) => c[1]);
    expect(kinds).toEqual([
      { kind: "zoom-in", element_id: "story" },
      { kind: "zoom-out", element_id: "story" },
      { kind: "switch-template", template_id: "stack" },
      { kind: "switch-alternative", element_id: "story",
        alternative_id: "story-brief" },
    ]);
  });

  it("carries the current revision as the expected revision", async () => {
    const fake = makeFake();
    const model = await openModel(fake);
    model.zoomIn("story");
    await flush();
    model.zoomIn("story");
    await flush();
    const expectations = fake.postInteraction.mock.calls
      .map((c: any[]) => c[2]);
    expect(expectations).toEqual([1, 2]);
    expect(model.revision).toBe(3);
  });

  it("toggles between pin and unpin across accepted responses", async () => {
    const fake = makeFake();
    const model = await openModel(fake);
    model.togglePin("story");
    await flush();
    expect(model.pinned.has("story")).toBe(true);
    model.togglePin("story");
    await flush();
    expect(model.pinned.has("story")).toBe(false);
    const kinds = fake.postInteraction.mock.calls
      .map((c: any[]) => c[1].kind);
    expect(kinds).toEqual(["pin", "unpin"]);
  });

  it("debounces slider drags into one request with the final value", async () => {
    const fake = makeFake();
    const model = await openModel(fake);
    model.setSlider("image", 0.6);
    vi.advanceTimersByTime(100);
    model.setSlider("image", 0.8);
    vi.advanceTimersByTime(100);
    model.setSlider("image", 1.0);
    await vi.advanceTimersByTimeAsync(150);
    await flush();
    expect(fake.postInteraction).toHaveBeenCalledTimes(1);
    expect(fake.postInteraction.mock.calls[0][1]).toEqual(
      { kind: "set-slider", modality: "image", value: 1.0 });
    expect(model.sliders.image).toBe(1.0);
  });

  it("debounces each slider modality independently", async () => {
    const fake = makeFake();
    const model = await openModel(fake);
    model.setSlider("image", 0.9);
    model.setSlider("text", 0.1);
    await vi.advanceTimersByTimeAsync(150);
    await flush();
    const bodies = fake.postInteraction.mock.calls.map((c: any[]) => c[1]);
    expect(bodies).toHaveLength(2);
    expect(bodies).toContainEqual(
      { kind: "set-slider", modality: "image", value: 0.9 });
    expect(bodies).toContainEqual(
      { kind: "set-slider", modality: "text", value: 0.1 });
  });

  it("debounces resizes into one viewport update with the final size", async () => {
    const fake = makeFake();
    const model = await openModel(fake);
    model.resize({ width: 900, height: 700 });
    vi.advanceTimersByTime(80);
    model.resize({ width: 800, height: 600 });
    await vi.advanceTimersByTimeAsync(150);
    await flush();
    expect(fake.putViewport).toHaveBeenCalledTimes(1);
    expect(fake.putViewport).toHaveBeenCalledWith(
      "sess-1", { width: 800, height: 600 }, 1);
  });
});

describe("concurrency", () => {
  it("keeps one mutation outstanding and lets the newest supersede", async () => {
    const fake = makeFake();
    const model = await openModel(fake);
    const first = deferred<SessionPayload>();
    const second = deferred<SessionPayload>();
    fake.postInteraction
      .mockReturnValueOnce(first.promise)
      .mockReturnValueOnce(second.promise);
    model.zoomIn("story");
    expect(model.pending).toBe(true);
    model.switchTemplate("stack");       // waits
    model.switchAlternative("story", "story-brief");  // replaces the wait
    expect(fake.postInteraction).toHaveBeenCalledTimes(1);
    first.resolve(payload(2));
    await flush();
    expect(fake.postInteraction).toHaveBeenCalledTimes(2);
    expect(fake.postInteraction.mock.calls[1][1].kind)
      .toBe("switch-alternative");
    second.resolve(payload(3));
    await flush();
    expect(model.pending).toBe(false);
    expect(model.revision).toBe(3);
  });

  it("refetches after a stale rejection and replays nothing", async () => {
    const fake = makeFake();
    const model = await openModel(fake);
    fake.postInteraction.mockRejectedValueOnce(new StaleRevisionError(7));
    fake.getSolution.mockResolvedValueOnce(payload(7));
    model.zoomIn("story");
    await flush();
    expect(fake.postInteraction).toHaveBeenCalledTimes(1);
    expect(fake.getSolution).toHaveBeenCalledTimes(1);
    expect(model.revision).toBe(7);
    expect(model.toast).toBeNull();
  });

  it("never adopts a payload older than the current revision", async () => {
    const fake = makeFake();
    const model = await openModel(fake);
    fake.postInteraction.mockResolvedValueOnce(payload(5));
    model.zoomIn("story");
    await flush();
    expect(model.revision).toBe(5);
    const before = model.solution;
    fake.postInteraction.mockResolvedValueOnce(payload(2));
    model.zoomIn("story");
    await flush();
    expect(model.revision).toBe(5);
    expect(model.solution).toBe(before);
  });
});

describe("failure handling", () => {
  it("shows a toast and keeps state on an infeasible rejection", async () => {
    const fake = makeFake();
    const model = await openModel(fake);
    fake.postInteraction.mockRejectedValueOnce(
      new InfeasibleError(["relaxed:template"], "no fit"));
    const before = model.solution;
    model.togglePin("story");
    await flush();
    expect(model.toast).toContain("no feasible layout");
    expect(model.toast).toContain("relaxed:template");
    expect(model.revision).toBe(1);
    expect(model.solution).toBe(before);
    expect(model.pinned.has("story")).toBe(false);
  });

  it("shows a toast and keeps state on a network failure", async () => {
    const fake = makeFake();
    const model = await openModel(fake);
    fake.postInteraction.mockRejectedValueOnce(new TypeError("fetch failed"));
    const before = model.solution;
    model.zoomIn("story");
    await flush();
    expect(model.toast).toContain("zoom failed");
    expect(model.revision).toBe(1);
    expect(model.solution).toBe(before);
    expect(model.pending).toBe(false);
  });

  it("clears the toast on its own after a few seconds", async () => {
    const fake = makeFake();
    const model = await openModel(fake);
    fake.postInteraction.mockRejectedValueOnce(new TypeError("fetch failed"));
    model.zoomIn("story");
    await flush();
    expect(model.toast).not.toBeNull();
    await vi.advanceTimersByTimeAsync(4000);
    expect(model.toast).toBeNull();
  });
});
