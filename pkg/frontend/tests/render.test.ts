// @vitest-environment jsdom
import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { CLICK_DELAY_MS, renderViewer } from "../src/render.js";
import type { RenderGestures, RenderState } from "../src/render.js";
import type { DocumentBundle, SolutionDto } from "../src/types.js";

const bundle: DocumentBundle = {
  schema_version: 1,
  templates: [{ id: "stack", rank: 1 }, { id: "wide", rank: 2 }],
  elements: [
    {
      id: "figure",
      alternatives: [
        { id: "figure-photo", modality: "image", rank: 1, asset: "img/a.png" },
        { id: "figure-caption", modality: "text", rank: 2, text: "A caption." },
      ],
    },
    {
      id: "story",
      alternatives: [
        { id: "story-brief", modality: "text", rank: 1, text: "Short one." },
      ],
    },
    {
      id: "clip",
      alternatives: [
        { id: "clip-audio", modality: "audio", rank: 1, asset: "aud/c.ogg" },
      ],
    },
  ],
};

// deliberately non-integral coordinates: the renderer must copy them
// into the DOM verbatim, not round or re-derive them
const solution: SolutionDto = {
  template_id: "stack",
  placements: [
    { element_id: "figure", alternative_id: "figure-photo",
      x: 426.6666666666667, y: 234, w: 420, h: 260.5 },
    { element_id: "story", alternative_id: "story-brief",
      x: 12, y: 500.25, w: 190.5, h: 48, font_size: 13.333333333333334 },
    { element_id: "clip", alternative_id: "clip-audio",
      x: 0, y: 560, w: 120, h: 40 },
  ],
  tabstops: { x: {}, y: {} },
  total_loss: -1.0,
  loss_breakdown: { size: 0 },
  flags: [],
};

function gestureSpies(): RenderGestures {
  return {
    onZoomIn: vi.fn(),
    onZoomOut: vi.fn(),
    onTogglePin: vi.fn(),
    onSwitchTemplate: vi.fn(),
    onSwitchAlternative: vi.fn(),
    onSlider: vi.fn(),
  };
}

function makeState(overrides: Partial<RenderState> = {}): RenderState {
  return {
    bundle,
    solution,
    assets: { figure: "hash-1" },
    sliders: { image: 0.5, text: 0.5, audio: 0.5 },
    pinned: new Set<string>(),
    viewport: { width: 1280, height: 800 },
    revision: 3,
    pending: false,
    toast: null,
    assetUrl: (hash) => `http://svc.test/assets/${hash}`,
    gestures: gestureSpies(),
    ...overrides,
  };
}

function boxOf(root: HTMLElement, elementId: string): HTMLElement {
  const box = root.querySelector<HTMLElement>(
    `[data-element-id="${elementId}"]`);
  expect(box).not.toBeNull();
  return box!;
}

let root: HTMLElement;

beforeEach(() => {
  root = document.createElement("div");
  document.body.append(root);
});

afterEach(() => {
  root.remove();
  vi.useRealTimers();
});

describe("geometry", () => {
  it("copies solved coordinates into styles exactly", () => {
    renderViewer(root, makeState());
    const figure = boxOf(root, "figure");
    expect(figure.style.left).toBe("426.6666666666667px");
    expect(figure.style.top).toBe("234px");
    expect(figure.style.width).toBe("420px");
    expect(figure.style.height).toBe("260.5px");
    const story = boxOf(root, "story");
    expect(story.style.top).toBe("500.25px");
    const text = story.querySelector<HTMLElement>(".fd-text")!;
    expect(text.style.fontSize).toBe("13.333333333333334px");
    expect(text.textContent).toBe("Short one.");
  });

  it("keeps the canvas at viewport size when content fits", () => {
    renderViewer(root, makeState());
    const canvas = root.querySelector<HTMLElement>(".fd-canvas")!;
    expect(canvas.style.width).toBe("1280px");
    expect(canvas.style.height).toBe("800px");
  });

  it("grows the canvas when the solution is taller than the viewport", () => {
    const tall: SolutionDto = {
      ...solution,
      placements: [
        ...solution.placements,
        { element_id: "story", alternative_id: "story-brief",
          x: 0, y: 1400, w: 100, h: 100.5 },
      ],
    };
    renderViewer(root, makeState({ solution: tall }));
    const canvas = root.querySelector<HTMLElement>(".fd-canvas")!;
    expect(canvas.style.height).toBe("1500.5px");
  });
});

describe("content", () => {
  it("renders images from the session asset map", () => {
    renderViewer(root, makeState());
    const img = boxOf(root, "figure").querySelector<HTMLImageElement>("img")!;
    expect(img.src).toBe("http://svc.test/assets/hash-1");
  });

  it("swaps a failed image for a placeholder with a working retry", () => {
    renderViewer(root, makeState());
    const figure = boxOf(root, "figure");
    figure.querySelector("img")!.dispatchEvent(new Event("error"));
    expect(figure.querySelector("img")).toBeNull();
    const placeholder = figure.querySelector<HTMLElement>(".fd-placeholder")!;
    expect(placeholder.textContent).toContain("image unavailable");
    placeholder.querySelector<HTMLButtonElement>(".fd-retry")!.click();
    const retried = figure.querySelector<HTMLImageElement>("img")!;
    expect(retried.src).toBe("http://svc.test/assets/hash-1");
  });

  it("shows a placeholder when the asset map has no entry", () => {
    renderViewer(root, makeState({ assets: {} }));
    expect(boxOf(root, "figure").querySelector(".fd-placeholder"))
      .not.toBeNull();
  });

  it("renders audio as a play-button widget", () => {
    renderViewer(root, makeState());
    const play = boxOf(root, "clip").querySelector<HTMLElement>(".fd-play")!;
    expect(play.textContent).toBe("Play");
  });

  it("badges pinned elements", () => {
    renderViewer(root, makeState({ pinned: new Set(["story"]) }));
    expect(boxOf(root, "story").querySelector(".fd-pin")).not.toBeNull();
    expect(boxOf(root, "figure").querySelector(".fd-pin")).toBeNull();
  });

  it("shows revision, pending state, and toast", () => {
    renderViewer(root, makeState({ pending: true, toast: "pin failed" }));
    expect(root.querySelector(".fd-revision")!.textContent).toBe("revision 3");
    expect(root.querySelector(".fd-pending")).not.toBeNull();
    expect(root.querySelector(".fd-toast")!.textContent).toBe("pin failed");
  });
});

describe("gestures", () => {
  it("maps a plain click to zoom-in after the double-click window", () => {
    vi.useFakeTimers();
    const state = makeState();
    renderViewer(root, state);
    boxOf(root, "story").dispatchEvent(
      new MouseEvent("click", { bubbles: true, detail: 1 }));
    expect(state.gestures.onZoomIn).not.toHaveBeenCalled();
    vi.advanceTimersByTime(CLICK_DELAY_MS);
    expect(state.gestures.onZoomIn).toHaveBeenCalledWith("story");
    expect(state.gestures.onZoomOut).not.toHaveBeenCalled();
  });

  it("maps a modifier click to zoom-out", () => {
    vi.useFakeTimers();
    const state = makeState();
    renderViewer(root, state);
    boxOf(root, "story").dispatchEvent(
      new MouseEvent("click", { bubbles: true, detail: 1, ctrlKey: true }));
    vi.advanceTimersByTime(CLICK_DELAY_MS);
    expect(state.gestures.onZoomOut).toHaveBeenCalledWith("story");
    expect(state.gestures.onZoomIn).not.toHaveBeenCalled();
  });

  it("maps a double-click to pin and cancels the pending click", () => {
    vi.useFakeTimers();
    const state = makeState();
    renderViewer(root, state);
    const box = boxOf(root, "figure");
    box.dispatchEvent(new MouseEvent("click", { bubbles: true, detail: 1 }));
    box.dispatchEvent(new MouseEvent("click", { bubbles: true, detail: 2 }));
    box.dispatchEvent(new MouseEvent("dblclick", { bubbles: true }));
    vi.advanceTimersByTime(CLICK_DELAY_MS * 2);
    expect(state.gestures.onTogglePin).toHaveBeenCalledTimes(1);
    expect(state.gestures.onTogglePin).toHaveBeenCalledWith("figure");
    expect(state.gestures.onZoomIn).not.toHaveBeenCalled();
  });

  it("opens an alternative menu on context menu and sends the pick", () => {
    const state = makeState();
    renderViewer(root, state);
    const box = boxOf(root, "figure");
    box.dispatchEvent(new MouseEvent("contextmenu", { bubbles: true }));
    const entry = box.querySelector<HTMLButtonElement>(
      '.fd-menu-entry[data-alternative-id="figure-caption"]')!;
    entry.click();
    expect(state.gestures.onSwitchAlternative)
      .toHaveBeenCalledWith("figure", "figure-caption");
    expect(box.querySelector(".fd-menu")).toBeNull();
  });

  it("sends template selection changes", () => {
    const state = makeState();
    renderViewer(root, state);
    const select = root.querySelector<HTMLSelectElement>(
      ".fd-template-select")!;
    expect(select.value).toBe("stack");
    select.value = "wide";
    select.dispatchEvent(new Event("change"));
    expect(state.gestures.onSwitchTemplate).toHaveBeenCalledWith("wide");
  });

  it("forwards slider input with its parsed value", () => {
    const state = makeState();
    renderViewer(root, state);
    const slider = root.querySelector<HTMLInputElement>(
      'input[data-modality="image"]')!;
    slider.value = "0.9";
    slider.dispatchEvent(new Event("input"));
    expect(state.gestures.onSlider).toHaveBeenCalledWith("image", 0.9);
  });
});
