/**
 * DOM renderer for layout solutions.
 *
 * The renderer is a pure projection of viewer state: it wipes the root
 * and rebuilds it on every call. Geometry is copied verbatim from the
 * solution (raw floats into px strings); nothing here measures, wraps,
 * or repositions content. When the solved extent is taller than the
 * viewport the canvas simply grows and the page scrolls.
 */

import type {
  DocumentBundle, PlacementDto, SolutionDto, Viewport,
} from "./types.js";
import { findAlternative } from "./types.js";

/** Single clicks wait this long so a double-click can cancel them. */
export const CLICK_DELAY_MS = 250;

export interface RenderGestures {
  onZoomIn(elementId: string): void;
  onZoomOut(elementId: string): void;
  onTogglePin(elementId: string): void;
  onSwitchTemplate(templateId: string): void;
  onSwitchAlternative(elementId: string, alternativeId: string): void;
  onSlider(modality: string, value: number): void;
}

export interface RenderState {
  bundle: DocumentBundle;
  solution: SolutionDto | null;
  assets: Record<string, string>;
  sliders: Record<string, number>;
  pinned: ReadonlySet<string>;
  viewport: Viewport;
  revision: number;
  pending: boolean;
  toast: string | null;
  assetUrl(hash: string): string;
  gestures: RenderGestures;
}

export function renderViewer(root: HTMLElement, state: RenderState): void {
  const doc = root.ownerDocument;
  root.replaceChildren(
    buildStatus(doc, state),
    buildControls(doc, state),
    buildCanvas(doc, state),
  );
}

function px(value: number): string {
  return `${value}px`;
}

function buildStatus(doc: Document, state: RenderState): HTMLElement {
  const bar = doc.createElement("div");
  bar.className = "fd-status";
  const label = doc.createElement("span");
  label.className = "fd-revision";
  label.textContent = `revision ${state.revision}`;
  bar.append(label);
  if (state.pending) {
    const busy = doc.createElement("span");
    busy.className = "fd-pending";
    busy.textContent = "solving";
    bar.append(busy);
  }
  if (state.toast !== null) {
    const toast = doc.createElement("div");
    toast.className = "fd-toast";
    toast.setAttribute("role", "status");
    toast.textContent = state.toast;
    bar.append(toast);
  }
  return bar;
}

function buildControls(doc: Document, state: RenderState): HTMLElement {
  const controls = doc.createElement("div");
  controls.className = "fd-controls";

  const modalities = new Set<string>();
  for (const element of state.bundle.elements) {
    for (const alt of element.alternatives) modalities.add(alt.modality);
  }
  for (const modality of modalities) {
    const wrap = doc.createElement("label");
    wrap.className = "fd-slider";
    wrap.append(`${modality} `);
    const input = doc.createElement("input");
    input.type = "range";
    input.min = "0";
    input.max = "1";
    input.step = "0.01";
    input.value = String(state.sliders[modality] ?? 0.5);
    input.dataset.modality = modality;
    input.addEventListener("input", () => {
      state.gestures.onSlider(modality, Number.parseFloat(input.value));
    });
    wrap.append(input);
    controls.append(wrap);
  }

  const select = doc.createElement("select");
  select.className = "fd-template-select";
  for (const template of state.bundle.templates) {
    const option = doc.createElement("option");
    option.value = template.id;
    option.textContent = template.id;
    if (state.solution?.template_id === template.id) option.selected = true;
    select.append(option);
  }
  select.addEventListener("change", () => {
    state.gestures.onSwitchTemplate(select.value);
  });
  controls.append(select);
  return controls;
}

function buildCanvas(doc: Document, state: RenderState): HTMLElement {
  const canvas = doc.createElement("div");
  canvas.className = "fd-canvas";
  canvas.style.position = "relative";
  canvas.style.width = px(state.viewport.width);
  const solution = state.solution;
  if (solution === null) {
    canvas.style.height = px(state.viewport.height);
    return canvas;
  }
  // the canvas grows past the viewport when content is taller, so the
  // host page scrolls instead of the renderer rescaling anything
  let extent = 0;
  for (const p of solution.placements) extent = Math.max(extent, p.y + p.h);
  canvas.style.height = px(Math.max(state.viewport.height, extent));
  for (const placement of solution.placements) {
    canvas.append(buildElement(doc, state, placement));
  }
  return canvas;
}

function buildElement(doc: Document, state: RenderState,
                      placement: PlacementDto): HTMLElement {
  const box = doc.createElement("div");
  box.className = "fd-element";
  box.dataset.elementId = placement.element_id;
  box.dataset.alternativeId = placement.alternative_id;
  box.style.position = "absolute";
  box.style.left = px(placement.x);
  box.style.top = px(placement.y);
  box.style.width = px(placement.w);
  box.style.height = px(placement.h);

  const alt = findAlternative(state.bundle, placement.element_id,
                              placement.alternative_id);
  if (alt?.modality === "image") {
    mountImage(doc, box, state, placement.element_id);
  } else if (alt?.modality === "audio") {
    box.append(buildAudioWidget(doc, state, placement.element_id));
  } else {
    const text = doc.createElement("div");
    text.className = "fd-text";
    if (placement.font_size !== undefined) {
      text.style.fontSize = px(placement.font_size);
    }
    text.textContent = alt?.text ?? "";
    box.append(text);
  }

  if (state.pinned.has(placement.element_id)) {
    const badge = doc.createElement("span");
    badge.className = "fd-pin";
    badge.textContent = "pinned";
    box.append(badge);
  }

  wireGestures(doc, box, state, placement.element_id);
  return box;
}

function mountImage(doc: Document, box: HTMLElement, state: RenderState,
                    elementId: string): void {
  const hash = state.assets[elementId];
  if (hash === undefined) {
    box.prepend(buildPlaceholder(doc, box, state, elementId));
    return;
  }
  const img = doc.createElement("img");
  img.className = "fd-image";
  img.src = state.assetUrl(hash);
  img.alt = elementId;
  img.draggable = false;
  img.style.width = "100%";
  img.style.height = "100%";
  img.addEventListener("error", () => {
    img.replaceWith(buildPlaceholder(doc, box, state, elementId));
  });
  box.prepend(img);
}

function buildPlaceholder(doc: Document, box: HTMLElement, state: RenderState,
                          elementId: string): HTMLElement {
  const placeholder = doc.createElement("div");
  placeholder.className = "fd-placeholder";
  const note = doc.createElement("span");
  note.textContent = "image unavailable";
  const retry = doc.createElement("button");
  retry.className = "fd-retry";
  retry.type = "button";
  retry.textContent = "Retry";
  retry.addEventListener("click", (event) => {
    event.stopPropagation();
    placeholder.remove();
    mountImage(doc, box, state, elementId);
  });
  placeholder.append(note, retry);
  return placeholder;
}

function buildAudioWidget(doc: Document, state: RenderState,
                          elementId: string): HTMLElement {
  const widget = doc.createElement("div");
  widget.className = "fd-audio";
  const button = doc.createElement("button");
  button.className = "fd-play";
  button.type = "button";
  button.textContent = "Play";
  button.setAttribute("aria-label", `play ${elementId}`);
  const hash = state.assets[elementId];
  button.addEventListener("click", (event) => {
    event.stopPropagation();
    if (hash === undefined) return;
    const audio = doc.createElement("audio");
    audio.src = state.assetUrl(hash);
    // jsdom has no media pipeline; swallow the rejection there
    void audio.play?.()?.catch?.(() => undefined);
  });
  widget.append(button);
  return widget;
}

function wireGestures(doc: Document, box: HTMLElement, state: RenderState,
                      elementId: string): void {
  let clickTimer: ReturnType<typeof setTimeout> | null = null;
  box.addEventListener("click", (event) => {
    if (event.detail > 1) return;  // second click of a double-click
    const zoomOut = event.altKey || event.ctrlKey || event.metaKey;
    if (clickTimer !== null) clearTimeout(clickTimer);
    clickTimer = setTimeout(() => {
      clickTimer = null;
      if (zoomOut) state.gestures.onZoomOut(elementId);
      else state.gestures.onZoomIn(elementId);
    }, CLICK_DELAY_MS);
  });
  box.addEventListener("dblclick", () => {
    if (clickTimer !== null) {
      clearTimeout(clickTimer);
      clickTimer = null;
    }
    state.gestures.onTogglePin(elementId);
  });
  box.addEventListener("contextmenu", (event) => {
    event.preventDefault();
    openAlternativeMenu(doc, box, state, elementId);
  });
}

function openAlternativeMenu(doc: Document, box: HTMLElement,
                             state: RenderState, elementId: string): void {
  doc.querySelectorAll(".fd-menu").forEach((stale) => stale.remove());
  const element = state.bundle.elements.find((e) => e.id === elementId);
  if (element === undefined) return;
  const menu = doc.createElement("div");
  menu.className = "fd-menu";
  for (const alt of element.alternatives) {
    const entry = doc.createElement("button");
    entry.type = "button";
    entry.className = "fd-menu-entry";
    entry.dataset.alternativeId = alt.id;
    entry.textContent = `${alt.id} (${alt.modality})`;
    entry.addEventListener("click", (event) => {
      event.stopPropagation();
      menu.remove();
      state.gestures.onSwitchAlternative(elementId, alt.id);
    });
    menu.append(entry);
  }
  box.append(menu);
  doc.addEventListener("click", () => menu.remove(), { once: true });
}
