/**
 * Browser entry point: wires a ServiceClient, a ViewerModel, and the
 * renderer together. The demo page loads a bundle JSON from a file
 * picker; everything afterwards flows through the model.
 */

import { ServiceClient } from "./client.js";
import { renderViewer } from "./render.js";
import type { RenderState } from "./render.js";
import { ViewerModel } from "./viewmodel.js";
import type { DocumentBundle, Viewport } from "./types.js";

/** Build a model whose every state change re-renders into root. */
export function connectViewer(root: HTMLElement, client: ServiceClient,
                              bundle: DocumentBundle,
                              viewport: Viewport): ViewerModel {
  const model = new ViewerModel(client, bundle, viewport, {
    onChange: (vm) => renderViewer(root, snapshot(vm)),
  });
  renderViewer(root, snapshot(model));
  return model;
}

/** Re-solve on window resizes, debounced inside the model. */
export function wireWindowResize(model: ViewerModel, win: Window): () => void {
  const listener = () => {
    model.resize({ width: win.innerWidth, height: win.innerHeight });
  };
  win.addEventListener("resize", listener);
  return () => win.removeEventListener("resize", listener);
}

function snapshot(model: ViewerModel): RenderState {
  return {
    bundle: model.bundle,
    solution: model.solution,
    assets: model.assets,
    sliders: model.sliders,
    pinned: model.pinned,
    viewport: model.viewport,
    revision: model.revision,
    pending: model.pending,
    toast: model.toast,
    assetUrl: (hash) => model.client.assetUrl(hash),
    gestures: {
      onZoomIn: (eid) => model.zoomIn(eid),
      onZoomOut: (eid) => model.zoomOut(eid),
      onTogglePin: (eid) => model.togglePin(eid),
      onSwitchTemplate: (tid) => model.switchTemplate(tid),
      onSwitchAlternative: (eid, aid) => model.switchAlternative(eid, aid),
      onSlider: (modality, value) => model.setSlider(modality, value),
    },
  };
}

/** Demo-page bootstrap; no-op outside a browser document. */
export function boot(): void {
  const doc = globalThis.document;
  if (!doc) return;
  const picker = doc.querySelector<HTMLInputElement>("#bundle-file");
  const baseInput = doc.querySelector<HTMLInputElement>("#service-base");
  const root = doc.querySelector<HTMLElement>("#viewer");
  if (!picker || !root) return;
  picker.addEventListener("change", async () => {
    const file = picker.files?.[0];
    if (!file) return;
    const bundle = JSON.parse(await file.text()) as DocumentBundle;
    const base = baseInput?.value || doc.location.origin;
    const client = new ServiceClient(base);
    const model = connectViewer(root, client, bundle, {
      width: doc.defaultView?.innerWidth ?? 1280,
      height: doc.defaultView?.innerHeight ?? 800,
    });
    if (doc.defaultView) wireWindowResize(model, doc.defaultView);
    try {
      await model.open();
    } catch (err) {
      root.textContent = err instanceof Error ? err.message : String(err);
    }
  });
}

boot();
