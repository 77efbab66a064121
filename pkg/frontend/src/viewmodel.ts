/**
 * Session state machine for the viewer.
 *
 * The model owns everything the UI shows: the current solution, the
 * session id and revision, slider values, and the pending-request flag.
 * Gestures funnel through a single-flight gate so at most one mutation
 * is outstanding; a newer gesture replaces whatever was waiting rather
 * than queueing behind it. Responses are adopted only when their
 * revision is not older than the one on screen.
 */

import {
  InfeasibleError, ServiceClient, StaleRevisionError,
} from "./client.js";
import type {
  DocumentBundle, InteractionBody, SessionPayload, SolutionDto, Viewport,
} from "./types.js";

export const DEBOUNCE_MS = 150;
const TOAST_MS = 4000;

type Task = () => Promise<void>;

export interface ViewerHooks {
  /** Called after every observable state change. */
  onChange(model: ViewerModel): void;
}

export class ViewerModel {
  readonly client: ServiceClient;
  readonly bundle: DocumentBundle;

  sessionId: string | null = null;
  revision = 0;
  solution: SolutionDto | null = null;
  assets: Record<string, string> = {};
  sliders: Record<string, number> = { image: 0.5, text: 0.5, audio: 0.5 };
  pinned: Set<string> = new Set();
  viewport: Viewport;
  pending = false;
  toast: string | null = null;

  private readonly hooks: ViewerHooks;
  private queued: Task | null = null;
  private readonly debounces = new Map<string, ReturnType<typeof setTimeout>>();
  private toastTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(client: ServiceClient, bundle: DocumentBundle,
              viewport: Viewport, hooks: ViewerHooks) {
    this.client = client;
    this.bundle = bundle;
    this.viewport = viewport;
    this.hooks = hooks;
  }

  /** Register the bundle and open a session at the current viewport. */
  async open(): Promise<void> {
    const { document_id } = await this.client.registerDocument(this.bundle);
    const payload = await this.client.openSession(document_id, this.viewport);
    this.adopt(payload);
  }

  // -- gestures -----------------------------------------------------------

  zoomIn(elementId: string): void {
    this.submit("zoom", { kind: "zoom-in", element_id: elementId });
  }

  zoomOut(elementId: string): void {
    this.submit("zoom", { kind: "zoom-out", element_id: elementId });
  }

  /** Double-click toggles: pin when free, unpin when already pinned. */
  togglePin(elementId: string): void {
    const kind = this.pinned.has(elementId) ? "unpin" : "pin";
    this.submit(kind, { kind, element_id: elementId }, () => {
      if (kind === "pin") this.pinned.add(elementId);
      else this.pinned.delete(elementId);
    });
  }

  switchTemplate(templateId: string): void {
    this.submit("switch-template",
                { kind: "switch-template", template_id: templateId });
  }

  switchAlternative(elementId: string, alternativeId: string): void {
    this.submit("switch-alternative", {
      kind: "switch-alternative",
      element_id: elementId,
      alternative_id: alternativeId,
    });
  }

  /** Slider drags collapse to one request per modality every 150 ms. */
  setSlider(modality: string, value: number): void {
    this.sliders = { ...this.sliders, [modality]: value };
    this.notify();
    this.debounce(`slider:${modality}`, () => {
      this.submit("set-slider", {
        kind: "set-slider",
        modality,
        value: this.sliders[modality],
      });
    });
  }

  /** Window resizes collapse to one viewport update every 150 ms. */
  resize(viewport: Viewport): void {
    this.viewport = viewport;
    this.notify();
    this.debounce("viewport", () => {
      this.mutate("resize", (sessionId, revision) =>
        this.client.putViewport(sessionId, this.viewport, revision));
    });
  }

  dispose(): void {
    for (const timer of this.debounces.values()) clearTimeout(timer);
    this.debounces.clear();
    if (this.toastTimer !== null) clearTimeout(this.toastTimer);
  }

  // -- internals ----------------------------------------------------------

  private submit(label: string, interaction: InteractionBody,
                 onAccepted?: () => void): void {
    this.mutate(label, (sessionId, revision) =>
      this.client.postInteraction(sessionId, interaction, revision),
      onAccepted);
  }

  private mutate(label: string,
                 run: (sessionId: string, revision: number) => Promise<SessionPayload>,
                 onAccepted?: () => void): void {
    const task: Task = async () => {
      const sessionId = this.sessionId;
      if (sessionId === null) return;
      try {
        const payload = await run(sessionId, this.revision);
        this.adopt(payload);
        onAccepted?.();
        this.notify();
      } catch (err) {
        if (err instanceof StaleRevisionError) {
          // lost the race: converge on the server state, replay nothing
          try {
            this.adopt(await this.client.getSolution(sessionId));
          } catch {
            this.showToast(`${label}: could not refresh the session`);
          }
        } else if (err instanceof InfeasibleError) {
          const needs = err.relaxation.length
            ? ` (would need: ${err.relaxation.join(", ")})` : "";
          this.showToast(`${label} has no feasible layout${needs}`);
        } else {
          this.showToast(`${label} failed: ${describe(err)}`);
        }
      }
    };
    if (this.pending) {
      // newest gesture supersedes whatever was waiting
      this.queued = task;
      return;
    }
    void this.drain(task);
  }

  private async drain(first: Task): Promise<void> {
    this.pending = true;
    this.notify();
    let task: Task | null = first;
    while (task !== null) {
      await task();
      task = this.queued;
      this.queued = null;
    }
    this.pending = false;
    this.notify();
  }

  private adopt(payload: SessionPayload): void {
    if (payload.revision < this.revision) return;
    this.sessionId = payload.session_id;
    this.revision = payload.revision;
    this.solution = payload.solution;
    this.assets = payload.assets;
    this.notify();
  }

  private debounce(key: string, fire: () => void): void {
    const pendingTimer = this.debounces.get(key);
    if (pendingTimer !== undefined) clearTimeout(pendingTimer);
    this.debounces.set(key, setTimeout(() => {
      this.debounces.delete(key);
      fire();
    }, DEBOUNCE_MS));
  }

  private showToast(message: string): void {
    this.toast = message;
    this.notify();
    if (this.toastTimer !== null) clearTimeout(this.toastTimer);
    this.toastTimer = setTimeout(() => {
      this.toast = null;
      this.toastTimer = null;
      this.notify();
    }, TOAST_MS);
  }

  private notify(): void {
    this.hooks.onChange(this);
  }
}

function describe(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}
