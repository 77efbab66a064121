/**
 * Wire types for the layout service.
 *
 * Field names mirror the JSON payloads exactly (snake_case); the viewer
 * renders what the service solved and never restates geometry, so there
 * is deliberately no mapping layer between these shapes and the DOM.
 */

export interface Viewport {
  width: number;
  height: number;
}

export interface PlacementDto {
  element_id: string;
  alternative_id: string;
  x: number;
  y: number;
  w: number;
  h: number;
  /** Present only for text placements. */
  font_size?: number;
}

export interface SolutionDto {
  template_id: string;
  placements: PlacementDto[];
  /** Solved tabstop positions per axis, boundary stops included. */
  tabstops: Record<string, Record<string, number>>;
  total_loss: number;
  loss_breakdown: Record<string, number>;
  flags: string[];
}

/** Response body shared by every session route. */
export interface SessionPayload {
  session_id: string;
  revision: number;
  solution: SolutionDto;
  /** element id -> asset hash for the chosen image alternatives. */
  assets: Record<string, string>;
}

export type InteractionKind =
  | "zoom-in"
  | "zoom-out"
  | "pin"
  | "unpin"
  | "switch-template"
  | "switch-alternative"
  | "set-slider";

export interface InteractionBody {
  kind: InteractionKind;
  element_id?: string;
  template_id?: string;
  alternative_id?: string;
  modality?: string;
  value?: number;
}

export interface PreferencesBody {
  sliders?: Record<string, number>;
  no_scroll?: boolean;
  zoom_deltas?: Record<string, number>;
  forced_template?: string;
  forced_alternatives?: Record<string, string>;
}

/** The subset of a document bundle the viewer needs to render content. */
export interface AlternativeDto {
  id: string;
  modality: string;
  rank: number;
  text?: string;
  preferred_size?: [number, number];
  preferred_font_size?: number;
  asset?: string;
}

export interface ElementDto {
  id: string;
  alternatives: AlternativeDto[];
}

export interface TemplateDto {
  id: string;
  rank: number;
}

export interface DocumentBundle {
  schema_version: number;
  templates: TemplateDto[];
  elements: ElementDto[];
  assets?: Record<string, unknown>;
}

export function findAlternative(
  bundle: DocumentBundle, elementId: string, alternativeId: string,
): AlternativeDto | undefined {
  const element = bundle.elements.find((e) => e.id === elementId);
  return element?.alternatives.find((a) => a.id === alternativeId);
}
