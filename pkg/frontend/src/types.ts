/** Wire types for the policy-compass session service (HTTP + JSON + SSE). */

export type Quality = "harmony" | "passion" | "suppression";
export type Sphere = "eco" | "socio" | "econo" | "unspecified";
export type Classification = Quality | "balanced";
export type Intensity = "light" | "medium" | "strong";

export const QUALITIES: readonly Quality[] = ["harmony", "passion", "suppression"];

export interface IndicatorDoc {
  id: string;
  quality: Quality;
  name: string;
  /** Within-sector offset in degrees, [0, 120]. */
  angle: number;
  /** Raw length in [0, 1]. */
  length: number;
  boundary_ok: boolean;
  timestamp: string | null;
  notes: string;
}

export interface TableDoc {
  institution: string;
  sphere: Sphere;
  snapshot_time: string | null;
  angle_mode?: "offset" | "absolute";
  indicators: IndicatorDoc[];
}

/** Flat configuration document; `layout` is a `quality:start,…` directive. */
export interface ConfigDoc {
  layout: string;
  center_method: "centroid" | "orthocenter";
  perspicuity_alpha: number;
  perspicuity_beta: number;
  perspicuity_enabled: boolean;
  balance_epsilon: number;
  weight_eco: number;
  weight_socio: number;
  weight_econo: number;
  convergence_epsilon: number;
  convergence_window: number;
  outlier_threshold: number;
}

export interface VectorDoc {
  x: number;
  y: number;
}

export interface SectorArrowDoc extends VectorDoc {
  indicator_count: number;
}

export interface ReadingDoc {
  institution: string;
  sphere: Sphere;
  table: TableDoc;
  config: ConfigDoc;
  sectors: Record<Quality, SectorArrowDoc>;
  triangle: [VectorDoc, VectorDoc, VectorDoc];
  raw_final: VectorDoc;
  final: VectorDoc;
  classification: Classification;
}

export interface RobustnessDoc {
  robust: boolean;
  reasons: string[];
  outlier_ids: string[];
}

/** One leave-one-out entry of the server's influence report. */
export interface InfluenceEntry {
  id: string;
  angle_delta_degrees: number | null;
  magnitude_delta: number;
  displacement: number;
  outlier: boolean;
}

export interface EcologicalDoc {
  readings: Record<string, ReadingDoc>;
  weights: { eco: number; socio: number; econo: number };
  composed_raw: VectorDoc;
  composed_sum: VectorDoc;
  composed_final: VectorDoc;
  classification: Classification;
  sustainable: boolean;
}

export interface BallotDoc {
  voter: string;
  toward: Quality;
  weight?: number;
  intensity?: Intensity;
}

/** `GET /sessions/{id}` — `tables`/`readings`/… are keyed by table key
 * (`"table"` in single mode; `"eco"`/`"socio"`/`"econo"` in spheres mode). */
export interface SessionState {
  id: string;
  version: number;
  mode: "single" | "spheres";
  participants: string[];
  config: ConfigDoc;
  tables: Record<string, TableDoc>;
  readings: Record<string, ReadingDoc>;
  robustness: Record<string, RobustnessDoc>;
  influence: Record<string, InfluenceEntry[]>;
  ecological: EcologicalDoc | null;
  ballots: Record<string, BallotDoc[]>;
}

export type Mutation =
  | { kind: "add_indicator"; indicator: Partial<IndicatorDoc> & { quality: Quality; name: string; angle: number; length: number }; sphere?: Sphere }
  | { kind: "adjust_indicator"; id: string; angle?: number; length?: number; boundary_ok?: boolean; sphere?: Sphere }
  | { kind: "split_indicator"; id: string; children: [SplitChild, SplitChild]; sphere?: Sphere }
  | { kind: "remove_indicator"; id: string; sphere?: Sphere }
  | { kind: "cast_ballots"; id: string; ballots: BallotDoc[]; sphere?: Sphere }
  | { kind: "set_config"; config: Partial<ConfigDoc> };

export interface SplitChild {
  name: string;
  angle: number;
  length: number;
  quality?: Quality;
  boundary_ok?: boolean;
}

export interface EventDoc {
  version: number;
  kind: string;
  payload: Record<string, unknown>;
  timestamp: string;
}

export interface MutationResponse {
  version: number;
  event: EventDoc;
  state: SessionState;
}

export interface WhatifResponse {
  committed: false;
  base_version: number;
  state: SessionState;
}

export interface ErrorEnvelope {
  error: string;
  message: string;
  issues?: Array<Record<string, unknown>>;
  expected?: number;
  actual?: number;
}
