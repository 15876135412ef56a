/** Wire types mirroring the mesobench HTTP API. */

export interface SceneDoc {
  scene_version: number;
  kind: 'meso-simulation' | 'lattice-composite';
  [section: string]: unknown;
}

export interface ValidationError {
  path: string;
  message: string;
}

export interface FrameIndexEntry {
  field: string;
  index: number;
  time: number;
  path: string;
}

export interface Manifest {
  run_id: string;
  status: 'queued' | 'running' | 'done' | 'failed';
  progress: number;
  wall_time_s: number;
  quasi_static: boolean | null;
  warnings: string[];
  frames: FrameIndexEntry[];
  history: string | null;
  atoms: string | null;
  bands: string | null;
  energy: Record<string, number>;
  error: string | null;
}

export interface FieldFramePayload {
  name: string;
  time: number;
  nx: number;
  ny: number;
  bounds: [number, number, number, number];
  frame: number;
  /** flat, index i * ny + j; null marks a gap */
  values: (number | null)[];
}

export interface Band {
  cells: number[];
  angle_deg: number;
  width: number;
  length: number;
  peak: number;
  mean: number;
}

export interface HistoryTable {
  columns: string[];
  rows: number[][];
}

export interface LatticePreview {
  count: number;
  species: string[];
  positions: [number, number, number][];
}

export type Placement = {
  particle: number;
  translation: [number, number, number];
  rotation: [number, number, number, number];
};
