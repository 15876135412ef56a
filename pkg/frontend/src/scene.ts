/** Scene document editing state.
 *
 * The editor keeps the exact bytes the scene was loaded from; edits work
 * on a parsed copy with an undo stack of snapshots.  Saving an untouched
 * (or fully undone) scene submits the original bytes verbatim, so a
 * load -> edit -> undo-all -> save round trip is byte-identical and hashes
 * to the same scene id on the server.
 */

import type { Placement, SceneDoc, ValidationError } from './types.js';

export function checkScene(doc: SceneDoc): ValidationError[] {
  const errors: ValidationError[] = [];
  const push = (path: string, message: string) => errors.push({ path, message });

  if (doc.scene_version !== 1) push('scene_version', 'expected version 1');
  if (doc.kind !== 'meso-simulation' && doc.kind !== 'lattice-composite') {
    push('kind', 'must be meso-simulation or lattice-composite');
    return errors;
  }

  const section = (name: string) => doc[name] as Record<string, unknown> | undefined;

  if (doc.kind === 'meso-simulation') {
    const grid = section('grid');
    for (const axis of ['nx', 'ny'] as const) {
      const v = grid?.[axis];
      if (v !== undefined && (typeof v !== 'number' || !Number.isInteger(v) || v < 1)) {
        push(`grid.${axis}`, 'must be an integer >= 1');
      }
    }
    for (const dim of ['width', 'height'] as const) {
      const v = grid?.[dim];
      if (v !== undefined && (typeof v !== 'number' || v <= 0)) push(`grid.${dim}`, 'must be > 0');
    }
    const grains = section('grains');
    const delta = grains?.delta;
    if (delta !== undefined && (typeof delta !== 'number' || delta < 0 || delta >= 1)) {
      push('grains.delta', 'must be in [0, 1)');
    }
    const count = grains?.count;
    if (count !== undefined && (typeof count !== 'number' || !Number.isInteger(count) || count < 1)) {
      push('grains.count', 'must be an integer >= 1');
    }
    const schedule = section('schedule');
    const dtSafety = schedule?.dt_safety;
    if (dtSafety !== undefined && (typeof dtSafety !== 'number' || dtSafety <= 0 || dtSafety > 0.9)) {
      push('schedule.dt_safety', 'must be in (0, 0.9]');
    }
    const load = (schedule?.load ?? {}) as Record<string, unknown>;
    const target = load.target_strain;
    if (target !== undefined && (typeof target !== 'number' || target <= 0)) {
      push('schedule.load.target_strain', 'must be > 0');
    }
    const material = section('material');
    for (const prop of ['rho0', 'K', 'G', 'sigma_y'] as const) {
      const v = material?.[prop];
      if (v !== undefined && (typeof v !== 'number' || v <= 0)) {
        push(`material.${prop}`, 'must be > 0');
      }
    }
  } else {
    const matrix = section('matrix');
    if (!matrix) push('matrix', 'required for lattice-composite scenes');
    const a = matrix?.a;
    if (a !== undefined && (typeof a !== 'number' || a <= 0)) push('matrix.a', 'must be > 0');
    const placements = (doc.placements ?? []) as Placement[];
    const particles = (doc.particles ?? []) as unknown[];
    placements.forEach((placement, k) => {
      if (placement.particle < 0 || placement.particle >= particles.length) {
        push(`placements[${k}].particle`, 'references an unknown particle');
      }
      const q = placement.rotation ?? [1, 0, 0, 0];
      const norm = Math.hypot(q[0], q[1], q[2], q[3]);
      if (Math.abs(norm - 1) > 1e-9) push(`placements[${k}].rotation`, 'quaternion must be unit length');
    });
    const clearance = doc.clearance;
    if (clearance !== undefined && (typeof clearance !== 'number' || clearance < 0)) {
      push('clearance', 'must be >= 0');
    }
  }
  return errors;
}

function deepClone<T>(value: T): T {
  return JSON.parse(JSON.stringify(value)) as T;
}

export class SceneEditor {
  private originalText: string;
  private doc: SceneDoc;
  private undoStack: SceneDoc[] = [];

  constructor(text: string) {
    this.originalText = text;
    this.doc = JSON.parse(text) as SceneDoc;
  }

  get document(): SceneDoc {
    return this.doc;
  }

  get dirty(): boolean {
    return this.undoStack.length > 0;
  }

  get errors(): ValidationError[] {
    return checkScene(this.doc);
  }

  /** Set a value by dotted path (e.g. "grains.delta"), recording undo. */
  set(path: string, value: unknown): void {
    this.undoStack.push(deepClone(this.doc));
    const parts = path.split('.');
    let target = this.doc as Record<string, unknown>;
    for (const part of parts.slice(0, -1)) {
      if (typeof target[part] !== 'object' || target[part] === null) target[part] = {};
      target = target[part] as Record<string, unknown>;
    }
    target[parts[parts.length - 1]] = value;
  }

  /** Drag a particle: shift placement k's translation by (dx, dy, dz). */
  moveParticle(k: number, dx: number, dy: number, dz: number): void {
    this.undoStack.push(deepClone(this.doc));
    const placements = (this.doc.placements ?? []) as Placement[];
    const placement = placements[k];
    if (!placement) throw new Error(`no placement ${k}`);
    const t = placement.translation ?? [0, 0, 0];
    placement.translation = [t[0] + dx, t[1] + dy, t[2] + dz];
  }

  undo(): boolean {
    const previous = this.undoStack.pop();
    if (!previous) return false;
    this.doc = previous;
    return true;
  }

  undoAll(): void {
    while (this.undo()) { /* unwind */ }
  }

  /**
   * Serialized document for submission.  Pristine documents (never edited,
   * or every edit undone) return the loaded bytes unchanged.
   */
  serialize(): string {
    if (!this.dirty) return this.originalText;
    return JSON.stringify(this.doc, null, 2);
  }

  /** Submission guard: never post a document that fails local checks. */
  canSubmit(): boolean {
    return this.errors.length === 0;
  }
}
