import { describe, expect, it } from 'vitest';

import { checkScene, SceneEditor } from '../src/scene.js';
import type { SceneDoc } from '../src/types.js';

const SCENE_TEXT = `{
  "scene_version": 1,
  "kind": "meso-simulation",
  "grid": {"nx": 20, "ny": 24, "width": 4.0, "height": 5.0},
  "grains": {"count": 8, "delta": 0.3, "seed": 7},
  "schedule": {"load": {"axis": "y", "target_strain": 0.007}}
}`;

const LATTICE_TEXT = JSON.stringify({
  scene_version: 1,
  kind: 'lattice-composite',
  matrix: { kind: 'fcc', a: 4.05, extents: [6, 6, 6], species: 'Al' },
  particles: [{ shape: 'fullerene', radius: 3.5, species: 'C' }],
  placements: [{ particle: 0, translation: [10, 10, 10], rotation: [1, 0, 0, 0] }],
  clearance: 2.0,
});

describe('SceneEditor round trip', () => {
  it('load -> edit -> undo-all -> save is byte-identical', () => {
    const editor = new SceneEditor(SCENE_TEXT);
    editor.set('grains.delta', 0.15);
    editor.set('grid.nx', 40);
    expect(editor.dirty).toBe(true);
    expect(editor.serialize()).not.toBe(SCENE_TEXT);
    editor.undoAll();
    expect(editor.dirty).toBe(false);
    expect(editor.serialize()).toBe(SCENE_TEXT);
  });

  it('pristine save returns the exact loaded bytes', () => {
    const editor = new SceneEditor(SCENE_TEXT);
    expect(editor.serialize()).toBe(SCENE_TEXT);
  });

  it('edits land in the document', () => {
    const editor = new SceneEditor(SCENE_TEXT);
    editor.set('grains.delta', 0.2);
    const grains = editor.document.grains as { delta: number };
    expect(grains.delta).toBe(0.2);
    editor.undo();
    expect((editor.document.grains as { delta: number }).delta).toBe(0.3);
  });

  it('dragging a particle shifts its translation by the drag vector', () => {
    const editor = new SceneEditor(LATTICE_TEXT);
    editor.moveParticle(0, 2.5, 0, 0);
    const placements = editor.document.placements as { translation: number[] }[];
    expect(placements[0].translation).toEqual([12.5, 10, 10]);
    editor.undoAll();
    expect(editor.serialize()).toBe(LATTICE_TEXT);
  });
});

describe('client-side scene checks', () => {
  it('accepts a valid scene', () => {
    expect(checkScene(JSON.parse(SCENE_TEXT) as SceneDoc)).toEqual([]);
  });

  it('rejects delta = 1.5 at its path and blocks submission', () => {
    const editor = new SceneEditor(SCENE_TEXT);
    editor.set('grains.delta', 1.5);
    const errors = editor.errors;
    expect(errors.some((e) => e.path === 'grains.delta')).toBe(true);
    expect(editor.canSubmit()).toBe(false);
    editor.undoAll();
    expect(editor.canSubmit()).toBe(true);
  });

  it('rejects bad dt_safety and non-positive dimensions', () => {
    const doc = JSON.parse(SCENE_TEXT) as SceneDoc;
    (doc.schedule as Record<string, unknown>).dt_safety = 2.0;
    (doc.grid as Record<string, unknown>).width = -1;
    const paths = checkScene(doc).map((e) => e.path);
    expect(paths).toContain('schedule.dt_safety');
    expect(paths).toContain('grid.width');
  });

  it('rejects dangling placement references and bad quaternions', () => {
    const doc = JSON.parse(LATTICE_TEXT) as SceneDoc;
    (doc.placements as { particle: number }[])[0].particle = 5;
    const paths = checkScene(doc).map((e) => e.path);
    expect(paths).toContain('placements[0].particle');

    const doc2 = JSON.parse(LATTICE_TEXT) as SceneDoc;
    (doc2.placements as { rotation: number[] }[])[0].rotation = [1, 1, 0, 0];
    expect(checkScene(doc2).map((e) => e.path)).toContain('placements[0].rotation');
  });
});
