import { describe, expect, it } from 'vitest';

import { project, speciesColor } from '../src/atoms.js';

const CUBE: [number, number, number][] = [
  [0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1],
  [1, 1, 0], [1, 0, 1], [0, 1, 1], [1, 1, 1],
];

describe('orthographic projection', () => {
  it('identity view maps x right, y up (screen y down), centered', () => {
    const projected = project(CUBE, { yaw: 0, pitch: 0, zoom: 10 });
    expect(projected.length).toBe(8);
    const byIndex = [...projected].sort((a, b) => a.index - b.index);
    // atom (1,0,0) is +0.5 from the centroid along x
    expect(byIndex[1].x).toBeCloseTo(5, 10);
    expect(byIndex[1].y).toBeCloseTo(5, 10); // y = 0 is below centroid; screen y grows down
    // atom (0,1,0): up in world = negative screen y
    expect(byIndex[2].y).toBeCloseTo(-5, 10);
  });

  it('a quarter yaw turn brings the z axis into view and hides x', () => {
    const zSegment: [number, number, number][] = [[0, 0, 0], [0, 0, 2]];
    const z = project(zSegment, { yaw: Math.PI / 2, pitch: 0, zoom: 2 })
      .sort((a, b) => a.index - b.index);
    expect(z[0].x).toBeCloseTo(-2, 10);
    expect(z[1].x).toBeCloseTo(2, 10);

    const xSegment: [number, number, number][] = [[0, 0, 0], [2, 0, 0]];
    const x = project(xSegment, { yaw: Math.PI / 2, pitch: 0, zoom: 2 })
      .sort((a, b) => a.index - b.index);
    // the x axis now points into the screen: both ends at screen x = 0,
    // separated only in depth
    expect(x[0].x).toBeCloseTo(0, 10);
    expect(x[1].x).toBeCloseTo(0, 10);
    expect(Math.abs(x[1].depth - x[0].depth)).toBeCloseTo(2, 10);
  });

  it('sorts far to near for painter order', () => {
    const projected = project(CUBE, { yaw: 0.3, pitch: 0.2, zoom: 1 });
    for (let k = 1; k < projected.length; k += 1) {
      expect(projected[k].depth).toBeGreaterThanOrEqual(projected[k - 1].depth);
    }
  });

  it('zoom scales screen coordinates linearly', () => {
    const near = project(CUBE, { yaw: 0.4, pitch: 0.1, zoom: 1 });
    const far = project(CUBE, { yaw: 0.4, pitch: 0.1, zoom: 3 });
    const a = [...near].sort((p, q) => p.index - q.index);
    const b = [...far].sort((p, q) => p.index - q.index);
    for (let k = 0; k < a.length; k += 1) {
      expect(b[k].x).toBeCloseTo(3 * a[k].x, 10);
      expect(b[k].y).toBeCloseTo(3 * a[k].y, 10);
    }
  });
});

describe('species colors', () => {
  it('known species get stable colors, unknown get the fallback', () => {
    expect(speciesColor('Al')).not.toBe(speciesColor('C'));
    expect(speciesColor('Xx')).toBe(speciesColor('Yy'));
  });
});
