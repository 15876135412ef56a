import { readFileSync } from 'node:fs';
import { join } from 'node:path';

import { describe, expect, it } from 'vitest';

import { viridis } from '../src/colormap.js';
import {
  bandOverlay,
  cellAt,
  countMaxColorPixels,
  formatAngle,
  renderFrame,
} from '../src/fieldRender.js';
import type { Band, FieldFramePayload } from '../src/types.js';

function frame(nx: number, ny: number, values: (number | null)[]): FieldFramePayload {
  return { name: 'f', time: 0, nx, ny, bounds: [0, nx, 0, ny], frame: 0, values };
}

describe('renderFrame', () => {
  it('2x2 frame [0,0,0,1]: exactly one max-color cell, legend max 1', () => {
    const rendered = renderFrame(frame(2, 2, [0, 0, 0, 1]));
    expect(rendered.legendMin).toBe(0);
    expect(rendered.legendMax).toBe(1);
    expect(countMaxColorPixels(rendered)).toBe(1);
    // value index 3 is cell (i=1, j=1): top-right of the image, row 0
    const [r, g, b] = viridis(1);
    const topRight = (0 * 2 + 1) * 4;
    expect([rendered.pixels[topRight], rendered.pixels[topRight + 1], rendered.pixels[topRight + 2]])
      .toEqual([r, g, b]);
  });

  it('constant frame renders a single uniform color with min = max', () => {
    const rendered = renderFrame(frame(3, 3, Array(9).fill(4.2)));
    expect(rendered.legendMin).toBe(rendered.legendMax);
    const first = [rendered.pixels[0], rendered.pixels[1], rendered.pixels[2]];
    for (let k = 0; k < rendered.pixels.length; k += 4) {
      expect([rendered.pixels[k], rendered.pixels[k + 1], rendered.pixels[k + 2]]).toEqual(first);
    }
  });

  it('is a pure function: identical inputs give identical pixel buffers', () => {
    const payload = frame(4, 3, Array.from({ length: 12 }, (_, k) => Math.sin(k)));
    const a = renderFrame(payload);
    const b = renderFrame(payload);
    expect(Array.from(a.pixels)).toEqual(Array.from(b.pixels));
  });

  it('marks gaps (null) with the gap color', () => {
    const rendered = renderFrame(frame(2, 1, [1, null]));
    const gapOffset = (0 * 2 + 1) * 4;
    expect(rendered.pixels[gapOffset]).toBe(0);
    expect(rendered.pixels[gapOffset + 1]).toBe(0);
    expect(rendered.pixels[gapOffset + 2]).toBe(0);
  });
});

describe('cellAt hover lookup', () => {
  it('maps canvas pixels to cells (y flipped)', () => {
    const payload = frame(2, 2, [0, 1, 2, 3]);
    // canvas 100x100: bottom-left pixel is cell (0, 0) = value 0
    expect(cellAt(payload, 10, 90, 100, 100)).toEqual({ i: 0, j: 0, value: 0 });
    // top-right pixel is cell (1, 1) = value index 1*2+1 = 3
    expect(cellAt(payload, 90, 10, 100, 100)).toEqual({ i: 1, j: 1, value: 3 });
    expect(cellAt(payload, 500, 10, 100, 100)).toBeNull();
  });
});

describe('band overlay', () => {
  const fixture = JSON.parse(
    readFileSync(join(__dirname, 'fixtures', 'band45.json'), 'utf-8'),
  ) as { frame: FieldFramePayload; bands: Band[] };

  it('labels the shared 45-degree stripe fixture as 45 +- 2 degrees', () => {
    const labels = bandOverlay(fixture.frame, fixture.bands);
    expect(labels.length).toBe(1);
    const angle = parseFloat(labels[0].text);
    expect(Math.abs(angle - 45)).toBeLessThanOrEqual(2);
    expect(labels[0].text.endsWith('°')).toBe(true);
  });

  it('outlines exactly the band member cells', () => {
    const labels = bandOverlay(fixture.frame, fixture.bands);
    expect(labels[0].outline.length).toBe(fixture.bands[0].cells.length);
    const first = fixture.bands[0].cells[0];
    expect(labels[0].outline[0]).toEqual({
      i: Math.floor(first / fixture.frame.ny),
      j: first % fixture.frame.ny,
    });
  });

  it('formats angles rounded with a degree sign', () => {
    expect(formatAngle(44.7)).toBe('45°');
    expect(formatAngle(90)).toBe('90°');
  });
});
