/** Field frame rendering.
 *
 * The heavy lifting is a pure function of (frame, palette) producing an
 * RGBA buffer, so identical inputs give identical pixels and tests run
 * without a DOM.  Canvas blitting and the hover/legend/overlay chrome sit
 * on top.
 */

import { normalize, viridis, type Rgb } from './colormap.js';
import type { Band, FieldFramePayload } from './types.js';

export interface RenderedField {
  /** RGBA, one pixel per cell, row 0 = top of the image (highest y). */
  pixels: Uint8ClampedArray;
  width: number;
  height: number;
  legendMin: number;
  legendMax: number;
}

export const GAP_COLOR: Rgb = [0, 0, 0];

export function renderFrame(
  frame: FieldFramePayload,
  palette: (t: number) => Rgb = viridis,
): RenderedField {
  const { nx, ny, values } = frame;
  const finite = values.filter((v): v is number => v !== null && Number.isFinite(v));
  const min = finite.length ? Math.min(...finite) : 0;
  const max = finite.length ? Math.max(...finite) : 0;
  const pixels = new Uint8ClampedArray(nx * ny * 4);
  for (let j = 0; j < ny; j += 1) {
    const row = ny - 1 - j; // image rows run top to bottom
    for (let i = 0; i < nx; i += 1) {
      const value = values[i * ny + j];
      const rgb = value === null || !Number.isFinite(value)
        ? GAP_COLOR
        : palette(normalize(value, min, max));
      const offset = (row * nx + i) * 4;
      pixels[offset] = rgb[0];
      pixels[offset + 1] = rgb[1];
      pixels[offset + 2] = rgb[2];
      pixels[offset + 3] = 255;
    }
  }
  return { pixels, width: nx, height: ny, legendMin: min, legendMax: max };
}

/** Count pixels whose color exactly matches palette(1), i.e. cells at the
 * legend maximum.  Degenerate (constant) frames map everything to 0. */
export function countMaxColorPixels(rendered: RenderedField, palette: (t: number) => Rgb = viridis): number {
  if (rendered.legendMax === rendered.legendMin) return 0;
  const [r, g, b] = palette(1);
  let count = 0;
  for (let k = 0; k < rendered.pixels.length; k += 4) {
    if (rendered.pixels[k] === r && rendered.pixels[k + 1] === g && rendered.pixels[k + 2] === b) {
      count += 1;
    }
  }
  return count;
}

/** Cell under an image-space pixel (for hover readouts). */
export function cellAt(
  frame: FieldFramePayload,
  pixelX: number,
  pixelY: number,
  canvasWidth: number,
  canvasHeight: number,
): { i: number; j: number; value: number | null } | null {
  const i = Math.floor((pixelX / canvasWidth) * frame.nx);
  const jFromTop = Math.floor((pixelY / canvasHeight) * frame.ny);
  const j = frame.ny - 1 - jFromTop;
  if (i < 0 || i >= frame.nx || j < 0 || j >= frame.ny) return null;
  return { i, j, value: frame.values[i * frame.ny + j] };
}

export interface BandLabel {
  text: string;
  /** label anchor in cell coordinates (i, j of the band centroid) */
  i: number;
  j: number;
  outline: { i: number; j: number }[];
}

export function formatAngle(angleDeg: number): string {
  return `${Math.round(angleDeg)}°`;
}

/** Outline cells and an angle label for each band, in cell coordinates. */
export function bandOverlay(frame: FieldFramePayload, bands: Band[]): BandLabel[] {
  return bands.map((band) => {
    const cells = band.cells.map((flat) => ({
      i: Math.floor(flat / frame.ny),
      j: flat % frame.ny,
    }));
    const ci = cells.reduce((acc, c) => acc + c.i, 0) / cells.length;
    const cj = cells.reduce((acc, c) => acc + c.j, 0) / cells.length;
    return {
      text: formatAngle(band.angle_deg),
      i: ci,
      j: cj,
      outline: cells,
    };
  });
}

/** Blit a rendered field onto a canvas, scaled with nearest-neighbor. */
export function drawToCanvas(
  rendered: RenderedField,
  canvas: HTMLCanvasElement,
  scale: number,
): void {
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  canvas.width = rendered.width * scale;
  canvas.height = rendered.height * scale;
  const image = new ImageData(new Uint8ClampedArray(rendered.pixels), rendered.width, rendered.height);
  const buffer = document.createElement('canvas');
  buffer.width = rendered.width;
  buffer.height = rendered.height;
  buffer.getContext('2d')?.putImageData(image, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(buffer, 0, 0, canvas.width, canvas.height);
}

/** Draw band outlines and angle labels over an already-blitted frame. */
export function drawOverlay(
  labels: BandLabel[],
  frame: FieldFramePayload,
  canvas: HTMLCanvasElement,
  scale: number,
): void {
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  ctx.save();
  ctx.strokeStyle = 'rgba(255, 80, 80, 0.9)';
  ctx.fillStyle = 'rgba(255, 255, 255, 0.95)';
  ctx.font = `${Math.max(10, 3 * scale)}px sans-serif`;
  for (const label of labels) {
    for (const cell of label.outline) {
      const x = cell.i * scale;
      const y = (frame.ny - 1 - cell.j) * scale;
      ctx.strokeRect(x, y, scale, scale);
    }
    const lx = label.i * scale;
    const ly = (frame.ny - 1 - label.j) * scale;
    ctx.fillText(label.text, lx, ly);
  }
  ctx.restore();
}
