/** Viridis colormap: piecewise-linear interpolation of anchor colors. */

export type Rgb = [number, number, number];

const ANCHORS: Rgb[] = [
  [68, 1, 84],
  [71, 44, 122],
  [59, 81, 139],
  [44, 113, 142],
  [33, 144, 141],
  [39, 173, 129],
  [92, 200, 99],
  [170, 220, 50],
  [253, 231, 37],
];

/** Map t in [0, 1] to a viridis color; values outside are clamped. */
export function viridis(t: number): Rgb {
  const clamped = Math.max(0, Math.min(1, t));
  const scaled = clamped * (ANCHORS.length - 1);
  const lo = Math.floor(scaled);
  const hi = Math.min(lo + 1, ANCHORS.length - 1);
  const frac = scaled - lo;
  const mix = (a: number, b: number) => Math.round(a + (b - a) * frac);
  return [
    mix(ANCHORS[lo][0], ANCHORS[hi][0]),
    mix(ANCHORS[lo][1], ANCHORS[hi][1]),
    mix(ANCHORS[lo][2], ANCHORS[hi][2]),
  ];
}

/** Linear normalization; a constant field maps everywhere to 0. */
export function normalize(value: number, min: number, max: number): number {
  return max === min ? 0 : (value - min) / (max - min);
}
