/** Orthographic projection of atom positions for the composite preview.
 *
 * Rotation state is a pair of angles (yaw about the screen-vertical axis,
 * pitch about the screen-horizontal axis); projection drops the depth
 * coordinate after rotating, which is all the desk-scale preview needs.
 */

export interface ViewState {
  yaw: number;    // radians
  pitch: number;  // radians
  zoom: number;   // pixels per Angstrom
}

export interface ProjectedAtom {
  x: number;      // screen coordinates relative to the view center
  y: number;
  depth: number;  // for painter's-order sorting, larger = nearer
  index: number;
}

export function rotationMatrix(view: ViewState): number[][] {
  const cy = Math.cos(view.yaw);
  const sy = Math.sin(view.yaw);
  const cp = Math.cos(view.pitch);
  const sp = Math.sin(view.pitch);
  // pitch about x after yaw about y
  return [
    [cy, 0, sy],
    [sp * sy, cp, -sp * cy],
    [-cp * sy, sp, cp * cy],
  ];
}

export function project(
  positions: [number, number, number][],
  view: ViewState,
): ProjectedAtom[] {
  if (positions.length === 0) return [];
  const m = rotationMatrix(view);
  const cx = positions.reduce((a, p) => a + p[0], 0) / positions.length;
  const cy = positions.reduce((a, p) => a + p[1], 0) / positions.length;
  const cz = positions.reduce((a, p) => a + p[2], 0) / positions.length;
  const projected = positions.map(([px, py, pz], index) => {
    const x = px - cx;
    const y = py - cy;
    const z = pz - cz;
    return {
      x: (m[0][0] * x + m[0][1] * y + m[0][2] * z) * view.zoom,
      y: -(m[1][0] * x + m[1][1] * y + m[1][2] * z) * view.zoom,
      depth: m[2][0] * x + m[2][1] * y + m[2][2] * z,
      index,
    };
  });
  projected.sort((a, b) => a.depth - b.depth); // far first, near painted last
  return projected;
}

const SPECIES_COLORS: Record<string, string> = {
  Al: '#9aa7b8',
  C: '#44c26a',
  Si: '#c9a06a',
};

export function speciesColor(species: string): string {
  return SPECIES_COLORS[species] ?? '#d27fd2';
}
