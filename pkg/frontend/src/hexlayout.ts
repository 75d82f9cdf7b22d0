// Flat-top hex layout on odd-q offset coordinates (odd columns sit half a
// hex lower), matching the engine's convention exactly.

export const SQRT3 = Math.sqrt(3);

export interface Layout {
  size: number; // hex circumradius in px
  originX: number;
  originY: number;
}

export function hexCenter(layout: Layout, col: number, row: number): { x: number; y: number } {
  return {
    x: layout.originX + layout.size * 1.5 * col,
    y: layout.originY + layout.size * SQRT3 * (row + 0.5 * (col & 1)),
  };
}

export function hexCorners(layout: Layout, col: number, row: number): string {
  const { x, y } = hexCenter(layout, col, row);
  const pts: string[] = [];
  for (let k = 0; k < 6; k++) {
    const angle = (Math.PI / 3) * k;
    pts.push(`${(x + layout.size * Math.cos(angle)).toFixed(2)},${(y + layout.size * Math.sin(angle)).toFixed(2)}`);
  }
  return pts.join(" ");
}

export function boardPixelSize(
  layout: Layout, width: number, height: number,
): { w: number; h: number } {
  return {
    w: layout.originX + layout.size * (1.5 * (width - 1) + 2),
    h: layout.originY + layout.size * SQRT3 * (height + 0.5) + layout.size,
  };
}
