export interface Pt {
  x: number;
  y: number;
}

/** Ray-casting point-in-polygon test. The polygon is implicitly closed.
 * Edge-coincident points are tie cases; real lasso strokes never land a
 * vertex exactly on a data point, so either verdict is acceptable there. */
export function pointInPolygon(p: Pt, polygon: readonly Pt[]): boolean {
  let inside = false;
  for (let i = 0, j = polygon.length - 1; i < polygon.length; j = i++) {
    const a = polygon[i];
    const b = polygon[j];
    if (a.y > p.y !== b.y > p.y) {
      const xAtY = ((b.x - a.x) * (p.y - a.y)) / (b.y - a.y) + a.x;
      if (p.x < xAtY) inside = !inside;
    }
  }
  return inside;
}

/** Indices of the points a closed lasso contains, in ascending order.
 * A degenerate polygon (fewer than 3 vertices) selects nothing. */
export function lassoHits(polygon: readonly Pt[], points: readonly Pt[]): number[] {
  if (polygon.length < 3) return [];
  const hits: number[] = [];
  for (let i = 0; i < points.length; i++) {
    if (pointInPolygon(points[i], polygon)) hits.push(i);
  }
  return hits;
}
