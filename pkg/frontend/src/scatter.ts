import type { Pt } from "./geometry";
import type { LayoutPayload } from "./types";

export interface ScatterMark {
  index: number;
  id: string;
  cx: number;
  cy: number;
  group: number;
  color: string;
  outlier: boolean;
  selected: boolean;
}

export interface MedoidMark {
  group: number;
  id: string;
  cx: number;
  cy: number;
  color: string;
}

export interface ScatterScene {
  width: number;
  height: number;
  marks: ScatterMark[];
  medoids: MedoidMark[];
  toScreen(p: Pt): Pt;
  toData(p: Pt): Pt;
}

/** Pure scene model for the projection view: screen positions, per-group
 * colors, medoid squares, outlier rings, selection strokes. Lasso hit
 * testing stays in data coordinates, so a lasso drawn on any screen size or
 * zoom maps back through toData to the same data polygon. */
export function buildScene(
  layout: LayoutPayload,
  colors: ReadonlyMap<number, string>,
  selection: readonly number[],
  width = 640,
  height = 480,
  pad = 28,
): ScatterScene {
  const xs = layout.points.map((p) => p.x).concat(layout.medoids.map((m) => m.x));
  const ys = layout.points.map((p) => p.y).concat(layout.medoids.map((m) => m.y));
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(...ys);
  const yMax = Math.max(...ys);
  // degenerate spans still need a finite scale
  const xSpan = xMax - xMin || 1;
  const ySpan = yMax - yMin || 1;
  const sx = (width - 2 * pad) / xSpan;
  const sy = (height - 2 * pad) / ySpan;

  // y flips: data up is screen up
  const toScreen = (p: Pt): Pt => ({
    x: pad + (p.x - xMin) * sx,
    y: height - pad - (p.y - yMin) * sy,
  });
  const toData = (p: Pt): Pt => ({
    x: xMin + (p.x - pad) / sx,
    y: yMin + (height - pad - p.y) / sy,
  });

  const selected = new Set(selection);
  const marks = layout.points.map((p, i) => {
    const s = toScreen(p);
    return {
      index: i,
      id: p.id,
      cx: s.x,
      cy: s.y,
      group: p.group,
      color: colors.get(p.group) ?? "#777777",
      outlier: p.outlier,
      selected: selected.has(i),
    };
  });
  const medoids = layout.medoids.map((m) => {
    const s = toScreen(m);
    return {
      group: m.group,
      id: m.id,
      cx: s.x,
      cy: s.y,
      color: colors.get(m.group) ?? "#777777",
    };
  });

  return { width, height, marks, medoids, toScreen, toData };
}

const SVG_NS = "http://www.w3.org/2000/svg";

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, String(v));
  return el;
}

export interface ScatterHandlers {
  onMedoidClick?(group: number): void;
  onLasso?(dataPolygon: Pt[]): void;
}

/** Render the scene into an svg element and wire pointer interactions:
 * freehand lasso on drag, medoid squares clickable. */
export function renderScatter(
  svg: SVGSVGElement,
  scene: ScatterScene,
  handlers: ScatterHandlers = {},
) {
  svg.replaceChildren();
  svg.setAttribute("viewBox", `0 0 ${scene.width} ${scene.height}`);

  for (const mark of scene.marks) {
    if (mark.outlier) {
      // outlier convention: an open ring behind the dot
      svg.appendChild(
        svgEl("circle", {
          cx: mark.cx,
          cy: mark.cy,
          r: 7,
          fill: "none",
          stroke: mark.color,
          "stroke-width": 1.2,
          opacity: 0.9,
        }),
      );
    }
    svg.appendChild(
      svgEl("circle", {
        cx: mark.cx,
        cy: mark.cy,
        r: 3,
        fill: mark.color,
        stroke: mark.selected ? "#111111" : "none",
        "stroke-width": mark.selected ? 1.6 : 0,
      }),
    );
  }

  for (const medoid of scene.medoids) {
    const size = 11;
    const rect = svgEl("rect", {
      x: medoid.cx - size / 2,
      y: medoid.cy - size / 2,
      width: size,
      height: size,
      fill: medoid.color,
      stroke: "#111111",
      "stroke-width": 1.5,
      cursor: "pointer",
    });
    rect.addEventListener("click", () => handlers.onMedoidClick?.(medoid.group));
    svg.appendChild(rect);
  }

  let stroke: Pt[] = [];
  let path: SVGPathElement | null = null;
  const screenPoint = (ev: PointerEvent): Pt => {
    const box = svg.getBoundingClientRect();
    return {
      x: ((ev.clientX - box.left) / box.width) * scene.width,
      y: ((ev.clientY - box.top) / box.height) * scene.height,
    };
  };

  svg.addEventListener("pointerdown", (ev) => {
    if ((ev.target as Element).tagName === "rect") return;
    stroke = [screenPoint(ev)];
    path = svgEl("path", {
      fill: "rgba(60, 60, 60, 0.08)",
      stroke: "#555555",
      "stroke-dasharray": "4 3",
    });
    svg.appendChild(path);
    svg.setPointerCapture(ev.pointerId);
  });
  svg.addEventListener("pointermove", (ev) => {
    if (!path) return;
    stroke.push(screenPoint(ev));
    path.setAttribute("d", "M" + stroke.map((p) => `${p.x},${p.y}`).join("L") + "Z");
  });
  svg.addEventListener("pointerup", () => {
    if (!path) return;
    path.remove();
    path = null;
    handlers.onLasso?.(stroke.map((p) => scene.toData(p)));
    stroke = [];
  });
}
