/** Categorical group colors: 12 base hues, recycled with a lightness lift
 * once a partition outgrows them. */

const BASE = [
  "#4e79a7",
  "#f28e2b",
  "#e15759",
  "#76b7b2",
  "#59a14f",
  "#edc948",
  "#b07aa1",
  "#ff9da7",
  "#9c755f",
  "#bab0ac",
  "#1f77b4",
  "#8c564b",
];

export const PALETTE_SIZE = BASE.length;

export function hexToHsl(hex: string): [number, number, number] {
  const r = parseInt(hex.slice(1, 3), 16) / 255;
  const g = parseInt(hex.slice(3, 5), 16) / 255;
  const b = parseInt(hex.slice(5, 7), 16) / 255;
  const max = Math.max(r, g, b);
  const min = Math.min(r, g, b);
  const l = (max + min) / 2;
  if (max === min) return [0, 0, l];
  const d = max - min;
  const s = l > 0.5 ? d / (2 - max - min) : d / (max + min);
  let h: number;
  if (max === r) h = ((g - b) / d + (g < b ? 6 : 0)) / 6;
  else if (max === g) h = ((b - r) / d + 2) / 6;
  else h = ((r - g) / d + 4) / 6;
  return [h, s, l];
}

export function hslToHex(h: number, s: number, l: number): string {
  const hueToRgb = (p: number, q: number, t: number) => {
    if (t < 0) t += 1;
    if (t > 1) t -= 1;
    if (t < 1 / 6) return p + (q - p) * 6 * t;
    if (t < 1 / 2) return q;
    if (t < 2 / 3) return p + (q - p) * (2 / 3 - t) * 6;
    return p;
  };
  let r: number, g: number, b: number;
  if (s === 0) {
    r = g = b = l;
  } else {
    const q = l < 0.5 ? l * (1 + s) : l + s - l * s;
    const p = 2 * l - q;
    r = hueToRgb(p, q, h + 1 / 3);
    g = hueToRgb(p, q, h);
    b = hueToRgb(p, q, h - 1 / 3);
  }
  const channel = (v: number) =>
    Math.round(v * 255)
      .toString(16)
      .padStart(2, "0");
  return `#${channel(r)}${channel(g)}${channel(b)}`;
}

/** Color for palette slot n: slots 0..11 are the base set, each later dozen
 * repeats the hues lighter. */
export function colorForSlot(slot: number): string {
  const base = BASE[slot % BASE.length];
  const cycle = Math.floor(slot / BASE.length);
  if (cycle === 0) return base;
  const [h, s, l] = hexToHsl(base);
  return hslToHex(h, s, Math.min(0.92, l + 0.16 * cycle));
}

/** Stable group-id -> color assignment. Groups that survive a partition edit
 * keep their color; new groups take the lowest free palette slot, so the
 * group added by a split gets the next unused color. */
export function assignGroupColors(
  groupIds: readonly number[],
  previous?: ReadonlyMap<number, string>,
): Map<number, string> {
  const out = new Map<number, string>();
  const used = new Set<string>();
  for (const gid of groupIds) {
    const kept = previous?.get(gid);
    if (kept !== undefined) {
      out.set(gid, kept);
      used.add(kept);
    }
  }
  let slot = 0;
  for (const gid of groupIds) {
    if (out.has(gid)) continue;
    while (used.has(colorForSlot(slot))) slot++;
    out.set(gid, colorForSlot(slot));
    used.add(colorForSlot(slot));
  }
  return out;
}
