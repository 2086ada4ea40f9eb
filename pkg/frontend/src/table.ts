import type { SortKey } from "./state";
import type {
  FeatureHistogram,
  RankingsPayload,
  SplitPayload,
} from "./types";

export interface BarCell {
  gid: number;
  color: string;
  mean: number;
  /** mean / max |mean| in this column; bar lengths are linear in the means */
  length: number;
  /** mass-weighted decomposition: selectedValue + unselectedValue = mean */
  selectedValue: number;
  unselectedValue: number;
  selectedLength: number;
  unselectedLength: number;
}

export interface HistogramSeries {
  gid: number;
  color: string;
  /** group-size-normalized masses straight from the service; sum to 1 */
  masses: number[];
}

export interface HistogramCell {
  edges: number[];
  series: HistogramSeries[];
}

export interface TableRow {
  feature: number;
  name: string;
  cells: BarCell[];
  histogram: HistogramCell | null;
  deviation: number | null;
}

export interface TableModel {
  /** feature indices in display order */
  order: number[];
  rows: TableRow[];
  columns: { gid: number; color: string }[];
  deviationEnabled: boolean;
  sort: SortKey;
}

function displayOrder(rankings: RankingsPayload, sort: SortKey): number[] {
  const natural = rankings.feature_names.map((_, f) => f);
  if (sort.kind === "group") {
    const ranking = rankings.mean[String(sort.gid)];
    return ranking ? [...ranking.order] : natural;
  }
  if (sort.kind === "deviation") {
    return rankings.deviation ? [...rankings.deviation.order] : natural;
  }
  return natural;
}

/** Build the detail-table data model: one row per feature, a mean-attribution
 * bar per group (split into selected / unselected segments when a selection
 * is active), the superposed per-group histogram, and the deviation score.
 * Column header sorts use the engine's own rankings, so the rendered order
 * is exactly the engine's order. */
export function buildTable(
  rankings: RankingsPayload,
  histograms: FeatureHistogram[] | null,
  split: SplitPayload | null,
  colors: ReadonlyMap<number, string>,
  sort: SortKey = { kind: "none" },
): TableModel {
  const gids = Object.keys(rankings.mean)
    .map(Number)
    .sort((a, b) => a - b);
  const columns = gids.map((gid) => ({ gid, color: colors.get(gid) ?? "#777777" }));

  const splitByGid = new Map(split?.groups.map((g) => [g.group_id, g]) ?? []);

  // shared scale per column: max |mean| over the features of that group
  const columnScale = new Map<number, number>();
  for (const gid of gids) {
    const scores = rankings.mean[String(gid)].scores;
    columnScale.set(gid, Math.max(...scores.map(Math.abs)) || 1);
  }

  const order = displayOrder(rankings, sort);
  const rows = order.map((f) => {
    const cells = gids.map((gid) => {
      const mean = rankings.mean[String(gid)].scores[f];
      const scale = columnScale.get(gid)!;
      const gsplit = splitByGid.get(gid);
      let selectedValue = 0;
      let unselectedValue = mean;
      if (gsplit) {
        const size = gsplit.selected_count + gsplit.unselected_count;
        if (size > 0) {
          selectedValue = (gsplit.selected_count / size) * gsplit.selected_mean[f];
          unselectedValue = (gsplit.unselected_count / size) * gsplit.unselected_mean[f];
        }
      }
      return {
        gid,
        color: colors.get(gid) ?? "#777777",
        mean,
        length: mean / scale,
        selectedValue,
        unselectedValue,
        selectedLength: selectedValue / scale,
        unselectedLength: unselectedValue / scale,
      };
    });

    const hist = histograms?.[f];
    const histogram: HistogramCell | null = hist
      ? {
          edges: hist.bin_edges,
          series: gids.map((gid) => ({
            gid,
            color: colors.get(gid) ?? "#777777",
            masses: hist.groups[String(gid)] ?? [],
          })),
        }
      : null;

    return {
      feature: f,
      name: rankings.feature_names[f],
      cells,
      histogram,
      deviation: rankings.deviation ? rankings.deviation.scores[f] : null,
    };
  });

  return {
    order,
    rows,
    columns,
    deviationEnabled: rankings.deviation !== null,
    sort,
  };
}

export interface TableHandlers {
  onSortByGroup?(gid: number): void;
  onSortByDeviation?(): void;
}

function barSvg(cell: BarCell): string {
  const width = 120;
  const h = 14;
  const sel = Math.abs(cell.selectedLength) * width;
  const unsel = Math.abs(cell.unselectedLength) * width;
  // stroked segment = selected share, plain segment = the rest
  return (
    `<svg width="${width}" height="${h}">` +
    `<rect x="0" y="2" width="${sel.toFixed(1)}" height="${h - 4}" ` +
    `fill="${cell.color}" stroke="#111" stroke-width="1.2"></rect>` +
    `<rect x="${sel.toFixed(1)}" y="2" width="${unsel.toFixed(1)}" height="${h - 4}" ` +
    `fill="${cell.color}" opacity="0.55"></rect>` +
    `</svg>`
  );
}

function histogramSvg(cell: HistogramCell): string {
  const width = 140;
  const h = 30;
  const peak = Math.max(...cell.series.flatMap((s) => s.masses), 1e-12);
  const parts: string[] = [];
  for (const series of cell.series) {
    const n = series.masses.length;
    const bw = width / n;
    for (let b = 0; b < n; b++) {
      const bh = (series.masses[b] / peak) * (h - 2);
      if (bh <= 0) continue;
      parts.push(
        `<rect x="${(b * bw).toFixed(1)}" y="${(h - bh).toFixed(1)}" ` +
          `width="${bw.toFixed(1)}" height="${bh.toFixed(1)}" ` +
          `fill="${series.color}" opacity="0.45"></rect>`,
      );
    }
  }
  return `<svg width="${width}" height="${h}">${parts.join("")}</svg>`;
}

/** Render the model into a table element; header clicks re-sort. */
export function renderTable(
  root: HTMLTableElement,
  model: TableModel,
  handlers: TableHandlers = {},
) {
  root.replaceChildren();

  const head = root.createTHead().insertRow();
  const nameTh = document.createElement("th");
  nameTh.textContent = "feature";
  head.appendChild(nameTh);
  for (const column of model.columns) {
    const th = document.createElement("th");
    th.textContent = `group ${column.gid}`;
    th.style.color = column.color;
    th.style.cursor = "pointer";
    th.addEventListener("click", () => handlers.onSortByGroup?.(column.gid));
    head.appendChild(th);
  }
  const histTh = document.createElement("th");
  histTh.textContent = "distribution";
  if (model.deviationEnabled) {
    histTh.style.cursor = "pointer";
    histTh.addEventListener("click", () => handlers.onSortByDeviation?.());
  } else {
    histTh.classList.add("disabled");
    histTh.title = "deviation sort needs at least 2 groups";
  }
  head.appendChild(histTh);

  const body = root.createTBody();
  for (const row of model.rows) {
    const tr = body.insertRow();
    tr.insertCell().textContent = row.name;
    for (const cell of row.cells) {
      tr.insertCell().innerHTML = barSvg(cell);
    }
    const histTd = tr.insertCell();
    if (row.histogram) histTd.innerHTML = histogramSvg(row.histogram);
  }
}
