import { ApiError } from "./api";
import { AppState } from "./state";
import { buildScene, renderScatter } from "./scatter";
import { buildTable, renderTable } from "./table";

const state = new AppState();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const scatterSvg = el<HTMLElement>("scatter") as unknown as SVGSVGElement;
const tableEl = el<HTMLTableElement>("detail");
const statusEl = el<HTMLDivElement>("status");
const errorEl = el<HTMLDivElement>("error");

function setStatus(text: string) {
  statusEl.textContent = text;
}

function showError(message: string) {
  errorEl.textContent = message;
  errorEl.hidden = !message;
}

/** 409/422 from the service read as user-facing state problems; show them
 * inline instead of throwing to the console. */
async function guard<T>(work: () => Promise<T>): Promise<T | undefined> {
  try {
    showError("");
    return await work();
  } catch (err) {
    if (err instanceof ApiError) {
      showError(`${err.status}: ${err.message}`);
      return undefined;
    }
    throw err;
  }
}

function redraw() {
  if (state.layout) {
    const scene = buildScene(
      state.layout,
      state.colors,
      state.selection,
      scatterSvg.clientWidth || 640,
      scatterSvg.clientHeight || 480,
    );
    renderScatter(scatterSvg, scene, {
      onMedoidClick: (gid) => void guard(() => state.selectGroup(gid)),
      onLasso: (polygon) => void guard(() => state.lasso(polygon)),
    });
  }
  if (state.rankings) {
    const model = buildTable(
      state.rankings,
      state.histograms,
      state.split,
      state.colors,
      state.sort,
    );
    renderTable(tableEl, model, {
      onSortByGroup: (gid) => state.setSort({ kind: "group", gid }),
      onSortByDeviation: () => state.setSort({ kind: "deviation" }),
    });
  }
  const k = state.groupIds().length;
  el<HTMLButtonElement>("add-group").disabled = state.selection.length === 0;
  setStatus(
    state.sessionId
      ? `session ${state.sessionId} | ${k} groups | ${state.selection.length} selected`
      : "no session",
  );
}

state.onChange(redraw);

el<HTMLInputElement>("file").addEventListener("change", async (ev) => {
  const file = (ev.target as HTMLInputElement).files?.[0];
  if (!file) return;
  const csv = await file.text();
  await guard(async () => {
    if (!state.sessionId) await state.createSession();
    const idColumn = el<HTMLInputElement>("id-column").value.trim() || undefined;
    const shape = await state.upload(csv, { idColumn });
    setStatus(`uploaded ${shape.instances} x ${shape.features}; running...`);
    await state.runPipeline();
  });
});

el<HTMLButtonElement>("add-group").addEventListener("click", () => {
  void guard(() => state.addSubpopulation());
});

el<HTMLButtonElement>("remove-group").addEventListener("click", () => {
  const gid = Number(el<HTMLInputElement>("remove-gid").value);
  void guard(() => state.removeSubpopulation(gid));
});

el<HTMLButtonElement>("clear-selection").addEventListener("click", () => {
  void guard(() => state.clearSelection());
});

redraw();
