import { api } from "./api";
import { lassoHits, Pt } from "./geometry";
import { assignGroupColors } from "./palette";
import type {
  FeatureHistogram,
  LayoutPayload,
  RankingsPayload,
  SplitPayload,
} from "./types";

export type SortKey =
  | { kind: "none" }
  | { kind: "group"; gid: number }
  | { kind: "deviation" };

type Listener = () => void;

/** Single source of truth for both views. All mutations are
 * confirm-then-render: the server acknowledges first, then the caches and
 * the DOM update, so the UI can never drift from the session. */
export class AppState {
  sessionId: string | null = null;
  layout: LayoutPayload | null = null;
  rankings: RankingsPayload | null = null;
  histograms: FeatureHistogram[] | null = null;
  split: SplitPayload | null = null;
  selection: number[] = [];
  sort: SortKey = { kind: "none" };
  colors: Map<number, string> = new Map();

  private listeners: Listener[] = [];

  onChange(listener: Listener) {
    this.listeners.push(listener);
  }

  private emit() {
    for (const listener of this.listeners) listener();
  }

  private requireSession(): string {
    if (!this.sessionId) throw new Error("no session attached");
    return this.sessionId;
  }

  groupIds(): number[] {
    if (!this.layout) return [];
    return this.layout.medoids.map((m) => m.group).sort((a, b) => a - b);
  }

  groupMembers(gid: number): number[] {
    if (!this.layout) return [];
    const members: number[] = [];
    this.layout.points.forEach((p, i) => {
      if (p.group === gid) members.push(i);
    });
    return members;
  }

  async createSession(config?: Record<string, unknown>): Promise<string> {
    const info = await api.createSession(config);
    this.sessionId = info.session_id;
    this.emit();
    return info.session_id;
  }

  attach(sessionId: string) {
    this.sessionId = sessionId;
    this.emit();
  }

  async upload(csv: string, opts: { idColumn?: string; labelColumn?: string } = {}) {
    return api.uploadCsv(this.requireSession(), csv, opts);
  }

  async runPipeline(overrides: Record<string, unknown> = {}) {
    const status = await api.runPipeline(this.requireSession(), overrides);
    await this.refresh();
    return status;
  }

  /** Refetch every cache the views draw from; group colors are carried over
   * so surviving groups keep their hue across partition edits. */
  async refresh() {
    const sid = this.requireSession();
    this.layout = await api.getLayout(sid);
    this.rankings = await api.getRankings(sid);
    this.histograms = (await api.getHistograms(sid)).features;
    this.split = await api.getSplit(sid);
    this.selection = (await api.getSelection(sid)).indices;
    this.colors = assignGroupColors(this.groupIds(), this.colors);
    this.emit();
  }

  /** PUT the selection and mirror the server's acknowledged copy. */
  async setSelection(indices: number[]): Promise<number[]> {
    const sid = this.requireSession();
    const ack = await api.putSelection(sid, indices);
    this.selection = ack.indices;
    this.split = await api.getSplit(sid);
    this.emit();
    return this.selection;
  }

  /** Lasso in data coordinates. Fewer than 3 vertices is a no-op; otherwise
   * the geometrically contained indices are what gets posted. */
  async lasso(polygon: Pt[]): Promise<number[]> {
    if (!this.layout || polygon.length < 3) return this.selection;
    return this.setSelection(lassoHits(polygon, this.layout.points));
  }

  /** Medoid click: select that medoid's entire subpopulation. */
  async selectGroup(gid: number): Promise<number[]> {
    if (!this.layout) throw new Error("no layout yet");
    return this.setSelection(this.groupMembers(gid));
  }

  async clearSelection(): Promise<number[]> {
    return this.setSelection([]);
  }

  async addSubpopulation(): Promise<number> {
    const out = await api.addSubpopulation(this.requireSession());
    await this.refresh();
    return out.group;
  }

  async removeSubpopulation(gid: number): Promise<void> {
    await api.removeSubpopulation(this.requireSession(), gid);
    await this.refresh();
  }

  setSort(sort: SortKey) {
    this.sort = sort;
    this.emit();
  }
}
