import { apiBase } from "./config";
import type {
  FeatureHistogram,
  FeatureRanking,
  GroupAggregate,
  LayoutPayload,
  PipelineStatus,
  RankingsPayload,
  SelectedInstancesPayload,
  SelectionPayload,
  SessionInfo,
  SplitPayload,
} from "./types";

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

async function request<T>(
  method: string,
  path: string,
  body?: unknown,
  contentType = "application/json",
): Promise<T> {
  const init: RequestInit = { method, headers: {} };
  if (body !== undefined) {
    (init.headers as Record<string, string>)["content-type"] = contentType;
    init.body = contentType === "application/json" ? JSON.stringify(body) : (body as string);
  }
  const res = await fetch(`${apiBase()}${path}`, init);
  const text = await res.text();
  const payload = text ? JSON.parse(text) : null;
  if (!res.ok) {
    throw new ApiError(res.status, payload?.detail ?? res.statusText);
  }
  return payload as T;
}

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

export const api = {
  health: () => request<{ ok: boolean }>("GET", "/healthz"),

  createSession: (config?: Record<string, unknown>) =>
    request<SessionInfo>("POST", "/sessions", config ? { config } : {}),

  uploadCsv: (sid: string, csv: string, opts: { idColumn?: string; labelColumn?: string } = {}) => {
    const params = new URLSearchParams();
    if (opts.idColumn) params.set("id_column", opts.idColumn);
    if (opts.labelColumn) params.set("label_column", opts.labelColumn);
    const query = params.toString();
    return request<{ instances: number; features: number }>(
      "POST",
      `/sessions/${sid}/attributions${query ? "?" + query : ""}`,
      csv,
      "text/csv",
    );
  },

  /** Kick off the pipeline; large sessions answer with a job handle, so poll
   * until the job settles. */
  runPipeline: async (
    sid: string,
    overrides: Record<string, unknown> = {},
    pollMs = 250,
  ): Promise<PipelineStatus> => {
    let out = await request<PipelineStatus>("POST", `/sessions/${sid}/pipeline`, overrides);
    while (out.status === "running" && out.job_id) {
      await sleep(pollMs);
      out = await request<PipelineStatus>("GET", `/sessions/${sid}/jobs/${out.job_id}`);
    }
    if (out.status === "error") {
      throw new ApiError(500, out.error ?? "pipeline failed");
    }
    return out;
  },

  getLayout: (sid: string) => request<LayoutPayload>("GET", `/sessions/${sid}/layout`),

  getRankings: (sid: string) => request<RankingsPayload>("GET", `/sessions/${sid}/rankings`),

  getRanking: (sid: string, basis: "mean" | "deviation", group?: number) => {
    const params = new URLSearchParams({ basis });
    if (group !== undefined) params.set("group", String(group));
    return request<FeatureRanking>("GET", `/sessions/${sid}/ranking?${params}`);
  },

  getSelection: (sid: string) => request<SelectionPayload>("GET", `/sessions/${sid}/selection`),

  putSelection: (sid: string, indices: number[]) =>
    request<SelectionPayload>("PUT", `/sessions/${sid}/selection`, { indices }),

  getSelectedInstances: (sid: string) =>
    request<SelectedInstancesPayload>("GET", `/sessions/${sid}/selection/instances`),

  getSelectedGroups: (sid: string) =>
    request<{ aggregates: GroupAggregate[] }>("GET", `/sessions/${sid}/selection/groups`),

  getSplit: (sid: string) => request<SplitPayload>("GET", `/sessions/${sid}/split`),

  getHistograms: (sid: string, bins?: number) =>
    request<{ features: FeatureHistogram[] }>(
      "GET",
      `/sessions/${sid}/histograms${bins ? `?bins=${bins}` : ""}`,
    ),

  addSubpopulation: (sid: string) =>
    request<{ group: number; groups: number }>("POST", `/sessions/${sid}/subpopulations`),

  removeSubpopulation: (sid: string, gid: number) =>
    request<{ groups: number }>("DELETE", `/sessions/${sid}/subpopulations/${gid}`),
};
