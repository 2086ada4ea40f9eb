/** Service location. Resolution order: explicit setApiBase call, an
 * API_BASE_URL global injected by the host page, the bundler's
 * VITE_API_BASE_URL, then the dev default. */

let override: string | null = null;

export function setApiBase(url: string) {
  override = url.replace(/\/+$/, "");
}

export function apiBase(): string {
  if (override) return override;
  const fromGlobal = (globalThis as { API_BASE_URL?: string }).API_BASE_URL;
  const fromEnv = (import.meta as { env?: Record<string, string> }).env?.VITE_API_BASE_URL;
  return String(fromGlobal ?? fromEnv ?? "http://127.0.0.1:8000").replace(/\/+$/, "");
}
